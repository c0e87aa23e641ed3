//! Error norms on nested meshes, Wasserstein-1 on the circle and
//! experimental orders of convergence.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{norm_lq, Field};

/// Tolerance on the mass difference accepted by [`wasserstein1`].
pub const MASS_TOLERANCE: f64 = 1e-8;

/// Exact volume-weighted restriction onto a coarse mesh with `N_f = 2^s N_c`.
///
/// Cells are centred at `l dx`, so coarse cell `l` covers the fine cells
/// `lR - R/2 + 1, ..., lR + R/2 - 1` (`R = N_f / N_c`) fully and the two
/// cells `lR +- R/2` by half.
pub fn restrict(fine: &[f64], coarse_cells: usize) -> Result<Field> {
    let nf = fine.len();
    if coarse_cells == 0
        || !nf.is_multiple_of(coarse_cells)
        || !(nf / coarse_cells).is_power_of_two()
    {
        return Err(Error::NonNestedMeshes {
            fine: nf,
            coarse: coarse_cells,
        });
    }
    let ratio = nf / coarse_cells;
    if ratio == 1 {
        return Ok(Field(fine.to_vec()));
    }
    let half = ratio / 2;
    Ok(Field(
        (0..coarse_cells)
            .map(|l| {
                let centre = l * ratio;
                let at = |k: isize| fine[(centre as isize + k).rem_euclid(nf as isize) as usize];
                let h = half as isize;
                let inner: f64 = (1 - h..h).map(at).sum();
                (inner + 0.5 * (at(-h) + at(h))) / ratio as f64
            })
            .collect(),
    ))
}

/// `||a - b||_{0,p}`.
pub fn lp_error(a: &[f64], b: &[f64], p: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm_lq(&d, p)
}

/// Wasserstein-1 distance on the unit circle between two cell densities of
/// equal mass.
///
/// With `G_l = sum_{m<=l} dx (a_m - b_m)` the distance is
/// `min_c sum_l dx |G_l - c|`, attained at a median of `G`.
pub fn wasserstein1(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::InvalidMesh("empty field".into()));
    }
    if let Some(v) = a.iter().chain(b).find(|v| **v < 0.0 || v.is_nan()) {
        return Err(Error::NegativeData(format!("density entry {v:e}")));
    }
    let dx = 1.0 / a.len() as f64;
    let mut acc = 0.0;
    let cdf: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            acc += dx * (x - y);
            acc
        })
        .collect();
    let scale = 1.0 + dx * a.iter().sum::<f64>();
    if acc.abs() > MASS_TOLERANCE * scale {
        return Err(Error::MassMismatch(acc));
    }
    let mut sorted = cdf.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[(sorted.len() - 1) / 2];
    Ok(dx * cdf.iter().map(|g| (g - median).abs()).sum::<f64>())
}

/// Errors of one coarse run against the reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    /// Mesh size (or kernel width in a localization study).
    pub h: f64,
    pub cells: usize,
    pub l1: f64,
    pub linf: f64,
    pub w1: Option<f64>,
}

impl ErrorRecord {
    /// Errors summed over species for `L^1` and `W_1`, maximum over
    /// species for `L^inf`. `reference` may live on a finer nested mesh.
    pub fn compare(h: f64, coarse: &[Field], reference: &[Field], with_w1: bool) -> Result<Self> {
        if coarse.len() != reference.len() || coarse.is_empty() {
            return Err(Error::LengthMismatch {
                expected: reference.len(),
                found: coarse.len(),
            });
        }
        let cells = coarse[0].len();
        let (mut l1, mut linf, mut w1) = (0.0, 0.0f64, 0.0);
        for (c, r) in coarse.iter().zip(reference) {
            let r = restrict(r, cells)?;
            l1 += lp_error(c, &r, 1.0)?;
            linf = linf.max(lp_error(c, &r, f64::INFINITY)?);
            if with_w1 {
                w1 += wasserstein1(c, &r)?;
            }
        }
        Ok(Self {
            h,
            cells,
            l1,
            linf,
            w1: with_w1.then_some(w1),
        })
    }
}

/// Least-squares slope of `log(error)` against `log(h)`.
pub fn eoc_slope(h: &[f64], err: &[f64]) -> Result<f64> {
    if h.len() != err.len() {
        return Err(Error::LengthMismatch {
            expected: h.len(),
            found: err.len(),
        });
    }
    if h.len() < 2 {
        return Err(Error::DegenerateRegression(
            "need at least two levels".into(),
        ));
    }
    if h.iter().chain(err).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::DegenerateRegression(
            "nonpositive error or mesh size".into(),
        ));
    }
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let m = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / m, y.iter().sum::<f64>() / m);
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateRegression("all mesh sizes equal".into()));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok(sxy / sxx)
}

/// Regressed orders per norm. A norm whose regression is degenerate maps
/// to `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Orders {
    pub l1: Option<f64>,
    pub linf: Option<f64>,
    pub w1: Option<f64>,
}

pub fn eoc(records: &[ErrorRecord]) -> Result<Orders> {
    if records.len() < 2 {
        return Err(Error::DegenerateRegression(
            "need at least two levels".into(),
        ));
    }
    let h: Vec<f64> = records.iter().map(|r| r.h).collect();
    let col = |f: fn(&ErrorRecord) -> f64| {
        let e: Vec<f64> = records.iter().map(f).collect();
        eoc_slope(&h, &e).ok()
    };
    let w1 = if records.iter().all(|r| r.w1.is_some()) {
        col(|r| r.w1.unwrap_or(0.0))
    } else {
        None
    };
    Ok(Orders {
        l1: col(|r| r.l1),
        linf: col(|r| r.linf),
        w1,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), |x| format!("{x:.16e}"))
}

/// `h,N,L1,Linf,W1` rows.
pub fn write_study_csv<W: Write>(mut w: W, records: &[ErrorRecord]) -> Result<()> {
    writeln!(w, "h,N,L1,Linf,W1")?;
    for r in records {
        writeln!(
            w,
            "{:.16e},{},{:.16e},{:.16e},{}",
            r.h,
            r.cells,
            r.l1,
            r.linf,
            opt(r.w1)
        )?;
    }
    Ok(())
}

/// `norm,order` rows.
pub fn write_orders_csv<W: Write>(mut w: W, orders: &Orders) -> Result<()> {
    writeln!(w, "norm,order")?;
    writeln!(w, "L1,{}", opt(orders.l1))?;
    writeln!(w, "Linf,{}", opt(orders.linf))?;
    writeln!(w, "W1,{}", opt(orders.w1))?;
    Ok(())
}
