//! Interaction kernels: analytic shapes, exact cell averaging onto a mesh and
//! the periodic discrete convolution
//!
//! ```text
//! (K * v)_l = sum_{l'} dx B_{l - l'} v_{l'},   B_m = (1/dx) int_{K_m} B(y) dy
//! ```
//!
//! Weights are indexed by the periodic offset `m = 0..N-1`; offset `m` and
//! `m - N` denote the same cell.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Mesh};

/// Analytic (or tabulated) kernel on the torus, in torus units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    /// The Dirac mass at the origin: convolution is the identity.
    Dirac,
    /// `height * 1_{(-radius, radius)}(z)`.
    Indicator {
        radius: f64,
        #[serde(default = "one")]
        height: f64,
    },
    /// `height * max(1 - |z| / radius, 0)`.
    Triangle { radius: f64, height: f64 },
    /// Normalized Gaussian `exp(-z^2 / (2 w^2)) / sqrt(2 pi w^2)`, periodized.
    Gaussian { width: f64 },
    /// Cell averages given directly on the target mesh, indexed by offset.
    Tabulated { weights: Vec<f64> },
}

fn one() -> f64 {
    1.0
}

impl KernelSpec {
    pub fn indicator(radius: f64) -> Self {
        KernelSpec::Indicator {
            radius,
            height: 1.0,
        }
    }

    /// Unit-mass indicator `1_{[-a, a]} / (2a)`.
    pub fn normalized_indicator(alpha: f64) -> Self {
        KernelSpec::Indicator {
            radius: alpha,
            height: 0.5 / alpha,
        }
    }

    /// Unit-mass hat `max(1 - |z|/a, 0) / a`.
    pub fn normalized_triangle(alpha: f64) -> Self {
        KernelSpec::Triangle {
            radius: alpha,
            height: 1.0 / alpha,
        }
    }

    pub fn gaussian(width: f64) -> Self {
        KernelSpec::Gaussian { width }
    }

    pub fn is_dirac(&self) -> bool {
        matches!(self, KernelSpec::Dirac)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidKernel(msg));
        match self {
            KernelSpec::Dirac => Ok(()),
            KernelSpec::Indicator { radius, height } | KernelSpec::Triangle { radius, height } => {
                if !(*radius > 0.0 && *radius <= 0.5) {
                    return bad(format!("radius {radius} outside (0, 1/2]"));
                }
                if !(*height >= 0.0 && height.is_finite()) {
                    return bad(format!("height {height} must be finite and nonnegative"));
                }
                Ok(())
            }
            KernelSpec::Gaussian { width } => {
                if !(*width > 0.0 && width.is_finite()) {
                    return bad(format!("gaussian width {width} must be positive"));
                }
                Ok(())
            }
            KernelSpec::Tabulated { weights } => {
                if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
                    return bad(format!("tabulated weight {w} is negative or not finite"));
                }
                Ok(())
            }
        }
    }

    /// Pointwise value of the periodized kernel (not defined for Dirac).
    pub fn value(&self, z: f64) -> f64 {
        let z = z - z.round();
        match *self {
            KernelSpec::Dirac | KernelSpec::Tabulated { .. } => f64::NAN,
            KernelSpec::Indicator { radius, height } => {
                if z.abs() < radius {
                    height
                } else {
                    0.0
                }
            }
            KernelSpec::Triangle { radius, height } => height * (1.0 - z.abs() / radius).max(0.0),
            KernelSpec::Gaussian { width } => {
                let reach = gaussian_images(width);
                (-reach..=reach)
                    .map(|k| {
                        let y = z + k as f64;
                        (-y * y / (2.0 * width * width)).exp()
                            / (2.0 * std::f64::consts::PI * width * width).sqrt()
                    })
                    .sum()
            }
        }
    }

    /// `int_T B`; the Dirac mass counts as 1.
    pub fn integral(&self) -> f64 {
        match self {
            KernelSpec::Dirac | KernelSpec::Gaussian { .. } => 1.0,
            KernelSpec::Indicator { radius, height } => 2.0 * radius * height,
            KernelSpec::Triangle { radius, height } => radius * height,
            KernelSpec::Tabulated { weights } => {
                weights.iter().sum::<f64>() / weights.len().max(1) as f64
            }
        }
    }

    /// Exact integral of the non-periodized profile over `(a, b)`.
    fn segment_integral(&self, a: f64, b: f64) -> f64 {
        match *self {
            KernelSpec::Indicator { radius, height } => {
                height * (b.min(radius) - a.max(-radius)).max(0.0)
            }
            KernelSpec::Triangle { radius, height } => {
                // odd antiderivative of max(1 - |t|/r, 0)
                let prim = |z: f64| {
                    let s = z.abs().min(radius);
                    z.signum() * (s - s * s / (2.0 * radius))
                };
                height * (prim(b) - prim(a))
            }
            KernelSpec::Gaussian { width } => {
                let scale = std::f64::consts::SQRT_2 * width;
                if a >= 0.0 {
                    0.5 * (libm::erfc(a / scale) - libm::erfc(b / scale))
                } else if b <= 0.0 {
                    0.5 * (libm::erfc(-b / scale) - libm::erfc(-a / scale))
                } else {
                    0.5 * (libm::erf(b / scale) - libm::erf(a / scale))
                }
            }
            KernelSpec::Dirac | KernelSpec::Tabulated { .. } => unreachable!(),
        }
    }
}

/// Number of periodic images on each side needed for the Gaussian tail to
/// drop below 1e-14 relative to the kernel mass.
fn gaussian_images(width: f64) -> i64 {
    // tail beyond distance d is below exp(-d^2 / 2w^2); 1e-16 needs d > 8.6 w
    (8.6 * width + 0.5).ceil() as i64
}

/// A kernel discretized on a specific mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteKernel {
    cells: usize,
    mode: KernelMode,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelMode {
    Dirac,
    Tabulated {
        weights: Vec<f64>,
        /// Offsets with nonzero weight, for the convolution loop.
        support: Vec<usize>,
    },
}

/// Signed representative of offset `m`, in `(-N/2, N/2]`.
#[inline]
pub fn signed_offset(m: usize, n: usize) -> isize {
    if 2 * m <= n {
        m as isize
    } else {
        m as isize - n as isize
    }
}

/// Cell averages `B_m = (1/dx) int_{K_m} B(y) dy` of `spec` on `mesh`.
pub fn cell_average(spec: &KernelSpec, mesh: &Mesh) -> Result<DiscreteKernel> {
    spec.validate()?;
    let n = mesh.cells();
    let dx = mesh.dx();
    let weights = match spec {
        KernelSpec::Dirac => return Ok(DiscreteKernel::dirac(n)),
        KernelSpec::Tabulated { weights } => {
            mesh.check(weights)?;
            weights.clone()
        }
        // even shapes: evaluate at |offset| so that B_m = B_{-m} holds bitwise
        KernelSpec::Indicator { .. } | KernelSpec::Triangle { .. } => (0..n)
            .map(|m| {
                let s = signed_offset(m, n).unsigned_abs() as f64;
                let (a, b) = ((s - 0.5) * dx, (s + 0.5) * dx);
                (-1..=1)
                    .map(|k| spec.segment_integral(a + k as f64, b + k as f64))
                    .sum::<f64>()
                    / dx
            })
            .collect(),
        KernelSpec::Gaussian { width } => {
            let reach = gaussian_images(*width);
            (0..n)
                .map(|m| {
                    let s = signed_offset(m, n).unsigned_abs() as f64;
                    let (a, b) = ((s - 0.5) * dx, (s + 0.5) * dx);
                    (-reach..=reach)
                        .map(|k| spec.segment_integral(a + k as f64, b + k as f64))
                        .sum::<f64>()
                        / dx
                })
                .collect()
        }
    };
    DiscreteKernel::tabulated(weights)
}

impl DiscreteKernel {
    pub fn dirac(cells: usize) -> Self {
        Self {
            cells,
            mode: KernelMode::Dirac,
        }
    }

    pub fn tabulated(weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidKernel(format!(
                "weight {w} is negative or not finite"
            )));
        }
        let support = weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != 0.0)
            .map(|(m, _)| m)
            .collect();
        Ok(Self {
            cells: weights.len(),
            mode: KernelMode::Tabulated { weights, support },
        })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn mode(&self) -> &KernelMode {
        &self.mode
    }

    pub fn is_dirac(&self) -> bool {
        matches!(self.mode, KernelMode::Dirac)
    }

    /// Tabulated weights, or `None` in Dirac mode.
    pub fn weights(&self) -> Option<&[f64]> {
        match &self.mode {
            KernelMode::Dirac => None,
            KernelMode::Tabulated { weights, .. } => Some(weights),
        }
    }

    /// Weights such that the plain tabulated convolution reproduces this
    /// kernel; for Dirac this is `1/dx` at offset 0.
    pub fn effective_weights(&self) -> Vec<f64> {
        match &self.mode {
            KernelMode::Dirac => {
                let mut w = vec![0.0; self.cells];
                w[0] = self.cells as f64;
                w
            }
            KernelMode::Tabulated { weights, .. } => weights.clone(),
        }
    }

    /// Weight at (possibly negative) offset `m`.
    pub fn weight(&self, m: isize) -> f64 {
        let idx = m.rem_euclid(self.cells as isize) as usize;
        match &self.mode {
            KernelMode::Dirac => {
                if idx == 0 {
                    self.cells as f64
                } else {
                    0.0
                }
            }
            KernelMode::Tabulated { weights, .. } => weights[idx],
        }
    }

    /// Offsets with nonzero weight.
    pub fn support(&self) -> &[usize] {
        match &self.mode {
            KernelMode::Dirac => &[0],
            KernelMode::Tabulated { support, .. } => support,
        }
    }

    /// `sum_m dx B_m`.
    pub fn mass(&self) -> f64 {
        match &self.mode {
            KernelMode::Dirac => 1.0,
            KernelMode::Tabulated { weights, .. } => {
                weights.iter().sum::<f64>() / self.cells as f64
            }
        }
    }

    pub fn max_weight(&self) -> f64 {
        match &self.mode {
            KernelMode::Dirac => f64::INFINITY,
            KernelMode::Tabulated { weights, .. } => weights.iter().copied().fold(0.0, f64::max),
        }
    }

    /// True if `B_m = B_{-m}` for every offset.
    pub fn is_even(&self) -> bool {
        match &self.mode {
            KernelMode::Dirac => true,
            KernelMode::Tabulated { weights, .. } => {
                let n = weights.len();
                (0..n).all(|m| weights[m] == weights[(n - m) % n])
            }
        }
    }

    /// Kernel of the reversed pair: `B^{ji}_m = B^{ij}_{-m}`.
    pub fn transpose(&self) -> DiscreteKernel {
        match &self.mode {
            KernelMode::Dirac => self.clone(),
            KernelMode::Tabulated { weights, .. } => {
                let n = weights.len();
                DiscreteKernel::tabulated((0..n).map(|m| weights[(n - m) % n]).collect())
                    .expect("transpose of a valid kernel")
            }
        }
    }

    /// `out_l = sum_{l'} dx B_{l-l'} v_{l'}`.
    pub fn convolve(&self, v: &[f64]) -> Result<Field> {
        if v.len() != self.cells {
            return Err(Error::LengthMismatch {
                expected: self.cells,
                found: v.len(),
            });
        }
        let mut out = vec![0.0; self.cells];
        self.convolve_into(v, 1.0, &mut out);
        Ok(Field(out))
    }

    /// `out += scale * (K * v)`; lengths must already match.
    pub fn convolve_into(&self, v: &[f64], scale: f64, out: &mut [f64]) {
        let n = self.cells;
        match &self.mode {
            KernelMode::Dirac => {
                for (o, x) in out.iter_mut().zip(v) {
                    *o += scale * x;
                }
            }
            KernelMode::Tabulated { weights, support } => {
                let dx = 1.0 / n as f64;
                for &m in support {
                    let w = scale * dx * weights[m];
                    // l' = l - m
                    let (head, tail) = out.split_at_mut(m);
                    for (o, x) in tail.iter_mut().zip(&v[..n - m]) {
                        *o += w * x;
                    }
                    for (o, x) in head.iter_mut().zip(&v[n - m..]) {
                        *o += w * x;
                    }
                }
            }
        }
    }

    /// CSV dump with columns `offset_index,offset_x,weight`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "offset_index,offset_x,weight")?;
        let n = self.cells;
        let dx = 1.0 / n as f64;
        for m in 0..n {
            writeln!(
                w,
                "{},{:.16e},{:.16e}",
                m,
                signed_offset(m, n) as f64 * dx,
                self.weight(m as isize)
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh(n: usize) -> Mesh {
        Mesh::new(n).unwrap()
    }

    #[test]
    fn indicator_on_ten_cells() {
        let k = cell_average(&KernelSpec::indicator(0.3), &mesh(10)).unwrap();
        let expected = [1.0, 1.0, 1.0, 0.5, 0.0, 0.0, 0.0, 0.5, 1.0, 1.0];
        for (w, e) in k.weights().unwrap().iter().zip(expected) {
            assert!((w - e).abs() < 1e-13, "{w} vs {e}");
        }
        assert!((k.mass() - 0.6).abs() < 1e-14);
    }

    #[test]
    fn three_halves_cell_indicator() {
        for n in [6, 7, 10, 33] {
            let m = mesh(n);
            let k = cell_average(&KernelSpec::indicator(1.5 * m.dx()), &m).unwrap();
            for off in 0..n {
                let expected = if off == 0 || off == 1 || off == n - 1 {
                    1.0
                } else {
                    0.0
                };
                assert!((k.weight(off as isize) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dirac_is_identity() {
        let k = cell_average(&KernelSpec::Dirac, &mesh(5)).unwrap();
        assert!(k.is_dirac());
        let v = [0.3, -1.0, 2.0, 0.0, 5.5];
        assert_eq!(k.convolve(&v).unwrap().0, v.to_vec());
        let eff = DiscreteKernel::tabulated(k.effective_weights()).unwrap();
        let out = eff.convolve(&v).unwrap();
        for (a, b) in out.iter().zip(v) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn convolve_constant_and_point_mass() {
        let m = mesh(10);
        let k = cell_average(&KernelSpec::indicator(0.3), &m).unwrap();
        let out = k.convolve(&[2.0; 10]).unwrap();
        for o in out.iter() {
            assert!((o - 1.2).abs() < 1e-14);
        }
        let mut v = vec![0.0; 10];
        v[0] = 10.0;
        let out = k.convolve(&v).unwrap();
        for l in 0..10 {
            assert!((out[l] - k.weight(l as isize)).abs() < 1e-14);
            assert!((out[l] - k.weight(-(l as isize))).abs() < 1e-14);
        }
        assert!(k.convolve(&[1.0; 9]).is_err());
    }

    #[test]
    fn transpose_examples() {
        let k = cell_average(
            &KernelSpec::Triangle {
                radius: 0.3,
                height: 2.0,
            },
            &mesh(16),
        )
        .unwrap();
        assert_eq!(k.transpose(), k);
        let mut w = vec![0.0; 8];
        w[1] = 1.0;
        let t = DiscreteKernel::tabulated(w).unwrap();
        let tt = t.transpose();
        assert_eq!(tt.weight(7), 1.0);
        assert_eq!(tt.weight(1), 0.0);
        assert_eq!(tt.transpose(), t);
    }

    #[test]
    fn triangle_and_gaussian_masses() {
        let m = mesh(64);
        let tri = cell_average(
            &KernelSpec::Triangle {
                radius: 0.3,
                height: 2.0,
            },
            &m,
        )
        .unwrap();
        assert!((tri.mass() - 0.6).abs() < 1e-13);
        for eps in [1e-3, 0.02, 0.25] {
            let g = cell_average(&KernelSpec::gaussian(eps), &m).unwrap();
            assert!((g.mass() - 1.0).abs() < 1e-13, "eps {eps}: {}", g.mass());
            assert!(g.is_even());
        }
        let norm = cell_average(&KernelSpec::normalized_triangle(4.0 * m.dx()), &m).unwrap();
        assert!((norm.mass() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn invalid_specs_rejected() {
        let m = mesh(8);
        assert!(cell_average(&KernelSpec::indicator(0.6), &m).is_err());
        assert!(cell_average(&KernelSpec::indicator(0.0), &m).is_err());
        assert!(cell_average(
            &KernelSpec::Tabulated {
                weights: vec![1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
            },
            &m
        )
        .is_err());
        assert!(cell_average(
            &KernelSpec::Tabulated {
                weights: vec![1.0; 3]
            },
            &m
        )
        .is_err());
        assert!(cell_average(&KernelSpec::gaussian(-1.0), &m).is_err());
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let k = cell_average(&KernelSpec::indicator(0.3), &mesh(10)).unwrap();
        let mut buf = Vec::new();
        k.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "offset_index,offset_x,weight");
        assert_eq!(lines.len(), 11);
        assert!(lines[8].starts_with("7,-3.0000000000000"));
    }
}
