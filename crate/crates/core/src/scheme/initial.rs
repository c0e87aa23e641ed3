//! Initial data and its exact projection onto cell averages.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{Field, Mesh};
use crate::quadrature;

/// Nonnegative initial profile of one species on the torus `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialProfile {
    Constant {
        value: f64,
    },
    /// Union of the closed intervals `[a, b]`, `0 <= a <= b <= 1`.
    Indicator {
        intervals: Vec<[f64; 2]>,
    },
    /// `offset + cos * cos(2 pi x) + sin * sin(2 pi x)`.
    Trig {
        offset: f64,
        cos: f64,
        sin: f64,
    },
    /// `height * max(1 - d(x, center) / half_width, 0)` with the torus
    /// distance `d`; `half_width <= 1/2`.
    Hat {
        center: f64,
        half_width: f64,
        height: f64,
    },
    /// Cell averages given directly; the length must match the mesh.
    Cells {
        values: Vec<f64>,
    },
}

impl InitialProfile {
    pub fn indicator(intervals: &[[f64; 2]]) -> Self {
        InitialProfile::Indicator {
            intervals: intervals.to_vec(),
        }
    }

    pub fn trig(offset: f64, cos: f64, sin: f64) -> Self {
        InitialProfile::Trig { offset, cos, sin }
    }

    pub fn hat(center: f64, half_width: f64, height: f64) -> Self {
        InitialProfile::Hat {
            center,
            half_width,
            height,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let neg = |m: String| Err(Error::NegativeData(m));
        match self {
            InitialProfile::Constant { value } => {
                if !(*value >= 0.0 && value.is_finite()) {
                    return neg(format!("constant initial value {value}"));
                }
            }
            InitialProfile::Indicator { intervals } => {
                for [a, b] in intervals {
                    if !(0.0 <= *a && a <= b && *b <= 1.0) {
                        return Err(Error::InvalidParameter(format!(
                            "interval [{a}, {b}] is not inside [0, 1]"
                        )));
                    }
                }
            }
            InitialProfile::Trig { offset, cos, sin } => {
                // minimum of offset + R cos(2 pi x - phase) is offset - R
                if offset - cos.hypot(*sin) < -1e-15 {
                    return neg(format!(
                        "trigonometric profile dips to {}",
                        offset - cos.hypot(*sin)
                    ));
                }
            }
            InitialProfile::Hat {
                half_width, height, ..
            } => {
                if !(*half_width > 0.0 && *half_width <= 0.5) {
                    return Err(Error::InvalidParameter(format!(
                        "hat half width {half_width} outside (0, 1/2]"
                    )));
                }
                if *height < 0.0 {
                    return neg(format!("hat height {height}"));
                }
            }
            InitialProfile::Cells { values } => {
                if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
                    return neg(format!("cell value {v}"));
                }
            }
        }
        Ok(())
    }

    /// Pointwise value at `x` (any real, taken modulo 1).
    pub fn value(&self, x: f64) -> f64 {
        let x = x.rem_euclid(1.0);
        match self {
            InitialProfile::Constant { value } => *value,
            InitialProfile::Indicator { intervals } => {
                if intervals.iter().any(|[a, b]| *a <= x && x <= *b) {
                    1.0
                } else {
                    0.0
                }
            }
            InitialProfile::Trig { offset, cos, sin } => {
                offset + cos * (2.0 * PI * x).cos() + sin * (2.0 * PI * x).sin()
            }
            InitialProfile::Hat {
                center,
                half_width,
                height,
            } => {
                let d = x - center;
                let d = (d - d.round()).abs();
                height * (1.0 - d / half_width).max(0.0)
            }
            InitialProfile::Cells { values } => {
                let n = values.len();
                let l = ((x * n as f64).round() as usize) % n;
                values[l]
            }
        }
    }

    /// Exact integral over `(lo, hi)` with `hi - lo <= 1`, periodically.
    fn integral(&self, lo: f64, hi: f64) -> f64 {
        match self {
            InitialProfile::Constant { value } => value * (hi - lo),
            InitialProfile::Indicator { intervals } => intervals
                .iter()
                .map(|[a, b]| {
                    (-1..=1)
                        .map(|k| {
                            let (l, h) = (lo + k as f64, hi + k as f64);
                            (h.min(*b) - l.max(*a)).max(0.0)
                        })
                        .sum::<f64>()
                })
                .sum(),
            InitialProfile::Trig { offset, cos, sin } => {
                let w = 2.0 * PI;
                offset * (hi - lo) + cos * ((w * hi).sin() - (w * lo).sin()) / w
                    - sin * ((w * hi).cos() - (w * lo).cos()) / w
            }
            InitialProfile::Hat {
                center,
                half_width,
                height,
            } => {
                let r = *half_width;
                let prim = |z: f64| {
                    let s = z.abs().min(r);
                    z.signum() * (s - s * s / (2.0 * r))
                };
                height
                    * (-2..=2)
                        .map(|k| {
                            let shift = center + k as f64;
                            prim(hi - shift) - prim(lo - shift)
                        })
                        .sum::<f64>()
            }
            InitialProfile::Cells { .. } => unreachable!(),
        }
    }

    /// Cell averages `(1/dx) int_{K_l} u0`.
    pub fn project(&self, mesh: &Mesh) -> Result<Field> {
        self.validate()?;
        if let InitialProfile::Cells { values } = self {
            mesh.check(values)?;
            return Ok(Field(values.clone()));
        }
        let dx = mesh.dx();
        Ok(Field(
            (0..mesh.cells())
                .map(|l| {
                    let (lo, hi) = mesh.cell_bounds(l);
                    (self.integral(lo, hi) / dx).max(0.0)
                })
                .collect(),
        ))
    }
}

/// Cell averages of an arbitrary nonnegative function by composite
/// Gauss-Legendre quadrature (`pieces` panels of `order` nodes per cell).
pub fn project_fn<F: Fn(f64) -> f64>(
    f: F,
    mesh: &Mesh,
    pieces: usize,
    order: usize,
) -> Result<Field> {
    let (x, w) = quadrature::gauss_legendre(order);
    let dx = mesh.dx();
    let values: Vec<f64> = (0..mesh.cells())
        .map(|l| {
            let (lo, hi) = mesh.cell_bounds(l);
            quadrature::integrate_with(&f, lo, hi, pieces, &x, &w) / dx
        })
        .collect();
    if let Some(v) = values.iter().find(|v| **v < 0.0) {
        return Err(Error::NegativeData(format!("projected initial value {v}")));
    }
    Ok(Field(values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aligned_indicator_is_exact() {
        let mesh = Mesh::new(16).unwrap();
        let u = InitialProfile::indicator(&[[0.25, 0.75]])
            .project(&mesh)
            .unwrap();
        for l in 0..16 {
            let expected = if (4..=12).contains(&l) {
                if l == 4 || l == 12 {
                    0.5
                } else {
                    1.0
                }
            } else {
                0.0
            };
            assert!((u[l] - expected).abs() < 1e-14, "cell {l}: {}", u[l]);
        }
        assert!((u.integral() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn wrapped_indicator_mass() {
        let mesh = Mesh::new(12).unwrap();
        let u = InitialProfile::indicator(&[[0.0, 0.25], [0.75, 1.0]])
            .project(&mesh)
            .unwrap();
        assert!((u.integral() - 0.5).abs() < 1e-15);
        assert!((u[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cosine_cell_average() {
        let mesh = Mesh::new(4).unwrap();
        let u = InitialProfile::trig(1.0, 1.0, 0.0).project(&mesh).unwrap();
        let expected = 1.0 + (PI / 4.0).sin() * 2.0 / (2.0 * PI * 0.25);
        assert!((u[0] - expected).abs() < 1e-15);
        assert!((u[0] - 1.90032).abs() < 1e-5);
        assert!((u.integral() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hat_mass_and_quadrature_agreement() {
        let mesh = Mesh::new(10).unwrap();
        for hat in [
            InitialProfile::hat(0.5, 0.5, 1.0),
            InitialProfile::hat(0.0, 0.5, 1.0),
        ] {
            let exact = hat.project(&mesh).unwrap();
            assert!((exact.integral() - 0.5).abs() < 1e-15);
            let h = hat.clone();
            let quad = project_fn(move |x| h.value(x), &mesh, 64, 8).unwrap();
            for (a, b) in exact.iter().zip(quad.iter()) {
                assert!((a - b).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn negative_data_rejected() {
        let mesh = Mesh::new(8).unwrap();
        assert!(InitialProfile::trig(0.5, 1.0, 0.0).project(&mesh).is_err());
        assert!(InitialProfile::Constant { value: -1.0 }
            .project(&mesh)
            .is_err());
        assert!(project_fn(|x| x - 0.5, &mesh, 2, 4).is_err());
        assert!(InitialProfile::Cells {
            values: vec![1.0; 7]
        }
        .project(&mesh)
        .is_err());
    }
}
