//! Witness that positive definiteness of the continuous pair matrices does
//! not carry over to the exact cell-integrated matrix.
//!
//! For the indicator kernel `B = 1_[-r, r]` with `r = 3 dx / 2` the matrix
//!
//! ```text
//! Mhat_{l,l'} = int_{K_l} int_{K_l'} B(x - y) dy dx
//! ```
//!
//! is periodic pentadiagonal with entries `dx^2`, `7/8 dx^2`, `1/8 dx^2`.
//! It is not the same object as `dx^2 B_{l-l'}` built from cell averages:
//! the scheme uses the latter.
//!
//! The alternating vector `w = (1, -1, 1, ...)` is an eigenvector with
//! eigenvalue `dx^2 (1 - 2 * 7/8 + 2 * 1/8) = -dx^2 / 2`.

use std::fmt;

use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::quadrature::integrate;

/// Tolerance for the closed-form entries against quadrature.
pub const ENTRY_TOLERANCE: f64 = 1e-12;
/// Tolerance for `||Mhat w - lambda w||_inf`.
pub const EIGENVECTOR_TOLERANCE: f64 = 1e-14;
/// Eigenvalue constant, in units of `dx^2`, asserted in the source of this
/// construction. The true value is `-1/2`.
pub const CLAIMED_EIGENVALUE: f64 = -4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactPairMatrix {
    cells: usize,
    matrix: Mat<f64>,
}

/// Closed-form overlap area for cell offset `m` and radius `3 dx / 2`.
fn closed_form_entry(m: usize, cells: usize, dx: f64) -> f64 {
    let d = m.min(cells - m);
    match d {
        0 => dx * dx,
        1 => 0.875 * dx * dx,
        2 => 0.125 * dx * dx,
        _ => 0.0,
    }
}

/// `int_{-r}^{r} max(dx - |s - m dx|, 0) ds`: the double integral reduced to
/// the density of `x - y` over a pair of cells. The integrand is piecewise
/// linear with breaks at multiples of `dx / 2`, so Gauss-Legendre on those
/// pieces is exact.
fn quadrature_entry(m: isize, dx: f64) -> f64 {
    let r = 1.5 * dx;
    let centre = m as f64 * dx;
    integrate(|s| (dx - (s - centre).abs()).max(0.0), -r, r, 6, 4)
}

pub fn build_exact_matrix(cells: usize) -> Result<ExactPairMatrix> {
    if !cells.is_multiple_of(2) || cells <= 5 {
        return Err(Error::Counterexample(format!(
            "need an even number of cells above 5, got {cells}"
        )));
    }
    let dx = 1.0 / cells as f64;
    let matrix = Mat::from_fn(cells, cells, |l, lp| {
        closed_form_entry((l + cells - lp) % cells, cells, dx)
    });
    // any disagreement between the two constructions is fatal
    for m in 0..cells {
        let signed = if m <= cells / 2 {
            m as isize
        } else {
            m as isize - cells as isize
        };
        let q = quadrature_entry(signed, dx);
        let c = closed_form_entry(m, cells, dx);
        if (q - c).abs() > ENTRY_TOLERANCE {
            return Err(Error::Counterexample(format!(
                "offset {signed}: closed form {c:e} vs quadrature {q:e}"
            )));
        }
    }
    Ok(ExactPairMatrix { cells, matrix })
}

impl ExactPairMatrix {
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.cells as f64
    }

    pub fn entry(&self, l: usize, lp: usize) -> f64 {
        self.matrix[(l, lp)]
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.matrix
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (0..self.cells)
            .map(|l| (0..self.cells).map(|lp| self.matrix[(l, lp)] * v[lp]).sum())
            .collect()
    }

    pub fn bilinear(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(self.apply(b)).map(|(x, y)| x * y).sum()
    }

    /// Eigenvalues in nondecreasing order.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        self.matrix
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Counterexample(format!("eigensolver: {e:?}")))
    }
}

/// `(1, -1, 1, ..., -1)`.
pub fn alternating(cells: usize) -> Vec<f64> {
    (0..cells)
        .map(|l| if l % 2 == 0 { 1.0 } else { -1.0 })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub cells: usize,
    pub dx: f64,
    /// Largest closed-form vs quadrature entry deviation.
    pub entry_defect: f64,
    /// `w^T Mhat w / |w|^2`.
    pub rayleigh: f64,
    /// `||Mhat w - rayleigh w||_inf`.
    pub eigen_residual: f64,
    /// Smallest eigenvalue of `Mhat`.
    pub min_eigenvalue: f64,
    /// Top eigenvalue of the weight matrix.
    pub weight_eigenvalue: f64,
    /// `sum_ij W_ij z_i^T Mhat z_j`.
    pub j_value: f64,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.entry_defect <= ENTRY_TOLERANCE
            && self.eigen_residual <= EIGENVECTOR_TOLERANCE
            && self.rayleigh < 0.0
            && self.min_eigenvalue < 0.0
            && self.j_value < 0.0
    }

    /// Rayleigh quotient in units of `dx^2`.
    pub fn eigenvalue_constant(&self) -> f64 {
        self.rayleigh / (self.dx * self.dx)
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dx2 = self.dx * self.dx;
        writeln!(f, "N = {}, dx = {:e}", self.cells, self.dx)?;
        writeln!(
            f,
            "entries: diag {:e}, offset 1 {:e}, offset 2 {:e}; max deviation from quadrature {:e}",
            dx2,
            0.875 * dx2,
            0.125 * dx2,
            self.entry_defect
        )?;
        writeln!(
            f,
            "alternating eigenvector: lambda = {:e} = {:.6} dx^2, residual {:e}",
            self.rayleigh,
            self.eigenvalue_constant(),
            self.eigen_residual
        )?;
        if (self.eigenvalue_constant() - CLAIMED_EIGENVALUE).abs() > 1e-9 {
            writeln!(
                f,
                "note: computed constant {:.6} dx^2 differs from the stated {} dx^2; the sign agrees",
                self.eigenvalue_constant(),
                CLAIMED_EIGENVALUE
            )?;
        }
        writeln!(f, "smallest eigenvalue of Mhat: {:e}", self.min_eigenvalue)?;
        writeln!(
            f,
            "top eigenvalue of weight matrix: {:e}",
            self.weight_eigenvalue
        )?;
        writeln!(f, "J = {:e}", self.j_value)?;
        write!(f, "{}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

/// Builds the block direction `z_i = v_i w` from the top eigenvector `v` of
/// the symmetric positive definite weight matrix `W = (pi_i a_ij)` and
/// evaluates `J = sum_ij W_ij z_i^T Mhat z_j`.
pub fn verify_negative_direction(cells: usize, weights: &[Vec<f64>]) -> Result<Certificate> {
    let n = weights.len();
    if n == 0 || weights.iter().any(|r| r.len() != n) {
        return Err(Error::Counterexample(
            "weight matrix must be square and nonempty".into(),
        ));
    }
    for i in 0..n {
        for j in 0..i {
            let (a, b) = (weights[i][j], weights[j][i]);
            if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                return Err(Error::Counterexample(format!(
                    "weight matrix not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    let w_mat = Mat::from_fn(n, n, |i, j| weights[i][j]);
    let eig = w_mat
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Counterexample(format!("eigensolver: {e:?}")))?;
    let s = eig.S().column_vector();
    if s[0] <= 0.0 {
        return Err(Error::Counterexample(format!(
            "weight matrix not positive definite: eigenvalue {:e}",
            s[0]
        )));
    }
    let weight_eigenvalue = s[n - 1];
    let top: Vec<f64> = (0..n).map(|i| eig.U()[(i, n - 1)]).collect();

    let exact = build_exact_matrix(cells)?;
    let dx = exact.dx();
    let entry_defect = (0..cells)
        .map(|m| {
            let signed = if m <= cells / 2 {
                m as isize
            } else {
                m as isize - cells as isize
            };
            (quadrature_entry(signed, dx) - exact.entry(m, 0)).abs()
        })
        .fold(0.0, f64::max);

    let w = alternating(cells);
    let mw = exact.apply(&w);
    let norm2 = w.iter().map(|x| x * x).sum::<f64>();
    let rayleigh = w.iter().zip(&mw).map(|(a, b)| a * b).sum::<f64>() / norm2;
    let eigen_residual = mw
        .iter()
        .zip(&w)
        .map(|(m, x)| (m - rayleigh * x).abs())
        .fold(0.0, f64::max);
    let min_eigenvalue = exact.spectrum()?[0];

    let mut j_value = 0.0;
    for i in 0..n {
        for j in 0..n {
            if weights[i][j] == 0.0 {
                continue;
            }
            let zi: Vec<f64> = w.iter().map(|x| top[i] * x).collect();
            let zj: Vec<f64> = w.iter().map(|x| top[j] * x).collect();
            j_value += weights[i][j] * exact.bilinear(&zi, &zj);
        }
    }

    Ok(Certificate {
        cells,
        dx,
        entry_defect,
        rayleigh,
        eigen_residual,
        min_eigenvalue,
        weight_eigenvalue,
        j_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_for_six_cells() {
        let m = build_exact_matrix(6).unwrap();
        assert!((m.entry(0, 0) - 1.0 / 36.0).abs() < 1e-16);
        assert!((m.entry(0, 1) - 7.0 / 288.0).abs() < 1e-16);
        assert!((m.entry(0, 5) - 7.0 / 288.0).abs() < 1e-16);
        assert!((m.entry(0, 2) - 1.0 / 288.0).abs() < 1e-16);
        assert_eq!(m.entry(0, 3), 0.0);
        for l in 0..6 {
            for lp in 0..6 {
                assert_eq!(m.entry(l, lp), m.entry(lp, l));
            }
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(build_exact_matrix(4).is_err());
        assert!(build_exact_matrix(7).is_err());
        assert!(verify_negative_direction(6, &[vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
        assert!(verify_negative_direction(6, &[vec![1.0, 0.5], vec![0.4, 1.0]]).is_err());
    }

    #[test]
    fn single_species_witness() {
        let c = verify_negative_direction(6, &[vec![1.0]]).unwrap();
        assert!(c.passed(), "{c}");
        assert!((c.eigenvalue_constant() + 0.5).abs() < 1e-12);
        let w = alternating(6);
        let m = build_exact_matrix(6).unwrap();
        assert!((c.j_value - m.bilinear(&w, &w)).abs() < 1e-15);
        assert!(c.to_string().contains("differs from the stated"));
    }
}
