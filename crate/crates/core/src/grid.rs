//! Uniform periodic mesh of the unit torus, piecewise-constant fields and the
//! dx-weighted discrete norms.
//!
//! Cell `l` is `K_l = ((l - 1/2) dx, (l + 1/2) dx)` taken modulo 1, so cell 0
//! straddles the origin. Index arithmetic is always modulo `N`.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform mesh of the torus with `n` cells of width `1/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    n: usize,
    dx: f64,
}

impl Mesh {
    pub const MIN_CELLS: usize = 3;

    pub fn new(n: usize) -> Result<Self> {
        if n < Self::MIN_CELLS {
            return Err(Error::InvalidMesh(format!(
                "need at least {} cells, got {n}",
                Self::MIN_CELLS
            )));
        }
        Ok(Self {
            n,
            dx: 1.0 / n as f64,
        })
    }

    #[inline]
    pub fn cells(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Cell center `x_l = l dx`.
    #[inline]
    pub fn center(&self, l: usize) -> f64 {
        l as f64 * self.dx
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n).map(|l| self.center(l)).collect()
    }

    /// Left and right end points of cell `l`, `((l - 1/2) dx, (l + 1/2) dx)`.
    #[inline]
    pub fn cell_bounds(&self, l: usize) -> (f64, f64) {
        let c = self.center(l);
        (c - 0.5 * self.dx, c + 0.5 * self.dx)
    }

    #[inline]
    pub fn wrap(&self, l: isize) -> usize {
        l.rem_euclid(self.n as isize) as usize
    }

    #[inline]
    pub fn next(&self, l: usize) -> usize {
        if l + 1 == self.n {
            0
        } else {
            l + 1
        }
    }

    #[inline]
    pub fn prev(&self, l: usize) -> usize {
        if l == 0 {
            self.n - 1
        } else {
            l - 1
        }
    }

    pub fn zeros(&self) -> Field {
        Field(vec![0.0; self.n])
    }

    pub fn constant(&self, c: f64) -> Field {
        Field(vec![c; self.n])
    }

    pub fn check(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: v.len(),
            });
        }
        Ok(())
    }
}

/// Uniform time grid `t_k = k dt`, `dt = T / Nt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    end: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(end: f64, steps: usize) -> Result<Self> {
        if !(end > 0.0 && end.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "end time must be positive, got {end}"
            )));
        }
        Ok(Self { end, steps })
    }

    /// Picks `Nt = round(T / dt)`; the resulting step equals `dt` up to rounding
    /// when `T` is a multiple of `dt`.
    pub fn from_step(end: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive, got {dt}"
            )));
        }
        let steps = (end / dt).round().max(0.0) as usize;
        Self::new(end, steps)
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        if self.steps == 0 {
            self.end
        } else {
            self.end / self.steps as f64
        }
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }
}

/// Piecewise-constant function on a mesh, one value per cell.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Field(pub Vec<f64>);

impl Field {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        1.0 / self.0.len() as f64
    }

    /// `sum_l dx v_l`, the integral of the piecewise-constant function.
    pub fn integral(&self) -> f64 {
        self.dx() * self.0.iter().sum::<f64>()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Cyclic shift: `out[l] = v[l - shift]`.
    pub fn shifted(&self, shift: isize) -> Field {
        let n = self.0.len() as isize;
        Field(
            (0..n)
                .map(|l| self.0[(l - shift).rem_euclid(n) as usize])
                .collect(),
        )
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(Field(
            self.iter().zip(other.iter()).map(|(a, b)| a - b).collect(),
        ))
    }
}

impl Deref for Field {
    type Target = Vec<f64>;
    fn deref(&self) -> &Vec<f64> {
        &self.0
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut Vec<f64> {
        &mut self.0
    }
}

impl From<Vec<f64>> for Field {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Forward difference `(v_{l+1} - v_l) / dx` with periodic wrap.
pub fn diff(v: &[f64], mesh: &Mesh) -> Result<Field> {
    mesh.check(v)?;
    let inv = 1.0 / mesh.dx();
    let n = v.len();
    Ok(Field(
        (0..n).map(|l| (v[(l + 1) % n] - v[l]) * inv).collect(),
    ))
}

/// `(sum_l dx |v_l|^q)^(1/q)`; `q = f64::INFINITY` gives `max_l |v_l|`.
pub fn norm_lq(v: &[f64], q: f64) -> Result<f64> {
    if q == f64::INFINITY {
        return Ok(v.iter().fold(0.0_f64, |m, x| m.max(x.abs())));
    }
    if !(q >= 1.0) || q.is_nan() {
        return Err(Error::InvalidExponent(q));
    }
    let dx = 1.0 / v.len() as f64;
    if q == 1.0 {
        return Ok(dx * v.iter().map(|x| x.abs()).sum::<f64>());
    }
    if q == 2.0 {
        return Ok((dx * v.iter().map(|x| x * x).sum::<f64>()).sqrt());
    }
    Ok((dx * v.iter().map(|x| x.abs().powf(q)).sum::<f64>()).powf(1.0 / q))
}

/// Discrete `W^{1,q}` seminorm `|v|_{1,q} = ||D v||_{0,q}`.
pub fn seminorm_w1q(v: &[f64], mesh: &Mesh, q: f64) -> Result<f64> {
    norm_lq(&diff(v, mesh)?, q)
}

/// Full discrete `W^{1,q}` norm, `(|v|_{1,q}^q + ||v||_{0,q}^q)^(1/q)`.
pub fn norm_w1q(v: &[f64], mesh: &Mesh, q: f64) -> Result<f64> {
    let semi = seminorm_w1q(v, mesh, q)?;
    let base = norm_lq(v, q)?;
    if q == f64::INFINITY {
        return Ok(semi.max(base));
    }
    Ok((semi.powf(q) + base.powf(q)).powf(1.0 / q))
}

/// `||v||_{BV} = ||v||_{0,1} + |v|_{1,1}`.
pub fn bv_norm(v: &[f64], mesh: &Mesh) -> Result<f64> {
    Ok(norm_lq(v, 1.0)? + seminorm_w1q(v, mesh, 1.0)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh(n: usize) -> Mesh {
        Mesh::new(n).unwrap()
    }

    #[test]
    fn mesh_rejects_tiny_grids() {
        assert!(Mesh::new(2).is_err());
        let m = mesh(7);
        assert!((m.dx() * 7.0 - 1.0).abs() < 1e-15);
        assert_eq!(m.wrap(-1), 6);
        assert_eq!(m.next(6), 0);
        assert_eq!(m.prev(0), 6);
    }

    #[test]
    fn diff_examples() {
        let m = mesh(4);
        assert_eq!(diff(&[3.0; 4], &m).unwrap().0, vec![0.0; 4]);
        assert_eq!(
            diff(&[1.0, -1.0, 1.0, -1.0], &m).unwrap().0,
            vec![-8.0, 8.0, -8.0, 8.0]
        );
        assert_eq!(
            diff(&[0.0, 1.0, 2.0, 3.0], &m).unwrap().0,
            vec![4.0, 4.0, 4.0, -12.0]
        );
        assert!(matches!(
            diff(&[1.0; 3], &m),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn norm_examples() {
        for q in [1.0, 1.5, 2.0, 7.0, f64::INFINITY] {
            assert!((norm_lq(&[1.0; 9], q).unwrap() - 1.0).abs() < 1e-14);
        }
        assert!((norm_lq(&[1.0, -1.0, 1.0, -1.0], 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(norm_lq(&[3.0, 0.0], 1.0).unwrap(), 1.5);
        assert!(matches!(
            norm_lq(&[1.0], 0.5),
            Err(Error::InvalidExponent(_))
        ));
        assert!(norm_lq(&[1.0], f64::NAN).is_err());
    }

    #[test]
    fn seminorm_and_bv_examples() {
        let m = mesh(4);
        let c = [-2.5; 4];
        assert_eq!(seminorm_w1q(&c, &m, 1.0).unwrap(), 0.0);
        assert_eq!(bv_norm(&c, &m).unwrap(), 2.5);
        let v = [1.0, -1.0, 1.0, -1.0];
        assert_eq!(seminorm_w1q(&v, &m, 1.0).unwrap(), 8.0);
        assert_eq!(bv_norm(&v, &m).unwrap(), 9.0);
    }

    #[test]
    fn time_grid_step() {
        let t = TimeGrid::from_step(1.0, 1.0 / 64.0).unwrap();
        assert_eq!(t.steps(), 64);
        assert!((t.dt() * 64.0 - 1.0).abs() < 1e-15);
        assert!(TimeGrid::from_step(1.0, 0.0).is_err());
    }
}
