//! Implicit Euler finite-volume scheme
//!
//! ```text
//! (dx/dt)(u_{i,l} - u^{k-1}_{i,l}) + F_{i,l+1/2} - F_{i,l-1/2} = 0
//! F_{i,l+1/2} = -(sigma/dx)(u_{i,l+1} - u_{i,l}) - (u_{i,l+1/2}/dx)(p_{i,l+1} - p_{i,l})
//! p_{i,l}     = a_ii u_{i,l} + sum_{j != i} a_ij (B^{ij} * u_j)_l
//! ```
//!
//! The unknowns of one step are stored species-major in a flat vector,
//! entry `i * N + l`.

mod initial;
mod newton;
mod run;

pub use initial::{project_fn, InitialProfile};
pub use newton::{SolverOptions, StepReport, Stepper};
pub use run::{snapshot_file_name, write_snapshot_csv, RunOptions, Trajectory};

use crate::error::{Error, Result};
use crate::grid::{Field, Mesh};
use crate::mobility::{mobility_unchecked, MobilityRule};
use crate::model::{HypothesisReport, ModelParams, PairKernels};

/// Densities of all species at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub fields: Vec<Field>,
    /// Time index `k`.
    pub step: usize,
    pub time: f64,
}

impl State {
    pub fn new(fields: Vec<Field>) -> Self {
        Self {
            fields,
            step: 0,
            time: 0.0,
        }
    }

    pub fn species(&self) -> usize {
        self.fields.len()
    }

    pub fn cells(&self) -> usize {
        self.fields.first().map_or(0, |f| f.len())
    }

    pub fn masses(&self) -> Vec<f64> {
        self.fields.iter().map(Field::integral).collect()
    }

    pub fn min(&self) -> f64 {
        self.fields
            .iter()
            .map(Field::min)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn flat(&self) -> Vec<f64> {
        self.fields.iter().flat_map(|f| f.iter().copied()).collect()
    }

    pub fn from_flat(flat: &[f64], species: usize, step: usize, time: f64) -> Self {
        let n = flat.len() / species;
        Self {
            fields: flat.chunks(n).map(|c| Field(c.to_vec())).collect(),
            step,
            time,
        }
    }
}

/// Projects every species' initial profile onto the mesh.
pub fn project_initial(profiles: &[InitialProfile], mesh: &Mesh) -> Result<State> {
    let fields = profiles
        .iter()
        .map(|p| p.project(mesh))
        .collect::<Result<Vec<_>>>()?;
    Ok(State::new(fields))
}

/// Model parameters bound to a mesh with all cross kernels discretized.
#[derive(Debug, Clone)]
pub struct Scheme {
    params: ModelParams,
    mesh: Mesh,
    kernels: PairKernels,
    hypotheses: HypothesisReport,
}

impl Scheme {
    /// Validates `params`, discretizes the kernels and checks the
    /// hypotheses (errors in strict mode).
    pub fn new(params: ModelParams, mesh: Mesh) -> Result<Self> {
        let kernels = params.discretize(&mesh)?;
        let hypotheses = params.check_hypotheses(&kernels)?;
        Ok(Self {
            params,
            mesh,
            kernels,
            hypotheses,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn kernels(&self) -> &PairKernels {
        &self.kernels
    }

    pub fn hypotheses(&self) -> &HypothesisReport {
        &self.hypotheses
    }

    pub fn species(&self) -> usize {
        self.params.n
    }

    pub fn unknowns(&self) -> usize {
        self.params.n * self.mesh.cells()
    }

    pub(crate) fn check_state(&self, state: &State) -> Result<()> {
        if state.species() != self.params.n {
            return Err(Error::LengthMismatch {
                expected: self.params.n,
                found: state.species(),
            });
        }
        for f in &state.fields {
            self.mesh.check(f)?;
        }
        Ok(())
    }

    /// Flat potentials `p` for flat densities `u`.
    pub fn potentials_flat(&self, u: &[f64]) -> Vec<f64> {
        let n = self.params.n;
        let cells = self.mesh.cells();
        let mut p = vec![0.0; n * cells];
        for i in 0..n {
            let out = &mut p[i * cells..(i + 1) * cells];
            let aii = self.params.a(i, i);
            for (o, x) in out.iter_mut().zip(&u[i * cells..(i + 1) * cells]) {
                *o = aii * x;
            }
            for j in 0..n {
                let aij = self.params.a(i, j);
                if j == i || aij == 0.0 {
                    continue;
                }
                self.kernels
                    .get(i, j)
                    .convolve_into(&u[j * cells..(j + 1) * cells], aij, out);
            }
        }
        p
    }

    /// Flat face fluxes, entry `i * N + l` holding `F_{i,l+1/2}`.
    pub fn fluxes_flat(&self, u: &[f64], p: &[f64]) -> Vec<f64> {
        let n = self.params.n;
        let cells = self.mesh.cells();
        let inv_dx = 1.0 / self.mesh.dx();
        let sigma = self.params.sigma;
        let rule = self.params.mobility;
        let mut f = vec![0.0; n * cells];
        for i in 0..n {
            let base = i * cells;
            for l in 0..cells {
                let r = if l + 1 == cells { 0 } else { l + 1 };
                let (ul, ur) = (u[base + l], u[base + r]);
                let dp = p[base + r] - p[base + l];
                let mob = mobility_unchecked(rule, ul, ur, dp);
                f[base + l] = -sigma * inv_dx * (ur - ul) - mob * inv_dx * dp;
            }
        }
        f
    }

    /// Flat residual of one implicit step from `prev` to the candidate `u`.
    pub fn residual_flat(&self, u: &[f64], prev: &[f64], dt: f64) -> Vec<f64> {
        let p = self.potentials_flat(u);
        let f = self.fluxes_flat(u, &p);
        let cells = self.mesh.cells();
        let coef = self.mesh.dx() / dt;
        let mut r = vec![0.0; u.len()];
        for i in 0..self.params.n {
            let base = i * cells;
            for l in 0..cells {
                let left = if l == 0 { cells - 1 } else { l - 1 };
                r[base + l] = coef * (u[base + l] - prev[base + l]) + f[base + l] - f[base + left];
            }
        }
        r
    }

    /// `p_i = a_ii u_i + sum_{j != i} a_ij B^{ij} * u_j`.
    pub fn nonlocal_p(&self, state: &State) -> Result<Vec<Field>> {
        self.check_state(state)?;
        let p = self.potentials_flat(&state.flat());
        Ok(split(&p, self.params.n))
    }

    /// Face fluxes `F_{i,l+1/2}` for the mobility rule `rule`.
    pub fn face_fluxes(
        &self,
        state: &State,
        p: &[Field],
        rule: MobilityRule,
    ) -> Result<Vec<Field>> {
        self.check_state(state)?;
        if p.len() != self.params.n {
            return Err(Error::LengthMismatch {
                expected: self.params.n,
                found: p.len(),
            });
        }
        let flat_p: Vec<f64> = p.iter().flat_map(|f| f.iter().copied()).collect();
        if flat_p.len() != self.unknowns() {
            return Err(Error::LengthMismatch {
                expected: self.unknowns(),
                found: flat_p.len(),
            });
        }
        let f = if rule == self.params.mobility {
            self.fluxes_flat(&state.flat(), &flat_p)
        } else {
            let mut other = self.clone();
            other.params.mobility = rule;
            other.fluxes_flat(&state.flat(), &flat_p)
        };
        Ok(split(&f, self.params.n))
    }

    /// Residual of the implicit step `prev -> candidate` with step `dt`.
    pub fn residual(&self, candidate: &State, prev: &State, dt: f64) -> Result<Vec<Field>> {
        self.check_state(candidate)?;
        self.check_state(prev)?;
        let r = self.residual_flat(&candidate.flat(), &prev.flat(), dt);
        Ok(split(&r, self.params.n))
    }
}

fn split(flat: &[f64], species: usize) -> Vec<Field> {
    let n = flat.len() / species;
    flat.chunks(n).map(|c| Field(c.to_vec())).collect()
}
