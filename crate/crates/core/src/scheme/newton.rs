//! Newton solver for one implicit step.
//!
//! The Jacobian is exact: periodic tridiagonal blocks from `sigma`, the
//! mobility and the local `a_ii` term, plus dense blocks from the
//! convolutions. The upwind branch is frozen per evaluation (`dp = 0` takes
//! the right state). A factorization may be carried over to later iterations
//! and steps of the same `dt`; it is refreshed as soon as the lagged
//! direction fails to halve the residual.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{Col, Mat};

use super::{Scheme, State};
use crate::error::{Error, Result};
use crate::mobility::mobility_derivatives;
use crate::mobility::mobility_unchecked;
use crate::mobility::MobilityRule;

/// Largest fraction of the distance to zero a logmean Newton update may cover.
const FRACTION_TO_BOUNDARY: f64 = 0.95;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Residual tolerance, scaled by `dx/dt + 1`, in the max norm.
    pub tol_newton: f64,
    pub max_iterations: usize,
    /// Number of successive `dt` halvings before giving up.
    pub max_retries: usize,
    pub tol_neg: f64,
    pub tol_mass: f64,
    /// Keep the LU factorization across iterations and steps.
    pub reuse_jacobian: bool,
    /// Required residual reduction for a lagged-Jacobian step.
    pub lagged_contraction: f64,
    pub armijo: f64,
    pub min_step_length: f64,
    /// Frozen-mobility fixed-point iterations tried before halving `dt`
    /// when Newton fails from the previous state.
    pub picard_iterations: usize,
    pub picard_damping: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_newton: 1e-10,
            max_iterations: 50,
            max_retries: 4,
            tol_neg: 1e-12,
            tol_mass: 1e-10,
            reuse_jacobian: true,
            lagged_contraction: 0.5,
            armijo: 1e-4,
            min_step_length: 1.0 / 1024.0,
            picard_iterations: 200,
            picard_damping: 0.5,
        }
    }
}

impl SolverOptions {
    /// Plain Newton: a fresh factorization at every iteration.
    pub fn full_newton() -> Self {
        Self {
            reuse_jacobian: false,
            ..Self::default()
        }
    }
}

/// Diagnostics for one accepted time step (possibly made of substeps).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepReport {
    pub newton_iterations: usize,
    /// Frozen-mobility warm-start iterations, zero when Newton succeeded
    /// from the previous state.
    pub picard_iterations: usize,
    pub factorizations: usize,
    pub final_residual_inf: f64,
    /// Smallest substep actually taken.
    pub dt_used: f64,
    /// Number of `dt` halvings.
    pub retries: usize,
    pub mass_defect: Vec<f64>,
    /// Most negative entry before clamping tiny negatives to zero.
    pub min_value: f64,
}

impl StepReport {
    fn absorb(&mut self, other: &StepReport) {
        self.newton_iterations += other.newton_iterations;
        self.picard_iterations += other.picard_iterations;
        self.factorizations += other.factorizations;
        self.final_residual_inf = other.final_residual_inf;
        self.dt_used = self.dt_used.min(other.dt_used);
        self.retries = self.retries.max(other.retries);
        self.min_value = self.min_value.min(other.min_value);
    }
}

enum Failure {
    Diverged(f64),
    Negative(f64),
}

/// Carries the solver options and a reusable factorization across steps.
pub struct Stepper<'a> {
    scheme: &'a Scheme,
    opts: SolverOptions,
    lu: Option<(f64, PartialPivLu<f64>)>,
}

impl<'a> Stepper<'a> {
    pub fn new(scheme: &'a Scheme, opts: SolverOptions) -> Self {
        Self {
            scheme,
            opts,
            lu: None,
        }
    }

    pub fn options(&self) -> &SolverOptions {
        &self.opts
    }

    /// Advances `prev` by `dt`, halving the step on failure.
    pub fn step(&mut self, prev: &State, dt: f64) -> Result<(State, StepReport)> {
        self.scheme.check_state(prev)?;
        let min = prev.min();
        if min < -self.opts.tol_neg {
            return Err(Error::NegativeData(format!(
                "previous state has entry {min:e}"
            )));
        }
        let flat = prev.flat();
        match self.advance(&flat, dt, 0) {
            Ok((u, mut report)) => {
                let masses_prev = prev.masses();
                let next =
                    State::from_flat(&u, self.scheme.species(), prev.step + 1, prev.time + dt);
                report.mass_defect = next
                    .masses()
                    .iter()
                    .zip(&masses_prev)
                    .map(|(a, b)| (a - b).abs())
                    .collect();
                Ok((next, report))
            }
            Err(Failure::Diverged(residual)) => Err(Error::NewtonDivergence {
                time: prev.time,
                retries: self.opts.max_retries,
                residual,
            }),
            Err(Failure::Negative(min)) => Err(Error::NegativeStateUnrecoverable { min }),
        }
    }

    fn advance(
        &mut self,
        prev: &[f64],
        dt: f64,
        depth: usize,
    ) -> std::result::Result<(Vec<f64>, StepReport), Failure> {
        let fallback = |s: &mut Self| {
            let (start, iterations) = s.picard(prev, dt)?;
            let (x, mut report) = s.solve(prev, dt, &start)?;
            report.picard_iterations = iterations;
            Ok((x, report))
        };
        match self.solve(prev, dt, prev).or_else(|_| fallback(self)) {
            Ok(ok) => Ok(ok),
            Err(failure) => {
                if depth >= self.opts.max_retries {
                    return Err(failure);
                }
                let half = 0.5 * dt;
                let (mid, mut report) = self.advance(prev, half, depth + 1)?;
                let (end, second) = self.advance(&mid, half, depth + 1)?;
                report.absorb(&second);
                report.retries = report.retries.max(depth + 1);
                Ok((end, report))
            }
        }
    }

    fn factor(&mut self, u: &[f64], dt: f64) {
        let jac = self.scheme.jacobian(u, dt);
        self.lu = Some((dt, jac.partial_piv_lu()));
    }

    fn direction(&self, r: &[f64]) -> Vec<f64> {
        let (_, lu) = self.lu.as_ref().expect("factorized");
        let rhs = Col::<f64>::from_fn(r.len(), |k| -r[k]);
        let d = lu.solve(&rhs);
        (0..r.len()).map(|k| d[k]).collect()
    }

    /// Initial step length. The logarithmic mean vanishes at zero, so its
    /// iterates stay a fixed fraction away from the boundary of the positive
    /// cone; the upwind rule takes the full step.
    fn first_step(&self, x: &[f64], d: &[f64]) -> f64 {
        if self.scheme.params().mobility != MobilityRule::Logmean {
            return 1.0;
        }
        x.iter()
            .zip(d)
            .filter(|(xk, dk)| **xk > 0.0 && **dk < 0.0)
            .map(|(xk, dk)| -FRACTION_TO_BOUNDARY * xk / dk)
            .fold(1.0, f64::min)
    }

    /// Damped fixed-point iteration `x <- x - theta A(x)^{-1} R(x)` with the
    /// frozen-mobility operator `A`, run until the update stalls below the
    /// Newton tolerance scale. Returns a starting point for Newton.
    fn picard(&mut self, prev: &[f64], dt: f64) -> std::result::Result<(Vec<f64>, usize), Failure> {
        let scheme = self.scheme;
        let dx = scheme.mesh().dx();
        let mut x = prev.to_vec();
        let mut iterations = 0;
        while iterations < self.opts.picard_iterations {
            iterations += 1;
            let r = scheme.residual_flat(&x, prev, dt);
            let lu = scheme.frozen_mobility_matrix(&x, dt).partial_piv_lu();
            let rhs = Col::<f64>::from_fn(r.len(), |k| -r[k]);
            let sol = lu.solve(&rhs);
            let d: Vec<f64> = (0..r.len()).map(|k| sol[k]).collect();
            let theta = self.opts.picard_damping * self.first_step(&x, &d);
            x = axpy(&x, theta, &d);
            let change = theta * inf_norm(&d);
            if !change.is_finite() {
                return Err(Failure::Diverged(f64::NAN));
            }
            if change <= 1e-6 * dx {
                break;
            }
        }
        self.lu = None;
        Ok((x, iterations))
    }

    fn solve(
        &mut self,
        prev: &[f64],
        dt: f64,
        start: &[f64],
    ) -> std::result::Result<(Vec<f64>, StepReport), Failure> {
        let scheme = self.scheme;
        let dx = scheme.mesh().dx();
        let tol = self.opts.tol_newton * (dx / dt + 1.0);
        let mut x = start.to_vec();
        let mut r = scheme.residual_flat(&x, prev, dt);
        let mut rinf = inf_norm(&r);
        let mut report = StepReport {
            dt_used: dt,
            ..Default::default()
        };
        let fresh_needed =
            |s: &Self| !s.opts.reuse_jacobian || s.lu.as_ref().is_none_or(|(t, _)| *t != dt);
        let mut polish = 0;
        loop {
            if rinf <= tol {
                let min = x.iter().copied().fold(f64::INFINITY, f64::min);
                if min >= -self.opts.tol_neg {
                    report.min_value = min;
                    break;
                }
                // a few exact iterations past the tolerance before giving up
                if polish >= 3 {
                    return Err(Failure::Negative(min));
                }
                polish += 1;
                self.lu = None;
            }
            if !rinf.is_finite() || report.newton_iterations >= self.opts.max_iterations {
                self.lu = None;
                return Err(Failure::Diverged(rinf));
            }
            let r2 = l2_norm(&r);
            let mut lagged = !fresh_needed(self);
            if !lagged {
                self.factor(&x, dt);
                report.factorizations += 1;
            }
            let mut d = self.direction(&r);
            let mut first = self.first_step(&x, &d);
            let mut trial = axpy(&x, first, &d);
            let mut rt = scheme.residual_flat(&trial, prev, dt);
            if lagged && !(l2_norm(&rt) <= self.opts.lagged_contraction * r2) {
                self.factor(&x, dt);
                report.factorizations += 1;
                d = self.direction(&r);
                first = self.first_step(&x, &d);
                trial = axpy(&x, first, &d);
                rt = scheme.residual_flat(&trial, prev, dt);
                lagged = false;
            }
            if !lagged {
                let mut lambda = first;
                while !(l2_norm(&rt) <= (1.0 - self.opts.armijo * lambda) * r2) {
                    lambda *= 0.5;
                    if lambda < self.opts.min_step_length {
                        self.lu = None;
                        return Err(Failure::Diverged(rinf));
                    }
                    trial = axpy(&x, lambda, &d);
                    rt = scheme.residual_flat(&trial, prev, dt);
                }
            }
            x = trial;
            r = rt;
            rinf = inf_norm(&r);
            report.newton_iterations += 1;
        }
        for v in x.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let cells = scheme.mesh().cells();
        for i in 0..scheme.species() {
            let before: f64 = prev[i * cells..(i + 1) * cells].iter().sum::<f64>() * dx;
            let after: f64 = x[i * cells..(i + 1) * cells].iter().sum::<f64>() * dx;
            if (after - before).abs() > self.opts.tol_mass * (1.0 + before.abs()) {
                self.lu = None;
                return Err(Failure::Diverged(rinf));
            }
        }
        report.final_residual_inf = rinf;
        Ok((x, report))
    }
}

impl Scheme {
    /// Exact Jacobian of the step residual with respect to the flat unknowns.
    pub fn jacobian(&self, u: &[f64], dt: f64) -> Mat<f64> {
        self.assemble(u, dt, true)
    }

    /// The step operator with face mobilities frozen at `u`: the residual
    /// is linear in the unknowns once the mobilities are fixed.
    pub fn frozen_mobility_matrix(&self, u: &[f64], dt: f64) -> Mat<f64> {
        self.assemble(u, dt, false)
    }

    fn assemble(&self, u: &[f64], dt: f64, mobility_derivatives_on: bool) -> Mat<f64> {
        let n = self.species();
        let cells = self.mesh().cells();
        let dx = self.mesh().dx();
        let inv_dx = 1.0 / dx;
        let sigma = self.params().sigma;
        let rule = self.params().mobility;
        let size = n * cells;
        let p = self.potentials_flat(u);
        let mut jac = Mat::<f64>::zeros(size, size);
        for k in 0..size {
            jac[(k, k)] = dx / dt;
        }
        for i in 0..n {
            let base = i * cells;
            let aii = self.params().a(i, i);
            for f in 0..cells {
                let r = if f + 1 == cells { 0 } else { f + 1 };
                let (row_f, row_r) = (base + f, base + r);
                let (ul, ur) = (u[row_f], u[row_r]);
                let dp = p[row_r] - p[row_f];
                let mob = mobility_unchecked(rule, ul, ur, dp);
                let (dml, dmr) = if mobility_derivatives_on {
                    mobility_derivatives(rule, ul, ur, dp)
                } else {
                    (0.0, 0.0)
                };
                // dF_{f+1/2}/du enters row f with +, row f+1 with -
                let mut add = |col: usize, val: f64| {
                    jac[(row_f, col)] += val;
                    jac[(row_r, col)] -= val;
                };
                add(row_f, inv_dx * (sigma - dml * dp + mob * aii));
                add(row_r, -inv_dx * (sigma + dmr * dp + mob * aii));
                for j in 0..n {
                    let aij = self.params().a(i, j);
                    if j == i || aij == 0.0 || mob == 0.0 {
                        continue;
                    }
                    let kernel = self.kernels().get(i, j);
                    let c = -mob * aij;
                    let jbase = j * cells;
                    for &s in kernel.support() {
                        let w = c * kernel.weight(s as isize);
                        let m_r = (r + cells - s) % cells;
                        let m_f = (f + cells - s) % cells;
                        add(jbase + m_r, w);
                        add(jbase + m_f, -w);
                    }
                }
            }
        }
        jac
    }

    /// One implicit Euler step with a fresh solver state.
    pub fn step(&self, prev: &State, dt: f64, opts: &SolverOptions) -> Result<(State, StepReport)> {
        Stepper::new(self, opts.clone()).step(prev, dt)
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn axpy(x: &[f64], a: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(xi, di)| xi + a * di).collect()
}
