//! Discrete Boltzmann and Rao entropies, the two dissipation forms, and a
//! per-step ledger.

use std::io::Write;

use crate::error::{Error, Result};
use crate::grid::diff;
use crate::mobility::mobility_unchecked;
use crate::scheme::{Scheme, State};

/// Slack for the per-step monotonicity check, relative to `1 + |H|`.
pub const MONOTONICITY_SLACK: f64 = 1e-8;

/// Entropy, mass and dissipation values at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub t: f64,
    pub step: usize,
    pub boltzmann: f64,
    pub rao: f64,
    pub mass: Vec<f64>,
    pub q_grad: f64,
    pub d_rao: f64,
}

/// `h(s) = s (log s - 1)`, `h(0) = 0`.
#[inline]
pub fn h(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        s * (s.ln() - 1.0)
    }
}

fn check_sign(state: &State, tol: f64) -> Result<()> {
    let min = state.min();
    if min < -tol {
        return Err(Error::NegativeData(format!("state entry {min:e}")));
    }
    Ok(())
}

/// `H_B(u) = sum_i sum_l dx pi_i h(u_{i,l})`.
pub fn boltzmann_entropy(scheme: &Scheme, state: &State) -> Result<f64> {
    scheme.check_state(state)?;
    check_sign(state, 1e-12)?;
    let pi = &scheme.params().pi;
    Ok(state
        .fields
        .iter()
        .zip(pi)
        .map(|(f, p)| p * f.dx() * f.iter().map(|&s| h(s)).sum::<f64>())
        .sum())
}

/// `H_R(u) = 1/2 sum_i dx pi_i a_ii |u_i|^2
///         + 1/2 sum_{i != j} dx pi_i a_ij u_i . (B^{ij} * u_j)`.
pub fn rao_entropy(scheme: &Scheme, state: &State) -> Result<f64> {
    scheme.check_state(state)?;
    let params = scheme.params();
    let n = params.n;
    let dx = scheme.mesh().dx();
    let mut total = 0.0;
    for i in 0..n {
        let ui = &state.fields[i];
        total += 0.5 * dx * params.pi[i] * params.a(i, i) * ui.iter().map(|x| x * x).sum::<f64>();
        for j in 0..n {
            if j == i || params.a(i, j) == 0.0 {
                continue;
            }
            let conv = scheme.kernels().get(i, j).convolve(&state.fields[j])?;
            total += 0.5
                * dx
                * params.pi[i]
                * params.a(i, j)
                * ui.iter().zip(conv.iter()).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    Ok(total)
}

/// `(Q_grad, D_rao)`:
///
/// ```text
/// Q_grad = 1/(n-1) sum_{i<j} sum_{l,l'} dx^2 (D_l u_i, D_l' u_j) M^{ij}_{l-l'} (D_l u_i, D_l' u_j)^T
/// D_rao  = sum_i sum_l dx pi_i u_{i,l+1/2} (D_l p_i)^2
/// ```
///
/// For one species `Q_grad = sum_l dx pi_1 a_11 (D_l u_1)^2`.
pub fn dissipation_forms(scheme: &Scheme, state: &State) -> Result<(f64, f64)> {
    scheme.check_state(state)?;
    let params = scheme.params();
    let mesh = scheme.mesh();
    let n = params.n;
    let dx = mesh.dx();
    let grads = state
        .fields
        .iter()
        .map(|f| diff(f, mesh))
        .collect::<Result<Vec<_>>>()?;
    let sq = |v: &[f64]| dx * v.iter().map(|x| x * x).sum::<f64>();

    let mut q_grad = 0.0;
    if n == 1 {
        q_grad = params.pi[0] * params.a(0, 0) * sq(&grads[0]);
    } else {
        let f = (n - 1) as f64;
        for i in 0..n {
            for j in i + 1..n {
                // sum_{l,l'} dx^2 of the diagonal entries; sum_{l'} dx = 1
                let diag = params.pi[i] * params.a(i, i) * sq(&grads[i])
                    + params.pi[j] * params.a(j, j) * sq(&grads[j]);
                let cross = |p: usize, q: usize| -> Result<f64> {
                    let conv = scheme.kernels().get(p, q).convolve(&grads[q])?;
                    Ok(dx
                        * grads[p]
                            .iter()
                            .zip(conv.iter())
                            .map(|(a, b)| a * b)
                            .sum::<f64>())
                };
                let off = params.pi[i] * params.a(i, j) * cross(i, j)?
                    + params.pi[j] * params.a(j, i) * cross(j, i)?;
                q_grad += diag / f + off;
            }
        }
    }

    let flat = state.flat();
    let p = scheme.potentials_flat(&flat);
    let cells = mesh.cells();
    let mut d_rao = 0.0;
    for i in 0..n {
        let base = i * cells;
        for l in 0..cells {
            let r = mesh.next(l);
            let dp = p[base + r] - p[base + l];
            let mob = mobility_unchecked(params.mobility, flat[base + l], flat[base + r], dp);
            d_rao += dx * params.pi[i] * mob * (dp / dx) * (dp / dx);
        }
    }
    Ok((q_grad, d_rao))
}

pub fn report(scheme: &Scheme, state: &State) -> Result<EntropyReport> {
    let (q_grad, d_rao) = dissipation_forms(scheme, state)?;
    Ok(EntropyReport {
        t: state.time,
        step: state.step,
        boltzmann: boltzmann_entropy(scheme, state)?,
        rao: rao_entropy(scheme, state)?,
        mass: state.masses(),
        q_grad,
        d_rao,
    })
}

/// One report per state.
pub fn ledger<'a, I>(scheme: &Scheme, states: I) -> Result<Vec<EntropyReport>>
where
    I: IntoIterator<Item = &'a State>,
{
    states.into_iter().map(|s| report(scheme, s)).collect()
}

/// First step at which an entropy increases beyond the slack, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityViolation {
    pub step: usize,
    pub which: &'static str,
    pub before: f64,
    pub after: f64,
}

pub fn check_monotone(reports: &[EntropyReport]) -> std::result::Result<(), MonotonicityViolation> {
    for w in reports.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        for (which, before, after) in [("H_B", a.boltzmann, b.boltzmann), ("H_R", a.rao, b.rao)] {
            if after > before + MONOTONICITY_SLACK * (1.0 + before.abs()) {
                return Err(MonotonicityViolation {
                    step: b.step,
                    which,
                    before,
                    after,
                });
            }
        }
    }
    Ok(())
}

/// `t,H_B,H_R,Q_grad,D_rao,mass_1,...,mass_n`, one row per report.
pub fn write_csv<W: Write>(mut w: W, reports: &[EntropyReport]) -> Result<()> {
    let n = reports.first().map_or(0, |r| r.mass.len());
    let mut header = String::from("t,H_B,H_R,Q_grad,D_rao");
    for i in 1..=n {
        header.push_str(&format!(",mass_{i}"));
    }
    writeln!(w, "{header}")?;
    for r in reports {
        write!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.t, r.boltzmann, r.rao, r.q_grad, r.d_rao
        )?;
        for m in &r.mass {
            write!(w, ",{m:.16e}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Field, Mesh};
    use crate::kernel::KernelSpec;
    use crate::mobility::MobilityRule;
    use crate::model::{HypothesisMode, KernelAssignment, ModelParams};

    fn scheme(n_cells: usize) -> Scheme {
        let params = ModelParams {
            n: 2,
            a: vec![vec![0.1251, 0.25], vec![1.0, 2.0]],
            pi: vec![4.0, 1.0],
            sigma: 1e-4,
            kernels: KernelAssignment::uniform(KernelSpec::indicator(0.3)),
            mobility: MobilityRule::Upwind,
            hypothesis_mode: HypothesisMode::Strict,
        };
        Scheme::new(params, Mesh::new(n_cells).unwrap()).unwrap()
    }

    #[test]
    fn boltzmann_examples() {
        let s = scheme(8);
        let ones = State::new(vec![Field(vec![1.0; 8]), Field(vec![1.0; 8])]);
        assert!((boltzmann_entropy(&s, &ones).unwrap() + 5.0).abs() < 1e-15);
        let zeros = State::new(vec![Field(vec![0.0; 8]), Field(vec![0.0; 8])]);
        assert_eq!(boltzmann_entropy(&s, &zeros).unwrap(), 0.0);
        let u1: Vec<f64> = (0..8)
            .map(|l| if (2..6).contains(&l) { 1.0 } else { 0.0 })
            .collect();
        let u2: Vec<f64> = u1.iter().map(|x| 1.0 - x).collect();
        let split = State::new(vec![Field(u1), Field(u2)]);
        assert!((boltzmann_entropy(&s, &split).unwrap() + 2.5).abs() < 1e-15);
        let neg = State::new(vec![Field(vec![-1e-6; 8]), Field(vec![1.0; 8])]);
        assert!(boltzmann_entropy(&s, &neg).is_err());
    }

    #[test]
    fn rao_of_constants() {
        let s = scheme(10);
        assert_eq!(
            rao_entropy(
                &s,
                &State::new(vec![Field(vec![0.0; 10]), Field(vec![0.0; 10])])
            )
            .unwrap(),
            0.0
        );
        let (c1, c2) = (0.7, 1.9);
        let st = State::new(vec![Field(vec![c1; 10]), Field(vec![c2; 10])]);
        let mass_b = 0.6;
        let expected = 0.5 * (4.0 * 0.1251 * c1 * c1 + 2.0 * c2 * c2)
            + 0.5 * (4.0 * 0.25 + 1.0 * 1.0) * mass_b * c1 * c2;
        assert!((rao_entropy(&s, &st).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn constant_state_does_not_dissipate() {
        let s = scheme(10);
        let st = State::new(vec![Field(vec![0.3; 10]), Field(vec![2.0; 10])]);
        let (q, d) = dissipation_forms(&s, &st).unwrap();
        assert!(q.abs() < 1e-20);
        assert!(d.abs() < 1e-20);
    }

    #[test]
    fn monotonicity_check_flags_increase() {
        let mk = |step, hb, hr| EntropyReport {
            t: step as f64,
            step,
            boltzmann: hb,
            rao: hr,
            mass: vec![1.0],
            q_grad: 0.0,
            d_rao: 0.0,
        };
        assert!(check_monotone(&[mk(0, 1.0, 1.0), mk(1, 1.0 + 1e-9, 0.5)]).is_ok());
        let err = check_monotone(&[mk(0, 1.0, 1.0), mk(1, 0.9, 1.1)]).unwrap_err();
        assert_eq!(err.which, "H_R");
        assert_eq!(err.step, 1);
    }

    #[test]
    fn ledger_csv_layout() {
        let s = scheme(8);
        let st = State::new(vec![Field(vec![1.0; 8]), Field(vec![0.5; 8])]);
        let reports = ledger(&s, [&st]).unwrap();
        assert_eq!(reports.len(), 1);
        let mut buf = Vec::new();
        write_csv(&mut buf, &reports).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,H_B,H_R,Q_grad,D_rao,mass_1,mass_2\n"));
        assert_eq!(text.lines().count(), 2);
    }
}
