use std::io::Write;

use super::newton::{SolverOptions, StepReport, Stepper};
use super::{Scheme, State};
use crate::error::Result;
use crate::grid::{Mesh, TimeGrid};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub solver: SolverOptions,
    /// Keep every `k`-th state in the trajectory (the initial and final
    /// states are always kept). `None` keeps only those plus snapshots.
    pub keep_every: Option<usize>,
    /// Times at which states are kept regardless of thinning; each is
    /// rounded to the nearest step.
    pub snapshot_times: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub states: Vec<State>,
    /// One report per time step, in order.
    pub reports: Vec<StepReport>,
}

impl Trajectory {
    pub fn last(&self) -> &State {
        self.states
            .last()
            .expect("trajectory holds the initial state")
    }

    /// Kept state closest to time `t`.
    pub fn at_time(&self, t: f64) -> Option<&State> {
        self.states
            .iter()
            .min_by(|a, b| (a.time - t).abs().partial_cmp(&(b.time - t).abs()).unwrap())
    }
}

impl Scheme {
    /// Time loop; `observer` sees every state (with its step report) as it
    /// is accepted, starting with the initial state.
    pub fn run_with<F>(
        &self,
        initial: State,
        time: &TimeGrid,
        solver: &SolverOptions,
        mut observer: F,
    ) -> Result<State>
    where
        F: FnMut(&State, Option<&StepReport>) -> Result<()>,
    {
        self.check_state(&initial)?;
        observer(&initial, None)?;
        let dt = time.dt();
        let mut stepper = Stepper::new(self, solver.clone());
        let mut state = initial;
        for k in 1..=time.steps() {
            let (mut next, report) = stepper.step(&state, dt)?;
            // avoid drift from repeated addition
            next.time = time.time(k);
            next.step = k;
            observer(&next, Some(&report))?;
            state = next;
        }
        Ok(state)
    }

    pub fn run(&self, initial: State, time: &TimeGrid, opts: &RunOptions) -> Result<Trajectory> {
        let dt = time.dt();
        let snapshot_steps: Vec<usize> = opts
            .snapshot_times
            .iter()
            .map(|t| (t / dt).round() as usize)
            .collect();
        let last = time.steps();
        let mut traj = Trajectory::default();
        self.run_with(initial, time, &opts.solver, |state, report| {
            let k = state.step;
            let keep = k == 0
                || k == last
                || snapshot_steps.contains(&k)
                || opts.keep_every.is_some_and(|e| e > 0 && k % e == 0);
            if keep {
                traj.states.push(state.clone());
            }
            if let Some(r) = report {
                traj.reports.push(r.clone());
            }
            Ok(())
        })?;
        Ok(traj)
    }
}

/// Writes `x,u_1,...,u_n` with one row per cell.
pub fn write_snapshot_csv<W: Write>(mut w: W, state: &State, mesh: &Mesh) -> Result<()> {
    let header: Vec<String> = std::iter::once("x".to_string())
        .chain((1..=state.species()).map(|i| format!("u_{i}")))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for l in 0..mesh.cells() {
        write!(w, "{:.16e}", mesh.center(l))?;
        for f in &state.fields {
            write!(w, ",{:.16e}", f[l])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// `{run_id}_t{time:.6f}.csv`
pub fn snapshot_file_name(run_id: &str, time: f64) -> String {
    format!("{run_id}_t{time:.6}.csv")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Field;
    use crate::kernel::KernelSpec;
    use crate::mobility::MobilityRule;
    use crate::model::{HypothesisMode, KernelAssignment, ModelParams};

    fn params(kernel: KernelSpec) -> ModelParams {
        ModelParams {
            n: 2,
            a: vec![vec![1.0, 0.5], vec![0.5, 1.0]],
            pi: vec![1.0, 1.0],
            sigma: 0.05,
            kernels: KernelAssignment::uniform(kernel),
            mobility: MobilityRule::Upwind,
            hypothesis_mode: HypothesisMode::Strict,
        }
    }

    fn data(n: usize) -> State {
        State::new(vec![
            Field(
                (0..n)
                    .map(|l| 1.0 + (std::f64::consts::TAU * l as f64 / n as f64).cos())
                    .collect(),
            ),
            Field(
                (0..n)
                    .map(|l| 1.0 - (std::f64::consts::TAU * l as f64 / n as f64).cos())
                    .collect(),
            ),
        ])
    }

    #[test]
    fn zero_steps_returns_initial_state() {
        let mesh = Mesh::new(8).unwrap();
        let s = Scheme::new(params(KernelSpec::Dirac), mesh).unwrap();
        let t = TimeGrid::new(1.0, 0).unwrap();
        let traj = s.run(data(8), &t, &RunOptions::default()).unwrap();
        assert_eq!(traj.states.len(), 1);
        assert!(traj.reports.is_empty());
    }

    #[test]
    fn dirac_runs_are_reproducible() {
        let mesh = Mesh::new(16).unwrap();
        let s = Scheme::new(params(KernelSpec::Dirac), mesh).unwrap();
        let local = Scheme::new(params(KernelSpec::Dirac).localized(), mesh).unwrap();
        let t = TimeGrid::new(0.1, 5).unwrap();
        let a = s.run(data(16), &t, &RunOptions::default()).unwrap();
        let b = local.run(data(16), &t, &RunOptions::default()).unwrap();
        assert_eq!(a.last().flat(), b.last().flat());
    }

    #[test]
    fn snapshots_and_thinning() {
        let mesh = Mesh::new(12).unwrap();
        let s = Scheme::new(params(KernelSpec::indicator(0.2)), mesh).unwrap();
        let t = TimeGrid::new(0.1, 10).unwrap();
        let opts = RunOptions {
            keep_every: Some(5),
            snapshot_times: vec![0.03],
            ..Default::default()
        };
        let traj = s.run(data(12), &t, &opts).unwrap();
        let steps: Vec<usize> = traj.states.iter().map(|s| s.step).collect();
        assert_eq!(steps, vec![0, 3, 5, 10]);
        assert_eq!(traj.reports.len(), 10);
        assert!((traj.last().time - 0.1).abs() < 1e-15);
        let m0 = traj.states[0].masses();
        for st in &traj.states {
            for (a, b) in st.masses().iter().zip(&m0) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn snapshot_csv_layout() {
        let mesh = Mesh::new(4).unwrap();
        let mut buf = Vec::new();
        let st = State::new(vec![Field(vec![1.0, 2.0, 3.0, 4.0]), Field(vec![0.0; 4])]);
        write_snapshot_csv(&mut buf, &st, &mesh).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "x,u_1,u_2");
        assert_eq!(lines.len(), 5);
        assert_eq!(
            lines[2],
            "2.5000000000000000e-1,2.0000000000000000e0,0.0000000000000000e0"
        );
        assert_eq!(snapshot_file_name("seg", 0.02), "seg_t0.020000.csv");
    }
}
