//! Experiment drivers.

use std::io::Write;

use super::config::{Experiment, RunConfig};
use super::{at, OutputDir, Scale};
use crate::entropy::{self, EntropyReport};
use crate::error::{Error, Result};
use crate::grid::{Field, Mesh, TimeGrid};
use crate::metrics::{eoc, write_orders_csv, write_study_csv, ErrorRecord, Orders};
use crate::model::{KernelAssignment, ModelParams};
use crate::scheme::{
    snapshot_file_name, write_snapshot_csv, Scheme, SolverOptions, State, StepReport,
};

/// One rung of a refinement ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub cells: usize,
    pub dt: f64,
}

/// Doubles the cells and halves `dt` from `(cells, dt)` up to `finest_cells`.
pub fn refinement_levels(cells: usize, dt: f64, finest_cells: usize) -> Vec<Level> {
    let mut levels = Vec::new();
    let (mut n, mut t) = (cells, dt);
    while n <= finest_cells {
        levels.push(Level { cells: n, dt: t });
        n *= 2;
        t /= 2.0;
    }
    levels
}

/// Final state of one simulation.
fn simulate(params: &ModelParams, cfg: &RunConfig, mesh: Mesh, dt: f64) -> Result<Vec<Field>> {
    let scheme = Scheme::new(params.clone(), mesh)?;
    let initial = cfg.initial_state(&mesh)?;
    let time = TimeGrid::from_step(cfg.time.end, dt)?;
    let last = scheme.run_with(initial, &time, &SolverOptions::default(), |_, _| Ok(()))?;
    Ok(last.fields)
}

#[derive(Debug, Clone)]
pub struct ConvergenceOutcome {
    pub levels: Vec<Level>,
    /// One record per level except the reference, coarsest first.
    pub records: Vec<ErrorRecord>,
    pub orders: Orders,
}

impl ConvergenceOutcome {
    /// Error of the second-finest level against the reference.
    pub fn final_error(&self) -> &ErrorRecord {
        self.records.last().expect("at least two levels")
    }
}

/// Solves every level, takes the finest as reference and regresses the
/// errors of the others against `h = 1/N`.
pub fn convergence_ladder<F>(levels: &[Level], mut solve: F) -> Result<ConvergenceOutcome>
where
    F: FnMut(&Level) -> Result<Vec<Field>>,
{
    if levels.len() < 3 {
        return Err(Error::Config(
            "a convergence ladder needs at least three levels".into(),
        ));
    }
    let mut finals = Vec::with_capacity(levels.len());
    for level in levels {
        let fields = solve(level).map_err(at(format!("level N = {}", level.cells)))?;
        finals.push(fields);
    }
    let reference = finals.last().expect("nonempty");
    let records = levels[..levels.len() - 1]
        .iter()
        .zip(&finals)
        .map(|(level, fields)| {
            ErrorRecord::compare(1.0 / level.cells as f64, fields, reference, false)
        })
        .collect::<Result<Vec<_>>>()?;
    let orders = eoc(&records)?;
    Ok(ConvergenceOutcome {
        levels: levels.to_vec(),
        records,
        orders,
    })
}

fn write_study(
    out: &mut OutputDir,
    run_id: &str,
    records: &[ErrorRecord],
    orders: &Orders,
) -> Result<()> {
    let mut w = out.file(&format!("{run_id}_study.csv"))?;
    write_study_csv(&mut w, records)?;
    w.flush()?;
    let mut w = out.file(&format!("{run_id}_orders.csv"))?;
    write_orders_csv(&mut w, orders)?;
    w.flush()?;
    Ok(())
}

/// Mesh refinement study: the ladder starts at the configured mesh and
/// step and doubles up to `finest_cells` (capped at desk scale).
pub fn run_convergence_study(
    cfg: &RunConfig,
    scale: Scale,
    out: Option<&mut OutputDir>,
) -> Result<ConvergenceOutcome> {
    let cfg = scale.adapt(cfg);
    cfg.validate()?;
    let Experiment::Convergence { finest_cells } = cfg.experiment else {
        return Err(Error::Config(
            "configuration is not a convergence study".into(),
        ));
    };
    let levels = refinement_levels(cfg.mesh.cells, cfg.time.dt, finest_cells);
    let outcome = convergence_ladder(&levels, |level| {
        simulate(&cfg.model, &cfg, Mesh::new(level.cells)?, level.dt)
    })?;
    if let Some(out) = out {
        write_study(out, &cfg.outputs.run_id, &outcome.records, &outcome.orders)?;
    }
    Ok(outcome)
}

/// Kernel widths `2^k dx`, `k = max_power, ..., 0`.
pub fn alpha_ladder(cells: usize, max_power: u32) -> Vec<f64> {
    (0..=max_power)
        .rev()
        .map(|k| (1u64 << k) as f64 / cells as f64)
        .collect()
}

#[derive(Debug, Clone)]
pub struct LocalizationOutcome {
    pub alphas: Vec<f64>,
    /// Distances to the local solution, widest kernel first; `h` holds `alpha`.
    pub records: Vec<ErrorRecord>,
    pub orders: Orders,
}

/// Distance between nonlocal solutions with shrinking kernels and the local
/// solution on the same mesh.
pub fn run_localization_study(
    cfg: &RunConfig,
    scale: Scale,
    out: Option<&mut OutputDir>,
) -> Result<LocalizationOutcome> {
    let cfg = scale.adapt(cfg);
    cfg.validate()?;
    let Experiment::Localization { family, max_power } = cfg.experiment else {
        return Err(Error::Config(
            "configuration is not a localization study".into(),
        ));
    };
    let mesh = cfg.mesh()?;
    let local =
        simulate(&cfg.model.localized(), &cfg, mesh, cfg.time.dt).map_err(at("local reference"))?;
    let alphas = alpha_ladder(mesh.cells(), max_power);
    let mut records = Vec::with_capacity(alphas.len());
    for &alpha in &alphas {
        let mut params = cfg.model.clone();
        params.kernels = KernelAssignment::uniform(family.spec(alpha));
        let fields =
            simulate(&params, &cfg, mesh, cfg.time.dt).map_err(at(format!("alpha = {alpha}")))?;
        records.push(ErrorRecord::compare(alpha, &fields, &local, true)?);
    }
    let orders = eoc(&records)?;
    if let Some(out) = out {
        write_study(out, &cfg.outputs.run_id, &records, &orders)?;
    }
    Ok(LocalizationOutcome {
        alphas,
        records,
        orders,
    })
}

/// Separation of two species at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapReport {
    pub time: f64,
    pub nonlocal: bool,
    pub pair: (usize, usize),
    /// Width of the empty region between the two supports; `None` when a
    /// support is empty.
    pub gap: Option<f64>,
    /// `sum_l dx u_i u_j`.
    pub overlap: f64,
}

/// Width of the region between the supports `{a >= threshold}` and
/// `{b >= threshold}`: the smallest number of cells strictly between a cell
/// of one and a cell of the other on the circle, times `dx`. Zero if the
/// supports touch or intersect.
pub fn support_gap(a: &[f64], b: &[f64], threshold: f64) -> Option<f64> {
    let n = a.len();
    let sa: Vec<usize> = (0..n).filter(|&l| a[l] >= threshold).collect();
    let sb: Vec<usize> = (0..n).filter(|&l| b[l] >= threshold).collect();
    if sa.is_empty() || sb.is_empty() {
        return None;
    }
    let mut best = n;
    for &p in &sa {
        for &q in &sb {
            let d = p.abs_diff(q);
            best = best.min(d.min(n - d));
        }
    }
    Some(best.saturating_sub(1) as f64 / n as f64)
}

pub fn overlap(a: &[f64], b: &[f64]) -> f64 {
    let dx = 1.0 / a.len() as f64;
    dx * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
}

fn gap_reports(state: &State, nonlocal: bool, threshold: f64) -> Vec<GapReport> {
    let n = state.species();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&state.fields[i], &state.fields[j]);
            out.push(GapReport {
                time: state.time,
                nonlocal,
                pair: (i, j),
                gap: support_gap(a, b, threshold),
                overlap: overlap(a, b),
            });
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct SegregationOutcome {
    /// Gap reports at t = 0 and at each snapshot time, nonlocal then local.
    pub gaps: Vec<GapReport>,
    pub nonlocal_snapshots: Vec<State>,
    pub local_snapshots: Vec<State>,
}

impl SegregationOutcome {
    pub fn gap(&self, time: f64, nonlocal: bool, pair: (usize, usize)) -> Option<&GapReport> {
        self.gaps
            .iter()
            .filter(|g| g.nonlocal == nonlocal && g.pair == pair)
            .min_by(|x, y| (x.time - time).abs().total_cmp(&(y.time - time).abs()))
    }
}

/// Runs the configured (nonlocal) model and its local version and measures
/// the supports at the snapshot times.
pub fn run_segregation(
    cfg: &RunConfig,
    mut out: Option<&mut OutputDir>,
) -> Result<SegregationOutcome> {
    cfg.validate()?;
    let Experiment::Segregation { threshold } = cfg.experiment else {
        return Err(Error::Config(
            "configuration is not a segregation study".into(),
        ));
    };
    let mesh = cfg.mesh()?;
    let time = cfg.time_grid()?;
    let dt = time.dt();
    let mut wanted: Vec<usize> = cfg
        .outputs
        .snapshot_times
        .iter()
        .map(|t| (t / dt).round() as usize)
        .collect();
    wanted.push(time.steps());
    let mut gaps = Vec::new();
    let mut snaps = [Vec::new(), Vec::new()];
    for (slot, nonlocal) in [(0, true), (1, false)] {
        let params = if nonlocal {
            cfg.model.clone()
        } else {
            cfg.model.localized()
        };
        let label = if nonlocal { "nonlocal" } else { "local" };
        let scheme = Scheme::new(params, mesh)?;
        let initial = cfg.initial_state(&mesh)?;
        gaps.extend(gap_reports(&initial, nonlocal, threshold));
        scheme
            .run_with(initial, &time, &SolverOptions::default(), |state, _| {
                if state.step > 0
                    && wanted.contains(&state.step)
                    && !snaps[slot].iter().any(|s: &State| s.step == state.step)
                {
                    gaps.extend(gap_reports(state, nonlocal, threshold));
                    snaps[slot].push(state.clone());
                }
                Ok(())
            })
            .map_err(at(format!("{label} run")))?;
        if let Some(out) = out.as_deref_mut() {
            for s in &snaps[slot] {
                let name = snapshot_file_name(&format!("{}_{label}", cfg.outputs.run_id), s.time);
                let mut w = out.file(&name)?;
                write_snapshot_csv(&mut w, s, &mesh)?;
                w.flush()?;
            }
        }
    }
    if let Some(out) = out {
        let mut w = out.file(&format!("{}_gaps.csv", cfg.outputs.run_id))?;
        writeln!(w, "t,model,i,j,gap,overlap")?;
        for g in &gaps {
            writeln!(
                w,
                "{:.16e},{},{},{},{},{:.16e}",
                g.time,
                if g.nonlocal { "nonlocal" } else { "local" },
                g.pair.0 + 1,
                g.pair.1 + 1,
                g.gap
                    .map_or_else(|| "nan".to_string(), |v| format!("{v:.16e}")),
                g.overlap
            )?;
        }
        w.flush()?;
    }
    let [nonlocal_snapshots, local_snapshots] = snaps;
    Ok(SegregationOutcome {
        gaps,
        nonlocal_snapshots,
        local_snapshots,
    })
}

#[derive(Debug, Clone)]
pub struct SingleOutcome {
    pub final_state: State,
    /// Entropy ledger at every time level.
    pub ledger: Vec<EntropyReport>,
    pub steps: Vec<StepReport>,
    pub snapshots: Vec<State>,
}

/// One simulation with snapshots and the entropy ledger.
pub fn run_single(cfg: &RunConfig, mut out: Option<&mut OutputDir>) -> Result<SingleOutcome> {
    cfg.validate()?;
    let mesh = cfg.mesh()?;
    let time = cfg.time_grid()?;
    let scheme = Scheme::new(cfg.model.clone(), mesh)?;
    let initial = cfg.initial_state(&mesh)?;
    let dt = time.dt();
    let mut wanted: Vec<usize> = cfg
        .outputs
        .snapshot_times
        .iter()
        .map(|t| (t / dt).round() as usize)
        .collect();
    wanted.push(time.steps());
    let mut ledger = Vec::with_capacity(time.steps() + 1);
    let mut steps = Vec::with_capacity(time.steps());
    let mut snapshots: Vec<State> = Vec::new();
    let final_state = scheme.run_with(
        initial,
        &time,
        &SolverOptions::default(),
        |state, report| {
            ledger.push(entropy::report(&scheme, state)?);
            if let Some(r) = report {
                steps.push(r.clone());
            }
            if wanted.contains(&state.step) && !snapshots.iter().any(|s| s.step == state.step) {
                snapshots.push(state.clone());
            }
            Ok(())
        },
    )?;
    if let Some(out) = out.as_mut() {
        let id = &cfg.outputs.run_id;
        for s in &snapshots {
            let mut w = out.file(&snapshot_file_name(id, s.time))?;
            write_snapshot_csv(&mut w, s, &mesh)?;
            w.flush()?;
        }
        let mut w = out.file(&format!("{id}_entropy.csv"))?;
        entropy::write_csv(&mut w, &ledger)?;
        w.flush()?;
        let mut w = out.file(&format!("{id}_config.json"))?;
        w.write_all(cfg.to_json()?.as_bytes())?;
        w.flush()?;
    }
    Ok(SingleOutcome {
        final_state,
        ledger,
        steps,
        snapshots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refinement_levels_double() {
        let levels = refinement_levels(32, 1.0 / 64.0, 2048);
        assert_eq!(levels.len(), 7);
        assert_eq!(
            levels[6],
            Level {
                cells: 2048,
                dt: 1.0 / 4096.0
            }
        );
    }

    #[test]
    fn alpha_ladder_reaches_dx() {
        let a = alpha_ladder(512, 7);
        assert_eq!(a.len(), 8);
        assert_eq!(a[0], 128.0 / 512.0);
        assert_eq!(*a.last().unwrap(), 1.0 / 512.0);
    }

    #[test]
    fn manufactured_first_order_ladder() {
        // stub solver: the exact constant solution, off by h except on the reference level
        let levels = refinement_levels(16, 0.1, 256);
        let outcome = convergence_ladder(&levels, |level| {
            let mesh = Mesh::new(level.cells)?;
            let shift = if level.cells == 256 { 0.0 } else { mesh.dx() };
            Ok(vec![
                mesh.constant(2.0 + shift),
                mesh.constant(1.0 - 0.5 * shift),
            ])
        })
        .unwrap();
        assert!(
            (outcome.orders.l1.unwrap() - 1.0).abs() < 1e-12,
            "{:?}",
            outcome.orders
        );
        assert!(
            (outcome.orders.linf.unwrap() - 1.0).abs() < 1e-12,
            "{:?}",
            outcome.orders
        );
    }

    #[test]
    fn gap_measure() {
        let mut a = vec![0.0; 20];
        let mut b = vec![0.0; 20];
        a[2..6].iter_mut().for_each(|v| *v = 1.0);
        b[9..12].iter_mut().for_each(|v| *v = 1.0);
        assert_eq!(support_gap(&a, &b, 1e-3), Some(3.0 / 20.0));
        b[6] = 1.0;
        assert_eq!(support_gap(&a, &b, 1e-3), Some(0.0));
        assert_eq!(support_gap(&a, &[0.0; 20], 1e-3), None);
        assert_eq!(overlap(&a, &b), 0.0);
        // the gap is measured around the circle
        let mut c = vec![0.0; 20];
        c[18] = 1.0;
        assert_eq!(support_gap(&a, &c, 1e-3), Some(3.0 / 20.0));
    }
}
