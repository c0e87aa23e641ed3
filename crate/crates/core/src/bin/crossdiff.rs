use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crossdiff::counterexample::verify_negative_direction;
use crossdiff::harness::{
    registry, run_convergence_study, run_localization_study, run_segregation, run_single,
    OutputDir, RunConfig, Scale,
};
use crossdiff::metrics::Orders;
use crossdiff::{Error, Result};

#[derive(Parser)]
#[command(
    name = "crossdiff",
    version,
    about = "Nonlocal cross-diffusion finite-volume solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write snapshots and the entropy ledger.
    Run(Source),
    /// Run an experiment.
    #[command(subcommand)]
    Study(Study),
    /// List the built-in test cases.
    ListTestcases,
    /// Check the indefinite cell-integrated matrix for the indicator kernel.
    VerifyCounterexample {
        /// Even number of cells, at least 6.
        #[arg(long = "N", value_name = "N")]
        cells: usize,
    },
}

#[derive(Subcommand)]
enum Study {
    /// Mesh refinement ladder against the finest level.
    Convergence(StudyArgs),
    /// Shrinking kernels against the local model.
    Localization(StudyArgs),
    /// Local and nonlocal runs with a support gap report.
    Segregation(Source),
}

#[derive(Args)]
struct Source {
    /// Built-in test case (see list-testcases).
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    preset: Option<String>,
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct StudyArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum, default_value_t = ScaleArg::Desk)]
    scale: ScaleArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScaleArg {
    Full,
    Desk,
}

impl From<ScaleArg> for Scale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Full => Scale::Full,
            ScaleArg::Desk => Scale::Desk,
        }
    }
}

impl Source {
    fn load(&self) -> Result<RunConfig> {
        match (&self.preset, &self.config) {
            (Some(name), _) => registry::preset(name),
            (None, Some(path)) => RunConfig::load(path),
            (None, None) => Err(Error::Config("need --preset or --config".into())),
        }
    }

    fn out_dir(&self) -> Result<OutputDir> {
        OutputDir::create(&self.out)
    }
}

fn print_orders(orders: &Orders) {
    let show = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |x| format!("{x:.4}"));
    println!(
        "order L1 {}  Linf {}  W1 {}",
        show(orders.l1),
        show(orders.linf),
        show(orders.w1)
    );
}

fn finish(out: &OutputDir) -> Result<()> {
    let manifest = out.write_manifest()?;
    for name in out.created() {
        println!("wrote {}", Path::new(out.path()).join(name).display());
    }
    println!("manifest {}", manifest.display());
    Ok(())
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run(src) => {
            let cfg = src.load()?;
            let mut out = src.out_dir()?;
            let outcome = run_single(&cfg, Some(&mut out))?;
            let last = outcome.ledger.last().expect("initial state is recorded");
            println!(
                "t = {}: H_B = {:.10e}, H_R = {:.10e}, masses {:?}",
                last.t, last.boltzmann, last.rao, last.mass
            );
            finish(&out)?;
        }
        Command::Study(Study::Convergence(args)) => {
            let cfg = args.source.load()?;
            let mut out = args.source.out_dir()?;
            let outcome = run_convergence_study(&cfg, args.scale.into(), Some(&mut out))?;
            println!("h,N,L1,Linf");
            for r in &outcome.records {
                println!("{:e},{},{:e},{:e}", r.h, r.cells, r.l1, r.linf);
            }
            let last = outcome.final_error();
            println!(
                "error at N = {}: L1 {:.3e}, Linf {:.3e}",
                last.cells, last.l1, last.linf
            );
            print_orders(&outcome.orders);
            finish(&out)?;
        }
        Command::Study(Study::Localization(args)) => {
            let cfg = args.source.load()?;
            let mut out = args.source.out_dir()?;
            let outcome = run_localization_study(&cfg, args.scale.into(), Some(&mut out))?;
            println!("alpha,L1,Linf,W1");
            for r in &outcome.records {
                println!(
                    "{:e},{:e},{:e},{:e}",
                    r.h,
                    r.l1,
                    r.linf,
                    r.w1.unwrap_or(f64::NAN)
                );
            }
            print_orders(&outcome.orders);
            finish(&out)?;
        }
        Command::Study(Study::Segregation(src)) => {
            let cfg = src.load()?;
            let mut out = src.out_dir()?;
            let outcome = run_segregation(&cfg, Some(&mut out))?;
            println!("t,model,i,j,gap,overlap");
            for g in &outcome.gaps {
                println!(
                    "{},{},{},{},{},{:e}",
                    g.time,
                    if g.nonlocal { "nonlocal" } else { "local" },
                    g.pair.0 + 1,
                    g.pair.1 + 1,
                    g.gap.map_or_else(|| "none".into(), |v| format!("{v:.6}")),
                    g.overlap
                );
            }
            finish(&out)?;
        }
        Command::ListTestcases => {
            for p in registry::list() {
                println!("{:<6} {}", p.name, p.summary);
            }
        }
        Command::VerifyCounterexample { cells } => {
            let cert = verify_negative_direction(cells, &[vec![1.0]])?;
            println!("{cert}");
            return Ok(cert.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}
