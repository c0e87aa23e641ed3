//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Mesh, TimeGrid};
use crate::kernel::KernelSpec;
use crate::model::ModelParams;
use crate::scheme::{project_initial, InitialProfile, State};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    pub mesh: MeshConfig,
    pub time: TimeConfig,
    pub initial: InitialConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default)]
    pub experiment: Experiment,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub cells: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub end: f64,
    pub dt: f64,
}

/// Named initial data or an explicit list of profiles, one per species.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    Preset(InitialPreset),
    Profiles(Vec<InitialProfile>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialPreset {
    /// `1_[1/4,3/4]` and its complement.
    IndicatorPair,
    /// `cos(2 pi x) + 1` and `sin(2 pi x - pi/2) + 1`.
    TrigPair,
    /// Hats of height 1 and half-width 1/2 centred at 1/2 and 0.
    HatPair,
    /// Indicators of `[3/6,5/6]`, `[0,1/6] u [5/6,1]`, `[1/6,3/6]`.
    IndicatorTriple,
    /// `cos + 1`, `sin + 1`, `(cos + sin + 2) / 2`.
    TrigTriple,
    /// Indicators of `[0.1,0.4]` and `[0.6,0.8]`.
    SegregatedPair,
    /// Indicators of `[0.5,0.6]`, `[0.8,0.9]`, `[0.1,0.2]`.
    SegregatedTriple,
}

impl InitialPreset {
    pub fn profiles(self) -> Vec<InitialProfile> {
        use InitialProfile as P;
        match self {
            InitialPreset::IndicatorPair => vec![
                P::indicator(&[[0.25, 0.75]]),
                P::indicator(&[[0.0, 0.25], [0.75, 1.0]]),
            ],
            // sin(2 pi x - pi/2) = -cos(2 pi x)
            InitialPreset::TrigPair => vec![P::trig(1.0, 1.0, 0.0), P::trig(1.0, -1.0, 0.0)],
            InitialPreset::HatPair => vec![P::hat(0.5, 0.5, 1.0), P::hat(0.0, 0.5, 1.0)],
            InitialPreset::IndicatorTriple => vec![
                P::indicator(&[[3.0 / 6.0, 5.0 / 6.0]]),
                P::indicator(&[[0.0, 1.0 / 6.0], [5.0 / 6.0, 1.0]]),
                P::indicator(&[[1.0 / 6.0, 3.0 / 6.0]]),
            ],
            InitialPreset::TrigTriple => vec![
                P::trig(1.0, 1.0, 0.0),
                P::trig(1.0, 0.0, 1.0),
                P::trig(1.0, 0.5, 0.5),
            ],
            InitialPreset::SegregatedPair => {
                vec![P::indicator(&[[0.1, 0.4]]), P::indicator(&[[0.6, 0.8]])]
            }
            InitialPreset::SegregatedTriple => vec![
                P::indicator(&[[0.5, 0.6]]),
                P::indicator(&[[0.8, 0.9]]),
                P::indicator(&[[0.1, 0.2]]),
            ],
        }
    }
}

impl InitialConfig {
    pub fn profiles(&self) -> Vec<InitialProfile> {
        match self {
            InitialConfig::Preset(p) => p.profiles(),
            InitialConfig::Profiles(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Times at which snapshot CSVs are written (the final time always is).
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Overridden by `--out` on the command line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    #[serde(default = "default_run_id")]
    pub run_id: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            snapshot_times: Vec::new(),
            directory: None,
            run_id: default_run_id(),
        }
    }
}

fn default_run_id() -> String {
    "run".to_string()
}

/// Kernel family indexed by a width `alpha` that shrinks to the Dirac mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    /// `1_[-alpha, alpha] / (2 alpha)`.
    Indicator,
    /// `max(1 - |z| / alpha, 0) / alpha`.
    Triangle,
    /// Normalized Gaussian of width `alpha`.
    Gaussian,
}

impl KernelFamily {
    pub fn spec(self, alpha: f64) -> KernelSpec {
        match self {
            KernelFamily::Indicator => KernelSpec::normalized_indicator(alpha),
            KernelFamily::Triangle => KernelSpec::normalized_triangle(alpha),
            KernelFamily::Gaussian => KernelSpec::gaussian(alpha),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    #[default]
    Single,
    /// Doubling ladder starting at `mesh.cells` and `time.dt`.
    Convergence {
        /// Finest (reference) number of cells at full scale.
        finest_cells: usize,
    },
    /// Kernel widths `2^k dx` for `k = max_power, ..., 0` against the local model.
    Localization {
        family: KernelFamily,
        max_power: u32,
    },
    /// Nonlocal and local runs side by side, with a gap report.
    Segregation {
        #[serde(default = "default_threshold")]
        threshold: f64,
    },
}

fn default_threshold() -> f64 {
    1e-3
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks everything that can be checked without running.
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        Mesh::new(self.mesh.cells)?;
        self.time_grid()?;
        let profiles = self.initial.profiles();
        if profiles.len() != self.model.n {
            return Err(Error::Config(format!(
                "{} initial profiles for {} species",
                profiles.len(),
                self.model.n
            )));
        }
        for p in &profiles {
            p.validate()?;
        }
        if let Some(t) = self
            .outputs
            .snapshot_times
            .iter()
            .find(|t| !(**t >= 0.0 && **t <= self.time.end))
        {
            return Err(Error::Config(format!("snapshot time {t} outside [0, T]")));
        }
        if self.outputs.run_id.is_empty() || self.outputs.run_id.contains(['/', '\\']) {
            return Err(Error::Config(format!(
                "bad run_id {:?}",
                self.outputs.run_id
            )));
        }
        match self.experiment {
            Experiment::Convergence { finest_cells } => {
                let c = self.mesh.cells;
                if finest_cells < 2 * c
                    || finest_cells % c != 0
                    || !(finest_cells / c).is_power_of_two()
                {
                    return Err(Error::Config(format!(
                        "finest_cells {finest_cells} is not a power-of-two multiple of {c}"
                    )));
                }
            }
            Experiment::Localization { max_power, .. } => {
                let alpha = (1u64 << max_power) as f64 / self.mesh.cells as f64;
                if alpha > 0.5 {
                    return Err(Error::Config(format!(
                        "largest kernel width {alpha} exceeds 1/2"
                    )));
                }
            }
            Experiment::Segregation { threshold } => {
                if !(threshold > 0.0) {
                    return Err(Error::Config("threshold must be positive".into()));
                }
            }
            Experiment::Single => {}
        }
        Ok(())
    }

    pub fn mesh(&self) -> Result<Mesh> {
        Mesh::new(self.mesh.cells)
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        if !(self.time.dt > 0.0) || !(self.time.end >= 0.0) {
            return Err(Error::Config(format!(
                "need T >= 0 and dt > 0, got T = {}, dt = {}",
                self.time.end, self.time.dt
            )));
        }
        TimeGrid::from_step(self.time.end, self.time.dt)
    }

    pub fn initial_state(&self, mesh: &Mesh) -> Result<State> {
        project_initial(&self.initial.profiles(), mesh)
    }
}
