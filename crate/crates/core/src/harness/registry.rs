//! Built-in test cases.

use super::config::{
    Experiment, InitialConfig, InitialPreset, KernelFamily, MeshConfig, OutputConfig, RunConfig,
    TimeConfig,
};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::mobility::MobilityRule;
use crate::model::{HypothesisMode, KernelAssignment, ModelParams};

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "13",
        summary: "two species, indicator data, indicator kernel; convergence ladder",
    },
    Preset {
        name: "14",
        summary: "two species, trigonometric data, indicator kernel; convergence ladder",
    },
    Preset {
        name: "15",
        summary: "two species, hat data, indicator kernel; convergence ladder",
    },
    Preset {
        name: "16",
        summary: "two species, indicator data, triangle kernel; convergence ladder",
    },
    Preset {
        name: "17",
        summary: "two species, trigonometric data, triangle kernel; convergence ladder",
    },
    Preset {
        name: "18",
        summary: "two species, hat data, triangle kernel; convergence ladder",
    },
    Preset {
        name: "19",
        summary: "two species, indicator data, narrow Gaussian kernel; convergence ladder",
    },
    Preset {
        name: "20",
        summary: "two species, trigonometric data, narrow Gaussian kernel; convergence ladder",
    },
    Preset {
        name: "21",
        summary: "two species, hat data, narrow Gaussian kernel; convergence ladder",
    },
    Preset {
        name: "NLTL2",
        summary: "three species, indicator data, normalized indicator kernels; localization limit",
    },
    Preset {
        name: "NLTL3",
        summary:
            "three species, trigonometric data, normalized indicator kernels; localization limit",
    },
    Preset {
        name: "NLTL4",
        summary: "three species, indicator data, normalized triangle kernels; localization limit",
    },
    Preset {
        name: "NLTL5",
        summary:
            "three species, trigonometric data, normalized triangle kernels; localization limit",
    },
    Preset {
        name: "NLTL6",
        summary: "three species, indicator data, Gaussian kernels; localization limit",
    },
    Preset {
        name: "NLTL7",
        summary: "three species, trigonometric data, Gaussian kernels; localization limit",
    },
    Preset {
        name: "SEG2",
        summary: "two segregated species without self-diffusion; gap formation",
    },
    Preset {
        name: "SEG3",
        summary: "three segregated species without self-diffusion; gap formation",
    },
];

pub fn list() -> &'static [Preset] {
    PRESETS
}

fn two_species(kernel: KernelSpec, mode: HypothesisMode) -> ModelParams {
    ModelParams {
        n: 2,
        a: vec![vec![0.1251, 0.25], vec![1.0, 2.0]],
        pi: vec![4.0, 1.0],
        sigma: 1e-4,
        kernels: KernelAssignment::uniform(kernel),
        mobility: MobilityRule::Upwind,
        hypothesis_mode: mode,
    }
}

fn three_species(kernel: KernelSpec) -> ModelParams {
    ModelParams {
        n: 3,
        a: vec![
            vec![0.5, 0.2, 0.125],
            vec![0.4, 1.0, 0.2],
            vec![0.25, 0.2, 1.0],
        ],
        pi: vec![4.0, 2.0, 2.0],
        sigma: 1e-4,
        kernels: KernelAssignment::uniform(kernel),
        mobility: MobilityRule::Upwind,
        hypothesis_mode: HypothesisMode::Warn,
    }
}

fn segregation(n: usize, initial: InitialPreset) -> RunConfig {
    RunConfig {
        model: ModelParams {
            n,
            a: vec![vec![1.0; n]; n],
            pi: vec![1.0; n],
            sigma: 0.0,
            kernels: KernelAssignment::uniform(KernelSpec::Indicator {
                radius: 0.1,
                height: 100.0,
            }),
            mobility: MobilityRule::Upwind,
            hypothesis_mode: HypothesisMode::Warn,
        },
        mesh: MeshConfig { cells: 512 },
        time: TimeConfig { end: 0.2, dt: 1e-4 },
        initial: InitialConfig::Preset(initial),
        outputs: OutputConfig {
            snapshot_times: vec![0.02, 0.2],
            directory: None,
            run_id: format!("seg{n}"),
        },
        experiment: Experiment::Segregation { threshold: 1e-3 },
    }
}

/// Configuration of a named test case.
pub fn preset(name: &str) -> Result<RunConfig> {
    let unknown = || Error::Config(format!("unknown preset {name:?}; see list-testcases"));
    let upper = name.to_ascii_uppercase();
    if let Ok(k) = upper.parse::<u32>() {
        if !(13..=21).contains(&k) {
            return Err(unknown());
        }
        let idx = k - 13;
        let initial = [
            InitialPreset::IndicatorPair,
            InitialPreset::TrigPair,
            InitialPreset::HatPair,
        ][(idx % 3) as usize];
        let (kernel, mode) = match idx / 3 {
            0 => (KernelSpec::indicator(0.3), HypothesisMode::Strict),
            1 => (
                KernelSpec::Triangle {
                    radius: 0.3,
                    height: 2.0,
                },
                HypothesisMode::Warn,
            ),
            _ => (KernelSpec::gaussian(1e-3), HypothesisMode::Warn),
        };
        return Ok(RunConfig {
            model: two_species(kernel, mode),
            mesh: MeshConfig { cells: 32 },
            time: TimeConfig {
                end: 1.0,
                dt: 1.0 / 64.0,
            },
            initial: InitialConfig::Preset(initial),
            outputs: OutputConfig {
                snapshot_times: Vec::new(),
                directory: None,
                run_id: format!("testcase{k}"),
            },
            experiment: Experiment::Convergence { finest_cells: 2048 },
        });
    }
    if let Some(k) = upper
        .strip_prefix("NLTL")
        .and_then(|s| s.parse::<u32>().ok())
    {
        if !(2..=7).contains(&k) {
            return Err(unknown());
        }
        let initial = if k % 2 == 0 {
            InitialPreset::IndicatorTriple
        } else {
            InitialPreset::TrigTriple
        };
        let family = [
            KernelFamily::Indicator,
            KernelFamily::Triangle,
            KernelFamily::Gaussian,
        ][((k - 2) / 2) as usize];
        let cells = 512;
        let max_power = 7;
        let widest = (1u32 << max_power) as f64 / cells as f64;
        return Ok(RunConfig {
            model: three_species(family.spec(widest)),
            mesh: MeshConfig { cells },
            time: TimeConfig { end: 1.0, dt: 1e-3 },
            initial: InitialConfig::Preset(initial),
            outputs: OutputConfig {
                snapshot_times: Vec::new(),
                directory: None,
                run_id: format!("nltl{k}"),
            },
            experiment: Experiment::Localization { family, max_power },
        });
    }
    match upper.as_str() {
        "SEG2" => Ok(segregation(2, InitialPreset::SegregatedPair)),
        "SEG3" => Ok(segregation(3, InitialPreset::SegregatedTriple)),
        _ => Err(unknown()),
    }
}
