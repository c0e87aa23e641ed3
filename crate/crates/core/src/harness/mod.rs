//! Configuration, the built-in test cases and the experiment drivers.

pub mod config;
pub mod registry;
pub mod studies;

use std::collections::BTreeSet;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use config::{Experiment, InitialConfig, InitialPreset, KernelFamily, RunConfig};
pub use studies::{
    alpha_ladder, convergence_ladder, run_convergence_study, run_localization_study,
    run_segregation, run_single, ConvergenceOutcome, GapReport, Level, LocalizationOutcome,
    SegregationOutcome, SingleOutcome,
};

use crate::error::{Error, Result};

pub const MANIFEST: &str = "manifest.json";

/// Problem size of a study: full size, or a reduced one that runs
/// in minutes on a desktop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    Full,
    #[default]
    Desk,
}

/// Finest mesh of a desk-scale convergence ladder.
pub const DESK_FINEST_CELLS: usize = 512;
/// Mesh and widest kernel exponent of a desk-scale localization study.
pub const DESK_LOCALIZATION_CELLS: usize = 256;
pub const DESK_LOCALIZATION_MAX_POWER: u32 = 5;

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Scale::Full),
            "desk" => Ok(Scale::Desk),
            _ => Err(Error::Config(format!("unknown scale {s:?} (full or desk)"))),
        }
    }
}

impl Scale {
    /// `cfg` resized for this scale.
    pub fn adapt(self, cfg: &RunConfig) -> RunConfig {
        let mut cfg = cfg.clone();
        if self == Scale::Full {
            return cfg;
        }
        match &mut cfg.experiment {
            Experiment::Convergence { finest_cells } => {
                *finest_cells = (*finest_cells).min(DESK_FINEST_CELLS.max(2 * cfg.mesh.cells));
            }
            Experiment::Localization { family, max_power } => {
                let cells = cfg.mesh.cells.min(DESK_LOCALIZATION_CELLS);
                *max_power = (*max_power).min(DESK_LOCALIZATION_MAX_POWER);
                cfg.mesh.cells = cells;
                let widest = (1u64 << *max_power) as f64 / cells as f64;
                cfg.model.kernels = crate::model::KernelAssignment::uniform(family.spec(widest));
            }
            Experiment::Segregation { .. } | Experiment::Single => {}
        }
        cfg
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct ManifestFile {
    artifacts: BTreeSet<String>,
}

/// Output directory that records every file it creates in `manifest.json`.
#[derive(Debug)]
pub struct OutputDir {
    dir: PathBuf,
    created: Vec<String>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            created: Vec::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn file(&mut self, name: &str) -> Result<BufWriter<File>> {
        let f = File::create(self.dir.join(name))?;
        self.created.push(name.to_string());
        Ok(BufWriter::new(f))
    }

    pub fn created(&self) -> &[String] {
        &self.created
    }

    /// Merges the files created so far into the manifest.
    pub fn write_manifest(&self) -> Result<PathBuf> {
        let path = self.dir.join(MANIFEST);
        let mut manifest: ManifestFile = match std::fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text).unwrap_or_default(),
            Err(_) => ManifestFile::default(),
        };
        manifest.artifacts.extend(self.created.iter().cloned());
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
        Ok(path)
    }
}

/// Wraps a failure with the study level it came from.
pub(crate) fn at(context: impl Into<String>) -> impl FnOnce(Error) -> Error {
    let context = context.into();
    move |e| Error::Study {
        context,
        source: Box::new(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_scale_caps_studies() {
        let c = Scale::Desk.adapt(&registry::preset("14").unwrap());
        assert_eq!(c.experiment, Experiment::Convergence { finest_cells: 512 });
        let p = Scale::Full.adapt(&registry::preset("14").unwrap());
        assert_eq!(p.experiment, Experiment::Convergence { finest_cells: 2048 });
        let l = Scale::Desk.adapt(&registry::preset("NLTL3").unwrap());
        assert_eq!(l.mesh.cells, 256);
        assert_eq!(
            l.model.kernels.default,
            Some(crate::kernel::KernelSpec::normalized_indicator(0.125))
        );
        l.validate().unwrap();
        assert!("huge".parse::<Scale>().is_err());
    }

    #[test]
    fn manifest_accumulates() {
        let tmp = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(tmp.path()).unwrap();
        drop(out.file("a.csv").unwrap());
        out.write_manifest().unwrap();
        let mut again = OutputDir::create(tmp.path()).unwrap();
        drop(again.file("b.csv").unwrap());
        again.write_manifest().unwrap();
        let text = std::fs::read_to_string(tmp.path().join(MANIFEST)).unwrap();
        assert!(text.contains("a.csv") && text.contains("b.csv"));
    }
}
