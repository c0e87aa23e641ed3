//! Model parameters, the detailed-balance and positive-definiteness checks,
//! and the per-offset pair matrices
//!
//! ```text
//! M^{ij}(b) = [ pi_i a_ii              (n-1) pi_i a_ij b ]
//!             [ (n-1) pi_j a_ji b      pi_j a_jj         ]     i < j
//! ```
//!
//! evaluated at every cell-averaged kernel weight `b = B^{ij}_m`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Mesh;
use crate::kernel::{cell_average, DiscreteKernel, KernelSpec};
use crate::mobility::MobilityRule;

/// Relative tolerance for `pi_i a_ij = pi_j a_ji`.
pub const DETAILED_BALANCE_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisMode {
    /// Violations of detailed balance or positive definiteness are errors.
    #[default]
    Strict,
    /// Violations are recorded and the run proceeds.
    Warn,
}

/// Kernel for one ordered species pair (0-based indices).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairKernel {
    pub i: usize,
    pub j: usize,
    pub kernel: KernelSpec,
}

/// Which kernel couples each ordered pair `(i, j)`, `i != j`.
///
/// Lookup order: an explicit `(i, j)` entry; the mirror of an explicit
/// `(j, i)` entry (`B^{ij}(x) = B^{ji}(-x)`); the default.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelAssignment {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<KernelSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<PairKernel>,
}

impl KernelAssignment {
    pub fn uniform(spec: KernelSpec) -> Self {
        Self {
            default: Some(spec),
            pairs: Vec::new(),
        }
    }

    fn explicit(&self, i: usize, j: usize) -> Option<&KernelSpec> {
        self.pairs
            .iter()
            .find(|p| p.i == i && p.j == j)
            .map(|p| &p.kernel)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Number of species.
    pub n: usize,
    /// Interaction matrix `a_ij`, row-major `n x n`.
    pub a: Vec<Vec<f64>>,
    /// Detailed-balance weights `pi_i > 0`.
    pub pi: Vec<f64>,
    /// Self-diffusion `sigma >= 0`.
    pub sigma: f64,
    pub kernels: KernelAssignment,
    #[serde(default)]
    pub mobility: MobilityRule,
    #[serde(default)]
    pub hypothesis_mode: HypothesisMode,
}

/// 2x2 matrix for a species pair at one kernel weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairMatrix(pub [[f64; 2]; 2]);

impl PairMatrix {
    pub fn is_symmetric(&self) -> bool {
        self.0[0][1] == self.0[1][0]
    }

    /// `z^T M z`.
    pub fn quadratic_form(&self, z: [f64; 2]) -> f64 {
        let m = &self.0;
        m[0][0] * z[0] * z[0] + (m[0][1] + m[1][0]) * z[0] * z[1] + m[1][1] * z[1] * z[1]
    }

    /// Smallest eigenvalue of the symmetric part, in closed form.
    pub fn min_eigenvalue(&self) -> f64 {
        let p = self.0[0][0];
        let r = self.0[1][1];
        let q = 0.5 * (self.0[0][1] + self.0[1][0]);
        let mean = 0.5 * (p + r);
        let rad = (0.25 * (p - r) * (p - r) + q * q).sqrt();
        let lmax = mean + rad;
        let det = p * r - q * q;
        if lmax > 0.0 {
            // avoids cancellation in mean - rad
            det / lmax
        } else {
            mean - rad
        }
    }
}

/// Outcome of the hypothesis checks.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub detailed_balance_defect: f64,
    pub detailed_balance_ok: bool,
    /// `None` when some cross kernel is a Dirac mass (no offset family).
    pub coercivity: Option<f64>,
    pub kernels_symmetric: bool,
    pub warnings: Vec<String>,
}

impl HypothesisReport {
    pub fn h3_ok(&self) -> bool {
        self.detailed_balance_ok && self.coercivity.is_none_or(|c| c > 0.0)
    }
}

impl ModelParams {
    pub fn species(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    /// Shape and sign checks independent of the mesh.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n == 0 {
            return bad("species count must be at least 1".into());
        }
        if self.a.len() != self.n || self.a.iter().any(|row| row.len() != self.n) {
            return bad(format!("interaction matrix must be {0} x {0}", self.n));
        }
        if self.a.iter().flatten().any(|x| !x.is_finite()) {
            return bad("interaction matrix has non-finite entries".into());
        }
        if self.pi.len() != self.n {
            return bad(format!(
                "expected {} weights pi, got {}",
                self.n,
                self.pi.len()
            ));
        }
        if let Some(p) = self.pi.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
            return bad(format!("weights pi must be positive, got {p}"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be nonnegative, got {}", self.sigma));
        }
        for p in &self.kernels.pairs {
            if p.i >= self.n || p.j >= self.n || p.i == p.j {
                return bad(format!(
                    "kernel pair ({}, {}) is not a valid cross pair",
                    p.i, p.j
                ));
            }
            p.kernel.validate()?;
        }
        if let Some(d) = &self.kernels.default {
            d.validate()?;
        }
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j && self.kernel_spec(i, j).is_none() {
                    return bad(format!("no kernel for pair ({i}, {j})"));
                }
            }
        }
        if self.hypothesis_mode == HypothesisMode::Strict {
            self.check_detailed_balance()?;
        }
        Ok(())
    }

    /// Kernel spec for `(i, j)` and whether it must be mirrored.
    fn kernel_spec(&self, i: usize, j: usize) -> Option<(&KernelSpec, bool)> {
        if let Some(k) = self.kernels.explicit(i, j) {
            return Some((k, false));
        }
        if let Some(k) = self.kernels.explicit(j, i) {
            return Some((k, true));
        }
        self.kernels.default.as_ref().map(|k| (k, false))
    }

    /// Largest `|pi_i a_ij - pi_j a_ji|` over `i < j`.
    pub fn detailed_balance_defect(&self) -> f64 {
        let mut defect = 0.0_f64;
        for i in 0..self.n {
            for j in i + 1..self.n {
                defect = defect.max((self.pi[i] * self.a[i][j] - self.pi[j] * self.a[j][i]).abs());
            }
        }
        defect
    }

    fn detailed_balance_tolerance(&self) -> f64 {
        let mut scale = 0.0_f64;
        for i in 0..self.n {
            for j in 0..self.n {
                scale = scale.max((self.pi[i] * self.a[i][j]).abs());
            }
        }
        DETAILED_BALANCE_RTOL * scale
    }

    /// Returns the defect; errors in strict mode when it exceeds the
    /// relative tolerance.
    pub fn check_detailed_balance(&self) -> Result<f64> {
        let defect = self.detailed_balance_defect();
        let tolerance = self.detailed_balance_tolerance();
        if defect > tolerance && self.hypothesis_mode == HypothesisMode::Strict {
            return Err(Error::DetailedBalanceViolation { defect, tolerance });
        }
        Ok(defect)
    }

    pub fn assemble_pair_matrix(&self, i: usize, j: usize, b: f64) -> Result<PairMatrix> {
        if i >= j || j >= self.n {
            return Err(Error::InvalidParameter(format!(
                "pair matrix needs i < j < n, got ({i}, {j})"
            )));
        }
        let f = (self.n - 1) as f64;
        Ok(PairMatrix([
            [self.pi[i] * self.a[i][i], f * self.pi[i] * self.a[i][j] * b],
            [f * self.pi[j] * self.a[j][i] * b, self.pi[j] * self.a[j][j]],
        ]))
    }

    /// Discretizes every cross kernel on `mesh`.
    pub fn discretize(&self, mesh: &Mesh) -> Result<PairKernels> {
        self.validate()?;
        let n = self.n;
        let mut table = vec![None; n * n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let (spec, mirrored) = self.kernel_spec(i, j).expect("validated");
                let k = cell_average(spec, mesh)?;
                table[i * n + j] = Some(if mirrored { k.transpose() } else { k });
            }
        }
        Ok(PairKernels {
            n,
            mesh: *mesh,
            table,
        })
    }

    /// `c_M`: smallest eigenvalue of `M^{ij}(B^{ij}_m)` over all pairs `i < j`
    /// and offsets `m`. For a single species this is `pi_1 a_11`. `None`
    /// when a cross kernel is a Dirac mass.
    pub fn coercivity_constant(&self, kernels: &PairKernels) -> Result<Option<f64>> {
        if self.n == 1 {
            return Ok(Some(self.pi[0] * self.a[0][0]));
        }
        let mut c_m = f64::INFINITY;
        for i in 0..self.n {
            for j in i + 1..self.n {
                let k = kernels.get(i, j);
                let Some(weights) = k.weights() else {
                    return Ok(None);
                };
                for &b in weights {
                    c_m = c_m.min(self.assemble_pair_matrix(i, j, b)?.min_eigenvalue());
                }
            }
        }
        Ok(Some(c_m))
    }

    /// Runs all checks; strict mode turns violations into errors.
    pub fn check_hypotheses(&self, kernels: &PairKernels) -> Result<HypothesisReport> {
        let defect = self.detailed_balance_defect();
        let db_ok = defect <= self.detailed_balance_tolerance();
        let coercivity = self.coercivity_constant(kernels)?;
        let mut warnings = Vec::new();
        if !db_ok {
            warnings.push(format!("detailed balance defect {defect:e}"));
        }
        if let Some(c) = coercivity {
            if c <= 0.0 {
                warnings.push(format!("pair matrices not positive definite (c_M = {c:e})"));
            }
        }
        let mut symmetric = true;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j && kernels.get(i, j).transpose() != *kernels.get(j, i) {
                    symmetric = false;
                }
            }
        }
        if !symmetric {
            warnings.push("kernels violate B^{ji}(x) = B^{ij}(-x)".into());
        }
        let report = HypothesisReport {
            detailed_balance_defect: defect,
            detailed_balance_ok: db_ok,
            coercivity,
            kernels_symmetric: symmetric,
            warnings,
        };
        if self.hypothesis_mode == HypothesisMode::Strict {
            if !db_ok {
                return Err(Error::DetailedBalanceViolation {
                    defect,
                    tolerance: self.detailed_balance_tolerance(),
                });
            }
            if let Some(c) = coercivity {
                if c <= 0.0 {
                    return Err(Error::HypothesisH3Violation { c_m: c });
                }
            }
        }
        Ok(report)
    }

    /// Same parameters with every cross kernel replaced by the Dirac mass.
    pub fn localized(&self) -> ModelParams {
        ModelParams {
            kernels: KernelAssignment::uniform(KernelSpec::Dirac),
            ..self.clone()
        }
    }
}

/// Cross kernels discretized on one mesh, indexed by ordered pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairKernels {
    n: usize,
    mesh: Mesh,
    table: Vec<Option<DiscreteKernel>>,
}

impl PairKernels {
    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn species(&self) -> usize {
        self.n
    }

    /// Kernel `B^{ij}`, `i != j`.
    pub fn get(&self, i: usize, j: usize) -> &DiscreteKernel {
        self.table[i * self.n + j]
            .as_ref()
            .expect("no self-kernel is tabulated")
    }

    pub fn all_dirac(&self) -> bool {
        self.table.iter().flatten().all(|k| k.is_dirac())
    }
}
