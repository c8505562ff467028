//! Experiment configuration: a single JSON file with documented defaults.

use std::path::PathBuf;
use std::sync::Arc;

use serde::Deserialize;

use nlhodge::catalog::CatalogField;
use nlhodge::{BallQuadrature, CubicalComplex, DensityModel, SolverConfig};

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub domain: DomainConfig,
    #[serde(default)]
    pub density: DensityConfig,
    #[serde(default)]
    pub problem: ProblemConfig,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub refine: RefineConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config is valid")
    }
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    #[serde(default = "default_dim")]
    pub n: usize,
    /// Per-axis [lo, hi]; a single pair is broadcast to all axes.
    #[serde(default = "default_extents")]
    pub extents: Vec<[f64; 2]>,
    /// Per-axis cell counts; a single value is broadcast.
    #[serde(default = "default_resolution")]
    pub resolution: Vec<usize>,
}

fn default_dim() -> usize {
    3
}
fn default_extents() -> Vec<[f64; 2]> {
    vec![[-1.2, 1.2]]
}
fn default_resolution() -> Vec<usize> {
    vec![32]
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self {
            n: default_dim(),
            extents: default_extents(),
            resolution: default_resolution(),
        }
    }
}

impl DomainConfig {
    pub fn build(&self) -> Result<Arc<CubicalComplex<f64>>, CliError> {
        let n = self.n;
        let extents: Vec<(f64, f64)> = if self.extents.len() == 1 {
            vec![(self.extents[0][0], self.extents[0][1]); n]
        } else if self.extents.len() == n {
            self.extents.iter().map(|e| (e[0], e[1])).collect()
        } else {
            return Err(CliError::Config(format!(
                "domain.extents must have 1 or {n} entries"
            )));
        };
        let resolution: Vec<usize> = if self.resolution.len() == 1 {
            vec![self.resolution[0]; n]
        } else if self.resolution.len() == n {
            self.resolution.clone()
        } else {
            return Err(CliError::Config(format!(
                "domain.resolution must have 1 or {n} entries"
            )));
        };
        Ok(Arc::new(CubicalComplex::new(&extents, &resolution)?))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    #[serde(default = "default_density_kind")]
    pub kind: String,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

fn default_density_kind() -> String {
    "constant".into()
}
fn default_gamma() -> f64 {
    1.4
}

impl Default for DensityConfig {
    fn default() -> Self {
        Self {
            kind: default_density_kind(),
            gamma: default_gamma(),
        }
    }
}

impl DensityConfig {
    pub fn build(&self) -> Result<DensityModel<f64>, CliError> {
        match self.kind.as_str() {
            "constant" => Ok(DensityModel::constant()),
            "born_infeld" => Ok(DensityModel::born_infeld()),
            "polytropic" => Ok(DensityModel::polytropic(self.gamma)?),
            other => Err(CliError::Config(format!(
                "density.kind must be one of constant, polytropic, born_infeld; got \"{other}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default = "default_degree")]
    pub q: usize,
    /// Catalog name for the boundary/cohomology data.
    #[serde(default = "default_boundary")]
    pub boundary: String,
    #[serde(default = "default_scale")]
    pub scale: f64,
    /// Exponent for the radial-power catalog entry.
    #[serde(default = "default_beta")]
    pub beta: f64,
}

fn default_degree() -> usize {
    1
}
fn default_boundary() -> String {
    "harmonic-quadratic".into()
}
fn default_scale() -> f64 {
    0.2
}
fn default_beta() -> f64 {
    -0.25
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            q: default_degree(),
            boundary: default_boundary(),
            scale: default_scale(),
            beta: default_beta(),
        }
    }
}

impl ProblemConfig {
    pub fn catalog_field(&self) -> Result<CatalogField, CliError> {
        Ok(self.boundary.parse()?)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_damping")]
    pub damping: f64,
    #[serde(default = "default_q_margin")]
    pub q_margin: f64,
}

fn default_max_iter() -> usize {
    60
}
fn default_tol() -> f64 {
    1e-10
}
fn default_damping() -> f64 {
    1.0
}
fn default_q_margin() -> f64 {
    0.98
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            max_iter: default_max_iter(),
            tol: default_tol(),
            damping: default_damping(),
            q_margin: default_q_margin(),
        }
    }
}

impl SolverSection {
    pub fn build(&self) -> SolverConfig<f64> {
        SolverConfig {
            max_iter: self.max_iter,
            tol: self.tol,
            damping: self.damping,
            q_margin: self.q_margin,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Checks to run: monotonicity, identity, liouville, cutoff.
    #[serde(default = "default_checks")]
    pub checks: Vec<String>,
    /// Analytic field to verify (defaults to problem.boundary); ignored
    /// when `snapshot` is set.
    #[serde(default)]
    pub field: Option<String>,
    /// Path to a field snapshot to verify instead of a catalog field.
    #[serde(default)]
    pub snapshot: Option<PathBuf>,
    #[serde(default = "default_center")]
    pub center: Vec<f64>,
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    /// Relative slack for the monotonicity check.
    #[serde(default = "default_slack")]
    pub slack: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Residual threshold for the identity check.
    #[serde(default = "default_identity_tol")]
    pub identity_tol: f64,
    /// Growth exponent hypothesis for the Liouville check.
    #[serde(default)]
    pub growth_k: f64,
    #[serde(default = "default_q_tol")]
    pub q_tol: f64,
    /// Ramp radii for the point-cutoff check.
    #[serde(default = "default_sigmas")]
    pub sigmas: Vec<f64>,
    /// Capacity sequence indices for the log-profile cutoff.
    #[serde(default = "default_nus")]
    pub nus: Vec<u32>,
    #[serde(default = "default_r_out")]
    pub r_out: f64,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    /// Ball quadrature: "cell-center" or "corner-subsample".
    #[serde(default = "default_quadrature")]
    pub quadrature: String,
}

fn default_checks() -> Vec<String> {
    vec!["monotonicity".into()]
}
fn default_center() -> Vec<f64> {
    vec![0.0, 0.0, 0.0]
}
fn default_radii() -> Vec<f64> {
    (4..=9).map(|i| 0.1 * i as f64).collect()
}
fn default_slack() -> f64 {
    0.02
}
fn default_tau() -> f64 {
    0.4
}
fn default_delta() -> f64 {
    0.3
}
fn default_identity_tol() -> f64 {
    0.01
}
fn default_q_tol() -> f64 {
    1e-10
}
fn default_sigmas() -> Vec<f64> {
    vec![0.2, 0.1, 0.05]
}
fn default_nus() -> Vec<u32> {
    vec![1, 2, 3]
}
fn default_r_out() -> f64 {
    0.4
}
fn default_ratio() -> f64 {
    2.0
}
fn default_quadrature() -> String {
    "corner-subsample".into()
}

impl Default for VerifyConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty verify section is valid")
    }
}

impl VerifyConfig {
    pub fn quadrature(&self) -> Result<BallQuadrature, CliError> {
        match self.quadrature.as_str() {
            "cell-center" => Ok(BallQuadrature::CellCenter),
            "corner-subsample" => Ok(BallQuadrature::CornerSubsample),
            other => Err(CliError::Config(format!(
                "verify.quadrature must be cell-center or corner-subsample, got \"{other}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefineConfig {
    /// One of: dd, bianchi, identity, gauge-consistency, exp-gauge.
    #[serde(default = "default_refine_check")]
    pub check: String,
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// Abort when a refined grid would exceed this many top cells.
    #[serde(default = "default_max_cells")]
    pub max_cells: usize,
}

fn default_refine_check() -> String {
    "bianchi".into()
}
fn default_levels() -> usize {
    3
}
fn default_max_cells() -> usize {
    1 << 27
}

impl Default for RefineConfig {
    fn default() -> Self {
        Self {
            check: default_refine_check(),
            levels: default_levels(),
            max_cells: default_max_cells(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: Option<&PathBuf>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::Io(format!("cannot read config {}: {e}", p.display()))
                })?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("config parse error: {e}")))
            }
        }
    }
}
