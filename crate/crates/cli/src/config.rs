//! Run configuration: one JSON document drives every subcommand. The
//! manifest emitted next to the outputs echoes the fully resolved form, so a
//! run is reproducible from its manifest alone.

use serde::{Deserialize, Serialize};

use seqtest::error::{Error, Result};
use seqtest::fbp::Grid2D;
use seqtest::model::{ModelSpec, RunningCostSpec};
use seqtest::simulate::McSettings;
use seqtest::{Model, RunningCost, Scalar};

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_schema")]
    pub schema_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    /// Initial state for simulation-driven commands.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lfd: Option<LfdConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csnr: Option<CsnrConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateConfig>,
}

fn default_schema() -> String {
    SCHEMA_VERSION.to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_lo: f64,
    pub x_hi: f64,
    pub nx: usize,
    pub logphi_lo: f64,
    pub logphi_hi: f64,
    pub nu: usize,
    /// Log-spaced state axis; defaults to true on positive domains.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_x: Option<bool>,
}

impl GridConfig {
    pub fn build(&self, model: &Model) -> Result<Grid2D<Scalar>> {
        let log_x = self.log_x.unwrap_or(self.x_lo > 0.0);
        Grid2D::regular(
            self.x_lo,
            self.x_hi,
            self.nx,
            self.logphi_lo,
            self.logphi_hi,
            self.nu,
            log_x,
        )
        .and_then(|g| {
            for &x in &g.x_nodes {
                model.check_interior(x)?;
            }
            Ok(g)
        })
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub n_paths: usize,
    pub n_batches: usize,
    pub dt: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_paths: 200_000,
            n_batches: 20,
            dt: 1e-4,
            horizon: None,
            seed: 42,
        }
    }
}

impl McConfig {
    pub fn settings(&self) -> McSettings {
        McSettings {
            n_paths: self.n_paths,
            n_batches: self.n_batches,
            dt: self.dt,
            horizon: self.horizon,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contact_tol: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LfdConfig {
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_lfd_tol")]
    pub tol: f64,
    /// Priors scanned by the saddle verification.
    #[serde(default = "default_psi_grid")]
    pub psi_grid: Vec<f64>,
    /// Where the stopping boundaries come from.
    #[serde(default)]
    pub boundaries: BoundarySource,
    /// Optional externally imposed search bracket; must sit inside the
    /// boundary bracket at x0.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket_override: Option<(f64, f64)>,
}

fn default_grid_points() -> usize {
    17
}

fn default_lfd_tol() -> f64 {
    1e-3
}

fn default_psi_grid() -> Vec<f64> {
    vec![0.25, 0.5, 0.8, 1.25, 2.0, 4.0]
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BoundarySource {
    /// Solve the variational inequality on `grid` first.
    #[default]
    Solve,
    /// Use the constant-SNR band from the `csnr` section.
    Csnr,
    /// Load a boundaries.csv produced by an earlier run.
    Csv { path: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsnrConfig {
    pub rho0: f64,
    pub f: RunningCostSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi_curve: Option<PsiCurve>,
    /// Use the reduced symmetric system (requires a symmetric cost).
    #[serde(default)]
    pub symmetric_shortcut: bool,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiCurve {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub psi: f64,
    pub rule: RuleSpec,
    /// Dump the first n sample paths as CSV files.
    #[serde(default)]
    pub dump_paths: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RuleSpec {
    /// Stop at time zero.
    Immediate,
    /// Constant band on the weighted likelihood.
    Bands { l0: f64, l1: f64 },
    /// Band solved from the `csnr` section.
    Csnr,
    /// Boundary curves from a CSV file with header x,l0,l1.
    BoundariesCsv { path: String },
}

impl RunConfig {
    pub fn from_json(doc: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(doc).map_err(|e| Error::Config(format!("config: {e}")))?;
        let major = cfg.schema_version.split('.').next().unwrap_or("");
        if major != "1" {
            return Err(Error::Config(format!(
                "unsupported schema_version '{}' (expected major 1)",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let doc = std::fs::read_to_string(path)?;
        Self::from_json(&doc)
    }

    pub fn require_model(&self) -> Result<Model> {
        self.model
            .as_ref()
            .ok_or_else(|| Error::Config("missing 'model' section".into()))?
            .build()
    }

    pub fn require_x0(&self) -> Result<f64> {
        self.x0
            .ok_or_else(|| Error::Config("missing 'x0' field".into()))
    }

    pub fn require_grid(&self, model: &Model) -> Result<Grid2D<Scalar>> {
        self.grid
            .as_ref()
            .ok_or_else(|| Error::Config("missing 'grid' section".into()))?
            .build(model)
    }

    pub fn require_csnr(&self) -> Result<&CsnrConfig> {
        self.csnr
            .as_ref()
            .ok_or_else(|| Error::Config("missing 'csnr' section".into()))
    }
}

pub fn build_running_cost(spec: &RunningCostSpec) -> Result<RunningCost> {
    match spec {
        RunningCostSpec::Constant { c } => RunningCost::constant(*c),
        RunningCostSpec::Expr { expr, symmetric } => RunningCost::from_expr(expr, *symmetric),
    }
}
