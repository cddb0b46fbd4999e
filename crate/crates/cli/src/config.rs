//! Run configuration: flags override the config file, which overrides the
//! built-in defaults.

use std::path::{Path, PathBuf};

use ndf_core::bounds::{PaperConstants, DEFAULT_B_D, DEFAULT_C1_MARGIN, DEFAULT_R_D};
use ndf_core::optimizer::ExtendOptions;
use ndf_core::residual::DEFAULT_DESIGN_TOL;
use ndf_core::SphereDim;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_SEED: u64 = 42;
pub const CONFIG_ENV: &str = "NDF_CONFIG";

/// Keys accepted in a TOML config file. All optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub b_d: Option<f64>,
    pub r_d: Option<f64>,
    pub c1_margin: Option<f64>,
    pub tol: Option<f64>,
    pub step_tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub restarts: Option<usize>,
    pub quad_order: Option<usize>,
    pub flow_steps: Option<usize>,
    pub seed: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::usage(format!("bad config {}: {e}", path.display())))
    }
}

/// Values given on the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlagConfig {
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

/// The effective configuration, echoed into every JSON report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub config_file: Option<PathBuf>,
    pub b_d: f64,
    pub r_d: f64,
    pub c1_margin: f64,
    pub tol: f64,
    pub step_tol: f64,
    pub max_iters: usize,
    pub restarts: usize,
    /// `None` means each module picks its own degree-dependent order.
    pub quad_order: Option<usize>,
    pub flow_steps: usize,
    pub seed: u64,
}

impl RunConfig {
    /// `explicit` comes from `--config`; without it `NDF_CONFIG` is consulted.
    pub fn resolve(explicit: Option<&Path>, flags: &FlagConfig) -> Result<Self, CliError> {
        let path = explicit.map(Path::to_path_buf).or_else(|| {
            std::env::var_os(CONFIG_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
        });
        let file = path
            .as_deref()
            .map(FileConfig::load)
            .transpose()?
            .unwrap_or_default();
        Self::merge(path, &file, flags)
    }

    pub fn merge(
        config_file: Option<PathBuf>,
        file: &FileConfig,
        flags: &FlagConfig,
    ) -> Result<Self, CliError> {
        let opt = ExtendOptions::default();
        let cfg = RunConfig {
            config_file,
            b_d: file.b_d.unwrap_or(DEFAULT_B_D),
            r_d: file.r_d.unwrap_or(DEFAULT_R_D),
            c1_margin: file.c1_margin.unwrap_or(DEFAULT_C1_MARGIN),
            tol: flags.tol.or(file.tol).unwrap_or(DEFAULT_DESIGN_TOL),
            step_tol: file.step_tol.unwrap_or(opt.step_tol),
            max_iters: file.max_iters.unwrap_or(opt.max_iters),
            restarts: file.restarts.unwrap_or(opt.restarts),
            quad_order: file.quad_order,
            flow_steps: file.flow_steps.unwrap_or(ndf_core::flow::DEFAULT_STEPS),
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let pos = [
            ("b_d", self.b_d),
            ("r_d", self.r_d),
            ("c1_margin", self.c1_margin),
            ("tol", self.tol),
            ("step_tol", self.step_tol),
        ];
        for (name, v) in pos {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::usage(format!("{name} must be positive, got {v}")));
            }
        }
        let counts = [
            ("max_iters", self.max_iters),
            ("restarts", self.restarts),
            ("flow_steps", self.flow_steps),
            ("quad_order", self.quad_order.unwrap_or(1)),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(CliError::usage(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    pub fn constants(&self, dim: SphereDim) -> Result<PaperConstants, CliError> {
        Ok(PaperConstants::new(
            dim,
            self.b_d,
            self.r_d,
            self.c1_margin,
            None,
        )?)
    }

    pub fn extend_options(&self) -> ExtendOptions {
        ExtendOptions {
            max_iters: self.max_iters,
            step_tol: self.step_tol,
            residual_tol: self.tol,
            restarts: self.restarts,
            seed: self.seed,
            ..ExtendOptions::default()
        }
    }
}
