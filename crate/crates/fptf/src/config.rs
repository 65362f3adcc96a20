//! JSON run configuration.

use std::path::{Path, PathBuf};

use fptf_core::design::{DesignMode, DesignOptions};
use fptf_core::field::{CoreGrid, GridSpec};
use fptf_core::{Complex64, ConformalMap, LayeredStructure, Loading};
use serde::Deserialize;

use crate::error::CliError;

pub const DEFAULT_TRUNCATION: usize = 50;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub map: MapConfig,
    pub sigma0: f64,
    #[serde(default)]
    pub layers: Vec<LayerConfig>,
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    #[serde(default)]
    pub loading: Option<LoadingConfig>,
    #[serde(default)]
    pub field: Option<FieldConfig>,
    #[serde(default)]
    pub design: Option<DesignConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_truncation() -> usize {
    DEFAULT_TRUNCATION
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub r0: f64,
    #[serde(default)]
    pub a0: [f64; 2],
    #[serde(default)]
    pub a: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    pub r: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LoadingConfig {
    Faber {
        alpha: Vec<[f64; 2]>,
        #[serde(default)]
        beta: Vec<[f64; 2]>,
    },
    UniformX2,
    HyperbolicX1x2,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    #[serde(default)]
    pub rho_min: Option<f64>,
    #[serde(default)]
    pub rho_max: Option<f64>,
    #[serde(default = "default_rho_count")]
    pub rho_count: usize,
    #[serde(default = "default_theta_count")]
    pub theta_count: usize,
    #[serde(default)]
    pub core: Option<CoreConfig>,
}

fn default_rho_count() -> usize {
    40
}

fn default_theta_count() -> usize {
    128
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoreConfig {
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Vanish,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Newton,
    Grid,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    #[serde(rename = "M")]
    pub order: usize,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default)]
    pub method: Option<Method>,
    #[serde(default)]
    pub init: Option<Vec<f64>>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub grid: GridConfig,
}

fn default_mode() -> Mode {
    Mode::Vanish
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub damping: Option<f64>,
    pub max_iterations: Option<usize>,
    pub fd_step: Option<f64>,
    pub tolerance: Option<f64>,
    pub step_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub resolution: Option<usize>,
    pub polish: Option<bool>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|msg| CliError::Config(format!("{}: {msg}", path.display())))
    }

    /// Parses and reports failures with the offending field path and position.
    pub fn parse(text: &str) -> Result<Self, String> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Config = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            if field.is_empty() || field == "." {
                inner.to_string()
            } else {
                format!("field `{field}`: {inner}")
            }
        })?;
        if cfg.truncation == 0 {
            return Err("field `truncation`: must be at least 1".into());
        }
        Ok(cfg)
    }

    pub fn build_map(&self) -> fptf_core::Result<ConformalMap> {
        let a = self.map.a.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        let a0 = Complex64::new(self.map.a0[0], self.map.a0[1]);
        ConformalMap::new(self.map.r0, a0, a)
    }

    pub fn build_structure(&self) -> fptf_core::Result<LayeredStructure> {
        let radii = self.layers.iter().map(|l| l.r).collect();
        let sigmas = std::iter::once(self.sigma0).chain(self.layers.iter().map(|l| l.sigma)).collect();
        LayeredStructure::new(self.build_map()?, radii, sigmas)
    }

    pub fn map(&self) -> Result<ConformalMap, CliError> {
        self.build_map().map_err(|e| CliError::Config(format!("field `map`: {e}")))
    }

    pub fn structure(&self) -> Result<LayeredStructure, CliError> {
        let map = self.map()?;
        let radii = self.layers.iter().map(|l| l.r).collect();
        let sigmas = std::iter::once(self.sigma0).chain(self.layers.iter().map(|l| l.sigma)).collect();
        LayeredStructure::new(map, radii, sigmas).map_err(|e| CliError::Config(format!("field `layers`: {e}")))
    }

    /// The configured loading, `x_2` when none is given.
    pub fn loading(&self, map: &ConformalMap) -> Result<Loading, CliError> {
        let wrap = |e: fptf_core::Error| CliError::Config(format!("field `loading`: {e}"));
        match &self.loading {
            None | Some(LoadingConfig::UniformX2) => Loading::uniform_x2(map).map_err(wrap),
            Some(LoadingConfig::HyperbolicX1x2) => Loading::hyperbolic_x1x2(map).map_err(wrap),
            Some(LoadingConfig::Faber { alpha, beta }) => {
                let conv = |v: &[[f64; 2]]| v.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
                Loading::faber(conv(alpha), conv(beta)).map_err(wrap)
            }
        }
    }

    /// Sampling plan; defaults cover the core boundary out to one unit of
    /// `ρ` beyond the outermost interface.
    pub fn grid(&self, s: &LayeredStructure) -> GridSpec {
        let f = self.field.unwrap_or(FieldConfig {
            rho_min: None,
            rho_max: None,
            rho_count: default_rho_count(),
            theta_count: default_theta_count(),
            core: None,
        });
        let rho_min = f.rho_min.unwrap_or(s.map().rho0());
        GridSpec {
            rho_min,
            rho_max: f.rho_max.unwrap_or(s.outer_radius().ln() + 1.0),
            rho_count: f.rho_count,
            theta_count: f.theta_count,
            core: f.core.map(|c| CoreGrid { nx: c.nx, ny: c.ny }),
        }
    }

    pub fn design(&self) -> Result<&DesignConfig, CliError> {
        self.design
            .as_ref()
            .ok_or_else(|| CliError::Config("field `design`: required by the design command".into()))
    }
}

impl DesignConfig {
    pub fn options(&self) -> DesignOptions {
        let d = DesignOptions::default();
        DesignOptions {
            mode: match self.mode {
                Mode::Vanish => DesignMode::Vanish,
                Mode::Minimize => DesignMode::Minimize,
            },
            damping: self.solver.damping.unwrap_or(d.damping),
            max_iterations: self.solver.max_iterations.unwrap_or(d.max_iterations),
            fd_step: self.solver.fd_step.unwrap_or(d.fd_step),
            tolerance: self.solver.tolerance.unwrap_or(d.tolerance),
            step_tolerance: self.solver.step_tolerance.unwrap_or(d.step_tolerance),
            grid_lo: self.grid.lo.unwrap_or(d.grid_lo),
            grid_hi: self.grid.hi.unwrap_or(d.grid_hi),
            grid_resolution: self.grid.resolution.unwrap_or(d.grid_resolution),
            polish: self.grid.polish.unwrap_or(d.polish),
            ..d
        }
    }

    /// Newton for pure ellipses, grid search otherwise.
    pub fn method_for(&self, map: &ConformalMap) -> Method {
        self.method.unwrap_or(if map.is_elliptic() { Method::Newton } else { Method::Grid })
    }
}
