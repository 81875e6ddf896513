//! JSON run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use hdbool_core::simulate::McQuantity;
use hdbool_core::{LogMgf, McConfig, ModelSpec, QuadratureConfig, RadiusLawSpec, RhoRule};
use serde::Deserialize;

use crate::error::CliError;

/// Top-level document. Each subcommand reads `model` (when it needs one),
/// the optional `quadrature` block and its own block.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<ModelConfig>,
    pub quadrature: Option<QuadratureBlock>,
    pub thresholds: Option<ThresholdsBlock>,
    pub scan: Option<ScanBlock>,
    pub mc: Option<McBlock>,
    pub branching: Option<BranchingBlock>,
    pub gaussian_report: Option<GaussianReportBlock>,
    #[serde(skip)]
    base_dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub rho: f64,
    #[serde(default)]
    pub rho_n: RhoNConfig,
    pub radius_law: RadiusLawConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum RhoNConfig {
    #[default]
    Constant,
    PowerCorrection {
        coefficient: f64,
        exponent: f64,
    },
    Empty,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadiusLawConfig {
    Deterministic {
        rstar: f64,
    },
    GaussianGrain {
        sigma: f64,
    },
    /// Rate function as the Legendre transform of a named log-MGF family.
    LogMgf {
        family: String,
        mean: Option<f64>,
        variance: Option<f64>,
        shape: Option<f64>,
        scale: Option<f64>,
        sigma: Option<f64>,
        r0: Option<f64>,
    },
    /// Convex table of `(R, I(R))` knots, inline or as a two-column CSV file.
    Tabulated {
        knots: Option<Vec<(f64, f64)>>,
        path: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureBlock {
    pub rel_tol: Option<f64>,
    pub truncation_nats: Option<f64>,
    pub max_subdivisions: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdsBlock {}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanBlock {
    pub n_list: Vec<u32>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuantityConfig {
    Coverage,
    PalmDegree,
    ConditionalPoissonDegree,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McBlock {
    pub n: u32,
    pub quantity: QuantityConfig,
    pub samples: u64,
    #[serde(default)]
    pub seed: u64,
    pub truncation_multiplier: Option<f64>,
    pub max_expected_points: Option<f64>,
    pub support_nats: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchingBlock {
    pub n_list: Vec<u32>,
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianReportBlock {
    #[serde(default = "one")]
    pub sigma: f64,
}

fn one() -> f64 {
    1.0
}

impl RunConfig {
    /// Reads and parses a config file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// Parses a config document; relative table paths resolve against the working directory.
    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// The model, which must be present.
    pub fn model_spec(&self) -> Result<ModelSpec, CliError> {
        let m = self
            .model
            .as_ref()
            .ok_or_else(|| CliError::Config("missing \"model\" block".into()))?;
        let rho_n_rule = match m.rho_n {
            RhoNConfig::Constant => RhoRule::Constant,
            RhoNConfig::PowerCorrection { coefficient, exponent } => RhoRule::PowerCorrection { coefficient, exponent },
            RhoNConfig::Empty => RhoRule::Empty,
        };
        let spec = ModelSpec {
            rho: m.rho,
            rho_n_rule,
            radius_law: self.radius_law(&m.radius_law)?,
        };
        spec.validate()?;
        hdbool_core::rate_fn::build_rate(&spec.radius_law)?;
        Ok(spec)
    }

    fn radius_law(&self, law: &RadiusLawConfig) -> Result<RadiusLawSpec, CliError> {
        Ok(match law {
            RadiusLawConfig::Deterministic { rstar } => RadiusLawSpec::Deterministic { rstar: *rstar },
            RadiusLawConfig::GaussianGrain { sigma } => RadiusLawSpec::GaussianGrain { sigma: *sigma },
            RadiusLawConfig::LogMgf {
                family,
                mean,
                variance,
                shape,
                scale,
                sigma,
                r0,
            } => {
                let need = |name: &str, v: &Option<f64>| {
                    v.ok_or_else(|| CliError::Config(format!("log_mgf family \"{family}\" needs \"{name}\"")))
                };
                let lambda = match family.as_str() {
                    "normal" => LogMgf::normal(need("mean", mean)?, need("variance", variance)?),
                    "gamma" => LogMgf::gamma(need("shape", shape)?, need("scale", scale)?),
                    "gaussian_grain" => LogMgf::gaussian_grain(need("sigma", sigma)?),
                    "linear" => LogMgf::linear(need("r0", r0)?),
                    other => {
                        return Err(CliError::Config(format!(
                            "unknown log_mgf family \"{other}\" (expected normal, gamma, gaussian_grain or linear)"
                        )))
                    }
                };
                RadiusLawSpec::FromLogMgf(lambda)
            }
            RadiusLawConfig::Tabulated { knots, path } => match (knots, path) {
                (Some(k), None) => RadiusLawSpec::TabulatedConvex { knots: k.clone() },
                (None, Some(p)) => RadiusLawSpec::TabulatedConvex {
                    knots: read_table(&self.base_dir.join(p))?,
                },
                _ => {
                    return Err(CliError::Config(
                        "tabulated law needs exactly one of \"knots\" and \"path\"".into(),
                    ))
                }
            },
        })
    }

    /// Quadrature settings with defaults filled in.
    pub fn quadrature(&self) -> Result<QuadratureConfig, CliError> {
        let d = QuadratureConfig::default();
        let b = self.quadrature.unwrap_or_default();
        let q = QuadratureConfig {
            rel_tol: b.rel_tol.unwrap_or(d.rel_tol),
            truncation_nats: b.truncation_nats.unwrap_or(d.truncation_nats),
            max_subdivisions: b.max_subdivisions.unwrap_or(d.max_subdivisions),
        };
        q.validate()?;
        Ok(q)
    }

    /// Scan dimensions.
    pub fn scan_n_list(&self) -> Result<Vec<u32>, CliError> {
        let b = self
            .scan
            .as_ref()
            .ok_or_else(|| CliError::Config("missing \"scan\" block".into()))?;
        hdbool_core::finite_n::validate_n_list(&b.n_list)?;
        Ok(b.n_list.clone())
    }

    /// Dimension, quantity and settings of the simulation; `seed` overrides the file.
    pub fn mc(&self, seed: Option<u64>) -> Result<(u32, McQuantity, McConfig), CliError> {
        let b = self
            .mc
            .as_ref()
            .ok_or_else(|| CliError::Config("missing \"mc\" block".into()))?;
        if b.n == 0 {
            return Err(CliError::Config("mc.n must be >= 1".into()));
        }
        let d = McConfig::default();
        let cfg = McConfig {
            samples: b.samples,
            seed: seed.unwrap_or(b.seed),
            truncation_multiplier: b.truncation_multiplier.unwrap_or(d.truncation_multiplier),
            max_expected_points: b.max_expected_points.unwrap_or(d.max_expected_points),
            support_nats: b.support_nats.unwrap_or(d.support_nats),
        };
        cfg.validate()?;
        let quantity = match b.quantity {
            QuantityConfig::Coverage => McQuantity::Coverage,
            QuantityConfig::PalmDegree => McQuantity::PalmDegree,
            QuantityConfig::ConditionalPoissonDegree => McQuantity::ConditionalPoissonDegree,
        };
        Ok((b.n, quantity, cfg))
    }

    /// Branching dimensions and optional slack.
    pub fn branching(&self) -> Result<(Vec<u32>, Option<f64>), CliError> {
        let b = self
            .branching
            .as_ref()
            .ok_or_else(|| CliError::Config("missing \"branching\" block".into()))?;
        hdbool_core::finite_n::validate_n_list(&b.n_list)?;
        Ok((b.n_list.clone(), b.gamma))
    }

    /// Grain scale for the Gaussian report (1 when the block is absent).
    pub fn gaussian_sigma(&self) -> f64 {
        self.gaussian_report.map_or(1.0, |b| b.sigma)
    }
}

#[derive(Debug, Deserialize)]
struct KnotRow {
    r: f64,
    rate: f64,
}

/// Reads a convex table from CSV with header `r,rate`.
pub fn read_table(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    rdr.deserialize::<KnotRow>()
        .map(|row| {
            row.map(|k| (k.r, k.rate))
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
        })
        .collect()
}
