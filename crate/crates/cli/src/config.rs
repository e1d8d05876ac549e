//! Experiment configuration: defaults, optional JSON file, command-line
//! overrides, in that order of precedence (last wins).

use std::fmt;
use std::path::{Path, PathBuf};

use qps_core::CircuitParams;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Optimize,
    MeanPsf,
    Distributions,
    LatitudeSweep,
    ConcurrenceScan,
    Verify,
    Witness,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("unit enum serializes");
        f.write_str(s.as_str().expect("string tag"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub seed: u64,
    pub n_samples: u64,
    pub quad_order: usize,
    pub eps_phase: f64,
    pub params: Option<CircuitParams>,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    /// Rayon worker count; results do not depend on it.
    pub workers: Option<usize>,
    pub restarts: usize,
    pub minimize: bool,
    pub max_iter: usize,
    pub grad_tol: f64,
    pub step0: f64,
    pub bins_phase: usize,
    pub bins_psf: usize,
    pub raw: bool,
    pub theta_points: usize,
    pub dphi_points: usize,
    pub r1: f64,
    pub r2: f64,
    pub resolution: usize,
}

/// Keys that describe where or how fast a run happens, not what it computes.
const NON_SEMANTIC_KEYS: [&str; 2] = ["output_path", "workers"];

impl ExperimentConfig {
    pub fn defaults(command: Command) -> Self {
        let n_samples = if command == Command::Witness { 1_000 } else { 1_000_000 };
        Self {
            command,
            seed: 1,
            n_samples,
            quad_order: qps_core::average::DEFAULT_QUAD_ORDER,
            eps_phase: qps_core::DEFAULT_EPS_PHASE,
            params: None,
            output_path: None,
            format: if command == Command::Verify { Format::Json } else { Format::Csv },
            workers: None,
            restarts: 50,
            minimize: false,
            max_iter: 500,
            grad_tol: 1e-5,
            step0: 0.1,
            bins_phase: 180,
            bins_psf: 100,
            raw: false,
            theta_points: 33,
            dphi_points: 64,
            r1: 1.0,
            r2: 1.0,
            resolution: 8,
        }
    }

    /// Circuit parameters, defaulting to `U_max`.
    pub fn params_or_umax(&self) -> CircuitParams {
        self.params.unwrap_or_else(CircuitParams::u_max)
    }

    /// `(key, JSON value)` pairs echoed into output headers, sorted by key.
    pub fn header_fields(&self) -> Vec<(String, String)> {
        let value = serde_json::to_value(self).expect("config serializes");
        let map = value.as_object().expect("struct serializes to an object");
        let mut fields: Vec<(String, String)> = map
            .iter()
            .filter(|(k, _)| !NON_SEMANTIC_KEYS.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.to_string()))
            .collect();
        fields.sort();
        fields
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be a positive finite number, got {v}")))
            }
        };
        positive("eps_phase", self.eps_phase)?;
        positive("grad_tol", self.grad_tol)?;
        positive("step0", self.step0)?;
        if self.quad_order < 4 {
            return Err(invalid(format!("quad_order must be at least 4, got {}", self.quad_order)));
        }
        if self.n_samples == 0 || self.restarts == 0 {
            return Err(invalid("samples and restarts must be positive"));
        }
        if self.bins_phase < 2 || self.bins_psf < 2 {
            return Err(invalid("histograms need at least 2 bins"));
        }
        if self.theta_points < 2 || self.dphi_points < 1 {
            return Err(invalid("sweep grids need at least 2 latitudes and 1 phase difference"));
        }
        for (name, r) in [("r1", self.r1), ("r2", self.r2)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(invalid(format!("{name} must lie in [0, 1], got {r}")));
            }
        }
        if self.resolution < 8 {
            return Err(invalid(format!("witness resolution must be at least 8, got {}", self.resolution)));
        }
        if self.workers == Some(0) {
            return Err(invalid("workers must be positive"));
        }
        Ok(())
    }
}

/// Configuration with every field optional, as read from a file or the
/// command line.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub command: Option<Command>,
    pub seed: Option<u64>,
    pub n_samples: Option<u64>,
    pub quad_order: Option<usize>,
    pub eps_phase: Option<f64>,
    pub params: Option<Vec<f64>>,
    pub output_path: Option<PathBuf>,
    pub format: Option<Format>,
    pub workers: Option<usize>,
    pub restarts: Option<usize>,
    pub minimize: Option<bool>,
    pub max_iter: Option<usize>,
    pub grad_tol: Option<f64>,
    pub step0: Option<f64>,
    pub bins_phase: Option<usize>,
    pub bins_psf: Option<usize>,
    pub raw: Option<bool>,
    pub theta_points: Option<usize>,
    pub dphi_points: Option<usize>,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub resolution: Option<usize>,
}

macro_rules! overlay {
    ($base:ident, $over:ident; $($field:ident),*) => {
        $( if $over.$field.is_some() { $base.$field = $over.$field; } )*
    };
}

impl PartialConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlaid(mut self, over: PartialConfig) -> Self {
        overlay!(self, over; command, seed, n_samples, quad_order, eps_phase, params, output_path,
            format, workers, restarts, minimize, max_iter, grad_tol, step0, bins_phase, bins_psf,
            raw, theta_points, dphi_points, r1, r2, resolution);
        self
    }

    pub fn resolve(self) -> Result<ExperimentConfig> {
        let command = self.command.ok_or_else(|| invalid("no command given"))?;
        let mut c = ExperimentConfig::defaults(command);
        macro_rules! take {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { c.$field = v; } )* };
        }
        take!(seed, n_samples, quad_order, eps_phase, format, restarts, minimize, max_iter, grad_tol,
            step0, bins_phase, bins_psf, raw, theta_points, dphi_points, r1, r2, resolution);
        c.output_path = self.output_path;
        c.workers = self.workers;
        if let Some(p) = self.params {
            c.params = Some(CircuitParams::try_from_slice(&p)?);
        }
        c.validate()?;
        Ok(c)
    }
}

/// Parses `a,b,g,m1,m2,n1,n2,s1` (radians).
pub fn parse_params(s: &str) -> std::result::Result<Vec<f64>, String> {
    let values: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad angle {t:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    if values.len() != 8 {
        return Err(format!("expected 8 comma-separated angles, got {}", values.len()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err("angles must be finite".into());
    }
    Ok(values)
}
