//! Experiment configuration: command-line flags merged over an optional JSON
//! config file that uses the same key names.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    StandardMap,
    Billiard,
    RigidRotation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DensityKind {
    Lebesgue,
    Birkhoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityArg {
    Stable,
    Unstable,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BranchArg {
    Plus,
    Minus,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Rot,
    MeanRot,
    Interval,
    Orbit,
    AuditPb,
    BilliardOrbit,
    Manifold,
    Raster,
    Intersect,
    MeasureCheck,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Rot => "rot",
            CommandKind::MeanRot => "mean-rot",
            CommandKind::Interval => "interval",
            CommandKind::Orbit => "orbit",
            CommandKind::AuditPb => "audit-pb",
            CommandKind::BilliardOrbit => "billiard-orbit",
            CommandKind::Manifold => "manifold",
            CommandKind::Raster => "raster",
            CommandKind::Intersect => "intersect",
            CommandKind::MeasureCheck => "measure-check",
        }
    }

    /// Keys the command reads besides the shared ones.
    fn keys(self) -> &'static [&'static str] {
        match self {
            CommandKind::Rot => &["x", "y", "n", "tol"],
            CommandKind::MeanRot => &["nx", "ny", "y-lo", "y-hi", "density"],
            CommandKind::Interval => &[
                "seeds",
                "n",
                "tol",
                "y-lo",
                "y-hi",
                "fixed-point",
                "period",
                "branch",
                "budget",
                "refine-tol",
                "samples",
            ],
            CommandKind::Orbit => &["p", "q", "nx", "ny", "y-lo", "y-hi"],
            CommandKind::AuditPb => &["qmax", "lo", "hi", "nx", "ny", "y-lo", "y-hi", "restarts"],
            CommandKind::BilliardOrbit => &["p", "q", "restarts"],
            CommandKind::Manifold => {
                &["fixed-point", "period", "stability", "branch", "budget", "refine-tol", "grid", "window"]
            }
            CommandKind::Raster => {
                &["fixed-point", "period", "stability", "branch", "budget", "refine-tol", "grid", "window", "y-period"]
            }
            CommandKind::Intersect => &["fixed-point", "period", "branch", "budget", "refine-tol"],
            CommandKind::MeasureCheck => &["samples"],
        }
    }
}

const SHARED_KEYS: [&str; 7] = ["system", "k", "alpha", "table", "seed", "jobs", "output"];

/// Every configurable key. Unset keys fall back to per-command defaults.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Params {
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemKind>,
    /// Standard-map kick strength
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    /// Rigid-rotation angle in turns
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Billiard table file
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Worker threads (default: available parallelism)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    /// Output path prefix; JSON goes to stdout when absent
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,

    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    /// Iteration count
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nx: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ny: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_lo: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_hi: Option<f64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityKind>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<i64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qmax: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    /// Anchor point `x,y` of the hyperbolic orbit
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixed_point: Option<String>,
    /// Orbit type `p,q` of the anchor
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<String>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability: Option<StabilityArg>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<BranchArg>,
    /// Arclength budget per branch
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refine_tol: Option<f64>,
    /// Raster size `WIDTHxHEIGHT`
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    /// Raster window `x_min,x_max,y_min,y_max`
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<String>,
    /// Fold `y` with this period when rasterising
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_period: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($field:ident),* $(,)?) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field.clone(); } )*
    };
}

impl Params {
    /// `top` wins wherever it sets a key.
    pub fn overlay(mut self, top: &Params) -> Params {
        overlay!(self, top; system, k, alpha, table, seed, jobs, output, x, y, n, tol, nx, ny, y_lo, y_hi,
            density, seeds, p, q, qmax, lo, hi, restarts, fixed_point, period, stability, branch, budget,
            refine_tol, grid, window, y_period, samples);
        self
    }

    pub fn from_file(path: &Path) -> Result<Params, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
    }

    fn set_keys(&self) -> Vec<String> {
        match serde_json::to_value(self) {
            Ok(serde_json::Value::Object(map)) => map.keys().cloned().collect(),
            _ => Vec::new(),
        }
    }

    /// Reject keys the command does not read and non-finite numbers.
    pub fn validate_for(&self, command: CommandKind) -> Result<(), ConfigError> {
        let allowed = command.keys();
        for key in self.set_keys() {
            if !SHARED_KEYS.contains(&key.as_str()) && !allowed.contains(&key.as_str()) {
                return Err(bad(format!("key '{key}' is not used by '{}'", command.name())));
            }
        }
        let reals = [
            ("k", self.k),
            ("alpha", self.alpha),
            ("x", self.x),
            ("y", self.y),
            ("tol", self.tol),
            ("y-lo", self.y_lo),
            ("y-hi", self.y_hi),
            ("lo", self.lo),
            ("hi", self.hi),
            ("budget", self.budget),
            ("refine-tol", self.refine_tol),
            ("y-period", self.y_period),
        ];
        for (name, v) in reals {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(bad(format!("'{name}' must be finite")));
                }
            }
        }
        if self.system.is_none() {
            return Err(bad("missing 'system'"));
        }
        Ok(())
    }
}

pub fn parse_pair<T: std::str::FromStr>(key: &str, text: &str) -> Result<(T, T), ConfigError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => match (a.parse(), b.parse()) {
            (Ok(a), Ok(b)) => Ok((a, b)),
            _ => Err(bad(format!("'{key}' expects two comma-separated numbers, got '{text}'"))),
        },
        _ => Err(bad(format!("'{key}' expects two comma-separated numbers, got '{text}'"))),
    }
}

pub fn parse_grid(text: &str) -> Result<(usize, usize), ConfigError> {
    let (w, h) =
        text.split_once(['x', 'X']).ok_or_else(|| bad(format!("'grid' expects WIDTHxHEIGHT, got '{text}'")))?;
    match (w.trim().parse(), h.trim().parse()) {
        (Ok(w), Ok(h)) if w > 0 && h > 0 => Ok((w, h)),
        _ => Err(bad(format!("'grid' expects positive WIDTHxHEIGHT, got '{text}'"))),
    }
}

pub fn parse_window(text: &str) -> Result<[f64; 4], ConfigError> {
    let vals: Result<Vec<f64>, _> = text.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match vals {
        Ok(v) if v.len() == 4 && v.iter().all(|x| x.is_finite()) && v[0] < v[1] && v[2] < v[3] => {
            Ok([v[0], v[1], v[2], v[3]])
        }
        _ => Err(bad(format!("'window' expects x_min,x_max,y_min,y_max, got '{text}'"))),
    }
}
