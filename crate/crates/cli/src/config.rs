//! Flat JSON run configuration.
//!
//! A config file is a single JSON object. `n` and `model` are required; every
//! other key has a default that depends on the subcommand. A run manifest is a
//! valid config: its extra bookkeeping keys are accepted and ignored.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use heralded_core::analytic::{g_optimal, DEFAULT_KAPPA};
use heralded_core::hamiltonian::{Carrier, Model, SystemConfig, DEFAULT_FULL_CUT, DEFAULT_RWA_CUT};
use heralded_core::hilbert::{AtomicAmplitudes, NORMALIZATION_TOL};
use heralded_core::scans::{MismatchKind, ScanModel};
use heralded_core::C64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

pub const REQUIRED_KEYS: [&str; 2] = ["n", "model"];

const CONFIG_KEYS: [&str; 16] = [
    "n",
    "model",
    "g",
    "delta",
    "omega",
    "omega0",
    "omega_t",
    "amplitudes",
    "phases",
    "sideband_cut",
    "points",
    "grid_min",
    "grid_max",
    "kind",
    "kappa",
    "tau_over_t",
];

/// Keys a manifest adds on top of the config.
pub const MANIFEST_KEYS: [&str; 7] = [
    "subcommand",
    "version",
    "timestamp",
    "outputs",
    "scan",
    "summary",
    "checks",
];

pub const DEFAULT_OMEGA_T: f64 = 20.0;
pub const DEFAULT_GAUSSIAN_WIDTH: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    SweepArea,
    Optimize,
    SweepDetuning,
    Mismatch,
    TimeTrace,
    WeightedScan,
    BeyondRwa,
    Gaussian,
    Verify,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Self::SweepArea => "sweep-area",
            Self::Optimize => "optimize",
            Self::SweepDetuning => "sweep-detuning",
            Self::Mismatch => "mismatch",
            Self::TimeTrace => "time-trace",
            Self::WeightedScan => "weighted-scan",
            Self::BeyondRwa => "beyond-rwa",
            Self::Gaussian => "gaussian",
            Self::Verify => "verify",
        }
    }

    fn three_arms_only(self) -> bool {
        matches!(self, Self::TimeTrace | Self::WeightedScan | Self::Gaussian)
    }
}

/// Config as read from a file or the command line; unset keys are `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawConfig {
    pub n: Option<usize>,
    pub model: Option<Model>,
    pub g: Option<f64>,
    pub delta: Option<f64>,
    pub omega: Option<f64>,
    pub omega0: Option<f64>,
    pub omega_t: Option<f64>,
    pub amplitudes: Option<Vec<f64>>,
    pub phases: Option<Vec<f64>>,
    pub sideband_cut: Option<usize>,
    pub points: Option<usize>,
    pub grid_min: Option<f64>,
    pub grid_max: Option<f64>,
    pub kind: Option<MismatchKind>,
    pub kappa: Option<f64>,
    pub tau_over_t: Option<f64>,
}

impl RawConfig {
    /// Keys set in `other` replace those set here.
    pub fn overlay(mut self, other: RawConfig) -> RawConfig {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            n,
            model,
            g,
            delta,
            omega,
            omega0,
            omega_t,
            amplitudes,
            phases,
            sideband_cut,
            points,
            grid_min,
            grid_max,
            kind,
            kappa,
            tau_over_t
        );
        self
    }
}

/// Fully resolved run configuration; this is what manifests echo.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub n: usize,
    pub model: Model,
    pub g: f64,
    pub delta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_t: Option<f64>,
    pub amplitudes: Vec<f64>,
    pub phases: Vec<f64>,
    pub sideband_cut: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<MismatchKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_over_t: Option<f64>,
}

/// Parse a config object, rejecting unknown keys and missing required ones.
pub fn parse_config(text: &str) -> Result<RawConfig, CliError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("malformed JSON: {e}")))?;
    let Value::Object(map) = value else {
        return Err(CliError::Config("config must be a JSON object".into()));
    };
    let missing: Vec<&str> = REQUIRED_KEYS
        .iter()
        .copied()
        .filter(|k| !map.contains_key(*k))
        .collect();
    if !missing.is_empty() {
        return Err(CliError::Config(format!(
            "missing required key(s): {}",
            missing.join(", ")
        )));
    }
    let mut config = Map::new();
    for (key, v) in map {
        if CONFIG_KEYS.contains(&key.as_str()) {
            config.insert(key, v);
        } else if !MANIFEST_KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("unknown key \"{key}\"")));
        }
    }
    serde_json::from_value(Value::Object(config))
        .map_err(|e| CliError::Config(format!("invalid value: {e}")))
}

pub fn load_config(path: &Path) -> Result<RawConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn finite(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} must be finite, got {v}")))
    }
}

/// Fill defaults for `sub` and validate.
pub fn resolve(raw: &RawConfig, sub: Subcommand) -> Result<RunConfig, CliError> {
    let n = raw
        .n
        .ok_or_else(|| CliError::Config("missing required key(s): n".into()))?;
    let model = raw
        .model
        .ok_or_else(|| CliError::Config("missing required key(s): model".into()))?;
    if n == 0 {
        return Err(CliError::Config("n must be at least 1".into()));
    }
    if sub.three_arms_only() && n != 3 {
        return Err(CliError::Config(format!(
            "{} runs three arms; got n = {n}",
            sub.name()
        )));
    }

    let amplitudes = raw
        .amplitudes
        .clone()
        .unwrap_or_else(|| vec![1.0 / (n as f64).sqrt(); n]);
    let phases = raw.phases.clone().unwrap_or_else(|| vec![0.0; n]);
    if amplitudes.len() != n || phases.len() != n {
        return Err(CliError::Config(format!(
            "amplitudes and phases need {n} entries, got {} and {}",
            amplitudes.len(),
            phases.len()
        )));
    }
    for (a, p) in amplitudes.iter().zip(&phases) {
        finite("amplitude", *a)?;
        finite("phase", *p)?;
    }
    let norm: f64 = amplitudes.iter().map(|a| a * a).sum();
    if (norm - 1.0).abs() > NORMALIZATION_TOL {
        return Err(CliError::Config(format!(
            "atomic amplitudes are not normalized: sum of squared magnitudes is {norm}"
        )));
    }

    let (omega, omega0, omega_t, delta) = match model {
        Model::Rwa => {
            if raw.omega.is_some() || raw.omega0.is_some() || raw.omega_t.is_some() {
                return Err(CliError::Config(
                    "inconsistent model/carrier settings: omega, omega0 and omega_t apply only to model \"full\"".into(),
                ));
            }
            (None, None, None, finite("delta", raw.delta.unwrap_or(0.0))?)
        }
        Model::Full => {
            let omega = positive(
                "omega",
                raw.omega.ok_or_else(|| {
                    CliError::Config(
                        "inconsistent model/carrier settings: model \"full\" requires omega".into(),
                    )
                })?,
            )?;
            let omega0 = positive("omega0", raw.omega0.unwrap_or(1.0))?;
            let omega_t = positive("omega_t", raw.omega_t.unwrap_or(DEFAULT_OMEGA_T))?;
            let delta = (omega / omega0 - 1.0) * omega_t / 2.0;
            if let Some(d) = raw.delta {
                if (d - delta).abs() > 1e-12 * (1.0 + delta.abs()) {
                    return Err(CliError::Config(format!(
                        "inconsistent model/carrier settings: delta {d} disagrees with (omega/omega0 - 1) omega_t / 2 = {delta}"
                    )));
                }
            }
            if sub == Subcommand::BeyondRwa && delta != 0.0 {
                return Err(CliError::Config(
                    "beyond-rwa compares resonant runs; set omega = omega0".into(),
                ));
            }
            (Some(omega), Some(omega0), Some(omega_t), delta)
        }
    };

    let default_g = match sub {
        Subcommand::TimeTrace => FRAC_PI_2,
        Subcommand::BeyondRwa => 0.6,
        _ => g_optimal(n),
    };
    let g = positive("g", raw.g.unwrap_or(default_g))?;
    let default_cut = match (sub, model) {
        (Subcommand::BeyondRwa, _) | (_, Model::Full) => DEFAULT_FULL_CUT,
        _ => DEFAULT_RWA_CUT,
    };
    let sideband_cut = raw.sideband_cut.unwrap_or(default_cut);
    if sideband_cut < 2 {
        return Err(CliError::Config(format!(
            "sideband_cut must be at least 2, got {sideband_cut}"
        )));
    }
    if model == Model::Rwa && sideband_cut != DEFAULT_RWA_CUT && sub != Subcommand::BeyondRwa {
        return Err(CliError::Config(format!(
            "RWA runs use sideband_cut {DEFAULT_RWA_CUT}"
        )));
    }

    let kind = (sub == Subcommand::Mismatch).then(|| raw.kind.unwrap_or(MismatchKind::Coupling));
    let (default_points, grid) = match sub {
        Subcommand::SweepArea => (Some(50), None),
        Subcommand::SweepDetuning => (Some(41), Some((-4.0, 4.0))),
        Subcommand::Mismatch => match kind {
            Some(MismatchKind::Detuning) => (Some(31), Some((-1.0, 1.0))),
            _ => (Some(31), Some((-0.3, 0.3))),
        },
        Subcommand::TimeTrace => (Some(201), None),
        Subcommand::WeightedScan => (Some(11), None),
        Subcommand::BeyondRwa => (Some(201), Some((20.0, 200.0))),
        Subcommand::Gaussian => (Some(20), Some((0.1, 2.0))),
        Subcommand::Optimize | Subcommand::Verify => (None, None),
    };
    let points = default_points.map(|d| raw.points.unwrap_or(d));
    if let Some(p) = points {
        if p < 2 {
            return Err(CliError::Config(format!(
                "points must be at least 2, got {p}"
            )));
        }
    }
    let (grid_min, grid_max) = match grid {
        Some((lo, hi)) => {
            let lo = finite("grid_min", raw.grid_min.unwrap_or(lo))?;
            let hi = finite("grid_max", raw.grid_max.unwrap_or(hi))?;
            if lo >= hi {
                return Err(CliError::Config(format!(
                    "grid_min {lo} must be below grid_max {hi}"
                )));
            }
            if matches!(sub, Subcommand::BeyondRwa | Subcommand::Gaussian) && lo <= 0.0 {
                return Err(CliError::Config(format!(
                    "grid_min must be positive for {}",
                    sub.name()
                )));
            }
            (Some(lo), Some(hi))
        }
        None => (None, None),
    };
    let kappa = (sub == Subcommand::BeyondRwa).then(|| raw.kappa.unwrap_or(DEFAULT_KAPPA));
    let tau_over_t = match sub {
        Subcommand::Gaussian => Some(positive(
            "tau_over_t",
            raw.tau_over_t.unwrap_or(DEFAULT_GAUSSIAN_WIDTH),
        )?),
        _ => None,
    };

    Ok(RunConfig {
        n,
        model,
        g,
        delta,
        omega,
        omega0,
        omega_t,
        amplitudes,
        phases,
        sideband_cut,
        points,
        grid_min,
        grid_max,
        kind,
        kappa,
        tau_over_t,
    })
}

impl RunConfig {
    pub fn atomic(&self) -> AtomicAmplitudes {
        AtomicAmplitudes::weighted(
            self.amplitudes
                .iter()
                .zip(&self.phases)
                .map(|(&a, &p)| C64::from_polar(a, p))
                .collect(),
        )
    }

    pub fn scan_model(&self) -> ScanModel {
        match (self.model, self.omega_t) {
            (Model::Full, Some(omega_t)) => ScanModel::Full { omega_t },
            _ => ScanModel::Rwa,
        }
    }

    /// The single-run system this config describes.
    pub fn system_config(&self) -> SystemConfig {
        let mut cfg = match self.scan_model() {
            ScanModel::Rwa => SystemConfig::symmetric(self.n, self.g, self.delta),
            ScanModel::Full { omega_t } => {
                let omega0 = self.omega0.unwrap_or(1.0);
                let window = omega_t / omega0;
                let detuning = 2.0 * self.delta / window;
                let mut cfg = SystemConfig::symmetric_carrier(self.n, self.g, omega_t, Model::Full);
                for arm in &mut cfg.arms {
                    arm.envelope.window = window;
                    arm.envelope.peak = self.g / window;
                    arm.detuning = detuning;
                }
                cfg.carrier = Some(Carrier {
                    omega: self.omega.unwrap_or(omega0),
                    omega0,
                });
                cfg
            }
        };
        cfg = cfg.with_atomic(self.atomic()).with_cut(self.sideband_cut);
        cfg
    }
}
