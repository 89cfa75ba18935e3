//! Coupling envelopes, system configuration and the interaction-picture
//! generators (rotating-wave and full).
//!
//! Every generator is a sum of arm-local terms acting on the
//! (electron j, TLS j) pair. The arm-local space has dimension `2(2M+1)` with
//! local index `(m + M) * 2 + q`.

use libm::erf;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::hilbert::{AtomicAmplitudes, BasisDescriptor};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvelopeShape {
    Square,
    /// Gaussian centred at `window / 2` with standard deviation `width`,
    /// hard-windowed to `[0, window]`.
    Gaussian {
        width: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseEnvelope {
    pub shape: EnvelopeShape,
    /// Peak coupling rate `G₀` (square) or `G_max` (Gaussian).
    pub peak: f64,
    /// Interaction window `T`.
    pub window: f64,
}

impl PulseEnvelope {
    pub fn square(peak: f64, window: f64) -> Self {
        Self {
            shape: EnvelopeShape::Square,
            peak,
            window,
        }
    }

    pub fn gaussian(peak: f64, window: f64, width: f64) -> Self {
        Self {
            shape: EnvelopeShape::Gaussian { width },
            peak,
            window,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.peak.is_finite() && self.peak >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "peak coupling {} must be finite and nonnegative",
                self.peak
            )));
        }
        if !(self.window.is_finite() && self.window > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "window {} must be positive",
                self.window
            )));
        }
        if let EnvelopeShape::Gaussian { width } = self.shape {
            if !(width.is_finite() && width > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "gaussian width {width} must be positive"
                )));
            }
        }
        Ok(())
    }

    pub fn value(&self, t: f64) -> f64 {
        envelope_value(self, t)
    }

    pub fn total_area(&self) -> f64 {
        accumulated_area(self, self.window).expect("window end is inside the window")
    }
}

pub fn envelope_value(env: &PulseEnvelope, t: f64) -> f64 {
    if !(0.0..=env.window).contains(&t) {
        return 0.0;
    }
    match env.shape {
        EnvelopeShape::Square => env.peak,
        EnvelopeShape::Gaussian { width } => {
            let x = t - 0.5 * env.window;
            env.peak * (-x * x / (2.0 * width * width)).exp()
        }
    }
}

/// `∫₀ᵗ G(t') dt'` for `0 ≤ t ≤ T`. The Gaussian case uses the error function.
pub fn accumulated_area(env: &PulseEnvelope, t: f64) -> Result<f64> {
    let slack = 1e-12 * env.window;
    if t < -slack || t > env.window + slack {
        return Err(Error::TimeOutOfWindow {
            t,
            window: env.window,
        });
    }
    let t = t.clamp(0.0, env.window);
    Ok(match env.shape {
        EnvelopeShape::Square => env.peak * t,
        EnvelopeShape::Gaussian { width } => {
            let s = std::f64::consts::SQRT_2 * width;
            let half = 0.5 * env.window;
            env.peak
                * width
                * (std::f64::consts::PI / 2.0).sqrt()
                * (erf((t - half) / s) + erf(half / s))
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmParams {
    pub envelope: PulseEnvelope,
    /// `Δ_j = ω − ω₀` for this arm.
    pub detuning: f64,
    /// Phase of the atomic resource on this arm (bookkeeping only).
    #[serde(default)]
    pub phase: f64,
}

impl ArmParams {
    pub fn validate(&self) -> Result<()> {
        self.envelope.validate()?;
        if !self.detuning.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "detuning {} is not finite",
                self.detuning
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Rwa,
    Full,
}

/// Ladder spacing `ω` and TLS splitting `ω₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Carrier {
    pub omega: f64,
    pub omega0: f64,
}

impl Carrier {
    pub fn omega_plus(&self) -> f64 {
        self.omega + self.omega0
    }

    pub fn detuning(&self) -> f64 {
        self.omega - self.omega0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub arms: Vec<ArmParams>,
    pub sideband_cut: usize,
    pub carrier: Option<Carrier>,
    pub atomic: AtomicAmplitudes,
    pub model: Model,
}

pub const DEFAULT_RWA_CUT: usize = 2;
pub const DEFAULT_FULL_CUT: usize = 3;

impl SystemConfig {
    /// Symmetric square-pulse RWA configuration on a unit window: area `g`,
    /// detuning parameter `δ = ΔT/2`, symmetric W input.
    pub fn symmetric(n: usize, area: f64, delta: f64) -> Self {
        let arm = ArmParams {
            envelope: PulseEnvelope::square(area, 1.0),
            detuning: 2.0 * delta,
            phase: 0.0,
        };
        Self {
            arms: vec![arm; n],
            sideband_cut: DEFAULT_RWA_CUT,
            carrier: None,
            atomic: AtomicAmplitudes::symmetric_w(n),
            model: Model::Rwa,
        }
    }

    /// Symmetric resonant square pulse in carrier units: `ω = ω₀ = 1`,
    /// `T = omega_t`, `G₀ = g / T`.
    pub fn symmetric_carrier(n: usize, area: f64, omega_t: f64, model: Model) -> Self {
        let arm = ArmParams {
            envelope: PulseEnvelope::square(area / omega_t, omega_t),
            detuning: 0.0,
            phase: 0.0,
        };
        Self {
            arms: vec![arm; n],
            sideband_cut: match model {
                Model::Rwa => DEFAULT_RWA_CUT,
                Model::Full => DEFAULT_FULL_CUT,
            },
            carrier: Some(Carrier {
                omega: 1.0,
                omega0: 1.0,
            }),
            atomic: AtomicAmplitudes::symmetric_w(n),
            model,
        }
    }

    /// Per-arm square pulses on a unit window from areas `g_j` and `δ_j`.
    pub fn square_arms(areas: &[f64], deltas: &[f64]) -> Self {
        assert_eq!(areas.len(), deltas.len(), "one detuning per arm");
        let arms = areas
            .iter()
            .zip(deltas)
            .map(|(&g, &d)| ArmParams {
                envelope: PulseEnvelope::square(g, 1.0),
                detuning: 2.0 * d,
                phase: 0.0,
            })
            .collect();
        Self {
            arms,
            sideband_cut: DEFAULT_RWA_CUT,
            carrier: None,
            atomic: AtomicAmplitudes::symmetric_w(areas.len()),
            model: Model::Rwa,
        }
    }

    pub fn with_atomic(mut self, atomic: AtomicAmplitudes) -> Self {
        self.atomic = atomic;
        self
    }

    pub fn with_cut(mut self, cut: usize) -> Self {
        self.sideband_cut = cut;
        self
    }

    pub fn with_model(mut self, model: Model) -> Self {
        self.model = model;
        self
    }

    pub fn with_envelope(mut self, envelope: PulseEnvelope) -> Self {
        for arm in &mut self.arms {
            arm.envelope = envelope;
        }
        self
    }

    pub fn arm_count(&self) -> usize {
        self.arms.len()
    }

    /// End of the latest interaction window.
    pub fn window(&self) -> f64 {
        self.arms
            .iter()
            .map(|a| a.envelope.window)
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.arms.is_empty() {
            return Err(Error::InvalidConfig("at least one arm is required".into()));
        }
        if self.sideband_cut == 0 {
            return Err(Error::InvalidConfig(
                "sideband cut must be at least 1".into(),
            ));
        }
        for arm in &self.arms {
            arm.validate()?;
        }
        self.atomic.validate(self.arm_count())?;
        if self.model == Model::Full {
            let carrier = self.carrier.ok_or_else(|| {
                Error::InvalidConfig(
                    "full model requires carrier frequencies omega and omega0".into(),
                )
            })?;
            if !(carrier.omega > 0.0 && carrier.omega0 > 0.0) {
                return Err(Error::InvalidConfig(
                    "full model requires omega > 0 and omega0 > 0".into(),
                ));
            }
            let expected = carrier.detuning();
            for (j, arm) in self.arms.iter().enumerate() {
                if (arm.detuning - expected).abs() > 1e-12 * carrier.omega.max(1.0) {
                    return Err(Error::InvalidConfig(format!(
                        "arm {j} detuning {} differs from omega - omega0 = {expected}",
                        arm.detuning
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn omega_plus(&self) -> Option<f64> {
        self.carrier.map(|c| c.omega_plus())
    }

    pub(crate) fn check_basis(&self, basis: &BasisDescriptor) -> Result<()> {
        if basis.arm_count() != self.arm_count() || basis.sideband_cut() != self.sideband_cut {
            return Err(Error::DimensionMismatch(format!(
                "basis (N={}, M={}) does not match config (N={}, M={})",
                basis.arm_count(),
                basis.sideband_cut(),
                self.arm_count(),
                self.sideband_cut
            )));
        }
        Ok(())
    }
}

pub fn arm_local_dim(cut: usize) -> usize {
    2 * (2 * cut + 1)
}

/// Arm-local generator. `omega_plus = Some(Ω₊)` adds the counter-rotating
/// terms `b σ⁻ e^{−iΩ₊t} + b† σ⁺ e^{+iΩ₊t}`.
pub fn arm_generator(arm: &ArmParams, cut: usize, omega_plus: Option<f64>, t: f64) -> DMatrix<C64> {
    let dim = arm_local_dim(cut);
    let mut h = DMatrix::zeros(dim, dim);
    let coupling = arm.envelope.value(t);
    if coupling == 0.0 {
        return h;
    }
    let ladder = 2 * cut + 1;
    let rot = C64::from_polar(coupling, -arm.detuning * t);
    let counter = omega_plus.map(|w| C64::from_polar(coupling, -w * t));
    // b lowers the ladder digit by one; the bottom rung maps to zero.
    for d in 1..ladder {
        let (g_hi, e_hi) = (d * 2, d * 2 + 1);
        let (g_lo, e_lo) = ((d - 1) * 2, (d - 1) * 2 + 1);
        // b σ⁺ : (m, g) → (m−1, e)
        h[(e_lo, g_hi)] += rot;
        h[(g_hi, e_lo)] += rot.conj();
        if let Some(cr) = counter {
            // b σ⁻ : (m, e) → (m−1, g)
            h[(g_lo, e_hi)] += cr;
            h[(e_hi, g_lo)] += cr.conj();
        }
    }
    h
}

/// Generator of `arm` under the configured model.
pub fn arm_generator_for(config: &SystemConfig, arm: usize, t: f64) -> DMatrix<C64> {
    let omega_plus = match config.model {
        Model::Rwa => None,
        Model::Full => config.omega_plus(),
    };
    arm_generator(&config.arms[arm], config.sideband_cut, omega_plus, t)
}

/// Embed an arm-local operator into the full space.
pub fn embed_arm_operator(
    basis: &BasisDescriptor,
    arm: usize,
    local: &DMatrix<C64>,
) -> DMatrix<C64> {
    let n = basis.total_dim();
    let offsets = basis.arm_local_offsets(arm);
    let mut out = DMatrix::zeros(n, n);
    for rest in basis.arm_rest_indices(arm) {
        for (a, &oa) in offsets.iter().enumerate() {
            for (b, &ob) in offsets.iter().enumerate() {
                let v = local[(a, b)];
                if v != C64::new(0.0, 0.0) {
                    out[(rest + oa, rest + ob)] += v;
                }
            }
        }
    }
    out
}

fn assemble(
    config: &SystemConfig,
    basis: &BasisDescriptor,
    t: f64,
    omega_plus: Option<f64>,
) -> Result<DMatrix<C64>> {
    config.check_basis(basis)?;
    let n = basis.total_dim();
    let mut h = DMatrix::zeros(n, n);
    for (j, arm) in config.arms.iter().enumerate() {
        let local = arm_generator(arm, config.sideband_cut, omega_plus, t);
        h += embed_arm_operator(basis, j, &local);
    }
    Ok(h)
}

/// `Σ_j G_j(t)[b_j σ_j⁺ e^{−iΔ_j t} + h.c.]` on the full basis.
pub fn build_rwa_generator(
    config: &SystemConfig,
    basis: &BasisDescriptor,
    t: f64,
) -> Result<DMatrix<C64>> {
    assemble(config, basis, t, None)
}

/// Rotating plus counter-rotating generator on the full basis.
pub fn build_full_generator(
    config: &SystemConfig,
    basis: &BasisDescriptor,
    t: f64,
) -> Result<DMatrix<C64>> {
    let carrier = config.carrier.ok_or_else(|| {
        Error::InvalidConfig("full generator requires carrier frequencies".into())
    })?;
    assemble(config, basis, t, Some(carrier.omega_plus()))
}

/// Per-arm excitation number `m_j + q_j`, conserved by the RWA generator.
pub fn arm_excitation_operator(basis: &BasisDescriptor, arm: usize) -> DMatrix<C64> {
    let cut = basis.sideband_cut() as f64;
    DMatrix::from_fn(basis.total_dim(), basis.total_dim(), |i, k| {
        if i == k {
            let m = basis.digit(i, basis.electron_subsystem(arm)) as f64 - cut;
            let q = basis.digit(i, basis.tls_subsystem(arm)) as f64;
            C64::new(m + q, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}
