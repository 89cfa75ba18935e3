//! Time evolution under the interaction-picture generator.
//!
//! The integrator is the fourth-order Magnus scheme with two Gauss–Legendre
//! samples per step. Arms never interact, so the propagator factorizes into
//! arm-local blocks; `propagate` builds those blocks and applies them to the
//! state one arm at a time. `propagate_many_body` integrates the summed
//! generator on the whole space instead and exists as a cross-check.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::hamiltonian::{
    arm_generator, build_full_generator, build_rwa_generator, ArmParams, Model, SystemConfig,
};
use crate::hilbert::{BasisDescriptor, PureState};
use crate::linalg::{expm_minus_i, max_abs};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FixedStep,
    /// Halve the step until two successive propagators agree within tolerance.
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSpec {
    pub method: Method,
    pub tolerance: f64,
    pub max_step: f64,
    /// For the full model the step is capped at this fraction of `2π/Ω₊`.
    pub fast_period_fraction: f64,
}

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_FAST_PERIOD_FRACTION: f64 = 1.0 / 40.0;
const MAX_HALVINGS: usize = 16;

impl IntegratorSpec {
    pub fn fixed(max_step: f64) -> Self {
        Self {
            method: Method::FixedStep,
            tolerance: DEFAULT_TOLERANCE,
            max_step,
            fast_period_fraction: DEFAULT_FAST_PERIOD_FRACTION,
        }
    }

    /// Default step for `config`: at most `T/400` and `0.01/rate`, where the
    /// rate is the largest peak coupling plus detuning over the arms.
    pub fn for_config(config: &SystemConfig) -> Self {
        let rate = config
            .arms
            .iter()
            .map(|a| a.envelope.peak + a.detuning.abs())
            .fold(0.0, f64::max);
        let mut step = config.window() / 400.0;
        if rate > 0.0 {
            step = step.min(0.01 / rate);
        }
        Self::fixed(step)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tolerance {} must be positive",
                self.tolerance
            )));
        }
        if !(self.max_step > 0.0 && self.max_step.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "max_step {} must be positive",
                self.max_step
            )));
        }
        if !(self.fast_period_fraction > 0.0 && self.fast_period_fraction <= 1.0 / 20.0) {
            return Err(Error::InvalidConfig(format!(
                "fast_period_fraction {} must lie in (0, 1/20]",
                self.fast_period_fraction
            )));
        }
        Ok(())
    }

    /// Step bound actually used for `config`.
    pub fn effective_step(&self, config: &SystemConfig) -> f64 {
        match (config.model, config.omega_plus()) {
            (Model::Full, Some(wp)) => self
                .max_step
                .min(2.0 * std::f64::consts::PI / wp * self.fast_period_fraction),
            _ => self.max_step,
        }
    }
}

const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // √3/6
const COMMUTATOR_WEIGHT: f64 = 0.144_337_567_297_406_43; // √3/12

/// Fourth-order Magnus integration of `generator` over `[a, b]` with `steps`
/// equal steps, returning the propagator.
fn magnus_propagator<F>(dim: usize, a: f64, b: f64, steps: usize, generator: F) -> DMatrix<C64>
where
    F: Fn(f64) -> DMatrix<C64>,
{
    let mut u = DMatrix::identity(dim, dim);
    if steps == 0 || b <= a {
        return u;
    }
    let h = (b - a) / steps as f64;
    let minus_i = C64::new(0.0, -COMMUTATOR_WEIGHT * h * h);
    for k in 0..steps {
        let t = a + h * k as f64;
        let h1 = generator(t + h * (0.5 - GAUSS_OFFSET));
        let h2 = generator(t + h * (0.5 + GAUSS_OFFSET));
        let comm = &h2 * &h1 - &h1 * &h2;
        let kmat = (&h1 + &h2) * C64::new(0.5 * h, 0.0) + comm * minus_i;
        u = expm_minus_i(&kmat) * u;
    }
    u
}

fn step_count(span: f64, step: f64) -> usize {
    if span <= 0.0 {
        0
    } else {
        ((span / step) * (1.0 - 1e-12)).ceil().max(1.0) as usize
    }
}

/// Propagator of one arm over `[t0, t1]` on its local space. Time outside the
/// arm's window contributes the identity.
pub fn arm_propagator(
    arm: &ArmParams,
    cut: usize,
    omega_plus: Option<f64>,
    t0: f64,
    t1: f64,
    step: f64,
    spec: &IntegratorSpec,
) -> Result<DMatrix<C64>> {
    let dim = 2 * (2 * cut + 1);
    let a = t0.max(0.0);
    let b = t1.min(arm.envelope.window);
    if b <= a || arm.envelope.peak == 0.0 {
        return Ok(DMatrix::identity(dim, dim));
    }
    let gen = |t: f64| arm_generator(arm, cut, omega_plus, t);
    let steps = step_count(b - a, step);
    let mut u = magnus_propagator(dim, a, b, steps, gen);
    if spec.method == Method::Adaptive {
        let mut n = steps;
        let mut difference = f64::INFINITY;
        for _ in 0..MAX_HALVINGS {
            n *= 2;
            let finer = magnus_propagator(dim, a, b, n, gen);
            difference = max_abs(&(&finer - &u));
            u = finer;
            if difference < spec.tolerance {
                return Ok(u);
            }
        }
        return Err(Error::NoConvergence {
            tolerance: spec.tolerance,
            difference,
        });
    }
    Ok(u)
}

/// Arm-local propagators for every arm of `config` over `[t0, t1]`.
/// Identical arms share one computation.
pub fn arm_propagators(
    config: &SystemConfig,
    t0: f64,
    t1: f64,
    spec: &IntegratorSpec,
) -> Result<Vec<DMatrix<C64>>> {
    spec.validate()?;
    let omega_plus = match config.model {
        Model::Rwa => None,
        Model::Full => Some(config.omega_plus().ok_or_else(|| {
            Error::InvalidConfig("full model requires carrier frequencies".into())
        })?),
    };
    let step = spec.effective_step(config);
    let mut out: Vec<DMatrix<C64>> = Vec::with_capacity(config.arm_count());
    for (j, arm) in config.arms.iter().enumerate() {
        if let Some(k) = config.arms[..j].iter().position(|other| other == arm) {
            let shared = out[k].clone();
            out.push(shared);
        } else {
            out.push(arm_propagator(
                arm,
                config.sideband_cut,
                omega_plus,
                t0,
                t1,
                step,
                spec,
            )?);
        }
    }
    Ok(out)
}

/// Apply an arm-local operator to a full-space amplitude vector in place.
pub fn apply_arm_operator(
    basis: &BasisDescriptor,
    arm: usize,
    local: &DMatrix<C64>,
    amplitudes: &mut DVector<C64>,
) {
    let offsets = basis.arm_local_offsets(arm);
    let dim = offsets.len();
    let mut buf = DVector::<C64>::zeros(dim);
    for rest in basis.arm_rest_indices(arm) {
        for (a, &o) in offsets.iter().enumerate() {
            buf[a] = amplitudes[rest + o];
        }
        let out = local * &buf;
        for (a, &o) in offsets.iter().enumerate() {
            amplitudes[rest + o] = out[a];
        }
    }
}

fn check_norm(before: f64, after: f64, spec: &IntegratorSpec) -> Result<()> {
    let drift = (after - before).abs();
    let allowed = 10.0 * spec.tolerance;
    if drift > allowed {
        return Err(Error::NormDrift { drift, allowed });
    }
    Ok(())
}

fn check_interval(config: &SystemConfig, t0: f64, t1: f64) -> Result<()> {
    if !(t0.is_finite() && t1.is_finite()) || t1 < t0 {
        return Err(Error::InvalidConfig(format!(
            "time interval [{t0}, {t1}] must be finite and ordered"
        )));
    }
    config.validate()
}

/// Evolve `state` from `t0` to `t1`.
pub fn propagate(
    state: &PureState,
    config: &SystemConfig,
    t0: f64,
    t1: f64,
    spec: &IntegratorSpec,
) -> Result<PureState> {
    check_interval(config, t0, t1)?;
    config.check_basis(&state.basis)?;
    let props = arm_propagators(config, t0, t1, spec)?;
    let mut amps = state.amplitudes.clone();
    for (j, u) in props.iter().enumerate() {
        apply_arm_operator(&state.basis, j, u, &mut amps);
    }
    let out = PureState::new(state.basis.clone(), amps)?;
    check_norm(state.norm_sqr(), out.norm_sqr(), spec)?;
    Ok(out)
}

/// Whole-space Magnus integration with a Taylor-series action of each step
/// exponential. Meant for small bases.
pub fn propagate_many_body(
    state: &PureState,
    config: &SystemConfig,
    t0: f64,
    t1: f64,
    spec: &IntegratorSpec,
) -> Result<PureState> {
    check_interval(config, t0, t1)?;
    spec.validate()?;
    let basis = &state.basis;
    config.check_basis(basis)?;
    let build = |t: f64| match config.model {
        Model::Rwa => build_rwa_generator(config, basis, t),
        Model::Full => build_full_generator(config, basis, t),
    };
    let a = t0.max(0.0);
    let b = t1.min(config.window());
    let mut psi = state.amplitudes.clone();
    let steps = step_count(b - a, spec.effective_step(config));
    if steps > 0 {
        let h = (b - a) / steps as f64;
        for k in 0..steps {
            let t = a + h * k as f64;
            let h1 = build(t + h * (0.5 - GAUSS_OFFSET))?;
            let h2 = build(t + h * (0.5 + GAUSS_OFFSET))?;
            let comm = &h2 * &h1 - &h1 * &h2;
            let kmat = (&h1 + &h2) * C64::new(0.5 * h, 0.0)
                + comm * C64::new(0.0, -COMMUTATOR_WEIGHT * h * h);
            psi = taylor_expm_action(&kmat, &psi);
        }
    }
    let out = PureState::new(basis.clone(), psi)?;
    check_norm(state.norm_sqr(), out.norm_sqr(), spec)?;
    Ok(out)
}

/// `exp(−iK) ψ` by Taylor series, for `‖K‖` of order one or less.
fn taylor_expm_action(k: &DMatrix<C64>, psi: &DVector<C64>) -> DVector<C64> {
    let mut term = psi.clone();
    let mut sum = psi.clone();
    let scale = psi.norm().max(f64::MIN_POSITIVE);
    for n in 1..60 {
        term = (k * &term) * C64::new(0.0, -1.0 / n as f64);
        sum += &term;
        if term.norm() < 1e-17 * scale {
            break;
        }
    }
    sum
}

/// States at each of `sample_times`, integrated incrementally from `t = 0`.
pub fn time_series(
    state0: &PureState,
    config: &SystemConfig,
    sample_times: &[f64],
    spec: &IntegratorSpec,
) -> Result<Vec<PureState>> {
    let window = config.window();
    for pair in sample_times.windows(2) {
        if pair[1] < pair[0] {
            return Err(Error::InvalidConfig(
                "sample times must be ascending".into(),
            ));
        }
    }
    if let Some(&bad) = sample_times
        .iter()
        .find(|&&t| !(0.0..=window * (1.0 + 1e-12)).contains(&t))
    {
        return Err(Error::TimeOutOfWindow { t: bad, window });
    }
    let mut out = Vec::with_capacity(sample_times.len());
    let mut current = state0.clone();
    let mut t_prev = 0.0;
    for &t in sample_times {
        current = propagate(&current, config, t_prev, t, spec)?;
        check_norm(state0.norm_sqr(), current.norm_sqr(), spec)?;
        out.push(current.clone());
        t_prev = t;
    }
    Ok(out)
}
