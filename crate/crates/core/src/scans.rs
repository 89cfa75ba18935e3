//! Parameter sweeps. Every scan evaluates its grid points independently (in
//! parallel through rayon) and assembles a [`SweepTable`] in grid order, so
//! serial and parallel runs give identical tables.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analytic::{
    alpha_weights, bloch_siegert_delta_eff, g_optimal, p_heralding, p_max, pairwise_negativity_wn,
    variance_law_infidelity, witness_from_fidelity, DEFAULT_KAPPA,
};
use crate::entanglement::{
    pairwise_negativity_from_ket, success_weighted_yield, von_neumann_entropy, PairNegativityReport,
};
use crate::evolve::{time_series, IntegratorSpec};
use crate::hamiltonian::{
    accumulated_area, Carrier, Model, PulseEnvelope, SystemConfig, DEFAULT_FULL_CUT,
};
use crate::herald::{
    branch_probabilities, compress_ket, project_all_ground, symmetric_w_target,
    target_manifold_weight, ElectronEncoding, HeraldResult, DEGENERATE_PROBABILITY,
};
use crate::hilbert::{build_basis, product_state, AtomicAmplitudes, PureState};
use crate::product::ProductSumState;
use crate::{Error, Result, C64, VERSION};

/// Truncation-edge population above which a run is rejected.
pub const EDGE_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub parameter_name: String,
    pub parameter_values: Vec<f64>,
    pub columns: Vec<Column>,
    /// Scalar results of the scan (maximum discrepancies, fitted slopes, ...).
    pub summary: BTreeMap<String, f64>,
    /// Scan parameters and integrator settings; enough to rerun the scan.
    pub manifest: serde_json::Value,
}

impl SweepTable {
    fn new(parameter_name: &str, parameter_values: Vec<f64>, manifest: serde_json::Value) -> Self {
        Self {
            parameter_name: parameter_name.to_string(),
            parameter_values,
            columns: Vec::new(),
            summary: BTreeMap::new(),
            manifest,
        }
    }

    fn push(&mut self, name: &str, values: Vec<f64>) {
        assert_eq!(
            values.len(),
            self.parameter_values.len(),
            "column {name} has the wrong length"
        );
        self.columns.push(Column {
            name: name.to_string(),
            values,
        });
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        if name == self.parameter_name {
            return Some(&self.parameter_values);
        }
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    /// Header names, parameter first.
    pub fn header(&self) -> Vec<&str> {
        std::iter::once(self.parameter_name.as_str())
            .chain(self.columns.iter().map(|c| c.name.as_str()))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.parameter_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parameter_values.is_empty()
    }

    /// Largest finite value of a column.
    pub fn max_of(&self, name: &str) -> Option<f64> {
        self.column(name)?
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .reduce(f64::max)
    }
}

/// Coupling model of a scan. The full model runs in carrier units with
/// `ω₀ = 1` and window `T = omega_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ScanModel {
    Rwa,
    Full { omega_t: f64 },
}

impl ScanModel {
    pub fn model(&self) -> Model {
        match self {
            Self::Rwa => Model::Rwa,
            Self::Full { .. } => Model::Full,
        }
    }
}

/// Symmetric square-pulse configuration for area `g` and detuning `δ`.
pub fn point_config(n: usize, g: f64, delta: f64, model: ScanModel) -> Result<SystemConfig> {
    let cfg = match model {
        ScanModel::Rwa => SystemConfig::symmetric(n, g, delta),
        ScanModel::Full { omega_t } => {
            if omega_t.is_nan() || omega_t <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "omega_t {omega_t} must be positive"
                )));
            }
            let detuning = 2.0 * delta / omega_t;
            let mut cfg = SystemConfig::symmetric_carrier(n, g, omega_t, Model::Full);
            for arm in &mut cfg.arms {
                arm.detuning = detuning;
            }
            cfg.carrier = Some(Carrier {
                omega: 1.0 + detuning,
                omega0: 1.0,
            });
            cfg
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Evaluate `f` on every grid value in parallel, keeping grid order and
/// naming the first failing point.
pub fn map_grid<T, F>(values: &[f64], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(f64) -> Result<T> + Sync,
{
    values
        .par_iter()
        .enumerate()
        .map(|(index, &value)| {
            f(value).map_err(|e| Error::ScanPoint {
                index,
                value,
                source: Box::new(e),
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// `points` uniformly spaced areas in `(0, π/2]`.
pub fn pulse_area_grid(points: usize) -> Vec<f64> {
    (1..=points)
        .map(|k| FRAC_PI_2 * k as f64 / points as f64)
        .collect()
}

/// `points` uniformly spaced values on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// `points` logarithmically spaced values on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = linear_grid(lo.ln(), hi.ln(), points)
        .into_iter()
        .map(f64::exp)
        .collect();
    if let Some(first) = grid.first_mut() {
        *first = lo;
    }
    if points > 1 {
        grid[points - 1] = hi;
    }
    grid
}

fn integrator_manifest(model: ScanModel) -> serde_json::Value {
    json!({
        "method": "magnus4_fixed_step",
        "max_step": "min(T/400, 0.01/(G0+|Delta|))",
        "fast_period_fraction": match model {
            ScanModel::Rwa => serde_json::Value::Null,
            ScanModel::Full { .. } => json!(crate::evolve::DEFAULT_FAST_PERIOD_FRACTION),
        },
        "tolerance": crate::evolve::DEFAULT_TOLERANCE,
    })
}

fn manifest(scan: &str, params: serde_json::Value, model: ScanModel) -> serde_json::Value {
    json!({
        "scan": scan,
        "version": VERSION,
        "parameters": params,
        "model": model,
        "integrator": integrator_manifest(model),
    })
}

/// Heralding observables of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldPoint {
    pub probability: f64,
    pub branch: Vec<C64>,
    pub edge_population: f64,
}

impl HeraldPoint {
    /// `|Σ_j w̄_j b_j|² / P` against the target weights `w_j`.
    pub fn conditional_fidelity(&self, target: &[C64]) -> Option<f64> {
        (self.probability >= DEGENERATE_PROBABILITY).then(|| {
            let overlap: C64 = target
                .iter()
                .zip(&self.branch)
                .map(|(w, b)| w.conj() * b)
                .sum();
            overlap.norm_sqr() / self.probability
        })
    }
}

pub fn herald_point(config: &SystemConfig) -> Result<HeraldPoint> {
    let spec = IntegratorSpec::for_config(config);
    let st = ProductSumState::evolve(config, &spec)?;
    let edge = st.edge_population();
    if edge > EDGE_LIMIT {
        return Err(Error::TruncationEdge {
            population: edge,
            limit: EDGE_LIMIT,
        });
    }
    Ok(HeraldPoint {
        probability: st.herald_probability(),
        branch: st.upper_branch_amplitudes(),
        edge_population: edge,
    })
}

fn nan_or(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .filter(|d| d.is_finite())
        .fold(0.0, f64::max)
}

/// Numeric vs analytic heralding probability over `g_grid` at common
/// detuning `delta`.
pub fn sweep_pulse_area(
    atomic: &AtomicAmplitudes,
    g_grid: &[f64],
    delta: f64,
    model: ScanModel,
) -> Result<SweepTable> {
    let n = atomic.excited.len();
    let points = map_grid(g_grid, |g| {
        herald_point(&point_config(n, g, delta, model)?.with_atomic(atomic.clone()))
    })?;
    let numeric: Vec<f64> = points.iter().map(|p| p.probability).collect();
    let analytic: Vec<f64> = g_grid.iter().map(|&g| p_heralding(n, g, delta)).collect();
    let err: Vec<f64> = numeric
        .iter()
        .zip(&analytic)
        .map(|(a, b)| (a - b).abs())
        .collect();
    let mut t = SweepTable::new(
        "g",
        g_grid.to_vec(),
        manifest(
            "sweep_area",
            json!({ "n": n, "g_grid": g_grid, "delta": delta, "atomic": atomic }),
            model,
        ),
    );
    t.summary
        .insert("max_abs_err".into(), max_abs_diff(&numeric, &analytic));
    t.push("p_numeric", numeric);
    t.push("p_analytic", analytic);
    t.push("abs_err", err);
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub n: usize,
    pub g_opt: f64,
    pub p_max: f64,
    pub evaluations: usize,
}

pub const COARSE_STEP: f64 = 0.01;
pub const GOLDEN_TOLERANCE: f64 = 1e-6;

/// Maximize the numeric heralding probability over `g ∈ (0, π/2]`: coarse grid
/// with step at most [`COARSE_STEP`], then golden-section refinement.
pub fn optimize_pulse_area(atomic: &AtomicAmplitudes, model: ScanModel) -> Result<Optimum> {
    let n = atomic.excited.len();
    let eval = |g: f64| -> Result<f64> {
        Ok(herald_point(&point_config(n, g, 0.0, model)?.with_atomic(atomic.clone()))?.probability)
    };
    let coarse_points = (FRAC_PI_2 / COARSE_STEP).ceil() as usize;
    let grid = pulse_area_grid(coarse_points);
    let values = map_grid(&grid, eval)?;
    let best = values
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > values[best] { i } else { best });
    let step = grid[0];
    let lo = (grid[best] - step).max(0.0);
    let hi = (grid[best] + step).min(FRAC_PI_2);
    let (g_opt, p, evals) = golden_section_max(eval, lo, hi, GOLDEN_TOLERANCE)?;
    let (g_opt, p) = if values[best] > p {
        (grid[best], values[best])
    } else {
        (g_opt, p)
    };
    Ok(Optimum {
        n,
        g_opt,
        p_max: p,
        evaluations: grid.len() + evals,
    })
}

/// Golden-section maximization on `[a, b]` until the bracket is below `tol`.
pub fn golden_section_max<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64, usize)>
where
    F: Fn(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut evals = 2;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
        evals += 1;
    }
    let x = 0.5 * (a + b);
    let fx = f(x)?;
    Ok((x, fx, evals + 1))
}

/// Numeric optimum for each N next to the closed forms.
pub fn optimize_table(ns: &[usize], model: ScanModel) -> Result<SweepTable> {
    let values: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let optima = ns
        .iter()
        .map(|&n| optimize_pulse_area(&AtomicAmplitudes::symmetric_w(n), model))
        .collect::<Result<Vec<_>>>()?;
    let mut t = SweepTable::new("n", values, manifest("optimize", json!({ "n": ns }), model));
    let g_num: Vec<f64> = optima.iter().map(|o| o.g_opt).collect();
    let p_num: Vec<f64> = optima.iter().map(|o| o.p_max).collect();
    let g_an: Vec<f64> = ns.iter().map(|&n| g_optimal(n)).collect();
    let p_an: Vec<f64> = ns.iter().map(|&n| p_max(n)).collect();
    t.summary
        .insert("max_g_err".into(), max_abs_diff(&g_num, &g_an));
    t.summary
        .insert("max_p_err".into(), max_abs_diff(&p_num, &p_an));
    t.push("g_opt", g_num);
    t.push("p_max", p_num);
    t.push("g_opt_analytic", g_an);
    t.push("p_max_analytic", p_an);
    Ok(t)
}

/// Common-detuning scan at fixed area.
pub fn sweep_detuning(
    atomic: &AtomicAmplitudes,
    g: f64,
    delta_grid: &[f64],
    model: ScanModel,
) -> Result<SweepTable> {
    if g.is_nan() || g <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "pulse area {g} must be positive"
        )));
    }
    let n = atomic.excited.len();
    let target = &atomic.excited;
    let points = map_grid(delta_grid, |d| {
        herald_point(&point_config(n, g, d, model)?.with_atomic(atomic.clone()))
    })?;
    let numeric: Vec<f64> = points.iter().map(|p| p.probability).collect();
    let analytic: Vec<f64> = delta_grid.iter().map(|&d| p_heralding(n, g, d)).collect();
    let fidelity: Vec<f64> = points
        .iter()
        .map(|p| nan_or(p.conditional_fidelity(target)))
        .collect();
    let witness: Vec<f64> = fidelity
        .iter()
        .map(|&f| witness_from_fidelity(n, f))
        .collect();
    let mut t = SweepTable::new(
        "delta",
        delta_grid.to_vec(),
        manifest(
            "sweep_detuning",
            json!({ "n": n, "g": g, "delta_grid": delta_grid, "atomic": atomic }),
            model,
        ),
    );
    t.summary
        .insert("max_abs_err".into(), max_abs_diff(&numeric, &analytic));
    t.summary.insert(
        "max_fidelity_defect".into(),
        fidelity
            .iter()
            .map(|f| (1.0 - f).abs())
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max),
    );
    t.push("p_numeric", numeric.clone());
    t.push("p_analytic", analytic.clone());
    t.push(
        "abs_err",
        numeric
            .iter()
            .zip(&analytic)
            .map(|(a, b)| (a - b).abs())
            .collect(),
    );
    t.push("fidelity", fidelity);
    t.push("witness", witness);
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MismatchKind {
    /// `g_j = g(1 + η c_j)`.
    Coupling,
    /// `δ_j = δ + ε c_j` (dimensionless detuning mismatch).
    Detuning,
}

/// Antisymmetric profile `c_j` running from +1 on the first arm to −1 on the
/// last; for three arms `(1, 0, −1)`.
pub fn mismatch_profile(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n)
        .map(|j| 1.0 - 2.0 * j as f64 / (n - 1) as f64)
        .collect()
}

/// Per-arm areas and detunings for one mismatch value.
pub fn mismatch_arms(
    kind: MismatchKind,
    n: usize,
    g: f64,
    delta: f64,
    value: f64,
) -> (Vec<f64>, Vec<f64>) {
    let c = mismatch_profile(n);
    match kind {
        MismatchKind::Coupling => (
            c.iter().map(|cj| g * (1.0 + value * cj)).collect(),
            vec![delta; n],
        ),
        MismatchKind::Detuning => (vec![g; n], c.iter().map(|cj| delta + value * cj).collect()),
    }
}

/// Coupling- or detuning-mismatch scan with numeric and closed-form fidelities.
pub fn mismatch_scan(
    kind: MismatchKind,
    grid: &[f64],
    atomic: &AtomicAmplitudes,
    g: f64,
    delta: f64,
) -> Result<SweepTable> {
    let n = atomic.excited.len();
    let points = map_grid(grid, |v| {
        let (areas, deltas) = mismatch_arms(kind, n, g, delta, v);
        let cfg = SystemConfig::square_arms(&areas, &deltas).with_atomic(atomic.clone());
        cfg.validate()?;
        let point = herald_point(&cfg)?;
        let aw = alpha_weights(&areas, &deltas, &vec![0.0; n]);
        let closed = weighted_mismatch_fidelity(&aw.alpha, &atomic.excited)?;
        let input_weights: Vec<f64> = atomic
            .excited
            .iter()
            .zip(&aw.alpha)
            .map(|(c, a)| (c * a).norm_sqr())
            .collect();
        let total: f64 = input_weights.iter().sum();
        Ok((
            point,
            input_weights
                .iter()
                .map(|w| w / total)
                .collect::<Vec<f64>>(),
            closed,
        ))
    })?;
    let numeric: Vec<f64> = points
        .iter()
        .map(|(p, _, _)| nan_or(p.conditional_fidelity(&atomic.excited)))
        .collect();
    let closed: Vec<f64> = points.iter().map(|(_, _, f)| *f).collect();
    let param = match kind {
        MismatchKind::Coupling => "eta",
        MismatchKind::Detuning => "delta_mismatch",
    };
    let mut t = SweepTable::new(
        param,
        grid.to_vec(),
        manifest(
            "mismatch",
            json!({ "kind": kind, "n": n, "g": g, "delta": delta, "grid": grid, "atomic": atomic }),
            ScanModel::Rwa,
        ),
    );
    t.summary
        .insert("max_fidelity_err".into(), max_abs_diff(&numeric, &closed));
    t.push(
        "p_numeric",
        points.iter().map(|(p, _, _)| p.probability).collect(),
    );
    t.push("fidelity_numeric", numeric.clone());
    t.push("fidelity_analytic", closed);
    for j in 0..n {
        t.push(
            &format!("weight_{}", j + 1),
            points.iter().map(|(_, w, _)| w[j]).collect(),
        );
    }
    t.push(
        "witness",
        numeric
            .iter()
            .map(|&f| witness_from_fidelity(n, f))
            .collect(),
    );
    Ok(t)
}

/// Closed-form conditional fidelity to the input-weighted target when arm `j`
/// carries the heralded pathway amplitude `a_j` (phase-free) and the input
/// amplitude `c_j`: `|Σ |c_j|² a_j|² / Σ |c_j|² |a_j|²`. For a phased W input
/// this is [`crate::analytic::fidelity_perturbed`].
pub fn weighted_mismatch_fidelity(pathways: &[C64], inputs: &[C64]) -> Result<f64> {
    let total: f64 = pathways
        .iter()
        .zip(inputs)
        .map(|(a, c)| c.norm_sqr() * a.norm_sqr())
        .sum();
    if total == 0.0 {
        return Err(Error::DegenerateHerald(0.0));
    }
    let coherent: C64 = pathways
        .iter()
        .zip(inputs)
        .map(|(a, c)| a * c.norm_sqr())
        .sum();
    Ok(coherent.norm_sqr() / total)
}

/// Numeric check of the second-order variance law at one mismatch value:
/// returns `(1 − F_numeric, (1/N) Σ |ε_j − ε̄|²)` with `ε` taken from the
/// numerically heralded branch.
pub fn variance_law_check(
    kind: MismatchKind,
    n: usize,
    g: f64,
    delta: f64,
    value: f64,
) -> Result<(f64, f64)> {
    let (areas, deltas) = mismatch_arms(kind, n, g, delta, value);
    let cfg = SystemConfig::square_arms(&areas, &deltas);
    let point = herald_point(&cfg)?;
    let target = vec![C64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    let fidelity = point
        .conditional_fidelity(&target)
        .ok_or(Error::DegenerateHerald(point.probability))?;
    let mean: C64 = point.branch.iter().sum::<C64>() / n as f64;
    let eps: Vec<C64> = point.branch.iter().map(|b| b / mean - 1.0).collect();
    // The numeric herald weight outside the upper manifold is zero for these
    // runs, so 1 − F is governed by the pathway imbalance alone.
    Ok((1.0 - fidelity, variance_law_infidelity(&eps)))
}

/// Trajectory observables of the symmetric resonant three-arm protocol.
pub fn time_resolved_trace(g_total: f64, samples: usize) -> Result<SweepTable> {
    let n = 3;
    let cfg = SystemConfig::symmetric(n, g_total, 0.0);
    let basis = build_basis(&cfg)?;
    let s0 = product_state(&basis, &[0; 3], &cfg.atomic)?;
    let times = linear_grid(0.0, 1.0, samples);
    let spec = IntegratorSpec::for_config(&cfg);
    let states = time_series(&s0, &cfg, &times, &spec)?;
    let rows = states
        .par_iter()
        .enumerate()
        .map(|(index, s)| {
            trace_row(s).map_err(|e| Error::ScanPoint {
                index,
                value: times[index],
                source: Box::new(e),
            })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut t = SweepTable::new(
        "t",
        times.clone(),
        manifest(
            "time_trace",
            json!({ "n": n, "g": g_total, "samples": samples }),
            ScanModel::Rwa,
        ),
    );
    let col = |f: &dyn Fn(&TraceRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let constant = pairwise_negativity_wn(n);
    let yield_analytic: Vec<f64> = times
        .iter()
        .map(|&s| constant * p_heralding(n, g_total * s, 0.0))
        .collect();
    t.push("g_t", times.iter().map(|s| g_total * s).collect());
    t.push("atomic_neg", col(&|r| r.atomic.average));
    t.push("electron_neg_uncond", col(&|r| r.electron_uncond.average));
    t.push("electron_neg_cond", col(&|r| r.cond_neg));
    t.push("neg_analytic", vec![constant; times.len()]);
    t.push("yield_numeric", col(&|r| r.yield_numeric));
    t.push("yield_analytic", yield_analytic.clone());
    t.push("p_herald", col(&|r| r.probability));
    t.push(
        "p_analytic",
        times
            .iter()
            .map(|&s| p_heralding(n, g_total * s, 0.0))
            .collect(),
    );
    t.push("fidelity_cond", col(&|r| r.fidelity));
    t.push("witness", col(&|r| r.witness));
    t.push("fidelity_uncond", col(&|r| r.fidelity_uncond));
    t.push("branch_sum", col(&|r| r.branch_sum));
    t.push("norm", states.iter().map(|s| s.norm_sqr()).collect());

    let argmax = |v: &[f64]| {
        v.iter()
            .enumerate()
            .filter(|(_, x)| x.is_finite())
            .fold((0, f64::MIN), |b, (i, &x)| if x > b.1 { (i, x) } else { b })
            .0
    };
    let uncond = col(&|r| r.electron_uncond.average);
    let yields = col(&|r| r.yield_numeric);
    t.summary
        .insert("yield_peak_t".into(), times[argmax(&yields)]);
    t.summary
        .insert("uncond_neg_peak_t".into(), times[argmax(&uncond)]);
    let valid =
        |f: &dyn Fn(&TraceRow) -> f64| rows.iter().filter(|r| r.valid).map(f).fold(0.0, f64::max);
    t.summary.insert(
        "max_cond_neg_err".into(),
        valid(&|r| (r.cond_neg - constant).abs()),
    );
    t.summary.insert(
        "max_fidelity_defect".into(),
        valid(&|r| (1.0 - r.fidelity).abs()),
    );
    t.summary.insert(
        "max_witness_err".into(),
        valid(&|r| (r.witness + 1.0 / 3.0).abs()),
    );
    t.summary.insert(
        "max_uncond_identity_err".into(),
        rows.iter()
            .map(|r| (r.fidelity_uncond - r.probability).abs())
            .fold(0.0, f64::max),
    );
    t.summary.insert(
        "max_branch_sum_err".into(),
        rows.iter()
            .map(|r| (r.branch_sum - 1.0).abs())
            .fold(0.0, f64::max),
    );
    t.summary.insert(
        "max_yield_err".into(),
        max_abs_diff(&yields, &yield_analytic),
    );
    Ok(t)
}

struct TraceRow {
    atomic: PairNegativityReport,
    electron_uncond: PairNegativityReport,
    valid: bool,
    cond_neg: f64,
    yield_numeric: f64,
    probability: f64,
    fidelity: f64,
    witness: f64,
    fidelity_uncond: f64,
    branch_sum: f64,
}

fn trace_row(s: &PureState) -> Result<TraceRow> {
    let n = s.basis.arm_count();
    let ket = s.as_ket();
    let tls: Vec<usize> = (0..n).map(|j| s.basis.tls_subsystem(j)).collect();
    let electrons: Vec<usize> = (0..n).collect();
    let atomic = pairwise_negativity_from_ket(&ket, &tls)?;
    let electron_uncond = pairwise_negativity_from_ket(&ket, &electrons)?;
    let herald = project_all_ground(s);
    let w_ladder = symmetric_w_target(
        n,
        ElectronEncoding::Ladder {
            cut: s.basis.sideband_cut(),
        },
    );
    let fidelity_uncond = target_manifold_weight(s, &w_ladder)?;
    let branch_sum = branch_probabilities(s).iter().sum();
    let (valid, cond_neg, fidelity, witness) = match conditional_measures(&herald, n)? {
        Some((neg, fid)) => (true, neg, fid, witness_from_fidelity(n, fid)),
        None => (false, f64::NAN, f64::NAN, f64::NAN),
    };
    Ok(TraceRow {
        atomic,
        electron_uncond,
        valid,
        cond_neg,
        yield_numeric: if valid {
            success_weighted_yield(herald.probability, cond_neg)
        } else {
            f64::NAN
        },
        probability: herald.probability,
        fidelity,
        witness,
        fidelity_uncond,
        branch_sum,
    })
}

/// Average pair negativity of the `{0,+}`-compressed conditional state and its
/// fidelity to the symmetric target, or `None` for an inaccessible herald.
fn conditional_measures(herald: &HeraldResult, n: usize) -> Result<Option<(f64, f64)>> {
    let Some(ket) = herald.conditional.as_ref() else {
        return Ok(None);
    };
    let (q, leakage) = compress_ket(ket, herald.sideband_cut)?;
    if leakage > crate::entanglement::LEAKAGE_LIMIT {
        return Err(Error::OutOfManifold(leakage));
    }
    let parties: Vec<usize> = (0..n).collect();
    let neg = pairwise_negativity_from_ket(&q, &parties)?.average;
    let w = symmetric_w_target(
        n,
        ElectronEncoding::Ladder {
            cut: herald.sideband_cut,
        },
    );
    Ok(Some((neg, w.inner(ket).norm_sqr())))
}

/// Weighted three-arm resources `(cos θ, sin θ cos φ, sin θ sin φ)` transferred
/// at area `g`.
pub fn weighted_resource_scan(theta_grid: &[f64], phi_grid: &[f64], g: f64) -> Result<SweepTable> {
    let pairs: Vec<(f64, f64)> = theta_grid
        .iter()
        .flat_map(|&t| phi_grid.iter().map(move |&p| (t, p)))
        .collect();
    let indices: Vec<f64> = (0..pairs.len()).map(|i| i as f64).collect();
    let rows = map_grid(&indices, |i| {
        weighted_row(pairs[i as usize].0, pairs[i as usize].1, g)
    })?;
    let mut t = SweepTable::new(
        "theta",
        pairs.iter().map(|p| p.0).collect(),
        manifest(
            "weighted_scan",
            json!({ "theta_grid": theta_grid, "phi_grid": phi_grid, "g": g }),
            ScanModel::Rwa,
        ),
    );
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
    let names = [
        "atomic_neg",
        "electron_neg",
        "atomic_s1",
        "atomic_s2",
        "atomic_s3",
        "electron_s1",
        "electron_s2",
        "electron_s3",
        "p_herald",
        "fidelity",
    ];
    t.push("phi", pairs.iter().map(|p| p.1).collect());
    for (k, name) in names.iter().enumerate() {
        t.push(name, col(k));
    }
    t.summary
        .insert("max_neg_diff".into(), max_abs_diff(&col(0), &col(1)));
    let s_diff = (0..3)
        .map(|j| max_abs_diff(&col(2 + j), &col(5 + j)))
        .fold(0.0, f64::max);
    t.summary.insert("max_entropy_diff".into(), s_diff);
    t.summary.insert(
        "max_p_err".into(),
        col(8)
            .iter()
            .map(|p| (p - p_heralding(3, g, 0.0)).abs())
            .fold(0.0, f64::max),
    );
    t.summary.insert(
        "max_fidelity_defect".into(),
        col(9).iter().map(|f| (1.0 - f).abs()).fold(0.0, f64::max),
    );
    Ok(t)
}

fn weighted_row(theta: f64, phi: f64, g: f64) -> Result<Vec<f64>> {
    let atomic = AtomicAmplitudes::tripartite_angles(theta, phi);
    let cfg = SystemConfig::symmetric(3, g, 0.0).with_atomic(atomic.clone());
    let basis = build_basis(&cfg)?;
    let s0 = product_state(&basis, &[0; 3], &atomic)?;
    let s = crate::evolve::propagate(&s0, &cfg, 0.0, 1.0, &IntegratorSpec::for_config(&cfg))?;
    let ket0 = s0.as_ket();
    let tls: Vec<usize> = (0..3).map(|j| basis.tls_subsystem(j)).collect();
    let atomic_neg = pairwise_negativity_from_ket(&ket0, &tls)?.average;
    let atomic_s: Vec<f64> = tls
        .iter()
        .map(|&k| ket0.reduced_density(&[k]).map(|r| von_neumann_entropy(&r)))
        .collect::<Result<_>>()?;
    let herald = project_all_ground(&s);
    let cond = herald
        .conditional
        .as_ref()
        .ok_or(Error::DegenerateHerald(herald.probability))?;
    let (q, leakage) = compress_ket(cond, basis.sideband_cut())?;
    if leakage > crate::entanglement::LEAKAGE_LIMIT {
        return Err(Error::OutOfManifold(leakage));
    }
    let electron_neg = pairwise_negativity_from_ket(&q, &[0, 1, 2])?.average;
    let electron_s: Vec<f64> = (0..3)
        .map(|k| q.reduced_density(&[k]).map(|r| von_neumann_entropy(&r)))
        .collect::<Result<_>>()?;
    let target = crate::herald::target_w_state(3, &atomic.excited, ElectronEncoding::Qubit)?;
    let fidelity = target.inner(&q).norm_sqr() * (1.0 - leakage);
    let mut row = vec![atomic_neg, electron_neg];
    row.extend(atomic_s);
    row.extend(electron_s);
    row.push(herald.probability);
    row.push(fidelity);
    Ok(row)
}

/// Least-squares slope of `ln y` against `ln x` with the residual standard error.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    let n = pts.len() as f64;
    let xm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - xm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let rss: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    (slope, (rss / (n - 2.0)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeyondRwaParams {
    pub n: usize,
    pub g: f64,
    pub kappa: f64,
    pub omega_t_min: f64,
    pub omega_t_max: f64,
    pub points: usize,
    pub sideband_cut: usize,
    /// Sideband cut for the truncation cross-check at the grid ends.
    pub check_cut: usize,
}

impl Default for BeyondRwaParams {
    fn default() -> Self {
        Self {
            n: 3,
            g: 0.6,
            kappa: DEFAULT_KAPPA,
            omega_t_min: 20.0,
            omega_t_max: 200.0,
            points: 201,
            sideband_cut: DEFAULT_FULL_CUT,
            check_cut: 2 * DEFAULT_FULL_CUT,
        }
    }
}

/// Full-Hamiltonian heralding probability against the RWA and Bloch–Siegert
/// predictions over `ωT` (resonant, `ω = ω₀ = 1`).
pub fn beyond_rwa_comparison(params: &BeyondRwaParams) -> Result<SweepTable> {
    let BeyondRwaParams { n, g, kappa, .. } = *params;
    let grid = log_grid(params.omega_t_min, params.omega_t_max, params.points);
    let full_cfg = |wt: f64, cut: usize| -> Result<SystemConfig> {
        let cfg = point_config(n, g, 0.0, ScanModel::Full { omega_t: wt })?.with_cut(cut);
        cfg.validate()?;
        Ok(cfg)
    };
    let rows = map_grid(&grid, |wt| {
        let full = herald_point(&full_cfg(wt, params.sideband_cut)?)?;
        let rwa = herald_point(
            &point_config(n, g, 0.0, ScanModel::Full { omega_t: wt })?.with_model(Model::Rwa),
        )?;
        let omega_plus = 2.0;
        let p_bs = p_heralding(
            n,
            g,
            bloch_siegert_delta_eff(g, 0.0, wt, omega_plus, kappa)?,
        );
        Ok([
            full.probability,
            rwa.probability,
            p_heralding(n, g, 0.0),
            p_bs,
            full.edge_population,
        ])
    })?;
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
    let (p_full, p_rwa, p_an, p_bs) = (col(0), col(1), col(2), col(3));
    let d_rwa: Vec<f64> = p_full
        .iter()
        .zip(&p_an)
        .map(|(a, b)| (a - b).abs())
        .collect();
    let d_bs: Vec<f64> = p_full
        .iter()
        .zip(&p_bs)
        .map(|(a, b)| (a - b).abs())
        .collect();

    let decade_start = params.omega_t_max / 10.0;
    let in_decade: Vec<usize> = (0..grid.len())
        .filter(|&i| grid[i] >= decade_start * (1.0 - 1e-12))
        .collect();
    let pick = |v: &[f64]| in_decade.iter().map(|&i| v[i]).collect::<Vec<f64>>();
    let (slope_rwa, se_rwa) = loglog_fit(&pick(&grid), &pick(&d_rwa));
    let (slope_bs, se_bs) = loglog_fit(&pick(&grid), &pick(&d_bs));

    let mut cut_diff: f64 = 0.0;
    for &wt in &[params.omega_t_min, params.omega_t_max] {
        let a = herald_point(&full_cfg(wt, params.sideband_cut)?)?.probability;
        let b = herald_point(&full_cfg(wt, params.check_cut)?)?.probability;
        cut_diff = cut_diff.max((a - b).abs());
    }

    let mut t = SweepTable::new(
        "omega_t",
        grid,
        manifest(
            "beyond_rwa",
            serde_json::to_value(params).expect("plain data"),
            ScanModel::Full { omega_t: f64::NAN },
        ),
    );
    t.manifest["model"] = json!({ "model": "full", "omega": 1.0, "omega0": 1.0 });
    let last = p_full.len() - 1;
    let endpoint_spread = [p_full[last], p_rwa[last], p_an[last], p_bs[last]];
    let spread = endpoint_spread.iter().cloned().fold(f64::MIN, f64::max)
        - endpoint_spread.iter().cloned().fold(f64::MAX, f64::min);
    t.summary.insert("slope_rwa".into(), slope_rwa);
    t.summary.insert("slope_bs".into(), slope_bs);
    t.summary.insert("slope_rwa_residual_se".into(), se_rwa);
    t.summary.insert("slope_bs_residual_se".into(), se_bs);
    t.summary
        .insert("max_rwa_numeric_err".into(), max_abs_diff(&p_rwa, &p_an));
    t.summary.insert("endpoint_spread".into(), spread);
    t.summary.insert("cut_check_diff".into(), cut_diff);
    t.summary.insert(
        "max_edge_population".into(),
        col(4).iter().cloned().fold(0.0, f64::max),
    );
    t.push("p_full", p_full);
    t.push("p_rwa_numeric", p_rwa);
    t.push("p_rwa_analytic", p_an);
    t.push("p_bs", p_bs);
    t.push("dp_rwa", d_rwa);
    t.push("dp_bs", d_bs);
    t.push("edge_population", col(4));
    Ok(t)
}

/// Final average pairwise negativity of the unconditional electron state for a
/// three-arm run.
pub fn final_unconditional_negativity(cfg: &SystemConfig) -> Result<f64> {
    let basis = build_basis(cfg)?;
    let s0 = product_state(&basis, &vec![0; cfg.arm_count()], &cfg.atomic)?;
    let s = crate::evolve::propagate(
        &s0,
        cfg,
        0.0,
        cfg.window(),
        &IntegratorSpec::for_config(cfg),
    )?;
    let electrons: Vec<usize> = (0..cfg.arm_count()).collect();
    Ok(pairwise_negativity_from_ket(&s.as_ket(), &electrons)?.average)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianScan {
    pub width: SweepTable,
    pub detuning: SweepTable,
}

/// Fixed-peak Gaussian envelopes on a unit window with `G_max T = peak_area`.
/// The width table runs over `τ/T` at zero detuning; the detuning table runs
/// over `δ` at `τ/T = detuning_width` next to the square pulse of the same peak.
pub fn gaussian_width_scan(
    tau_grid: &[f64],
    delta_grid: &[f64],
    peak_area: f64,
    detuning_width: f64,
) -> Result<GaussianScan> {
    let n = 3;
    let gaussian_cfg = |tau: f64, delta: f64| {
        SystemConfig::symmetric(n, peak_area, delta)
            .with_envelope(PulseEnvelope::gaussian(peak_area, 1.0, tau))
    };
    let width_rows = map_grid(tau_grid, |tau| {
        let cfg = gaussian_cfg(tau, 0.0);
        cfg.validate()?;
        let area = accumulated_area(&cfg.arms[0].envelope, 1.0)?;
        Ok([final_unconditional_negativity(&cfg)?, area])
    })?;
    let params = json!({
        "n": n, "peak_area": peak_area, "window": 1.0, "tau_grid": tau_grid, "delta_grid": delta_grid,
        "detuning_width": detuning_width,
    });
    let mut width = SweepTable::new(
        "tau_over_t",
        tau_grid.to_vec(),
        manifest("gaussian", params.clone(), ScanModel::Rwa),
    );
    let neg: Vec<f64> = width_rows.iter().map(|r| r[0]).collect();
    let worst_drop = neg.windows(2).map(|w| w[0] - w[1]).fold(f64::MIN, f64::max);
    width
        .summary
        .insert("largest_decrease".into(), worst_drop.max(0.0));
    width.push("neg_gaussian", neg);
    width.push("area", width_rows.iter().map(|r| r[1]).collect());

    let det_rows = map_grid(delta_grid, |d| {
        let g = final_unconditional_negativity(&gaussian_cfg(detuning_width, d))?;
        let s = final_unconditional_negativity(&SystemConfig::symmetric(n, peak_area, d))?;
        Ok([g, s])
    })?;
    let mut detuning = SweepTable::new(
        "delta",
        delta_grid.to_vec(),
        manifest("gaussian", params, ScanModel::Rwa),
    );
    detuning.push("neg_gaussian", det_rows.iter().map(|r| r[0]).collect());
    detuning.push("neg_square", det_rows.iter().map(|r| r[1]).collect());
    Ok(GaussianScan { width, detuning })
}
