//! Closed-form constants, thresholds and rates for both network models, and
//! trajectory-level checks of the dissipativity and synchronization results.
//!
//! Every check reports the measured value, the bound it was compared to, and
//! a margin defined as `bound / measured` (a check passes when the margin is
//! at least one; an all-zero measurement gives an infinite margin).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::integrators::{self, IntegrationError, IntegratorSpec};
use crate::model::{AnyParams, MemristiveParams, ModelError, ModelParams, NetworkState};
use crate::sampling::BallSampler;
use crate::special::{self, SpecialFnError};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Special(#[from] SpecialFnError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error("trajectory too short: tail starts at {tail_start} ms but absorbing entry needs {entry_time} ms")]
    TooShort { tail_start: f64, entry_time: f64 },
}

pub type Result<T> = std::result::Result<T, AnalysisError>;

/// Relative tolerance on envelope checks.
pub const ENVELOPE_REL_TOL: f64 = 1e-6;
/// Absolute floor on envelope checks, absorbing rounding noise near zero gaps.
pub const ENVELOPE_ABS_FLOOR: f64 = 1e-12;
/// Default fraction of the run used as the "limsup" tail window.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.25;
/// Minimum tail window length in ms, for runs of at least twice this length.
pub const MIN_TAIL_MS: f64 = 50.0;

fn require(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(AnalysisError::Domain(msg.into()))
    }
}

fn log_plus(x: f64) -> f64 {
    if x > 1.0 {
        x.ln()
    } else {
        0.0
    }
}

/// `a0 + λ²H²/(2τ_K)`, the intrinsic gap damping collected in the threshold.
fn intrinsic_damping(p: &ModelParams) -> f64 {
    p.a0 + p.lambda * p.lambda * p.h * p.h / (2.0 * p.tau_k)
}

/// Gap-growth constant Q. The `g_K λ H |E_K|` term uses |λ| so that Q is a
/// sum of non-negative terms for either sign of λ.
pub fn compute_q(p: &ModelParams) -> Result<f64> {
    require(p.a2 > 0.0, "a2 must be positive")?;
    require(p.e_na != 0.0, "E_Na must be nonzero")?;
    let gkl = p.g_k * p.lambda * p.h;
    Ok(p.g_k * (1.0 + p.h)
        + (p.a1 * p.e_na).abs()
        + p.g_k * p.lambda.abs() * p.h * p.e_k.abs()
        + 6.0 * p.a1 * p.a1 / p.a2
        + 6.0 * p.a2 / (p.e_na * p.e_na)
        + 6.0 / p.a2 * gkl * gkl)
}

/// Sufficient coupling threshold P* for exponential synchronization.
pub fn threshold_p_star(p: &ModelParams) -> Result<f64> {
    require(p.tau_k > 0.0, "tau_K must be positive")?;
    require(p.n >= 2, "n must be at least 2")?;
    let q = compute_q(p)?;
    Ok(((q - intrinsic_damping(p)) / p.n as f64).max(0.0))
}

/// Exponential synchronization rate μ(P). Positive exactly when P > P*
/// (or when P* = 0 and the second branch is positive).
pub fn rate_mu(p: &ModelParams) -> Result<f64> {
    let q = compute_q(p)?;
    let second = intrinsic_damping(p) + p.n as f64 * p.p - q;
    Ok((1.0 / (2.0 * p.tau_k)).min(second))
}

fn sqrt_one_plus_h2(p: &ModelParams) -> f64 {
    (1.0 + p.h * p.h).sqrt()
}

fn quartic_term(p: &ModelParams) -> f64 {
    let c = p.a1 + p.e_na * p.a2;
    let half = p.a2 / 2.0;
    2.0 * c.powi(4) / (half * half * half)
}

/// Radius² G of the absorbing ball, evaluated as printed.
pub fn absorbing_bound_g(p: &ModelParams) -> Result<f64> {
    require(p.a0 > 0.0 && p.a2 > 0.0, "a0 and a2 must be positive")?;
    require(p.e_na != 0.0, "E_Na must be nonzero")?;
    let s = sqrt_one_plus_h2(p);
    let first = (p.e_na.abs() * p.a0 + p.g_k * s * p.e_k.abs() + p.j.abs()).powi(2) / (p.a0 * p.a0);
    let second = (p.e_na * p.a1).abs() + p.g_k * s;
    let per_neuron = first + second * second / (p.a0 * p.a2) + quartic_term(p) / p.a0;
    Ok(1.0 + p.n as f64 * p.h * p.h + p.n as f64 * per_neuron)
}

/// M(R⁰): the constant driving the transient bound, depending on the initial
/// recovery currents.
pub fn transient_constant_m(p: &ModelParams, r0: &[f64]) -> f64 {
    let quart = quartic_term(p);
    r0.iter()
        .map(|ri| {
            let s = (ri * ri + p.h * p.h).sqrt();
            let a = p.e_na.abs() * p.a0 + p.g_k * s * p.e_k.abs() + p.j.abs();
            let b = (p.e_na * p.a1).abs() + p.g_k * s;
            a * a / p.a0 + b * b / p.a2 + quart
        })
        .sum()
}

/// Pointwise bound on ‖(V(t), R(t))‖² for the classical network.
pub fn transient_bound(p: &ModelParams, y0: &NetworkState, t: f64) -> Result<f64> {
    require(t >= 0.0, "t must be non-negative")?;
    y0.check_dims(p.n)?;
    let ev = (-p.a0 * t).exp();
    let er = (-t / p.tau_k).exp();
    let decaying: f64 = y0.v.iter().zip(&y0.r).map(|(v, r)| v * v * ev + r * r * er).sum();
    Ok(decaying + transient_constant_m(p, &y0.r) / p.a0 + p.n as f64 * p.h * p.h)
}

/// Entry time T_B into the absorbing ball from the ball of radius² `l`.
pub fn absorbing_entry_time(p: &ModelParams, l: f64) -> Result<f64> {
    require(l > 0.0, "L must be positive")?;
    let g = absorbing_bound_g(p)?;
    Ok((1.0 / p.a0).max(p.tau_k) * log_plus(l / g))
}

/// Time T₀ after which |Rᵢ(0)| e^{-t/(2τ_K)} ≤ 1 for every neuron.
pub fn transient_time_t0(y0: &NetworkState, p: &ModelParams) -> f64 {
    let rmax = y0.r.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    2.0 * p.tau_k * log_plus(rmax)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalBounds {
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "P_star")]
    pub p_star: f64,
    pub mu: f64,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "M_R0", skip_serializing_if = "Option::is_none")]
    pub m_r0: Option<f64>,
    #[serde(rename = "T_B", skip_serializing_if = "Option::is_none")]
    pub t_b: Option<f64>,
    #[serde(rename = "T_0", skip_serializing_if = "Option::is_none")]
    pub t_0: Option<f64>,
}

/// All classical constants; the initial-data dependent ones are filled in
/// when `y0` is given.
pub fn classical_bounds(p: &ModelParams, y0: Option<&NetworkState>) -> Result<ClassicalBounds> {
    let q = compute_q(p)?;
    let g = absorbing_bound_g(p)?;
    let (m_r0, t_b, t_0) = match y0 {
        Some(s) => {
            s.check_dims(p.n)?;
            let l = s.norm_sq_vr().max(f64::MIN_POSITIVE);
            (
                Some(transient_constant_m(p, &s.r)),
                Some(absorbing_entry_time(p, l)?),
                Some(transient_time_t0(s, p)),
            )
        }
        None => (None, None, None),
    };
    Ok(ClassicalBounds {
        q,
        p_star: threshold_p_star(p)?,
        mu: rate_mu(p)?,
        g,
        m_r0,
        t_b,
        t_0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalBounds {
    #[serde(rename = "G_alpha")]
    pub g_alpha: f64,
    #[serde(rename = "M_star_R0", skip_serializing_if = "Option::is_none")]
    pub m_star_r0: Option<f64>,
    #[serde(rename = "P_star_frac")]
    pub p_star_frac: f64,
    pub delta: f64,
    pub rho_bound: f64,
    #[serde(rename = "T_0", skip_serializing_if = "Option::is_none")]
    pub t_0: Option<f64>,
}

/// `a0 - k/β`, the effective decay of Σ V² in the memristive network.
fn effective_decay(mp: &MemristiveParams) -> Result<f64> {
    mp.check_hypothesis()?;
    Ok(mp.base.a0 - mp.k / mp.beta)
}

/// M*(R⁰) for the memristive network.
pub fn transient_constant_m_star(mp: &MemristiveParams, r0: &[f64]) -> Result<f64> {
    let p = &mp.base;
    let d = effective_decay(mp)?;
    let quart = quartic_term(p);
    Ok(r0
        .iter()
        .map(|ri| {
            let s = (ri * ri + p.h * p.h).sqrt();
            let a = p.e_na.abs() * d + p.g_k * s * p.e_k.abs() + p.j.abs();
            let b = (p.e_na * p.a1).abs() + p.g_k * s;
            a * a / d + b * b / p.a2 + quart
        })
        .sum())
}

/// Absorbing radius² G_α of the memristive network.
pub fn absorbing_bound_g_alpha(mp: &MemristiveParams) -> Result<f64> {
    let p = &mp.base;
    let d = effective_decay(mp)?;
    let ga = special::gamma(mp.alpha)?;
    let s = sqrt_one_plus_h2(p);
    let first = (p.e_na.abs() * d + p.g_k * s * p.e_k.abs() + p.j.abs()).powi(2) * ga / (d * d);
    let b = (p.e_na * p.a1).abs() + p.g_k * s;
    let second = ga / d * (b * b / p.a2 + quartic_term(p));
    Ok(1.0 + p.n as f64 * p.h * p.h + p.n as f64 * (first + second))
}

/// Memristive synchronization threshold P_*.
pub fn threshold_p_star_frac(mp: &MemristiveParams) -> Result<f64> {
    let p = &mp.base;
    require(p.n >= 2, "n must be at least 2")?;
    let q = compute_q(p)?;
    Ok(((q + mp.k / (2.0 * mp.beta) - intrinsic_damping(p)) / p.n as f64).max(0.0))
}

/// δ(P) in the memristive rate.
pub fn delta_p(mp: &MemristiveParams) -> Result<f64> {
    let p = &mp.base;
    let q = compute_q(p)?;
    let second = intrinsic_damping(p) + p.n as f64 * p.p - q - mp.k / (2.0 * mp.beta);
    Ok((1.0 / (2.0 * p.tau_k)).min(second))
}

/// Ultimate bound on ρ²: `1 + (G_α/b²)·maxᵢγᵢ²·Γ(α)`.
pub fn rho_bound(mp: &MemristiveParams) -> Result<f64> {
    let g_alpha = absorbing_bound_g_alpha(mp)?;
    let gmax = mp.gamma.iter().fold(0.0f64, |m, g| m.max(g * g));
    Ok(1.0 + g_alpha / (mp.b * mp.b) * gmax * special::gamma(mp.alpha)?)
}

pub fn fractional_bounds(mp: &MemristiveParams, y0: Option<&NetworkState>) -> Result<FractionalBounds> {
    mp.validate()?;
    mp.check_hypothesis()?;
    let (m_star_r0, t_0) = match y0 {
        Some(s) => {
            s.check_dims(mp.base.n)?;
            (
                Some(transient_constant_m_star(mp, &s.r)?),
                Some(transient_time_t0(s, &mp.base)),
            )
        }
        None => (None, None),
    };
    Ok(FractionalBounds {
        g_alpha: absorbing_bound_g_alpha(mp)?,
        m_star_r0,
        p_star_frac: threshold_p_star_frac(mp)?,
        delta: delta_p(mp)?,
        rho_bound: rho_bound(mp)?,
        t_0,
    })
}

/// Algebraic synchronization envelope `Γ(1+α)/(Γ(1+α) + 2δ t^α)`.
pub fn rate_mu_alpha(mp: &MemristiveParams, t: f64) -> Result<f64> {
    require(t >= 0.0, "t must be non-negative")?;
    let delta = delta_p(mp)?;
    require(delta > 0.0, format!("delta(P) = {delta} is not positive"))?;
    let g = special::gamma(1.0 + mp.alpha)?;
    Ok(g / (g + 2.0 * delta * t.powf(mp.alpha)))
}

/// Bound on Σ Vᵢ(t)² for the memristive network.
pub fn memristive_transient_bound(mp: &MemristiveParams, y0: &NetworkState, t: f64) -> Result<f64> {
    require(t >= 0.0, "t must be non-negative")?;
    y0.check_dims(mp.base.n)?;
    let d = effective_decay(mp)?;
    let v0: f64 = y0.v.iter().map(|v| v * v).sum();
    let m = transient_constant_m_star(mp, &y0.r)?;
    Ok(special::fractional_gronwall_envelope(v0, m, d, mp.alpha, t)?)
}

/// Squared pairwise gaps `(Vᵢ-V_j)² + (Rᵢ-R_j)²` for all pairs i < j.
#[derive(Debug, Clone, PartialEq)]
pub struct GapSeries {
    pub times: Vec<f64>,
    pub pairs: Vec<(usize, usize)>,
    /// Row-major: `gap_sq[t * pairs.len() + pair]`.
    pub gap_sq: Vec<f64>,
    /// Per-time maximum of `gap_sq` over pairs.
    pub max_gap: Vec<f64>,
}

impl GapSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let np = self.pairs.len();
        &self.gap_sq[i * np..(i + 1) * np]
    }

    /// Build a series from bare `(t, max_gap)` samples, with no pair detail.
    pub fn from_max(times: Vec<f64>, max_gap: Vec<f64>) -> Self {
        Self {
            times,
            pairs: Vec::new(),
            gap_sq: Vec::new(),
            max_gap,
        }
    }
}

pub fn gap_series(traj: &Trajectory) -> Result<GapSeries> {
    let n = traj.n();
    require(n >= 2, "gap series needs at least 2 neurons")?;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let mut gap_sq = Vec::with_capacity(traj.len() * pairs.len());
    let mut max_gap = Vec::with_capacity(traj.len());
    for (_, row) in traj.rows() {
        let (v, r) = (&row[..n], &row[n..2 * n]);
        let mut m = 0.0f64;
        for &(i, j) in &pairs {
            let du = v[i] - v[j];
            let dr = r[i] - r[j];
            let g = du * du + dr * dr;
            gap_sq.push(g);
            m = m.max(g);
        }
        max_gap.push(m);
    }
    Ok(GapSeries {
        times: traj.times.clone(),
        pairs,
        gap_sq,
        max_gap,
    })
}

/// Outcome of one verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst measured value.
    pub measured: f64,
    /// The bound at the worst point.
    pub bound: f64,
    /// `bound / measured` at the worst point; `None` when nothing was
    /// measured above zero (infinite margin).
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

/// Tracks the worst `bound/measured` ratio over a sequence of comparisons.
struct Worst {
    ratio: f64,
    measured: f64,
    bound: f64,
    passed: bool,
}

impl Worst {
    fn new() -> Self {
        Self {
            ratio: f64::INFINITY,
            measured: 0.0,
            bound: f64::INFINITY,
            passed: true,
        }
    }

    /// `ok` decides pass/fail; the ratio only selects the reported point.
    fn observe(&mut self, measured: f64, bound: f64, ok: bool) {
        self.passed &= ok;
        let ratio = if measured > 0.0 {
            bound / measured
        } else {
            f64::INFINITY
        };
        if ratio < self.ratio || !self.bound.is_finite() {
            self.ratio = ratio;
            self.measured = measured;
            self.bound = bound;
        }
    }

    fn into_check(self, name: &str, detail: String) -> Check {
        Check {
            name: name.to_string(),
            passed: self.passed,
            measured: self.measured,
            bound: self.bound,
            margin: self.ratio.is_finite().then_some(self.ratio),
            detail,
        }
    }
}

fn reference_index(times: &[f64], t0: f64) -> Option<usize> {
    times.iter().position(|&t| t >= t0)
}

fn verify_envelope(name: &str, gaps: &GapSeries, t0: f64, envelope: impl Fn(f64) -> f64, detail: String) -> Check {
    let mut worst = Worst::new();
    let Some(k0) = reference_index(&gaps.times, t0) else {
        return worst.into_check(name, format!("{detail}; no samples after T0"));
    };
    let (t_ref, g_ref) = (gaps.times[k0], gaps.max_gap[k0]);
    for (&t, &g) in gaps.times.iter().zip(&gaps.max_gap).skip(k0 + 1) {
        let allowed = g_ref * envelope(t - t_ref) * (1.0 + ENVELOPE_REL_TOL) + ENVELOPE_ABS_FLOOR;
        worst.observe(g, allowed, g <= allowed);
    }
    worst.into_check(name, format!("{detail}; reference t = {t_ref}"))
}

/// Exponential envelope `max_gap(t) ≤ max_gap(T0) e^{-μ(t-T0)}` after T0.
pub fn verify_sync_envelope(gaps: &GapSeries, mu: f64, t0: f64) -> Result<Check> {
    require(mu > 0.0, format!("rate mu = {mu} must be positive"))?;
    Ok(verify_envelope(
        "sync_envelope",
        gaps,
        t0,
        |dt| (-mu * dt).exp(),
        format!("mu = {mu}, T0 = {t0}"),
    ))
}

/// Algebraic envelope `max_gap(t) ≤ max_gap(T0) μ_α(P, t-T0)` after T0.
pub fn verify_frac_sync(gaps: &GapSeries, mp: &MemristiveParams, t0: f64) -> Result<Check> {
    let delta = delta_p(mp)?;
    require(delta > 0.0, format!("delta(P) = {delta} is not positive"))?;
    let g = special::gamma(1.0 + mp.alpha)?;
    let alpha = mp.alpha;
    Ok(verify_envelope(
        "frac_sync_envelope",
        gaps,
        t0,
        move |dt| g / (g + 2.0 * delta * dt.powf(alpha)),
        format!("delta = {delta}, alpha = {alpha}, T0 = {t0}"),
    ))
}

/// Start time of the trailing "limsup" window: the last `tail_fraction` of
/// the run, widened to at least 50 ms but never past the second half.
pub fn tail_start(t_end: f64, tail_fraction: f64) -> f64 {
    let len = (tail_fraction * t_end).max(MIN_TAIL_MS.min(0.5 * t_end));
    t_end - len
}

/// `max_gap` non-increasing over the trailing window (relative slack 1e-9).
pub fn verify_tail_monotone(gaps: &GapSeries, tail_fraction: f64) -> Check {
    let start = tail_start(*gaps.times.last().unwrap_or(&0.0), tail_fraction);
    let mut worst = Worst::new();
    let mut prev: Option<f64> = None;
    for (&t, &g) in gaps.times.iter().zip(&gaps.max_gap) {
        if t < start {
            continue;
        }
        if let Some(p) = prev {
            let allowed = p * (1.0 + 1e-9) + 1e-300;
            worst.observe(g, allowed, g <= allowed);
        }
        prev = Some(g);
    }
    worst.into_check("gap_tail_monotone", format!("tail from t = {start}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissipativityChecks {
    /// max over the tail window of ‖(V, R)‖² against the absorbing radius².
    pub absorbing: Check,
    /// Pointwise transient bound over the whole trajectory.
    pub transient: Check,
}

/// Tail-window absorbing-ball check plus the pointwise transient bound.
/// `g` is G (classical) or G_α (memristive).
pub fn verify_dissipativity(traj: &Trajectory, g: f64, tail_fraction: f64) -> Result<DissipativityChecks> {
    require(
        tail_fraction > 0.0 && tail_fraction < 1.0,
        "tail_fraction must lie in (0, 1)",
    )?;
    require(!traj.is_empty(), "empty trajectory")?;
    let n = traj.n();
    let y0 = traj.initial();
    let start = tail_start(traj.t_end(), tail_fraction);
    if let AnyParams::Classical(p) = &traj.meta.params {
        let l = y0.norm_sq_vr();
        if l > 0.0 {
            let entry = absorbing_entry_time(p, l)?;
            if start < entry {
                return Err(AnalysisError::TooShort {
                    tail_start: start,
                    entry_time: entry,
                });
            }
        }
    }
    let mut absorbing = Worst::new();
    for (t, row) in traj.rows() {
        if t < start {
            continue;
        }
        let norm: f64 = row[..2 * n].iter().map(|x| x * x).sum();
        absorbing.observe(norm, g, norm < g);
    }
    let absorbing = absorbing.into_check("absorbing_ball", format!("tail from t = {start}, G = {g}"));

    let mut transient = Worst::new();
    match &traj.meta.params {
        AnyParams::Classical(p) => {
            for (t, row) in traj.rows() {
                let norm: f64 = row.iter().map(|x| x * x).sum();
                let bound = transient_bound(p, &y0, t)?;
                transient.observe(norm, bound, norm <= bound * (1.0 + 1e-12));
            }
        }
        AnyParams::Memristive(mp) => {
            for (t, row) in traj.rows() {
                let norm: f64 = row[..n].iter().map(|x| x * x).sum();
                let bound = memristive_transient_bound(mp, &y0, t)?;
                transient.observe(norm, bound, norm <= bound * (1.0 + 1e-12));
            }
        }
    }
    Ok(DissipativityChecks {
        absorbing,
        transient: transient.into_check("transient_bound", String::new()),
    })
}

/// Tail check of the memductance: max ρ² over the window below `bound`.
pub fn verify_rho_bound(traj: &Trajectory, bound: f64, tail_fraction: f64) -> Result<Check> {
    require(traj.is_memristive(), "rho bound needs a memristive trajectory")?;
    let start = tail_start(traj.t_end(), tail_fraction);
    let idx = 2 * traj.n();
    let mut worst = Worst::new();
    for (t, row) in traj.rows() {
        if t >= start {
            let r2 = row[idx] * row[idx];
            worst.observe(r2, bound, r2 < bound);
        }
    }
    Ok(worst.into_check("rho_bound", format!("tail from t = {start}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncDegreeEstimate {
    pub value: f64,
    pub samples: usize,
    pub seed: u64,
    pub init_radius: f64,
}

/// Monte-Carlo lower estimate of the synchronizing degree: the sup over
/// sampled initial states of the max over the terminal window and pairs of
/// `|Vᵢ-V_j| + |Rᵢ-R_j|`.
pub fn sync_degree_estimate(
    params: &AnyParams,
    sample_count: usize,
    init_radius: f64,
    spec: &IntegratorSpec,
    seed: u64,
) -> Result<SyncDegreeEstimate> {
    require(sample_count >= 1, "sample_count must be at least 1")?;
    params.validate()?;
    let mut sampler = BallSampler::new(seed);
    let memristive = matches!(params, AnyParams::Memristive(_));
    let initial: Vec<NetworkState> = (0..sample_count)
        .map(|_| sampler.state(params.n(), memristive, init_radius))
        .collect();
    let per_sample: Vec<f64> = initial
        .par_iter()
        .map(|y0| terminal_spread(params, y0, spec))
        .collect::<Result<_>>()?;
    Ok(SyncDegreeEstimate {
        value: per_sample.into_iter().fold(0.0, f64::max),
        samples: sample_count,
        seed,
        init_radius,
    })
}

/// Max over the terminal window and pairs of `|ΔV| + |ΔR|` for one run.
pub fn terminal_spread(params: &AnyParams, y0: &NetworkState, spec: &IntegratorSpec) -> Result<f64> {
    let traj = integrators::integrate(y0, params, spec)?;
    let n = traj.n();
    let start = tail_start(traj.t_end(), DEFAULT_TAIL_FRACTION);
    let mut worst = 0.0f64;
    for (t, row) in traj.rows() {
        if t < start {
            continue;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let d = (row[i] - row[j]).abs() + (row[n + i] - row[n + j]).abs();
                worst = worst.max(d);
            }
        }
    }
    Ok(worst)
}
