//! Time-stepping engines.
//!
//! Classical runs use fixed-step RK4 or Dormand-Prince 5(4) with step-size
//! control. Caputo runs use the fractional Adams-Bashforth-Moulton scheme on a
//! uniform grid with the full convolution history.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    AnyParams, HhwField, MemristiveField, MemristiveParams, ModelError, ModelParams, NetworkState, VectorField,
};
use crate::special;
use crate::trajectory::{Trajectory, TrajectoryMeta};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("invalid integrator spec: {0}")]
    InvalidSpec(String),
    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("non-finite state at t = {t}; last finite state at t = {last_time}")]
    NonFinite {
        t: f64,
        last_time: f64,
        last_state: Vec<f64>,
        partial: Box<Solution>,
    },
    #[error("history of {steps} steps exceeds the configured limit of {limit}")]
    MemoryBudget { steps: usize, limit: usize },
    #[error("implicit corrector did not converge at t = {t}")]
    NewtonFailure { t: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub type Result<T> = std::result::Result<T, IntegrationError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorKind {
    ClassicalFixed,
    ClassicalAdaptive,
    CaputoPc,
}

/// How the fractional corrector equation is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectorMode {
    /// Explicit predictor followed by `corrector_iterations` corrector sweeps.
    Pece,
    /// Corrector equation solved by Newton iteration; needed when the
    /// coupling makes the gap dynamics stiff.
    Implicit,
}

fn default_stride() -> usize {
    1
}
fn default_corrector_iterations() -> u8 {
    1
}
fn default_corrector() -> CorrectorMode {
    CorrectorMode::Pece
}
fn default_max_history() -> usize {
    1_000_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    pub kind: IntegratorKind,
    /// Fixed step (ms), or the initial step for the adaptive scheme.
    pub dt: f64,
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    /// Keep every k-th step; the final step is always kept.
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    #[serde(default = "default_corrector")]
    pub corrector: CorrectorMode,
    #[serde(default = "default_corrector_iterations")]
    pub corrector_iterations: u8,
    /// Upper bound on the number of stored history steps (fractional only).
    #[serde(default = "default_max_history")]
    pub max_history: usize,
    /// Optional short-memory window length in ms (fractional only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory_window: Option<f64>,
}

impl IntegratorSpec {
    pub fn fixed(dt: f64, t_end: f64) -> Self {
        Self {
            kind: IntegratorKind::ClassicalFixed,
            dt,
            t_end,
            abs_tol: None,
            rel_tol: None,
            record_stride: 1,
            corrector: CorrectorMode::Pece,
            corrector_iterations: 1,
            max_history: default_max_history(),
            memory_window: None,
        }
    }

    pub fn adaptive(abs_tol: f64, rel_tol: f64, t_end: f64) -> Self {
        Self {
            kind: IntegratorKind::ClassicalAdaptive,
            dt: 1e-3,
            abs_tol: Some(abs_tol),
            rel_tol: Some(rel_tol),
            ..Self::fixed(1e-3, t_end)
        }
    }

    pub fn caputo(dt: f64, t_end: f64) -> Self {
        Self {
            kind: IntegratorKind::CaputoPc,
            ..Self::fixed(dt, t_end)
        }
    }

    pub fn with_corrector(mut self, mode: CorrectorMode) -> Self {
        self.corrector = mode;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(IntegrationError::InvalidSpec(m.to_string()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be positive");
        }
        if self.record_stride == 0 {
            return bad("record_stride must be >= 1");
        }
        if !(1..=3).contains(&self.corrector_iterations) {
            return bad("corrector_iterations must be 1, 2 or 3");
        }
        if self.kind == IntegratorKind::ClassicalAdaptive {
            let (a, r) = self.tolerances();
            if !(a > 0.0 && r > 0.0) {
                return bad("adaptive tolerances must be positive");
            }
        }
        if let Some(w) = self.memory_window {
            if !(w > 0.0) {
                return bad("memory_window must be positive");
            }
        }
        Ok(())
    }

    pub fn tolerances(&self) -> (f64, f64) {
        (self.abs_tol.unwrap_or(1e-9), self.rel_tol.unwrap_or(1e-9))
    }

    /// Identifier recorded in trajectory metadata.
    pub fn id(&self) -> String {
        match self.kind {
            IntegratorKind::ClassicalFixed => "rk4".into(),
            IntegratorKind::ClassicalAdaptive => "dopri5".into(),
            IntegratorKind::CaputoPc => match self.corrector {
                CorrectorMode::Pece => format!("caputo_abm_pece{}", self.corrector_iterations),
                CorrectorMode::Implicit => "caputo_abm_implicit".into(),
            },
        }
    }
}

/// Raw samples produced by an engine.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Solution {
    pub times: Vec<f64>,
    /// Row-major samples, `dim` values per time.
    pub data: Vec<f64>,
    pub dim: usize,
    /// Step actually used on the uniform grid (fixed-step engines).
    pub step: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Solution {
    fn new(dim: usize) -> Self {
        Self {
            dim,
            ..Default::default()
        }
    }

    fn push(&mut self, t: f64, y: &[f64]) {
        self.times.push(t);
        self.data.extend_from_slice(y);
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn last(&self) -> &[f64] {
        &self.data[self.data.len() - self.dim..]
    }
}

fn all_finite(y: &[f64]) -> bool {
    y.iter().all(|x| x.is_finite())
}

fn non_finite(t: f64, last_time: f64, last: &[f64], sol: Solution) -> IntegrationError {
    IntegrationError::NonFinite {
        t,
        last_time,
        last_state: last.to_vec(),
        partial: Box::new(sol),
    }
}

/// Classical fixed-step RK4 or adaptive Dormand-Prince 5(4).
pub fn solve_ode(field: &impl VectorField, y0: &[f64], spec: &IntegratorSpec) -> Result<Solution> {
    spec.validate()?;
    if y0.len() != field.dim() {
        return Err(ModelError::Dimension {
            expected: field.dim(),
            got: y0.len(),
        }
        .into());
    }
    match spec.kind {
        IntegratorKind::ClassicalFixed => rk4(field, y0, spec),
        IntegratorKind::ClassicalAdaptive => dopri5(field, y0, spec),
        IntegratorKind::CaputoPc => Err(IntegrationError::InvalidSpec(
            "caputo_pc requires the fractional solver".into(),
        )),
    }
}

fn rk4(field: &impl VectorField, y0: &[f64], spec: &IntegratorSpec) -> Result<Solution> {
    let dim = y0.len();
    let steps = (spec.t_end / spec.dt - 1e-9).ceil().max(1.0) as usize;
    let h = spec.t_end / steps as f64;
    let mut sol = Solution::new(dim);
    sol.step = h;
    let mut y = y0.to_vec();
    let mut prev = y.clone();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
    );
    sol.push(0.0, &y);
    for step in 1..=steps {
        let t = (step - 1) as f64 * h;
        field.eval(t, &y, &mut k1);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        field.eval(t + 0.5 * h, &tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        field.eval(t + 0.5 * h, &tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = y[i] + h * k3[i];
        }
        field.eval(t + h, &tmp, &mut k4);
        prev.copy_from_slice(&y);
        for i in 0..dim {
            y[i] += h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
        let t_new = if step == steps { spec.t_end } else { step as f64 * h };
        if !all_finite(&y) {
            return Err(non_finite(t_new, t, &prev, sol));
        }
        sol.accepted_steps += 1;
        if step % spec.record_stride == 0 || step == steps {
            sol.push(t_new, &y);
        }
    }
    Ok(sol)
}

// Dormand-Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// difference between 5th and embedded 4th order weights
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn dopri5(field: &impl VectorField, y0: &[f64], spec: &IntegratorSpec) -> Result<Solution> {
    let dim = y0.len();
    let (atol, rtol) = spec.tolerances();
    let mut sol = Solution::new(dim);
    sol.step = spec.dt;
    let mut t = 0.0;
    let mut h = spec.dt.min(spec.t_end);
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; dim]; 7];
    let mut tmp = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];
    field.eval(t, &y, &mut k[0]);
    sol.push(t, &y);
    let mut accepted = 0usize;
    let mut last_pushed = 0usize;
    while t < spec.t_end {
        let last_step = t + h >= spec.t_end * (1.0 - 1e-14);
        if last_step {
            h = spec.t_end - t;
        }
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += DP_A[s][j] * kj[i];
                }
                tmp[i] = y[i] + h * acc;
            }
            if s == 6 {
                y_new.copy_from_slice(&tmp);
            }
            let (done, rest) = k.split_at_mut(s);
            let _ = done;
            field.eval(t + DP_C[s] * h, &tmp, &mut rest[0]);
        }
        let mut err_sq = 0.0;
        for i in 0..dim {
            let mut e = 0.0;
            for (s, ks) in k.iter().enumerate() {
                e += DP_E[s] * ks[i];
            }
            let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
            let r = h * e / sc;
            err_sq += r * r;
        }
        let err = (err_sq / dim as f64).sqrt();
        if !err.is_finite() || !all_finite(&y_new) {
            // treat as a failed step; shrink aggressively
            sol.rejected_steps += 1;
            h *= 0.1;
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(non_finite(t + h, t, &y, sol));
            }
            continue;
        }
        if err <= 1.0 {
            t = if last_step { spec.t_end } else { t + h };
            y.copy_from_slice(&y_new);
            let (first, rest) = k.split_at_mut(1);
            first[0].copy_from_slice(&rest[5]);
            accepted += 1;
            sol.accepted_steps = accepted;
            if accepted.is_multiple_of(spec.record_stride) || t >= spec.t_end {
                sol.push(t, &y);
                last_pushed = accepted;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= factor;
        } else {
            sol.rejected_steps += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(IntegrationError::StepUnderflow { t, h });
        }
    }
    if last_pushed != accepted {
        sol.push(t, &y);
    }
    Ok(sol)
}

/// Convolution weights of the fractional Adams scheme, indexed by the lag
/// `m = k - j`, extended on demand.
#[derive(Debug, Clone)]
struct AbmWeights {
    alpha: f64,
    /// (m+1)^α - m^α
    rect: Vec<f64>,
    /// (m+2)^{α+1} - 2(m+1)^{α+1} + m^{α+1}
    trap: Vec<f64>,
}

impl AbmWeights {
    fn new(alpha: f64) -> Self {
        Self {
            alpha,
            rect: Vec::new(),
            trap: Vec::new(),
        }
    }

    fn extend_to(&mut self, len: usize) {
        let a = self.alpha;
        let s = a + 1.0;
        while self.rect.len() < len {
            let m = self.rect.len() as f64;
            let b = if m == 0.0 {
                1.0
            } else {
                m.powf(a) * (a * (1.0 / m).ln_1p()).exp_m1()
            };
            self.rect.push(b);
            let x = 1.0 / (m + 1.0);
            // (m+1)^s [ (1+x)^s + (1-x)^s - 2 ], arranged to limit cancellation
            let up = (s * x.ln_1p()).exp_m1();
            let down = if m == 0.0 { -1.0 } else { (s * (-x).ln_1p()).exp_m1() };
            self.trap.push((m + 1.0).powf(s) * (up + down));
        }
    }

    /// Weight of the initial point in the corrector at step k → k+1.
    fn trap_first(&self, k: usize) -> f64 {
        let k = k as f64;
        let a = self.alpha;
        k.powf(a + 1.0) - (k - a) * (k + 1.0).powf(a)
    }
}

/// Stored right-hand-side history, component-major, plus its weights.
#[derive(Debug, Clone)]
pub struct CaputoHistory {
    f_history: Vec<Vec<f64>>,
    weights: AbmWeights,
}

impl CaputoHistory {
    fn new(dim: usize, alpha: f64, capacity: usize) -> Self {
        Self {
            f_history: (0..dim).map(|_| Vec::with_capacity(capacity)).collect(),
            weights: AbmWeights::new(alpha),
        }
    }

    pub fn len(&self) -> usize {
        self.f_history.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn push(&mut self, f: &[f64]) {
        for (c, v) in self.f_history.iter_mut().zip(f) {
            c.push(*v);
        }
        let len = self.len();
        self.weights.extend_to(len);
    }

    /// Memory sums for the step k → k+1 (history holds f_0..f_k).
    /// `pred[c] = Σ_{j≥j0} rect[k-j] f_j`, `corr[c] = Σ_{j≥j0} trap_j f_j`.
    fn sums(&self, j0: usize, pred: &mut [f64], corr: &mut [f64]) {
        let k = self.len() - 1;
        let rect = &self.weights.rect[..=k - j0];
        let trap = &self.weights.trap;
        let first = if j0 == 0 {
            self.weights.trap_first(k)
        } else {
            trap[k - j0]
        };
        for (c, hist) in self.f_history.iter().enumerate() {
            let h = &hist[j0..=k];
            let p: f64 = h.iter().zip(rect.iter().rev()).map(|(f, w)| f * w).sum();
            let tail = &h[1..];
            let q: f64 = tail.iter().zip(trap[..k - j0].iter().rev()).map(|(f, w)| f * w).sum();
            pred[c] = p;
            corr[c] = q + first * h[0];
        }
    }
}

/// Fractional Adams-Bashforth-Moulton solver for `D^α y = f(y)`, `0 < α < 1`.
pub fn solve_caputo(field: &impl VectorField, y0: &[f64], alpha: f64, spec: &IntegratorSpec) -> Result<Solution> {
    spec.validate()?;
    if spec.kind != IntegratorKind::CaputoPc {
        return Err(IntegrationError::InvalidSpec(
            "fractional solver requires kind caputo_pc".into(),
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(IntegrationError::InvalidSpec(format!(
            "Caputo order must lie in (0, 1), got {alpha}"
        )));
    }
    let dim = field.dim();
    if y0.len() != dim {
        return Err(ModelError::Dimension {
            expected: dim,
            got: y0.len(),
        }
        .into());
    }
    let steps = (spec.t_end / spec.dt - 1e-9).ceil().max(1.0) as usize;
    if steps + 1 > spec.max_history {
        return Err(IntegrationError::MemoryBudget {
            steps: steps + 1,
            limit: spec.max_history,
        });
    }
    let h = spec.t_end / steps as f64;
    let ha = h.powf(alpha);
    let pred_scale = ha / special::gamma(alpha + 1.0).expect("alpha in (0,1)");
    let corr_scale = ha / special::gamma(alpha + 2.0).expect("alpha in (0,1)");
    let window = spec.memory_window.map(|w| (w / h).ceil().max(1.0) as usize);

    let mut sol = Solution::new(dim);
    sol.step = h;
    let mut hist = CaputoHistory::new(dim, alpha, steps + 1);
    let mut y = y0.to_vec();
    let mut f = vec![0.0; dim];
    field.eval(0.0, &y, &mut f);
    hist.push(&f);
    sol.push(0.0, &y);

    let mut pred_sum = vec![0.0; dim];
    let mut corr_sum = vec![0.0; dim];
    let mut y_pred = vec![0.0; dim];
    let mut base = vec![0.0; dim];
    let mut newton = NewtonWorkspace::new(dim);

    for k in 0..steps {
        let t_next = if k + 1 == steps { spec.t_end } else { (k + 1) as f64 * h };
        let j0 = window.map_or(0, |w| (k + 1).saturating_sub(w));
        hist.sums(j0, &mut pred_sum, &mut corr_sum);
        for c in 0..dim {
            y_pred[c] = y0[c] + pred_scale * pred_sum[c];
            base[c] = y0[c] + corr_scale * corr_sum[c];
        }
        let y_next = match spec.corrector {
            CorrectorMode::Pece => {
                let mut guess = y_pred.clone();
                for _ in 0..spec.corrector_iterations {
                    field.eval(t_next, &guess, &mut f);
                    for c in 0..dim {
                        guess[c] = base[c] + corr_scale * f[c];
                    }
                }
                guess
            }
            CorrectorMode::Implicit => [&y, &y_pred, &base]
                .into_iter()
                .find_map(|guess| newton.solve(field, t_next, &base, corr_scale, guess))
                .ok_or(IntegrationError::NewtonFailure { t: t_next })?,
        };
        if !all_finite(&y_next) {
            return Err(non_finite(t_next, k as f64 * h, &y, sol));
        }
        y = y_next;
        field.eval(t_next, &y, &mut f);
        hist.push(&f);
        sol.accepted_steps += 1;
        if (k + 1) % spec.record_stride == 0 || k + 1 == steps {
            sol.push(t_next, &y);
        }
    }
    Ok(sol)
}

/// Newton iteration for `y = base + w f(y)` with a finite-difference Jacobian.
struct NewtonWorkspace {
    f: Vec<f64>,
    f_pert: Vec<f64>,
    pert: Vec<f64>,
}

impl NewtonWorkspace {
    const MAX_ITER: usize = 50;

    fn new(dim: usize) -> Self {
        Self {
            f: vec![0.0; dim],
            f_pert: vec![0.0; dim],
            pert: vec![0.0; dim],
        }
    }

    fn residual(&mut self, field: &impl VectorField, t: f64, base: &[f64], w: f64, y: &[f64], out: &mut [f64]) -> f64 {
        field.eval(t, y, &mut self.f);
        let mut norm: f64 = 0.0;
        for c in 0..y.len() {
            out[c] = y[c] - base[c] - w * self.f[c];
            norm = norm.max(out[c].abs());
        }
        norm
    }

    /// Damped Newton: full steps are halved until the max-norm residual
    /// decreases.
    fn solve(&mut self, field: &impl VectorField, t: f64, base: &[f64], w: f64, guess: &[f64]) -> Option<Vec<f64>> {
        let dim = base.len();
        let mut y = guess.to_vec();
        let mut trial = vec![0.0; dim];
        let mut res = vec![0.0; dim];
        let mut res_trial = vec![0.0; dim];
        let mut jac = DMatrix::<f64>::zeros(dim, dim);
        let sqrt_eps = f64::EPSILON.sqrt();
        let mut res_norm = self.residual(field, t, base, w, &y, &mut res);
        for _ in 0..Self::MAX_ITER {
            for col in 0..dim {
                self.pert.copy_from_slice(&y);
                let dh = sqrt_eps * y[col].abs().max(1.0);
                self.pert[col] += dh;
                field.eval(t, &self.pert, &mut self.f_pert);
                for row in 0..dim {
                    let d = (self.f_pert[row] - self.f[row]) / dh;
                    jac[(row, col)] = if row == col { 1.0 - w * d } else { -w * d };
                }
            }
            let delta = jac.clone().lu().solve(&DVector::from_column_slice(&res))?;
            let step_norm = delta.amax();
            if !step_norm.is_finite() {
                return None;
            }
            let mut lambda = 1.0;
            loop {
                for c in 0..dim {
                    trial[c] = y[c] - lambda * delta[c];
                }
                let r = self.residual(field, t, base, w, &trial, &mut res_trial);
                if r.is_finite() && (r < res_norm || lambda < 1.0 / 1024.0) {
                    res_norm = r;
                    break;
                }
                lambda *= 0.5;
                if lambda < 1.0 / 4096.0 {
                    return None;
                }
            }
            std::mem::swap(&mut y, &mut trial);
            std::mem::swap(&mut res, &mut res_trial);
            let y_norm = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if lambda * step_norm <= 1e-12 * (1.0 + y_norm) || res_norm == 0.0 {
                return Some(y);
            }
        }
        None
    }
}

fn trajectory(sol: Solution, params: AnyParams, spec: &IntegratorSpec) -> Result<Trajectory> {
    let meta = TrajectoryMeta {
        params,
        integrator: spec.id(),
        step: sol.step,
        seed: None,
    };
    Ok(Trajectory::from_rows(sol.times, sol.data, meta)?)
}

/// Integrate the classical network from a structured initial state.
pub fn integrate_classical(y0: &NetworkState, p: &ModelParams, spec: &IntegratorSpec) -> Result<Trajectory> {
    p.validate()?;
    if y0.rho.is_some() {
        return Err(ModelError::UnexpectedRho.into());
    }
    y0.check_dims(p.n)?;
    let sol = solve_ode(&HhwField::new(p), &y0.to_flat(), spec)?;
    trajectory(sol, AnyParams::Classical(p.clone()), spec)
}

/// Integrate the fractional memristive network from a structured initial
/// state; the Caputo order is taken from `p.alpha`.
pub fn integrate_caputo(y0: &NetworkState, p: &MemristiveParams, spec: &IntegratorSpec) -> Result<Trajectory> {
    p.validate()?;
    if y0.rho.is_none() {
        return Err(ModelError::MissingRho.into());
    }
    y0.check_dims(p.base.n)?;
    let sol = solve_caputo(&MemristiveField::new(p), &y0.to_flat(), p.alpha, spec)?;
    trajectory(sol, AnyParams::Memristive(p.clone()), spec)
}

/// Dispatch on the parameter kind.
pub fn integrate(y0: &NetworkState, params: &AnyParams, spec: &IntegratorSpec) -> Result<Trajectory> {
    match params {
        AnyParams::Classical(p) => integrate_classical(y0, p, spec),
        AnyParams::Memristive(p) => integrate_caputo(y0, p, spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay() -> (usize, impl Fn(f64, &[f64], &mut [f64])) {
        (1, |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -y[0])
    }

    #[test]
    fn rk4_scalar_decay() {
        let sol = solve_ode(&decay(), &[1.0], &IntegratorSpec::fixed(0.01, 1.0)).unwrap();
        assert_eq!(*sol.times.last().unwrap(), 1.0);
        assert!((sol.last()[0] - (-1f64).exp()).abs() < 1e-9);
        assert_eq!(sol.times.len(), 101);
    }

    #[test]
    fn dopri_scalar_decay() {
        let sol = solve_ode(&decay(), &[1.0], &IntegratorSpec::adaptive(1e-12, 1e-12, 1.0)).unwrap();
        assert_eq!(*sol.times.last().unwrap(), 1.0);
        assert!((sol.last()[0] - (-1f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn stride_keeps_final_sample() {
        let spec = IntegratorSpec::fixed(0.1, 1.05).with_stride(4);
        let sol = solve_ode(&decay(), &[1.0], &spec).unwrap();
        assert_eq!(*sol.times.last().unwrap(), 1.05);
        assert_eq!(sol.times[1], 4.0 * 1.05 / 11.0);
    }

    #[test]
    fn spec_validation() {
        assert!(IntegratorSpec::fixed(0.0, 1.0).validate().is_err());
        assert!(IntegratorSpec::fixed(0.1, 0.0).validate().is_err());
        assert!(IntegratorSpec::fixed(0.1, 1.0).with_stride(0).validate().is_err());
        let mut s = IntegratorSpec::caputo(0.1, 1.0);
        s.corrector_iterations = 4;
        assert!(s.validate().is_err());
        assert!(solve_caputo(&decay(), &[1.0], 0.5, &IntegratorSpec::fixed(0.1, 1.0)).is_err());
        assert!(solve_caputo(&decay(), &[1.0], 1.0, &IntegratorSpec::caputo(0.1, 1.0)).is_err());
    }

    #[test]
    fn blow_up_is_reported_with_last_finite_state() {
        let field = (1, |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0]);
        match solve_ode(&field, &[1.0], &IntegratorSpec::fixed(0.01, 5.0)) {
            Err(IntegrationError::NonFinite { last_state, t, .. }) => {
                assert!(last_state[0].is_finite());
                assert!(t > 0.9 && t < 1.2);
            }
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }

    #[test]
    fn memory_budget_enforced() {
        let mut spec = IntegratorSpec::caputo(1e-3, 10.0);
        spec.max_history = 1000;
        assert!(matches!(
            solve_caputo(&decay(), &[1.0], 0.5, &spec),
            Err(IntegrationError::MemoryBudget { .. })
        ));
    }

    #[test]
    fn caputo_constant_solution() {
        let zero = (2, |_t: f64, _y: &[f64], dy: &mut [f64]| dy.fill(0.0));
        for mode in [CorrectorMode::Pece, CorrectorMode::Implicit] {
            let spec = IntegratorSpec::caputo(0.01, 1.0).with_corrector(mode);
            let sol = solve_caputo(&zero, &[3.5, -1.0], 0.6, &spec).unwrap();
            for row in sol.data.chunks(2) {
                assert_eq!(row, &[3.5, -1.0]);
            }
        }
    }

    #[test]
    fn weights_match_direct_formulas() {
        let mut w = AbmWeights::new(0.7);
        w.extend_to(50);
        for m in 0..50 {
            let mf = m as f64;
            let rect = (mf + 1.0).powf(0.7) - mf.powf(0.7);
            let trap = (mf + 2.0).powf(1.7) - 2.0 * (mf + 1.0).powf(1.7) + mf.powf(1.7);
            assert!((w.rect[m] - rect).abs() < 1e-12, "rect m={m}");
            assert!((w.trap[m] - trap).abs() < 1e-11, "trap m={m}");
        }
        // a_{0,1} = α
        assert!((w.trap_first(0) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn implicit_corrector_handles_stiff_linear_decay() {
        let stiff = (1, |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -2000.0 * y[0]);
        let spec = IntegratorSpec::caputo(0.005, 1.0);
        let explicit = solve_caputo(&stiff, &[1.0], 0.5, &spec);
        assert!(explicit.is_err());
        let implicit = solve_caputo(&stiff, &[1.0], 0.5, &spec.with_corrector(CorrectorMode::Implicit)).unwrap();
        let end = implicit.last()[0];
        // E_0.5(-2000) ≈ 1/(2000 √π)
        assert!(end > 0.0 && (end - 2.82e-4).abs() < 5e-5, "{end}");
    }
}
