//! Parameter sets, network states and vector fields for the classical and
//! the fractional memristive HHW networks.
//!
//! State layout is flat everywhere: `(V₁..V_n, R₁..R_n[, ρ])`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("parameter {field} = {value}: {reason}")]
    InvalidParam {
        field: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("memristive state requires rho")]
    MissingRho,
    #[error("classical state must not carry rho")]
    UnexpectedRho,
    #[error("hypothesis a0 > k/beta violated: a0 = {a0}, k/beta = {ratio}")]
    Hypothesis { a0: f64, ratio: f64 },
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// Scalar constants of the classical network. Membrane capacitance is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub n: usize,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    #[serde(rename = "g_K")]
    pub g_k: f64,
    #[serde(rename = "E_Na")]
    pub e_na: f64,
    #[serde(rename = "E_K")]
    pub e_k: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub lambda: f64,
    #[serde(rename = "tau_K")]
    pub tau_k: f64,
    #[serde(rename = "J", default)]
    pub j: f64,
    #[serde(rename = "P")]
    pub p: f64,
}

/// Slope of R∞ used by the Wilson preset. Not part of the published set.
pub const WILSON_DEFAULT_LAMBDA: f64 = 1.0;

impl ModelParams {
    /// Wilson's parameter set in scaled units of mV/100, with λ = 1 and J = 0.
    pub fn wilson(n: usize, coupling: f64) -> Self {
        Self {
            n,
            a0: 17.8,
            a1: 47.6,
            a2: 33.8,
            g_k: 26.0,
            e_na: 0.5,
            e_k: -0.95,
            h: 1.0,
            lambda: WILSON_DEFAULT_LAMBDA,
            tau_k: 4.2,
            j: 0.0,
            p: coupling,
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(field: &'static str, value: f64) -> Result<()> {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(ModelError::InvalidParam {
                    field,
                    value,
                    reason: "must be positive and finite",
                })
            }
        }
        fn finite(field: &'static str, value: f64) -> Result<()> {
            if value.is_finite() {
                Ok(())
            } else {
                Err(ModelError::InvalidParam {
                    field,
                    value,
                    reason: "must be finite",
                })
            }
        }
        if self.n < 2 {
            return Err(ModelError::InvalidParam {
                field: "n",
                value: self.n as f64,
                reason: "network needs at least 2 neurons",
            });
        }
        positive("a0", self.a0)?;
        positive("a2", self.a2)?;
        positive("g_K", self.g_k)?;
        positive("E_Na", self.e_na)?;
        positive("H", self.h)?;
        positive("tau_K", self.tau_k)?;
        finite("a1", self.a1)?;
        finite("lambda", self.lambda)?;
        finite("J", self.j)?;
        if !(self.e_k < 0.0) || !self.e_k.is_finite() {
            return Err(ModelError::InvalidParam {
                field: "E_K",
                value: self.e_k,
                reason: "must be negative",
            });
        }
        if !(self.p >= 0.0) || !self.p.is_finite() {
            return Err(ModelError::InvalidParam {
                field: "P",
                value: self.p,
                reason: "must be non-negative",
            });
        }
        Ok(())
    }

    /// Flat state dimension of the classical network.
    pub fn dim(&self) -> usize {
        2 * self.n
    }
}

/// Classical parameters plus memristor constants and the Caputo order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemristiveParams {
    pub base: ModelParams,
    pub alpha: f64,
    pub k: f64,
    pub beta: f64,
    pub gamma: Vec<f64>,
    pub b: f64,
}

impl MemristiveParams {
    /// Wilson preset with uniform drive weights `gamma_i = gamma`.
    pub fn wilson(n: usize, coupling: f64, alpha: f64, k: f64, beta: f64, b: f64, gamma: f64) -> Self {
        Self {
            base: ModelParams::wilson(n, coupling),
            alpha,
            k,
            beta,
            gamma: vec![gamma; n],
            b,
        }
    }

    /// Checks sign constraints; the a0 > k/β hypothesis is checked separately
    /// by [`MemristiveParams::check_hypothesis`].
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ModelError::InvalidParam {
                field: "alpha",
                value: self.alpha,
                reason: "must lie in (0, 1)",
            });
        }
        for (field, value) in [("k", self.k), ("beta", self.beta), ("b", self.b)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ModelError::InvalidParam {
                    field,
                    value,
                    reason: "must be positive and finite",
                });
            }
        }
        if self.gamma.len() != self.base.n {
            return Err(ModelError::Dimension {
                expected: self.base.n,
                got: self.gamma.len(),
            });
        }
        if let Some(g) = self.gamma.iter().find(|g| !g.is_finite()) {
            return Err(ModelError::InvalidParam {
                field: "gamma",
                value: *g,
                reason: "must be finite",
            });
        }
        Ok(())
    }

    pub fn check_hypothesis(&self) -> Result<()> {
        let ratio = self.k / self.beta;
        if self.base.a0 > ratio {
            Ok(())
        } else {
            Err(ModelError::Hypothesis {
                a0: self.base.a0,
                ratio,
            })
        }
    }

    pub fn dim(&self) -> usize {
        2 * self.base.n + 1
    }
}

/// Network state at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkState {
    #[serde(rename = "V")]
    pub v: Vec<f64>,
    #[serde(rename = "R")]
    pub r: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
}

impl NetworkState {
    pub fn new(v: Vec<f64>, r: Vec<f64>, rho: Option<f64>) -> Result<Self> {
        if v.len() != r.len() {
            return Err(ModelError::Dimension {
                expected: v.len(),
                got: r.len(),
            });
        }
        Ok(Self { v, r, rho })
    }

    /// All neurons at the same `(v, r)`.
    pub fn synchronized(n: usize, v: f64, r: f64, rho: Option<f64>) -> Self {
        Self {
            v: vec![v; n],
            r: vec![r; n],
            rho,
        }
    }

    pub fn n(&self) -> usize {
        self.v.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.n() + usize::from(self.rho.is_some())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        out.extend_from_slice(&self.v);
        out.extend_from_slice(&self.r);
        if let Some(rho) = self.rho {
            out.push(rho);
        }
        out
    }

    pub fn from_flat(y: &[f64], n: usize, memristive: bool) -> Result<Self> {
        let expected = 2 * n + usize::from(memristive);
        if y.len() != expected {
            return Err(ModelError::Dimension { expected, got: y.len() });
        }
        Ok(Self {
            v: y[..n].to_vec(),
            r: y[n..2 * n].to_vec(),
            rho: memristive.then(|| y[2 * n]),
        })
    }

    /// Squared Euclidean norm of the (V, R) part.
    pub fn norm_sq_vr(&self) -> f64 {
        self.v.iter().chain(&self.r).map(|x| x * x).sum()
    }

    pub fn check_dims(&self, n: usize) -> Result<()> {
        if self.v.len() != n {
            return Err(ModelError::Dimension {
                expected: n,
                got: self.v.len(),
            });
        }
        if self.r.len() != n {
            return Err(ModelError::Dimension {
                expected: n,
                got: self.r.len(),
            });
        }
        Ok(())
    }
}

/// Sodium conductance `a0 + a1 s + a2 s²`.
#[inline]
pub fn m_inf(s: f64, p: &ModelParams) -> f64 {
    p.a0 + s * (p.a1 + p.a2 * s)
}

/// Potassium rest current `H / (1 + exp(-λ(s - E_K)))`, evaluated without
/// overflow for large |λ(s - E_K)|.
#[inline]
pub fn r_inf(s: f64, p: &ModelParams) -> f64 {
    let x = p.lambda * (s - p.e_k);
    if x >= 0.0 {
        p.h / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        p.h * e / (1.0 + e)
    }
}

/// Memristor window `ψ(s) = s(1 - βs)`.
#[inline]
pub fn psi(s: f64, beta: f64) -> f64 {
    s - beta * s * s
}

/// Right-hand side of a first-order system on a flat state vector.
pub trait VectorField {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]);
}

impl<F> VectorField for (usize, F)
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    fn dim(&self) -> usize {
        self.0
    }

    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        (self.1)(t, y, dy)
    }
}

/// Classical HHW network field.
#[derive(Debug, Clone, Copy)]
pub struct HhwField<'a> {
    pub params: &'a ModelParams,
}

impl<'a> HhwField<'a> {
    pub fn new(params: &'a ModelParams) -> Self {
        Self { params }
    }
}

/// Shared (V, R) part. `extra_v` is added to each dVᵢ as `extra_v · Vᵢ`.
#[inline]
fn hhw_core(p: &ModelParams, y: &[f64], dy: &mut [f64], extra_v: f64) {
    let n = p.n;
    let (v, rest) = y.split_at(n);
    let r = &rest[..n];
    let v_sum: f64 = v.iter().sum();
    let nf = n as f64;
    let inv_tau = 1.0 / p.tau_k;
    let (dv, drest) = dy.split_at_mut(n);
    let dr = &mut drest[..n];
    for i in 0..n {
        let vi = v[i];
        // Σ_j P(V_j - V_i) over all j
        let coupling = p.p * (v_sum - nf * vi);
        dv[i] = -m_inf(vi, p) * (vi - p.e_na) - p.g_k * r[i] * (vi - p.e_k) + p.j + coupling + extra_v * vi;
        dr[i] = (r_inf(vi, p) - r[i]) * inv_tau;
    }
}

impl VectorField for HhwField<'_> {
    fn dim(&self) -> usize {
        self.params.dim()
    }

    fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        hhw_core(self.params, y, dy, 0.0);
    }
}

/// Memristive network field. The Caputo order is carried by the integrator.
#[derive(Debug, Clone, Copy)]
pub struct MemristiveField<'a> {
    pub params: &'a MemristiveParams,
}

impl<'a> MemristiveField<'a> {
    pub fn new(params: &'a MemristiveParams) -> Self {
        Self { params }
    }
}

impl VectorField for MemristiveField<'_> {
    fn dim(&self) -> usize {
        self.params.dim()
    }

    fn eval(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let mp = self.params;
        let n = mp.base.n;
        let rho = y[2 * n];
        hhw_core(&mp.base, y, dy, mp.k * psi(rho, mp.beta));
        let drive: f64 = mp.gamma.iter().zip(&y[..n]).map(|(g, v)| g * v).sum();
        dy[2 * n] = drive - mp.b * rho;
    }
}

/// Classical right-hand side on a structured state.
pub fn hhw_rhs(state: &NetworkState, p: &ModelParams) -> Result<NetworkState> {
    if state.rho.is_some() {
        return Err(ModelError::UnexpectedRho);
    }
    state.check_dims(p.n)?;
    let y = state.to_flat();
    let mut dy = vec![0.0; y.len()];
    HhwField::new(p).eval(0.0, &y, &mut dy);
    NetworkState::from_flat(&dy, p.n, false)
}

/// Memristive right-hand side on a structured state.
pub fn memristive_rhs(state: &NetworkState, p: &MemristiveParams) -> Result<NetworkState> {
    if state.rho.is_none() {
        return Err(ModelError::MissingRho);
    }
    state.check_dims(p.base.n)?;
    if p.gamma.len() != p.base.n {
        return Err(ModelError::Dimension {
            expected: p.base.n,
            got: p.gamma.len(),
        });
    }
    let y = state.to_flat();
    let mut dy = vec![0.0; y.len()];
    MemristiveField::new(p).eval(0.0, &y, &mut dy);
    NetworkState::from_flat(&dy, p.base.n, true)
}

/// Which model a trajectory or scenario refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Classical,
    Memristive,
}

/// Parameters of either model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", content = "params", rename_all = "snake_case")]
pub enum AnyParams {
    Classical(ModelParams),
    Memristive(MemristiveParams),
}

impl AnyParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            AnyParams::Classical(_) => ModelKind::Classical,
            AnyParams::Memristive(_) => ModelKind::Memristive,
        }
    }

    pub fn base(&self) -> &ModelParams {
        match self {
            AnyParams::Classical(p) => p,
            AnyParams::Memristive(m) => &m.base,
        }
    }

    pub fn base_mut(&mut self) -> &mut ModelParams {
        match self {
            AnyParams::Classical(p) => p,
            AnyParams::Memristive(m) => &mut m.base,
        }
    }

    pub fn n(&self) -> usize {
        self.base().n
    }

    pub fn dim(&self) -> usize {
        match self {
            AnyParams::Classical(p) => p.dim(),
            AnyParams::Memristive(m) => m.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AnyParams::Classical(p) => p.validate(),
            AnyParams::Memristive(m) => m.validate(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wilson2() -> ModelParams {
        ModelParams::wilson(2, 0.0)
    }

    #[test]
    fn m_inf_values() {
        let p = wilson2();
        assert_eq!(m_inf(0.0, &p), 17.8);
        assert!((m_inf(1.0, &p) - 99.2).abs() < 1e-12);
        let vertex = -p.a1 / (2.0 * p.a2);
        let expect = p.a0 - p.a1 * p.a1 / (4.0 * p.a2);
        assert!((m_inf(vertex, &p) - expect).abs() < 1e-12);
    }

    #[test]
    fn r_inf_values() {
        let p = wilson2();
        assert_eq!(r_inf(p.e_k, &p), 0.5);
        assert_eq!(r_inf(1e6, &p), 1.0);
        let mut q = p.clone();
        q.lambda = 2.0;
        let v = r_inf(-0.95 + 10.0, &q);
        // 1/(1+e^{-20}) = 1 - 2.0611536e-9 + ...
        assert!((v - (1.0 - 2.061_153_618_190_204_4e-9)).abs() < 1e-15);
        assert!(r_inf(-30.0, &p) > 0.0);
    }

    #[test]
    fn psi_roots_and_vertex() {
        let beta = 2.5;
        assert_eq!(psi(0.0, beta), 0.0);
        assert!(psi(1.0 / beta, beta).abs() < 1e-15);
        assert!((psi(0.5 / beta, beta) - 0.25 / beta).abs() < 1e-15);
    }

    #[test]
    fn rhs_at_origin() {
        let p = wilson2();
        let s = NetworkState::synchronized(2, 0.0, 0.0, None);
        let d = hhw_rhs(&s, &p).unwrap();
        for i in 0..2 {
            assert!((d.v[i] - p.a0 * p.e_na).abs() < 1e-14);
            assert!((d.r[i] - r_inf(0.0, &p) / p.tau_k).abs() < 1e-15);
        }
    }

    #[test]
    fn rhs_identical_neurons_agree() {
        let p = ModelParams::wilson(2, 500.0);
        let s = NetworkState::synchronized(2, -0.3, 0.4, None);
        let d = hhw_rhs(&s, &p).unwrap();
        assert_eq!(d.v[0], d.v[1]);
        assert_eq!(d.r[0], d.r[1]);
    }

    #[test]
    fn rhs_dimension_and_rho_errors() {
        let p = wilson2();
        let s = NetworkState {
            v: vec![0.0; 3],
            r: vec![0.0; 3],
            rho: None,
        };
        assert!(matches!(hhw_rhs(&s, &p), Err(ModelError::Dimension { .. })));
        let s = NetworkState::synchronized(2, 0.0, 0.0, Some(0.0));
        assert_eq!(hhw_rhs(&s, &p), Err(ModelError::UnexpectedRho));
        let mp = MemristiveParams::wilson(2, 0.0, 0.5, 1.0, 1.0, 2.0, 0.1);
        let s = NetworkState::synchronized(2, 0.0, 0.0, None);
        assert_eq!(memristive_rhs(&s, &mp), Err(ModelError::MissingRho));
    }

    #[test]
    fn memristive_reduces_at_window_roots() {
        let mut mp = MemristiveParams::wilson(2, 3.0, 0.5, 1.5, 0.8, 2.0, 0.1);
        mp.gamma = vec![0.3, -0.2];
        for rho in [0.0, 1.0 / mp.beta] {
            let s = NetworkState::new(vec![0.2, -0.4], vec![0.1, 0.6], Some(rho)).unwrap();
            let classical = NetworkState::new(s.v.clone(), s.r.clone(), None).unwrap();
            let dm = memristive_rhs(&s, &mp).unwrap();
            let dc = hhw_rhs(&classical, &mp.base).unwrap();
            for i in 0..2 {
                assert!((dm.v[i] - dc.v[i]).abs() < 1e-12);
                assert_eq!(dm.r[i], dc.r[i]);
            }
            let drive = 0.3 * 0.2 + -0.2 * -0.4;
            assert!((dm.rho.unwrap() - (drive - mp.b * rho)).abs() < 1e-15);
        }
    }

    #[test]
    fn memristive_rho_decay_only() {
        let mp = MemristiveParams::wilson(3, 1.0, 0.5, 1.0, 1.0, 2.0, 1.0);
        let s = NetworkState::synchronized(3, 0.0, 0.0, Some(1.0));
        let d = memristive_rhs(&s, &mp).unwrap();
        assert_eq!(d.rho, Some(-2.0));
    }

    #[test]
    fn validation_names_fields() {
        let mut p = wilson2();
        p.tau_k = 0.0;
        match p.validate() {
            Err(ModelError::InvalidParam { field, .. }) => assert_eq!(field, "tau_K"),
            other => panic!("{other:?}"),
        }
        let mut p = wilson2();
        p.e_k = 0.1;
        assert!(p.validate().is_err());
        let mut p = wilson2();
        p.n = 1;
        assert!(p.validate().is_err());
        let mut mp = MemristiveParams::wilson(2, 0.0, 0.5, 20.0, 1.0, 2.0, 0.1);
        assert!(mp.validate().is_ok());
        assert!(matches!(mp.check_hypothesis(), Err(ModelError::Hypothesis { .. })));
        mp.alpha = 1.0;
        assert!(mp.validate().is_err());
    }

    #[test]
    fn flat_layout_round_trip() {
        let s = NetworkState::new(vec![1.0, 2.0], vec![3.0, 4.0], Some(5.0)).unwrap();
        assert_eq!(s.to_flat(), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(NetworkState::from_flat(&s.to_flat(), 2, true).unwrap(), s);
        assert!(NetworkState::from_flat(&[1.0, 2.0, 3.0], 2, false).is_err());
    }

    #[test]
    fn params_json_uses_physical_names() {
        let p = wilson2();
        let text = serde_json::to_string(&p).unwrap();
        assert!(text.contains("\"tau_K\":4.2"));
        let back: ModelParams = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }
}
