//! Second, textually independent evaluation of the closed-form constants.
//! Works on plain numbers and shares no code with the library.

#![allow(dead_code)]

#[derive(Clone, Copy, Debug)]
pub struct Consts {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub gk: f64,
    pub ena: f64,
    pub ek: f64,
    pub h: f64,
    pub lam: f64,
    pub tau: f64,
    pub j: f64,
    pub n: f64,
    pub p: f64,
}

pub fn wilson(n: usize, p: f64) -> Consts {
    Consts {
        a0: 17.8,
        a1: 47.6,
        a2: 33.8,
        gk: 26.0,
        ena: 0.5,
        ek: -0.95,
        h: 1.0,
        lam: 1.0,
        tau: 4.2,
        j: 0.0,
        n: n as f64,
        p,
    }
}

fn sum(terms: &[f64]) -> f64 {
    terms.iter().fold(0.0, |acc, t| acc + t)
}

pub fn q(c: &Consts) -> f64 {
    let t1 = c.gk * (1.0 + c.h);
    let t2 = (c.a1 * c.ena).abs();
    let t3 = c.gk * c.lam.abs() * c.h * c.ek.abs();
    let t4 = 6.0 * c.a1.powi(2) / c.a2;
    let t5 = 6.0 * c.a2 / c.ena.powi(2);
    let t6 = (6.0 / c.a2) * (c.gk * c.lam * c.h).powi(2);
    sum(&[t1, t2, t3, t4, t5, t6])
}

fn damping(c: &Consts) -> f64 {
    c.a0 + c.lam.powi(2) * c.h.powi(2) / (2.0 * c.tau)
}

pub fn p_star(c: &Consts) -> f64 {
    let v = (q(c) - damping(c)) / c.n;
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

pub fn mu(c: &Consts) -> f64 {
    let b1 = 0.5 / c.tau;
    let b2 = damping(c) + c.n * c.p - q(c);
    if b1 < b2 {
        b1
    } else {
        b2
    }
}

/// Sum over n identical neurons of the printed absorbing-radius terms, with
/// `d` the decay constant and `s` the recovery magnitude √(r² + H²).
fn neuron_terms(c: &Consts, d: f64, s: f64) -> (f64, f64, f64) {
    let lin = c.ena.abs() * d + c.gk * s * c.ek.abs() + c.j.abs();
    let quad = (c.ena * c.a1).abs() + c.gk * s;
    let quart = 2.0 * (c.a1 + c.ena * c.a2).powi(4) / (c.a2 / 2.0).powi(3);
    (lin * lin, quad * quad / c.a2, quart)
}

pub fn g(c: &Consts) -> f64 {
    let s = (1.0 + c.h * c.h).sqrt();
    let (lin, quad, quart) = neuron_terms(c, c.a0, s);
    let per = lin / c.a0.powi(2) + quad / c.a0 + quart / c.a0;
    1.0 + c.n * c.h.powi(2) + c.n * per
}

pub fn m_r0(c: &Consts, r0: &[f64]) -> f64 {
    r0.iter()
        .map(|r| {
            let (lin, quad, quart) = neuron_terms(c, c.a0, (r * r + c.h * c.h).sqrt());
            lin / c.a0 + quad + quart
        })
        .sum()
}

/// Memristive additions: `k`, `beta`, `gamma_max` (max |γᵢ|), `b`, `alpha`;
/// `gamma_fn` evaluates Γ so the caller picks an independent implementation.
#[derive(Clone, Copy, Debug)]
pub struct Memristor {
    pub k: f64,
    pub beta: f64,
    pub gamma_max: f64,
    pub b: f64,
    pub alpha: f64,
}

pub fn g_alpha(c: &Consts, m: &Memristor, gamma_fn: impl Fn(f64) -> f64) -> f64 {
    let d = c.a0 - m.k / m.beta;
    let ga = gamma_fn(m.alpha);
    let s = (1.0 + c.h * c.h).sqrt();
    let (lin, quad, quart) = neuron_terms(c, d, s);
    1.0 + c.n * c.h.powi(2) + c.n * (ga * lin / d.powi(2) + ga * (quad + quart) / d)
}

pub fn p_star_frac(c: &Consts, m: &Memristor) -> f64 {
    let v = (q(c) + m.k / (2.0 * m.beta) - damping(c)) / c.n;
    v.max(0.0)
}

pub fn delta(c: &Consts, m: &Memristor) -> f64 {
    let b2 = damping(c) + c.n * c.p - q(c) - m.k / (2.0 * m.beta);
    (0.5 / c.tau).min(b2)
}

pub fn rho_bound(c: &Consts, m: &Memristor, gamma_fn: impl Fn(f64) -> f64) -> f64 {
    1.0 + g_alpha(c, m, &gamma_fn) / m.b.powi(2) * m.gamma_max.powi(2) * gamma_fn(m.alpha)
}
