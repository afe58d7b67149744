//! Gamma and Mittag-Leffler functions on the real line, plus the algebraic
//! fractional Gronwall envelope.
//!
//! `E_α(z) = Σ zⁿ / Γ(nα + 1)` and `E_{α,β}(z) = Σ zⁿ / Γ(nα + β)`.
//!
//! Evaluation strategy for the one-parameter function with `0 < α < 1`:
//!
//! - `z ≥ 0`: Taylor series (all terms positive, no cancellation).
//! - `z < 0`, small `|z|`: Taylor series with compensated summation, accepted
//!   only if the rounding error estimate `4ε Σ|tₙ|` is within tolerance.
//! - `z < -asymptotic_switch_radius`: the algebraic asymptotic expansion
//!   `-Σ_{k=1..K} z^{-k} / Γ(1 - kα)`, accepted when its truncation estimate
//!   is within tolerance.
//! - otherwise: the Laplace-type integral representation of the completely
//!   monotone function `E_α(-x)`, evaluated by adaptive Gauss-Kronrod
//!   quadrature.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialFnError {
    #[error("argument {name} = {value} outside domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("gamma({0}) overflows f64")]
    Overflow(f64),
    #[error("series did not reach tolerance within {terms} terms (z = {z})")]
    NonConvergence { terms: usize, z: f64 },
    #[error("invalid Mittag-Leffler configuration: {0}")]
    Config(&'static str),
}

pub type Result<T> = std::result::Result<T, SpecialFnError>;

/// Largest argument for which Γ(x) is finite in f64.
const GAMMA_MAX_ARG: f64 = 171.624_376_956_302_7;

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_gamma(x: f64) -> f64 {
    // valid for x >= 0.5
    let x = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    // split the power to stay finite up to GAMMA_MAX_ARG
    let half = t.powf((x + 0.5) / 2.0);
    (2.0 * PI).sqrt() * half * (half * (-t).exp()) * acc
}

/// Γ(x) for `x > 0`.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(SpecialFnError::Domain {
            name: "x",
            value: x,
            expected: "x > 0",
        });
    }
    if x > GAMMA_MAX_ARG {
        return Err(SpecialFnError::Overflow(x));
    }
    if x.fract() == 0.0 && x <= 30.0 {
        let mut f = 1.0;
        let mut k = 2.0;
        while k < x {
            f *= k;
            k += 1.0;
        }
        return Ok(f);
    }
    Ok(gamma_any(x))
}

/// Γ(x) for any real non-pole `x`, using the reflection formula below 1/2.
/// Returns ±∞ at the poles.
pub(crate) fn gamma_any(x: f64) -> f64 {
    if x < 0.5 {
        let s = (PI * x).sin();
        if s == 0.0 {
            return f64::INFINITY;
        }
        PI / (s * lanczos_gamma(1.0 - x))
    } else {
        lanczos_gamma(x)
    }
}

/// 1/Γ(x) for any real `x`; zero at the poles x = 0, -1, -2, ….
pub fn recip_gamma(x: f64) -> f64 {
    if x <= 0.0 && x.fract() == 0.0 {
        return 0.0;
    }
    if x > GAMMA_MAX_ARG {
        return 0.0;
    }
    if x > 0.0 && x.fract() == 0.0 && x <= 30.0 {
        return 1.0 / gamma(x).unwrap_or(f64::INFINITY);
    }
    if x < 0.5 {
        // 1/Γ(x) = sin(πx) Γ(1-x) / π
        let g = lanczos_gamma(1.0 - x);
        (PI * x).sin() * g / PI
    } else {
        1.0 / lanczos_gamma(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLConfig {
    /// Absolute truncation tolerance.
    pub series_tolerance: f64,
    pub max_terms: usize,
    /// |z| above which the asymptotic expansion is tried for negative real z.
    pub asymptotic_switch_radius: f64,
}

impl Default for MLConfig {
    fn default() -> Self {
        Self {
            series_tolerance: 1e-12,
            max_terms: 500,
            asymptotic_switch_radius: 10.0,
        }
    }
}

impl MLConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.series_tolerance > 0.0) {
            return Err(SpecialFnError::Config("series_tolerance must be > 0"));
        }
        if self.max_terms < 16 {
            return Err(SpecialFnError::Config("max_terms must be >= 16"));
        }
        if !(self.asymptotic_switch_radius > 0.0) {
            return Err(SpecialFnError::Config("asymptotic_switch_radius must be > 0"));
        }
        Ok(())
    }
}

const ASYMPTOTIC_TERMS: usize = 10;

/// Neumaier-compensated running sum that also tracks Σ|t|.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
    abs_sum: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs_sum += x.abs();
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

struct SeriesOutcome {
    value: f64,
    rounding_error: f64,
}

/// Taylor series Σ zⁿ/Γ(nα + β). Terms are formed as z^n · (1/Γ) in log
/// space when large to avoid spurious overflow of z^n.
fn ml_series(alpha: f64, beta: f64, z: f64, cfg: &MLConfig) -> Result<SeriesOutcome> {
    let mut acc = CompensatedSum::default();
    let ln_abs_z = z.abs().ln();
    // number of consecutive tiny terms required before stopping; the term
    // sequence is not monotone for small alpha
    let mut quiet = 0;
    for n in 0..cfg.max_terms {
        let arg = n as f64 * alpha + beta;
        let term = if n == 0 {
            recip_gamma(beta)
        } else if z == 0.0 {
            0.0
        } else {
            let sign = if z < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
            if arg > GAMMA_MAX_ARG {
                sign * (n as f64 * ln_abs_z - ln_gamma_large(arg)).exp()
            } else {
                let mag = (n as f64 * ln_abs_z).exp();
                sign * mag * recip_gamma(arg)
            }
        };
        acc.add(term);
        if term.abs() <= cfg.series_tolerance * 1e-3 * acc.value().abs().max(1.0) {
            quiet += 1;
            // past the peak: |z|^n/Γ(nα+β) is decreasing once nα+β is large
            if quiet >= 3 && n as f64 * alpha + beta > 2.0 {
                return Ok(SeriesOutcome {
                    value: acc.value(),
                    rounding_error: 4.0 * f64::EPSILON * acc.abs_sum,
                });
            }
        } else {
            quiet = 0;
        }
        if z == 0.0 {
            return Ok(SeriesOutcome {
                value: acc.value(),
                rounding_error: 0.0,
            });
        }
    }
    Err(SpecialFnError::NonConvergence {
        terms: cfg.max_terms,
        z,
    })
}

/// Stirling series for ln Γ(x), x large.
fn ln_gamma_large(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

/// Algebraic asymptotic expansion -Σ_{k=1..K} z^{-k}/Γ(β - kα) for z → -∞.
/// Returns the value and a truncation estimate (magnitude of the first
/// omitted term, or the last included one if that is larger).
fn ml_asymptotic(alpha: f64, beta: f64, z: f64) -> (f64, f64) {
    let mut sum = 0.0;
    let mut last = 0.0;
    for k in 1..=ASYMPTOTIC_TERMS {
        let t = z.powi(-(k as i32)) * recip_gamma(beta - k as f64 * alpha);
        sum -= t;
        last = t.abs();
    }
    let next =
        (z.powi(-(ASYMPTOTIC_TERMS as i32 + 1)) * recip_gamma(beta - (ASYMPTOTIC_TERMS as f64 + 1.0) * alpha)).abs();
    (sum, next.max(if next == 0.0 { last * 1e-3 } else { 0.0 }))
}

/// E_α(-x) for x > 0, 0 < α < 1 via
/// E_α(-x) = sin(απ)/(απ) ∫₀^∞ exp(-(xu)^{1/α}) / (u² + 2u cos(απ) + 1) du,
/// folded onto [0, 1] with u ↦ 1/u.
fn ml_negative_integral(alpha: f64, x: f64, tol: f64) -> f64 {
    let theta = alpha * PI;
    let c = theta.cos();
    let inv_alpha = 1.0 / alpha;
    let integrand = |u: f64| {
        let den = u * u + 2.0 * u * c + 1.0;
        let near = (-(x * u).powf(inv_alpha)).exp();
        let far = if u == 0.0 {
            0.0
        } else {
            (-(x / u).powf(inv_alpha)).exp()
        };
        (near + far) / den
    };
    let scale = theta.sin() / theta;
    scale * adaptive_gauss_kronrod(&integrand, 0.0, 1.0, tol * 0.1 / scale.max(1e-300), 60)
}

// 15-point Kronrod nodes/weights with embedded 7-point Gauss weights.
const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(mid);
    let mut kronrod = GK_WEIGHTS[7] * fc;
    let mut gauss = G7_WEIGHTS[3] * fc;
    for i in 0..7 {
        let dx = half * GK_NODES[i];
        let s = f(mid - dx) + f(mid + dx);
        kronrod += GK_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += G7_WEIGHTS[i / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn adaptive_gauss_kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (val, err) = gk15(f, a, b);
    if err <= tol || depth == 0 || (b - a) < 1e-15 {
        return val;
    }
    let m = 0.5 * (a + b);
    adaptive_gauss_kronrod(f, a, m, 0.5 * tol, depth - 1) + adaptive_gauss_kronrod(f, m, b, 0.5 * tol, depth - 1)
}

fn check_alpha(name: &'static str, alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(SpecialFnError::Domain {
            name,
            value: alpha,
            expected: "0 < alpha <= 1",
        })
    }
}

/// One-parameter Mittag-Leffler function E_α(z) for real z and 0 < α ≤ 1.
pub fn mittag_leffler(alpha: f64, z: f64, cfg: &MLConfig) -> Result<f64> {
    check_alpha("alpha", alpha)?;
    cfg.validate()?;
    if z.is_nan() {
        return Err(SpecialFnError::Domain {
            name: "z",
            value: z,
            expected: "finite z",
        });
    }
    if alpha == 1.0 {
        return Ok(z.exp());
    }
    if z >= 0.0 {
        return ml_series(alpha, 1.0, z, cfg).map(|s| s.value);
    }
    let x = -z;
    let tol = cfg.series_tolerance;
    if x > cfg.asymptotic_switch_radius {
        let (value, trunc) = ml_asymptotic(alpha, 1.0, z);
        if trunc <= tol {
            return Ok(value);
        }
    } else if let Ok(s) = ml_series(alpha, 1.0, z, cfg) {
        if s.rounding_error <= tol {
            return Ok(s.value.clamp(0.0, 1.0));
        }
    }
    Ok(ml_negative_integral(alpha, x, tol).clamp(0.0, 1.0))
}

/// Two-parameter Mittag-Leffler function E_{α₁,α₂}(z).
pub fn mittag_leffler2(alpha1: f64, alpha2: f64, z: f64, cfg: &MLConfig) -> Result<f64> {
    check_alpha("alpha1", alpha1)?;
    if !(alpha2 > 0.0) {
        return Err(SpecialFnError::Domain {
            name: "alpha2",
            value: alpha2,
            expected: "alpha2 > 0",
        });
    }
    if alpha2 == 1.0 {
        return mittag_leffler(alpha1, z, cfg);
    }
    cfg.validate()?;
    if z < -cfg.asymptotic_switch_radius && alpha1 < 1.0 {
        let (value, trunc) = ml_asymptotic(alpha1, alpha2, z);
        if trunc <= cfg.series_tolerance {
            return Ok(value);
        }
    }
    let s = ml_series(alpha1, alpha2, z, cfg)?;
    if s.rounding_error > cfg.series_tolerance {
        return Err(SpecialFnError::NonConvergence {
            terms: cfg.max_terms,
            z,
        });
    }
    Ok(s.value)
}

/// Algebraic form of the fractional Gronwall bound for
/// `D^α x ≤ p - q x`:
/// `x0·Γ(1+α)/(Γ(1+α) + q t^α) + (p/q)·Γ(α)`.
pub fn fractional_gronwall_envelope(x0: f64, p: f64, q: f64, alpha: f64, t: f64) -> Result<f64> {
    if !(q > 0.0) {
        return Err(SpecialFnError::Domain {
            name: "q",
            value: q,
            expected: "q > 0",
        });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(SpecialFnError::Domain {
            name: "alpha",
            value: alpha,
            expected: "0 < alpha < 1",
        });
    }
    if !(t >= 0.0) {
        return Err(SpecialFnError::Domain {
            name: "t",
            value: t,
            expected: "t >= 0",
        });
    }
    let g1a = gamma(1.0 + alpha)?;
    let ga = gamma(alpha)?;
    Ok(x0 * g1a / (g1a + q * t.powf(alpha)) + p / q * ga)
}
