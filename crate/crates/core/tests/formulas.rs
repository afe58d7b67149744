mod support;

use hhw_core::analysis::*;
use hhw_core::{MemristiveParams, ModelParams, NetworkState};
use proptest::prelude::*;
use support::oracle;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn consts(p: &ModelParams) -> oracle::Consts {
    oracle::Consts {
        a0: p.a0,
        a1: p.a1,
        a2: p.a2,
        gk: p.g_k,
        ena: p.e_na,
        ek: p.e_k,
        h: p.h,
        lam: p.lambda,
        tau: p.tau_k,
        j: p.j,
        n: p.n as f64,
        p: p.p,
    }
}

fn memristor(mp: &MemristiveParams) -> oracle::Memristor {
    oracle::Memristor {
        k: mp.k,
        beta: mp.beta,
        gamma_max: mp.gamma.iter().fold(0.0f64, |m, g| m.max(g.abs())),
        b: mp.b,
        alpha: mp.alpha,
    }
}

#[test]
fn wilson_constants_match_oracle_and_known_values() {
    let p = ModelParams::wilson(2, 0.0);
    let c = oracle::wilson(2, 0.0);
    let q = compute_q(&p).unwrap();
    assert!(rel_close(q, oracle::q(&c), 1e-12));
    assert!((q - 1433.91).abs() <= 0.01);
    let ps = threshold_p_star(&p).unwrap();
    assert!(rel_close(ps, oracle::p_star(&c), 1e-12));
    assert!((ps - 707.99).abs() <= 0.01);
    let g = absorbing_bound_g(&p).unwrap();
    assert!(rel_close(g, oracle::g(&c), 1e-12));
    assert!((g - 833.1).abs() <= 0.5);
}

#[test]
fn rate_at_710_uses_first_branch() {
    let p = ModelParams::wilson(2, 710.0);
    let mu = rate_mu(&p).unwrap();
    assert!(rel_close(mu, oracle::mu(&oracle::wilson(2, 710.0)), 1e-12));
    assert!((mu - 0.11905).abs() < 1e-5);
}

#[test]
fn fractional_example_shift() {
    let mp = MemristiveParams::wilson(2, 0.0, 0.5, 1.0, 1.0, 2.0, 0.1);
    let fb = fractional_bounds(&mp, None).unwrap();
    assert!((fb.p_star_frac - 708.24).abs() <= 0.01);
}

#[test]
fn mu_alpha_example() {
    // τ_K = 1 and a large P make δ = 1/(2τ_K) = 0.5
    let mut mp = MemristiveParams::wilson(2, 2000.0, 0.5, 1.0, 1.0, 2.0, 0.1);
    mp.base.tau_k = 1.0;
    assert_eq!(delta_p(&mp).unwrap(), 0.5);
    assert_eq!(oracle::delta(&consts(&mp.base), &memristor(&mp)), 0.5);
    let v = rate_mu_alpha(&mp, 1.0).unwrap();
    let g15 = std::f64::consts::PI.sqrt() / 2.0;
    assert!((v - g15 / (g15 + 1.0)).abs() < 1e-14, "{v}");
}

#[test]
fn transient_constant_matches_oracle() {
    let p = ModelParams::wilson(3, 0.0);
    let r0 = [0.3, -2.0, 5.0];
    let m = transient_constant_m(&p, &r0);
    assert!(rel_close(m, oracle::m_r0(&consts(&p), &r0), 1e-12));
    let y0 = NetworkState::new(vec![0.0; 3], r0.to_vec(), None).unwrap();
    let b = transient_bound(&p, &y0, 2.0).unwrap();
    let expect = r0.iter().map(|r| r * r).sum::<f64>() * (-2.0f64 / 4.2).exp() + m / p.a0 + 3.0;
    assert!(rel_close(b, expect, 1e-12));
}

fn model_params() -> impl Strategy<Value = ModelParams> {
    (
        2usize..8,
        0.1f64..50.0,
        -60.0f64..60.0,
        0.1f64..50.0,
        0.1f64..50.0,
        0.05f64..2.0,
        -2.0f64..-0.05,
        0.1f64..3.0,
        -3.0f64..3.0,
        0.5f64..10.0,
        -2.0f64..2.0,
        0.0f64..2000.0,
    )
        .prop_map(|(n, a0, a1, a2, g_k, e_na, e_k, h, lambda, tau_k, j, p)| ModelParams {
            n,
            a0,
            a1,
            a2,
            g_k,
            e_na,
            e_k,
            h,
            lambda,
            tau_k,
            j,
            p,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn classical_formulas_agree_with_oracle(p in model_params()) {
        let c = consts(&p);
        prop_assert!(rel_close(compute_q(&p).unwrap(), oracle::q(&c), 1e-12));
        let ps = threshold_p_star(&p).unwrap();
        let ops = oracle::p_star(&c);
        prop_assert!(rel_close(ps, ops, 1e-12) || (ps - ops).abs() < 1e-9);
        let mu = rate_mu(&p).unwrap();
        let omu = oracle::mu(&c);
        prop_assert!(rel_close(mu, omu, 1e-12) || (mu - omu).abs() < 1e-9 * oracle::q(&c));
        prop_assert!(rel_close(absorbing_bound_g(&p).unwrap(), oracle::g(&c), 1e-12));
    }

    #[test]
    fn q_is_positive(p in model_params()) {
        prop_assert!(compute_q(&p).unwrap() > 0.0);
        prop_assert!(absorbing_bound_g(&p).unwrap() >= 1.0 + p.n as f64 * p.h * p.h);
    }

    #[test]
    fn rate_positive_above_threshold(mut p in model_params(), extra in 1e-6f64..100.0) {
        let ps = threshold_p_star(&p).unwrap();
        p.p = ps + extra;
        prop_assert!(rate_mu(&p).unwrap() > 0.0);
        if ps > 0.0 {
            // second branch equals n(P - P*)
            let c = consts(&p);
            let second = c.a0 + c.lam * c.lam * c.h * c.h / (2.0 * c.tau) + c.n * p.p - oracle::q(&c);
            prop_assert!((second - p.n as f64 * extra).abs() <= 1e-9 * oracle::q(&c));
        }
    }

    #[test]
    fn fractional_formulas_agree_with_oracle(
        p in model_params(),
        alpha in 0.05f64..0.95,
        frac in 0.01f64..0.99,
        beta in 0.1f64..5.0,
        b in 0.1f64..5.0,
        gam in -2.0f64..2.0,
    ) {
        let k = frac * p.a0 * beta;
        let n = p.n;
        let mp = MemristiveParams { base: p, alpha, k, beta, gamma: vec![gam; n], b };
        let fb = fractional_bounds(&mp, None).unwrap();
        let c = consts(&mp.base);
        let m = memristor(&mp);
        prop_assert!(rel_close(fb.g_alpha, oracle::g_alpha(&c, &m, libm::tgamma), 1e-11));
        let ops = oracle::p_star_frac(&c, &m);
        prop_assert!(rel_close(fb.p_star_frac, ops, 1e-12) || (fb.p_star_frac - ops).abs() < 1e-9);
        let od = oracle::delta(&c, &m);
        prop_assert!(rel_close(fb.delta, od, 1e-12) || (fb.delta - od).abs() < 1e-9 * oracle::q(&c));
        prop_assert!(rel_close(fb.rho_bound, oracle::rho_bound(&c, &m, libm::tgamma), 1e-11));
    }

    #[test]
    fn fractional_reduces_to_classical_as_k_vanishes(p in model_params(), alpha in 0.05f64..0.95) {
        let n = p.n;
        let mp = MemristiveParams { base: p.clone(), alpha, k: 1e-12, beta: 1.0, gamma: vec![0.1; n], b: 1.0 };
        let fb = fractional_bounds(&mp, None).unwrap();
        let scale = compute_q(&p).unwrap();
        prop_assert!((fb.p_star_frac - threshold_p_star(&p).unwrap()).abs() <= 1e-9 * scale);
        prop_assert!((fb.delta - rate_mu(&p).unwrap()).abs() <= 1e-9 * scale);
    }
}
