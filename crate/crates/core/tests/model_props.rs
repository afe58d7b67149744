use hhw_core::model::*;
use proptest::prelude::*;

/// Scalar re-evaluation of the classical vector field for neuron `i`.
fn hand_coded(p: &ModelParams, v: &[f64], r: &[f64], i: usize) -> (f64, f64) {
    let m = p.a0 + p.a1 * v[i] + p.a2 * v[i] * v[i];
    let mut coupling = 0.0;
    for vj in v {
        coupling += p.p * (vj - v[i]);
    }
    let dv = -m * (v[i] - p.e_na) - p.g_k * r[i] * (v[i] - p.e_k) + p.j + coupling;
    let rinf = p.h / (1.0 + (-p.lambda * (v[i] - p.e_k)).exp());
    (dv, (rinf - r[i]) / p.tau_k)
}

#[test]
fn wilson_example_matches_hand_coded_field() {
    let p = ModelParams::wilson(2, 3.0);
    let s = NetworkState::new(vec![0.1, -0.1], vec![0.0, 0.0], None).unwrap();
    let d = hhw_rhs(&s, &p).unwrap();
    for i in 0..2 {
        let (dv, dr) = hand_coded(&p, &s.v, &s.r, i);
        assert!((d.v[i] - dv).abs() <= 1e-14 * dv.abs().max(1.0));
        assert!((d.r[i] - dr).abs() <= 1e-14);
    }
}

fn state(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-3.0f64..3.0, n),
        prop::collection::vec(-3.0f64..3.0, n),
    )
}

proptest! {
    #[test]
    fn field_matches_hand_coded((v, r) in state(4), p_c in 0.0f64..50.0, j in -1.0f64..1.0) {
        let mut p = ModelParams::wilson(4, p_c);
        p.j = j;
        let d = hhw_rhs(&NetworkState::new(v.clone(), r.clone(), None).unwrap(), &p).unwrap();
        for i in 0..4 {
            let (dv, dr) = hand_coded(&p, &v, &r, i);
            prop_assert!((d.v[i] - dv).abs() <= 1e-12 * dv.abs().max(1.0));
            prop_assert!((d.r[i] - dr).abs() <= 1e-14);
        }
    }

    #[test]
    fn permutation_equivariance((v, r) in state(5), shift in 1usize..5, p_c in 0.0f64..100.0) {
        let p = ModelParams::wilson(5, p_c);
        let perm: Vec<usize> = (0..5).map(|i| (i + shift) % 5).collect();
        let base = hhw_rhs(&NetworkState::new(v.clone(), r.clone(), None).unwrap(), &p).unwrap();
        let pv: Vec<f64> = perm.iter().map(|&i| v[i]).collect();
        let pr: Vec<f64> = perm.iter().map(|&i| r[i]).collect();
        let permuted = hhw_rhs(&NetworkState::new(pv, pr, None).unwrap(), &p).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            prop_assert!((permuted.v[k] - base.v[i]).abs() <= 1e-12 * base.v[i].abs().max(1.0));
            prop_assert_eq!(permuted.r[k], base.r[i]);
        }
    }

    #[test]
    fn synchronization_manifold_is_invariant(v in -5.0f64..5.0, r in -5.0f64..5.0, n in 2usize..7, p_c in 0.0f64..2000.0) {
        let p = ModelParams::wilson(n, p_c);
        let d = hhw_rhs(&NetworkState::synchronized(n, v, r, None), &p).unwrap();
        for i in 1..n {
            prop_assert_eq!(d.v[i] - d.v[0], 0.0);
            prop_assert_eq!(d.r[i] - d.r[0], 0.0);
        }
    }

    #[test]
    fn r_inf_stays_in_open_range(s in -30.0f64..30.0, lambda in -20.0f64..20.0, h in 0.1f64..5.0) {
        let mut p = ModelParams::wilson(2, 0.0);
        p.lambda = lambda;
        p.h = h;
        let v = r_inf(s, &p);
        prop_assert!((0.0..=h).contains(&v), "{v}");
        // strictly inside wherever 1 + e^{-x} is distinguishable from 1
        if (lambda * (s - p.e_k)).abs() < 36.0 {
            prop_assert!(v > 0.0 && v < h, "{v}");
        }
    }

    #[test]
    fn memristive_with_zero_k_matches_classical((v, r) in state(3), rho in -3.0f64..3.0) {
        let mut mp = MemristiveParams::wilson(3, 7.0, 0.5, 1.0, 1.0, 2.0, 0.1);
        mp.k = 0.0;
        let s = NetworkState::new(v.clone(), r.clone(), Some(rho)).unwrap();
        let dm = memristive_rhs(&s, &mp).unwrap();
        let dc = hhw_rhs(&NetworkState::new(v.clone(), r, None).unwrap(), &mp.base).unwrap();
        prop_assert_eq!(&dm.v, &dc.v);
        prop_assert_eq!(&dm.r, &dc.r);
        let drho: f64 = v.iter().map(|x| 0.1 * x).sum::<f64>() - 2.0 * rho;
        prop_assert!((dm.rho.unwrap() - drho).abs() <= 1e-14);
    }
}
