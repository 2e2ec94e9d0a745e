use std::f64::consts::PI;

use proptest::prelude::*;

use cavdecay::config::SPEED_OF_LIGHT;
use cavdecay::evolution::{
    survival_expanded_from_parts, survival_from_parts, weak_vertex, SeriesModel,
};
use cavdecay::jacobi::{jacobi_eigen, SymMatrix};
use cavdecay::oracle::{build_system, diagonalize, survival_oracle, verify_secular, verify_tkr};
use cavdecay::spectrum::cot_sum_identity;
use cavdecay::weights::tail_bound;
use cavdecay::{
    min_strong, min_weak, solve_spectrum, weights_exact, weights_strong, weights_weak,
    CouplingRegime, PhysicalConfig, SecularConvention,
};

fn config(omega_bar: f64, g: f64, delta: f64) -> PhysicalConfig {
    PhysicalConfig::new(omega_bar, g, 2.0 * SPEED_OF_LIGHT * delta / g).unwrap()
}

fn convention() -> impl Strategy<Value = SecularConvention> {
    prop_oneof![
        Just(SecularConvention::Paper),
        Just(SecularConvention::Derived)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn roots_sit_in_their_brackets(
        log_delta in -4.0f64..-0.6,
        ratio in 0.05f64..20.0,
        conv in convention(),
    ) {
        let delta = 10f64.powf(log_delta);
        let cfg = config(1e10, 1e10 * ratio, delta);
        let s = solve_spectrum(&cfg, conv, 64).unwrap();
        let spacing = cfg.mode_spacing();
        prop_assert_eq!(s.len(), 65);
        prop_assert!(s.roots()[0] > 0.0);
        for r in 1..s.len() {
            let om = s.roots()[r];
            prop_assert!(om > r as f64 * spacing && om < (r + 1) as f64 * spacing);
            prop_assert!(s.roots()[r - 1] < om);
        }
        prop_assert!(s.max_residual() <= cfg.root_tol());
    }

    #[test]
    fn derived_weights_normalize(log_delta in -3.5f64..-1.5, ratio in 0.1f64..10.0) {
        let delta = 10f64.powf(log_delta);
        let cfg = config(1e10, 1e10 * ratio, delta);
        let k = 4000;
        let s = solve_spectrum(&cfg, SecularConvention::Derived, k).unwrap();
        let w = weights_exact(&s, &cfg).unwrap();
        prop_assert!(w.all().iter().all(|&x| x >= 0.0));
        let total = w.total();
        prop_assert!(total <= 1.0 + 1e-9);
        prop_assert!(1.0 - total <= 2.0 * tail_bound(delta, k), "total {}", total);
    }

    #[test]
    fn compact_matches_expanded(
        t in 0.0f64..50.0,
        freqs in prop::collection::vec(0.1f64..10.0, 2..40),
        raw in prop::collection::vec(0.0f64..1.0, 40),
    ) {
        let n = freqs.len();
        let norm: f64 = raw[..n].iter().sum::<f64>().max(1e-12);
        let w: Vec<f64> = raw[..n].iter().map(|x| x / norm).collect();
        let a = survival_from_parts(t, &freqs, &w).unwrap();
        let b = survival_expanded_from_parts(t, &freqs, &w).unwrap();
        prop_assert!((a - b).abs() <= 1e-12, "{} vs {}", a, b);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&a));
    }

    #[test]
    fn series_sums_agree(
        log_delta in -4.0f64..-1.0,
        periods in 0.0f64..50.0,
        strong in any::<bool>(),
    ) {
        let delta = 10f64.powf(log_delta);
        let (g, regime) = if strong { (1e12, CouplingRegime::Strong) } else { (1e8, CouplingRegime::Weak) };
        let cfg = config(1e10, g, delta);
        let t = periods * cfg.cavity_l() / cfg.light_speed();
        let k = 300;
        let m = SeriesModel::new(&cfg, regime, k).unwrap();
        let (a1, a2) = m.sums(t);
        let (b1, b2) = m.sums_expanded(t);
        // phase arguments carry absolute rounding of eps * |phase|
        let phase = (k + 1) as f64 * cfg.mode_spacing() * t;
        let tol = 1e-12 + 16.0 * f64::EPSILON * phase;
        prop_assert!((a1 - b1).abs() <= tol, "{} vs {}", a1, b1);
        prop_assert!((a2 - b2).abs() <= tol, "{} vs {}", a2, b2);
        let p = m.evaluate(t);
        prop_assert!(p >= min_bound_for(regime, delta) - m.series_slack() - 1e-12);
    }

    #[test]
    fn bounds_depend_only_on_delta(delta in 1e-6f64..0.3, scale in 0.01f64..100.0) {
        let a = config(1e10, 1e9, delta);
        let b = PhysicalConfig::new(1e10, 1e9 * scale, a.cavity_l() / scale).unwrap();
        prop_assert!((a.delta() - b.delta()).abs() <= 1e-14 * delta);
        let (wa, wb) = (min_weak(a.delta()).unwrap().value, min_weak(b.delta()).unwrap().value);
        prop_assert!((wa - wb).abs() <= 1e-14);
        let (sa, sb) = (min_strong(a.delta()).unwrap().value, min_strong(b.delta()).unwrap().value);
        prop_assert!((sa - sb).abs() <= 1e-14);
    }

    #[test]
    fn weak_bound_symmetric_about_vertex(x in 0.0f64..0.17) {
        let v = weak_vertex();
        let lo = min_weak(v - x).unwrap().value;
        let hi = min_weak(v + x).unwrap().value;
        prop_assert!((lo - hi).abs() <= 1e-12);
    }

    #[test]
    fn strong_bound_decreasing(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-9);
        prop_assert!(min_strong(lo).unwrap().value > min_strong(hi).unwrap().value);
    }

    #[test]
    fn approximate_weights_shape(delta in 0.0f64..0.3, k in 1usize..500) {
        let w = weights_weak(delta, k).unwrap();
        let s = weights_strong(delta, k).unwrap();
        prop_assert_eq!(w.len(), k + 1);
        prop_assert!((w.w0 - (1.0 - PI * delta)).abs() <= 1e-15);
        prop_assert!(s.w0 <= 1.0 && s.w0 > w.w0 - 1e-15);
        for i in 1..k {
            prop_assert!(w.wk[i] < w.wk[i - 1]);
            prop_assert_eq!(w.wk[i], s.wk[i]);
        }
    }

    #[test]
    fn cot_sum_identity_holds(u in 0.01f64..5.0) {
        prop_assume!((u - u.round()).abs() > 1e-3);
        let n = 200_000;
        let s = cot_sum_identity(u, n).unwrap();
        // tail of sum 1/(k^2 - u^2) beyond n is about 1/n
        prop_assert!((s.partial_sum - s.closed_form).abs() <= 2.0 / n as f64);
    }

    #[test]
    fn jacobi_reconstructs(entries in prop::collection::vec(-10.0f64..10.0, 15)) {
        let n = 5;
        let mut m = SymMatrix::zeros(n);
        let mut it = entries.iter();
        for i in 0..n {
            for j in i..n {
                m.set(i, j, *it.next().unwrap());
            }
        }
        let e = jacobi_eigen(&m).unwrap();
        let scale = m.frobenius_norm().max(1.0);
        prop_assert!(e.orthonormality_defect() <= 1e-13);
        prop_assert!(e.completeness_defect() <= 1e-13);
        prop_assert!(e.residual(&m) <= 1e-12 * scale);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let trace: f64 = (0..n).map(|i| m.get(i, i)).sum();
        prop_assert!((trace - e.values.iter().sum::<f64>()).abs() <= 1e-12 * scale);
    }
}

fn min_bound_for(regime: CouplingRegime, delta: f64) -> f64 {
    match regime {
        CouplingRegime::Weak => min_weak(delta).unwrap().value,
        CouplingRegime::Strong => min_strong(delta).unwrap().value,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn small_oracle_invariants(log_delta in -3.0f64..-1.0, ratio in 0.2f64..5.0, n in 20usize..120) {
        let delta = 10f64.powf(log_delta);
        let cfg = config(1e10, 1e10 * ratio, delta);
        let system = build_system(&cfg, n).unwrap();
        let eigen = diagonalize(&system).unwrap();
        prop_assert!(eigen.orthonormality_defect() <= 1e-12);
        prop_assert!(eigen.completeness_defect() <= 1e-12);
        prop_assert!(eigen.t0_sum_defect() <= 1e-12);
        prop_assert!(eigen.interlaces(&system));
        prop_assert!(eigen.omega_sq.iter().all(|&x| x > 0.0));
        let sec = verify_secular(&eigen, &system).unwrap();
        prop_assert!(sec.max_residual <= 1e-10);
        prop_assert!(verify_tkr(&eigen, &system).unwrap() <= 1e-8);
        let p0 = survival_oracle(0.0, &eigen);
        prop_assert!((p0.probability - 1.0).abs() <= 1e-12);
        let t = 37.0 / cfg.mode_spacing();
        prop_assert!((survival_oracle(t, &eigen).unitarity - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn weak_model_rejects_large_delta() {
    let cfg = config(1e10, 1e8, 0.4);
    assert!(SeriesModel::new(&cfg, CouplingRegime::Weak, 10).is_err());
    assert!(SeriesModel::new(&cfg, CouplingRegime::Strong, 10).is_ok());
}

#[test]
fn oracle_convention_choice_at_small_delta() {
    let cfg = config(1e10, 1e10, 1e-3).with_mode_count(300).unwrap();
    let times: Vec<f64> = (0..10).map(|i| i as f64 * 1e-10).collect();
    let report = cavdecay::compare_pipelines(&cfg, 300, &times).unwrap();
    assert_eq!(report.better, SecularConvention::Derived);
    let derived = report.deviation(SecularConvention::Derived);
    assert!(derived.max_rel_omega < 1e-4, "{}", derived.max_rel_omega);
}
