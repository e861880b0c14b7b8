use std::sync::Arc;

use levyhit::estimators::{estimate_bg_index, estimate_time_change, v_epsilon, AlphaMode};
use levyhit::levy_models::{rescale, LevyModel, LimitClassification};
use levyhit::simulation::{simulate_observations, ObservationConfig, ObservationSeries, TimeChangeSpec};
use levyhit::stable_oracles::OvershootFn;
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rescaling_composes(
        c in 0.2f64..3.0,
        lp in 0.1f64..4.0,
        lm in 0.1f64..4.0,
        alpha in 0.1f64..1.9,
        ia in 0usize..2,
        ib in 0usize..2,
        x in prop::sample::select(vec![-3.0, -0.7, -0.01, 0.02, 0.5, 2.5]),
    ) {
        let grid = [0.5, 0.1];
        let (a, b) = (grid[ia], grid[ib]);
        let t = LevyModel::cgmy(c, lp, lm, alpha).with_diffusion(0.3).to_triplet().unwrap();
        let two = rescale(&rescale(&t, a, alpha).unwrap(), b, alpha).unwrap();
        let one = rescale(&t, a * b, alpha).unwrap();
        prop_assert!(close(two.a, one.a, 1e-12));
        prop_assert!(close(two.gamma, one.gamma, 1e-8), "{} vs {}", two.gamma, one.gamma);
        prop_assert!(close(two.jumps.density(x), one.jumps.density(x), 1e-12));
    }

    #[test]
    fn strictly_stable_is_a_fixed_point(
        alpha in 0.1f64..1.95,
        c in 0.1f64..3.0,
        eps in 1e-3f64..1.0,
        x in prop::sample::select(vec![-2.0, -0.3, 0.05, 0.8, 4.0]),
    ) {
        let t = LevyModel::stable(alpha, c, c).to_triplet().unwrap();
        let r = rescale(&t, eps, alpha).unwrap();
        prop_assert!(close(r.a, t.a, 1e-12));
        prop_assert!((r.gamma - t.gamma).abs() <= 1e-8, "{} vs {}", r.gamma, t.gamma);
        prop_assert!(close(r.jumps.density(x), t.jumps.density(x), 1e-12));
    }
}

/// Increments `±2^k` with exact reciprocal powers, so sums are exact in `f64`.
fn dyadic_series() -> impl Strategy<Value = ObservationSeries<f64>> {
    prop::collection::vec((0i32..6, any::<bool>(), 1u32..50), 1..40).prop_map(|v| {
        let mut t = 0.0;
        let (mut times, mut incs) = (Vec::new(), Vec::new());
        for (k, neg, dt) in v {
            t += dt as f64 / 64.0;
            times.push(t);
            let d = 2f64.powi(k);
            incs.push(if neg { -d } else { d });
        }
        ObservationSeries::from_increments(0.125, t + 1.0, times, incs).unwrap()
    })
}

fn any_series() -> impl Strategy<Value = ObservationSeries<f64>> {
    prop::collection::vec((1.0f64..50.0, any::<bool>(), 1e-3f64..1.0), 1..60).prop_map(|v| {
        let mut t = 0.0;
        let (mut times, mut incs) = (Vec::new(), Vec::new());
        for (d, neg, dt) in v {
            t += dt;
            times.push(t);
            incs.push(if neg { -d } else { d });
        }
        ObservationSeries::from_increments(0.05, t + 1.0, times, incs).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn v_epsilon_is_linear(s in dyadic_series(), a in -4i32..5, b in -4i32..5, bf in 0u32..4, bg in 0u32..4) {
        let (a, b) = (a as f64, b as f64);
        let f = OvershootFn::power_cap(bf as f64);
        let g = OvershootFn::power_cap(bg as f64);
        let (f2, g2) = (f.clone(), g.clone());
        let h = OvershootFn::custom(Arc::new(move |x: f64| a * f2.eval(x) + b * g2.eval(x)), a.abs() + b.abs(), "a*f+b*g").unwrap();
        let (vf, vg, vh) = (v_epsilon(&s, &f), v_epsilon(&s, &g), v_epsilon(&s, &h));
        prop_assert_eq!(vh.times(), vf.times());
        for i in 0..vh.len() {
            prop_assert_eq!(vh.values()[i], a * vf.values()[i] + b * vg.values()[i]);
        }
    }

    #[test]
    fn counts_and_time_change_are_monotone(s in any_series()) {
        let n = v_epsilon(&s, &OvershootFn::one());
        for (i, v) in n.values().iter().enumerate() {
            prop_assert_eq!(*v, (i + 1) as f64);
        }
        let cls = LimitClassification::stable(1.5, 1.0, 1.0).unwrap();
        let e = estimate_time_change(&s, &cls, AlphaMode::True).unwrap();
        prop_assert!(e.path.values().windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(e.path.values()[0] > 0.0);
    }

    #[test]
    fn bg_index_is_scale_free_and_bounded(s in any_series(), k in 0.01f64..100.0) {
        let a = estimate_bg_index(&s, None).unwrap();
        prop_assert!(a > 0.0 && a <= 2.0, "{a}");
        let stretched = ObservationSeries::from_increments(
            s.eps,
            s.horizon * k,
            s.times.iter().map(|t| t * k).collect(),
            s.increments.clone(),
        )
        .unwrap();
        prop_assert_eq!(estimate_bg_index(&stretched, None).unwrap(), a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn simulated_series_satisfy_the_barrier_invariants(seed in any::<u64>(), index in 0u64..1000) {
        let t = LevyModel::cgmy(1.0, 1.0, 1.0, 1.5).to_triplet().unwrap();
        let cfg = ObservationConfig::new(0.1, 1.5, 1.0);
        let s = simulate_observations(&t, &TimeChangeSpec::Linear { sigma: 1.0 }, cfg, seed, index).unwrap();
        prop_assert!(s.increments.iter().all(|d: &f64| d.abs() >= 1.0));
        prop_assert!(s.times.windows(2).all(|w| w[1] > w[0]));
        let again = simulate_observations(&t, &TimeChangeSpec::Linear { sigma: 1.0 }, cfg, seed, index).unwrap();
        prop_assert_eq!(s, again);
    }
}
