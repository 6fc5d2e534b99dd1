use bruin_core::asymptotics::{constant_cumulative_sweep, constant_parisian_sweep, estimate_constant_parisian, exact_tail, ruin_time_rate};
use bruin_core::functionals::{mth_layer_frontier, pareto_frontier, sliding_window_min, staircase_exp_measure};
use bruin_core::model::{bvn_tail, classify_regime, lambda_coefficients, rescale_to_unit_horizon, ModelParams, Regime};
use bruin_core::montecarlo::{aggregate_batches, wilson_interval, BatchSummary, McConfig};
use bruin_core::paths::{sample_bm, steps_covering, steps_within, TimeGrid};
use proptest::prelude::*;

fn points(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-3i32..4, -3i32..4), 1..max)
        .prop_map(|v| v.into_iter().map(|(p, q)| (p as f64 * 0.5, q as f64 * 0.5)).collect())
}

proptest! {
    #[test]
    fn window_min_is_a_window_scan(v in prop::collection::vec(-5.0f64..5.0, 1..80), m in 1usize..90) {
        let got = sliding_window_min(&v, m);
        if m > v.len() {
            prop_assert!(got.is_empty());
        } else {
            let want: Vec<f64> = (0..=v.len() - m)
                .map(|j| v[j..j + m].iter().copied().fold(f64::INFINITY, f64::min))
                .collect();
            prop_assert_eq!(got, want);
        }
    }

    #[test]
    fn frontier_is_a_strict_staircase(pts in points(40)) {
        let f = pareto_frontier(&pts);
        for w in f.points().windows(2) {
            prop_assert!(w[0].0 < w[1].0 && w[0].1 > w[1].1);
        }
        // every input point is on or under the staircase
        for &(p, q) in &pts {
            prop_assert!(f.points().iter().any(|&(a, b)| a >= p && b >= q));
        }
        prop_assert_eq!(f, mth_layer_frontier(&pts, 1));
    }

    #[test]
    fn deeper_layers_have_smaller_measure(pts in points(40), m in 1usize..6, l1 in 0.2f64..3.0, l2 in 0.2f64..3.0) {
        let a = staircase_exp_measure(&mth_layer_frontier(&pts, m), l1, l2).unwrap();
        let b = staircase_exp_measure(&mth_layer_frontier(&pts, m + 1), l1, l2).unwrap();
        prop_assert!(b <= a * (1.0 + 1e-12));
    }

    #[test]
    fn measure_grows_with_points(pts in points(20), extra in (-2.0f64..2.0, -2.0f64..2.0), l1 in 0.2f64..3.0, l2 in 0.2f64..3.0) {
        let a = staircase_exp_measure(&pareto_frontier(&pts), l1, l2).unwrap();
        let mut more = pts.clone();
        more.push(extra);
        let b = staircase_exp_measure(&pareto_frontier(&more), l1, l2).unwrap();
        prop_assert!(b >= a * (1.0 - 1e-12));
    }

    #[test]
    fn step_counts_bracket_the_length(x in 0.0f64..50.0, dt in 1e-4f64..0.5) {
        let up = steps_covering(x, dt);
        let down = steps_within(x, dt);
        prop_assert!(up as f64 * dt >= x * (1.0 - 1e-9));
        prop_assert!(down as f64 * dt <= x * (1.0 + 1e-9));
        prop_assert!(up >= down && up - down <= 1);
    }

    #[test]
    fn wilson_interval_brackets_the_proportion(n in 1u32..100_000, frac in 0.0f64..1.0, z in 0.5f64..4.0) {
        let hits = (frac * n as f64).floor();
        let (lo, hi) = wilson_interval(hits, n as f64, z);
        let p = hits / n as f64;
        prop_assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
    }

    #[test]
    fn batch_order_does_not_matter(sizes in prop::collection::vec(1u64..20, 1..12), seed in any::<u64>()) {
        let mut first = 0;
        let mut batches = Vec::new();
        for (k, &c) in sizes.iter().enumerate() {
            batches.push(BatchSummary { first, count: c, sums: vec![(k as f64 + 0.1).sqrt()] });
            first += c;
        }
        let want = aggregate_batches(batches.clone()).unwrap();
        let len = batches.len();
        batches.rotate_left((seed % len as u64) as usize);
        batches.reverse();
        prop_assert_eq!(aggregate_batches(batches).unwrap(), want);
    }

    #[test]
    fn regime_matches_the_sign_of_lambda2(a in -3.0f64..1.0, rho in -0.99f64..0.99) {
        let l = lambda_coefficients(a, rho).unwrap();
        let r = classify_regime(a, rho).unwrap();
        prop_assert_eq!(r == Regime::AboveRho, l.lambda2 > 0.0);
        if r == Regime::AboveRho {
            prop_assert!(l.lambda1 > 0.0);
        }
    }

    #[test]
    fn exact_tail_is_horizon_invariant(u in 0.5f64..5.0, a in -1.0f64..1.0, rho in -0.9f64..0.9,
                                       c1 in -1.0f64..1.0, c2 in -1.0f64..1.0, t in 0.25f64..4.0) {
        let p = ModelParams::new(u, a, rho, c1, c2, t).unwrap();
        let x = exact_tail(&p).unwrap();
        let y = exact_tail(&rescale_to_unit_horizon(&p)).unwrap();
        prop_assert!((x - y).abs() <= 1e-9 * x.max(1e-300));
    }

    #[test]
    fn orthant_tail_is_symmetric(h in -3.0f64..3.0, k in -3.0f64..3.0, rho in -0.95f64..0.95) {
        let a = bvn_tail(h, k, rho).unwrap();
        let b = bvn_tail(k, h, rho).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
    }

    #[test]
    fn rate_is_continuous_across_regimes(rho in -0.9f64..0.9) {
        let r = ruin_time_rate(rho + 1e-9, rho).unwrap();
        prop_assert!((r - 0.5).abs() < 1e-7);
        prop_assert_eq!(ruin_time_rate(rho, rho).unwrap(), 0.5);
    }

    #[test]
    fn sub_grids_select_points_of_one_path(start in -200i64..200, n in 1usize..150, seed in 0u64..1000) {
        let dt = 0.01;
        let wide = sample_bm(&TimeGrid::new(-400, 800, dt).unwrap(), seed, 2);
        let part = sample_bm(&TimeGrid::new(start, n, dt).unwrap(), seed, 2);
        let off = (start + 400) as usize;
        prop_assert_eq!(&wide[off..off + n + 1], &part[..]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn constants_fall_with_window_and_budget(a in -0.5f64..1.0, rho in -0.5f64..0.8, seed in 0u64..100) {
        let cfg = McConfig { n_paths: 40, dt: 1e-2, seed, t_trunc: 2.0, truncation_check_paths: 0, batch_size: 16, ..McConfig::default() };
        let grid = [0.0, 0.1, 0.3, 0.7];
        let c = constant_parisian_sweep(a, rho, &grid, &cfg).unwrap();
        prop_assert!(c.windows(2).all(|w| w[1].value <= w[0].value));
        let k = constant_cumulative_sweep(a, rho, &grid, &cfg).unwrap();
        prop_assert!(k.windows(2).all(|w| w[1].value <= w[0].value));
    }

    #[test]
    fn constants_grow_with_truncation(a in -0.5f64..1.0, rho in -0.5f64..0.8, s in 0.0f64..1.0, seed in 0u64..100) {
        let cfg = McConfig { n_paths: 40, dt: 1e-2, seed, t_trunc: 1.0, truncation_check_paths: 0, batch_size: 16, ..McConfig::default() };
        let short = estimate_constant_parisian(a, rho, s, &cfg).unwrap();
        let long = estimate_constant_parisian(a, rho, s, &McConfig { t_trunc: 3.0, ..cfg }).unwrap();
        prop_assert!(short.value <= long.value);
    }
}
