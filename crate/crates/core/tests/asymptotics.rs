use bruin_core::asymptotics::{
    approx_cumulative, approx_cumulative_many, approx_parisian, approx_parisian_many,
    bounds_parisian_fixed_h, sup_exceedance, TailMode,
};
use bruin_core::model::{norm_sf, ModelParams, Window};
use bruin_core::montecarlo::{estimate_parisian, McConfig};
use bruin_core::paths::{sample_bm, surplus_transform, TimeGrid};

fn cfg(n: u64, dt: f64, t_trunc: f64) -> McConfig {
    McConfig {
        n_paths: n,
        dt,
        seed: 41,
        batch_size: 250,
        t_trunc,
        truncation_check_paths: 0,
        ..McConfig::default()
    }
}

#[test]
fn lower_regime_approximation_is_twice_the_tail() {
    let p = ModelParams::new(3.0, 0.2, 0.5, 0.0, 0.0, 1.0).unwrap();
    let r = approx_parisian(&p, &cfg(20_000, 1e-3, 10.0), TailMode::Exact).unwrap();
    let c = &r.constant;
    // grid maxima sit slightly below the continuous ones
    assert!((c.value - 2.0).abs() <= 3.0 * c.stderr + 0.1, "{c:?}");
    assert_eq!(r.approx_value, c.value * r.tail_factor);
}

#[test]
fn approximation_falls_with_the_window() {
    let base = ModelParams::new(3.0, 1.0, 0.3, 0.0, 0.0, 1.0).unwrap();
    let pts: Vec<_> = [0.0, 0.5, 1.0]
        .iter()
        .map(|&s| base.with_window(Window::ScaledS(s)).unwrap())
        .collect();
    let r = approx_parisian_many(&pts, &cfg(300, 1e-3, 5.0), TailMode::Exact).unwrap();
    assert!(r[0].approx_value >= r[1].approx_value && r[1].approx_value >= r[2].approx_value);
    assert_eq!(r[0].tail_factor, r[2].tail_factor);
}

#[test]
fn independent_case_factorizes() {
    let u = 2.5;
    let p = ModelParams::new(u, 1.0, 0.0, 0.0, 0.0, 1.0).unwrap();
    let r = approx_parisian(&p, &cfg(200, 1e-3, 5.0), TailMode::Exact).unwrap();
    let ratio = r.approx_value / norm_sf(u).powi(2);
    assert!((ratio / r.constant.value - 1.0).abs() < 1e-10);
}

#[test]
fn cumulative_with_tiny_budget_is_the_parisian_constant() {
    let c = cfg(300, 1e-3, 5.0);
    for (a, rho) in [(1.0, 0.3), (0.2, 0.5)] {
        let p = ModelParams::new(3.0, a, rho, 0.0, 0.0, 1.0).unwrap();
        let par = approx_parisian(&p, &c, TailMode::Exact).unwrap();
        let cum = approx_cumulative(&p.with_sojourn_budget(0.5 * c.dt).unwrap(), &c, TailMode::Exact).unwrap();
        assert_eq!(par.approx_value, cum.approx_value);
    }
}

#[test]
fn cumulative_approximation_vanishes_for_large_budgets() {
    let base = ModelParams::new(3.0, 1.0, 0.3, 0.0, 0.0, 1.0).unwrap();
    let pts: Vec<_> = [0.0, 1.0, 3.0, 50.0]
        .iter()
        .map(|&l| base.with_sojourn_budget(l).unwrap())
        .collect();
    let r = approx_cumulative_many(&pts, &cfg(300, 1e-3, 5.0), TailMode::ClosedForm).unwrap();
    assert!(r.windows(2).all(|w| w[1].approx_value <= w[0].approx_value));
    assert_eq!(r[3].approx_value, 0.0);
}

#[test]
fn parisian_bounds_at_zero_window() {
    let p = ModelParams::new(1.0, 0.2, 0.5, 0.0, 0.0, 1.0).unwrap();
    let b = bounds_parisian_fixed_h(&p, &cfg(20_000, 1e-3, 1.0)).unwrap();
    let lower = b.lower.unwrap();
    let first = norm_sf(1.0);
    assert!((lower.first.value - first).abs() <= 3.0 * lower.first.stderr);
    assert_eq!(b.upper, sup_exceedance(1.0, 0.0, 1.0));
    let above = ModelParams::new(1.0, 0.8, 0.5, 0.0, 0.0, 1.0).unwrap();
    assert!(bounds_parisian_fixed_h(&above, &cfg(10, 1e-3, 1.0)).unwrap().lower.is_none());
}

#[test]
fn parisian_bounds_bracket_the_simulation() {
    let p = ModelParams::new(2.0, 0.2, 0.5, 0.0, 0.0, 1.0)
        .unwrap()
        .with_window(Window::AbsoluteH(0.01))
        .unwrap();
    let c = cfg(20_000, 1e-3, 1.0);
    let b = bounds_parisian_fixed_h(&p, &c).unwrap();
    let e = estimate_parisian(&p, &c).unwrap();
    let lower = b.lower.unwrap().value;
    assert!(lower - 3.0 * e.stderr <= e.value && e.value <= b.upper + 3.0 * e.stderr);
}

#[test]
fn reflection_formula_against_simulated_suprema() {
    let (u, c, n) = (1.5, 0.5, 10_000u64);
    let g = TimeGrid::forward(1.0, 1e-4).unwrap();
    let hits = (0..n)
        .filter(|&i| {
            let s = surplus_transform(&sample_bm(&g, 42, i), &g, u, c).unwrap();
            s.iter().any(|&x| x < 0.0)
        })
        .count();
    let q = hits as f64 / n as f64;
    let se = (q * (1.0 - q) / n as f64).sqrt();
    let exact = sup_exceedance(u, c, 1.0);
    assert!((q - exact).abs() <= 3.0 * se, "{q} vs {exact}");
}
