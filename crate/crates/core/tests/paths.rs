use bruin_core::paths::{
    sample_bm, sample_correlated_pair, sample_two_sided_bm, surplus_transform, TimeGrid,
};

fn increment_variance(path: &[f64]) -> f64 {
    let inc: Vec<f64> = path.windows(2).map(|w| w[1] - w[0]).collect();
    let n = inc.len() as f64;
    let mean = inc.iter().sum::<f64>() / n;
    inc.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

fn corr(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

#[test]
fn forward_increments_have_variance_dt() {
    let dt = 1e-3;
    let g = TimeGrid::new(0, 100_000, dt).unwrap();
    let w = sample_bm(&g, 3, 0);
    assert_eq!(w[0], 0.0);
    let r = increment_variance(&w) / dt;
    assert!((0.98..=1.02).contains(&r), "{r}");
    assert_eq!(w, sample_bm(&g, 3, 0));
}

#[test]
fn backward_increments_have_variance_dt() {
    let dt = 1e-3;
    let g = TimeGrid::new(-100_000, 100_000, dt).unwrap();
    let w = sample_two_sided_bm(&g, 4, 0).unwrap();
    assert_eq!(w[100_000], 0.0);
    let r = increment_variance(&w[..=100_000]) / dt;
    assert!((0.98..=1.02).contains(&r), "{r}");
}

#[test]
fn halves_are_uncorrelated() {
    let g = TimeGrid::new(-3, 6, 0.1).unwrap();
    let (mut back, mut fwd) = (Vec::new(), Vec::new());
    for path in 0..100_000 {
        let w = sample_two_sided_bm(&g, 5, path).unwrap();
        back.push(w[0]);
        fwd.push(w[5]);
    }
    let c = corr(&back, &fwd);
    assert!(c.abs() < 0.01, "{c}");
}

#[test]
fn pair_correlation_and_marginals() {
    let dt = 1e-2;
    let g = TimeGrid::new(0, 1, dt).unwrap();
    for (rho, lo, hi) in [(0.0, -0.01, 0.01), (0.99, 0.98, 1.0)] {
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for path in 0..100_000 {
            let p = sample_correlated_pair(&g, rho, 6, path).unwrap();
            x.push(p.w1[1]);
            y.push(p.w2[1]);
        }
        let c = corr(&x, &y);
        assert!(c > lo && c < hi, "rho {rho}: {c}");
        let v = y.iter().map(|v| v * v).sum::<f64>() / y.len() as f64 / dt;
        assert!((0.98..=1.02).contains(&v), "rho {rho}: {v}");
    }
    assert!(sample_correlated_pair(&g, 1.0, 6, 0).is_err());
}

#[test]
fn surplus_mean_at_horizon() {
    let (u, c, t) = (1.5, 0.5, 1.0);
    let g = TimeGrid::forward(t, 0.25).unwrap();
    let n = 100_000;
    let mut sum = 0.0;
    for path in 0..n {
        let s = surplus_transform(&sample_bm(&g, 7, path), &g, u, c).unwrap();
        sum += s[4];
    }
    let mean = sum / n as f64;
    assert!((mean - (u + c * t)).abs() < 3.0 * (t / n as f64).sqrt(), "{mean}");
}
