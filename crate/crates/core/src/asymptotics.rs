//! Gaussian tail asymptotics, the limiting constants, the assembled
//! large-capital approximations, the ruin-time law and the simple bounds.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::functionals::{
    drifted, mth_layer_frontier, pareto_frontier, sliding_window_min_into, sojourn_points,
    staircase_sum,
};
use crate::gauss::{bvn_tail, check_rho, ln_norm_sf, norm_cdf, norm_sf};
use crate::model::{
    classify_regime, lambda_coefficients, rescale_to_unit_horizon, LambdaPair, ModelParams,
    Regime,
};
use crate::montecarlo::{run_batches, EffectiveParams, Estimate, McConfig, Totals};
use crate::paths::{boundary, fill_brownian, grid_time, mix_correlated, steps_covering, TimeGrid};
use crate::rng::{CounterRng, Stream};

/// Leading-order asymptotic of `P{X1 > u + c1, X2 > a u + c2}` for a
/// standard bivariate normal pair with correlation `rho`.
pub fn tail_asym_gaussian(u: f64, a: f64, rho: f64, c1: f64, c2: f64) -> Result<f64> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(domain(format!("u must be positive, got {u}")));
    }
    let regime = classify_regime(a, rho)?;
    let r2 = 1.0 - rho * rho;
    // The density is evaluated in log form so that large u underflows
    // only in the final product.
    let ln_pdf = |x: f64, y: f64| {
        -(x * x - 2.0 * rho * x * y + y * y) / (2.0 * r2) - (2.0 * PI * r2.sqrt()).ln()
    };
    match regime {
        Regime::AboveRho => {
            let l = lambda_coefficients(a, rho)?;
            let ln = ln_pdf(u + c1, a * u + c2) - 2.0 * u.ln() - (l.lambda1 * l.lambda2).ln();
            Ok(ln.exp())
        }
        Regime::AtOrBelowRho => {
            let phi_star = if a < rho {
                1.0
            } else {
                norm_cdf((c1 * rho - c2) / r2.sqrt())
            };
            let shift = c2 - rho * c1;
            let ln = 0.5 * (2.0 * PI * r2).ln()
                + shift * shift / (2.0 * r2)
                - u.ln()
                + ln_pdf(u + c1, rho * u + c2);
            Ok(phi_star * ln.exp())
        }
    }
}

/// `P{W1(T) - c1 T > u, W2(T) - c2 T > a u}` through the exact orthant
/// probability.
pub fn exact_tail(p: &ModelParams) -> Result<f64> {
    let st = p.horizon().sqrt();
    let t = p.horizon();
    bvn_tail(
        (p.u() + p.c1() * t) / st,
        (p.a() * p.u() + p.c2() * t) / st,
        p.rho(),
    )
}

#[derive(Default)]
struct ConstWorkspace {
    b1: Vec<f64>,
    b2: Vec<f64>,
    x1: Vec<f64>,
    x2: Vec<f64>,
    m1: Vec<f64>,
    m2: Vec<f64>,
    deque: Vec<usize>,
    pts: Vec<(f64, f64)>,
    sel: Vec<f64>,
}

impl ConstWorkspace {
    /// Drifted paths `W1(t) - t` and `W2(t) - a t` on `grid`.
    fn load(&mut self, rng: &CounterRng, path: u64, grid: &TimeGrid, a: f64, rho: f64, pair: bool) {
        let len = grid.len();
        self.b1.resize(len, 0.0);
        fill_brownian(rng, path, Stream::Forward1, Stream::Backward1, grid, &mut self.b1);
        drifted(&self.b1, grid.start(), grid.dt(), 1.0, &mut self.x1);
        if pair {
            self.b2.resize(len, 0.0);
            fill_brownian(rng, path, Stream::Forward2, Stream::Backward2, grid, &mut self.b2);
            mix_correlated(&self.b1, &mut self.b2, rho);
            drifted(&self.b2, grid.start(), grid.dt(), a, &mut self.x2);
        }
    }
}

/// Which limiting functional a constant integrates.
#[derive(Debug, Clone, Copy)]
enum Functional {
    /// Window `[t - S, t]` of `s` steps, events for `t` in `[0, T]`.
    Window(usize),
    /// Sojourn of at least `m` grid points in `[0, T]`.
    Sojourn(usize),
}

/// Per-path value of a constant estimator over `t` in `[0, n_end dt]`.
///
/// `lead` is the number of negative-time points at the front of the
/// workspace arrays.
fn path_value(
    ws: &mut ConstWorkspace,
    f: Functional,
    lead: usize,
    n_end: usize,
    regime: Regime,
    lam: LambdaPair,
) -> f64 {
    match (f, regime) {
        (Functional::Window(s), Regime::AboveRho) => {
            let span = lead - s..lead + n_end + 1;
            sliding_window_min_into(&ws.x1[span.clone()], s + 1, &mut ws.m1, &mut ws.deque);
            sliding_window_min_into(&ws.x2[span], s + 1, &mut ws.m2, &mut ws.deque);
            ws.pts.clear();
            ws.pts.extend(ws.m1.iter().copied().zip(ws.m2.iter().copied()));
            let f = pareto_frontier(&ws.pts);
            staircase_sum(f.points(), lam.lambda1, lam.lambda2)
        }
        (Functional::Window(s), Regime::AtOrBelowRho) => {
            let span = lead - s..lead + n_end + 1;
            sliding_window_min_into(&ws.x1[span], s + 1, &mut ws.m1, &mut ws.deque);
            ws.m1.iter().copied().fold(f64::NEG_INFINITY, f64::max).exp()
        }
        (Functional::Sojourn(m), Regime::AboveRho) => {
            let span = lead..lead + n_end + 1;
            ws.pts.clear();
            ws.pts
                .extend(ws.x1[span.clone()].iter().copied().zip(ws.x2[span].iter().copied()));
            let f = mth_layer_frontier(&ws.pts, m);
            staircase_sum(f.points(), lam.lambda1, lam.lambda2)
        }
        (Functional::Sojourn(m), Regime::AtOrBelowRho) => {
            let span = lead..lead + n_end + 1;
            if m > span.len() {
                return 0.0;
            }
            ws.sel.clear();
            ws.sel.extend_from_slice(&ws.x1[span]);
            let (_, qm, _) = ws.sel.select_nth_unstable_by(m - 1, |x, y| y.total_cmp(x));
            qm.exp()
        }
    }
}

/// Shared driver of the constant estimators: one pass over `n_paths`
/// paths on `[-S_max, T_trunc]`, plus a truncation-doubling pass on a
/// prefix of the same paths.
fn constant_sweep(a: f64, rho: f64, fs: &[Functional], cfg: &McConfig) -> Result<Vec<Estimate>> {
    cfg.validate()?;
    let regime = classify_regime(a, rho)?;
    let lam = lambda_coefficients(a, rho)?;
    let pair = regime == Regime::AboveRho;
    let dt = cfg.dt;
    let lead = fs
        .iter()
        .map(|f| match f {
            Functional::Window(s) => *s,
            Functional::Sojourn(_) => 0,
        })
        .max()
        .unwrap_or(0);
    let n_tr = steps_covering(cfg.t_trunc, dt).max(1);
    let rng = CounterRng::new(cfg.seed);
    let k = fs.len();

    let grid = TimeGrid::new(-(lead as i64), lead + n_tr, dt)?;
    let totals = run_batches(cfg, 2 * k, |path, ws: &mut ConstWorkspace, sums| {
        ws.load(&rng, path, &grid, a, rho, pair);
        for (j, f) in fs.iter().enumerate() {
            let v = path_value(ws, *f, lead, n_tr, regime, lam);
            sums[2 * j] += v;
            sums[2 * j + 1] += v * v;
        }
    })?;

    let mut changes = vec![None; k];
    if cfg.truncation_check_paths > 0 {
        let diag_cfg = McConfig {
            n_paths: cfg.truncation_check_paths.min(cfg.n_paths),
            ..*cfg
        };
        let long = TimeGrid::new(-(lead as i64), lead + 2 * n_tr, dt)?;
        let diag: Totals = run_batches(&diag_cfg, 2 * k, |path, ws: &mut ConstWorkspace, sums| {
            ws.load(&rng, path, &long, a, rho, pair);
            for (j, f) in fs.iter().enumerate() {
                sums[2 * j] += path_value(ws, *f, lead, n_tr, regime, lam);
                sums[2 * j + 1] += path_value(ws, *f, lead, 2 * n_tr, regime, lam);
            }
        })?;
        for (j, c) in changes.iter_mut().enumerate() {
            let (short, long) = (diag.sums[2 * j], diag.sums[2 * j + 1]);
            if short > 0.0 {
                *c = Some((long - short) / short);
            }
        }
    }

    let z = cfg.z();
    Ok(fs
        .iter()
        .enumerate()
        .map(|(j, f)| {
            let (value, stderr, ci_low, ci_high) = totals.mean(2 * j, z);
            let (s, l) = match f {
                Functional::Window(s) => (*s as f64 * dt, 0.0),
                Functional::Sojourn(m) => (0.0, (*m - 1) as f64 * dt),
            };
            Estimate {
                value,
                stderr,
                ci_low: ci_low.min(value),
                ci_high: ci_high.max(value),
                n_paths: totals.n_paths,
                dt,
                seed: cfg.seed,
                effective: EffectiveParams {
                    horizon: 1.0,
                    h: 0.0,
                    s,
                    sojourn_budget: l,
                    t_trunc: Some(n_tr as f64 * dt),
                    truncation_change: changes[j],
                },
            }
        })
        .collect())
}

/// Constants of the Parisian asymptotics for several window lengths `S`,
/// estimated on common paths.
///
/// Above `rho` each path contributes the exact `e^{l1 x + l2 y}` measure of
/// the region under the Pareto staircase of its window minima; at or below
/// `rho` it contributes `exp(max_t min_{[t-S, t]} (W1(s) - s))`.
pub fn constant_parisian_sweep(a: f64, rho: f64, s: &[f64], cfg: &McConfig) -> Result<Vec<Estimate>> {
    if s.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(domain("window lengths S must be finite and non-negative"));
    }
    let fs: Vec<_> = s
        .iter()
        .map(|&v| Functional::Window(steps_covering(v, cfg.dt)))
        .collect();
    constant_sweep(a, rho, &fs, cfg)
}

pub fn estimate_constant_parisian(a: f64, rho: f64, s: f64, cfg: &McConfig) -> Result<Estimate> {
    Ok(constant_parisian_sweep(a, rho, &[s], cfg)?.remove(0))
}

/// Constants of the sojourn asymptotics for several budgets `L`.
///
/// A sojourn longer than `L` on the grid means at least
/// `floor(L / dt) + 1` points; above `rho` the contributing region is the
/// `m`-th layer frontier of the points `(W1(t) - t, W2(t) - a t)`, at or
/// below `rho` it is `exp` of the `m`-th largest `W1(t) - t`.
pub fn constant_cumulative_sweep(a: f64, rho: f64, l: &[f64], cfg: &McConfig) -> Result<Vec<Estimate>> {
    if l.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(domain("sojourn budgets L must be finite and non-negative"));
    }
    let fs: Vec<_> = l
        .iter()
        .map(|&v| Functional::Sojourn(sojourn_points(v, cfg.dt)))
        .collect();
    constant_sweep(a, rho, &fs, cfg)
}

pub fn estimate_constant_cumulative(a: f64, rho: f64, l: f64, cfg: &McConfig) -> Result<Estimate> {
    Ok(constant_cumulative_sweep(a, rho, &[l], cfg)?.remove(0))
}

fn constant_samples(a: f64, rho: f64, f: Functional, cfg: &McConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let regime = classify_regime(a, rho)?;
    let lam = lambda_coefficients(a, rho)?;
    let lead = match f {
        Functional::Window(s) => s,
        Functional::Sojourn(_) => 0,
    };
    let n_tr = steps_covering(cfg.t_trunc, cfg.dt).max(1);
    let grid = TimeGrid::new(-(lead as i64), lead + n_tr, cfg.dt)?;
    let rng = CounterRng::new(cfg.seed);
    let mut ws = ConstWorkspace::default();
    Ok((0..cfg.n_paths)
        .map(|path| {
            ws.load(&rng, path, &grid, a, rho, regime == Regime::AboveRho);
            path_value(&mut ws, f, lead, n_tr, regime, lam)
        })
        .collect())
}

/// Per-path contributions behind [`estimate_constant_parisian`], in path
/// order.
pub fn parisian_constant_samples(a: f64, rho: f64, s: f64, cfg: &McConfig) -> Result<Vec<f64>> {
    constant_samples(a, rho, Functional::Window(steps_covering(s, cfg.dt)), cfg)
}

/// Per-path contributions behind [`estimate_constant_cumulative`].
pub fn cumulative_constant_samples(a: f64, rho: f64, l: f64, cfg: &McConfig) -> Result<Vec<f64>> {
    constant_samples(a, rho, Functional::Sojourn(sojourn_points(l, cfg.dt)), cfg)
}

/// Which tail factor multiplies a constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailMode {
    /// The orthant probability by quadrature.
    Exact,
    /// The leading-order closed form.
    ClosedForm,
}

impl TailMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            TailMode::Exact => "exact",
            TailMode::ClosedForm => "closed_form",
        }
    }
}

/// A large-capital approximation `constant * tail`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticApprox {
    pub regime: Regime,
    pub constant: Estimate,
    pub tail_factor: f64,
    pub tail_mode: TailMode,
    pub approx_value: f64,
    /// The unit-horizon problem the approximation refers to.
    pub params: ModelParams,
}

fn tail_factor(p: &ModelParams, mode: TailMode) -> Result<f64> {
    match mode {
        TailMode::Exact => exact_tail(p),
        TailMode::ClosedForm => tail_asym_gaussian(p.u(), p.a(), p.rho(), p.c1(), p.c2()),
    }
}

fn assemble(
    points: &[ModelParams],
    cfg: &McConfig,
    mode: TailMode,
    key: impl Fn(&ModelParams) -> f64,
    sweep: impl Fn(f64, f64, &[f64], &McConfig) -> Result<Vec<Estimate>>,
) -> Result<Vec<AsymptoticApprox>> {
    let unit: Vec<ModelParams> = points.iter().map(rescale_to_unit_horizon).collect();
    let Some(first) = unit.first() else {
        return Ok(Vec::new());
    };
    if unit.iter().any(|p| p.a() != first.a() || p.rho() != first.rho()) {
        return Err(domain("approximation sweeps must share a and rho"));
    }
    let mut keys: Vec<f64> = Vec::new();
    for p in &unit {
        let k = key(p);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    let constants = sweep(first.a(), first.rho(), &keys, cfg)?;
    unit.iter()
        .map(|p| {
            let c = constants[keys.iter().position(|&k| k == key(p)).unwrap()];
            let tail = tail_factor(p, mode)?;
            Ok(AsymptoticApprox {
                regime: p.regime(),
                constant: c,
                tail_factor: tail,
                tail_mode: mode,
                approx_value: c.value * tail,
                params: *p,
            })
        })
        .collect()
}

/// Parisian approximations for several problems sharing `a` and `rho`; the
/// constants for distinct `S` are estimated on common paths.
pub fn approx_parisian_many(
    points: &[ModelParams],
    cfg: &McConfig,
    mode: TailMode,
) -> Result<Vec<AsymptoticApprox>> {
    assemble(points, cfg, mode, |p| p.s(), constant_parisian_sweep)
}

pub fn approx_parisian(p: &ModelParams, cfg: &McConfig, mode: TailMode) -> Result<AsymptoticApprox> {
    Ok(approx_parisian_many(std::slice::from_ref(p), cfg, mode)?.remove(0))
}

pub fn approx_cumulative_many(
    points: &[ModelParams],
    cfg: &McConfig,
    mode: TailMode,
) -> Result<Vec<AsymptoticApprox>> {
    assemble(points, cfg, mode, |p| p.sojourn_budget(), constant_cumulative_sweep)
}

pub fn approx_cumulative(p: &ModelParams, cfg: &McConfig, mode: TailMode) -> Result<AsymptoticApprox> {
    Ok(approx_cumulative_many(std::slice::from_ref(p), cfg, mode)?.remove(0))
}

/// Exponential rate of the limiting ruin-time survival.
pub fn ruin_time_rate(a: f64, rho: f64) -> Result<f64> {
    Ok(match classify_regime(a, rho)? {
        Regime::AboveRho => (1.0 - 2.0 * a * rho + a * a) / (2.0 - 2.0 * rho * rho),
        Regime::AtOrBelowRho => 0.5,
    })
}

/// Limiting `P{u^2 (1 - tau_L1) >= x | tau_L2 <= 1}` given the sojourn
/// constants at `L1` and `L2`.
pub fn ruin_time_survival(
    x: f64,
    a: f64,
    rho: f64,
    l1: f64,
    l2: f64,
    constants: (&Estimate, &Estimate),
) -> Result<f64> {
    if !(0.0 <= l2 && l2 <= l1) {
        return Err(domain(format!("need 0 <= L2 <= L1, got L1 = {l1}, L2 = {l2}")));
    }
    if !(x.is_finite() && x >= 0.0) {
        return Err(domain(format!("x must be non-negative, got {x}")));
    }
    let gamma = constants.0.value / constants.1.value;
    Ok(gamma * (-x * ruin_time_rate(a, rho)?).exp())
}

/// Orthant-probability bounds on simultaneous ruin in `[0, T]`.
///
/// The lower bound is the probability of ruin at the horizon; the upper
/// bound divides it by `P{W1(1) > max(c1, 0), W2(1) > max(c2, 0)}`.
pub fn bounds_simultaneous(p: &ModelParams) -> Result<(f64, f64)> {
    let q = rescale_to_unit_horizon(p);
    let lower = exact_tail(&q)?;
    let denom = bvn_tail(q.c1().max(0.0), q.c2().max(0.0), q.rho())?;
    Ok((lower, lower / denom))
}

/// `P{sup_{t <= T} (W(t) - c t) > u}` by the reflection formula.
pub fn sup_exceedance(u: f64, c: f64, t: f64) -> f64 {
    let st = t.sqrt();
    norm_sf((u + c * t) / st) + (-2.0 * c * u + ln_norm_sf((u - c * t) / st)).exp()
}

/// Bounds on Parisian ruin with a fixed window `H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParisianBounds {
    pub upper: f64,
    /// Present when `rho > 0` and `a < rho`.
    pub lower: Option<ParisianLower>,
}

/// Product lower bound with both Monte Carlo factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParisianLower {
    pub value: f64,
    /// `P{W1(t) - c1 t > u for all t in [T, T + H]}`.
    pub first: Estimate,
    /// `P{B(t) > ((a - rho) u + (c2 - rho c1) t) / sqrt(1 - rho^2) for all t in [T, T + H]}`.
    pub second: Estimate,
}

/// Upper bound by the ruin of the first portfolio alone; lower bound by
/// ruin throughout `[T, T + H]`, split into independent factors through
/// `W2 = rho W1 + sqrt(1 - rho^2) B`.
pub fn bounds_parisian_fixed_h(p: &ModelParams, cfg: &McConfig) -> Result<ParisianBounds> {
    let t = p.horizon();
    let upper = sup_exceedance(p.u(), p.c1(), t);
    let rho = p.rho();
    if !(rho > 0.0 && p.a() < rho) {
        return Ok(ParisianBounds { upper, lower: None });
    }
    cfg.validate()?;
    let dt = cfg.dt;
    let n_t = steps_covering(t, dt);
    let h = steps_covering(p.h(), dt);
    let grid = TimeGrid::new(n_t as i64, h.max(1), dt)?;
    let rs = (1.0 - rho * rho).sqrt();
    let (u, c1, c2, a) = (p.u(), p.c1(), p.c2(), p.a());
    let b1: Vec<f64> = (0..=h).map(|i| boundary(u, c1, grid_time((n_t + i) as i64, dt))).collect();
    let b2: Vec<f64> = (0..=h)
        .map(|i| {
            let s = grid_time((n_t + i) as i64, dt);
            ((a - rho) * u + (c2 - rho * c1) * s) / rs
        })
        .collect();
    let rng = CounterRng::new(cfg.seed);
    let totals = run_batches(cfg, 2, |path, ws: &mut (Vec<f64>, Vec<f64>), sums| {
        ws.0.resize(grid.len(), 0.0);
        ws.1.resize(grid.len(), 0.0);
        fill_brownian(&rng, path, Stream::Forward1, Stream::Backward1, &grid, &mut ws.0);
        fill_brownian(&rng, path, Stream::Forward2, Stream::Backward2, &grid, &mut ws.1);
        if ws.0[..=h].iter().zip(&b1).all(|(w, g)| w > g) {
            sums[0] += 1.0;
        }
        if ws.1[..=h].iter().zip(&b2).all(|(w, g)| w > g) {
            sums[1] += 1.0;
        }
    })?;
    let z = cfg.z();
    let est = |k: usize| {
        let (value, stderr, ci_low, ci_high) = totals.bernoulli(k, z);
        Estimate {
            value,
            stderr,
            ci_low,
            ci_high,
            n_paths: totals.n_paths,
            dt,
            seed: cfg.seed,
            effective: EffectiveParams {
                horizon: n_t as f64 * dt,
                h: h as f64 * dt,
                s: h as f64 * dt * u * u,
                ..EffectiveParams::default()
            },
        }
    };
    let (first, second) = (est(0), est(1));
    Ok(ParisianBounds {
        upper,
        lower: Some(ParisianLower { value: first.value * second.value, first, second }),
    })
}

/// Bound on the ruin mass left before `1 - T / u^2`:
/// `e^{-T/8} P{W1*(1) >= u, W2*(1) >= a u} / P{W1(1) > c1+, W2(1) > c2+}`.
pub fn truncation_bound(u: f64, t: f64, a: f64, rho: f64, c1: f64, c2: f64) -> Result<f64> {
    check_rho(rho)?;
    if !(t > 0.0) {
        return Err(domain(format!("T must be positive, got {t}")));
    }
    let num = bvn_tail(u + c1, a * u + c2, rho)?;
    let den = bvn_tail(c1.max(0.0), c2.max(0.0), rho)?;
    Ok((-t / 8.0).exp() * num / den)
}
