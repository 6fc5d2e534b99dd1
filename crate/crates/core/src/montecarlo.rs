//! Batched crude Monte Carlo for the finite-capital ruin probabilities.
//!
//! Paths are numbered globally and each batch covers a fixed, consecutive
//! index range, so the partial sums depend only on `(seed, batch_size)`.
//! Batches are reduced in index order whatever the worker count.

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::functionals::{
    boundary_excess, joint_ruin_count, parisian_hit, sojourn_points, WindowScratch,
};
use crate::model::{rescale_to_unit_horizon, ModelParams};
use crate::paths::{boundary, fill_brownian, grid_time, mix_correlated, steps_covering, TimeGrid};
use crate::rng::{inverse_normal_cdf, CounterRng, Stream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_paths: u64,
    pub dt: f64,
    pub seed: u64,
    pub batch_size: u64,
    pub ci_level: f64,
    /// Time truncation of the limiting constants.
    pub t_trunc: f64,
    /// Paths used for the truncation-doubling diagnostic of the constants;
    /// 0 disables it.
    pub truncation_check_paths: u64,
    /// Worker threads, 0 for the rayon default. Never changes results.
    pub workers: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_paths: 100_000,
            dt: 1e-4,
            seed: 1,
            batch_size: 1000,
            ci_level: 0.99,
            t_trunc: 20.0,
            truncation_check_paths: 10_000,
            workers: 0,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::Config("n_paths must be at least 1".into()));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::Config(format!(
                "ci_level must lie in (0, 1), got {}",
                self.ci_level
            )));
        }
        if !(self.t_trunc.is_finite() && self.t_trunc > 0.0) {
            return Err(Error::Config(format!("t_trunc must be positive, got {}", self.t_trunc)));
        }
        Ok(())
    }

    /// Two-sided normal quantile for the configured level.
    pub fn z(&self) -> f64 {
        inverse_normal_cdf(0.5 + 0.5 * self.ci_level)
    }
}

/// Grid-rounded parameters an estimate was actually computed with.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EffectiveParams {
    pub horizon: f64,
    pub h: f64,
    pub s: f64,
    /// Smallest budget giving the same grid event as the requested one.
    pub sojourn_budget: f64,
    pub t_trunc: Option<f64>,
    /// Relative change of a constant when the truncation doubles.
    pub truncation_change: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_paths: u64,
    pub dt: f64,
    pub seed: u64,
    pub effective: EffectiveParams,
}

/// Wilson score interval for `hits` successes out of `n`.
pub fn wilson_interval(hits: f64, n: f64, z: f64) -> (f64, f64) {
    let p = hits / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

/// Per-batch partial sums over the paths `first..first + count`.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchSummary {
    pub first: u64,
    pub count: u64,
    pub sums: Vec<f64>,
}

/// Batch sums reduced in index order.
#[derive(Debug, Clone, PartialEq)]
pub struct Totals {
    pub n_paths: u64,
    pub sums: Vec<f64>,
}

impl Totals {
    /// Bernoulli mean of slot `k` with a Wilson interval.
    pub fn bernoulli(&self, k: usize, z: f64) -> (f64, f64, f64, f64) {
        let n = self.n_paths as f64;
        let p = self.sums[k] / n;
        let (lo, hi) = wilson_interval(self.sums[k], n, z);
        (p, (p * (1.0 - p) / n).sqrt(), lo, hi)
    }

    /// Sample mean of slot `k` (sum of squares in `k + 1`) with a normal
    /// interval.
    pub fn mean(&self, k: usize, z: f64) -> (f64, f64, f64, f64) {
        let n = self.n_paths as f64;
        let m = self.sums[k] / n;
        let var = if self.n_paths > 1 {
            ((self.sums[k + 1] - n * m * m) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        let se = (var / n).sqrt();
        (m, se, m - z * se, m + z * se)
    }
}

/// Reduces batch summaries in path-index order.
///
/// The batches must tile `0..n` without gaps or overlaps; arrival order is
/// irrelevant.
pub fn aggregate_batches(mut batches: Vec<BatchSummary>) -> Result<Totals> {
    batches.sort_by_key(|b| b.first);
    let width = batches.first().map_or(0, |b| b.sums.len());
    let mut next = 0u64;
    let mut sums = vec![0.0; width];
    for b in &batches {
        if b.sums.len() != width {
            return Err(Error::BatchLayout("batches disagree on the number of sums".into()));
        }
        if b.first < next {
            return Err(Error::BatchLayout(format!(
                "batch starting at path {} overlaps the previous one",
                b.first
            )));
        }
        if b.first > next {
            return Err(Error::BatchLayout(format!(
                "paths {next}..{} are missing",
                b.first
            )));
        }
        for (t, s) in sums.iter_mut().zip(&b.sums) {
            *t += s;
        }
        next = b.first + b.count;
    }
    Ok(Totals { n_paths: next, sums })
}

/// Runs `per_path` over every path, batch by batch, and reduces.
///
/// `per_path(path_index, workspace, sums)` adds the contribution of one
/// path to `sums`; each batch gets a fresh workspace and zeroed sums.
pub(crate) fn run_batches<W, F>(cfg: &McConfig, width: usize, per_path: F) -> Result<Totals>
where
    W: Default,
    F: Fn(u64, &mut W, &mut [f64]) + Sync,
{
    cfg.validate()?;
    let n_batches = cfg.n_paths.div_ceil(cfg.batch_size);
    let work = || {
        (0..n_batches)
            .into_par_iter()
            .map(|b| {
                let first = b * cfg.batch_size;
                let count = cfg.batch_size.min(cfg.n_paths - first);
                let mut ws = W::default();
                let mut sums = vec![0.0; width];
                for i in first..first + count {
                    per_path(i, &mut ws, &mut sums);
                }
                BatchSummary { first, count, sums }
            })
            .collect::<Vec<_>>()
    };
    let batches = if cfg.workers == 0 {
        work()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", cfg.workers)))?
            .install(work)
    };
    aggregate_batches(batches)
}

/// Which finite-capital event a simulation counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuinKind {
    Simultaneous,
    Parisian,
    Cumulative,
}

/// Per-point event data resolved on the grid.
struct EventPoint {
    u: f64,
    au: f64,
    rho: f64,
    h: usize,
    m: usize,
}

#[derive(Default)]
struct SimWorkspace {
    b1: Vec<f64>,
    b2: Vec<f64>,
    w2: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    window: WindowScratch,
    mixed_rho: Option<f64>,
}

fn check_sweep(points: &[ModelParams]) -> Result<&ModelParams> {
    let first = points
        .first()
        .ok_or_else(|| domain("a sweep needs at least one parameter point"))?;
    for p in points {
        if p.a() != first.a()
            || p.c1() != first.c1()
            || p.c2() != first.c2()
            || p.horizon() != first.horizon()
        {
            return Err(domain(
                "sweep points may differ only in u, rho, the window and the sojourn budget",
            ));
        }
    }
    Ok(first)
}

/// Estimates one event at several parameter points on common paths.
///
/// All points must share `a`, `c1`, `c2` and the horizon. Each path is
/// simulated once on a grid long enough for the widest window, and the
/// second motion is only drawn when the first one crosses the lowest
/// boundary of the sweep, since otherwise no point can be ruined.
pub fn simulate_sweep(kind: RuinKind, points: &[ModelParams], cfg: &McConfig) -> Result<Vec<Estimate>> {
    let base = check_sweep(points)?;
    cfg.validate()?;
    let dt = cfg.dt;
    let n_t = steps_covering(base.horizon(), dt);
    let evs: Vec<EventPoint> = points
        .iter()
        .map(|p| EventPoint {
            u: p.u(),
            au: p.a() * p.u(),
            rho: p.rho(),
            h: if kind == RuinKind::Parisian { steps_covering(p.h(), dt) } else { 0 },
            m: if kind == RuinKind::Cumulative {
                sojourn_points(p.sojourn_threshold(), dt)
            } else {
                1
            },
        })
        .collect();
    let h_max = evs.iter().map(|e| e.h).max().unwrap_or(0);
    let grid = TimeGrid::new(0, n_t + h_max, dt)?;
    let u_min = evs.iter().map(|e| e.u).fold(f64::INFINITY, f64::min);
    let (c1, c2) = (base.c1(), base.c2());
    let gate: Vec<f64> = (0..=n_t).map(|i| boundary(u_min, c1, grid_time(i as i64, dt))).collect();
    let rng = CounterRng::new(cfg.seed);

    let totals = run_batches(cfg, evs.len(), |path, ws: &mut SimWorkspace, sums| {
        let len = grid.len();
        ws.b1.resize(len, 0.0);
        fill_brownian(&rng, path, Stream::Forward1, Stream::Backward1, &grid, &mut ws.b1);
        if !ws.b1[..=n_t].iter().zip(&gate).any(|(w, g)| w > g) {
            return;
        }
        ws.b2.resize(len, 0.0);
        fill_brownian(&rng, path, Stream::Forward2, Stream::Backward2, &grid, &mut ws.b2);
        ws.mixed_rho = None;
        for (k, e) in evs.iter().enumerate() {
            if ws.mixed_rho != Some(e.rho) {
                ws.w2.clear();
                ws.w2.extend_from_slice(&ws.b2);
                mix_correlated(&ws.b1, &mut ws.w2, e.rho);
                ws.mixed_rho = Some(e.rho);
            }
            let span = n_t + e.h + 1;
            boundary_excess(&ws.b1[..span], 0, dt, e.u, c1, &mut ws.d1);
            boundary_excess(&ws.w2[..span], 0, dt, e.au, c2, &mut ws.d2);
            let hit = match kind {
                RuinKind::Simultaneous | RuinKind::Parisian => {
                    parisian_hit(&ws.d1, &ws.d2, n_t, e.h, &mut ws.window)
                }
                RuinKind::Cumulative => joint_ruin_count(&ws.d1, &ws.d2, n_t) >= e.m,
            };
            if hit {
                sums[k] += 1.0;
            }
        }
    })?;

    let z = cfg.z();
    Ok(points
        .iter()
        .zip(&evs)
        .enumerate()
        .map(|(k, (p, e))| {
            let (value, stderr, ci_low, ci_high) = totals.bernoulli(k, z);
            let h = e.h as f64 * dt;
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
                    h,
                    s: h * p.u() * p.u(),
                    sojourn_budget: if kind == RuinKind::Cumulative {
                        (e.m - 1) as f64 * dt * p.u() * p.u()
                    } else {
                        0.0
                    },
                    t_trunc: None,
                    truncation_change: None,
                },
            }
        })
        .collect())
}

fn single(kind: RuinKind, p: &ModelParams, cfg: &McConfig) -> Result<Estimate> {
    Ok(simulate_sweep(kind, std::slice::from_ref(p), cfg)?.remove(0))
}

/// Probability that both surpluses are negative at a common grid time in
/// `[0, T]`.
pub fn estimate_simultaneous(p: &ModelParams, cfg: &McConfig) -> Result<Estimate> {
    single(RuinKind::Simultaneous, p, cfg)
}

/// Probability of a window of length `H` with both surpluses negative,
/// starting in `[0, T]`.
pub fn estimate_parisian(p: &ModelParams, cfg: &McConfig) -> Result<Estimate> {
    single(RuinKind::Parisian, p, cfg)
}

/// Probability that the joint negative sojourn in `[0, T]` exceeds
/// `L / u^2`.
pub fn estimate_cumulative(p: &ModelParams, cfg: &McConfig) -> Result<Estimate> {
    single(RuinKind::Cumulative, p, cfg)
}

/// Empirical `P{u^2 (1 - tau_L1) >= x | tau_L2 <= 1}` for several `x`.
///
/// The problem is first mapped to the unit horizon; `l1`, `l2` and the
/// `x` values are in the scaled units of that problem. The ruin time
/// `tau_L` is the grid time at which the joint negative sojourn first
/// exceeds `L / u^2`. The ratio of the two counts gets a delta-method
/// interval.
pub fn ruin_time_survival_curve(
    p: &ModelParams,
    l1: f64,
    l2: f64,
    xs: &[f64],
    cfg: &McConfig,
) -> Result<Vec<Estimate>> {
    if !(0.0 <= l2 && l2 <= l1) {
        return Err(domain(format!("need 0 <= L2 <= L1, got L1 = {l1}, L2 = {l2}")));
    }
    if xs.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(domain("x values must be finite and non-negative"));
    }
    cfg.validate()?;
    let q = rescale_to_unit_horizon(p);
    let dt = cfg.dt;
    let u = q.u();
    let n_t = steps_covering(1.0, dt);
    let m1 = sojourn_points(l1 / (u * u), dt);
    let m2 = sojourn_points(l2 / (u * u), dt);
    // tau_L1 <= T - x / u^2 on the grid means the m1-th ruin point has
    // index at most n_t - ceil(x / (u^2 dt)).
    let cutoffs: Vec<Option<usize>> = xs
        .iter()
        .map(|&x| n_t.checked_sub(steps_covering(x / (u * u), dt)))
        .collect();
    let grid = TimeGrid::new(0, n_t, dt)?;
    let (c1, c2, au, rho) = (q.c1(), q.c2(), q.a() * u, q.rho());
    let gate: Vec<f64> = (0..=n_t).map(|i| boundary(u, c1, grid_time(i as i64, dt))).collect();
    let rng = CounterRng::new(cfg.seed);
    let width = 2 + 3 * xs.len();

    let totals = run_batches(cfg, width, |path, ws: &mut SimWorkspace, sums| {
        let len = grid.len();
        ws.b1.resize(len, 0.0);
        fill_brownian(&rng, path, Stream::Forward1, Stream::Backward1, &grid, &mut ws.b1);
        if !ws.b1.iter().zip(&gate).any(|(w, g)| w > g) {
            return;
        }
        ws.b2.resize(len, 0.0);
        fill_brownian(&rng, path, Stream::Forward2, Stream::Backward2, &grid, &mut ws.b2);
        mix_correlated(&ws.b1, &mut ws.b2, rho);
        boundary_excess(&ws.b1, 0, dt, u, c1, &mut ws.d1);
        boundary_excess(&ws.b2, 0, dt, au, c2, &mut ws.d2);
        let mut count = 0usize;
        let mut tau1 = None;
        let mut tau2 = None;
        for (i, (&x, &y)) in ws.d1.iter().zip(&ws.d2).enumerate() {
            if x > 0.0 && y > 0.0 {
                count += 1;
                if count == m2 {
                    tau2 = Some(i);
                }
                if count == m1 {
                    tau1 = Some(i);
                    break;
                }
            }
        }
        if tau2.is_none() {
            return;
        }
        sums[0] += 1.0;
        sums[1] += 1.0;
        for (k, cut) in cutoffs.iter().enumerate() {
            let hit = matches!((tau1, cut), (Some(t), Some(c)) if t <= *c);
            if hit {
                // the numerator event implies the denominator event
                sums[2 + 3 * k] += 1.0;
                sums[3 + 3 * k] += 1.0;
                sums[4 + 3 * k] += 1.0;
            }
        }
    })?;

    let n = totals.n_paths as f64;
    let sy = totals.sums[0];
    let syy = totals.sums[1];
    if sy == 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    let z = cfg.z();
    Ok(cutoffs
        .iter()
        .enumerate()
        .map(|(k, _)| {
            let sx = totals.sums[2 + 3 * k];
            let sxx = totals.sums[3 + 3 * k];
            let sxy = totals.sums[4 + 3 * k];
            let r = sx / sy;
            let ybar = sy / n;
            let resid = (sxx - 2.0 * r * sxy + r * r * syy).max(0.0) / n;
            let se = (resid / n).sqrt() / ybar;
            Estimate {
                value: r,
                stderr: se,
                ci_low: (r - z * se).max(0.0),
                ci_high: (r + z * se).min(1.0),
                n_paths: totals.n_paths,
                dt,
                seed: cfg.seed,
                effective: EffectiveParams {
                    horizon: n_t as f64 * dt,
                    h: 0.0,
                    s: 0.0,
                    sojourn_budget: (m1 - 1) as f64 * dt * u * u,
                    t_trunc: None,
                    truncation_change: None,
                },
            }
        })
        .collect())
}

pub fn estimate_ruin_time_conditional(
    p: &ModelParams,
    l1: f64,
    l2: f64,
    x: f64,
    cfg: &McConfig,
) -> Result<Estimate> {
    Ok(ruin_time_survival_curve(p, l1, l2, &[x], cfg)?.remove(0))
}
