//! Gridded Brownian paths driven by the counter-based streams.
//!
//! All samplers realize one canonical two-sided path per `(seed,
//! path_index)`: forward increments come from the forward stream, the
//! negative-time part is an independent Brownian motion run backwards from
//! the origin. A grid only selects which points of that path are returned.

use crate::error::{domain, Error, Result};
use crate::gauss::check_rho;
use crate::rng::{CounterRng, Stream};

/// Uniform grid `t_i = (start + i) dt`, `i = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    dt: f64,
    start: i64,
    n: usize,
}

/// Number of whole steps needed to cover a length `x >= 0`, rounding up.
///
/// Ratios within a relative `1e-9` of an integer snap to it, so `1.0 / 1e-4`
/// is 10000 steps and not 10001.
pub fn steps_covering(x: f64, dt: f64) -> usize {
    let r = x / dt;
    let k = r.round();
    if (r - k).abs() <= 1e-9 * k.max(1.0) {
        k.max(0.0) as usize
    } else {
        r.ceil().max(0.0) as usize
    }
}

/// Largest `k` with `k dt <= x`, with the same snapping as [`steps_covering`].
pub fn steps_within(x: f64, dt: f64) -> usize {
    let r = x / dt;
    let k = r.round();
    if (r - k).abs() <= 1e-9 * k.max(1.0) {
        k.max(0.0) as usize
    } else {
        r.floor().max(0.0) as usize
    }
}

impl TimeGrid {
    pub fn new(start: i64, n: usize, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(domain(format!("dt must be positive, got {dt}")));
        }
        if n == 0 {
            return Err(domain("a grid needs at least one step"));
        }
        Ok(TimeGrid { dt, start, n })
    }

    /// Grid on `[0, t_max]`, with `t_max` rounded up to whole steps.
    pub fn forward(t_max: f64, dt: f64) -> Result<Self> {
        Self::two_sided(0.0, t_max, dt)
    }

    /// Grid on `[-back, fwd]` through the origin, both ends rounded outwards.
    pub fn two_sided(back: f64, fwd: f64, dt: f64) -> Result<Self> {
        if !(back >= 0.0 && fwd >= 0.0 && back.is_finite() && fwd.is_finite()) {
            return Err(domain("grid extents must be finite and non-negative"));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(domain(format!("dt must be positive, got {dt}")));
        }
        let nb = steps_covering(back, dt);
        let nf = steps_covering(fwd, dt);
        Self::new(-(nb as i64), nb + nf, dt)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
    /// Global step index of the first point.
    pub fn start(&self) -> i64 {
        self.start
    }
    /// Number of steps; the grid has `n + 1` points.
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn len(&self) -> usize {
        self.n + 1
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn t(&self, i: usize) -> f64 {
        (self.start + i as i64) as f64 * self.dt
    }
    pub fn t_min(&self) -> f64 {
        self.t(0)
    }
    pub fn t_max(&self) -> f64 {
        self.t(self.n)
    }

    /// Position of `t = 0`, if it is a grid point.
    pub fn zero_index(&self) -> Option<usize> {
        if self.start <= 0 && self.start + self.n as i64 >= 0 {
            Some((-self.start) as usize)
        } else {
            None
        }
    }
}

/// Grid time of global step `k`. Every module uses this expression so that
/// boundaries computed in different places agree bit for bit.
#[inline]
pub(crate) fn grid_time(k: i64, dt: f64) -> f64 {
    k as f64 * dt
}

/// Writes the canonical path of one driving motion onto `grid`.
pub(crate) fn fill_brownian(
    rng: &CounterRng,
    path_index: u64,
    forward: Stream,
    backward: Stream,
    grid: &TimeGrid,
    out: &mut [f64],
) {
    assert_eq!(out.len(), grid.len());
    let sdt = grid.dt.sqrt();
    let first = grid.start;
    let last = grid.start + grid.n as i64;
    if first >= 0 {
        let base = chained_sum(rng, path_index, forward, first as u64, sdt);
        out[0] = base;
        rng.fill_normals(path_index, forward, first as u64, &mut out[1..]);
        cumulate(out, sdt);
    } else if last <= 0 {
        // Entirely in negative time: walk back from the origin.
        let base = chained_sum(rng, path_index, backward, (-last) as u64, sdt);
        let len = out.len();
        out[len - 1] = base;
        rng.fill_normals(path_index, backward, (-last) as u64, &mut out[..len - 1]);
        out[..len - 1].reverse();
        for j in (0..len - 1).rev() {
            out[j] = out[j + 1] + sdt * out[j];
        }
    } else {
        let z = (-first) as usize;
        out[z] = 0.0;
        {
            let back = &mut out[..z];
            rng.fill_normals(path_index, backward, 0, back);
            back.reverse();
        }
        for j in (0..z).rev() {
            out[j] = out[j + 1] + sdt * out[j];
        }
        rng.fill_normals(path_index, forward, 0, &mut out[z + 1..]);
        cumulate(&mut out[z..], sdt);
    }
}

fn cumulate(v: &mut [f64], sdt: f64) {
    let mut acc = v[0];
    for x in v[1..].iter_mut() {
        acc += sdt * *x;
        *x = acc;
    }
}

fn chained_sum(rng: &CounterRng, path_index: u64, stream: Stream, steps: u64, sdt: f64) -> f64 {
    let mut buf = [0.0f64; 1024];
    let mut acc = 0.0;
    let mut done = 0u64;
    while done < steps {
        let take = (steps - done).min(buf.len() as u64) as usize;
        rng.fill_normals(path_index, stream, done, &mut buf[..take]);
        for z in &buf[..take] {
            acc += sdt * z;
        }
        done += take as u64;
    }
    acc
}

/// Standard Brownian motion sampled on `grid`.
pub fn sample_bm(grid: &TimeGrid, seed: u64, path_index: u64) -> Vec<f64> {
    let rng = CounterRng::new(seed);
    let mut out = vec![0.0; grid.len()];
    fill_brownian(&rng, path_index, Stream::Forward1, Stream::Backward1, grid, &mut out);
    out
}

/// Two-sided Brownian motion anchored at the origin.
pub fn sample_two_sided_bm(grid: &TimeGrid, seed: u64, path_index: u64) -> Result<Vec<f64>> {
    if grid.zero_index().is_none() {
        return Err(Error::GridMisaligned(format!(
            "t = 0 is not a point of the grid [{}, {}]",
            grid.t_min(),
            grid.t_max()
        )));
    }
    Ok(sample_bm(grid, seed, path_index))
}

/// A correlated pair `(W1, W2) = (B1, rho B1 + sqrt(1 - rho^2) B2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPair {
    pub grid: TimeGrid,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub rho: f64,
    pub seed: u64,
    pub path_index: u64,
}

pub fn sample_correlated_pair(
    grid: &TimeGrid,
    rho: f64,
    seed: u64,
    path_index: u64,
) -> Result<PathPair> {
    check_rho(rho)?;
    let rng = CounterRng::new(seed);
    let mut w1 = vec![0.0; grid.len()];
    let mut w2 = vec![0.0; grid.len()];
    fill_brownian(&rng, path_index, Stream::Forward1, Stream::Backward1, grid, &mut w1);
    fill_brownian(&rng, path_index, Stream::Forward2, Stream::Backward2, grid, &mut w2);
    mix_correlated(&w1, &mut w2, rho);
    Ok(PathPair { grid: *grid, w1, w2, rho, seed, path_index })
}

/// Turns an independent `b2` into `rho b1 + sqrt(1 - rho^2) b2` in place.
pub(crate) fn mix_correlated(b1: &[f64], b2: &mut [f64], rho: f64) {
    let rs = (1.0 - rho * rho).sqrt();
    for (y, &x) in b2.iter_mut().zip(b1) {
        *y = rho * x + rs * *y;
    }
}

/// Ruin boundary `u + c t`.
#[inline]
pub(crate) fn boundary(u: f64, c: f64, t: f64) -> f64 {
    u + c * t
}

/// Surplus `u + c t_i - w_i` at every grid point.
///
/// The surplus is negative exactly when `w_i > u + c t_i`, which is the
/// comparison the ruin functionals use.
pub fn surplus_transform(path: &[f64], grid: &TimeGrid, u: f64, c: f64) -> Result<Vec<f64>> {
    if path.len() != grid.len() {
        return Err(domain(format!(
            "path has {} points but the grid has {}",
            path.len(),
            grid.len()
        )));
    }
    Ok(path
        .iter()
        .enumerate()
        .map(|(i, &w)| boundary(u, c, grid.t(i)) - w)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_rounding() {
        assert_eq!(steps_covering(1.0, 1e-4), 10_000);
        assert_eq!(steps_covering(0.3, 0.1), 3);
        assert_eq!(steps_covering(0.31, 0.1), 4);
        assert_eq!(steps_covering(0.0, 0.1), 0);
        assert_eq!(steps_within(0.31, 0.1), 3);
        assert_eq!(steps_within(0.3, 0.1), 3);
    }

    #[test]
    fn grid_layout() {
        let g = TimeGrid::two_sided(0.5, 1.0, 0.1).unwrap();
        assert_eq!(g.start(), -5);
        assert_eq!(g.n(), 15);
        assert_eq!(g.zero_index(), Some(5));
        assert_eq!(g.t(5), 0.0);
        assert!(TimeGrid::new(0, 0, 0.1).is_err());
        assert!(TimeGrid::new(1, 4, 0.1).unwrap().zero_index().is_none());
    }

    #[test]
    fn canonical_path_across_grids() {
        let dt = 0.01;
        let wide = TimeGrid::two_sided(1.0, 2.0, dt).unwrap();
        let full = sample_bm(&wide, 5, 3);
        let fwd = sample_bm(&TimeGrid::forward(2.0, dt).unwrap(), 5, 3);
        assert_eq!(&full[100..], &fwd[..]);
        let inner = sample_bm(&TimeGrid::new(20, 50, dt).unwrap(), 5, 3);
        assert_eq!(&full[120..171], &inner[..]);
        let neg = sample_bm(&TimeGrid::new(-80, 30, dt).unwrap(), 5, 3);
        assert_eq!(&full[20..51], &neg[..]);
        assert_eq!(full[100], 0.0);
    }

    #[test]
    fn two_sided_needs_origin() {
        let g = TimeGrid::new(2, 10, 0.1).unwrap();
        assert!(matches!(sample_two_sided_bm(&g, 1, 0), Err(Error::GridMisaligned(_))));
    }

    #[test]
    fn surplus_examples() {
        let g = TimeGrid::forward(1.0, 0.25).unwrap();
        let zero = vec![0.0; 5];
        assert_eq!(surplus_transform(&zero, &g, 1.0, 0.0).unwrap(), vec![1.0; 5]);
        let path = vec![0.0, 0.5, -1.0, 2.0, 0.25];
        let neg: Vec<f64> = path.iter().map(|x| -x).collect();
        assert_eq!(surplus_transform(&path, &g, 0.0, 0.0).unwrap(), neg);
        assert!(surplus_transform(&path[..3], &g, 0.0, 0.0).is_err());
    }
}
