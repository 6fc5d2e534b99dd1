//! Path functionals: window minima, ruin events, sojourn counts and the
//! Pareto staircases behind the constant estimators.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::error::{domain, Error, Result};
use crate::model::ModelParams;
use crate::paths::{boundary, grid_time, steps_covering, PathPair, TimeGrid};

/// Minimum of each run of `m` consecutive values.
///
/// `out[j]` is the minimum of `values[j..j + m]`, i.e. of the window ending
/// at input index `j + m - 1`. Returns an empty vector when `m` exceeds the
/// input length.
///
/// # Panics
/// If `m == 0`.
pub fn sliding_window_min(values: &[f64], m: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut scratch = Vec::new();
    sliding_window_min_into(values, m, &mut out, &mut scratch);
    out
}

/// Buffer-reusing form of [`sliding_window_min`].
pub fn sliding_window_min_into(
    values: &[f64],
    m: usize,
    out: &mut Vec<f64>,
    deque: &mut Vec<usize>,
) {
    assert!(m >= 1, "window must hold at least one sample");
    out.clear();
    if m > values.len() {
        return;
    }
    if m == 1 {
        out.extend_from_slice(values);
        return;
    }
    out.reserve(values.len() + 1 - m);
    // Indices with increasing values; `head` marks the live front.
    deque.clear();
    let mut head = 0usize;
    for (i, &v) in values.iter().enumerate() {
        while deque.len() > head && values[*deque.last().unwrap()] >= v {
            deque.pop();
        }
        deque.push(i);
        if deque[head] + m <= i {
            head += 1;
        }
        if i + 1 >= m {
            out.push(values[deque[head]]);
        }
        if head > 4096 && head * 2 > deque.len() {
            deque.drain(..head);
            head = 0;
        }
    }
}

/// Grid bookkeeping shared by the finite-capital events: step counts of the
/// horizon and the window, and the grid offset of `t = 0`.
struct EventGrid {
    zero: usize,
    n_t: usize,
    h: usize,
}

fn event_grid(grid: &TimeGrid, p: &ModelParams, window: bool) -> Result<EventGrid> {
    let zero = grid.zero_index().ok_or_else(|| {
        Error::GridCoverage("the grid must contain t = 0".to_string())
    })?;
    let n_t = steps_covering(p.horizon(), grid.dt());
    let h = if window { steps_covering(p.h(), grid.dt()) } else { 0 };
    if zero + n_t + h > grid.n() {
        return Err(Error::GridCoverage(format!(
            "need [0, {}] but the grid ends at {}",
            (n_t + h) as f64 * grid.dt(),
            grid.t_max()
        )));
    }
    Ok(EventGrid { zero, n_t, h })
}

/// `w_i - (u + c t_i)` for the points `from..from + len` of the grid. The
/// sign is exactly the sign of the excess over the ruin boundary.
pub(crate) fn boundary_excess(
    w: &[f64],
    start: i64,
    dt: f64,
    u: f64,
    c: f64,
    out: &mut Vec<f64>,
) {
    out.clear();
    out.extend(
        w.iter()
            .enumerate()
            .map(|(i, &x)| x - boundary(u, c, grid_time(start + i as i64, dt))),
    );
}

/// Whether some grid time `t` in `[0, T]` has both excesses strictly
/// positive on every grid point of `[t, t + H]`.
pub fn parisian_ruin_indicator(pair: &PathPair, p: &ModelParams) -> Result<bool> {
    ruin_event(pair, p, true)
}

/// Parisian ruin with `H = 0`.
pub fn simultaneous_ruin_indicator(pair: &PathPair, p: &ModelParams) -> Result<bool> {
    ruin_event(pair, p, false)
}

fn ruin_event(pair: &PathPair, p: &ModelParams, window: bool) -> Result<bool> {
    let eg = event_grid(&pair.grid, p, window)?;
    let span = eg.zero..eg.zero + eg.n_t + eg.h + 1;
    let (mut d1, mut d2) = (Vec::new(), Vec::new());
    let dt = pair.grid.dt();
    boundary_excess(&pair.w1[span.clone()], 0, dt, p.u(), p.c1(), &mut d1);
    boundary_excess(&pair.w2[span], 0, dt, p.a() * p.u(), p.c2(), &mut d2);
    let mut scratch = WindowScratch::default();
    Ok(parisian_hit(&d1, &d2, eg.n_t, eg.h, &mut scratch))
}

/// Reusable buffers for [`parisian_hit`].
#[derive(Default)]
pub(crate) struct WindowScratch {
    m1: Vec<f64>,
    m2: Vec<f64>,
    deque: Vec<usize>,
}

/// Core Parisian test on boundary excesses indexed from `t = 0`.
pub(crate) fn parisian_hit(
    d1: &[f64],
    d2: &[f64],
    n_t: usize,
    h: usize,
    s: &mut WindowScratch,
) -> bool {
    let len = n_t + h + 1;
    if h == 0 {
        return d1[..len].iter().zip(&d2[..len]).any(|(&x, &y)| x > 0.0 && y > 0.0);
    }
    sliding_window_min_into(&d1[..len], h + 1, &mut s.m1, &mut s.deque);
    sliding_window_min_into(&d2[..len], h + 1, &mut s.m2, &mut s.deque);
    s.m1.iter().zip(&s.m2).any(|(&x, &y)| x > 0.0 && y > 0.0)
}

/// Number of grid points in `[0, T]` where both surpluses are negative.
pub(crate) fn joint_ruin_count(d1: &[f64], d2: &[f64], n_t: usize) -> usize {
    d1[..=n_t]
        .iter()
        .zip(&d2[..=n_t])
        .filter(|(&x, &y)| x > 0.0 && y > 0.0)
        .count()
}

/// Time spent with both surpluses negative, `dt` per grid point of `[0, T]`.
///
/// The point `t = 0` never counts because `u > 0`, so this is the Riemann
/// sum over `(0, T]` and it is positive exactly when the simultaneous ruin
/// indicator is true.
pub fn sojourn_time(pair: &PathPair, p: &ModelParams) -> Result<f64> {
    let eg = event_grid(&pair.grid, p, false)?;
    let span = eg.zero..eg.zero + eg.n_t + 1;
    let (mut d1, mut d2) = (Vec::new(), Vec::new());
    let dt = pair.grid.dt();
    boundary_excess(&pair.w1[span.clone()], 0, dt, p.u(), p.c1(), &mut d1);
    boundary_excess(&pair.w2[span], 0, dt, p.a() * p.u(), p.c2(), &mut d2);
    Ok(joint_ruin_count(&d1, &d2, eg.n_t) as f64 * dt)
}

/// Grid points a sojourn must cover to exceed `threshold` strictly.
pub fn sojourn_points(threshold: f64, dt: f64) -> usize {
    crate::paths::steps_within(threshold, dt) + 1
}

/// Sliding `S`-window minima of `W1(s) - s` and `W2(s) - a s`.
///
/// Entry `j` belongs to grid time `t_j = j dt` for `t_j` in `[0, t_max]`,
/// with the window `[t_j - S, t_j]` reaching into negative time.
pub fn window_excess_sequence(pair: &PathPair, s_steps: usize, a: f64) -> Result<Vec<(f64, f64)>> {
    let g = &pair.grid;
    let zero = g.zero_index().ok_or_else(|| {
        Error::GridCoverage("the grid must contain t = 0".to_string())
    })?;
    if zero < s_steps {
        return Err(Error::GridCoverage(format!(
            "window of {s_steps} steps reaches before the grid start {}",
            g.t_min()
        )));
    }
    let from = zero - s_steps;
    let start = g.start() + from as i64;
    let mut x1 = Vec::new();
    let mut x2 = Vec::new();
    drifted(&pair.w1[from..], start, g.dt(), 1.0, &mut x1);
    drifted(&pair.w2[from..], start, g.dt(), a, &mut x2);
    let m1 = sliding_window_min(&x1, s_steps + 1);
    let m2 = sliding_window_min(&x2, s_steps + 1);
    Ok(m1.into_iter().zip(m2).collect())
}

/// `w_i - slope * t_i`.
pub(crate) fn drifted(w: &[f64], start: i64, dt: f64, slope: f64, out: &mut Vec<f64>) {
    out.clear();
    out.extend(
        w.iter()
            .enumerate()
            .map(|(i, &x)| x - slope * grid_time(start + i as i64, dt)),
    );
}

/// Pareto staircase: `a` strictly increasing, `b` strictly decreasing.
///
/// The set `{(x, y): x < a_i and y < b_i for some i}` is the region under
/// the staircase.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StaircaseFrontier {
    points: Vec<(f64, f64)>,
}

impl StaircaseFrontier {
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Whether `(x, y)` lies strictly under the staircase.
    pub fn covers(&self, x: f64, y: f64) -> bool {
        self.points.iter().any(|&(a, b)| x < a && y < b)
    }

    /// Builds a frontier from corners listed by decreasing `a`.
    fn from_descending(mut pts: Vec<(f64, f64)>) -> Self {
        pts.reverse();
        StaircaseFrontier { points: pts }
    }
}

fn by_p_desc(x: &(f64, f64), y: &(f64, f64)) -> Ordering {
    y.0.total_cmp(&x.0).then_with(|| y.1.total_cmp(&x.1))
}

/// Maximal points of a planar set; weakly dominated and duplicate points
/// are dropped.
pub fn pareto_frontier(points: &[(f64, f64)]) -> StaircaseFrontier {
    if points.is_empty() {
        return StaircaseFrontier::default();
    }
    // Only points beating both the best-p point in q and the best-q point
    // in p can be maximal, apart from those two themselves.
    let mut ip = 0;
    let mut iq = 0;
    for (i, pt) in points.iter().enumerate() {
        let bp = points[ip];
        if pt.0 > bp.0 || (pt.0 == bp.0 && pt.1 > bp.1) {
            ip = i;
        }
        let bq = points[iq];
        if pt.1 > bq.1 || (pt.1 == bq.1 && pt.0 > bq.0) {
            iq = i;
        }
    }
    let (pp, qq) = (points[iq].0, points[ip].1);
    let mut cand: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(p, q)| p > pp && q > qq)
        .collect();
    cand.push(points[ip]);
    cand.push(points[iq]);
    cand.sort_unstable_by(by_p_desc);
    let mut out = Vec::new();
    let mut best = f64::NEG_INFINITY;
    for (p, q) in cand {
        if q > best {
            out.push((p, q));
            best = q;
        }
    }
    StaircaseFrontier::from_descending(out)
}

#[derive(PartialEq)]
struct Key(f64);
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Boundary of `{(x, y): at least m points have p > x and q > y}`.
///
/// Plane sweep over decreasing `p` with a min-heap of the `m` largest `q`
/// seen so far; the heap minimum is the height of the region.
///
/// # Panics
/// If `m == 0`.
pub fn mth_layer_frontier(points: &[(f64, f64)], m: usize) -> StaircaseFrontier {
    assert!(m >= 1, "layer index starts at 1");
    if m > points.len() {
        return StaircaseFrontier::default();
    }
    let mut cand = layer_prefilter(points, m);
    cand.sort_unstable_by(by_p_desc);
    let mut heap: BinaryHeap<Reverse<Key>> = BinaryHeap::with_capacity(m + 1);
    let mut out = Vec::new();
    let mut best = f64::NEG_INFINITY;
    let mut i = 0;
    while i < cand.len() {
        let p = cand[i].0;
        while i < cand.len() && cand[i].0 == p {
            heap.push(Reverse(Key(cand[i].1)));
            if heap.len() > m {
                heap.pop();
            }
            i += 1;
        }
        if heap.len() == m {
            let h = heap.peek().unwrap().0 .0;
            if h > best {
                out.push((p, h));
                best = h;
            }
        }
    }
    StaircaseFrontier::from_descending(out)
}

/// Drops points that can never rank among the top `m` heights.
///
/// Any abscissa left of the `m`-th largest `p` sees at least the `m` points
/// with the largest `p`, so a point with `q` below all of theirs never
/// matters; the same holds with the roles of `p` and `q` swapped.
fn layer_prefilter(points: &[(f64, f64)], m: usize) -> Vec<(f64, f64)> {
    if points.len() <= 4 * m + 16 {
        return points.to_vec();
    }
    let mut work = points.to_vec();
    let k = m - 1;
    work.select_nth_unstable_by(k, by_p_desc);
    let q_floor = work[..m].iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    work.retain(|x| x.1 >= q_floor);
    if work.len() > m {
        work.select_nth_unstable_by(k, |x, y| y.1.total_cmp(&x.1));
        let p_floor = work[..m].iter().map(|x| x.0).fold(f64::INFINITY, f64::min);
        work.retain(|x| x.0 >= p_floor);
    }
    work
}

/// `sum_i (e^{l1 a_i} - e^{l1 a_(i-1)}) e^{l2 b_i}` with `a_0 = -inf`.
///
/// Equals `l1 l2` times the integral of `e^{l1 x + l2 y}` over the region
/// under the staircase.
pub fn staircase_exp_measure(f: &StaircaseFrontier, lambda1: f64, lambda2: f64) -> Result<f64> {
    if !(lambda1 > 0.0 && lambda2 > 0.0) {
        return Err(domain(format!(
            "staircase measure needs positive rates, got ({lambda1}, {lambda2})"
        )));
    }
    Ok(staircase_sum(f.points(), lambda1, lambda2))
}

pub(crate) fn staircase_sum(pts: &[(f64, f64)], l1: f64, l2: f64) -> f64 {
    let Some(&(a0, b0)) = pts.first() else {
        return 0.0;
    };
    let mut total = (l1 * a0 + l2 * b0).exp();
    for w in pts.windows(2) {
        let (a_prev, _) = w[0];
        let (a, b) = w[1];
        total += (l1 * a_prev + l2 * b).exp() * (l1 * (a - a_prev)).exp_m1();
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_min_examples() {
        assert_eq!(sliding_window_min(&[3.0, 1.0, 2.0], 1), vec![3.0, 1.0, 2.0]);
        assert_eq!(sliding_window_min(&[3.0, 1.0, 2.0], 2), vec![1.0, 1.0]);
        assert!(sliding_window_min(&[3.0, 1.0], 3).is_empty());
        assert_eq!(sliding_window_min(&[2.0, 2.0, 2.0, 1.0], 2), vec![2.0, 2.0, 1.0]);
    }

    #[test]
    fn frontier_examples() {
        let f = pareto_frontier(&[(1.0, 1.0)]);
        assert_eq!(f.points(), &[(1.0, 1.0)]);
        let f = pareto_frontier(&[(3.0, 1.0), (1.0, 3.0), (2.0, 2.0)]);
        assert_eq!(f.points(), &[(1.0, 3.0), (2.0, 2.0), (3.0, 1.0)]);
        let f = pareto_frontier(&[(3.0, 1.0), (2.0, 0.5), (1.0, 0.2)]);
        assert_eq!(f.points(), &[(3.0, 1.0)]);
        let f = pareto_frontier(&[(3.0, 1.0), (3.0, 2.0), (3.0, 2.0), (1.0, 2.0)]);
        assert_eq!(f.points(), &[(3.0, 2.0)]);
        assert!(pareto_frontier(&[]).is_empty());
    }

    #[test]
    fn layer_examples() {
        let pts = [(3.0, 1.0), (1.0, 3.0), (2.0, 2.0)];
        assert_eq!(mth_layer_frontier(&pts, 1), pareto_frontier(&pts));
        assert_eq!(mth_layer_frontier(&pts, 2).points(), &[(1.0, 2.0), (2.0, 1.0)]);
        assert_eq!(mth_layer_frontier(&pts, 3).points(), &[(1.0, 1.0)]);
        assert!(mth_layer_frontier(&pts, 4).is_empty());
    }

    #[test]
    fn measure_examples() {
        let one = pareto_frontier(&[(0.0, 0.0)]);
        assert_eq!(staircase_exp_measure(&one, 1.0, 1.0).unwrap(), 1.0);
        let two = pareto_frontier(&[(-1.0, 1.0), (1.0, -1.0)]);
        let got = staircase_exp_measure(&two, 1.0, 1.0).unwrap();
        assert!((got - (2.0 - (-2.0f64).exp())).abs() < 1e-15);
        assert_eq!(staircase_exp_measure(&StaircaseFrontier::default(), 1.0, 1.0).unwrap(), 0.0);
        assert!(staircase_exp_measure(&one, 0.0, 1.0).is_err());
        let (p, q) = (0.7, -1.3);
        let single = pareto_frontier(&[(p, q)]);
        assert_eq!(
            staircase_exp_measure(&single, 0.8, 0.4).unwrap(),
            (0.8 * p + 0.4 * q).exp()
        );
    }

    fn synthetic(e1: &[f64], e2: &[f64], dt: f64) -> PathPair {
        // u = 1, c = 0: the path is excess + 1.
        let n = e1.len() - 1;
        PathPair {
            grid: TimeGrid::new(0, n, dt).unwrap(),
            w1: e1.iter().map(|x| x + 1.0).collect(),
            w2: e2.iter().map(|x| x + 1.0).collect(),
            rho: 0.0,
            seed: 0,
            path_index: 0,
        }
    }

    #[test]
    fn ruin_on_synthetic_pairs() {
        use crate::model::Window;
        let dt = 0.01;
        let p = ModelParams::new(1.0, 1.0, 0.0, 0.0, 0.0, 1.0)
            .unwrap()
            .with_window(Window::AbsoluteH(0.2))
            .unwrap();
        let up = vec![1.0; 121];
        let down = vec![-1.0; 121];
        assert!(parisian_ruin_indicator(&synthetic(&up, &up, dt), &p).unwrap());
        assert!(!parisian_ruin_indicator(&synthetic(&down, &up, dt), &p).unwrap());
        // positive only on a 0.1-long stretch
        let mut half = down.clone();
        for v in &mut half[50..=60] {
            *v = 1.0;
        }
        let pair = synthetic(&half, &up, dt);
        assert!(!parisian_ruin_indicator(&pair, &p).unwrap());
        assert!(simultaneous_ruin_indicator(&pair, &p).unwrap());
        // a grid too short for T + H
        let short = synthetic(&up[..101], &up[..101], dt);
        assert!(matches!(parisian_ruin_indicator(&short, &p), Err(Error::GridCoverage(_))));
    }

    #[test]
    fn sojourn_examples() {
        let dt = 0.01;
        let p = ModelParams::new(1.0, 1.0, 0.0, 0.0, 0.0, 1.0).unwrap();
        let up = vec![1.0; 101];
        let down = vec![-1.0; 101];
        let all = sojourn_time(&synthetic(&up, &up, dt), &p).unwrap();
        assert!((all - 1.0).abs() <= dt + 1e-12);
        assert_eq!(sojourn_time(&synthetic(&down, &up, dt), &p).unwrap(), 0.0);
        let square: Vec<f64> = (0..=100)
            .map(|i| if (25..50).contains(&i) { 1.0 } else { -1.0 })
            .collect();
        let got = sojourn_time(&synthetic(&square, &up, dt), &p).unwrap();
        assert!((got - 0.25).abs() <= dt + 1e-12);
    }

    #[test]
    fn sojourn_point_counts() {
        assert_eq!(sojourn_points(0.0, 0.01), 1);
        assert_eq!(sojourn_points(0.005, 0.01), 1);
        assert_eq!(sojourn_points(0.03, 0.01), 4);
        assert_eq!(sojourn_points(0.031, 0.01), 4);
    }

    #[test]
    fn excess_sequence_shapes() {
        let g = TimeGrid::two_sided(0.05, 0.1, 0.01).unwrap();
        let w1: Vec<f64> = (0..g.len()).map(|i| -(i as f64)).collect();
        let pair = PathPair {
            grid: g,
            w2: w1.clone(),
            w1,
            rho: 0.0,
            seed: 0,
            path_index: 0,
        };
        let seq = window_excess_sequence(&pair, 0, 1.0).unwrap();
        assert_eq!(seq.len(), 11);
        for (j, &(m1, m2)) in seq.iter().enumerate() {
            let x = pair.w1[5 + j] - g.t(5 + j);
            assert_eq!((m1, m2), (x, x));
        }
        // decreasing path: minimum at the right end of every window
        let seq3 = window_excess_sequence(&pair, 3, 1.0).unwrap();
        assert_eq!(seq3, seq);
        assert!(window_excess_sequence(&pair, 6, 1.0).is_err());
    }
}
