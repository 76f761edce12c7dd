//! Distances between step functions on `[0, T]`.
//!
//! `d_T(f, g)` is the infimum over Borel sets `A` of the sup-norm of `f - g`
//! off `A` plus the Lebesgue measure of `A`: two paths are close when they
//! agree except on a set of small measure, which is exactly the tolerance
//! needed to ignore short excursions. For step functions the infimum is
//! attained on a superlevel set of `|f - g|`, which makes the distance exactly
//! computable. `d_t2` is the Hausdorff distance between completed graphs, and
//! `modulus` measures the `delta`-neighborhood of the jump set.

use crate::error::Error;
use crate::scalar::Real;
use crate::Result;

/// Right-continuous piecewise-constant function on `[0, horizon]`: value
/// `values[i]` on `[t_i, t_{i+1})` with `t_0 = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFn<T = f64> {
    horizon: T,
    jump_times: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> StepFn<T> {
    /// Builds a step function; jump times must be strictly increasing inside
    /// `(0, horizon)` and there must be one more value than jump times.
    pub fn new(horizon: T, jump_times: Vec<T>, values: Vec<T>) -> Result<Self> {
        if !(horizon > T::zero()) {
            return Err(Error::Validation("horizon must be positive".into()));
        }
        if values.len() != jump_times.len() + 1 {
            return Err(Error::Validation(format!(
                "{} values for {} jump times",
                values.len(),
                jump_times.len()
            )));
        }
        let mut prev = T::zero();
        for &t in &jump_times {
            if !(t > prev) || !(t < horizon) {
                return Err(Error::Validation(
                    "jump times must be strictly increasing in (0, horizon)".into(),
                ));
            }
            prev = t;
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("values must be finite".into()));
        }
        Ok(Self { horizon, jump_times, values })
    }

    pub fn constant(horizon: T, value: T) -> Result<Self> {
        Self::new(horizon, Vec::new(), vec![value])
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn jump_times(&self) -> &[T] {
        &self.jump_times
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn n_segments(&self) -> usize {
        self.values.len()
    }

    /// Segment triples `(start, end, value)` covering `[0, horizon)`.
    pub fn segments(&self) -> impl Iterator<Item = (T, T, T)> + '_ {
        (0..self.values.len()).map(move |i| {
            let start = if i == 0 { T::zero() } else { self.jump_times[i - 1] };
            let end = if i == self.values.len() - 1 { self.horizon } else { self.jump_times[i] };
            (start, end, self.values[i])
        })
    }

    pub fn value_at(&self, t: T) -> T {
        let idx = self.jump_times.partition_point(|&s| s <= t);
        self.values[idx]
    }

    /// The canonical representative: adjacent segments with equal values are
    /// merged, so the jump set is minimal. Idempotent.
    pub fn canonical(&self) -> StepFn<T> {
        let mut jump_times = Vec::new();
        let mut values = vec![self.values[0]];
        for (i, &t) in self.jump_times.iter().enumerate() {
            let next = self.values[i + 1];
            if next != *values.last().unwrap() {
                jump_times.push(t);
                values.push(next);
            }
        }
        StepFn { horizon: self.horizon, jump_times, values }
    }

    /// Values at the jump points of the canonical representative: the average
    /// of the one-sided limits. Metadata only; Lebesgue-null sets never affect
    /// the distances.
    pub fn jump_midpoints(&self) -> Vec<(T, T)> {
        let c = self.canonical();
        let half = T::from_f64_lossy(0.5);
        (0..c.jump_times.len())
            .map(|i| (c.jump_times[i], (c.values[i] + c.values[i + 1]) * half))
            .collect()
    }
}

fn horizon_tolerance<T: Real>(a: &StepFn<T>, b: &StepFn<T>) -> Result<T> {
    let t = a.horizon.max(b.horizon);
    let tol = t * T::from_f64_lossy(1e-12);
    if (a.horizon - b.horizon).abs() > tol {
        return Err(Error::Validation(format!("horizon mismatch: {} vs {}", a.horizon, b.horizon)));
    }
    Ok(tol)
}

/// Elementary intervals of `|f - g|`: lengths and absolute differences on the
/// merged breakpoint grid (breakpoints closer than `1e-12 * horizon` are
/// identified).
pub(crate) fn abs_diff_segments<T: Real>(f: &StepFn<T>, g: &StepFn<T>) -> Result<Vec<(T, T)>> {
    let tol = horizon_tolerance(f, g)?;
    let horizon = f.horizon.min(g.horizon);
    let mut cuts: Vec<T> = Vec::with_capacity(f.jump_times.len() + g.jump_times.len() + 2);
    cuts.push(T::zero());
    cuts.extend_from_slice(&f.jump_times);
    cuts.extend_from_slice(&g.jump_times);
    cuts.push(horizon);
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    cuts.dedup_by(|next, prev| *next - *prev <= tol);
    let half = T::from_f64_lossy(0.5);
    let mut out = Vec::with_capacity(cuts.len());
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        let mid = (a + b) * half;
        out.push((b - a, (f.value_at(mid) - g.value_at(mid)).abs()));
    }
    Ok(out)
}

/// The trajectory distance: minimum over thresholds `c` (zero or a value of
/// `|f - g|`) of `c + Lambda(|f - g| > c)`. Any Borel set `A` is dominated by
/// the superlevel set at its off-`A` sup, so this equals the full infimum.
pub fn d_t<T: Real>(f: &StepFn<T>, g: &StepFn<T>) -> Result<T> {
    let mut segs = abs_diff_segments(f, g)?;
    segs.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"));
    let n = segs.len();
    let mut suffix = vec![T::zero(); n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + segs[i].0;
    }
    // candidate c = 0
    let above_zero: T = segs.iter().filter(|s| s.1 > T::zero()).map(|s| s.0).sum();
    let mut best = above_zero;
    for i in 0..n {
        let c = segs[i].1;
        let j = segs.partition_point(|s| s.1 <= c);
        best = best.min(c + suffix[j]);
    }
    Ok(best)
}

/// Lebesgue measure of the open `delta`-neighborhood of the canonical jump
/// set, intersected with `[0, horizon]`.
pub fn modulus<T: Real>(f: &StepFn<T>, delta: T) -> Result<T> {
    if !(delta > T::zero()) {
        return Err(Error::Validation("delta must be positive".into()));
    }
    let c = f.canonical();
    let mut total = T::zero();
    let mut cur: Option<(T, T)> = None;
    for &t in &c.jump_times {
        let lo = (t - delta).max(T::zero());
        let hi = (t + delta).min(f.horizon);
        cur = match cur {
            Some((a, b)) if lo <= b => Some((a, b.max(hi))),
            Some((a, b)) => {
                total += b - a;
                Some((lo, hi))
            }
            None => Some((lo, hi)),
        };
    }
    if let Some((a, b)) = cur {
        total += b - a;
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Hausdorff distance between completed graphs
// ---------------------------------------------------------------------------

/// Axis-parallel segment of a completed graph, parametrized over [0, 1].
#[derive(Clone, Copy, Debug)]
pub(crate) struct Seg<T> {
    x0: T,
    y0: T,
    x1: T,
    y1: T,
}

impl<T: Real> Seg<T> {
    fn horizontal(y: T, x0: T, x1: T) -> Self {
        Seg { x0, y0: y, x1, y1: y }
    }

    fn vertical(x: T, y0: T, y1: T) -> Self {
        Seg { x0: x, y0, x1: x, y1 }
    }

    fn is_horizontal(&self) -> bool {
        self.y0 == self.y1
    }

    pub(crate) fn point(&self, lambda: T) -> (T, T) {
        (self.x0 + lambda * (self.x1 - self.x0), self.y0 + lambda * (self.y1 - self.y0))
    }

    pub(crate) fn length(&self) -> T {
        (self.x1 - self.x0).abs() + (self.y1 - self.y0).abs()
    }
}

/// The completed graph of the canonical representative: closed horizontal
/// segments for the constant pieces plus vertical segments spanning each jump.
pub(crate) fn completed_graph<T: Real>(f: &StepFn<T>) -> Vec<Seg<T>> {
    let c = f.canonical();
    let mut segs = Vec::with_capacity(2 * c.values.len());
    for (start, end, v) in c.segments() {
        segs.push(Seg::horizontal(v, start, end));
    }
    for (i, &t) in c.jump_times.iter().enumerate() {
        let (a, b) = (c.values[i], c.values[i + 1]);
        segs.push(Seg::vertical(t, a.min(b), a.max(b)));
    }
    segs
}

fn dist_point_interval<T: Real>(p: T, lo: T, hi: T) -> T {
    if p < lo {
        lo - p
    } else if p > hi {
        p - hi
    } else {
        T::zero()
    }
}

fn dist_point_seg<T: Real>(x: T, y: T, s: &Seg<T>) -> T {
    let dx = dist_point_interval(x, s.x0.min(s.x1), s.x0.max(s.x1));
    let dy = dist_point_interval(y, s.y0.min(s.y1), s.y0.max(s.y1));
    (dx * dx + dy * dy).sqrt()
}

pub(crate) fn dist_point_set<T: Real>(x: T, y: T, set: &[Seg<T>]) -> T {
    set.iter().map(|s| dist_point_seg(x, y, s)).fold(T::infinity(), T::min)
}

/// Squared distance to `b` from the point of `a` at parameter `lambda`, as a
/// quadratic `q2 l^2 + q1 l + q0` valid on a cell where the active clamp piece
/// of `b` does not change; `probe` selects the cell.
fn quad_for_cell<T: Real>(a: &Seg<T>, b: &Seg<T>, probe: T) -> (T, T, T) {
    let (px, py) = a.point(probe);
    let (m0, dm, fixed_off, blo, bhi, m_probe) = if a.is_horizontal() {
        let off = dist_point_interval(py, b.y0.min(b.y1), b.y0.max(b.y1));
        (a.x0, a.x1 - a.x0, off, b.x0.min(b.x1), b.x0.max(b.x1), px)
    } else {
        let off = dist_point_interval(px, b.x0.min(b.x1), b.x0.max(b.x1));
        (a.y0, a.y1 - a.y0, off, b.y0.min(b.y1), b.y0.max(b.y1), py)
    };
    let two = T::from_f64_lossy(2.0);
    // Moving coordinate m(l) = m0 + l*dm; on this cell the horizontal gap is
    // blo - m, zero, or m - bhi.
    let (c2, c1, c0) = if m_probe < blo {
        let e = blo - m0;
        (dm * dm, -two * e * dm, e * e)
    } else if m_probe > bhi {
        let e = m0 - bhi;
        (dm * dm, two * e * dm, e * e)
    } else {
        (T::zero(), T::zero(), T::zero())
    };
    (c2, c1, c0 + fixed_off * fixed_off)
}

fn eval_quad<T: Real>(q: (T, T, T), l: T) -> T {
    (q.0 * l + q.1) * l + q.2
}

/// Real roots of `q_a - q_b = 0` inside the open interval `(lo, hi)`.
fn crossing_roots<T: Real>(qa: (T, T, T), qb: (T, T, T), lo: T, hi: T, out: &mut Vec<T>) {
    let a = qa.0 - qb.0;
    let b = qa.1 - qb.1;
    let c = qa.2 - qb.2;
    let eps = T::from_f64_lossy(1e-300);
    if a.abs() < eps {
        if b.abs() >= eps {
            let r = -c / b;
            if r > lo && r < hi {
                out.push(r);
            }
        }
        return;
    }
    let four = T::from_f64_lossy(4.0);
    let disc = b * b - four * a * c;
    if disc < T::zero() {
        return;
    }
    let sq = disc.sqrt();
    let two = T::from_f64_lossy(2.0);
    for r in [(-b + sq) / (two * a), (-b - sq) / (two * a)] {
        if r > lo && r < hi {
            out.push(r);
        }
    }
}

/// sup over points of `a` of the distance to the set `bs`. On each cell of
/// the parameter grid every squared distance is a single quadratic, so the
/// lower envelope's maxima sit at cell ends or pairwise crossings.
fn directed_sup_on_segment<T: Real>(a: &Seg<T>, bs: &[Seg<T>]) -> T {
    let one = T::one();
    let mut grid = vec![T::zero(), one];
    let (m0, m1) = if a.is_horizontal() { (a.x0, a.x1) } else { (a.y0, a.y1) };
    let dm = m1 - m0;
    if dm != T::zero() {
        for b in bs {
            if b.is_horizontal() == a.is_horizontal() {
                let (blo, bhi) = if a.is_horizontal() {
                    (b.x0.min(b.x1), b.x0.max(b.x1))
                } else {
                    (b.y0.min(b.y1), b.y0.max(b.y1))
                };
                for bound in [blo, bhi] {
                    let l = (bound - m0) / dm;
                    if l > T::zero() && l < one {
                        grid.push(l);
                    }
                }
            }
        }
    }
    grid.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    grid.dedup();

    let half = T::from_f64_lossy(0.5);
    let mut sup = T::zero();
    let mut roots = Vec::new();
    for w in grid.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let probe = (lo + hi) * half;
        let quads: Vec<(T, T, T)> = bs.iter().map(|b| quad_for_cell(a, b, probe)).collect();
        roots.clear();
        roots.push(lo);
        roots.push(hi);
        for i in 0..quads.len() {
            for j in (i + 1)..quads.len() {
                crossing_roots(quads[i], quads[j], lo, hi, &mut roots);
            }
        }
        for &l in &roots {
            let d2 = quads.iter().map(|&q| eval_quad(q, l)).fold(T::infinity(), T::min);
            sup = sup.max(d2.max(T::zero()).sqrt());
        }
    }
    sup
}

fn directed_hausdorff<T: Real>(from: &[Seg<T>], to: &[Seg<T>]) -> T {
    from.iter().map(|a| directed_sup_on_segment(a, to)).fold(T::zero(), T::max)
}

/// Hausdorff distance between the completed graphs of the canonical
/// representatives (the graph projection of Skorohod's M2 metric).
pub fn d_t2<T: Real>(f: &StepFn<T>, g: &StepFn<T>) -> Result<T> {
    horizon_tolerance(f, g)?;
    let gf = completed_graph(f);
    let gg = completed_graph(g);
    Ok(directed_hausdorff(&gf, &gg).max(directed_hausdorff(&gg, &gf)))
}
