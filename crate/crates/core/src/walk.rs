//! The continuous-time trap walk and its derived observables: the embedded
//! lazy chain, escape-probability estimates, hitting samples, the
//! last-visited-trap trace, and the excursion decomposition of the path into
//! returns to the deep-trap set.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::Environment;
use crate::error::Error;
use crate::exact::check_separation;
use crate::graph::Graph;
use crate::metric::StepFn;
use crate::rng::sample_exp;
use crate::scalar::{KahanSum, Real};
use crate::{Result, VertexId};

/// Right-continuous piecewise-constant path on `[0, horizon]`: state
/// `states[i]` on `[t_i, t_{i+1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T = f64> {
    horizon: T,
    jump_times: Vec<T>,
    states: Vec<VertexId>,
}

impl<T: Real> Trajectory<T> {
    pub fn new(horizon: T, jump_times: Vec<T>, states: Vec<VertexId>) -> Result<Self> {
        if !(horizon > T::zero()) {
            return Err(Error::Validation("horizon must be positive".into()));
        }
        if states.len() != jump_times.len() + 1 {
            return Err(Error::Validation(format!(
                "{} states for {} jump times",
                states.len(),
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
        Ok(Self { horizon, jump_times, states })
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn jump_times(&self) -> &[T] {
        &self.jump_times
    }

    pub fn states(&self) -> &[VertexId] {
        &self.states
    }

    pub fn n_jumps(&self) -> usize {
        self.jump_times.len()
    }

    /// Segment triples `(start, end, state)`.
    pub fn segments(&self) -> impl Iterator<Item = (T, T, VertexId)> + '_ {
        (0..self.states.len()).map(move |i| {
            let start = if i == 0 { T::zero() } else { self.jump_times[i - 1] };
            let end = if i == self.states.len() - 1 { self.horizon } else { self.jump_times[i] };
            (start, end, self.states[i])
        })
    }

    pub fn state_at(&self, t: T) -> VertexId {
        let idx = self.jump_times.partition_point(|&s| s <= t);
        self.states[idx]
    }

    /// Total time spent in each state.
    pub fn occupation(&self) -> BTreeMap<VertexId, T> {
        let mut acc: BTreeMap<VertexId, KahanSum<T>> = BTreeMap::new();
        for (start, end, state) in self.segments() {
            acc.entry(state).or_insert_with(KahanSum::new).add(end - start);
        }
        acc.into_iter().map(|(k, v)| (k, v.value())).collect()
    }

    /// Real-valued view of the path under a state embedding.
    pub fn to_step_fn<F: Fn(VertexId) -> T>(&self, embed: F) -> StepFn<T> {
        let values: Vec<T> = self.states.iter().map(|&s| embed(s)).collect();
        StepFn::new(self.horizon, self.jump_times.clone(), values)
            .expect("trajectory invariants imply step-function invariants")
    }

    /// Merges adjacent segments with the same state.
    pub fn merge_equal(&self) -> Trajectory<T> {
        let mut jump_times = Vec::new();
        let mut states = vec![self.states[0]];
        for (i, &t) in self.jump_times.iter().enumerate() {
            if self.states[i + 1] != *states.last().unwrap() {
                jump_times.push(t);
                states.push(self.states[i + 1]);
            }
        }
        Trajectory { horizon: self.horizon, jump_times, states }
    }
}

#[derive(Serialize, Deserialize)]
struct SegmentRecord {
    t_start: f64,
    t_end: f64,
    state: VertexId,
}

impl Trajectory<f64> {
    /// One JSON record per segment: `{"t_start", "t_end", "state"}`.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for (start, end, state) in self.segments() {
            let rec = SegmentRecord { t_start: start, t_end: end, state };
            serde_json::to_writer(&mut w, &rec)?;
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut jump_times = Vec::new();
        let mut states = Vec::new();
        let mut cursor = 0.0f64;
        let mut horizon = 0.0f64;
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: SegmentRecord = serde_json::from_str(&line)?;
            if states.is_empty() {
                if rec.t_start != 0.0 {
                    return Err(Error::Validation("first segment must start at 0".into()));
                }
            } else {
                if rec.t_start != cursor {
                    return Err(Error::Validation(format!(
                        "segment starts at {} but previous ended at {cursor}",
                        rec.t_start
                    )));
                }
                jump_times.push(rec.t_start);
            }
            states.push(rec.state);
            cursor = rec.t_end;
            horizon = rec.t_end;
        }
        Trajectory::new(horizon, jump_times, states)
    }
}

/// One holding-time/jump pair of the walk at `x`: exponential holding with
/// mean `W_x`, then a uniform neighbor.
pub fn step<T: Real, R: Rng + ?Sized>(
    env: &Environment<T>,
    x: VertexId,
    rng: &mut R,
) -> (T, VertexId) {
    let hold = sample_exp(env.depth(x), rng);
    (hold, jump_step(env.graph(), x, rng))
}

/// One step of the embedded (non-lazy) jump chain: a uniform neighbor.
pub fn jump_step<R: Rng + ?Sized>(g: &Graph, x: VertexId, rng: &mut R) -> VertexId {
    let nbrs = g.neighbors(x);
    nbrs[rng.random_range(0..nbrs.len())]
}

/// One step of the lazy embedded chain: stay with probability 1/2, otherwise
/// a uniform neighbor.
pub fn lazy_step<R: Rng + ?Sized>(g: &Graph, x: VertexId, rng: &mut R) -> VertexId {
    let nbrs = g.neighbors(x);
    let k = rng.random_range(0..2 * nbrs.len());
    if k < nbrs.len() {
        nbrs[k]
    } else {
        x
    }
}

/// Runs the lazy chain for `n_steps` steps; returns the visited sequence
/// including the start.
pub fn simulate_lazy<R: Rng + ?Sized>(
    g: &Graph,
    x0: VertexId,
    n_steps: usize,
    rng: &mut R,
) -> Vec<VertexId> {
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(x0);
    let mut x = x0;
    for _ in 0..n_steps {
        x = lazy_step(g, x, rng);
        out.push(x);
    }
    out
}

/// Simulates the trap walk from `x0` up to `horizon`.
pub fn simulate<T: Real, R: Rng + ?Sized>(
    env: &Environment<T>,
    x0: VertexId,
    horizon: T,
    rng: &mut R,
) -> Result<Trajectory<T>> {
    if !(horizon > T::zero()) {
        return Err(Error::Validation("horizon must be positive".into()));
    }
    let mut clock = KahanSum::<T>::new();
    let mut jump_times = Vec::new();
    let mut states = vec![x0];
    let mut x = x0;
    loop {
        let (hold, next) = step(env, x, rng);
        clock.add(hold);
        if clock.value() >= horizon {
            break;
        }
        jump_times.push(clock.value());
        states.push(next);
        x = next;
    }
    Trajectory::new(horizon, jump_times, states)
}

/// Monte Carlo escape-probability estimate with its binomial standard error.
#[derive(Clone, Copy, Debug)]
pub struct EscapeEstimate<T> {
    pub estimate: T,
    pub std_error: T,
    pub successes: u64,
    pub samples: u64,
}

/// Estimates the probability that the jump chain from `x` reaches distance
/// greater than `ell` before returning to `x`.
pub fn escape_probability_mc<T: Real, R: Rng + ?Sized>(
    g: &Graph,
    x: VertexId,
    ell: usize,
    n_samples: u64,
    rng: &mut R,
) -> Result<EscapeEstimate<T>> {
    if n_samples == 0 {
        return Err(Error::Validation("need at least one sample".into()));
    }
    let dist = g.distances_from(x);
    if dist.iter().all(|&d| (d as usize) <= ell) {
        return Err(Error::Domain(format!(
            "ball of radius {ell} around {x} covers the whole graph"
        )));
    }
    let mut successes = 0u64;
    for _ in 0..n_samples {
        let mut pos = jump_step(g, x, rng);
        loop {
            if (dist[pos as usize] as usize) > ell {
                successes += 1;
                break;
            }
            if pos == x {
                break;
            }
            pos = jump_step(g, pos, rng);
        }
    }
    let p = successes as f64 / n_samples as f64;
    let se = (p * (1.0 - p) / n_samples as f64).sqrt();
    Ok(EscapeEstimate {
        estimate: T::from_f64_lossy(p),
        std_error: T::from_f64_lossy(se),
        successes,
        samples: n_samples,
    })
}

/// Result of projecting a trajectory onto the last visited vertex of a set.
#[derive(Clone, Debug)]
pub struct TraceExtract<T> {
    /// The trace path, started at the first visit to the set.
    pub trace: Trajectory<T>,
    /// Time dropped before the first visit.
    pub offset: T,
}

/// Projects a trajectory to the last vertex of `a` visited so far. Time
/// before the first visit to `a` is dropped and reported as `offset`;
/// re-entries to the same trap are invisible at the value level.
pub fn trace_extract<T: Real>(traj: &Trajectory<T>, a: &[VertexId]) -> Result<TraceExtract<T>> {
    let max_state = traj.states().iter().copied().max().unwrap_or(0);
    let mut in_a = vec![false; max_state as usize + 1];
    for &x in a {
        if (x as usize) < in_a.len() {
            in_a[x as usize] = true;
        }
    }
    let first = traj
        .states()
        .iter()
        .position(|&s| in_a[s as usize])
        .ok_or_else(|| Error::EmptyTrace("trajectory never visits the set".into()))?;
    let offset = if first == 0 { T::zero() } else { traj.jump_times()[first - 1] };
    let mut jump_times = Vec::new();
    let mut states = vec![traj.states()[first]];
    let mut current = traj.states()[first];
    for i in (first + 1)..traj.states().len() {
        let s = traj.states()[i];
        if in_a[s as usize] && s != current {
            current = s;
            jump_times.push(traj.jump_times()[i - 1] - offset);
            states.push(s);
        }
    }
    let trace = Trajectory::new(traj.horizon() - offset, jump_times, states)?;
    Ok(TraceExtract { trace, offset })
}

/// One return cycle of the walk through the deep-trap set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleRecord<T> {
    /// The trap occupied during this cycle.
    pub trap: VertexId,
    /// Total time at the trap before the escape.
    pub time_at_trap: T,
    /// Full cycle duration, from arrival to the next arrival in the set.
    pub cycle_length: T,
    /// Time spent outside the trap set during the cycle.
    pub excursion_time: T,
}

/// Per-cycle records of the excursion decomposition.
#[derive(Clone, Debug, Default)]
pub struct TraceStats<T = f64> {
    pub cycles: Vec<CycleRecord<T>>,
}

impl<T: Real> TraceStats<T> {
    /// Number of cycles spent at each trap.
    pub fn visit_counts(&self) -> BTreeMap<VertexId, u64> {
        let mut counts = BTreeMap::new();
        for c in &self.cycles {
            *counts.entry(c.trap).or_insert(0) += 1;
        }
        counts
    }

    /// Times at a given trap, one per cycle occupying it.
    pub fn times_at_trap(&self, trap: VertexId) -> Vec<T> {
        self.cycles.iter().filter(|c| c.trap == trap).map(|c| c.time_at_trap).collect()
    }

    pub fn mean_cycle_length(&self) -> T {
        let total: KahanSum<T> = self.cycles.iter().map(|c| c.cycle_length).collect();
        total.value() / T::from_f64_lossy(self.cycles.len() as f64)
    }

    /// The sequence of traps visited, with consecutive repeats collapsed
    /// (re-entries to the same trap are value-level invisible).
    pub fn collapsed_trap_sequence(&self) -> Vec<VertexId> {
        let mut out: Vec<VertexId> = Vec::new();
        for c in &self.cycles {
            if out.last() != Some(&c.trap) {
                out.push(c.trap);
            }
        }
        out
    }
}

impl TraceStats<f64> {
    /// CSV with header `cycle,trap,time_at_trap,cycle_length,excursion_time`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "cycle,trap,time_at_trap,cycle_length,excursion_time")?;
        for (i, c) in self.cycles.iter().enumerate() {
            writeln!(
                w,
                "{i},{},{},{},{}",
                c.trap, c.time_at_trap, c.cycle_length, c.excursion_time
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Validation("empty csv".into()))??;
        if header.trim() != "cycle,trap,time_at_trap,cycle_length,excursion_time" {
            return Err(Error::Validation(format!("unexpected header: {header}")));
        }
        let mut cycles = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(Error::Validation(format!("malformed row: {line}")));
            }
            cycles.push(CycleRecord {
                trap: fields[1].parse().map_err(|_| Error::Validation("bad trap id".into()))?,
                time_at_trap: fields[2]
                    .parse()
                    .map_err(|_| Error::Validation("bad time".into()))?,
                cycle_length: fields[3]
                    .parse()
                    .map_err(|_| Error::Validation("bad time".into()))?,
                excursion_time: fields[4]
                    .parse()
                    .map_err(|_| Error::Validation("bad time".into()))?,
            });
        }
        Ok(TraceStats { cycles })
    }
}

/// Simulates `n_cycles` returns to the trap set `a` from `x0`, recording the
/// time at the trap before each escape to distance `ell` and the full cycle
/// length. Requires the traps to be pairwise separated by more than
/// `2*ell + 1`, which confines each pre-escape phase to one trap's ball.
pub fn excursion_decomposition<T: Real, R: Rng + ?Sized>(
    env: &Environment<T>,
    a: &[VertexId],
    ell: usize,
    n_cycles: usize,
    x0: VertexId,
    rng: &mut R,
) -> Result<TraceStats<T>> {
    let g = env.graph();
    check_separation(g, a, ell)?;
    if !a.contains(&x0) {
        return Err(Error::Validation(format!("start {x0} is not in the trap set")));
    }
    let dist_a = g.distances_from_set(a);
    if dist_a.iter().all(|&d| (d as usize) <= ell) {
        return Err(Error::Domain("trap balls cover the whole graph".into()));
    }
    let mut in_a = vec![false; g.n_vertices()];
    for &x in a {
        in_a[x as usize] = true;
    }
    let mut cycles = Vec::with_capacity(n_cycles);
    let mut x = x0;
    for _ in 0..n_cycles {
        let trap = x;
        let mut time_at_trap = KahanSum::<T>::new();
        let mut cycle_time = KahanSum::<T>::new();
        // until the walk leaves the ball around the trap set
        loop {
            let (hold, next) = step(env, x, rng);
            cycle_time.add(hold);
            if x == trap {
                time_at_trap.add(hold);
            }
            debug_assert!(!in_a[x as usize] || x == trap);
            x = next;
            if (dist_a[x as usize] as usize) > ell {
                break;
            }
        }
        // excursion: until the next arrival in the trap set
        while !in_a[x as usize] {
            let (hold, next) = step(env, x, rng);
            cycle_time.add(hold);
            x = next;
        }
        cycles.push(CycleRecord {
            trap,
            time_at_trap: time_at_trap.value(),
            cycle_length: cycle_time.value(),
            excursion_time: cycle_time.value() - time_at_trap.value(),
        });
    }
    Ok(TraceStats { cycles })
}

/// Default jump budget for [`hitting_sample`].
pub const DEFAULT_HITTING_BUDGET: u64 = 1_000_000_000;

/// Simulates the walk from `x0` until it enters `b`; returns the entry vertex
/// and the elapsed continuous time.
pub fn hitting_sample<T: Real, R: Rng + ?Sized>(
    env: &Environment<T>,
    x0: VertexId,
    b: &[VertexId],
    rng: &mut R,
) -> Result<(VertexId, T)> {
    hitting_sample_with_budget(env, x0, b, DEFAULT_HITTING_BUDGET, rng)
}

pub fn hitting_sample_with_budget<T: Real, R: Rng + ?Sized>(
    env: &Environment<T>,
    x0: VertexId,
    b: &[VertexId],
    max_jumps: u64,
    rng: &mut R,
) -> Result<(VertexId, T)> {
    if b.is_empty() {
        return Err(Error::Validation("target set is empty".into()));
    }
    let mut in_b = vec![false; env.n_vertices()];
    for &x in b {
        in_b[x as usize] = true;
    }
    if in_b[x0 as usize] {
        return Ok((x0, T::zero()));
    }
    let mut clock = KahanSum::<T>::new();
    let mut x = x0;
    for _ in 0..max_jumps {
        let (hold, next) = step(env, x, rng);
        clock.add(hold);
        x = next;
        if in_b[x as usize] {
            return Ok((x, clock.value()));
        }
    }
    Err(Error::Budget(format!("no hit within {max_jumps} jumps")))
}
