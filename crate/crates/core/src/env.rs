//! Heavy-tailed trap environments: per-vertex depths with their decreasing
//! ranking, and the coupling between finite environments and the limiting
//! ranked weights.
//!
//! Depths are pure Pareto, `P[W > t] = t^(-alpha)` for `t >= 1` with
//! `0 < alpha < 1`. With `c_k = k^(-1/alpha)`, the rescaled ranked depths of a
//! coupled environment converge in l1 to the limit weights `w_j` produced
//! alongside it.

use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::graph::Graph;
use crate::rng::{sample_exp, uniform_open_closed};
use crate::scalar::Real;
use crate::{Result, VertexId};

/// A graph together with positive per-vertex trap depths, ranked decreasingly.
#[derive(Clone, Debug)]
pub struct Environment<T = f64> {
    graph: Graph,
    depth_of: Vec<T>,
    /// Vertices in decreasing depth order: `ranked[0]` is the deepest trap.
    ranked: Vec<VertexId>,
    /// Inverse of `ranked`: `rank_of[x]` is the 0-based rank of vertex `x`.
    rank_of: Vec<u32>,
}

impl<T: Real> Environment<T> {
    /// Assigns ranked weights to a fresh uniformly random vertex enumeration.
    fn from_ranked_depths<R: Rng + ?Sized>(
        graph: Graph,
        ranked_depths: Vec<T>,
        rng: &mut R,
    ) -> Self {
        let n = graph.n_vertices();
        debug_assert_eq!(ranked_depths.len(), n);
        let mut enumeration: Vec<VertexId> = (0..n as VertexId).collect();
        // Fisher-Yates
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            enumeration.swap(i, j);
        }
        let mut depth_of = vec![T::zero(); n];
        let mut rank_of = vec![0u32; n];
        for (rank, &x) in enumeration.iter().enumerate() {
            depth_of[x as usize] = ranked_depths[rank];
            rank_of[x as usize] = rank as u32;
        }
        Self { graph, depth_of, ranked: enumeration, rank_of }
    }

    /// Builds an environment from explicit per-vertex depths (no shuffling).
    pub fn from_depths(graph: Graph, depth_of: Vec<T>) -> Result<Self> {
        if depth_of.len() != graph.n_vertices() {
            return Err(Error::Validation(format!(
                "{} depths for {} vertices",
                depth_of.len(),
                graph.n_vertices()
            )));
        }
        if depth_of.iter().any(|w| !(*w > T::zero())) {
            return Err(Error::Validation("all trap depths must be positive".into()));
        }
        let mut ranked: Vec<VertexId> = (0..graph.n_vertices() as VertexId).collect();
        // Decreasing depth; ties broken by vertex id for determinism.
        ranked.sort_by(|&a, &b| {
            depth_of[b as usize]
                .partial_cmp(&depth_of[a as usize])
                .expect("depths are finite")
                .then(a.cmp(&b))
        });
        let mut rank_of = vec![0u32; graph.n_vertices()];
        for (rank, &x) in ranked.iter().enumerate() {
            rank_of[x as usize] = rank as u32;
        }
        Ok(Self { graph, depth_of, ranked, rank_of })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn n_vertices(&self) -> usize {
        self.graph.n_vertices()
    }

    pub fn depth(&self, x: VertexId) -> T {
        self.depth_of[x as usize]
    }

    pub fn depths(&self) -> &[T] {
        &self.depth_of
    }

    /// Vertices in decreasing depth order.
    pub fn ranked_vertices(&self) -> &[VertexId] {
        &self.ranked
    }

    /// 0-based rank of a vertex (0 = deepest trap).
    pub fn rank_of(&self, x: VertexId) -> u32 {
        self.rank_of[x as usize]
    }

    /// Depth of the rank-`j` trap (0-based), i.e. the `j+1`-st deepest value.
    pub fn ranked_depth(&self, j: usize) -> T {
        self.depth_of[self.ranked[j] as usize]
    }

    /// The `m` deepest traps.
    pub fn deep_traps(&self, m: usize) -> &[VertexId] {
        &self.ranked[..m.min(self.ranked.len())]
    }

    /// Re-validates the ranking invariants; used by the file loader.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_vertices();
        if self.ranked.len() != n || self.rank_of.len() != n || self.depth_of.len() != n {
            return Err(Error::Validation("inconsistent environment arrays".into()));
        }
        let mut seen = vec![false; n];
        for (rank, &x) in self.ranked.iter().enumerate() {
            if seen[x as usize] {
                return Err(Error::Validation("ranking is not a bijection".into()));
            }
            seen[x as usize] = true;
            if self.rank_of[x as usize] as usize != rank {
                return Err(Error::Validation("rank map disagrees with ranking".into()));
            }
            if rank > 0 && self.ranked_depth(rank) > self.ranked_depth(rank - 1) {
                return Err(Error::Validation("ranked depths are not decreasing".into()));
            }
        }
        if self.depth_of.iter().any(|w| !(*w > T::zero())) {
            return Err(Error::Validation("all trap depths must be positive".into()));
        }
        Ok(())
    }
}

/// Limiting ranked weights `w_1 > w_2 > ...`, truncated with a tail estimate.
#[derive(Clone, Debug)]
pub struct LimitWeights<T = f64> {
    pub weights: Vec<T>,
    pub alpha: T,
    /// Estimate of the truncated mass `sum_{j > len} w_j` (mean of the exact law).
    pub tail_bound: T,
}

/// Default truncation length for [`LimitWeights`].
pub const DEFAULT_LIMIT_WEIGHTS: usize = 64;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Validation(format!("alpha {alpha} must lie in (0,1)")));
    }
    Ok(())
}

/// I.i.d. Pareto(`alpha`) draws: `W = U^(-1/alpha)` with `U` uniform on (0,1].
pub fn sample_pareto_weights<T: Real, R: Rng + ?Sized>(
    n: usize,
    alpha: f64,
    rng: &mut R,
) -> Result<Vec<T>> {
    check_alpha(alpha)?;
    let inv = -1.0 / alpha;
    Ok((0..n).map(|_| T::from_f64_lossy(uniform_open_closed(rng).powf(inv))).collect())
}

/// The scale `c_k = k^(-1/alpha)` under which the largest of `k` i.i.d.
/// Pareto(`alpha`) depths is of order one.
pub fn normalizer_c<T: Real>(k: usize, alpha: f64) -> T {
    T::from_f64_lossy((k as f64).powf(-1.0 / alpha))
}

/// Ranked limit weights `w_j = G_j^(-1/alpha)` from standard-exponential
/// partial sums `G_j`, truncated at `count`.
pub fn sample_limit_weights<T: Real, R: Rng + ?Sized>(
    count: usize,
    alpha: f64,
    rng: &mut R,
) -> Result<LimitWeights<T>> {
    check_alpha(alpha)?;
    let mut gamma = 0.0f64;
    let mut weights = Vec::with_capacity(count);
    for _ in 0..count {
        gamma += sample_exp(1.0, rng);
        weights.push(T::from_f64_lossy(gamma.powf(-1.0 / alpha)));
    }
    Ok(LimitWeights {
        weights,
        alpha: T::from_f64_lossy(alpha),
        tail_bound: T::from_f64_lossy(limit_weight_tail(count, alpha)),
    })
}

/// Mean truncated mass `E[sum_{j > truncated} G_j^(-1/alpha)]`, summed from
/// the exact moments `E[G_j^(-s)] = Gamma(j - s) / Gamma(j)`.
pub fn limit_weight_tail(truncated: usize, alpha: f64) -> f64 {
    let s = 1.0 / alpha;
    let mut j = truncated + 1;
    while (j as f64) <= s {
        // E[G_j^(-s)] is infinite for j <= s; skip to the first finite term
        // (only reachable for tiny truncations).
        j += 1;
    }
    let ln_gamma = statrs::function::gamma::ln_gamma;
    let mut term = (ln_gamma(j as f64 - s) - ln_gamma(j as f64)).exp();
    let mut sum = 0.0;
    loop {
        sum += term;
        if term < sum * 1e-14 + 1e-300 {
            break;
        }
        term *= (j as f64 - s) / j as f64;
        j += 1;
    }
    sum
}

/// Draws a finite environment and its limit weights from one exponential
/// stream.
///
/// With `G_j` the partial sums of i.i.d. standard exponentials, the ranked
/// depths are `(G_j / G_{n+1})^(-1/alpha)` -- uniform order statistics, so
/// the environment marginal is exactly ranked i.i.d. Pareto -- while the limit
/// weights are `w_j = G_j^(-1/alpha)`. Under this coupling
/// `sum_j |c_n W_(j) - w_j|` vanishes almost surely as the graph grows.
pub fn coupled_environment<T: Real, R: Rng + ?Sized>(
    graph: Graph,
    alpha: f64,
    rng: &mut R,
) -> Result<(Environment<T>, LimitWeights<T>)> {
    check_alpha(alpha)?;
    let n = graph.n_vertices();
    if n < 2 {
        return Err(Error::Size("coupled environment needs at least 2 vertices".into()));
    }
    let inv = -1.0 / alpha;
    let mut gammas = Vec::with_capacity(n + 1);
    let mut acc = 0.0f64;
    for _ in 0..=n {
        acc += sample_exp(1.0, rng);
        gammas.push(acc);
    }
    let total = gammas[n];
    let ranked_depths: Vec<T> =
        gammas[..n].iter().map(|&g| T::from_f64_lossy((g / total).powf(inv))).collect();
    let truncate = DEFAULT_LIMIT_WEIGHTS.min(n);
    let weights: Vec<T> = gammas[..truncate].iter().map(|&g| T::from_f64_lossy(g.powf(inv))).collect();
    let limit = LimitWeights {
        weights,
        alpha: T::from_f64_lossy(alpha),
        tail_bound: T::from_f64_lossy(limit_weight_tail(truncate, alpha)),
    };
    Ok((Environment::from_ranked_depths(graph, ranked_depths, rng), limit))
}

/// Ranks the given weights decreasingly (stable in the original index) and
/// assigns them to a uniformly random vertex enumeration.
pub fn assign_weights<T: Real, R: Rng + ?Sized>(
    graph: Graph,
    weights: &[T],
    rng: &mut R,
) -> Result<Environment<T>> {
    if weights.len() != graph.n_vertices() {
        return Err(Error::Validation(format!(
            "{} weights for {} vertices",
            weights.len(),
            graph.n_vertices()
        )));
    }
    if weights.iter().any(|w| !(*w > T::zero())) {
        return Err(Error::Validation("all weights must be positive".into()));
    }
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[b].partial_cmp(&weights[a]).expect("finite").then(a.cmp(&b)));
    let ranked_depths: Vec<T> = order.into_iter().map(|i| weights[i]).collect();
    Ok(Environment::from_ranked_depths(graph, ranked_depths, rng))
}

/// On-disk form of an environment; the graph is stored separately.
#[derive(Serialize, Deserialize)]
pub struct EnvFile {
    pub alpha: f64,
    pub seed: u64,
    pub depths: Vec<f64>,
    pub ranked: Vec<VertexId>,
}

impl Environment<f64> {
    pub fn write_json<W: Write>(&self, alpha: f64, seed: u64, mut w: W) -> Result<()> {
        let file = EnvFile {
            alpha,
            seed,
            depths: self.depth_of.clone(),
            ranked: self.ranked.clone(),
        };
        serde_json::to_writer_pretty(&mut w, &file)?;
        writeln!(w)?;
        Ok(())
    }

    /// Loads an environment and re-validates every invariant against `graph`.
    pub fn read_json<R: BufRead>(graph: Graph, r: R) -> Result<(Self, EnvFile)> {
        let file: EnvFile = serde_json::from_reader(r)?;
        if file.ranked.len() != file.depths.len() {
            return Err(Error::Validation("ranked/depths length mismatch".into()));
        }
        let mut rank_of = vec![u32::MAX; file.depths.len()];
        for (rank, &x) in file.ranked.iter().enumerate() {
            if x as usize >= file.depths.len() || rank_of[x as usize] != u32::MAX {
                return Err(Error::Validation("ranking is not a bijection".into()));
            }
            rank_of[x as usize] = rank as u32;
        }
        if file.depths.len() != graph.n_vertices() {
            return Err(Error::Validation("environment does not match the graph".into()));
        }
        let env = Environment {
            graph,
            depth_of: file.depths.clone(),
            ranked: file.ranked.clone(),
            rank_of,
        };
        env.validate()?;
        Ok((env, file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::torus;
    use crate::RandomSource;

    #[test]
    fn pareto_lower_endpoint_is_one() {
        // U = 1 maps to W = 1; every draw is at least 1.
        let mut rng = RandomSource::new(1).rng();
        let w: Vec<f64> = sample_pareto_weights(10_000, 0.5, &mut rng).unwrap();
        assert!(w.iter().all(|&x| x >= 1.0));
    }

    #[test]
    fn normalizer_values() {
        assert_eq!(normalizer_c::<f64>(1, 0.7), 1.0);
        assert!((normalizer_c::<f64>(100, 0.5) - 1e-4).abs() < 1e-18);
        assert!((normalizer_c::<f64>(16, 0.25) - 1.0 / 65536.0).abs() < 1e-20);
    }

    #[test]
    fn assign_weights_ranks_and_maps() {
        let g = torus(3, 1).unwrap();
        let mut rng = RandomSource::new(2).rng();
        let env = assign_weights(g, &[3.0, 1.0, 2.0], &mut rng).unwrap();
        let ranked: Vec<f64> = (0..3).map(|j| env.ranked_depth(j)).collect();
        assert_eq!(ranked, vec![3.0, 2.0, 1.0]);
        let deepest = env.ranked_vertices()[0];
        assert_eq!(env.rank_of(deepest), 0);
        assert_eq!(env.depth(deepest), 3.0);
        env.validate().unwrap();
    }

    #[test]
    fn assign_rejects_nonpositive() {
        let g = torus(3, 1).unwrap();
        let mut rng = RandomSource::new(3).rng();
        assert!(assign_weights(g, &[1.0, 0.0, 2.0], &mut rng).is_err());
    }

    #[test]
    fn enumeration_is_uniform() {
        // Each vertex of a 4-cycle receives rank 0 with frequency ~ 1/4.
        let g = torus(4, 1).unwrap();
        let mut rng = RandomSource::new(4).rng();
        let mut counts = [0u32; 4];
        let reps = 10_000;
        for _ in 0..reps {
            let env = assign_weights(g.clone(), &[4.0, 3.0, 2.0, 1.0], &mut rng).unwrap();
            counts[env.ranked_vertices()[0] as usize] += 1;
        }
        for &c in &counts {
            let freq = f64::from(c) / f64::from(reps as u32);
            assert!((freq - 0.25).abs() < 0.02, "freq {freq}");
        }
    }

    #[test]
    fn coupled_environment_invariants() {
        let g = torus(100, 1).unwrap();
        let mut rng = RandomSource::new(5).rng();
        let (env, limit) = coupled_environment::<f64, _>(g, 0.5, &mut rng).unwrap();
        env.validate().unwrap();
        assert!(limit.weights.windows(2).all(|w| w[0] > w[1]));
        assert!(limit.tail_bound > 0.0);
        // ranked depths decrease
        for j in 1..env.n_vertices() {
            assert!(env.ranked_depth(j) <= env.ranked_depth(j - 1));
        }
    }

    #[test]
    fn tail_estimate_decreases_with_truncation() {
        let t8 = limit_weight_tail(8, 0.5);
        let t64 = limit_weight_tail(64, 0.5);
        assert!(t8 > t64);
        assert!(t64 > 0.0);
        // For alpha = 0.5 the tail behaves like sum j^(-2) ~ 1/J.
        assert!((limit_weight_tail(1000, 0.5) * 1000.0 - 1.0).abs() < 0.01);
    }

    #[test]
    fn env_json_round_trip() {
        let g = torus(5, 1).unwrap();
        let mut rng = RandomSource::new(6).rng();
        let (env, _) = coupled_environment::<f64, _>(g.clone(), 0.4, &mut rng).unwrap();
        let mut buf = Vec::new();
        env.write_json(0.4, 6, &mut buf).unwrap();
        let (env2, file) = Environment::read_json(g, buf.as_slice()).unwrap();
        assert_eq!(file.alpha, 0.4);
        assert_eq!(env.depths(), env2.depths());
        assert_eq!(env.ranked_vertices(), env2.ranked_vertices());
    }
}
