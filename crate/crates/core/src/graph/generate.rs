//! Graph generators: hypercube, discrete torus, random regular graphs via the
//! configuration model, and the giant component of sparse Bernoulli graphs.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::{Graph, GraphKind};
use crate::error::Error;
use crate::{Result, VertexId};

/// The `n`-dimensional hypercube on `{0,1}^n`; vertex ids are the bit patterns
/// and edges connect words at Hamming distance one.
pub fn hypercube(n: u32) -> Result<Graph> {
    if !(1..=30).contains(&n) {
        return Err(Error::Size(format!("hypercube dimension {n} not in 1..=30")));
    }
    let size = 1usize << n;
    let mut adj = Vec::with_capacity(size);
    for x in 0..size as VertexId {
        let mut list = Vec::with_capacity(n as usize);
        for bit in 0..n {
            list.push(x ^ (1 << bit));
        }
        adj.push(list);
    }
    Graph::from_adjacency(GraphKind::Hypercube, adj)
}

/// The `d`-dimensional discrete torus with side `N`: nearest-neighbor edges
/// with wraparound, `N^d` vertices of degree `2d` (degree 2 when `d = 1`).
pub fn torus(side: usize, dim: u32) -> Result<Graph> {
    if side < 3 {
        return Err(Error::Size(format!("torus side {side} must be at least 3")));
    }
    if !(1..=4).contains(&dim) {
        return Err(Error::Size(format!("torus dimension {dim} not in 1..=4")));
    }
    let size = side
        .checked_pow(dim)
        .filter(|&s| s <= 10_000_000)
        .ok_or_else(|| Error::Size(format!("torus {side}^{dim} exceeds the size budget")))?;
    let mut adj = Vec::with_capacity(size);
    for v in 0..size {
        let mut list = Vec::with_capacity(2 * dim as usize);
        let mut stride = 1usize;
        for _ in 0..dim {
            let coord = (v / stride) % side;
            let up = v - coord * stride + ((coord + 1) % side) * stride;
            let down = v - coord * stride + ((coord + side - 1) % side) * stride;
            list.push(up as VertexId);
            list.push(down as VertexId);
            stride *= side;
        }
        adj.push(list);
    }
    Graph::from_adjacency(GraphKind::Torus, adj)
}

/// Retry budget for the configuration model.
pub const DEFAULT_REGULAR_RETRIES: usize = 1000;

/// Samples a simple connected `d`-regular graph on `n` vertices by the
/// configuration model, rejecting any pairing with self-loops, multi-edges or
/// a disconnected outcome. Unbiased over simple `d`-regular graphs.
pub fn random_regular<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<Graph> {
    random_regular_with_retries(n, d, DEFAULT_REGULAR_RETRIES, rng)
}

pub fn random_regular_with_retries<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    retries: usize,
    rng: &mut R,
) -> Result<Graph> {
    if d < 3 {
        return Err(Error::Size(format!("degree {d} must be at least 3")));
    }
    if n <= d {
        return Err(Error::Size(format!("need more than {d} vertices, got {n}")));
    }
    if (n * d) % 2 != 0 {
        return Err(Error::Size(format!("n*d = {} must be even", n * d)));
    }
    let mut stubs: Vec<VertexId> = (0..n as VertexId).flat_map(|v| std::iter::repeat(v).take(d)).collect();
    for _ in 0..retries {
        stubs.shuffle(rng);
        if let Some(adj) = pair_stubs(n, d, &stubs) {
            if let Ok(g) = Graph::from_adjacency(GraphKind::Regular, adj) {
                return Ok(g);
            }
        }
    }
    Err(Error::Sampling(format!(
        "no simple connected {d}-regular graph on {n} vertices in {retries} pairings"
    )))
}

/// Pairs consecutive stubs; `None` if the pairing has a self-loop or multi-edge.
fn pair_stubs(n: usize, d: usize, stubs: &[VertexId]) -> Option<Vec<Vec<VertexId>>> {
    let mut adj: Vec<Vec<VertexId>> = vec![Vec::with_capacity(d); n];
    for pair in stubs.chunks_exact(2) {
        let (u, v) = (pair[0], pair[1]);
        if u == v || adj[u as usize].contains(&v) {
            return None;
        }
        adj[u as usize].push(v);
        adj[v as usize].push(u);
    }
    Some(adj)
}

/// Giant component of a sparse Bernoulli random graph, re-indexed to dense ids.
#[derive(Clone, Debug)]
pub struct ErGiant {
    pub graph: Graph,
    /// Maps each dense vertex id back to its original label in `0..n`.
    pub original_ids: Vec<VertexId>,
    /// All component sizes, sorted in decreasing order.
    pub component_sizes: Vec<usize>,
}

/// Samples `G(n, lambda/n)` with independent Bernoulli edges and returns its
/// largest connected component.
///
/// The Bernoulli field is never materialized: components are discovered by a
/// susceptible/infected/removed frontier process that draws, for each frontier
/// vertex, a `Binomial(|S|, lambda/n)` number of susceptible neighbors; edges
/// between vertices infected in the same round are the only pairs that
/// exploration leaves untested, and those are filled in afterwards by
/// geometric skip-sampling. This is equivalent in law to sampling every pair.
pub fn erdos_renyi_giant<R: Rng + ?Sized>(n: usize, lambda: f64, rng: &mut R) -> Result<ErGiant> {
    if n < 10 {
        return Err(Error::Size(format!("need at least 10 vertices, got {n}")));
    }
    if !(lambda > 1.0) || !lambda.is_finite() {
        return Err(Error::Validation(format!("lambda {lambda} must exceed 1")));
    }
    let p = lambda / n as f64;

    // Exploration state: susceptible vertices in a pool supporting O(1)
    // uniform removal.
    let mut pool: Vec<VertexId> = (0..n as VertexId).collect();
    let mut pool_pos: Vec<usize> = (0..n).collect();
    let mut removed = vec![false; n];
    let mut component_of = vec![u32::MAX; n];
    let mut generation = vec![u32::MAX; n];
    let mut edges: Vec<(VertexId, VertexId)> = Vec::new();
    let mut components: Vec<Vec<VertexId>> = Vec::new();
    // Per-component vertices grouped by exploration round.
    let mut rounds_per_component: Vec<Vec<Vec<VertexId>>> = Vec::new();

    let remove_from_pool = |pool: &mut Vec<VertexId>, pool_pos: &mut Vec<usize>, v: VertexId| {
        let pos = pool_pos[v as usize];
        let last = *pool.last().unwrap();
        pool.swap_remove(pos);
        if (last as usize) != v as usize {
            pool_pos[last as usize] = pos;
        }
    };

    for start in 0..n as VertexId {
        if removed[start as usize] {
            continue;
        }
        let cid = components.len() as u32;
        removed[start as usize] = true;
        component_of[start as usize] = cid;
        generation[start as usize] = 0;
        remove_from_pool(&mut pool, &mut pool_pos, start);

        let mut members = vec![start];
        let mut rounds = vec![vec![start]];
        let mut frontier = vec![start];
        let mut round = 0;
        while !frontier.is_empty() {
            round += 1;
            let mut next = Vec::new();
            for &x in &frontier {
                let s = pool.len();
                if s == 0 {
                    break;
                }
                let hits = Binomial::new(s as u64, p)
                    .expect("valid binomial parameters")
                    .sample(rng) as usize;
                for _ in 0..hits.min(pool.len()) {
                    let idx = rng.random_range(0..pool.len());
                    let y = pool[idx];
                    remove_from_pool(&mut pool, &mut pool_pos, y);
                    removed[y as usize] = true;
                    component_of[y as usize] = cid;
                    generation[y as usize] = round;
                    edges.push((x.min(y), x.max(y)));
                    members.push(y);
                    next.push(y);
                }
            }
            if !next.is_empty() {
                rounds.push(next.clone());
            }
            frontier = next;
        }
        components.push(members);
        rounds_per_component.push(rounds);
    }

    let giant_id = components
        .iter()
        .enumerate()
        .max_by_key(|(i, c)| (c.len(), std::cmp::Reverse(*i)))
        .map(|(i, _)| i)
        .unwrap();
    let giant = &components[giant_id];
    if giant.len() < 3 {
        return Err(Error::Degenerate(format!(
            "largest component has {} vertices; resample",
            giant.len()
        )));
    }

    // Pairs within the same exploration round were never examined; sample them
    // now with the same Bernoulli(p) law, skip-counting over the pair list.
    for round in &rounds_per_component[giant_id] {
        let m = round.len();
        if m < 2 {
            continue;
        }
        let total_pairs = m * (m - 1) / 2;
        let mut cursor = 0usize;
        loop {
            let skip = sample_geometric(p, rng);
            cursor = match cursor.checked_add(skip).and_then(|c| c.checked_add(1)) {
                Some(c) => c,
                None => break,
            };
            if cursor > total_pairs {
                break;
            }
            let (i, j) = pair_from_index(cursor - 1, m);
            let (u, v) = (round[i], round[j]);
            edges.push((u.min(v), u.max(v)));
        }
    }

    let mut original_ids: Vec<VertexId> = giant.clone();
    original_ids.sort_unstable();
    let mut dense = vec![u32::MAX; n];
    for (new_id, &orig) in original_ids.iter().enumerate() {
        dense[orig as usize] = new_id as u32;
    }
    let giant_edges: Vec<(VertexId, VertexId)> = edges
        .iter()
        .filter(|&&(u, _)| component_of[u as usize] == giant_id as u32)
        .map(|&(u, v)| (dense[u as usize], dense[v as usize]))
        .collect();
    let graph = Graph::from_edges(GraphKind::ErGiant, original_ids.len(), &giant_edges)?;

    let mut component_sizes: Vec<usize> = components.iter().map(|c| c.len()).collect();
    component_sizes.sort_unstable_by(|a, b| b.cmp(a));

    Ok(ErGiant { graph, original_ids, component_sizes })
}

/// Number of failures before the first success of a Bernoulli(p) sequence.
fn sample_geometric<R: Rng + ?Sized>(p: f64, rng: &mut R) -> usize {
    let u = crate::rng::uniform_open_closed(rng);
    let skip = (u.ln() / (1.0 - p).ln()).floor();
    if skip >= usize::MAX as f64 {
        usize::MAX
    } else {
        skip as usize
    }
}

/// Maps a linear index in `0..m(m-1)/2` to the pair `(i, j)`, `i < j < m`,
/// enumerated as (0,1), (0,2), ..., (0,m-1), (1,2), ...
fn pair_from_index(index: usize, m: usize) -> (usize, usize) {
    let mut i = 0;
    let mut remaining = index;
    loop {
        let row = m - 1 - i;
        if remaining < row {
            return (i, i + 1 + remaining);
        }
        remaining -= row;
        i += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RandomSource;

    #[test]
    fn smallest_hypercube_is_an_edge() {
        let g = hypercube(1).unwrap();
        assert_eq!(g.n_vertices(), 2);
        assert_eq!(g.n_edges(), 1);
    }

    #[test]
    fn hypercube_counts() {
        // |V| = 2^n and |E| = n * 2^(n-1).
        let g = hypercube(3).unwrap();
        assert_eq!(g.n_vertices(), 8);
        assert_eq!(g.n_edges(), 12);
        assert!(g.vertices().all(|v| g.degree(v) == 3));
    }

    #[test]
    fn hypercube_neighbors_differ_in_one_bit() {
        let g = hypercube(10).unwrap();
        for v in g.vertices() {
            assert_eq!(g.degree(v), 10);
            for &w in g.neighbors(v) {
                assert_eq!((v ^ w).count_ones(), 1);
            }
        }
    }

    #[test]
    fn hypercube_ball_one() {
        let g = hypercube(4).unwrap();
        assert_eq!(g.ball(5, 1).len(), 5);
    }

    #[test]
    fn torus_is_cycle_in_dim_one() {
        let g = torus(3, 1).unwrap();
        assert_eq!(g.n_vertices(), 3);
        assert_eq!(g.n_edges(), 3);
    }

    #[test]
    fn torus_counts() {
        // |E| = d * N^d.
        let g = torus(4, 2).unwrap();
        assert_eq!(g.n_vertices(), 16);
        assert_eq!(g.n_edges(), 32);
        assert!(g.vertices().all(|v| g.degree(v) == 4));
    }

    #[test]
    fn torus_distance_is_sum_of_circular_distances() {
        let g = torus(5, 3).unwrap();
        // (0,0,0) to (2,2,2): circular distance 2 per coordinate.
        let target = 2 + 2 * 5 + 2 * 25;
        assert_eq!(g.distance(0, target), 6);
    }

    #[test]
    fn torus_size_budget() {
        assert!(torus(400, 3).is_err());
    }

    #[test]
    fn four_vertices_force_complete_graph() {
        let mut rng = RandomSource::new(1).rng();
        let g = random_regular(4, 3, &mut rng).unwrap();
        assert_eq!(g.n_edges(), 6);
        for v in g.vertices() {
            assert_eq!(g.degree(v), 3);
        }
    }

    #[test]
    fn regular_degrees_and_connectivity() {
        let mut rng = RandomSource::new(2).rng();
        for seed in 0..5 {
            let _ = seed;
            let g = random_regular(10, 3, &mut rng).unwrap();
            assert!(g.vertices().all(|v| g.degree(v) == 3));
        }
    }

    #[test]
    fn regular_rejects_bad_parameters() {
        let mut rng = RandomSource::new(3).rng();
        assert!(random_regular(5, 3, &mut rng).is_err()); // odd n*d
        assert!(random_regular(3, 3, &mut rng).is_err()); // n <= d
    }

    #[test]
    fn er_giant_is_connected_and_maps_back() {
        let mut rng = RandomSource::new(4).rng();
        let er = erdos_renyi_giant(200, 2.0, &mut rng).unwrap();
        assert_eq!(er.graph.n_vertices(), er.original_ids.len());
        assert_eq!(er.component_sizes[0], er.graph.n_vertices());
        // original ids are distinct and in range
        let mut ids = er.original_ids.clone();
        ids.dedup();
        assert_eq!(ids.len(), er.graph.n_vertices());
        assert!(ids.iter().all(|&v| (v as usize) < 200));
    }

    #[test]
    fn pair_index_enumeration() {
        let m = 5;
        let mut seen = Vec::new();
        for idx in 0..m * (m - 1) / 2 {
            seen.push(pair_from_index(idx, m));
        }
        let expect: Vec<(usize, usize)> =
            (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
        assert_eq!(seen, expect);
    }
}
