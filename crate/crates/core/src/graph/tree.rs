//! Rooted trees: Galton-Watson sampling and the finite regular tree.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::{Graph, GraphKind};
use crate::error::Error;
use crate::{Result, VertexId};

/// Hard cap on generated tree sizes.
const TREE_SIZE_CAP: usize = 20_000_000;

/// Rooted tree with parent links, children lists and per-vertex generation.
#[derive(Clone, Debug)]
pub struct RootedTree {
    parent: Vec<Option<VertexId>>,
    children: Vec<Vec<VertexId>>,
    depth: Vec<u32>,
}

impl RootedTree {
    pub fn root(&self) -> VertexId {
        0
    }

    pub fn n_vertices(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v as usize]
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.children[v as usize]
    }

    pub fn depth_of(&self, v: VertexId) -> u32 {
        self.depth[v as usize]
    }

    pub fn max_depth(&self) -> u32 {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Vertices of generation `l` (distance `l` from the root).
    pub fn generation(&self, l: u32) -> Vec<VertexId> {
        (0..self.n_vertices() as VertexId).filter(|&v| self.depth[v as usize] == l).collect()
    }

    pub fn root_degree(&self) -> usize {
        self.children[0].len()
    }

    /// The same tree as an undirected [`Graph`]; fails for a single vertex,
    /// which cannot satisfy the minimum-degree invariant.
    pub fn to_graph(&self) -> Result<Graph> {
        let edges: Vec<(VertexId, VertexId)> = (1..self.n_vertices() as VertexId)
            .map(|v| {
                let p = self.parent[v as usize].expect("non-root has a parent");
                (p.min(v), p.max(v))
            })
            .collect();
        Graph::from_edges(GraphKind::Tree, self.n_vertices(), &edges)
    }
}

/// Samples a Galton-Watson tree with Poisson(`lambda`) offspring, truncated at
/// generation `max_depth`. Vertices are numbered in breadth-first order.
pub fn galton_watson<R: Rng + ?Sized>(lambda: f64, max_depth: u32, rng: &mut R) -> Result<RootedTree> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Validation(format!("offspring mean {lambda} must be positive")));
    }
    // Expected size grows like lambda^max_depth; refuse plainly oversized requests.
    if lambda > 1.0 && f64::from(max_depth) * lambda.ln() > (1e7f64).ln() {
        return Err(Error::Size(format!(
            "expected size lambda^depth = {lambda}^{max_depth} exceeds 1e7"
        )));
    }
    let poisson = Poisson::new(lambda).expect("positive finite lambda");
    let mut parent: Vec<Option<VertexId>> = vec![None];
    let mut children: Vec<Vec<VertexId>> = vec![Vec::new()];
    let mut depth: Vec<u32> = vec![0];
    let mut frontier: Vec<VertexId> = vec![0];
    for gen in 0..max_depth {
        let mut next = Vec::new();
        for &v in &frontier {
            let offspring = poisson.sample(rng) as usize;
            for _ in 0..offspring {
                let id = parent.len() as VertexId;
                if parent.len() >= TREE_SIZE_CAP {
                    return Err(Error::Size(format!(
                        "tree exceeded the {TREE_SIZE_CAP}-vertex cap at generation {gen}"
                    )));
                }
                parent.push(Some(v));
                children.push(Vec::new());
                children[v as usize].push(id);
                depth.push(gen + 1);
                next.push(id);
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    Ok(RootedTree { parent, children, depth })
}

/// The finite `d`-regular tree of the given depth: the root has `d` children,
/// every other internal vertex has `d - 1`, so all non-leaf degrees equal `d`.
pub fn regular_tree(d: usize, depth: u32) -> Result<Graph> {
    if d < 3 {
        return Err(Error::Size(format!("degree {d} must be at least 3")));
    }
    if depth == 0 {
        return Err(Error::Size("depth must be positive".into()));
    }
    let mut size = 1usize;
    let mut gen_size = d;
    for _ in 0..depth {
        size = size
            .checked_add(gen_size)
            .filter(|&s| s <= TREE_SIZE_CAP)
            .ok_or_else(|| Error::Size("regular tree exceeds the size cap".into()))?;
        gen_size *= d - 1;
    }
    let mut edges = Vec::with_capacity(size - 1);
    let mut next_id: VertexId = 1;
    let mut frontier = vec![0 as VertexId];
    for gen in 0..depth {
        let mut next = Vec::new();
        for &v in &frontier {
            let n_children = if gen == 0 { d } else { d - 1 };
            for _ in 0..n_children {
                edges.push((v, next_id));
                next.push(next_id);
                next_id += 1;
            }
        }
        frontier = next;
    }
    Graph::from_edges(GraphKind::Tree, next_id as usize, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RandomSource;

    #[test]
    fn depth_zero_is_a_single_root() {
        let mut rng = RandomSource::new(5).rng();
        let t = galton_watson(2.0, 0, &mut rng).unwrap();
        assert_eq!(t.n_vertices(), 1);
        assert_eq!(t.max_depth(), 0);
    }

    #[test]
    fn generations_are_consistent_with_parents() {
        let mut rng = RandomSource::new(6).rng();
        let t = galton_watson(2.0, 6, &mut rng).unwrap();
        for v in 1..t.n_vertices() as VertexId {
            let p = t.parent(v).unwrap();
            assert_eq!(t.depth_of(v), t.depth_of(p) + 1);
        }
        let sizes: usize = (0..=t.max_depth()).map(|l| t.generation(l).len()).sum();
        assert_eq!(sizes, t.n_vertices());
    }

    #[test]
    fn size_budget_rejected_up_front() {
        let mut rng = RandomSource::new(7).rng();
        assert!(galton_watson(2.0, 60, &mut rng).is_err());
    }

    #[test]
    fn regular_tree_degrees() {
        let g = regular_tree(3, 4).unwrap();
        // 1 + 3 + 6 + 12 + 24
        assert_eq!(g.n_vertices(), 46);
        let dist = g.distances_from(0);
        for v in g.vertices() {
            let leaf = dist[v as usize] == 4;
            assert_eq!(g.degree(v), if leaf { 1 } else { 3 });
        }
    }
}
