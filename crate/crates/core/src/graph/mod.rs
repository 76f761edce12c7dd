//! Finite simple undirected connected graphs: construction, breadth-first
//! queries (balls, exteriors, distances), and the plain-text edge-list format.

mod generate;
mod tree;

pub use generate::{erdos_renyi_giant, hypercube, random_regular, torus, ErGiant, DEFAULT_REGULAR_RETRIES};
pub use tree::{galton_watson, regular_tree, RootedTree};

use std::collections::VecDeque;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::{Result, VertexId};

/// Construction provenance tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Hypercube,
    Torus,
    Regular,
    ErGiant,
    Tree,
    Custom,
}

/// Immutable simple undirected connected graph held as sorted adjacency lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    kind: GraphKind,
    adj: Vec<Vec<VertexId>>,
}

impl Graph {
    /// Builds a graph from adjacency lists, verifying simplicity, symmetry and
    /// connectivity.
    pub fn from_adjacency(kind: GraphKind, mut adj: Vec<Vec<VertexId>>) -> Result<Self> {
        let n = adj.len();
        if n == 0 {
            return Err(Error::Validation("graph must have at least one vertex".into()));
        }
        for list in adj.iter_mut() {
            list.sort_unstable();
        }
        for (x, list) in adj.iter().enumerate() {
            if list.is_empty() {
                return Err(Error::Validation(format!("vertex {x} is isolated")));
            }
            for w in list.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::Validation(format!("duplicate edge at vertex {x}")));
                }
            }
            for &y in list {
                if y as usize >= n {
                    return Err(Error::Validation(format!("neighbor {y} out of range")));
                }
                if y as usize == x {
                    return Err(Error::Validation(format!("self-loop at vertex {x}")));
                }
                if adj[y as usize].binary_search(&(x as VertexId)).is_err() {
                    return Err(Error::Validation(format!("edge {x}-{y} is not symmetric")));
                }
            }
        }
        let g = Self { kind, adj };
        if !g.is_connected() {
            return Err(Error::Validation("graph is not connected".into()));
        }
        Ok(g)
    }

    /// Builds a graph from an edge list on vertices `0..n`.
    pub fn from_edges(kind: GraphKind, n: usize, edges: &[(VertexId, VertexId)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::Validation(format!("edge ({u},{v}) out of range")));
            }
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        Self::from_adjacency(kind, adj)
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn n_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn n_edges(&self) -> usize {
        self.adj.iter().map(|l| l.len()).sum::<usize>() / 2
    }

    pub fn degree(&self, x: VertexId) -> usize {
        self.adj[x as usize].len()
    }

    pub fn neighbors(&self, x: VertexId) -> &[VertexId] {
        &self.adj[x as usize]
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.n_vertices() as VertexId).into_iter()
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adj.iter().enumerate().flat_map(|(x, list)| {
            list.iter().filter_map(move |&y| {
                if (x as VertexId) < y {
                    Some((x as VertexId, y))
                } else {
                    None
                }
            })
        })
    }

    pub fn has_edge(&self, x: VertexId, y: VertexId) -> bool {
        self.adj[x as usize].binary_search(&y).is_ok()
    }

    fn is_connected(&self) -> bool {
        let n = self.n_vertices();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0 as VertexId]);
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for &y in self.neighbors(x) {
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        count == n
    }

    /// Graph distances from `x` to every vertex, by breadth-first search.
    pub fn distances_from(&self, x: VertexId) -> Vec<u32> {
        self.distances_from_set(std::slice::from_ref(&x))
    }

    /// Distances to the nearest element of `sources`.
    pub fn distances_from_set(&self, sources: &[VertexId]) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.n_vertices()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s as usize] == u32::MAX {
                dist[s as usize] = 0;
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            let d = dist[v as usize];
            for &w in self.neighbors(v) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = d + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn distance(&self, x: VertexId, y: VertexId) -> usize {
        // Early-exit BFS.
        if x == y {
            return 0;
        }
        let mut dist = vec![u32::MAX; self.n_vertices()];
        let mut queue = VecDeque::from([x]);
        dist[x as usize] = 0;
        while let Some(v) = queue.pop_front() {
            let d = dist[v as usize];
            for &w in self.neighbors(v) {
                if dist[w as usize] == u32::MAX {
                    if w == y {
                        return d as usize + 1;
                    }
                    dist[w as usize] = d + 1;
                    queue.push_back(w);
                }
            }
        }
        unreachable!("graph is connected")
    }

    /// Closed ball `B(x, ell)`: vertices at distance at most `ell`, sorted.
    pub fn ball(&self, x: VertexId, ell: usize) -> Vec<VertexId> {
        self.ball_of_set(std::slice::from_ref(&x), ell)
    }

    /// Closed ball around a set: vertices at distance at most `ell` from it.
    pub fn ball_of_set(&self, sources: &[VertexId], ell: usize) -> Vec<VertexId> {
        let dist = self.distances_from_set(sources);
        let mut ball: Vec<VertexId> = (0..self.n_vertices() as VertexId)
            .filter(|&v| dist[v as usize] as usize <= ell)
            .collect();
        ball.sort_unstable();
        ball
    }

    /// Exterior `R(x, ell)`: vertices at distance strictly greater than `ell`.
    pub fn exterior(&self, x: VertexId, ell: usize) -> Vec<VertexId> {
        let dist = self.distances_from(x);
        (0..self.n_vertices() as VertexId)
            .filter(|&v| dist[v as usize] as usize > ell)
            .collect()
    }

    /// Writes the edge-list text format: a `n m` header line, then one `u v`
    /// line per edge with `u < v`, 0-based.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.n_vertices(), self.n_edges())?;
        for (u, v) in self.edges() {
            writeln!(w, "{u} {v}")?;
        }
        Ok(())
    }

    /// Reads the edge-list text format written by [`Graph::write_edge_list`].
    pub fn read_edge_list<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Validation("empty edge-list file".into()))??;
        let mut parts = header.split_whitespace();
        let n: usize = parse_field(parts.next(), "vertex count")?;
        let m: usize = parse_field(parts.next(), "edge count")?;
        let mut edges = Vec::with_capacity(m);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let u: VertexId = parse_field(parts.next(), "edge endpoint")?;
            let v: VertexId = parse_field(parts.next(), "edge endpoint")?;
            if u >= v {
                return Err(Error::Validation(format!("edge ({u},{v}) not in u < v order")));
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(Error::Validation(format!(
                "edge count mismatch: header says {m}, file has {}",
                edges.len()
            )));
        }
        Self::from_edges(GraphKind::Custom, n, &edges)
    }
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, what: &str) -> Result<T> {
    field
        .ok_or_else(|| Error::Validation(format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::Validation(format!("malformed {what}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(GraphKind::Custom, 3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn rejects_disconnected() {
        let err = Graph::from_edges(GraphKind::Custom, 4, &[(0, 1), (2, 3)]);
        assert!(matches!(err, Err(Error::Validation(_))));
    }

    #[test]
    fn rejects_self_loop_and_duplicates() {
        assert!(Graph::from_edges(GraphKind::Custom, 2, &[(0, 0), (0, 1)]).is_err());
        assert!(Graph::from_edges(GraphKind::Custom, 2, &[(0, 1), (0, 1)]).is_err());
    }

    #[test]
    fn ball_radius_zero_is_the_center() {
        let g = path3();
        assert_eq!(g.ball(1, 0), vec![1]);
    }

    #[test]
    fn five_cycle_ball_two_covers_all() {
        let g = torus(5, 1).unwrap();
        assert_eq!(g.ball(0, 2), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn exterior_complements_ball() {
        let g = torus(7, 1).unwrap();
        let mut all = g.ball(3, 1);
        all.extend(g.exterior(3, 1));
        all.sort_unstable();
        assert_eq!(all, (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn distance_path() {
        let g = path3();
        assert_eq!(g.distance(0, 2), 2);
        assert_eq!(g.distance(2, 2), 0);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = hypercube(3).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let h = Graph::read_edge_list(buf.as_slice()).unwrap();
        assert_eq!(g.n_vertices(), h.n_vertices());
        assert_eq!(g.edges().collect::<Vec<_>>(), h.edges().collect::<Vec<_>>());
        let mut buf2 = Vec::new();
        h.write_edge_list(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }
}
