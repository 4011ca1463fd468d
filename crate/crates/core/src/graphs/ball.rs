use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{canon, Omega};
use crate::error::{Error, Result};

/// Unordered node pair stored as `(min, max)`.
pub type Edge = (u32, u32);

/// Sentinel for nodes not reachable from the marked edge.
pub const UNREACHABLE: usize = usize::MAX;

/// A ball `B_p(X)`: every node within distance `p` of an endpoint of the
/// marked edge `X`, and every edge with at least one endpoint within distance
/// `p - 1` (plus `X` itself). Nodes at distance exactly `p` are the boundary;
/// edges between two boundary nodes are not part of the ball.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkedBall {
    id: String,
    d: usize,
    p: usize,
    nodes: usize,
    edges: Vec<Edge>,
    marked_edge: Edge,
    omega_class: Option<Omega>,
}

pub(crate) fn norm_edge(u: u32, v: u32) -> Edge {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl MarkedBall {
    /// Validates the structure and derives the canonical id (and the Ω class
    /// for cubic balls). Node labels are kept as given.
    pub fn new(d: usize, p: usize, nodes: usize, edges: &[Edge], marked_edge: Edge) -> Result<Self> {
        let mut ball = Self::from_parts(d, p, nodes, edges.to_vec(), marked_edge);
        ball.validate()?;
        ball.id = canon::canonical_id(&ball);
        ball.omega_class = ball.derive_omega();
        Ok(ball)
    }

    /// The radius-0 ball: the marked edge alone.
    pub fn single_edge(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(format!("degree bound d={d} must be >= 2")));
        }
        Self::new(d, 0, 2, &[(0, 1)], (0, 1))
    }

    /// Builds a ball without validation or id; edges are normalised and sorted.
    pub(crate) fn from_parts(d: usize, p: usize, nodes: usize, mut edges: Vec<Edge>, marked: Edge) -> Self {
        for e in edges.iter_mut() {
            *e = norm_edge(e.0, e.1);
        }
        edges.sort_unstable();
        Self {
            id: String::new(),
            d,
            p,
            nodes,
            edges,
            marked_edge: norm_edge(marked.0, marked.1),
            omega_class: None,
        }
    }

    pub(crate) fn set_identity(&mut self, id: String, omega: Option<Omega>) {
        self.id = id;
        self.omega_class = omega;
    }

    pub(crate) fn set_radius(&mut self, p: usize) {
        self.p = p;
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn marked_edge(&self) -> Edge {
        self.marked_edge
    }

    pub fn omega_class(&self) -> Option<Omega> {
        self.omega_class
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes];
        for &(u, v) in &self.edges {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        deg
    }

    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.nodes];
        for &(u, v) in &self.edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for list in adj.iter_mut() {
            list.sort_unstable();
        }
        adj
    }

    /// BFS distance of every node from the nearer endpoint of the marked edge.
    pub fn distances(&self) -> Vec<usize> {
        let (a, b) = self.marked_edge;
        multi_source_bfs(&self.adjacency(), &[a, b])
    }

    /// True when every node already has degree `d`: the ball is a whole
    /// d-regular graph and no completion can change it.
    pub fn is_closed(&self) -> bool {
        self.degrees().iter().all(|&k| k == self.d)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidBall(msg));
        if self.d < 2 {
            return bad(format!("degree bound d={} must be >= 2", self.d));
        }
        if self.nodes < 2 {
            return bad(format!("a ball needs at least 2 nodes, got {}", self.nodes));
        }
        let (a, b) = self.marked_edge;
        if a == b {
            return bad("marked edge is a self-loop".into());
        }
        for w in self.edges.windows(2) {
            if w[0] == w[1] {
                return bad(format!("duplicate edge {:?}", w[0]));
            }
        }
        for &(u, v) in &self.edges {
            if u == v {
                return bad(format!("self-loop at node {u}"));
            }
            if v as usize >= self.nodes {
                return bad(format!("edge ({u}, {v}) references a node >= {}", self.nodes));
            }
        }
        if self.edges.binary_search(&self.marked_edge).is_err() {
            return bad(format!("marked edge {:?} is not an edge of the ball", self.marked_edge));
        }
        if let Some((v, k)) = self.degrees().into_iter().enumerate().find(|&(_, k)| k > self.d) {
            return bad(format!("node {v} has degree {k} > d={}", self.d));
        }
        let dist = self.distances();
        if let Some((v, _)) = dist.iter().enumerate().find(|&(_, &r)| r > self.p) {
            let r = dist[v];
            return if r == UNREACHABLE {
                bad(format!("node {v} is not connected to the marked edge"))
            } else {
                bad(format!("node {v} lies at distance {r} > p={}", self.p))
            };
        }
        for &(u, v) in &self.edges {
            if (u, v) == self.marked_edge {
                continue;
            }
            let near = dist[u as usize].min(dist[v as usize]);
            if near + 1 > self.p {
                return bad(format!(
                    "edge ({u}, {v}) joins two nodes at distance {} and is outside B_{}",
                    near, self.p
                ));
            }
        }
        Ok(())
    }

    pub(crate) fn derive_omega(&self) -> Option<Omega> {
        if self.d == 3 && self.p >= 1 {
            Some(classify_common_neighbours(self))
        } else {
            None
        }
    }

    /// Applies `perm[old] = new` to every node label.
    pub fn relabel(&self, perm: &[u32]) -> MarkedBall {
        let edges = self.edges.iter().map(|&(u, v)| (perm[u as usize], perm[v as usize])).collect();
        let (a, b) = self.marked_edge;
        let mut out = Self::from_parts(self.d, self.p, self.nodes, edges, (perm[a as usize], perm[b as usize]));
        out.id = self.id.clone();
        out.omega_class = self.omega_class;
        out
    }

    /// The sub-ball `B_q(X)` with nodes renumbered in their original order.
    pub fn truncate(&self, q: usize) -> Result<MarkedBall> {
        if q > self.p {
            return Err(Error::InvalidParameter(format!(
                "cannot truncate a radius-{} ball to radius {q}",
                self.p
            )));
        }
        if q == self.p {
            return Ok(self.clone());
        }
        let dist = self.distances();
        let mut map = vec![u32::MAX; self.nodes];
        let mut next = 0u32;
        for (v, &r) in dist.iter().enumerate() {
            if r <= q {
                map[v] = next;
                next += 1;
            }
        }
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .filter(|&&e| e == self.marked_edge || dist[e.0 as usize].min(dist[e.1 as usize]) < q)
            .map(|&(u, v)| (map[u as usize], map[v as usize]))
            .collect();
        let (a, b) = self.marked_edge;
        MarkedBall::new(self.d, q, next as usize, &edges, (map[a as usize], map[b as usize]))
    }

    /// Number of common neighbours of the two endpoints of `X`.
    pub fn marked_common_neighbours(&self) -> usize {
        let adj = self.adjacency();
        let (a, b) = self.marked_edge;
        adj[a as usize].iter().filter(|w| adj[b as usize].binary_search(w).is_ok()).count()
    }
}

fn classify_common_neighbours(ball: &MarkedBall) -> Omega {
    match ball.marked_common_neighbours() {
        0 => Omega::Three,
        1 => Omega::Two,
        _ => Omega::One,
    }
}

pub(crate) fn multi_source_bfs(adj: &[Vec<u32>], sources: &[u32]) -> Vec<usize> {
    let mut dist = vec![UNREACHABLE; adj.len()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist[s as usize] != 0 {
            dist[s as usize] = 0;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let du = dist[u as usize];
        for &w in &adj[u as usize] {
            if dist[w as usize] == UNREACHABLE {
                dist[w as usize] = du + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}
