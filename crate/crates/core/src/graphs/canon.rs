//! Canonical labelling by individualisation-refinement.
//!
//! The initial partition puts the endpoints of `X` first and orders the other
//! nodes by (distance from `X`, degree), so every leaf labelling maps `X` to
//! `(0, 1)`. The canonical form is the lexicographically smallest sorted edge
//! list over all leaves. Leaves that reproduce the first or best edge list
//! yield automorphisms; these prune the search both by jumping back to the
//! divergence level and by skipping children in an already-explored orbit.

use sha2::{Digest, Sha256};

use super::ball::{multi_source_bfs, norm_edge, Edge, MarkedBall};
use super::refine::{individualize, initial_cells, is_discrete, refine, Cells};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    /// `labels[old] = new`
    pub labels: Vec<u32>,
    /// Sorted edge list under `labels`; the marked edge is always `(0, 1)`.
    pub edges: Vec<Edge>,
}

struct Leaf {
    edges: Vec<Edge>,
    labels: Vec<u32>,
    path: Vec<u32>,
}

struct Search<'a> {
    adj: &'a [Vec<u32>],
    edges: &'a [Edge],
    first: Option<Leaf>,
    best: Option<Leaf>,
    automorphisms: Vec<Vec<u32>>,
}

impl Search<'_> {
    fn leaf(&self, cells: &Cells) -> (Vec<Edge>, Vec<u32>) {
        let mut labels = vec![0u32; self.adj.len()];
        for (i, cell) in cells.iter().enumerate() {
            labels[cell[0] as usize] = i as u32;
        }
        let mut edges: Vec<Edge> =
            self.edges.iter().map(|&(u, v)| norm_edge(labels[u as usize], labels[v as usize])).collect();
        edges.sort_unstable();
        (edges, labels)
    }

    /// Automorphism mapping the node labelled `l` in `leaf` to the node
    /// labelled `l` in `reference`.
    fn automorphism(reference: &Leaf, labels: &[u32]) -> Vec<u32> {
        let mut inv = vec![0u32; labels.len()];
        for (v, &l) in reference.labels.iter().enumerate() {
            inv[l as usize] = v as u32;
        }
        labels.iter().map(|&l| inv[l as usize]).collect()
    }

    /// Returns `Some(level)` when the caller stack should unwind to `level`.
    fn visit(&mut self, cells: Cells, path: &mut Vec<u32>) -> Option<usize> {
        let cells = refine(self.adj, cells);
        if is_discrete(&cells) {
            return self.visit_leaf(&cells, path);
        }
        let depth = path.len();
        let target = cells.iter().position(|c| c.len() > 1).unwrap();
        let mut explored: Vec<u32> = Vec::new();
        for &v in &cells[target] {
            if !explored.is_empty() && self.same_orbit(path, &explored, v) {
                continue;
            }
            explored.push(v);
            path.push(v);
            let jump = self.visit(individualize(&cells, target, v), path);
            path.pop();
            if let Some(level) = jump {
                if level < depth {
                    return Some(level);
                }
            }
        }
        None
    }

    fn visit_leaf(&mut self, cells: &Cells, path: &[u32]) -> Option<usize> {
        let (edges, labels) = self.leaf(cells);
        let Some(first) = &self.first else {
            let leaf = Leaf { edges, labels, path: path.to_vec() };
            self.best = Some(Leaf { edges: leaf.edges.clone(), labels: leaf.labels.clone(), path: leaf.path.clone() });
            self.first = Some(leaf);
            return None;
        };
        if edges == first.edges {
            let aut = Self::automorphism(first, &labels);
            let level = common_prefix(&first.path, path);
            self.automorphisms.push(aut);
            return Some(level);
        }
        let best = self.best.as_ref().unwrap();
        match edges.cmp(&best.edges) {
            std::cmp::Ordering::Equal => {
                let aut = Self::automorphism(best, &labels);
                let level = common_prefix(&best.path, path);
                self.automorphisms.push(aut);
                Some(level)
            }
            std::cmp::Ordering::Less => {
                self.best = Some(Leaf { edges, labels, path: path.to_vec() });
                None
            }
            std::cmp::Ordering::Greater => None,
        }
    }

    /// Whether `v` shares an orbit with an explored sibling under the
    /// automorphisms found so far that fix `path` pointwise.
    fn same_orbit(&self, path: &[u32], explored: &[u32], v: u32) -> bool {
        let n = self.adj.len();
        let mut parent: Vec<u32> = (0..n as u32).collect();
        fn find(parent: &mut [u32], mut x: u32) -> u32 {
            while parent[x as usize] != x {
                parent[x as usize] = parent[parent[x as usize] as usize];
                x = parent[x as usize];
            }
            x
        }
        let mut any = false;
        for aut in &self.automorphisms {
            if path.iter().any(|&u| aut[u as usize] != u) {
                continue;
            }
            any = true;
            for (x, &y) in aut.iter().enumerate() {
                let (rx, ry) = (find(&mut parent, x as u32), find(&mut parent, y));
                if rx != ry {
                    parent[rx as usize] = ry;
                }
            }
        }
        if !any {
            return false;
        }
        let rv = find(&mut parent, v);
        explored.iter().any(|&w| find(&mut parent, w) == rv)
    }
}

fn common_prefix(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

pub fn canonical_form(ball: &MarkedBall) -> CanonicalForm {
    let adj = ball.adjacency();
    let (a, b) = ball.marked_edge();
    let dist = multi_source_bfs(&adj, &[a, b]);
    let deg: Vec<usize> = adj.iter().map(|l| l.len()).collect();
    let cells = initial_cells(adj.len(), |v| {
        let marked = v == a || v == b;
        (!marked, dist[v as usize], deg[v as usize])
    });
    let mut search = Search { adj: &adj, edges: ball.edges(), first: None, best: None, automorphisms: Vec::new() };
    search.visit(cells, &mut Vec::new());
    let best = search.best.expect("search visits at least one leaf");
    CanonicalForm { labels: best.labels, edges: best.edges }
}

/// Stable identifier derived from the canonical form, e.g. `d3n14-1a2b…`.
pub fn canonical_id(ball: &MarkedBall) -> String {
    let form = canonical_form(ball);
    id_from_form(ball.d(), ball.node_count(), &form)
}

pub(crate) fn id_from_form(d: usize, nodes: usize, form: &CanonicalForm) -> String {
    let mut hasher = Sha256::new();
    hasher.update(format!("d={d};n={nodes};").as_bytes());
    for &(u, v) in &form.edges {
        hasher.update(format!("{u}-{v},").as_bytes());
    }
    let digest = hasher.finalize();
    let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
    format!("d{d}n{nodes}-{hex}")
}

/// Relabels the ball into canonical order and fills in id and Ω class.
pub(crate) fn canonicalize(ball: &MarkedBall) -> MarkedBall {
    let form = canonical_form(ball);
    let id = id_from_form(ball.d(), ball.node_count(), &form);
    let mut out = MarkedBall::from_parts(ball.d(), ball.p(), ball.node_count(), form.edges, (0, 1));
    let omega = out.derive_omega();
    out.set_identity(id, omega);
    out
}
