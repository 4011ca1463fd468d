use std::collections::HashSet;

use rayon::prelude::*;

use super::ball::{multi_source_bfs, norm_edge, Edge, MarkedBall};
use super::canon::canonicalize;
use super::database::BallDatabase;
use crate::error::{Error, Result};

/// Every non-isomorphic `B_1(X)` completable inside a d-regular graph.
pub fn enumerate_b1(d: usize) -> Result<BallDatabase> {
    enumerate_radius(d, 1)
}

/// Grows the database from the bare edge up to radius `p`.
pub fn enumerate_radius(d: usize, p: usize) -> Result<BallDatabase> {
    let mut db = BallDatabase::new(d, 0)?;
    db.insert(MarkedBall::single_edge(d)?)?;
    for _ in 0..p {
        db = extend_balls(&db);
    }
    Ok(db)
}

/// All one-layer completions of every ball in `db`, deduplicated.
///
/// Balls without deficient boundary nodes are already whole d-regular graphs
/// and are carried into the new database unchanged.
pub fn extend_balls(db: &BallDatabase) -> BallDatabase {
    let mut out = BallDatabase::new(db.d(), db.p() + 1).expect("degree bound already validated");
    let parents: Vec<&MarkedBall> = db.balls().collect();
    let batches: Vec<Vec<MarkedBall>> = parents.par_iter().map(|b| completions(b)).collect();
    for batch in batches {
        for ball in batch {
            out.insert_canonical(ball);
        }
    }
    out
}

struct Grow {
    d: usize,
    n: usize,
    deg: Vec<usize>,
    adj: HashSet<Edge>,
    added: Vec<Edge>,
    boundary: Vec<u32>,
    /// boundary position of each stub, ascending
    stubs: Vec<usize>,
    new_nodes: Vec<u32>,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Choice {
    Boundary(usize),
    Fresh(usize),
    Create,
}

impl Grow {
    fn recurse(&mut self, i: usize, floor: Option<Choice>, base: &MarkedBall, seen: &mut HashSet<Vec<Edge>>, out: &mut Vec<MarkedBall>) {
        if i == self.stubs.len() {
            let mut edges = base.edges().to_vec();
            edges.extend_from_slice(&self.added);
            let raw = MarkedBall::from_parts(self.d, base.p() + 1, self.n, edges, base.marked_edge());
            debug_assert!(raw.validate().is_ok(), "{:?}", raw.validate());
            let ball = canonicalize(&raw);
            if seen.insert(ball.edges().to_vec()) {
                out.push(ball);
            }
            return;
        }
        let pos = self.stubs[i];
        let v = self.boundary[pos];
        // stubs of the same node take non-decreasing choices
        let floor = if i > 0 && self.stubs[i - 1] == pos { floor } else { None };
        if self.deg[v as usize] >= self.d {
            return self.recurse(i + 1, floor, base, seen, out);
        }
        let allowed = |c: Choice| floor.is_none_or(|f| c >= f);

        for j in pos + 1..self.boundary.len() {
            let w = self.boundary[j];
            if allowed(Choice::Boundary(j)) && self.deg[w as usize] < self.d && !self.adj.contains(&norm_edge(v, w)) {
                self.link(v, w);
                self.recurse(i + 1, Some(Choice::Boundary(j)), base, seen, out);
                self.unlink(v, w);
            }
        }
        for j in 0..self.new_nodes.len() {
            let w = self.new_nodes[j];
            if allowed(Choice::Fresh(j)) && self.deg[w as usize] < self.d && !self.adj.contains(&norm_edge(v, w)) {
                self.link(v, w);
                self.recurse(i + 1, Some(Choice::Fresh(j)), base, seen, out);
                self.unlink(v, w);
            }
        }
        let w = self.n as u32;
        self.n += 1;
        self.deg.push(0);
        self.new_nodes.push(w);
        self.link(v, w);
        self.recurse(i + 1, Some(Choice::Create), base, seen, out);
        self.unlink(v, w);
        self.new_nodes.pop();
        self.deg.pop();
        self.n -= 1;
    }

    fn link(&mut self, v: u32, w: u32) {
        self.deg[v as usize] += 1;
        self.deg[w as usize] += 1;
        self.adj.insert(norm_edge(v, w));
        self.added.push(norm_edge(v, w));
    }

    fn unlink(&mut self, v: u32, w: u32) {
        self.deg[v as usize] -= 1;
        self.deg[w as usize] -= 1;
        self.adj.remove(&norm_edge(v, w));
        self.added.pop();
    }
}

/// Canonical one-layer completions of a single ball, locally deduplicated.
fn completions(ball: &MarkedBall) -> Vec<MarkedBall> {
    let d = ball.d();
    let deg = ball.degrees();
    let dist = ball.distances();
    let boundary: Vec<u32> =
        (0..ball.node_count() as u32).filter(|&v| dist[v as usize] == ball.p() && deg[v as usize] < d).collect();
    if boundary.is_empty() {
        let mut carried = ball.clone();
        carried.set_radius(ball.p() + 1);
        return vec![carried];
    }
    let stubs: Vec<usize> =
        boundary.iter().enumerate().flat_map(|(i, &v)| std::iter::repeat_n(i, d - deg[v as usize])).collect();
    let mut grow = Grow {
        d,
        n: ball.node_count(),
        deg,
        adj: ball.edges().iter().copied().collect(),
        added: Vec::new(),
        boundary,
        stubs,
        new_nodes: Vec::new(),
    };
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    grow.recurse(0, None, ball, &mut seen, &mut out);
    out
}

/// Attaches fresh tree children to every node of degree `< d` at distance
/// `< p + extra` from `X`, giving a radius `p + extra` ball with the most
/// walks consistent with `b`. Only used for walk counting.
pub fn tree_completion(b: &MarkedBall, extra: usize) -> MarkedBall {
    let d = b.d();
    let radius = b.p() + extra;
    let mut deg = b.degrees();
    let mut dist = b.distances();
    let mut edges = b.edges().to_vec();
    let mut frontier: Vec<u32> = (0..b.node_count() as u32).collect();
    frontier.sort_by_key(|&v| (dist[v as usize], v));
    let mut i = 0;
    while i < frontier.len() {
        let v = frontier[i];
        i += 1;
        let r = dist[v as usize];
        if r >= radius {
            continue;
        }
        while deg[v as usize] < d {
            let w = deg.len() as u32;
            deg.push(1);
            dist.push(r + 1);
            deg[v as usize] += 1;
            edges.push((v, w));
            frontier.push(w);
        }
    }
    let mut out = MarkedBall::from_parts(d, radius, deg.len(), edges, b.marked_edge());
    let omega = out.derive_omega();
    out.set_identity(format!("{}+t{extra}", b.id()), omega);
    out
}

/// Extracts `B_p(X)` for `X = (u, v)` from a host graph, nodes numbered in
/// BFS order from `X`.
pub fn ball_from_graph(adj: &[Vec<u32>], marked: Edge, d: usize, p: usize) -> Result<MarkedBall> {
    let (u, v) = marked;
    if u as usize >= adj.len() || v as usize >= adj.len() || !adj[u as usize].contains(&v) {
        return Err(Error::InvalidParameter(format!("({u}, {v}) is not an edge of the host graph")));
    }
    let dist = multi_source_bfs(adj, &[u, v]);
    let mut order: Vec<u32> = (0..adj.len() as u32).filter(|&w| dist[w as usize] <= p).collect();
    order.sort_by_key(|&w| (dist[w as usize], w != u, w != v, w));
    let mut map = vec![u32::MAX; adj.len()];
    for (i, &w) in order.iter().enumerate() {
        map[w as usize] = i as u32;
    }
    let mut edges = Vec::new();
    for &a in &order {
        for &b in &adj[a as usize] {
            if a < b && dist[b as usize] <= p {
                let near = dist[a as usize].min(dist[b as usize]);
                if near < p || norm_edge(a, b) == norm_edge(u, v) {
                    edges.push((map[a as usize], map[b as usize]));
                }
            }
        }
    }
    MarkedBall::new(d, p, order.len(), &edges, (0, 1))
}
