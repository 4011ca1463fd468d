//! Commutativity graph of the transverse-field MaxCut Hamiltonian on a ball,
//! and exact counts of walks from the marked edge operator that end outside
//! `B_q(X)`.
//!
//! Blue nodes are the single-site `σ_x` terms, red nodes the edge terms. A
//! blue and a red node are adjacent when the site is an endpoint of the edge;
//! no other pair of terms fails to commute.

use std::collections::HashMap;
use std::io::Write;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graphs::{tree_completion, Edge, MarkedBall};

/// Layers beyond `q` the underlying ball must reach before walks of length
/// up to `2k + 5` are fully represented.
pub const EXTENSION_DEPTH: usize = 3;

/// Number of explicit terms in the bound (lengths `2k .. 2k + 5`).
pub const TERMS: usize = 6;

#[derive(Clone, Debug)]
pub struct CommGraph {
    ball_id: String,
    d: usize,
    q: usize,
    radius: usize,
    blue: usize,
    red: Vec<Edge>,
    /// blue nodes `0..blue`, red node `i` at `blue + i`
    adj: Vec<Vec<u32>>,
    root: u32,
    inside: Vec<bool>,
}

impl CommGraph {
    pub fn ball_id(&self) -> &str {
        &self.ball_id
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn blue_count(&self) -> usize {
        self.blue
    }

    pub fn red_count(&self) -> usize {
        self.red.len()
    }

    pub fn red_edge(&self, i: usize) -> Edge {
        self.red[i]
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn is_blue(&self, v: u32) -> bool {
        (v as usize) < self.blue
    }

    pub fn neighbours(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn inside(&self, v: u32) -> bool {
        self.inside[v as usize]
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    /// Every edge joins a blue and a red node, and every red node has degree 2.
    pub fn is_bipartite(&self) -> bool {
        self.adj.iter().enumerate().all(|(v, list)| {
            let blue = self.is_blue(v as u32);
            (blue || list.len() == 2) && list.iter().all(|&w| self.is_blue(w) != blue)
        })
    }
}

pub fn build_commutativity_graph(b: &MarkedBall, q: usize) -> CommGraph {
    let blue = b.node_count();
    let red: Vec<Edge> = b.edges().to_vec();
    let mut adj = vec![Vec::new(); blue + red.len()];
    for (i, &(u, v)) in red.iter().enumerate() {
        let r = (blue + i) as u32;
        adj[r as usize] = vec![u, v];
        adj[u as usize].push(r);
        adj[v as usize].push(r);
    }
    let dist = b.distances();
    let marked = b.marked_edge();
    let mut inside: Vec<bool> = dist.iter().map(|&r| r <= q).collect();
    inside.extend(red.iter().map(|&(u, v)| (u, v) == marked || dist[u as usize].min(dist[v as usize]) < q));
    let root = (blue + red.binary_search(&marked).expect("marked edge is an edge")) as u32;
    CommGraph { ball_id: b.id().to_string(), d: b.d(), q, radius: b.p(), blue, red, adj, root, inside }
}

/// `counts[m]` is the number of walks of length `2k + m` from the root that
/// end on an operator outside `B_q(X)`, `q = k - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkCountVector {
    pub k: usize,
    pub counts: Vec<BigUint>,
}

impl WalkCountVector {
    pub fn as_f64(&self) -> Vec<f64> {
        self.counts.iter().map(big_to_f64).collect()
    }

    /// Elementwise maximum; both vectors must share `k`.
    pub fn max(&self, other: &WalkCountVector) -> WalkCountVector {
        assert_eq!(self.k, other.k);
        let counts = self.counts.iter().zip(&other.counts).map(|(a, b)| a.max(b).clone()).collect();
        WalkCountVector { k: self.k, counts }
    }
}

pub(crate) fn big_to_f64(x: &BigUint) -> f64 {
    num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::INFINITY)
}

pub fn count_exit_walks(cg: &CommGraph, k: usize) -> Result<WalkCountVector> {
    if k == 0 {
        return Err(Error::InvalidParameter("walk depth k must be >= 1".into()));
    }
    if cg.q + 1 != k {
        return Err(Error::InvalidParameter(format!("graph built for q={} but k={k} needs q={}", cg.q, k - 1)));
    }
    let needed = cg.q + EXTENSION_DEPTH;
    if cg.radius < needed {
        return Err(Error::InsufficientExtension { radius: cg.radius, k, needed });
    }
    let n = cg.node_count();
    let mut cur = vec![BigUint::zero(); n];
    cur[cg.root as usize] = BigUint::one();
    let mut counts = Vec::with_capacity(TERMS);
    for len in 1..=2 * k + TERMS - 1 {
        let mut next = vec![BigUint::zero(); n];
        for (v, w) in cur.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for &u in &cg.adj[v] {
                next[u as usize] += w;
            }
        }
        cur = next;
        if len >= 2 * k {
            let outside: BigUint = cur.iter().enumerate().filter(|(v, _)| !cg.inside[*v]).map(|(_, w)| w).sum();
            counts.push(outside);
        }
    }
    Ok(WalkCountVector { k, counts })
}

/// Exit-walk counts of `b` at depth `k`: truncate to `B_{k-1}(X)`, attach
/// tree children for three more layers, count.
///
/// Balls of smaller radius are accepted only when closed (whole graphs).
pub fn ball_walk_counts(b: &MarkedBall, k: usize) -> Result<WalkCountVector> {
    if k == 0 {
        return Err(Error::InvalidParameter("walk depth k must be >= 1".into()));
    }
    let q = k - 1;
    let base = if b.p() >= q {
        b.truncate(q)?
    } else if b.is_closed() {
        let mut c = b.clone();
        c.set_radius(q);
        c
    } else {
        return Err(Error::InvalidParameter(format!("ball {} has radius {} < q={q}", b.id(), b.p())));
    };
    let ext = tree_completion(&base, EXTENSION_DEPTH);
    count_exit_walks(&build_commutativity_graph(&ext, q), k)
}

/// Exact counts on the cycle-free ball of degree `d` (memoised).
pub fn tree_walk_counts(d: usize, k: usize) -> Result<WalkCountVector> {
    static MEMO: OnceLock<Mutex<HashMap<(usize, usize), WalkCountVector>>> = OnceLock::new();
    check_dk(d, k)?;
    let memo = MEMO.get_or_init(Default::default);
    if let Some(v) = memo.lock().unwrap().get(&(d, k)) {
        return Ok(v.clone());
    }
    let tree = tree_completion(&MarkedBall::single_edge(d)?, k - 1);
    let v = ball_walk_counts(&tree, k)?;
    memo.lock().unwrap().insert((d, k), v.clone());
    Ok(v)
}

fn check_dk(d: usize, k: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("degree d={d} must be >= 2")));
    }
    if k < 1 {
        return Err(Error::InvalidParameter("depth k must be >= 1".into()));
    }
    Ok(())
}

/// Worst-case counts used by the global bound.
pub fn closed_form_counts(d: usize, k: usize, m: usize) -> Result<BigUint> {
    check_dk(d, k)?;
    let big = |x: usize| BigUint::from(x);
    let pow = num_traits::pow(big(d - 1), k);
    let (dd, kk) = (big(d), big(k));
    let two = big(2);
    Ok(match m {
        0 | 1 => &two * &pow,
        2 => &two * &pow * (&dd * (&kk + 1u32) + 1u32),
        3 => &two * &pow * (&dd * (&kk + 2u32)),
        // halves folded in: 2[x/2 + y/2 + k] = x + y + 2k
        4 => &pow * (&dd * &dd * ((&kk + 1u32) * (&kk + 1u32) + 3u32) + &dd * (3u32 * &kk + 2u32) + 2u32 * &kk),
        5 => &pow * (&dd * &dd * ((&kk + 2u32) * (&kk + 2u32) + 3u32) + &dd * (&kk + 1u32) + 2u32 * &kk - 2u32),
        _ => return Err(Error::InvalidParameter(format!("term index m={m} outside 0..=5"))),
    })
}

pub fn closed_form_vector(d: usize, k: usize) -> Result<WalkCountVector> {
    let counts = (0..TERMS).map(|m| closed_form_counts(d, k, m)).collect::<Result<_>>()?;
    Ok(WalkCountVector { k, counts })
}

/// `(2d)^{k+3}`, the count attached to the remainder term.
pub fn remainder_weight(d: usize, k: usize) -> Result<BigUint> {
    check_dk(d, k)?;
    Ok(num_traits::pow(BigUint::from(2 * d), k + 3))
}

/// CSV rows `{ball_id, d, k, m, count}`.
pub fn write_walk_counts_csv<'a>(
    w: impl Write,
    rows: impl IntoIterator<Item = (&'a str, usize, &'a WalkCountVector)>,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["ball_id", "d", "k", "m", "count"])?;
    for (id, d, v) in rows {
        for (m, c) in v.counts.iter().enumerate() {
            out.write_record([id.to_string(), d.to_string(), v.k.to_string(), m.to_string(), c.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}
