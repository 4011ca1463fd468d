use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ball::{multi_source_bfs, MarkedBall};

/// Fixed-point scale of the centrality profile: 8 decimal places.
pub const CENTRALITY_SCALE: f64 = 1e8;

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITER: usize = 100_000;

/// Isomorphism-invariant bucket key: diameter plus the sorted, rounded
/// eigenvector centrality profile.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BallHashKey {
    pub diameter: u32,
    /// Centralities scaled by [`CENTRALITY_SCALE`], ascending.
    pub centrality: Vec<i64>,
}

/// Eigenvector centrality by power iteration on `A + I` from the all-ones
/// vector, L2-normalised. The shift keeps bipartite balls from oscillating.
///
/// Neighbour values and the norm are summed in sorted order, which makes the
/// result an exact function of the isomorphism class (bit for bit), not just
/// up to rounding.
pub fn eigenvector_centrality(adj: &[Vec<u32>]) -> Vec<f64> {
    let n = adj.len();
    if n == 0 {
        return Vec::new();
    }
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut buf = Vec::new();
    for _ in 0..POWER_MAX_ITER {
        let mut next: Vec<f64> = (0..n)
            .map(|v| {
                buf.clear();
                buf.extend(adj[v].iter().map(|&w| x[w as usize]));
                buf.sort_by(f64::total_cmp);
                buf.iter().fold(x[v], |acc, &y| acc + y)
            })
            .collect();
        let mut squares: Vec<f64> = next.iter().map(|y| y * y).collect();
        squares.sort_by(f64::total_cmp);
        let norm = squares.iter().sum::<f64>().sqrt();
        for y in next.iter_mut() {
            *y /= norm;
        }
        let delta = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = next;
        if delta <= POWER_TOL {
            break;
        }
    }
    x
}

fn diameter(adj: &[Vec<u32>]) -> u32 {
    (0..adj.len() as u32)
        .map(|s| multi_source_bfs(adj, &[s]).into_iter().filter(|&r| r != usize::MAX).max().unwrap_or(0))
        .max()
        .unwrap_or(0) as u32
}

pub fn hash_ball(ball: &MarkedBall) -> BallHashKey {
    let adj = ball.adjacency();
    let mut centrality: Vec<i64> =
        eigenvector_centrality(&adj).into_iter().map(|c| (c * CENTRALITY_SCALE).round() as i64).collect();
    centrality.sort_unstable();
    BallHashKey { diameter: diameter(&adj), centrality }
}

fn format_fixed(v: i64) -> String {
    let scale = CENTRALITY_SCALE as i64;
    let sign = if v < 0 { "-" } else { "" };
    let a = v.unsigned_abs();
    format!("{sign}{}.{:08}", a / scale as u64, a % scale as u64)
}

fn parse_fixed(s: &str) -> Option<i64> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.')?;
    if frac.len() != 8 || int.is_empty() || !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let v = int.parse::<i64>().ok()? * CENTRALITY_SCALE as i64 + frac.parse::<i64>().ok()?;
    Some(if neg { -v } else { v })
}

impl std::fmt::Display for BallHashKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "diam={} [", self.diameter)?;
        for (i, &c) in self.centrality.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(&format_fixed(c))?;
        }
        f.write_str("]")
    }
}

#[derive(Serialize, Deserialize)]
struct KeyRepr {
    diameter: u32,
    centrality_profile: Vec<String>,
}

impl Serialize for BallHashKey {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        KeyRepr { diameter: self.diameter, centrality_profile: self.centrality.iter().map(|&c| format_fixed(c)).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BallHashKey {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = KeyRepr::deserialize(d)?;
        let centrality = repr
            .centrality_profile
            .iter()
            .map(|s| parse_fixed(s).ok_or_else(|| serde::de::Error::custom(format!("bad centrality entry {s:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BallHashKey { diameter: repr.diameter, centrality })
    }
}
