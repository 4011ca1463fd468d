//! Marked balls `B_p(X)` around an edge of a d-regular graph: representation,
//! exhaustive enumeration, isomorphism-invariant hashing, exact marked-edge
//! isomorphism testing and canonical labelling.
//!
//! Enumeration starts from the bare edge `X` and grows one layer at a time:
//! every boundary node with spare degree is completed either by linking it to
//! another deficient boundary node or to a freshly created node one step
//! further out. Candidates are bucketed by [`BallHashKey`] and compared with
//! [`is_isomorphic`] only inside a bucket.

mod ball;
mod canon;
mod database;
mod enumerate;
mod hash;
mod iso;
mod refine;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use ball::{Edge, MarkedBall, UNREACHABLE};
pub use canon::{canonical_form, canonical_id, CanonicalForm};
pub use database::{BallDatabase, DatabaseHeader, FORMAT_VERSION};
pub use enumerate::{ball_from_graph, enumerate_b1, enumerate_radius, extend_balls, tree_completion};
pub use hash::{eigenvector_centrality, hash_ball, BallHashKey, CENTRALITY_SCALE};
pub use iso::is_isomorphic;

/// Radius-1 neighbourhood class of an edge in a cubic graph.
///
/// `One` is the square made of two triangles sharing `X` as a diagonal (the
/// endpoints of `X` have two common neighbours), `Two` is a single triangle
/// on `X`, `Three` is the cycle-free double binary tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Omega {
    One,
    Two,
    Three,
}

impl Omega {
    pub const ALL: [Omega; 3] = [Omega::One, Omega::Two, Omega::Three];

    pub fn index(self) -> u8 {
        match self {
            Omega::One => 1,
            Omega::Two => 2,
            Omega::Three => 3,
        }
    }
}

impl From<Omega> for u8 {
    fn from(o: Omega) -> u8 {
        o.index()
    }
}

impl TryFrom<u8> for Omega {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Omega::One),
            2 => Ok(Omega::Two),
            3 => Ok(Omega::Three),
            other => Err(format!("omega class must be 1, 2 or 3, got {other}")),
        }
    }
}

impl std::fmt::Display for Omega {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Ω{}", self.index())
    }
}

/// Ω class of a cubic ball, from the common neighbours of the marked edge's
/// endpoints (two: Ω1, one: Ω2, none: Ω3).
pub fn classify_omega(ball: &MarkedBall) -> Result<Omega> {
    if ball.d() != 3 {
        return Err(Error::InvalidParameter(format!(
            "Ω classification is defined for cubic balls, got d={}",
            ball.d()
        )));
    }
    if ball.p() == 0 {
        return Err(Error::InvalidParameter("Ω classification needs radius p >= 1".into()));
    }
    Ok(match ball.marked_common_neighbours() {
        0 => Omega::Three,
        1 => Omega::Two,
        _ => Omega::One,
    })
}
