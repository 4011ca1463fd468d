use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Edge-class census of a cubic graph: `n1` square-type and `n2`
/// triangle-type configurations; every other edge is a tree edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmegaCounts {
    pub nodes: u64,
    pub n1: u64,
    pub n2: u64,
}

impl OmegaCounts {
    pub fn new(nodes: u64, n1: u64, n2: u64) -> Result<Self> {
        let c = Self { nodes, n1, n2 };
        if !nodes.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!("a cubic graph has an even node count, got {nodes}")));
        }
        if 4 * n1 + 3 * n2 > nodes {
            return Err(Error::InvalidParameter(format!("4·{n1} + 3·{n2} exceeds |V| = {nodes}")));
        }
        if 5 * n1 + 3 * n2 > c.edges() {
            return Err(Error::InvalidParameter(format!("n3 would be negative for n1={n1}, n2={n2}")));
        }
        Ok(c)
    }

    pub fn edges(&self) -> u64 {
        3 * self.nodes / 2
    }

    pub fn n3(&self) -> u64 {
        self.edges() - 5 * self.n1 - 3 * self.n2
    }

    /// `(n1/|V|, n2/|V|)`
    pub fn fractions(&self) -> (f64, f64) {
        (self.n1 as f64 / self.nodes as f64, self.n2 as f64 / self.nodes as f64)
    }

    /// Cut-fraction lower bound for a graph with these counts, using the
    /// optimum bound `|E| - n1 - n2`.
    pub fn ratio_bound(&self, a: f64, b: f64, c: f64) -> f64 {
        let (n1, n2, n3) = (self.n1 as f64, self.n2 as f64, self.n3() as f64);
        (a * n1 + b * (4.0 * n1 + 3.0 * n2) + c * n3) / (self.edges() as f64 - n1 - n2)
    }
}

/// `f(x, y) = (a x + b(4x + 3y) + c(3/2 - 5x - 3y)) / (3/2 - x - y)`
pub fn omega_fraction(a: f64, b: f64, c: f64, x: f64, y: f64) -> f64 {
    (a * x + b * (4.0 * x + 3.0 * y) + c * (1.5 - 5.0 * x - 3.0 * y)) / (1.5 - x - y)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinCondition {
    /// `a ≤ b ≤ c` and `3.5c ≤ 3.75b + 0.75a`
    pub holds: bool,
    pub ordering_ok: bool,
}

pub fn check_min_condition(a: f64, b: f64, c: f64) -> MinCondition {
    let ordering_ok = a <= b && b <= c;
    MinCondition { holds: ordering_ok && 3.5 * c <= 3.75 * b + 0.75 * a, ordering_ok }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionMin {
    pub value: f64,
    pub x: f64,
    pub y: f64,
}

/// Vertices of `{x, y ≥ 0, 4x + 3y ≤ 1}`.
pub const VERTICES: [(f64, f64); 3] = [(0.0, 0.0), (0.25, 0.0), (0.0, 1.0 / 3.0)];

/// Exact minimum of `f` over the feasible triangle.
///
/// `f` is a ratio of affine functions with a positive denominator there, so
/// it is quasi-linear and the minimum sits at a vertex. Ties go to the
/// earlier vertex, so `(0, 0)` wins whenever `c` is a minimum.
pub fn omega_fraction_min(a: f64, b: f64, c: f64) -> FractionMin {
    let values = [c, (a + 4.0 * b + c) / 5.0, (6.0 * b + 3.0 * c) / 7.0];
    let mut best = 0;
    for i in 1..3 {
        if values[i] < values[best] {
            best = i;
        }
    }
    FractionMin { value: values[best], x: VERTICES[best].0, y: VERTICES[best].1 }
}

/// Dense-grid minimum of `f`; used as an independent check.
pub fn omega_fraction_grid(a: f64, b: f64, c: f64, step: f64) -> FractionMin {
    let mut best = FractionMin { value: f64::INFINITY, x: 0.0, y: 0.0 };
    let nx = (0.25 / step).round() as usize;
    for i in 0..=nx {
        let x = i as f64 * step;
        let ymax = (1.0 - 4.0 * x) / 3.0;
        let ny = (ymax / step).floor() as usize;
        let mut consider = |y: f64| {
            let v = omega_fraction(a, b, c, x, y);
            if v < best.value {
                best = FractionMin { value: v, x, y };
            }
        };
        for j in 0..=ny {
            consider(j as f64 * step);
        }
        consider(ymax.max(0.0));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_classes_give_c() {
        let m = omega_fraction_min(0.6, 0.6, 0.6);
        assert_eq!((m.value, m.x, m.y), (0.6, 0.0, 0.0));
    }

    #[test]
    fn vertex_values_match_f() {
        let (a, b, c) = (0.3, 0.55, 0.8);
        let m = omega_fraction_min(a, b, c);
        assert!((m.value - omega_fraction(a, b, c, m.x, m.y)).abs() < 1e-15);
        assert!((omega_fraction(a, b, c, 0.25, 0.0) - (a + 4.0 * b + c) / 5.0).abs() < 1e-15);
        assert!((omega_fraction(a, b, c, 0.0, 1.0 / 3.0) - (6.0 * b + 3.0 * c) / 7.0).abs() < 1e-15);
    }

    #[test]
    fn all_cut_tree_edges_only() {
        let m = omega_fraction_min(0.0, 0.0, 1.0);
        assert!((m.value - 0.2).abs() < 1e-15);
        assert_eq!((m.x, m.y), (0.25, 0.0));
        assert!(!check_min_condition(0.0, 0.0, 1.0).holds);
    }

    #[test]
    fn condition_flags_bad_ordering() {
        let c = check_min_condition(0.7, 0.6, 0.65);
        assert!(!c.ordering_ok && !c.holds);
    }

    #[test]
    fn counts_reduce_to_f() {
        let c = OmegaCounts::new(120, 6, 10).unwrap();
        assert_eq!(c.edges(), 180);
        assert_eq!(c.n3(), 180 - 30 - 30);
        let (x, y) = c.fractions();
        let (a, b, cc) = (0.55, 0.62, 0.7);
        assert!((c.ratio_bound(a, b, cc) - omega_fraction(a, b, cc, x, y)).abs() < 1e-14);
    }

    #[test]
    fn counts_validated() {
        assert!(OmegaCounts::new(11, 0, 0).is_err());
        assert!(OmegaCounts::new(12, 3, 1).is_err());
        assert!(OmegaCounts::new(12, 3, 0).is_ok());
    }
}
