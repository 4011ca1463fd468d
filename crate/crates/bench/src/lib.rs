//! Shared fixtures for the criterion benches.

use qalr_core::graphs::{enumerate_b1, enumerate_radius, MarkedBall};
use qalr_core::BallDatabase;

pub fn b1() -> BallDatabase {
    enumerate_b1(3).expect("d = 3 is valid")
}

pub fn b2() -> BallDatabase {
    enumerate_radius(3, 2).expect("d = 3 is valid")
}

/// The largest ball of the radius-2 database with at most `max_nodes` nodes.
pub fn largest_ball(db: &BallDatabase, max_nodes: usize) -> MarkedBall {
    db.balls()
        .filter(|b| b.node_count() <= max_nodes)
        .max_by(|x, y| x.node_count().cmp(&y.node_count()).then_with(|| y.id().cmp(x.id())))
        .expect("database has a ball under the cap")
        .clone()
}

/// A scrambled copy, so canonicalisation does real work.
pub fn scrambled(b: &MarkedBall) -> MarkedBall {
    let n = b.node_count() as u32;
    let perm: Vec<u32> = (0..n).map(|i| (i * 7 + 3) % n).collect();
    if gcd(7, n) == 1 {
        b.relabel(&perm)
    } else {
        b.relabel(&(0..n).rev().collect::<Vec<_>>())
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
