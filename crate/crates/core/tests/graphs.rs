use std::collections::HashSet;

use proptest::prelude::*;
use qalr_core::graphs::{
    ball_from_graph, canonical_form, classify_omega, enumerate_b1, enumerate_radius, extend_balls, hash_ball,
    is_isomorphic, BallDatabase, MarkedBall, Omega,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn b2() -> BallDatabase {
    enumerate_radius(3, 2).unwrap()
}

/// Random simple cubic graph by the pairing model with rejection.
fn random_cubic(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<u32>> {
    loop {
        let mut points: Vec<u32> = (0..n as u32).flat_map(|v| [v, v, v]).collect();
        points.shuffle(rng);
        let mut adj = vec![Vec::new(); n];
        let mut ok = true;
        for pair in points.chunks(2) {
            let (a, b) = (pair[0], pair[1]);
            if a == b || adj[a as usize].contains(&b) {
                ok = false;
                break;
            }
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        if ok {
            return adj;
        }
    }
}

fn random_perm(n: usize, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let mut perm: Vec<u32> = (0..n as u32).collect();
    perm.shuffle(rng);
    perm
}

#[test]
fn cubic_radius_two_has_123_balls() {
    let db = b2();
    assert_eq!(db.len(), 123);
    let by_class: Vec<usize> = Omega::ALL.iter().map(|&o| db.count_by_class(o)).collect();
    assert_eq!(by_class.iter().sum::<usize>(), 123);
    for b in db.balls() {
        assert!(b.distances().iter().all(|&r| r <= 2), "{}", b.id());
        b.validate().unwrap();
    }
}

#[test]
fn radius_two_balls_pairwise_non_isomorphic() {
    let balls: Vec<MarkedBall> = b2().balls().cloned().collect();
    for i in 0..balls.len() {
        for j in i + 1..balls.len() {
            assert!(!is_isomorphic(&balls[i], &balls[j]), "{} ~ {}", balls[i].id(), balls[j].id());
        }
    }
    let ids: HashSet<&str> = balls.iter().map(|b| b.id()).collect();
    assert_eq!(ids.len(), balls.len());
}

#[test]
fn shuffled_parent_order_gives_same_database() {
    let b1 = enumerate_b1(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut shuffled = BallDatabase::new(3, 1).unwrap();
    let mut parents: Vec<MarkedBall> = b1.balls().cloned().collect();
    parents.reverse();
    for b in parents {
        let perm = random_perm(b.node_count(), &mut rng);
        shuffled.insert(b.relabel(&perm)).unwrap();
    }
    let a = extend_balls(&b1);
    let b = extend_balls(&shuffled);
    assert_eq!(a.len(), b.len());
    for x in a.balls() {
        assert!(b.balls().any(|y| is_isomorphic(x, y)));
    }
}

#[test]
fn radius_two_interior_is_full() {
    for b in b2().balls() {
        let deg = b.degrees();
        for (v, &r) in b.distances().iter().enumerate() {
            if r < 2 {
                assert_eq!(deg[v], 3, "{} node {v}", b.id());
            }
        }
    }
}

#[test]
fn balls_of_random_cubic_graphs_are_enumerated() {
    let db1 = enumerate_b1(3).unwrap();
    let db2 = b2();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let n = 2 * rng.gen_range(2..12);
        let adj = random_cubic(n, &mut rng);
        let u = rng.gen_range(0..n) as u32;
        let v = adj[u as usize][rng.gen_range(0..3)];
        for (p, db) in [(1, &db1), (2, &db2)] {
            let ball = ball_from_graph(&adj, (u, v), 3, p).unwrap();
            let hits = db.balls().filter(|b| is_isomorphic(b, &ball)).count();
            assert_eq!(hits, 1, "n={n} edge=({u},{v}) p={p}");
        }
    }
}

#[test]
fn omega_class_is_isomorphism_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for b in b2().balls() {
        let r = b.relabel(&random_perm(b.node_count(), &mut rng));
        assert_eq!(classify_omega(b).unwrap(), classify_omega(&r).unwrap());
    }
}

#[test]
fn canonical_form_agrees_with_isomorphism_test() {
    let balls: Vec<MarkedBall> = b2().balls().cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for b in &balls {
        let r = b.relabel(&random_perm(b.node_count(), &mut rng));
        assert_eq!(canonical_form(b).edges, canonical_form(&r).edges);
    }
    let forms: HashSet<_> = balls.iter().map(|b| canonical_form(b).edges).collect();
    assert_eq!(forms.len(), balls.len());
}

#[test]
fn database_file_round_trip() {
    let db = b2();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b2.jsonl");
    db.save(&path).unwrap();
    let back = BallDatabase::load(&path).unwrap();
    assert_eq!(back.len(), 123);
    let path2 = dir.path().join("b2_again.jsonl");
    back.save(&path2).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hash_is_relabelling_invariant(idx in 0usize..123, seed in any::<u64>()) {
        let db = b2_cached();
        let b = &db[idx];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = b.relabel(&random_perm(b.node_count(), &mut rng));
        prop_assert_eq!(hash_ball(b), hash_ball(&r));
        prop_assert!(is_isomorphic(b, &r));
    }

    #[test]
    fn moved_mark_is_detected(idx in 0usize..123, pick in any::<prop::sample::Index>()) {
        let db = b2_cached();
        let b = &db[idx];
        let e = *pick.get(b.edges());
        // same graph, mark moved: the isomorphism test and the canonical form
        // must agree on whether the two marked graphs coincide
        let n = b.node_count();
        let here = MarkedBall::new(b.d(), n, n, b.edges(), b.marked_edge()).unwrap();
        let moved = MarkedBall::new(b.d(), n, n, b.edges(), e).unwrap();
        let iso = is_isomorphic(&here, &moved);
        let canon_eq = canonical_form(&here).edges == canonical_form(&moved).edges;
        prop_assert_eq!(iso, canon_eq);
    }
}

fn b2_cached() -> &'static [MarkedBall] {
    static CELL: std::sync::OnceLock<Vec<MarkedBall>> = std::sync::OnceLock::new();
    CELL.get_or_init(|| b2().balls().cloned().collect())
}
