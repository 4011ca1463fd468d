use num_complex::Complex64;
use qalr_core::graphs::{enumerate_b1, enumerate_radius, MarkedBall};
use qalr_core::qasim::{
    batch_simulate, edge_energy, evolve, simulate_ball, EnergyCache, Hamiltonian, Integrator, SimParams,
};
use qalr_core::schedule::Schedule;
use qalr_core::BallDatabase;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_state(dim: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..dim).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

fn params(t: f64, alpha: f64) -> SimParams {
    SimParams::new(t, alpha, Schedule::linear())
}

#[test]
fn hamiltonian_is_hermitian() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let b2 = enumerate_radius(3, 2).unwrap();
    let balls: Vec<&MarkedBall> = b2.balls().filter(|b| b.node_count() <= 12).take(5).collect();
    let cubic = Schedule::parse("cubic:3.2,-4.8,2.6").unwrap();
    for b in balls {
        for sched in [Schedule::linear(), cubic.clone()] {
            let h = Hamiltonian::for_ball(b, 3.33, 1.53, &sched, 24).unwrap();
            for t in [0.0, 1.1, 3.33] {
                let u = random_state(h.dim(), &mut rng);
                let v = random_state(h.dim(), &mut rng);
                let lhs = inner(&u, &h.apply(t, &v).unwrap());
                let rhs = inner(&v, &h.apply(t, &u).unwrap()).conj();
                assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0), "{}", b.id());
            }
        }
    }
}

#[test]
fn zero_time_energy_is_one_half() {
    for b in enumerate_b1(3).unwrap().balls() {
        let rec = simulate_ball(b, &params(0.0, 1.53)).unwrap();
        assert!((rec.energy - 0.5).abs() <= 1e-7);
    }
}

#[test]
fn integrators_agree_on_b1() {
    for b in enumerate_b1(3).unwrap().balls() {
        let h = Hamiltonian::for_ball(b, 3.33, 1.53, &Schedule::linear(), 24).unwrap();
        let a = evolve(&h, Integrator::Dopri5, 1e-8).unwrap();
        let r = evolve(&h, Integrator::Rk4Richardson, 1e-8).unwrap();
        assert!(a.norm_drift <= 1e-8 && r.norm_drift <= 1e-8);
        let (ea, er) = (edge_energy(&a.state, b.marked_edge()), edge_energy(&r.state, b.marked_edge()));
        assert!((ea - er).abs() <= 1e-6, "{}: {ea} vs {er}", b.id());
    }
}

#[test]
fn integrators_agree_on_random_b2_sample() {
    let db = enumerate_radius(3, 2).unwrap();
    let mut balls: Vec<&MarkedBall> = db.balls().collect();
    balls.shuffle(&mut ChaCha8Rng::seed_from_u64(11));
    let sample = &balls[..10];
    let mut p = params(3.33, 1.53);
    let dopri = batch_simulate(sample.iter().copied(), &p, 0, None).unwrap();
    p.method = Integrator::Rk4Richardson;
    let rk = batch_simulate(sample.iter().copied(), &p, 0, None).unwrap();
    assert!(dopri.failures.is_empty() && rk.failures.is_empty());
    for (x, y) in dopri.records.iter().zip(&rk.records) {
        assert_eq!(x.ball_id, y.ball_id);
        assert!((x.energy - y.energy).abs() <= 1e-6, "{}: {} vs {}", x.ball_id, x.energy, y.energy);
    }
}

#[test]
fn long_anneal_on_single_edge_approaches_cut() {
    let b = MarkedBall::single_edge(3).unwrap();
    let rec = simulate_ball(&b, &params(20.0, 1.0)).unwrap();
    assert!(rec.energy > 0.9, "{}", rec.energy);
}

#[test]
fn relabelling_leaves_energy_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let db = enumerate_radius(3, 2).unwrap();
    let balls: Vec<&MarkedBall> = db.balls().filter(|b| b.node_count() <= 11).take(4).collect();
    for b in balls {
        let mut perm: Vec<u32> = (0..b.node_count() as u32).collect();
        perm.shuffle(&mut rng);
        let e0 = simulate_ball(b, &params(3.33, 1.53)).unwrap().energy;
        let e1 = simulate_ball(&b.relabel(&perm), &params(3.33, 1.53)).unwrap().energy;
        assert!((e0 - e1).abs() <= 1e-9, "{}: {e0} vs {e1}", b.id());
    }
}

#[test]
fn empty_batch_is_empty() {
    let db = BallDatabase::new(3, 1).unwrap();
    let out = batch_simulate(db.balls(), &params(1.0, 1.0), 2, None).unwrap();
    assert!(out.records.is_empty() && out.failures.is_empty());
}

#[test]
fn warm_cache_rerun_simulates_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("energies.csv");
    let db = enumerate_b1(3).unwrap();
    let p = params(1.2, 1.5);
    let first = {
        let cache = EnergyCache::open(&path).unwrap();
        batch_simulate(db.balls(), &p, 2, Some(&cache)).unwrap()
    };
    assert_eq!((first.simulated, first.cached), (3, 0));
    let cache = EnergyCache::open(&path).unwrap();
    let second = batch_simulate(db.balls(), &p, 1, Some(&cache)).unwrap();
    assert_eq!((second.simulated, second.cached), (0, 3));
    assert_eq!(first.records, second.records);
}

#[test]
fn over_cap_ball_is_recorded_as_failure() {
    let db = enumerate_b1(3).unwrap();
    let mut p = params(1.0, 1.0);
    p.hilbert_cap = 5;
    let out = batch_simulate(db.balls(), &p, 0, None).unwrap();
    // the square and triangle balls have at most 5 nodes, the tree has 6
    assert_eq!(out.failures.len(), 1);
    assert_eq!(out.records.len(), 2);
    assert!(out.failures[0].1.contains("cap"));
}
