//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! `QALR_ACCEPT_EXTENDED=1` also runs the radius-3 count (hours).
//! `QALR_ACCEPT_CACHE=<path>` keeps the pipeline energies between runs.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigUint;
use num_rational::BigRational;
use qalr_core::commgraph::{ball_walk_counts, closed_form_counts, tree_walk_counts};
use qalr_core::graphs::{enumerate_b1, enumerate_radius, extend_balls, MarkedBall};
use qalr_core::lrbound::{global_bound_with, local_bound_with, BoundParams, CountModel};
use qalr_core::qasim::{edge_energy, evolve, EnergyCache, Hamiltonian, Integrator, SimParams, batch_simulate};
use qalr_core::ratio::{
    certify_ratio, check_min_condition, omega_fraction_grid, omega_fraction_min, CertifyParams, DEFAULT_THRESHOLD,
};
use qalr_core::schedule::{
    even_upper_bound, integral_quadrature, odd_upper_bound, rational_to_f64, CoefficientTable, IntegralTable, Schedule,
    DEFAULT_GRID, DEFAULT_QUAD_TOL,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Verdict {
    Pass,
    Fail,
    Skipped,
    Statement,
}

struct Report {
    passed: usize,
    failed: usize,
}

impl Report {
    fn line(&mut self, n: u32, title: &str, verdict: Verdict, detail: &str) {
        let tag = match verdict {
            Verdict::Pass => {
                self.passed += 1;
                "PASS"
            }
            Verdict::Fail => {
                self.failed += 1;
                "FAIL"
            }
            Verdict::Skipped => "SKIPPED",
            Verdict::Statement => "NOT REPRODUCIBLE AT DESK SCALE",
        };
        println!("criterion {n} [{title}]: {tag}");
        for l in detail.lines() {
            println!("    {l}");
        }
    }

    fn check(&mut self, n: u32, title: &str, run: impl FnOnce() -> Result<(bool, String), String>) {
        let start = Instant::now();
        match run() {
            Ok((ok, detail)) => {
                let detail = format!("{detail}\n({:.1}s)", start.elapsed().as_secs_f64());
                self.line(n, title, if ok { Verdict::Pass } else { Verdict::Fail }, &detail)
            }
            Err(e) => self.line(n, title, Verdict::Fail, &format!("error: {e}")),
        }
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn ball_counts() -> Result<(bool, String), String> {
    let t = Instant::now();
    let b1 = enumerate_b1(3).map_err(err)?;
    let t1 = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let b2 = extend_balls(&b1);
    let t2 = t.elapsed().as_secs_f64();
    let ok = b1.len() == 3 && b2.len() == 123 && t2 < 60.0;
    Ok((ok, format!("|B_1| = {} ({t1:.2}s), |B_2| = {} ({t2:.2}s); expected 3 and 123", b1.len(), b2.len())))
}

fn radius_three_count() -> Result<(bool, String), String> {
    let b3 = enumerate_radius(3, 3).map_err(err)?;
    let closed = b3.closed_count();
    let ok = b3.len() == 930_449;
    Ok((ok, format!("radius-3 database: {} balls ({} carried closed, {} open); expected 930449", b3.len(), closed, b3.len() - closed)))
}

fn nested_integrals() -> Result<(bool, String), String> {
    let mut table = CoefficientTable::new();
    let i2 = table.integral(2).map_err(err)?;
    let i4 = table.integral(4).map_err(err)?;
    let exact_ok = i2 == BigRational::new(1.into(), 24.into()) && i4 == BigRational::new(17.into(), 40320.into());
    let lin = Schedule::linear();
    let mut worst = 0.0f64;
    for m in 1..=10 {
        let exact = rational_to_f64(&table.integral(m).map_err(err)?);
        let q = integral_quadrature(&lin, m, DEFAULT_GRID, DEFAULT_QUAD_TOL).map_err(err)?;
        worst = worst.max((q.value - exact).abs() / exact);
    }
    let mut bounds_ok = true;
    for k in 1..=30 {
        bounds_ok &= table.integral_even(k).map_err(err)? <= even_upper_bound(k);
        bounds_ok &= table.integral_odd(k).map_err(err)? <= odd_upper_bound(k);
    }
    let ok = exact_ok && worst <= 1e-9 && bounds_ok;
    Ok((
        ok,
        format!(
            "I_2(1) = {i2}, I_4(1) = {i4} (exact match: {exact_ok})\n\
             recurrence vs quadrature, m <= 10: worst relative gap {worst:.2e} (limit 1e-9)\n\
             factorial upper bounds for k <= 30: {bounds_ok}"
        ),
    ))
}

fn walk_counts() -> Result<(bool, String), String> {
    let mut exact_ok = true;
    let mut lines = Vec::new();
    for d in 3..=5u32 {
        for k in 1..=4u32 {
            let got = tree_walk_counts(d as usize, k as usize).map_err(err)?;
            let base = BigUint::from(2u32) * BigUint::from(d - 1).pow(k);
            let n2 = BigUint::from(2u32) * BigUint::from(d - 1).pow(k + 1) + BigUint::from(2 + d * k) * &base;
            if got.counts[0] != base || got.counts[1] != base || got.counts[2] != n2 {
                exact_ok = false;
                lines.push(format!("d={d} k={k}: got N_0..2 = {:?}", &got.counts[..3]));
            }
        }
    }
    // every enumerated ball against the closed forms, m <= 5
    let mut dbs = vec![(3usize, enumerate_radius(3, 2).map_err(err)?, 3usize)];
    dbs.push((3, enumerate_b1(3).map_err(err)?, 2));
    dbs.push((4, enumerate_b1(4).map_err(err)?, 2));
    dbs.push((5, enumerate_b1(5).map_err(err)?, 2));
    let mut checked = 0usize;
    let mut over = [0usize; 6];
    let mut example = None;
    for (d, db, kmax) in &dbs {
        for k in 1..=*kmax {
            let closed: Vec<BigUint> = (0..6).map(|m| closed_form_counts(*d, k, m)).collect::<Result<_, _>>().map_err(err)?;
            for b in db.balls() {
                let c = ball_walk_counts(b, k).map_err(err)?;
                checked += 1;
                for m in 0..6 {
                    if c.counts[m] > closed[m] {
                        over[m] += 1;
                        example.get_or_insert_with(|| {
                            format!("e.g. d={d} k={k} ball {}: N_{m} = {} > closed form {}", b.id(), c.counts[m], closed[m])
                        });
                    }
                }
            }
        }
    }
    let dominated = over.iter().all(|&o| o == 0);
    let mut detail = format!(
        "tree balls d in 3..5, k in 1..4: N_0 = N_1 = 2(d-1)^k and N_2 closed form exact: {exact_ok}\n\
         domination by closed forms over {checked} (ball, k) pairs: {}\n\
         exceedances per term m = 0..5: {over:?}",
        if dominated { "holds" } else { "VIOLATED" }
    );
    if let Some(e) = example {
        detail += &format!("\n{e}\nthe m = 4, 5 closed forms undercount cycle-free walks; bounds default to the certified counts");
    }
    for l in lines {
        detail += &format!("\n{l}");
    }
    Ok((exact_ok && dominated, detail))
}

fn bound_monotonicity() -> Result<(bool, String), String> {
    let lin = Schedule::linear();
    let table = IntegralTable::linear(2 * 6 + 6).map_err(err)?;
    let grid = |lo: f64, hi: f64| (0..20).map(move |i| lo + (hi - lo) * i as f64 / 19.0);
    let mut bad = [0usize; 2];
    for (mi, model) in [CountModel::Certified, CountModel::Printed].into_iter().enumerate() {
        for t in grid(0.5, 5.0) {
            for a in grid(0.5, 3.0) {
                let mut prev = global_bound_with(&BoundParams::new(3, 2, t, a, lin.clone()).map_err(err)?, &table, model)
                    .map_err(err)?
                    .total;
                for k in 3..=6 {
                    let e = global_bound_with(&BoundParams::new(3, k, t, a, lin.clone()).map_err(err)?, &table, model)
                        .map_err(err)?
                        .total;
                    if e > prev {
                        bad[mi] += 1;
                    }
                    prev = e;
                }
            }
        }
    }
    let b2 = enumerate_radius(3, 2).map_err(err)?;
    let p = BoundParams::new(3, 3, 3.33, 1.53, lin).map_err(err)?;
    let eps = global_bound_with(&p, &table, CountModel::Certified).map_err(err)?.total;
    let eps_printed = global_bound_with(&p, &table, CountModel::Printed).map_err(err)?.total;
    let (mut loc_bad, mut loc_bad_printed, mut worst) = (0, 0, 0.0f64);
    for b in b2.balls() {
        let l = local_bound_with(b, &p, &table).map_err(err)?.total;
        worst = worst.max(l);
        loc_bad += usize::from(l > eps);
        loc_bad_printed += usize::from(l > eps_printed);
    }
    let ok = bad[0] == 0 && bad[1] == 0 && loc_bad == 0;
    Ok((
        ok,
        format!(
            "eps(k+1) > eps(k) on the 20x20 grid, k = 2..5: {} (certified counts), {} (printed counts)\n\
             q = 2 at (3.33, 1.53): eps = {eps:.6e}, max eps_loc over {} balls = {worst:.6e}, violations {loc_bad}\n\
             (against the printed-count eps = {eps_printed:.6e}: {loc_bad_printed} violations, informational)",
            bad[0],
            bad[1],
            b2.len()
        ),
    ))
}

fn simulation_sanity() -> Result<(bool, String), String> {
    let lin = Schedule::linear();
    let b1 = enumerate_b1(3).map_err(err)?;
    let b2 = enumerate_radius(3, 2).map_err(err)?;
    let mut zero_dev = 0.0f64;
    for b in b1.balls() {
        let h = Hamiltonian::for_ball(b, 0.0, 1.53, &lin, 24).map_err(err)?;
        let ev = evolve(&h, Integrator::Dopri5, 1e-8).map_err(err)?;
        zero_dev = zero_dev.max((edge_energy(&ev.state, b.marked_edge()) - 0.5).abs());
    }
    let mut sample: Vec<&MarkedBall> = b2.balls().collect();
    sample.shuffle(&mut ChaCha8Rng::seed_from_u64(11));
    sample.truncate(10);
    let mut drift = 0.0f64;
    let mut gap = 0.0f64;
    for b in b1.balls().chain(sample.iter().copied()) {
        let h = Hamiltonian::for_ball(b, 3.33, 1.53, &lin, 24).map_err(err)?;
        let x = evolve(&h, Integrator::Dopri5, 1e-8).map_err(err)?;
        let y = evolve(&h, Integrator::Rk4Richardson, 1e-8).map_err(err)?;
        drift = drift.max(x.norm_drift).max(y.norm_drift);
        gap = gap.max((edge_energy(&x.state, b.marked_edge()) - edge_energy(&y.state, b.marked_edge())).abs());
    }
    let edge = MarkedBall::single_edge(3).map_err(err)?;
    let h = Hamiltonian::for_ball(&edge, 20.0, 1.0, &lin, 24).map_err(err)?;
    let ev = evolve(&h, Integrator::Dopri5, 1e-8).map_err(err)?;
    drift = drift.max(ev.norm_drift);
    let long = edge_energy(&ev.state, edge.marked_edge());
    let ok = zero_dev <= 1e-7 && drift <= 1e-8 && gap <= 1e-6 && long > 0.9;
    Ok((
        ok,
        format!(
            "T = 0 on B_1: max |<O_X> - 0.5| = {zero_dev:.2e} (limit 1e-7)\n\
             max norm drift = {drift:.2e} (limit 1e-8)\n\
             dopri5 vs rk4-richardson on 3 B_1 + 10 B_2 balls: max gap {gap:.2e} (limit 1e-6)\n\
             single edge, T = 20, alpha = 1: <O_X> = {long:.6} (needs > 0.9)"
        ),
    ))
}

fn appendix_minimisation() -> Result<(bool, String), String> {
    let (a, b, c) = (0.5502, 0.6265, 0.70208);
    let cond = check_min_condition(a, b, c).holds;
    let m = omega_fraction_min(a, b, c);
    let ref_ok = cond && (m.value - 0.70208).abs() <= 1e-12 && (m.x, m.y) == (0.0, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let mut v = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
        v.sort_by(f64::total_cmp);
        let exact = omega_fraction_min(v[0], v[1], v[2]);
        let grid = omega_fraction_grid(v[0], v[1], v[2], 1e-4);
        worst = worst.max((exact.value - grid.value).abs());
    }
    let ok = ref_ok && worst <= 1e-6;
    Ok((
        ok,
        format!(
            "(0.5502, 0.6265, 0.70208): condition {cond}, minimum {} at ({}, {})\n\
             100 random triples vs dense grid (step 1e-4): max gap {worst:.2e} (limit 1e-6)",
            m.value, m.x, m.y
        ),
    ))
}

fn pipeline_smoke() -> Result<(bool, String), String> {
    let (t, alpha) = (3.33, 1.53);
    let b1 = enumerate_b1(3).map_err(err)?;
    let b2 = enumerate_radius(3, 2).map_err(err)?;
    let cache = match std::env::var_os("QALR_ACCEPT_CACHE") {
        Some(p) => EnergyCache::open(&PathBuf::from(p)).map_err(err)?,
        None => EnergyCache::in_memory(),
    };
    let sim = batch_simulate(b2.balls(), &SimParams::new(t, alpha, Schedule::linear()), 0, Some(&cache)).map_err(err)?;
    if !sim.failures.is_empty() {
        return Err(format!("{} simulations failed: {:?}", sim.failures.len(), sim.failures));
    }
    let params = CertifyParams {
        d: 3,
        q: 2,
        t,
        alpha,
        schedule: Schedule::linear(),
        threshold: DEFAULT_THRESHOLD,
        count_model: CountModel::Certified,
    };
    let cert = certify_ratio(b1.balls().chain(b2.balls()), &cache, &params).map_err(err)?;
    let verified = cert.verify();
    let (a, b, c) = cert.minima.values();
    let recomputed = omega_fraction_min(a, b, c).value;
    let bitwise = recomputed.to_bits() == cert.ratio.to_bits();
    let order_ok = cert.entries.iter().all(|e| cert.eps_global >= e.eps_loc.min(cert.eps_global) && e.energy - cert.eps_global <= e.corrected);
    let eps_loc_ok = cert.entries.iter().all(|e| e.eps_loc <= cert.eps_global);
    let ok = verified.is_ok() && bitwise && order_ok && eps_loc_ok;
    Ok((
        ok,
        format!(
            "{} balls simulated, {} cached; {} certified, {} skipped (radius < q)\n\
             eps = {:.6e}, survivors {} at threshold {}\n\
             minima a = {a:.6}, b = {b:.6}, c = {c:.6}; ratio = {:.6} at ({}, {})\n\
             verify: {}; ratio recomputed bit-for-bit: {bitwise}; eps_loc <= eps for every entry: {eps_loc_ok}",
            sim.simulated,
            sim.cached,
            cert.entries.len(),
            cert.skipped.len(),
            cert.eps_global,
            cert.survivor_count(),
            cert.threshold,
            cert.ratio,
            cert.argmin.0,
            cert.argmin.1,
            verified.map(|_| "ok".to_string()).unwrap_or_else(|e| e.to_string())
        ),
    ))
}

fn main() -> ExitCode {
    let mut r = Report { passed: 0, failed: 0 };
    r.check(1, "ball counts", ball_counts);
    if std::env::var("QALR_ACCEPT_EXTENDED").is_ok_and(|v| v == "1") {
        r.check(2, "radius-3 count (extended)", radius_three_count);
    } else {
        r.line(2, "radius-3 count (extended)", Verdict::Skipped, "optional; set QALR_ACCEPT_EXTENDED=1 to run (hours)");
    }
    r.check(3, "nested integrals", nested_integrals);
    r.check(4, "walk counting", walk_counts);
    r.check(5, "bound monotonicity", bound_monotonicity);
    r.check(6, "simulation sanity", simulation_sanity);
    r.check(7, "omega-fraction minimisation", appendix_minimisation);
    r.check(8, "pipeline smoke", pipeline_smoke);
    r.line(
        9,
        "full-scale targets",
        Verdict::Statement,
        "the headline ratio 0.7020, the 7071-survivor count, the class minima 0.5502 / 0.6265 and the\n\
         cubic-schedule 0.7165 projection need energies for all radius-3 balls (up to 30-qubit states,\n\
         weeks of compute). `qalr enumerate --p 3`, `qalr simulate --hilbert-cap 30` and `qalr certify --q 3`\n\
         run that campaign resumably through the energy cache; it is not part of this run.",
    );
    println!("acceptance: {} passed, {} failed", r.passed, r.failed);
    if r.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
