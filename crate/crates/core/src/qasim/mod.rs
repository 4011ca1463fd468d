//! Statevector simulation of the annealing dynamics on a marked ball.
//!
//! The Hamiltonian is applied matrix-free: the cut count of every basis state
//! is precomputed once, and the transverse field is a sweep of amplitude-pair
//! updates per qubit.

mod cache;
mod hamiltonian;
mod integrate;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::MarkedBall;
use crate::schedule::Schedule;

pub use cache::{cache_key, CacheKey, EnergyCache, EnergyRecord};
pub use hamiltonian::{edge_energy, norm, uniform_state, Hamiltonian, DEFAULT_HILBERT_CAP};
pub use integrate::{evolve, Evolution, Integrator, DEFAULT_TOL};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    #[serde(rename = "T")]
    pub t: f64,
    pub alpha: f64,
    pub schedule: Schedule,
    pub tol: f64,
    pub hilbert_cap: usize,
    pub method: Integrator,
}

impl SimParams {
    pub fn new(t: f64, alpha: f64, schedule: Schedule) -> Self {
        Self { t, alpha, schedule, tol: DEFAULT_TOL, hilbert_cap: DEFAULT_HILBERT_CAP, method: Integrator::default() }
    }
}

/// Final `⟨O_X⟩` for one ball.
pub fn simulate_ball(ball: &MarkedBall, params: &SimParams) -> Result<EnergyRecord> {
    let start = Instant::now();
    let h = Hamiltonian::for_ball(ball, params.t, params.alpha, &params.schedule, params.hilbert_cap)?;
    let ev = evolve(&h, params.method, params.tol)?;
    let energy = edge_energy(&ev.state, ball.marked_edge());
    if !(0.0..=1.0).contains(&energy) {
        return Err(Error::Invariant(format!("energy {energy} of {} outside [0, 1]", ball.id())));
    }
    Ok(EnergyRecord {
        ball_id: ball.id().to_string(),
        t: params.t,
        alpha: params.alpha,
        schedule_id: params.schedule.id().to_string(),
        energy,
        method: params.method.name().to_string(),
        tol: params.tol,
        steps: ev.steps,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug, Default)]
pub struct BatchOutcome {
    /// one per successfully simulated or cached ball, input order
    pub records: Vec<EnergyRecord>,
    /// `(ball_id, message)` for balls that failed
    pub failures: Vec<(String, String)>,
    pub simulated: usize,
    pub cached: usize,
}

/// Simulates every ball not already in `cache`; failures are collected and
/// the batch continues. `threads = 0` uses the global pool.
pub fn batch_simulate<'a>(
    balls: impl IntoIterator<Item = &'a MarkedBall>,
    params: &SimParams,
    threads: usize,
    cache: Option<&EnergyCache>,
) -> Result<BatchOutcome> {
    let balls: Vec<&MarkedBall> = balls.into_iter().collect();
    let sched = params.schedule.id();
    let run = || -> Vec<std::result::Result<(EnergyRecord, bool), (String, String)>> {
        balls
            .par_iter()
            .map(|b| {
                if let Some(rec) = cache.and_then(|c| c.get(b.id(), params.t, params.alpha, sched)) {
                    return Ok((rec, true));
                }
                let rec = simulate_ball(b, params).map_err(|e| (b.id().to_string(), e.to_string()))?;
                if let Some(c) = cache {
                    c.insert(rec.clone()).map_err(|e| (b.id().to_string(), e.to_string()))?;
                }
                Ok((rec, false))
            })
            .collect()
    };
    let results = if threads == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(run)
    };
    let mut out = BatchOutcome::default();
    for r in results {
        match r {
            Ok((rec, hit)) => {
                if hit {
                    out.cached += 1;
                } else {
                    out.simulated += 1;
                }
                out.records.push(rec);
            }
            Err(f) => out.failures.push(f),
        }
    }
    Ok(out)
}
