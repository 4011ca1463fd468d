use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pipeline::eligible;
use crate::commgraph::ball_walk_counts;
use crate::error::{Error, Result};
use crate::graphs::{MarkedBall, Omega};
use crate::lrbound::{bound_from_counts, global_counts, BoundParams, CountModel};
use crate::qasim::EnergyCache;
use crate::schedule::{IntegralTable, Schedule};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub d: usize,
    pub q: usize,
    pub schedule: Schedule,
    pub count_model: CountModel,
    pub t_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    /// keep only the `n` balls with the lowest best local value
    pub worst_n: Option<usize>,
}

/// Best corrected value of one ball at one `α` over the `T` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub ball_id: String,
    pub omega: Omega,
    pub alpha: f64,
    /// `max_T (energy - ε)`
    pub global_max: f64,
    pub global_t: f64,
    /// `max_T (energy - min(ε, ε_loc))`
    pub local_max: f64,
    pub local_t: f64,
}

/// For each eligible ball and `α`, the maximum over the `T` grid of the
/// globally and locally corrected energies. Rows come grouped by ball in id
/// order, `α` in grid order.
pub fn scan_t_alpha<'a>(
    balls: impl IntoIterator<Item = &'a MarkedBall>,
    energies: &EnergyCache,
    spec: &ScanSpec,
) -> Result<Vec<ScanEntry>> {
    if spec.t_grid.is_empty() || spec.alpha_grid.is_empty() {
        return Err(Error::InvalidParameter("scan grids must be non-empty".into()));
    }
    let template = BoundParams::new(spec.d, spec.q + 1, 0.0, 1.0, spec.schedule.clone())?;
    let table = IntegralTable::for_schedule(&spec.schedule, template.max_m())?;
    let gcounts = global_counts(spec.d, template.k, spec.count_model)?;
    let mut eps = Vec::with_capacity(spec.t_grid.len() * spec.alpha_grid.len());
    for &t in &spec.t_grid {
        for &a in &spec.alpha_grid {
            eps.push(bound_from_counts(&template.with_point(t, a), &gcounts, &table)?.total);
        }
    }

    let mut balls: Vec<&MarkedBall> = balls.into_iter().filter(|b| eligible(b, spec.q)).collect();
    balls.sort_by(|x, y| x.id().cmp(y.id()));
    balls.dedup_by(|x, y| x.id() == y.id());
    let sched = spec.schedule.id();
    let mut missing = Vec::new();
    for b in &balls {
        for &t in &spec.t_grid {
            for &a in &spec.alpha_grid {
                if energies.get(b.id(), t, a, sched).is_none() {
                    missing.push(format!("{} (T={t}, alpha={a})", b.id()));
                }
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingEnergies(missing));
    }

    let na = spec.alpha_grid.len();
    let per_ball: Vec<Vec<ScanEntry>> = balls
        .par_iter()
        .map(|b| -> Result<Vec<ScanEntry>> {
            let omega = b.omega_class().ok_or_else(|| Error::InvalidParameter(format!("ball {} has no class", b.id())))?;
            let lcounts = ball_walk_counts(b, template.k)?;
            let mut rows = Vec::with_capacity(na);
            for (j, &a) in spec.alpha_grid.iter().enumerate() {
                let mut row = ScanEntry {
                    ball_id: b.id().to_string(),
                    omega,
                    alpha: a,
                    global_max: f64::NEG_INFINITY,
                    global_t: f64::NAN,
                    local_max: f64::NEG_INFINITY,
                    local_t: f64::NAN,
                };
                for (i, &t) in spec.t_grid.iter().enumerate() {
                    let energy = energies.get(b.id(), t, a, sched).expect("checked above").energy;
                    let e = eps[i * na + j];
                    let el = bound_from_counts(&template.with_point(t, a), &lcounts, &table)?.total;
                    let (g, l) = (energy - e, energy - e.min(el));
                    if g > row.global_max {
                        row.global_max = g;
                        row.global_t = t;
                    }
                    if l > row.local_max {
                        row.local_max = l;
                        row.local_t = t;
                    }
                }
                rows.push(row);
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;

    let mut per_ball = per_ball;
    if let Some(n) = spec.worst_n {
        let best = |rows: &Vec<ScanEntry>| rows.iter().map(|r| r.local_max).fold(f64::NEG_INFINITY, f64::max);
        let mut order: Vec<usize> = (0..per_ball.len()).collect();
        order.sort_by(|&x, &y| best(&per_ball[x]).total_cmp(&best(&per_ball[y])).then(x.cmp(&y)));
        let mut keep: Vec<usize> = order.into_iter().take(n).collect();
        keep.sort_unstable();
        per_ball = keep.into_iter().map(|i| std::mem::take(&mut per_ball[i])).collect();
    }
    Ok(per_ball.into_iter().flatten().collect())
}

/// CSV with one row per `(ball, α)`, plot-ready.
pub fn write_scan_entries_csv(w: impl Write, rows: &[ScanEntry]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["ball_id", "omega", "alpha", "global_max", "global_T", "local_max", "local_T"])?;
    for r in rows {
        out.write_record([
            r.ball_id.clone(),
            r.omega.index().to_string(),
            r.alpha.to_string(),
            r.global_max.to_string(),
            r.global_t.to_string(),
            r.local_max.to_string(),
            r.local_t.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    #[serde(rename = "T")]
    pub t: f64,
    pub alpha: f64,
    pub value: f64,
    pub evaluations: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

fn golden_max(mut lo: f64, mut hi: f64, tol: f64, f: &mut impl FnMut(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// Maximises `objective(T, α)`: exhaustive search over the grid, then
/// `rounds` of alternating golden-section searches inside the cells around
/// the best grid point. The result is never worse than the best grid point.
pub fn optimize_t_alpha(
    mut objective: impl FnMut(f64, f64) -> Result<f64>,
    t_grid: &[f64],
    alpha_grid: &[f64],
    rounds: usize,
    tol: f64,
) -> Result<Optimum> {
    if t_grid.is_empty() || alpha_grid.is_empty() {
        return Err(Error::InvalidParameter("optimisation grids must be non-empty".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be > 0")));
    }
    let mut ts = t_grid.to_vec();
    let mut als = alpha_grid.to_vec();
    ts.sort_by(f64::total_cmp);
    als.sort_by(f64::total_cmp);
    let mut evals = 0usize;
    let mut best = Optimum { t: ts[0], alpha: als[0], value: f64::NEG_INFINITY, evaluations: 0 };
    let (mut bi, mut bj) = (0, 0);
    for (i, &t) in ts.iter().enumerate() {
        for (j, &a) in als.iter().enumerate() {
            let v = objective(t, a)?;
            evals += 1;
            if v > best.value {
                best = Optimum { t, alpha: a, value: v, evaluations: 0 };
                (bi, bj) = (i, j);
            }
        }
    }
    let (t_lo, t_hi) = (ts[bi.saturating_sub(1)], ts[(bi + 1).min(ts.len() - 1)]);
    let (a_lo, a_hi) = (als[bj.saturating_sub(1)], als[(bj + 1).min(als.len() - 1)]);
    for _ in 0..rounds {
        if t_hi > t_lo {
            let a = best.alpha;
            let (t, v) = golden_max(t_lo, t_hi, tol, &mut |t| {
                evals += 1;
                objective(t, a)
            })?;
            if v > best.value {
                best.t = t;
                best.value = v;
            }
        }
        if a_hi > a_lo {
            let t = best.t;
            let (a, v) = golden_max(a_lo, a_hi, tol, &mut |a| {
                evals += 1;
                objective(t, a)
            })?;
            if v > best.value {
                best.alpha = a;
                best.value = v;
            }
        }
    }
    best.evaluations = evals;
    Ok(best)
}
