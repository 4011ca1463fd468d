//! Lieb-Robinson error bounds on the marked-edge energy.
//!
//! Both bounds share one term structure: for `m = 0..5`,
//! `t_m = T^{2k+m} (2/α)^{k+o_m} I_{2k+m}(1) N_m` with offsets
//! `o = [0, 1, 1, 2, 2, 3]`, plus a remainder
//! `T^{2k+6} (2/α)^{k+3} I_{2k+6}(1) (2d)^{k+3}`. The global bound takes the
//! worst-case counts `N_m`, the local bound the exact exit-walk counts of one
//! ball.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::commgraph::{ball_walk_counts, big_to_f64, closed_form_vector, remainder_weight, tree_walk_counts, WalkCountVector, TERMS};
use crate::error::{Error, Result};
use crate::graphs::MarkedBall;
use crate::schedule::{IntegralTable, Schedule};

/// Extra powers of `2/α` on top of `k`, per term.
pub const ALPHA_OFFSETS: [usize; TERMS] = [0, 1, 1, 2, 2, 3];
pub const REMAINDER_OFFSET: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub d: usize,
    /// walk depth; the ball radius is `q = k - 1`
    pub k: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub alpha: f64,
    pub schedule: Schedule,
}

impl BoundParams {
    pub fn new(d: usize, k: usize, t: f64, alpha: f64, schedule: Schedule) -> Result<Self> {
        let p = Self { d, k, t, alpha, schedule };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::InvalidParameter(format!("d={} must be >= 2", self.d)));
        }
        if self.k < 1 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(Error::InvalidParameter(format!("T={} must be finite and >= 0", self.t)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha={} must be finite and > 0", self.alpha)));
        }
        Ok(())
    }

    pub fn q(&self) -> usize {
        self.k - 1
    }

    /// Highest integral order the bound reads.
    pub fn max_m(&self) -> usize {
        2 * self.k + TERMS
    }

    pub fn with_point(&self, t: f64, alpha: f64) -> Self {
        Self { t, alpha, ..self.clone() }
    }

    pub fn with_k(&self, k: usize) -> Self {
        Self { k, ..self.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundBreakdown {
    pub terms: Vec<f64>,
    pub remainder: f64,
    pub total: f64,
}

/// Which counts the global bound uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountModel {
    /// the closed-form counts as printed
    Printed,
    /// elementwise max of the closed forms and the exact cycle-free counts;
    /// the closed forms undercount the last two terms
    #[default]
    Certified,
}

pub fn global_counts(d: usize, k: usize, model: CountModel) -> Result<WalkCountVector> {
    let printed = closed_form_vector(d, k)?;
    Ok(match model {
        CountModel::Printed => printed,
        CountModel::Certified => printed.max(&tree_walk_counts(d, k)?),
    })
}

fn check_table(p: &BoundParams, integrals: &IntegralTable) -> Result<()> {
    if integrals.schedule_id != p.schedule.id() {
        return Err(Error::InvalidParameter(format!(
            "integral table is for schedule {} but params use {}",
            integrals.schedule_id,
            p.schedule.id()
        )));
    }
    if integrals.max_m() < p.max_m() {
        return Err(Error::MissingIntegral(integrals.max_m() + 1));
    }
    Ok(())
}

/// The seven-term sum for explicit counts.
pub fn bound_from_counts(p: &BoundParams, counts: &WalkCountVector, integrals: &IntegralTable) -> Result<BoundBreakdown> {
    p.validate()?;
    check_table(p, integrals)?;
    if counts.k != p.k || counts.counts.len() != TERMS {
        return Err(Error::InvalidParameter(format!("walk counts for k={} do not match k={}", counts.k, p.k)));
    }
    let k = p.k;
    let ratio = 2.0 / p.alpha;
    let mut terms = Vec::with_capacity(TERMS);
    for (m, n) in counts.counts.iter().enumerate() {
        let len = 2 * k + m;
        let t = p.t.powi(len as i32) * ratio.powi((k + ALPHA_OFFSETS[m]) as i32) * integrals.upper(len)? * big_to_f64(n);
        terms.push(t);
    }
    let len = 2 * k + TERMS;
    let remainder = p.t.powi(len as i32)
        * ratio.powi((k + REMAINDER_OFFSET) as i32)
        * integrals.upper(len)?
        * big_to_f64(&remainder_weight(p.d, k)?);
    let total = terms.iter().sum::<f64>() + remainder;
    Ok(BoundBreakdown { terms, remainder, total })
}

/// `ε(q, T, α)` with a caller-provided integral table.
pub fn global_bound_with(p: &BoundParams, integrals: &IntegralTable, model: CountModel) -> Result<BoundBreakdown> {
    bound_from_counts(p, &global_counts(p.d, p.k, model)?, integrals)
}

/// `ε(q, T, α)` under the default count model.
pub fn global_bound(p: &BoundParams) -> Result<BoundBreakdown> {
    let table = IntegralTable::for_schedule(&p.schedule, p.max_m())?;
    global_bound_with(p, &table, CountModel::default())
}

/// `ε_loc(B_q(X), T, α)` with a caller-provided integral table.
pub fn local_bound_with(b: &MarkedBall, p: &BoundParams, integrals: &IntegralTable) -> Result<BoundBreakdown> {
    p.validate()?;
    if b.d() != p.d {
        return Err(Error::InvalidParameter(format!("ball has d={} but params d={}", b.d(), p.d)));
    }
    if b.p() < p.q() && !b.is_closed() {
        return Err(Error::InvalidParameter(format!("ball {} has radius {} < q={}", b.id(), b.p(), p.q())));
    }
    bound_from_counts(p, &ball_walk_counts(b, p.k)?, integrals)
}

pub fn local_bound(b: &MarkedBall, p: &BoundParams) -> Result<BoundBreakdown> {
    let table = IntegralTable::for_schedule(&p.schedule, p.max_m())?;
    local_bound_with(b, p, &table)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub ball_id: Option<String>,
    #[serde(rename = "T")]
    pub t: f64,
    pub alpha: f64,
    pub breakdown: BoundBreakdown,
}

/// Dense `(T, α)` table, `T` major. With a ball the local bound is scanned,
/// otherwise the global one.
pub fn bound_scan(
    ball: Option<&MarkedBall>,
    t_grid: &[f64],
    alpha_grid: &[f64],
    template: &BoundParams,
    model: CountModel,
) -> Result<Vec<ScanRow>> {
    if t_grid.is_empty() || alpha_grid.is_empty() {
        return Err(Error::InvalidParameter("scan grids must be non-empty".into()));
    }
    let table = IntegralTable::for_schedule(&template.schedule, template.max_m())?;
    let counts = match ball {
        Some(b) => {
            // validates radius and degree once
            local_bound_with(b, &template.with_point(0.0, 1.0), &table)?;
            ball_walk_counts(b, template.k)?
        }
        None => global_counts(template.d, template.k, model)?,
    };
    let mut rows = Vec::with_capacity(t_grid.len() * alpha_grid.len());
    for &t in t_grid {
        for &alpha in alpha_grid {
            let p = template.with_point(t, alpha);
            rows.push(ScanRow { ball_id: ball.map(|b| b.id().to_string()), t, alpha, breakdown: bound_from_counts(&p, &counts, &table)? });
        }
    }
    Ok(rows)
}

/// CSV `{ball_id, T, alpha, term_0..term_5, remainder, total}`.
pub fn write_scan_csv(w: impl Write, rows: &[ScanRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["ball_id".to_string(), "T".into(), "alpha".into()];
    header.extend((0..TERMS).map(|m| format!("term_{m}")));
    header.extend(["remainder".to_string(), "total".into()]);
    out.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.ball_id.clone().unwrap_or_default(), r.t.to_string(), r.alpha.to_string()];
        rec.extend(r.breakdown.terms.iter().map(|v| format!("{v:e}")));
        rec.push(format!("{:e}", r.breakdown.remainder));
        rec.push(format!("{:e}", r.breakdown.total));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}
