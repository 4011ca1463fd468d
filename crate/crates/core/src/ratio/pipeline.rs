use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fraction::{check_min_condition, omega_fraction_min, FractionMin, MinCondition};
use crate::error::{Error, Result};
use crate::graphs::{MarkedBall, Omega};
use crate::lrbound::{global_bound_with, local_bound_with, BoundParams, CountModel};
use crate::qasim::EnergyCache;
use crate::schedule::{IntegralTable, Schedule};

/// Which bound produced a corrected value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMode {
    Global,
    Local,
}

/// One ball entering the pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub ball_id: String,
    pub omega: Omega,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMin {
    pub value: f64,
    pub ball_id: String,
    pub mode: BoundMode,
}

/// Per-class minima of corrected energies; `a`, `b`, `c` are the square,
/// triangle and tree classes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMinima {
    pub a: ClassMin,
    pub b: ClassMin,
    pub c: ClassMin,
}

impl ClassMinima {
    pub fn get(&self, omega: Omega) -> &ClassMin {
        match omega {
            Omega::One => &self.a,
            Omega::Two => &self.b,
            Omega::Three => &self.c,
        }
    }

    pub fn values(&self) -> (f64, f64, f64) {
        (self.a.value, self.b.value, self.c.value)
    }

    /// `a ≤ b ≤ c`
    pub fn ordering_ok(&self) -> bool {
        self.a.value <= self.b.value && self.b.value <= self.c.value
    }

    /// First minimum per class in candidate order.
    pub fn from_values(cands: &[Candidate], corrected: &[f64], modes: &[BoundMode]) -> Result<Self> {
        let mut best: [Option<ClassMin>; 3] = [None, None, None];
        for ((cand, &v), &mode) in cands.iter().zip(corrected).zip(modes) {
            let slot = &mut best[cand.omega.index() as usize - 1];
            if slot.as_ref().is_none_or(|m| v < m.value) {
                *slot = Some(ClassMin { value: v, ball_id: cand.ball_id.clone(), mode });
            }
        }
        let [a, b, c] = best;
        let missing = |o: Omega| Error::MissingClass(format!("no ball of class {} among {} candidates", o.index(), cands.len()));
        Ok(Self {
            a: a.ok_or_else(|| missing(Omega::One))?,
            b: b.ok_or_else(|| missing(Omega::Two))?,
            c: c.ok_or_else(|| missing(Omega::Three))?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilterOutcome {
    /// indices into the candidate slice
    pub survivors: Vec<usize>,
    /// minima of `energy - ε` over every candidate
    pub minima: ClassMinima,
}

/// Keeps balls whose globally corrected energy `energy - ε` is below
/// `threshold`. The signed value is compared, so low energies are kept too.
pub fn filter_with_global_bound(cands: &[Candidate], eps: f64, threshold: f64) -> Result<FilterOutcome> {
    let corrected: Vec<f64> = cands.iter().map(|c| c.energy - eps).collect();
    let survivors = (0..cands.len()).filter(|&i| corrected[i] < threshold).collect();
    let minima = ClassMinima::from_values(cands, &corrected, &vec![BoundMode::Global; cands.len()])?;
    Ok(FilterOutcome { survivors, minima })
}

/// Corrected value of a survivor: `energy - min(ε, ε_loc)`.
pub fn local_corrected(energy: f64, eps: f64, eps_loc: f64) -> f64 {
    energy - eps.min(eps_loc)
}

/// Recomputes survivors with their local bounds (`eps_loc[i]` for candidate
/// `i`) and returns the updated minima. Other candidates keep `energy - ε`.
pub fn refine_with_local_bound(cands: &[Candidate], survivors: &[usize], eps: f64, eps_loc: &[f64]) -> Result<ClassMinima> {
    if eps_loc.len() != cands.len() {
        return Err(Error::DimensionMismatch { expected: cands.len(), got: eps_loc.len() });
    }
    let mut corrected: Vec<f64> = cands.iter().map(|c| c.energy - eps).collect();
    let mut modes = vec![BoundMode::Global; cands.len()];
    for &i in survivors {
        corrected[i] = local_corrected(cands[i].energy, eps, eps_loc[i]);
        modes[i] = BoundMode::Local;
    }
    ClassMinima::from_values(cands, &corrected, &modes)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyParams {
    pub d: usize,
    pub q: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub alpha: f64,
    pub schedule: Schedule,
    pub threshold: f64,
    pub count_model: CountModel,
}

impl CertifyParams {
    pub fn bound_params(&self) -> Result<BoundParams> {
        BoundParams::new(self.d, self.q + 1, self.t, self.alpha, self.schedule.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertEntry {
    pub ball_id: String,
    pub omega: Omega,
    pub energy: f64,
    pub eps_loc: f64,
    pub survivor: bool,
    /// `energy - ε`, or `energy - min(ε, ε_loc)` for survivors
    pub corrected: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioCertificate {
    pub d: usize,
    pub q: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub alpha: f64,
    pub schedule_id: String,
    pub count_model: CountModel,
    pub threshold: f64,
    pub eps_global: f64,
    pub entries: Vec<CertEntry>,
    /// balls below radius `q` that are not closed
    pub skipped: Vec<String>,
    /// minima before local refinement
    pub global_minima: ClassMinima,
    pub minima: ClassMinima,
    pub ordering_ok: bool,
    pub condition: MinCondition,
    pub argmin: (f64, f64),
    pub ratio: f64,
}

/// Balls usable at radius `q`: radius at least `q`, or closed.
pub fn eligible(b: &MarkedBall, q: usize) -> bool {
    b.p() >= q || b.is_closed()
}

/// Filter, refine and minimise over `balls` with energies from `energies`.
pub fn certify_ratio<'a>(
    balls: impl IntoIterator<Item = &'a MarkedBall>,
    energies: &EnergyCache,
    params: &CertifyParams,
) -> Result<RatioCertificate> {
    let bp = params.bound_params()?;
    if !(0.0..=1.0).contains(&params.threshold) {
        return Err(Error::InvalidParameter(format!("threshold {} outside [0, 1]", params.threshold)));
    }
    let mut balls: Vec<&MarkedBall> = balls.into_iter().collect();
    balls.sort_by(|x, y| x.id().cmp(y.id()));
    balls.dedup_by(|x, y| x.id() == y.id());
    let (use_balls, skip): (Vec<&MarkedBall>, Vec<&MarkedBall>) = balls.into_iter().partition(|b| eligible(b, params.q));
    let skipped = skip.iter().map(|b| b.id().to_string()).collect();

    let sched = params.schedule.id();
    let mut cands = Vec::with_capacity(use_balls.len());
    let mut missing = Vec::new();
    for b in &use_balls {
        if b.d() != params.d {
            return Err(Error::InvalidParameter(format!("ball {} has d={} but d={}", b.id(), b.d(), params.d)));
        }
        let omega = b.omega_class().ok_or_else(|| Error::InvalidParameter(format!("ball {} has no class", b.id())))?;
        match energies.get(b.id(), params.t, params.alpha, sched) {
            Some(r) => cands.push(Candidate { ball_id: b.id().to_string(), omega, energy: r.energy }),
            None => missing.push(b.id().to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingEnergies(missing));
    }

    let table = IntegralTable::for_schedule(&params.schedule, bp.max_m())?;
    let eps = global_bound_with(&bp, &table, params.count_model)?.total;
    let eps_loc: Vec<f64> = use_balls
        .par_iter()
        .map(|b| local_bound_with(b, &bp, &table).map(|br| br.total))
        .collect::<Result<_>>()?;

    let filtered = filter_with_global_bound(&cands, eps, params.threshold)?;
    let minima = refine_with_local_bound(&cands, &filtered.survivors, eps, &eps_loc)?;
    let mut is_survivor = vec![false; cands.len()];
    for &i in &filtered.survivors {
        is_survivor[i] = true;
    }
    let entries = cands
        .iter()
        .zip(&eps_loc)
        .zip(&is_survivor)
        .map(|((c, &el), &s)| CertEntry {
            ball_id: c.ball_id.clone(),
            omega: c.omega,
            energy: c.energy,
            eps_loc: el,
            survivor: s,
            corrected: if s { local_corrected(c.energy, eps, el) } else { c.energy - eps },
        })
        .collect();
    let (a, b, c) = minima.values();
    let FractionMin { value, x, y } = omega_fraction_min(a, b, c);
    Ok(RatioCertificate {
        d: params.d,
        q: params.q,
        t: params.t,
        alpha: params.alpha,
        schedule_id: sched.to_string(),
        count_model: params.count_model,
        threshold: params.threshold,
        eps_global: eps,
        entries,
        skipped,
        global_minima: filtered.minima,
        ordering_ok: minima.ordering_ok(),
        condition: check_min_condition(a, b, c),
        minima,
        argmin: (x, y),
        ratio: value,
    })
}

impl RatioCertificate {
    pub fn survivor_count(&self) -> usize {
        self.entries.iter().filter(|e| e.survivor).count()
    }

    /// Recomputes every derived quantity from the recorded entries and
    /// checks it bit for bit.
    pub fn verify(&self) -> Result<()> {
        let fail = |what: String| Err(Error::Invariant(format!("certificate: {what}")));
        for e in &self.entries {
            let want_survivor = e.energy - self.eps_global < self.threshold;
            if e.survivor != want_survivor {
                return fail(format!("{} survivor flag", e.ball_id));
            }
            let want = if e.survivor { local_corrected(e.energy, self.eps_global, e.eps_loc) } else { e.energy - self.eps_global };
            if want.to_bits() != e.corrected.to_bits() {
                return fail(format!("{} corrected value {} != {}", e.ball_id, e.corrected, want));
            }
            if e.energy - self.eps_global > e.corrected {
                return fail(format!("{} locally corrected value below global", e.ball_id));
            }
        }
        let cands: Vec<Candidate> =
            self.entries.iter().map(|e| Candidate { ball_id: e.ball_id.clone(), omega: e.omega, energy: e.energy }).collect();
        let corrected: Vec<f64> = self.entries.iter().map(|e| e.corrected).collect();
        let modes: Vec<BoundMode> =
            self.entries.iter().map(|e| if e.survivor { BoundMode::Local } else { BoundMode::Global }).collect();
        if ClassMinima::from_values(&cands, &corrected, &modes)? != self.minima {
            return fail("class minima do not match entries".into());
        }
        let global: Vec<f64> = self.entries.iter().map(|e| e.energy - self.eps_global).collect();
        if ClassMinima::from_values(&cands, &global, &vec![BoundMode::Global; cands.len()])? != self.global_minima {
            return fail("global minima do not match entries".into());
        }
        let (a, b, c) = self.minima.values();
        let m = omega_fraction_min(a, b, c);
        if m.value.to_bits() != self.ratio.to_bits() || (m.x, m.y) != self.argmin {
            return fail(format!("ratio {} != recomputed {}", self.ratio, m.value));
        }
        if check_min_condition(a, b, c) != self.condition || self.minima.ordering_ok() != self.ordering_ok {
            return fail("condition flags".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_json()?.as_bytes())?;
        f.write_all(b"\n")?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Plain-text rendering of the same fields.
    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "ratio certificate");
        let _ = writeln!(s, "  d = {}  q = {}  T = {}  alpha = {}", self.d, self.q, self.t, self.alpha);
        let _ = writeln!(s, "  schedule = {}  count model = {:?}", self.schedule_id, self.count_model);
        let _ = writeln!(s, "  threshold = {}", self.threshold);
        let _ = writeln!(s, "  eps (global) = {:e}", self.eps_global);
        let _ = writeln!(
            s,
            "  balls = {}  survivors = {}  skipped = {}",
            self.entries.len(),
            self.survivor_count(),
            self.skipped.len()
        );
        for (label, g, m) in [
            ("a (omega 1)", &self.global_minima.a, &self.minima.a),
            ("b (omega 2)", &self.global_minima.b, &self.minima.b),
            ("c (omega 3)", &self.global_minima.c, &self.minima.c),
        ] {
            let _ = writeln!(
                s,
                "  {label}: global {:.10} [{}]  refined {:.10} [{}, {:?}]",
                g.value, g.ball_id, m.value, m.ball_id, m.mode
            );
        }
        let _ = writeln!(s, "  ordering a <= b <= c: {}", self.ordering_ok);
        let _ = writeln!(s, "  3.5c <= 3.75b + 0.75a: {}", self.condition.holds);
        let _ = writeln!(s, "  argmin (x, y) = ({}, {})", self.argmin.0, self.argmin.1);
        let _ = writeln!(s, "  ratio = {:.10}", self.ratio);
        let _ = writeln!(s, "survivors");
        for e in self.entries.iter().filter(|e| e.survivor) {
            let _ = writeln!(
                s,
                "  {} omega={} energy={:.10} eps_loc={:e} corrected={:.10}",
                e.ball_id,
                e.omega.index(),
                e.energy,
                e.eps_loc,
                e.corrected
            );
        }
        if !self.skipped.is_empty() {
            let _ = writeln!(s, "skipped (radius < q, not closed)");
            for id in &self.skipped {
                let _ = writeln!(s, "  {id}");
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cand(id: &str, omega: Omega, energy: f64) -> Candidate {
        Candidate { ball_id: id.into(), omega, energy }
    }

    fn sample() -> Vec<Candidate> {
        vec![
            cand("s", Omega::One, 0.60),
            cand("t", Omega::Two, 0.66),
            cand("u", Omega::Three, 0.69),
            cand("v", Omega::Three, 0.74),
        ]
    }

    #[test]
    fn zero_threshold_keeps_nothing() {
        let out = filter_with_global_bound(&sample(), 0.01, 0.0).unwrap();
        assert!(out.survivors.is_empty());
        assert_eq!(out.minima.c.value, 0.69 - 0.01);
        assert_eq!(out.minima.c.ball_id, "u");
    }

    #[test]
    fn refine_never_lowers_minima() {
        let cands = sample();
        let eps = 0.02;
        let out = filter_with_global_bound(&cands, eps, 0.7).unwrap();
        assert_eq!(out.survivors, vec![0, 1, 2]);
        let refined = refine_with_local_bound(&cands, &out.survivors, eps, &[0.001, 0.05, 0.004, 0.0]).unwrap();
        for o in Omega::ALL {
            assert!(refined.get(o).value >= out.minima.get(o).value);
        }
        assert_eq!(refined.a.value, 0.60 - 0.001);
        // ε_loc above ε falls back to ε
        assert_eq!(refined.b.value, 0.66 - 0.02);
        assert_eq!(refined.c.mode, BoundMode::Local);
        let unchanged = refine_with_local_bound(&cands, &[], eps, &[0.0; 4]).unwrap();
        assert_eq!(unchanged, out.minima);
    }

    #[test]
    fn empty_class_is_an_error() {
        let cands = vec![cand("s", Omega::One, 0.6), cand("u", Omega::Three, 0.7)];
        assert!(matches!(filter_with_global_bound(&cands, 0.0, 0.7), Err(Error::MissingClass(_))));
    }
}
