//! Annealing schedules and the nested integrals
//! `I_m(x) = ∫_0^x h_1(u_1) ∫_0^{u_1} h_2(u_2) … ∫_0^{u_{m-1}} h_m(u_m) du_m … du_1`
//! with weights alternating `1 - f, f, 1 - f, …` from the outside in.
//!
//! For the linear schedule the values at `x = 1` are exact rationals from the
//! coefficient recurrences; other polynomial schedules use nested cumulative
//! trapezoid quadrature with Richardson extrapolation.

use std::fmt;
use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ENDPOINT_TOL: f64 = 1e-12;
const RANGE_SAMPLES: usize = 1000;

pub const DEFAULT_GRID: usize = 1 << 12;
pub const DEFAULT_QUAD_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    Linear,
    Polynomial,
}

/// `f: [0, 1] → [0, 1]` with `f(0) = 0`, `f(1) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Schedule {
    kind: ScheduleKind,
    /// ascending: `f(s) = Σ coeffs[i] s^i`
    coeffs: Vec<f64>,
    id: String,
}

fn join(values: &[f64]) -> String {
    values.iter().map(|c| format!("{c}")).collect::<Vec<_>>().join(",")
}

impl Schedule {
    pub fn linear() -> Self {
        Self { kind: ScheduleKind::Linear, coeffs: vec![0.0, 1.0], id: "linear".into() }
    }

    /// Polynomial schedule from ascending coefficients.
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        let id = format!("poly:{}", join(&coeffs));
        Self::checked(coeffs, id)
    }

    /// `a s^3 + b s^2 + c s`.
    pub fn cubic(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::checked(vec![0.0, c, b, a], format!("cubic:{}", join(&[a, b, c])))
    }

    fn checked(mut coeffs: Vec<f64>, id: String) -> Result<Self> {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        let s = Self { kind: ScheduleKind::Polynomial, coeffs, id };
        s.validate()?;
        Ok(s)
    }

    /// Parses `linear`, `cubic:a,b,c` (highest degree first, no constant) or
    /// `poly:c0,c1,…` (ascending).
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let numbers = |body: &str| -> Result<Vec<f64>> {
            body.split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| Error::InvalidSchedule(format!("bad coefficient {t:?} in {spec:?}"))))
                .collect()
        };
        if spec == "linear" {
            return Ok(Self::linear());
        }
        if let Some(body) = spec.strip_prefix("cubic:") {
            let c = numbers(body)?;
            if c.len() != 3 {
                return Err(Error::InvalidSchedule(format!("cubic schedule needs 3 coefficients, got {}", c.len())));
            }
            return Self::cubic(c[0], c[1], c[2]);
        }
        if let Some(body) = spec.strip_prefix("poly:") {
            return Self::polynomial(numbers(body)?);
        }
        Err(Error::InvalidSchedule(format!("unknown schedule {spec:?} (expected linear, cubic:a,b,c or poly:c0,c1,...)")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidSchedule(format!("{}: non-finite coefficient", self.id)));
        }
        let (f0, f1) = (self.eval(0.0), self.eval(1.0));
        if f0.abs() > ENDPOINT_TOL || (f1 - 1.0).abs() > ENDPOINT_TOL {
            return Err(Error::InvalidSchedule(format!("{}: need f(0)=0 and f(1)=1, got {f0} and {f1}", self.id)));
        }
        // the bounds take h = 1 - f and h = f as non-negative weights
        for i in 0..=RANGE_SAMPLES {
            let u = i as f64 / RANGE_SAMPLES as f64;
            let v = self.eval(u);
            if !(-ENDPOINT_TOL..=1.0 + ENDPOINT_TOL).contains(&v) {
                return Err(Error::InvalidSchedule(format!("{}: f({u}) = {v} leaves [0, 1]", self.id)));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// True for `f(s) = s`, whichever way it was written.
    pub fn is_linear(&self) -> bool {
        self.kind == ScheduleKind::Linear || self.coeffs == [0.0, 1.0]
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

impl From<Schedule> for String {
    fn from(s: Schedule) -> String {
        s.id
    }
}

impl TryFrom<String> for Schedule {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Schedule::parse(&s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeType {
    /// single-site transverse-field term
    Blue,
    /// edge term
    Red,
}

pub fn schedule_weights(s: &Schedule, node: NodeType, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::InvalidParameter(format!("normalised time u={u} outside [0, 1]")));
    }
    let f = s.eval(u);
    Ok(match node {
        NodeType::Blue => 1.0 - f,
        NodeType::Red => f,
    })
}

fn rat(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact recurrence coefficients `a_j(k)` (even) and `b_j(k)` (odd).
#[derive(Clone, Debug)]
pub struct CoefficientTable {
    even: Vec<Vec<BigRational>>,
    odd: Vec<Vec<BigRational>>,
}

impl Default for CoefficientTable {
    fn default() -> Self {
        Self::new()
    }
}

impl CoefficientTable {
    pub fn new() -> Self {
        // odd[0] is a placeholder so that odd[k] holds b(k)
        Self { even: vec![vec![BigRational::one()]], odd: vec![Vec::new(), vec![BigRational::one(), rat(1, 2)]] }
    }

    pub fn even(&mut self, k: usize) -> &[BigRational] {
        while self.even.len() <= k {
            let k = self.even.len() as u64;
            let prev = self.even.last().unwrap();
            let mut row = Vec::with_capacity(k as usize + 1);
            row.push(&prev[0] * rat(1, 3 * k * (3 * k - 1)));
            for j in 1..k {
                row.push(
                    &prev[j as usize] * rat(1, (3 * k + j - 1) * (3 * k + j))
                        + &prev[j as usize - 1] * rat(1, (3 * k + j - 2) * (3 * k + j)),
                );
            }
            row.push(&prev[k as usize - 1] * rat(1, 4 * k * (4 * k - 2)));
            self.even.push(row);
        }
        &self.even[k]
    }

    pub fn odd(&mut self, k: usize) -> Result<&[BigRational]> {
        if k < 1 {
            return Err(Error::InvalidParameter("odd coefficients start at k=1".into()));
        }
        while self.odd.len() <= k {
            // row k+1 from row k
            let k = self.odd.len() as u64 - 1;
            let prev = self.odd.last().unwrap();
            let mut row = Vec::with_capacity(k as usize + 2);
            row.push(&prev[0] * rat(1, 3 * k * (3 * k + 1)));
            for j in 1..=k {
                row.push(
                    &prev[j as usize] * rat(1, (3 * k + j + 1) * (3 * k + j))
                        + &prev[j as usize - 1] * rat(1, (3 * k + j + 1) * (3 * k + j - 1)),
                );
            }
            row.push(&prev[k as usize] * rat(1, 4 * k * (4 * k + 2)));
            self.odd.push(row);
        }
        Ok(&self.odd[k])
    }

    /// `I_{2k}(1)`, `k >= 1`.
    pub fn integral_even(&mut self, k: usize) -> Result<BigRational> {
        if k < 1 {
            return Err(Error::InvalidParameter("I_{2k} needs k >= 1".into()));
        }
        let kk = k as u64;
        let row = self.even(k - 1);
        Ok(alternating(row, |j| (3 * kk + j - 1) * (3 * kk + j) * (3 * kk + j + 1)))
    }

    /// `I_{2k+1}(1)`, `k >= 1`.
    pub fn integral_odd(&mut self, k: usize) -> Result<BigRational> {
        let kk = k as u64;
        let row = self.odd(k)?;
        Ok(alternating(row, |j| (3 * kk + j) * (3 * kk + j + 1) * (3 * kk + j + 2)))
    }

    /// `I_m(1)` for the linear schedule, any `m >= 0`.
    pub fn integral(&mut self, m: usize) -> Result<BigRational> {
        match m {
            0 => Ok(BigRational::one()),
            1 => Ok(rat(1, 2)),
            _ if m.is_multiple_of(2) => self.integral_even(m / 2),
            _ => self.integral_odd(m / 2),
        }
    }
}

fn alternating(row: &[BigRational], denom: impl Fn(u64) -> u64) -> BigRational {
    let mut sum = BigRational::zero();
    for (j, a) in row.iter().enumerate() {
        let term = a * rat(1, denom(j as u64));
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum
}

pub fn coeffs_even(k: usize) -> Vec<BigRational> {
    CoefficientTable::new().even(k).to_vec()
}

pub fn coeffs_odd(k: usize) -> Result<Vec<BigRational>> {
    Ok(CoefficientTable::new().odd(k)?.to_vec())
}

pub fn integral_even(k: usize) -> Result<BigRational> {
    CoefficientTable::new().integral_even(k)
}

pub fn integral_odd(k: usize) -> Result<BigRational> {
    CoefficientTable::new().integral_odd(k)
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

/// `6^{k+1} k! / (3k+1)!`
pub fn even_upper_bound(k: usize) -> BigRational {
    let k = k as u64;
    BigRational::new(num_traits::pow(BigInt::from(6), k as usize + 1) * factorial(k), factorial(3 * k + 1))
}

/// `6^{k+2} (k+1)! / (3k+2)!`
pub fn odd_upper_bound(k: usize) -> BigRational {
    let k = k as u64;
    BigRational::new(num_traits::pow(BigInt::from(6), k as usize + 2) * factorial(k + 1), factorial(3 * k + 2))
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or_else(|| if x.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureEstimate {
    pub value: f64,
    /// Richardson-based absolute error estimate
    pub error: f64,
}

/// Nested trapezoid sums on `n` uniform intervals.
fn nested_trapezoid(s: &Schedule, m: usize, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    let f: Vec<f64> = (0..=n).map(|i| s.eval(i as f64 * h)).collect();
    // innermost first: level j uses weight 1 - f for odd j, f for even j
    let mut inner = vec![1.0; n + 1];
    for j in (1..=m).rev() {
        let w = |i: usize| if j % 2 == 1 { 1.0 - f[i] } else { f[i] };
        let mut acc = vec![0.0; n + 1];
        for i in 1..=n {
            acc[i] = acc[i - 1] + 0.5 * h * (w(i - 1) * inner[i - 1] + w(i) * inner[i]);
        }
        inner = acc;
    }
    inner[n]
}

/// `I_m(1)` by nested cumulative trapezoid on `grid`, `grid/2` and `grid/4`
/// intervals. One Richardson step on the two finer grids gives the estimate;
/// the same step on the two coarser grids gives the error estimate.
pub fn integral_quadrature(s: &Schedule, m: usize, grid: usize, tol: f64) -> Result<QuadratureEstimate> {
    if m < 1 {
        return Err(Error::InvalidParameter("nested integral order m must be >= 1".into()));
    }
    if grid < 8 || !grid.is_multiple_of(4) {
        return Err(Error::InvalidParameter(format!("grid {grid} must be a multiple of 4 and >= 8")));
    }
    let t1 = nested_trapezoid(s, m, grid);
    let t2 = nested_trapezoid(s, m, grid / 2);
    let t4 = nested_trapezoid(s, m, grid / 4);
    let r1 = t1 + (t1 - t2) / 3.0;
    let r2 = t2 + (t2 - t4) / 3.0;
    let error = (r1 - r2).abs() / 15.0;
    if !(error <= tol * r1.abs()) {
        return Err(Error::QuadratureNonConvergence { m, error, tolerance: tol * r1.abs() });
    }
    Ok(QuadratureEstimate { value: r1, error })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntegralMethod {
    Recurrence,
    Quadrature,
}

impl fmt::Display for IntegralMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IntegralMethod::Recurrence => "recurrence",
            IntegralMethod::Quadrature => "quadrature",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralEntry {
    pub m: usize,
    pub value: f64,
    pub error: f64,
}

/// `I_m(1)` for `m = 1..=max_m` under one schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralTable {
    pub schedule_id: String,
    pub method: IntegralMethod,
    entries: Vec<IntegralEntry>,
}

impl IntegralTable {
    /// Exact recurrence values (rounded once to f64).
    pub fn linear(max_m: usize) -> Result<Self> {
        let mut coeffs = CoefficientTable::new();
        let entries = (1..=max_m)
            .map(|m| Ok(IntegralEntry { m, value: rational_to_f64(&coeffs.integral(m)?), error: 0.0 }))
            .collect::<Result<_>>()?;
        Ok(Self { schedule_id: Schedule::linear().id().into(), method: IntegralMethod::Recurrence, entries })
    }

    pub fn quadrature(s: &Schedule, max_m: usize, grid: usize, tol: f64) -> Result<Self> {
        let mut entries = Vec::with_capacity(max_m);
        for m in 1..=max_m {
            let q = integral_quadrature(s, m, grid, tol)?;
            if !(q.value > 0.0) {
                return Err(Error::InvalidSchedule(format!("{}: I_{m} = {} is not positive", s.id(), q.value)));
            }
            entries.push(IntegralEntry { m, value: q.value, error: q.error });
        }
        Ok(Self { schedule_id: s.id().into(), method: IntegralMethod::Quadrature, entries })
    }

    /// Recurrence for the linear schedule, default quadrature otherwise.
    pub fn for_schedule(s: &Schedule, max_m: usize) -> Result<Self> {
        if s.is_linear() {
            let mut t = Self::linear(max_m)?;
            t.schedule_id = s.id().into();
            Ok(t)
        } else {
            Self::quadrature(s, max_m, DEFAULT_GRID, DEFAULT_QUAD_TOL)
        }
    }

    pub fn max_m(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[IntegralEntry] {
        &self.entries
    }

    pub fn value(&self, m: usize) -> Result<f64> {
        self.entry(m).map(|e| e.value)
    }

    /// Value plus error estimate: what the bounds use.
    pub fn upper(&self, m: usize) -> Result<f64> {
        self.entry(m).map(|e| e.value + e.error)
    }

    fn entry(&self, m: usize) -> Result<&IntegralEntry> {
        if m == 0 {
            return Err(Error::MissingIntegral(0));
        }
        self.entries.get(m - 1).ok_or(Error::MissingIntegral(m))
    }

    /// CSV `{m, value, method, error}`.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["m", "value", "method", "error"])?;
        for e in &self.entries {
            out.write_record([e.m.to_string(), format!("{:e}", e.value), self.method.to_string(), format!("{:e}", e.error)])?;
        }
        out.flush()?;
        Ok(())
    }
}
