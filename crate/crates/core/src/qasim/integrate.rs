use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hamiltonian::{norm, uniform_state, Hamiltonian};
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-8;
const MAX_STEPS: usize = 50_000_000;
/// fixed-step RK4 uses `h ‖H‖ ≤` this
const RK4_STEP_SCALE: f64 = 0.1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    /// Dormand-Prince 5(4), adaptive
    #[default]
    Dopri5,
    /// classical RK4 at step h and h/2, Richardson-combined
    Rk4Richardson,
}

impl Integrator {
    pub fn name(self) -> &'static str {
        match self {
            Integrator::Dopri5 => "dopri5",
            Integrator::Rk4Richardson => "rk4-richardson",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dopri5" => Ok(Integrator::Dopri5),
            "rk4-richardson" | "rk4" => Ok(Integrator::Rk4Richardson),
            other => Err(Error::InvalidParameter(format!("unknown integrator {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Evolution {
    pub state: Vec<Complex64>,
    pub steps: usize,
    pub rejected: usize,
    /// `| ‖ψ(T)‖ - 1 |`
    pub norm_drift: f64,
}

/// Integrates `i dψ/dt = H(t) ψ` from the uniform superposition to `T`.
pub fn evolve(h: &Hamiltonian, method: Integrator, tol: f64) -> Result<Evolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be > 0")));
    }
    let psi0 = uniform_state(h.qubits());
    if h.t_total() == 0.0 {
        return Ok(Evolution { state: psi0, steps: 0, rejected: 0, norm_drift: 0.0 });
    }
    let (state, steps, rejected) = match method {
        Integrator::Dopri5 => dopri5(h, psi0, tol)?,
        Integrator::Rk4Richardson => {
            let (s, n) = rk4_richardson(h, psi0);
            (s, n, 0)
        }
    };
    let norm_drift = (norm(&state) - 1.0).abs();
    let allowed = 10.0 * tol;
    if norm_drift > allowed {
        return Err(Error::NormDrift { drift: norm_drift, allowed });
    }
    Ok(Evolution { state, steps, rejected, norm_drift })
}

fn axpy(out: &mut [Complex64], y: &[Complex64], h: f64, terms: &[(f64, &[Complex64])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(c, k) in terms {
            if c != 0.0 {
                acc += k[i] * c;
            }
        }
        *o = y[i] + acc * h;
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth- minus fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Adaptive Dormand-Prince with FSAL. The local error estimate, in the
/// Euclidean norm of the state, is held below `tol · h / T` (error per unit
/// step), so `tol` budgets the whole evolution rather than each step.
fn dopri5(h: &Hamiltonian, mut y: Vec<Complex64>, tol: f64) -> Result<(Vec<Complex64>, usize, usize)> {
    let t_end = h.t_total();
    let dim = y.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut k: Vec<Vec<Complex64>> = (0..7).map(|_| vec![zero; dim]).collect();
    let mut tmp = vec![zero; dim];
    let mut y_new = vec![zero; dim];
    let mut t = 0.0;
    let mut step = (0.1 / h.norm_bound().max(1e-12)).min(t_end);
    let (mut accepted, mut rejected) = (0usize, 0usize);
    h.rhs(t, &y, &mut k[0]);
    while t < t_end {
        if accepted + rejected > MAX_STEPS {
            return Err(Error::StepSizeUnderflow { t, h: step });
        }
        let last = t + step >= t_end;
        if last {
            step = t_end - t;
        }
        if step <= 1e-14 * t_end.max(1.0) {
            return Err(Error::StepSizeUnderflow { t, h: step });
        }
        {
            let (k0, rest) = k.split_at_mut(1);
            axpy(&mut tmp, &y, step, &[(A21, &k0[0])]);
            h.rhs(t + C2 * step, &tmp, &mut rest[0]);
        }
        axpy(&mut tmp, &y, step, &[(A31, &k[0]), (A32, &k[1])]);
        h.rhs(t + C3 * step, &tmp, &mut k[2]);
        axpy(&mut tmp, &y, step, &[(A41, &k[0]), (A42, &k[1]), (A43, &k[2])]);
        h.rhs(t + C4 * step, &tmp, &mut k[3]);
        axpy(&mut tmp, &y, step, &[(A51, &k[0]), (A52, &k[1]), (A53, &k[2]), (A54, &k[3])]);
        h.rhs(t + C5 * step, &tmp, &mut k[4]);
        axpy(&mut tmp, &y, step, &[(A61, &k[0]), (A62, &k[1]), (A63, &k[2]), (A64, &k[3]), (A65, &k[4])]);
        h.rhs(t + step, &tmp, &mut k[5]);
        axpy(&mut y_new, &y, step, &[(B1, &k[0]), (B3, &k[2]), (B4, &k[3]), (B5, &k[4]), (B6, &k[5])]);
        h.rhs(t + step, &y_new, &mut k[6]);

        let mut err2 = 0.0;
        for i in 0..dim {
            let e = (k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7) * step;
            err2 += e.norm_sqr();
        }
        let err = err2.sqrt() / (tol * step / t_end);
        if err <= 1.0 {
            t = if last { t_end } else { t + step };
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            accepted += 1;
        } else {
            rejected += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        step *= if err <= 1.0 { factor } else { factor.min(1.0) };
    }
    Ok((y, accepted, rejected))
}

fn rk4_fixed(h: &Hamiltonian, y0: &[Complex64], steps: usize) -> Vec<Complex64> {
    let dim = y0.len();
    let zero = Complex64::new(0.0, 0.0);
    let dt = h.t_total() / steps as f64;
    let mut y = y0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![zero; dim], vec![zero; dim], vec![zero; dim], vec![zero; dim], vec![zero; dim]);
    for s in 0..steps {
        let t = s as f64 * dt;
        h.rhs(t, &y, &mut k1);
        axpy(&mut tmp, &y, dt, &[(0.5, &k1)]);
        h.rhs(t + 0.5 * dt, &tmp, &mut k2);
        axpy(&mut tmp, &y, dt, &[(0.5, &k2)]);
        h.rhs(t + 0.5 * dt, &tmp, &mut k3);
        axpy(&mut tmp, &y, dt, &[(1.0, &k3)]);
        h.rhs(t + dt, &tmp, &mut k4);
        for i in 0..dim {
            y[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
        }
    }
    y
}

/// RK4 on `n` and `2n` steps; `y_2n + (y_2n - y_n)/15` cancels the leading
/// error term.
fn rk4_richardson(h: &Hamiltonian, y0: Vec<Complex64>) -> (Vec<Complex64>, usize) {
    let n = ((h.t_total() * h.norm_bound() / RK4_STEP_SCALE).ceil() as usize).max(1);
    let coarse = rk4_fixed(h, &y0, n);
    let fine = rk4_fixed(h, &y0, 2 * n);
    let out = fine.iter().zip(&coarse).map(|(f, c)| f + (f - c) / 15.0).collect();
    (out, 3 * n)
}
