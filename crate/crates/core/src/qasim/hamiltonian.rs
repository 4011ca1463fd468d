use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graphs::{Edge, MarkedBall};
use crate::schedule::Schedule;

pub const DEFAULT_HILBERT_CAP: usize = 24;

/// `H(t) = -(1 - f(t/T))/α Σ_i σ_x^i - f(t/T) Σ_{(a,b)} (1 - σ_z^a σ_z^b)/2`
/// on `n` qubits, bit `i` of a basis index is node `i`.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    n: usize,
    /// number of cut edges per basis state
    cut: Vec<f64>,
    alpha: f64,
    t_total: f64,
    schedule: Schedule,
}

/// Builds the per-basis-state cut count of `edges`.
pub(crate) fn cut_diagonal(n: usize, edges: &[Edge]) -> Vec<f64> {
    let dim = 1usize << n;
    let mut cut = vec![0.0; dim];
    for (z, c) in cut.iter_mut().enumerate() {
        *c = edges.iter().filter(|&&(a, b)| ((z >> a) ^ (z >> b)) & 1 == 1).count() as f64;
    }
    cut
}

impl Hamiltonian {
    pub fn for_ball(ball: &MarkedBall, t_total: f64, alpha: f64, schedule: &Schedule, hilbert_cap: usize) -> Result<Self> {
        if ball.node_count() > hilbert_cap {
            return Err(Error::HilbertCapExceeded { nodes: ball.node_count(), cap: hilbert_cap });
        }
        Self::from_edges(ball.node_count(), ball.edges(), t_total, alpha, schedule)
    }

    pub fn from_edges(n: usize, edges: &[Edge], t_total: f64, alpha: f64, schedule: &Schedule) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha={alpha} must be finite and > 0")));
        }
        if !(t_total >= 0.0 && t_total.is_finite()) {
            return Err(Error::InvalidParameter(format!("T={t_total} must be finite and >= 0")));
        }
        if n >= usize::BITS as usize - 1 {
            return Err(Error::HilbertCapExceeded { nodes: n, cap: usize::BITS as usize - 2 });
        }
        if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a as usize >= n || b as usize >= n || a == b) {
            return Err(Error::InvalidParameter(format!("edge ({a}, {b}) invalid for {n} qubits")));
        }
        Ok(Self { n, cut: cut_diagonal(n, edges), alpha, t_total, schedule: schedule.clone() })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn t_total(&self) -> f64 {
        self.t_total
    }

    /// Schedule value at time `t`; `f(1)` when `T = 0`.
    fn f_at(&self, t: f64) -> f64 {
        if self.t_total == 0.0 {
            return self.schedule.eval(1.0);
        }
        self.schedule.eval((t / self.t_total).clamp(0.0, 1.0))
    }

    /// Upper bound on the operator norm over the whole schedule.
    pub fn norm_bound(&self) -> f64 {
        let max_cut = self.cut.iter().copied().fold(0.0, f64::max);
        self.n as f64 / self.alpha + max_cut
    }

    /// `out = H(t) v`.
    pub fn apply_into(&self, t: f64, v: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        let dim = self.dim();
        if v.len() != dim || out.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: if v.len() != dim { v.len() } else { out.len() } });
        }
        let f = self.f_at(t);
        let x = -(1.0 - f) / self.alpha;
        for ((o, a), c) in out.iter_mut().zip(v).zip(&self.cut) {
            *o = a * (-f * c);
        }
        if x != 0.0 {
            for i in 0..self.n {
                let stride = 1usize << i;
                for block in (0..dim).step_by(2 * stride) {
                    for j in block..block + stride {
                        let (lo, hi) = (v[j], v[j + stride]);
                        out[j] += hi * x;
                        out[j + stride] += lo * x;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, t: f64, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.apply_into(t, v, &mut out)?;
        Ok(out)
    }

    /// `out = -i H(t) v`, the Schrödinger right-hand side with ħ = 1.
    pub(crate) fn rhs(&self, t: f64, v: &[Complex64], out: &mut [Complex64]) {
        self.apply_into(t, v, out).expect("dimensions fixed by the integrator");
        for o in out.iter_mut() {
            *o = Complex64::new(o.im, -o.re);
        }
    }
}

pub fn uniform_state(n: usize) -> Vec<Complex64> {
    let dim = 1usize << n;
    vec![Complex64::new(1.0 / (dim as f64).sqrt(), 0.0); dim]
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// `⟨ψ|O_X|ψ⟩ / ⟨ψ|ψ⟩` with `O_X = (1 - σ_z^a σ_z^b)/2`.
pub fn edge_energy(v: &[Complex64], marked: Edge) -> f64 {
    let (a, b) = marked;
    let mut cut = 0.0;
    let mut total = 0.0;
    for (z, amp) in v.iter().enumerate() {
        let p = amp.norm_sqr();
        total += p;
        if ((z >> a) ^ (z >> b)) & 1 == 1 {
            cut += p;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        cut / total
    }
}
