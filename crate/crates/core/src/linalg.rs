//! Dense helpers: LU solves and singular-value probes by power iteration.

use nalgebra::{DMatrix, DVector, LU, Dyn};

pub const POWER_STEPS: usize = 50;
pub const POWER_TOL: f64 = 1e-8;

fn start_vector(n: usize) -> DVector<f64> {
    // deterministic and not orthogonal to smooth or oscillating modes
    let v = DVector::from_fn(n, |i, _| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.7548776662).fract());
    let norm = v.norm();
    v / norm
}

/// Largest singular value by power iteration on MᵀM.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    let n = m.ncols();
    if n == 0 {
        return 0.0;
    }
    let mut v = start_vector(n);
    let mut sigma = 0.0;
    for _ in 0..POWER_STEPS {
        let w = m.transpose() * (m * &v);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm.sqrt();
        v = w / norm;
        if (next - sigma).abs() <= POWER_TOL * next {
            return next;
        }
        sigma = next;
    }
    sigma
}

/// A factored square matrix with solves for M and Mᵀ.
pub struct Factored {
    m: DMatrix<f64>,
    lu: LU<f64, Dyn, Dyn>,
    lu_t: LU<f64, Dyn, Dyn>,
    n: usize,
}

impl Factored {
    pub fn new(m: &DMatrix<f64>) -> Self {
        Self { m: m.clone(), lu: m.clone().lu(), lu_t: m.transpose().lu(), n: m.nrows() }
    }

    pub fn solve(&self, b: &DVector<f64>) -> Option<DVector<f64>> {
        self.lu.solve(b).filter(|x| x.iter().all(|v| v.is_finite()))
    }

    pub fn solve_transpose(&self, b: &DVector<f64>) -> Option<DVector<f64>> {
        self.lu_t.solve(b).filter(|x| x.iter().all(|v| v.is_finite()))
    }

    /// Smallest singular value by inverse iteration on (MᵀM)⁻¹, read off
    /// through the Rayleigh quotient ‖Mz‖/‖z‖.
    pub fn smallest_singular_value(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let mut v = start_vector(self.n);
        let mut sigma = f64::INFINITY;
        for _ in 0..POWER_STEPS {
            let Some(y) = self.solve_transpose(&v) else { return 0.0 };
            let Some(z) = self.solve(&y) else { return 0.0 };
            let norm = z.norm();
            if !norm.is_finite() || norm == 0.0 {
                return 0.0;
            }
            v = z / norm;
            let next = (&self.m * &v).norm();
            if (next - sigma).abs() <= POWER_TOL * next {
                return next;
            }
            sigma = next;
        }
        sigma
    }
}
