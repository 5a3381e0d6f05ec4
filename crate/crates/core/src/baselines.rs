//! Classical regularizing methods for first-kind equations, on a Nyström grid.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fredholm2::estimate_spectrum;
use crate::linalg::{spectral_norm, Factored};
use crate::numerics::{gauss_legendre, nystrom_matrix, Grid1D, GridFunction};
use crate::problems::FirstKindProblem;

pub const DEFAULT_ALPHA: f64 = 1e-4;
pub const DEFAULT_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineParams {
    pub alpha: f64,
    /// Step of the Fridman iteration; `None` uses the smallest characteristic number.
    pub lambda_step: Option<f64>,
    /// Step of the Krasnoselskii iteration; `None` uses 0.5/‖A*A‖.
    pub nu: Option<f64>,
    pub radius: f64,
    pub delta: f64,
    pub gamma: f64,
    pub c1: f64,
    pub c2: f64,
    pub max_iter: usize,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            lambda_step: None,
            nu: None,
            radius: 1.0,
            delta: 0.0,
            gamma: 0.0,
            c1: 1.0,
            c2: 1.0,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

impl BaselineParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if !(self.delta >= 0.0 && self.gamma >= 0.0) {
            return Err(Error::InvalidArgument("delta and gamma must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Default grid for the baselines: 64 Gauss nodes on [0, 1].
pub fn default_grid() -> Grid1D {
    gauss_legendre(64, 0.0, 1.0).expect("fixed size")
}

/// The discretized operator A and free term f of a problem.
#[derive(Debug, Clone)]
pub struct Discrete {
    pub grid: Grid1D,
    pub a: DMatrix<f64>,
    pub f: GridFunction,
}

impl Discrete {
    pub fn new(problem: &FirstKindProblem, grid: &Grid1D) -> Self {
        Self { grid: grid.clone(), a: nystrom_matrix(&*problem.kernel, grid), f: problem.sample_f(grid) }
    }

    pub fn apply(&self, psi: &GridFunction) -> GridFunction {
        GridFunction::from_vector(&self.grid, &(&self.a * psi.to_vector()))
    }

    /// A* = W⁻¹AᵀW, the adjoint in the weighted inner product.
    pub fn apply_adjoint(&self, g: &GridFunction) -> GridFunction {
        let w = self.grid.weights();
        let wg = DVector::from_fn(w.len(), |i, _| w[i] * g.values[i]);
        let v = self.a.transpose() * wg;
        GridFunction::new(self.grid.clone(), v.iter().zip(w).map(|(x, wi)| x / wi).collect()).expect("sizes match")
    }

    /// Aψ − f
    pub fn residual(&self, psi: &GridFunction) -> GridFunction {
        self.apply(psi).sub(&self.f)
    }

    /// L₂ operator norm of A*A.
    pub fn normal_norm(&self) -> f64 {
        let w = self.grid.weights();
        let n = w.len();
        let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
        // D^½ A D^−½ carries the weighted norm to the Euclidean one
        let b = DMatrix::from_fn(n, n, |i, j| sw[i] * self.a[(i, j)] / sw[j]);
        let s = spectral_norm(&b);
        s * s
    }

    fn solve_shifted(&self, diag: &[f64], rhs: &GridFunction) -> Result<GridFunction> {
        let mut m = self.a.clone();
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] += d;
        }
        let x = Factored::new(&m)
            .solve(&rhs.to_vector())
            .ok_or_else(|| Error::Degenerate("regularized system is singular".into()))?;
        Ok(GridFunction::from_vector(&self.grid, &x))
    }
}

/// αψ + ∫kψ = f
pub fn lavrentiev(problem: &FirstKindProblem, grid: &Grid1D, alpha: f64) -> Result<GridFunction> {
    let d = Discrete::new(problem, grid);
    lavrentiev_discrete(&d, alpha)
}

pub fn lavrentiev_discrete(d: &Discrete, alpha: f64) -> Result<GridFunction> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    d.solve_shifted(&vec![alpha; d.grid.len()], &d.f)
}

/// αp₀(x)ψ(x) + ∫kψ = f
pub fn tikhonov_weighted(
    problem: &FirstKindProblem,
    grid: &Grid1D,
    alpha: f64,
    p0: impl Fn(f64) -> f64,
) -> Result<GridFunction> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    let diag: Vec<f64> = grid.nodes().iter().map(|&x| alpha * p0(x)).collect();
    if diag.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidArgument("p0 must be positive on the grid".into()));
    }
    let d = Discrete::new(problem, grid);
    d.solve_shifted(&diag, &d.f)
}

/// Iterates ψ₀, ψ₁, … with the residual norms ‖Aψₙ − f‖.
#[derive(Debug, Clone)]
pub struct IterHistory {
    pub iterates: Vec<GridFunction>,
    pub residuals: Vec<f64>,
    /// Set when the iteration stopped before max_iter.
    pub converged: bool,
}

impl IterHistory {
    fn start(d: &Discrete, psi0: &GridFunction) -> Self {
        Self { iterates: vec![psi0.clone()], residuals: vec![d.residual(psi0).l2_norm()], converged: false }
    }

    fn push(&mut self, d: &Discrete, psi: GridFunction, stop: Option<f64>) -> bool {
        let step = psi.sub(self.iterates.last().expect("nonempty")).l2_norm();
        self.residuals.push(d.residual(&psi).l2_norm());
        self.iterates.push(psi);
        if stop.is_some_and(|tol| step <= tol) {
            self.converged = true;
        }
        self.converged
    }

    pub fn last(&self) -> &GridFunction {
        self.iterates.last().expect("history is never empty")
    }

    /// L₂ distance of every iterate from a reference function.
    pub fn errors_against(&self, reference: &GridFunction) -> Vec<f64> {
        self.iterates.iter().map(|p| p.sub(reference).l2_norm()).collect()
    }
}

fn check_start(d: &Discrete, psi0: &GridFunction) -> Result<()> {
    if psi0.values.len() != d.grid.len() {
        return Err(Error::InvalidArgument("initial guess lives on another grid".into()));
    }
    Ok(())
}

/// Smallest characteristic number of a symmetric positive kernel on the grid.
pub fn smallest_char_number(problem: &FirstKindProblem, grid: &Grid1D) -> Result<f64> {
    let spec = estimate_spectrum(&*problem.kernel, grid, 1)?;
    match spec.char_numbers.first() {
        Some(&l1) if l1 > 0.0 => Ok(l1),
        _ => Err(Error::InvalidArgument("kernel is not positive definite".into())),
    }
}

fn check_fridman_step(problem: &FirstKindProblem, grid: &Grid1D, step: f64) -> Result<()> {
    let l1 = smallest_char_number(problem, grid)?;
    if !(step > 0.0 && step < 2.0 * l1) {
        return Err(Error::StepBound { step, bound: 2.0 * l1 });
    }
    Ok(())
}

/// ψₙ₊₁ = ψₙ + λ(f − Aψₙ), for 0 < λ < 2λ₁.
pub fn fridman_iterate(
    problem: &FirstKindProblem,
    grid: &Grid1D,
    lambda_step: f64,
    psi0: &GridFunction,
    max_iter: usize,
    stop: Option<f64>,
) -> Result<IterHistory> {
    check_fridman_step(problem, grid, lambda_step)?;
    let d = Discrete::new(problem, grid);
    check_start(&d, psi0)?;
    let mut h = IterHistory::start(&d, psi0);
    for _ in 0..max_iter {
        let psi = h.last();
        let next = psi.zip_map(&d.residual(psi), |p, r| p - lambda_step * r);
        if h.push(&d, next, stop) {
            break;
        }
    }
    Ok(h)
}

/// ψₙ₊₁ = (I − νA*A)ψₙ + νA*f, for 0 < ν < 2/‖A*A‖.
pub fn krasnoselskii_iterate(
    problem: &FirstKindProblem,
    grid: &Grid1D,
    nu: Option<f64>,
    psi0: &GridFunction,
    max_iter: usize,
    stop: Option<f64>,
) -> Result<IterHistory> {
    let d = Discrete::new(problem, grid);
    check_start(&d, psi0)?;
    let norm = d.normal_norm();
    let bound = 2.0 / norm;
    let nu = nu.unwrap_or(0.5 / norm);
    if !(nu > 0.0 && nu < bound) {
        return Err(Error::StepBound { step: nu, bound });
    }
    let mut h = IterHistory::start(&d, psi0);
    for _ in 0..max_iter {
        let psi = h.last();
        let g = d.apply_adjoint(&d.residual(psi));
        let next = psi.zip_map(&g, |p, v| p - nu * v);
        if h.push(&d, next, stop) {
            break;
        }
    }
    Ok(h)
}

/// Mean of φ₀..φₘ with φₙ = φₙ₋₁ + λ(f − Aφₙ₋₁); λ = 1 is the classical unit step.
pub fn averaged_iterate(
    problem: &FirstKindProblem,
    grid: &Grid1D,
    lambda_step: f64,
    phi0: &GridFunction,
    m: usize,
) -> Result<GridFunction> {
    check_fridman_step(problem, grid, lambda_step)?;
    let d = Discrete::new(problem, grid);
    check_start(&d, phi0)?;
    let mut phi = phi0.clone();
    let mut sum = phi0.clone();
    for _ in 0..m {
        phi = phi.zip_map(&d.residual(&phi), |p, r| p - lambda_step * r);
        sum = sum.add(&phi);
    }
    Ok(sum.scale(1.0 / (m as f64 + 1.0)))
}

/// (αI + A)ψₙ₊₁ = αψₙ + f with a single factorization.
pub fn implicit_iterate(
    problem: &FirstKindProblem,
    grid: &Grid1D,
    alpha: f64,
    psi0: &GridFunction,
    max_iter: usize,
    stop: Option<f64>,
) -> Result<IterHistory> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    let d = Discrete::new(problem, grid);
    check_start(&d, psi0)?;
    let mut m = d.a.clone();
    for i in 0..grid.len() {
        m[(i, i)] += alpha;
    }
    let lu = Factored::new(&m);
    let mut h = IterHistory::start(&d, psi0);
    for _ in 0..max_iter {
        let rhs = h.last().zip_map(&d.f, |p, f| alpha * p + f);
        let x = lu.solve(&rhs.to_vector()).ok_or_else(|| Error::Degenerate("implicit system is singular".into()))?;
        if h.push(&d, GridFunction::from_vector(grid, &x), stop) {
            break;
        }
    }
    Ok(h)
}

/// ψₙ₊₁ = ψₙ − βₙA*(Aψₙ − f) with the step minimizing the next residual.
/// A vanishing gradient ends the run with `converged` set.
pub fn steepest_descent(
    problem: &FirstKindProblem,
    grid: &Grid1D,
    psi0: &GridFunction,
    max_iter: usize,
    stop: Option<f64>,
) -> Result<IterHistory> {
    let d = Discrete::new(problem, grid);
    check_start(&d, psi0)?;
    let mut h = IterHistory::start(&d, psi0);
    for _ in 0..max_iter {
        let psi = h.last();
        let g = d.apply_adjoint(&d.residual(psi));
        let gn = g.l2_norm();
        let ag = d.apply(&g).l2_norm();
        if gn == 0.0 || ag == 0.0 {
            h.converged = true;
            break;
        }
        let beta = (gn / ag).powi(2);
        let next = psi.zip_map(&g, |p, v| p - beta * v);
        if h.push(&d, next, stop) {
            break;
        }
    }
    Ok(h)
}

/// Minimizer of ‖Aψ − f‖ over ‖ψ‖ ≤ R, from the eigen-expansion of a symmetric kernel.
///
/// Inside the ball this is the Picard sum Σcₙλₙψₙ. Otherwise the
/// coefficients are cₙλₙ/(1 + νλₙ²) with ν > 0 fixed by Σaₙ² = R².
pub fn quasisolution(problem: &FirstKindProblem, grid: &Grid1D, radius: f64) -> Result<GridFunction> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidRadius(format!("radius must be positive and finite, got {radius}")));
    }
    let spec = estimate_spectrum(&*problem.kernel, grid, grid.len())?;
    let f = problem.sample_f(grid);
    let c: Vec<f64> = spec.eigenfunctions.iter().map(|e| f.inner(e)).collect();
    let lam = &spec.char_numbers;
    let norm_sq = |nu: f64| -> f64 {
        c.iter().zip(lam).map(|(c, l)| (c * l / (1.0 + nu * l * l)).powi(2)).sum()
    };
    let r2 = radius * radius;
    let nu = if norm_sq(0.0) <= r2 {
        0.0
    } else {
        let mut hi = 1.0 / lam.iter().map(|l| l * l).fold(f64::INFINITY, f64::min);
        let mut tries = 0;
        while norm_sq(hi) > r2 {
            hi *= 10.0;
            tries += 1;
            if tries > 400 || !hi.is_finite() {
                return Err(Error::InvalidRadius(format!("could not bracket the multiplier for R = {radius}")));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if norm_sq(mid) > r2 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let mut psi = grid.zeros();
    for ((e, c), l) in spec.eigenfunctions.iter().zip(&c).zip(lam) {
        let a = c * l / (1.0 + nu * l * l);
        psi = psi.zip_map(e, |p, v| p + a * v);
    }
    Ok(psi)
}

/// First n with ‖ψₙ₊₁ − ψₙ‖ ≤ c₁δ + c₂γ.
pub fn stopping_rule(history: &[GridFunction], delta: f64, gamma: f64, c1: f64, c2: f64) -> Option<usize> {
    let bound = c1 * delta + c2 * gamma;
    history.windows(2).position(|w| w[1].sub(&w[0]).l2_norm() <= bound)
}
