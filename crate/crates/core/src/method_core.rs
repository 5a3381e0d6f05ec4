//! The first-kind solver built from two second-kind equations.
//!
//! Version 2 works on grids: ψ₁ solves ψ₁ = μ∫Kψ₁ + F₁ on [0,1], the
//! auxiliary functions ρ and κ live on [−1,0], and ψ₀ solves the same
//! equation with the free term F₀. Version 1 works on the trigonometric
//! coefficients at r = 1.

use std::f64::consts::SQRT_2;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fredholm2::{SecondKindSolver, SecondKindSystem, ON_SPECTRUM_TOL};
use crate::kernels::{
    kernel_l_kernel, poisson_h, resolvent_h_kernel, resolvent_l_kernel, validate_lambda, PoissonParams, SeriesKernel,
    DEFAULT_MIN_REL_DIST,
};
use crate::linalg::{spectral_norm, Factored};
use crate::numerics::{
    fourier_coeffs, gauss_legendre, integrate_fn, kernel_fourier_coeffs, nystrom_matrix, nystrom_rows,
    weighted_kernel_matrix, FourierCoeffs, Grid1D, GridFunction, Kernel, KernelFourierCoeffs, DEFAULT_FOURIER_N,
    DEFAULT_QUAD_ORDER,
};
use crate::problems::{FirstKindProblem, SharedKernel};

pub const DEFAULT_MU: f64 = 0.1;
pub const DEFAULT_N_OUT: usize = 64;
pub const DEFAULT_MU_CANDIDATES: [f64; 5] = [0.05, 0.1, 0.2, -0.1, 0.5];
/// σ_min/‖I − μK‖ below this rejects a μ candidate.
pub const MU_PROBE_TOL: f64 = 1e-6;
pub const DEFAULT_THRESHOLD: f64 = 0.05;
pub const DEFAULT_V1_TERMS: usize = 16;
/// Residuals are measured on 8 panels of 16 nodes, independent of the solution grid.
const VERIFY_PANELS: usize = 8;
const VERIFY_ORDER: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodParams {
    poisson: PoissonParams,
    mu: f64,
    quad_order: usize,
    n_out: usize,
    fourier_n: usize,
}

impl MethodParams {
    /// Rejects λ near any excluded value, including λ = 0.
    pub fn new(poisson: PoissonParams, mu: f64) -> Result<Self> {
        validate_lambda(&poisson, DEFAULT_MIN_REL_DIST).map_err(Error::Excluded)?;
        Self::unvalidated(poisson, mu)
    }

    /// Skips the λ check. Meant for stage-by-stage checks such as λ = 0,
    /// where the construction collapses to ψ = ψ₁ but every stage is still defined.
    /// The resolvents still refuse values at which they blow up.
    pub fn unvalidated(poisson: PoissonParams, mu: f64) -> Result<Self> {
        if !mu.is_finite() || mu == 0.0 {
            return Err(Error::InvalidArgument(format!("mu must be finite and nonzero, got {mu}")));
        }
        Ok(Self { poisson, mu, quad_order: DEFAULT_QUAD_ORDER, n_out: DEFAULT_N_OUT, fourier_n: DEFAULT_FOURIER_N })
    }

    pub fn with_mu(self, mu: f64) -> Result<Self> {
        if !mu.is_finite() || mu == 0.0 {
            return Err(Error::InvalidArgument(format!("mu must be finite and nonzero, got {mu}")));
        }
        Ok(Self { mu, ..self })
    }

    pub fn with_grid(self, n_out: usize) -> Result<Self> {
        if n_out < 2 {
            return Err(Error::InvalidArgument(format!("grid needs at least 2 nodes, got {n_out}")));
        }
        Ok(Self { n_out, ..self })
    }

    pub fn with_quad_order(self, quad_order: usize) -> Result<Self> {
        if quad_order == 0 {
            return Err(Error::InvalidArgument("quadrature order must be at least 1".into()));
        }
        Ok(Self { quad_order, ..self })
    }

    pub fn with_fourier_n(self, fourier_n: usize) -> Result<Self> {
        if fourier_n == 0 {
            return Err(Error::InvalidArgument("Fourier truncation must be at least 1".into()));
        }
        Ok(Self { fourier_n, ..self })
    }

    pub fn poisson(&self) -> &PoissonParams {
        &self.poisson
    }

    pub fn lambda(&self) -> f64 {
        self.poisson.lambda()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn quad_order(&self) -> usize {
        self.quad_order
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn fourier_n(&self) -> usize {
        self.fourier_n
    }

    /// Gauss grid on [0, 1].
    pub fn pos_grid(&self) -> Grid1D {
        gauss_legendre(self.n_out, 0.0, 1.0).expect("n_out validated")
    }

    /// Gauss grid on [−1, 0].
    pub fn neg_grid(&self) -> Grid1D {
        gauss_legendre(self.n_out, -1.0, 0.0).expect("n_out validated")
    }
}

impl Default for MethodParams {
    fn default() -> Self {
        Self::new(PoissonParams::default(), DEFAULT_MU).expect("defaults are valid")
    }
}

/// K(x,ξ) = k(x,ξ) + λ∫₀¹H(x,ζ)k(ζ,ξ)dζ.
#[derive(Clone)]
pub struct ComposedKernel {
    k: SharedKernel,
    h: SeriesKernel,
    lambda: f64,
    r: f64,
    quad_order: usize,
}

impl ComposedKernel {
    pub fn base(&self) -> &SharedKernel {
        &self.k
    }

    /// Breaks for the ζ-integral: kinks of k(·,ξ) and a geometric grading
    /// around the peaks of H(x,·) when r is close to 1.
    fn zeta_breaks(&self, x: f64, xi: f64) -> Vec<f64> {
        let mut brk = self.k.col_breaks(xi);
        brk.extend(self.k.outer_breaks());
        brk.push(x);
        if self.r > 0.9 {
            for c in [x - 1.0, x, x + 1.0] {
                let mut d = 1.0 - self.r;
                while d < 1.0 {
                    brk.push(c - d);
                    brk.push(c + d);
                    d *= 2.0;
                }
            }
        }
        brk
    }

    /// Discrete operator on a grid: A + λ·[H(xᵢ,xⱼ)wⱼ]·A with A the product-integration matrix of k.
    pub fn matrix(&self, grid: &Grid1D) -> DMatrix<f64> {
        let a = nystrom_matrix(&*self.k, grid);
        if self.lambda == 0.0 {
            return a;
        }
        let hw = weighted_kernel_matrix(|x, z| self.h.eval(x, z), grid.nodes(), grid);
        &a + (hw * &a) * self.lambda
    }
}

impl Kernel for ComposedKernel {
    fn eval(&self, x: f64, xi: f64) -> f64 {
        let base = self.k.eval(x, xi);
        if self.lambda == 0.0 {
            return base;
        }
        let brk = self.zeta_breaks(x, xi);
        let integral = integrate_fn(|z| self.h.eval(x, z) * self.k.eval(z, xi), 0.0, 1.0, &brk, self.quad_order);
        base + self.lambda * integral
    }
    fn row_breaks(&self, x: f64) -> Vec<f64> {
        self.k.row_breaks(x)
    }
    fn col_breaks(&self, xi: f64) -> Vec<f64> {
        self.k.col_breaks(xi)
    }
    fn outer_breaks(&self) -> Vec<f64> {
        self.k.outer_breaks()
    }
}

/// Kernel of the second-kind equations. Depends only on k, r and λ.
pub fn build_k(k: SharedKernel, params: &MethodParams) -> Result<ComposedKernel> {
    let h = resolvent_h_kernel(params.poisson())?;
    Ok(ComposedKernel { k, h, lambda: params.lambda(), r: params.poisson().r(), quad_order: params.quad_order })
}

fn h_matrix(xs: &[f64], grid: &Grid1D, params: &MethodParams) -> Result<DMatrix<f64>> {
    let h = resolvent_h_kernel(params.poisson())?;
    Ok(weighted_kernel_matrix(|x, z| h.eval(x, z), xs, grid))
}

fn apply(m: &DMatrix<f64>, f: &GridFunction, out_grid: &Grid1D) -> GridFunction {
    GridFunction::from_vector(out_grid, &(m * f.to_vector()))
}

/// F₁ = −μ[f + λ∫₀¹Hf] on the grid of f.
// The summary prints the limits as −1..0 and elsewhere drops λ; this is the form the derivation produces.
pub fn build_f1(f: &GridFunction, params: &MethodParams) -> Result<GridFunction> {
    let hw = h_matrix(f.grid.nodes(), &f.grid, params)?;
    let hf = apply(&hw, f, &f.grid);
    let (mu, lam) = (params.mu, params.lambda());
    Ok(f.zip_map(&hf, |a, b| -mu * (a + lam * b)))
}

/// Factored I − μK for repeated solves with different free terms.
pub struct PsiSolver {
    solver: SecondKindSolver,
    grid: Grid1D,
}

impl PsiSolver {
    pub fn new(kernel: &ComposedKernel, params: &MethodParams) -> Result<Self> {
        let grid = params.pos_grid();
        let sys = SecondKindSystem::from_operator(kernel.matrix(&grid), &grid.zeros(), params.mu)?;
        Ok(Self { solver: SecondKindSolver::new(&sys, ON_SPECTRUM_TOL)?, grid })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn solve(&self, free_term: &GridFunction) -> Result<GridFunction> {
        self.solver.solve(free_term)
    }
}

/// ψ₁ = μ∫Kψ₁ + F₁.
pub fn solve_psi1(problem: &FirstKindProblem, params: &MethodParams) -> Result<GridFunction> {
    let kernel = build_k(problem.kernel.clone(), params)?;
    let solver = PsiSolver::new(&kernel, params)?;
    let f = problem.sample_f(solver.grid());
    solver.solve(&build_f1(&f, params)?)
}

/// ρ(y) = −λ∫₀¹h(y,ξ)ψ₁(ξ)dξ on the grid over [−1, 0].
pub fn build_rho(psi1: &GridFunction, neg: &Grid1D, params: &MethodParams) -> GridFunction {
    let p = *params.poisson();
    let hw = weighted_kernel_matrix(|y, x| poisson_h(y, x, &p), neg.nodes(), &psi1.grid);
    apply(&hw, psi1, neg).scale(-params.lambda())
}

/// κ = ρ + Λ∫₋₁⁰Lρ.
pub fn build_kappa(rho: &GridFunction, params: &MethodParams) -> Result<GridFunction> {
    let l = resolvent_l_kernel(params.poisson())?;
    let lw = weighted_kernel_matrix(|y, z| l.eval(y, z), rho.grid.nodes(), &rho.grid);
    let big = params.poisson().big_lambda();
    Ok(rho.zip_map(&apply(&lw, rho, &rho.grid), |a, b| a + big * b))
}

/// F₀(x) = λ∫₋₁⁰H(x,ξ)κ(ξ)dξ on a grid over [0, 1].
pub fn build_f0(kappa: &GridFunction, pos: &Grid1D, params: &MethodParams) -> Result<GridFunction> {
    let hw = h_matrix(pos.nodes(), &kappa.grid, params)?;
    Ok(apply(&hw, kappa, pos).scale(params.lambda()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solvable {
    Yes,
    No,
    Unknown,
}

impl Solvable {
    pub fn as_str(&self) -> &'static str {
        match self {
            Solvable::Yes => "yes",
            Solvable::No => "no",
            Solvable::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    pub residual_l2: f64,
    pub relative: f64,
    pub solvable: Solvable,
    pub threshold: f64,
}

impl ResidualReport {
    pub fn from_norms(residual_l2: f64, f_norm: f64, threshold: f64) -> Self {
        let relative = if f_norm > 0.0 { residual_l2 / f_norm } else { residual_l2 };
        let solvable = if !(relative <= threshold) {
            Solvable::No
        } else if relative < threshold / 10.0 {
            Solvable::Yes
        } else {
            Solvable::Unknown
        };
        Self { residual_l2, relative, solvable, threshold }
    }
}

/// Grid used to measure residuals; it shares no nodes with ordinary solution grids.
pub fn verification_grid() -> Grid1D {
    crate::numerics::gauss_legendre_panels(VERIFY_ORDER, VERIFY_PANELS, 0.0, 1.0).expect("fixed sizes")
}

/// ‖∫kψ − f‖ over (0,1), with ψ interpolated from its grid and the
/// integral taken by product integration at independent points.
pub fn verify_solution(problem: &FirstKindProblem, psi: &GridFunction, threshold: f64) -> ResidualReport {
    let vg = verification_grid();
    let rows = nystrom_rows(&*problem.kernel, vg.nodes(), &psi.grid);
    let apsi = GridFunction::from_vector(&vg, &(rows * psi.to_vector()));
    let f = problem.sample_f(&vg);
    ResidualReport::from_norms(apsi.sub(&f).l2_norm(), f.l2_norm(), threshold)
}

/// First candidate μ for which I − μK is safely invertible on the grid.
pub fn select_mu(problem: &FirstKindProblem, params: &MethodParams, candidates: &[f64]) -> Result<f64> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no mu candidates".into()));
    }
    let kernel = build_k(problem.kernel.clone(), params)?;
    let km = kernel.matrix(&params.pos_grid());
    let n = km.nrows();
    for &mu in candidates {
        if !mu.is_finite() || mu == 0.0 {
            continue;
        }
        let m = DMatrix::identity(n, n) - &km * mu;
        let norm = spectral_norm(&m);
        let smin = Factored::new(&m).smallest_singular_value();
        if smin > MU_PROBE_TOL * norm {
            return Ok(mu);
        }
    }
    Err(Error::NoValidMu { probed: candidates.to_vec() })
}

#[derive(Debug, Clone)]
pub struct PipelineState {
    pub mu: f64,
    pub psi1: GridFunction,
    pub rho: GridFunction,
    pub kappa: GridFunction,
    pub f0: GridFunction,
    pub f1: GridFunction,
    pub psi0: GridFunction,
    pub psi: GridFunction,
    pub residual_l2: f64,
    pub report: ResidualReport,
}

pub fn method_v2(problem: &FirstKindProblem, params: &MethodParams) -> Result<PipelineState> {
    method_v2_with_threshold(problem, params, DEFAULT_THRESHOLD)
}

pub fn method_v2_with_threshold(
    problem: &FirstKindProblem,
    params: &MethodParams,
    threshold: f64,
) -> Result<PipelineState> {
    let kernel = build_k(problem.kernel.clone(), params)?;
    let solver = PsiSolver::new(&kernel, params)?;
    let pos = solver.grid().clone();
    let f = problem.sample_f(&pos);
    let f1 = build_f1(&f, params)?;
    let psi1 = solver.solve(&f1)?;
    let rho = build_rho(&psi1, &params.neg_grid(), params);
    let kappa = build_kappa(&rho, params)?;
    let f0 = build_f0(&kappa, &pos, params)?;
    let psi0 = solver.solve(&f0)?;
    let psi = psi0.add(&psi1);
    let report = verify_solution(problem, &psi, threshold);
    Ok(PipelineState { mu: params.mu, psi1, rho, kappa, f0, f1, psi0, psi, residual_l2: report.residual_l2, report })
}

/// ψ = f′ + Λ∫₀¹Lf′ with f′ = −λ∫₀¹lψ₁, from a computed ψ₁.
pub fn single_route_from_psi1(psi1: &GridFunction, params: &MethodParams) -> Result<GridFunction> {
    let p = params.poisson();
    let l = kernel_l_kernel(p)?;
    let big_l = resolvent_l_kernel(p)?;
    let g = &psi1.grid;
    let lw = weighted_kernel_matrix(|x, z| l.eval(x, z), g.nodes(), g);
    let fp = apply(&lw, psi1, g).scale(-params.lambda());
    let bw = weighted_kernel_matrix(|x, z| big_l.eval(x, z), g.nodes(), g);
    let big = p.big_lambda();
    Ok(fp.zip_map(&apply(&bw, &fp, g), |a, b| a + big * b))
}

/// Route with a single second-kind solve (for ψ₁) followed by integrations.
pub fn method_v2_single(problem: &FirstKindProblem, params: &MethodParams) -> Result<GridFunction> {
    single_route_from_psi1(&solve_psi1(problem, params)?, params)
}

/// Parameters of the coefficient version, taken at r = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct V1Params {
    lambda: f64,
    mu: f64,
    n_terms: usize,
    quad_order: usize,
}

impl V1Params {
    /// At r = 1 the excluded values are 0, 1, ½ and −1 ± √2.
    pub fn new(lambda: f64, mu: f64, n_terms: usize) -> Result<Self> {
        use crate::error::{Exclusion, ExclusionFamily as F};
        if !lambda.is_finite() || !mu.is_finite() || mu == 0.0 {
            return Err(Error::InvalidArgument(format!("need finite lambda and nonzero mu, got {lambda}, {mu}")));
        }
        if n_terms == 0 {
            return Err(Error::InvalidArgument("truncation must be at least 1".into()));
        }
        let list = [(F::Zero, 0.0), (F::Reciprocal, 1.0), (F::HalfReciprocal, 0.5), (F::SqrtPlus, SQRT_2 - 1.0), (F::SqrtMinus, -1.0 - SQRT_2)];
        for (family, value) in list {
            let rel_dist = if value == 0.0 { lambda.abs() } else { (lambda - value).abs() / value.abs() };
            if rel_dist < DEFAULT_MIN_REL_DIST {
                return Err(Error::Excluded(Exclusion { lambda, family, n: 0, value, rel_dist }));
            }
        }
        Ok(Self { lambda, mu, n_terms, quad_order: 32 })
    }

    pub fn with_quad_order(self, quad_order: usize) -> Self {
        Self { quad_order: quad_order.max(8), ..self }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    /// σ = −μλ²(1−λ)/[(1−2λ)(1−2λ−λ²)]
    pub fn sigma(&self) -> f64 {
        let l = self.lambda;
        -self.mu * l * l * (1.0 - l) / ((1.0 - 2.0 * l) * (1.0 - 2.0 * l - l * l))
    }
}

impl Default for V1Params {
    fn default() -> Self {
        Self::new(crate::kernels::DEFAULT_LAMBDA, DEFAULT_MU, DEFAULT_V1_TERMS).expect("defaults are valid")
    }
}

#[derive(Debug, Clone)]
pub struct FourierState {
    pub c: FourierCoeffs,
    pub p: KernelFourierCoeffs,
    /// coefficients of ψ₁
    pub s: FourierCoeffs,
    pub a: FourierCoeffs,
    pub b: FourierCoeffs,
    /// coefficients of ψ
    pub t: FourierCoeffs,
    pub sigma: f64,
}

impl FourierState {
    pub fn psi(&self, x: f64) -> f64 {
        self.t.eval(x)
    }

    pub fn sample_psi(&self, grid: &Grid1D) -> GridFunction {
        grid.sample(|x| self.t.eval(x))
    }
}

/// Coefficients of ∫₀¹k(x,ξ)ψ(ξ)dξ − f for ψ = ½s₀ + Σ sₙcos + s′ₙsin.
fn closure_coeffs(p: &KernelFourierCoeffs, c: &FourierCoeffs, s: &FourierCoeffs) -> FourierCoeffs {
    let n = c.len();
    let mut d = FourierCoeffs::zeros(n);
    d.c0 = 0.5 * s.c0 * p.p00 - c.c0;
    for m in 0..n {
        d.c0 += p.p0m[m] * s.cn[m] + p.p0m_prime[m] * s.cn_prime[m];
    }
    for i in 0..n {
        let mut dc = 0.5 * s.c0 * p.p0n[i] - c.cn[i];
        let mut ds = 0.5 * s.c0 * p.p0n_prime[i] - c.cn_prime[i];
        for m in 0..n {
            dc += p.pnm[(i, m)] * s.cn[m] + p.pnm_prime[(i, m)] * s.cn_prime[m];
            ds += p.pnm_second[(i, m)] * s.cn[m] + p.pnm_third[(i, m)] * s.cn_prime[m];
        }
        d.cn[i] = dc;
        d.cn_prime[i] = ds;
    }
    d
}

/// Truncated coefficient system for ψ₁ at r = 1, then ψ through t = σb.
pub fn method_v1(problem: &FirstKindProblem, params: &V1Params) -> Result<FourierState> {
    let n = params.n_terms;
    let c = fourier_coeffs(|x| problem.f(x), n, params.quad_order)?;
    let p = kernel_fourier_coeffs(&*problem.kernel, n, params.quad_order)?;
    let (lam, mu) = (params.lambda, params.mu);
    let g = mu * (1.0 - lam);
    let diag = 2.0 * (1.0 - 2.0 * lam);
    // unknowns: s₀, s₁..s_N, s′₁..s′_N
    let dim = 2 * n + 1;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    let mut rhs = DVector::<f64>::zeros(dim);
    m[(0, 0)] = diag - g * p.p00;
    for j in 0..n {
        m[(0, 1 + j)] = -2.0 * g * p.p0m[j];
        m[(0, 1 + n + j)] = -2.0 * g * p.p0m_prime[j];
    }
    rhs[0] = -2.0 * g * c.c0;
    for i in 0..n {
        let (rc, rs) = (1 + i, 1 + n + i);
        m[(rc, rc)] += diag;
        m[(rs, rs)] += diag;
        m[(rc, 0)] = -g * p.p0n[i];
        m[(rs, 0)] = -g * p.p0n_prime[i];
        for j in 0..n {
            m[(rc, 1 + j)] -= 2.0 * g * p.pnm[(i, j)];
            m[(rc, 1 + n + j)] -= 2.0 * g * p.pnm_prime[(i, j)];
            m[(rs, 1 + j)] -= 2.0 * g * p.pnm_second[(i, j)];
            m[(rs, 1 + n + j)] -= 2.0 * g * p.pnm_third[(i, j)];
        }
        rhs[rc] = -2.0 * g * c.cn[i];
        rhs[rs] = -2.0 * g * c.cn_prime[i];
    }
    let fm = Factored::new(&m);
    let scale = spectral_norm(&m);
    if !(fm.smallest_singular_value() > ON_SPECTRUM_TOL * scale) {
        return Err(Error::NoValidMu { probed: vec![mu] });
    }
    let sol = fm.solve(&rhs).ok_or(Error::NoValidMu { probed: vec![mu] })?;
    let s = FourierCoeffs { c0: sol[0], cn: sol.rows(1, n).iter().copied().collect(), cn_prime: sol.rows(1 + n, n).iter().copied().collect() };
    let b = closure_coeffs(&p, &c, &s);
    let a = b.scale(mu * lam / (1.0 - 2.0 * lam));
    let sigma = params.sigma();
    let t = b.scale(sigma);
    if !(s.is_finite() && t.is_finite()) {
        return Err(Error::NoValidMu { probed: vec![mu] });
    }
    Ok(FourierState { c, p, s, a, b, t, sigma })
}

/// Shared-kernel helper for tests and callers holding a concrete kernel.
pub fn shared<K: Kernel + 'static>(k: K) -> SharedKernel {
    Arc::new(k)
}
