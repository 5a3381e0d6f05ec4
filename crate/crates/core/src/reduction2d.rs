//! Boundary-value problems reduced to integral equations.
//!
//! One-dimensional: u″ − a(x)u = f(x), u′(0) = u(1) = 0, with ψ = u″ found
//! through a Volterra or a Fredholm equation. Two-dimensional: the equation
//! ∫τ₁(x,y,ξ)ψ(ξ,y)dξ + ∫τ₂(x,y,η)ψ(x,η)dη = f(x,y) on the unit square,
//! assembled for the membrane and heat problems and solved by the same
//! two-equation construction as in one dimension, acting along x.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fredholm2::{solve_volterra2, SecondKindSolver, SecondKindSystem, VolterraKernel, ON_SPECTRUM_TOL};
use crate::kernels::{poisson_h, resolvent_h_kernel, resolvent_l_kernel, SeriesKernel};
use crate::linalg::{spectral_norm, Factored};
use crate::method_core::{build_k, ComposedKernel, MethodParams, ResidualReport, DEFAULT_THRESHOLD};
use crate::numerics::{
    gauss_legendre, gauss_legendre_panels, nystrom_matrix, nystrom_rows, weighted_kernel_matrix, DiagonalKinkKernel,
    FnKernel, Grid1D, GridFunction, Kernel,
};
use crate::problems::{Evaluator, SharedKernel};

pub type Field = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Largest dense 2D system that will be assembled.
pub const MAX_UNKNOWNS: usize = 4096;
pub const DEFAULT_N_2D: usize = 24;
const DEGENERATE_TOL: f64 = 1e-10;
const VERIFY_PANELS: usize = 8;
const VERIFY_ORDER: usize = 8;

/// Returns (ψ, u) on the grid, ψ = u″, through the Volterra equation
/// ψ = a(∫₀ˣ(x−ξ)ψ + c₀) + f with c₀ fixed by u(1) = 0.
pub fn reduce_ode_volterra(a: Evaluator, f: Evaluator, grid: &Grid1D) -> Result<(GridFunction, GridFunction)> {
    let a2 = a.clone();
    let kernel = FnKernel(move |x: f64, xi: f64| a2(x) * (x - xi));
    let psi_f = solve_volterra2(&kernel, |x| f(x), grid)?;
    let psi_a = solve_volterra2(&kernel, |x| a(x), grid)?;
    let moment = |g: &GridFunction| g.map(|x, v| (1.0 - x) * v).integral();
    let denom = 1.0 + moment(&psi_a);
    if denom.abs() < DEGENERATE_TOL {
        return Err(Error::Degenerate(format!("1 + ∫(1−ξ)ψ_a = {denom:.3e}")));
    }
    let c0 = -moment(&psi_f) / denom;
    let psi = psi_f.zip_map(&psi_a, |p, q| p + c0 * q);
    let ramp = VolterraKernel(FnKernel(|x: f64, xi: f64| x - xi));
    let u = GridFunction::from_vector(grid, &(nystrom_matrix(&ramp, grid) * psi.to_vector())).map(|_, v| v + c0);
    Ok((psi, u))
}

/// G(x,ξ) = (x−ξ)[ξ≤x] − (1−ξ): u = ∫₀¹Gψ satisfies u′(0) = u(1) = 0.
fn ode_green(x: f64, xi: f64) -> f64 {
    let v = if xi <= x { x - xi } else { 0.0 };
    v - (1.0 - xi)
}

/// Same problem through the Fredholm equation ψ = a∫₀¹Gψ + f.
pub fn reduce_ode_fredholm(a: Evaluator, f: Evaluator, grid: &Grid1D) -> Result<(GridFunction, GridFunction)> {
    let kernel = DiagonalKinkKernel(move |x: f64, xi: f64| a(x) * ode_green(x, xi));
    let sys = SecondKindSystem::from_kernel(&kernel, |x| f(x), 1.0, grid);
    let psi = SecondKindSolver::new(&sys, ON_SPECTRUM_TOL)?.solve(&sys.free_term())?;
    let g = DiagonalKinkKernel(ode_green);
    let u = GridFunction::from_vector(grid, &(nystrom_matrix(&g, grid) * psi.to_vector()));
    Ok((psi, u))
}

/// The data of ∫τ₁ψ(ξ,y)dξ + ∫τ₂ψ(x,η)dη = f on the unit square.
///
/// In the reductions here τ₁ does not depend on y and τ₂ does not depend
/// on x, so each block is stored as a one-dimensional kernel.
#[derive(Clone)]
pub struct Bvp2DReduction {
    pub name: String,
    tau1: SharedKernel,
    tau2: SharedKernel,
    free_term: Field,
}

impl fmt::Debug for Bvp2DReduction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Bvp2DReduction").field("name", &self.name).finish()
    }
}

impl Bvp2DReduction {
    pub fn new(name: impl Into<String>, tau1: SharedKernel, tau2: SharedKernel, free_term: Field) -> Self {
        Self { name: name.into(), tau1, tau2, free_term }
    }

    pub fn tau1(&self, x: f64, _y: f64, xi: f64) -> f64 {
        self.tau1.eval(x, xi)
    }

    pub fn tau2(&self, _x: f64, y: f64, eta: f64) -> f64 {
        self.tau2.eval(y, eta)
    }

    pub fn f(&self, x: f64, y: f64) -> f64 {
        (self.free_term)(x, y)
    }

    pub fn tau1_kernel(&self) -> &SharedKernel {
        &self.tau1
    }

    pub fn tau2_kernel(&self) -> &SharedKernel {
        &self.tau2
    }

    pub fn with_free_term(&self, free_term: Field) -> Self {
        Self { free_term, name: format!("{} (modified free term)", self.name), ..self.clone() }
    }
}

/// τ(s,σ) = (s−σ)[σ≤s] − s(1−σ), the Green kernel of w″ = ψ with w(0) = w(1) = 0.
fn dirichlet_tau(s: f64, sigma: f64) -> f64 {
    let v = if sigma <= s { s - sigma } else { 0.0 };
    v - s * (1.0 - sigma)
}

/// Membrane Δu = −1 with u = 0 on the boundary of the unit square, ψ = ∂²u/∂x².
pub fn reduce_membrane() -> Bvp2DReduction {
    Bvp2DReduction::new(
        "membrane",
        Arc::new(DiagonalKinkKernel(dirichlet_tau)),
        Arc::new(DiagonalKinkKernel(dirichlet_tau)),
        Arc::new(|_x, y| y * (1.0 - y) / 2.0),
    )
}

/// Heat equation u_t = u_xx with u(0,t) = u(1,t) = 0 and u(x,0) = u₀(x); ψ = u_xx, y plays t.
pub fn reduce_heat(u0: Evaluator) -> Result<Bvp2DReduction> {
    let (l, r) = (u0(0.0), u0(1.0));
    if !(l.abs() <= 1e-8 && r.abs() <= 1e-8) {
        return Err(Error::InvalidArgument(format!("u0 must vanish at both ends, got u0(0) = {l}, u0(1) = {r}")));
    }
    Ok(Bvp2DReduction::new(
        "heat",
        Arc::new(DiagonalKinkKernel(dirichlet_tau)),
        Arc::new(DiagonalKinkKernel(|t: f64, eta: f64| if eta <= t { -1.0 } else { 0.0 })),
        Arc::new(move |x, _t| u0(x)),
    ))
}

/// Values on a tensor grid; `values[(i, j)]` sits at (xᵢ, yⱼ).
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction2D {
    pub x_grid: Grid1D,
    pub y_grid: Grid1D,
    pub values: DMatrix<f64>,
}

impl GridFunction2D {
    pub fn new(x_grid: Grid1D, y_grid: Grid1D, values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != x_grid.len() || values.ncols() != y_grid.len() {
            return Err(Error::InvalidArgument("values do not match the grids".into()));
        }
        Ok(Self { x_grid, y_grid, values })
    }

    pub fn sample(x_grid: &Grid1D, y_grid: &Grid1D, f: impl Fn(f64, f64) -> f64) -> Self {
        let (xs, ys) = (x_grid.nodes(), y_grid.nodes());
        let values = DMatrix::from_fn(xs.len(), ys.len(), |i, j| f(xs[i], ys[j]));
        Self { x_grid: x_grid.clone(), y_grid: y_grid.clone(), values }
    }

    pub fn zeros(x_grid: &Grid1D, y_grid: &Grid1D) -> Self {
        Self::sample(x_grid, y_grid, |_, _| 0.0)
    }

    fn with_values(&self, values: DMatrix<f64>) -> Self {
        Self { x_grid: self.x_grid.clone(), y_grid: self.y_grid.clone(), values }
    }

    pub fn l2_norm(&self) -> f64 {
        let (wx, wy) = (self.x_grid.weights(), self.y_grid.weights());
        let mut s = 0.0;
        for (i, a) in wx.iter().enumerate() {
            for (j, b) in wy.iter().enumerate() {
                s += a * b * self.values[(i, j)].powi(2);
            }
        }
        s.sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.amax()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.with_values(&self.values + &other.values)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.with_values(&self.values - &other.values)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.with_values(&self.values * c)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Interpolated value at an arbitrary point.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let lx = DVector::from_vec(self.x_grid.basis_at(x));
        let ly = DVector::from_vec(self.y_grid.basis_at(y));
        lx.dot(&(&self.values * ly))
    }

    /// Row-major flattening, index i·n_y + j.
    pub fn to_vector(&self) -> DVector<f64> {
        let ny = self.values.ncols();
        DVector::from_fn(self.values.len(), |k, _| self.values[(k / ny, k % ny)])
    }

    pub fn from_vector(x_grid: &Grid1D, y_grid: &Grid1D, v: &DVector<f64>) -> Self {
        let ny = y_grid.len();
        let values = DMatrix::from_fn(x_grid.len(), ny, |i, j| v[i * ny + j]);
        Self { x_grid: x_grid.clone(), y_grid: y_grid.clone(), values }
    }
}

/// Rows evaluating the grid interpolant at the points `pts`.
fn interp_matrix(grid: &Grid1D, pts: &[f64]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(pts.len(), grid.len());
    for (i, &p) in pts.iter().enumerate() {
        for (j, v) in grid.basis_at(p).into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    m
}

/// Left side ∫τ₁ψdξ + ∫τ₂ψdη of the assembled equation at the points xs × ys.
pub fn apply_operator_at(red: &Bvp2DReduction, psi: &GridFunction2D, xs: &[f64], ys: &[f64]) -> DMatrix<f64> {
    let r1 = nystrom_rows(&*red.tau1, xs, &psi.x_grid);
    let r2 = nystrom_rows(&*red.tau2, ys, &psi.y_grid);
    let lx = interp_matrix(&psi.x_grid, xs);
    let ly = interp_matrix(&psi.y_grid, ys);
    &r1 * &psi.values * ly.transpose() + lx * &psi.values * r2.transpose()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// u = ∫τ₁ψ(ξ,y)dξ
    X,
    /// u = f − ∫τ₂ψ(x,η)dη
    Y,
}

/// u at the points xs × ys from the selected representation.
pub fn reconstruct_u_at(red: &Bvp2DReduction, psi: &GridFunction2D, route: Route, xs: &[f64], ys: &[f64]) -> DMatrix<f64> {
    match route {
        Route::X => {
            let r1 = nystrom_rows(&*red.tau1, xs, &psi.x_grid);
            r1 * &psi.values * interp_matrix(&psi.y_grid, ys).transpose()
        }
        Route::Y => {
            let r2 = nystrom_rows(&*red.tau2, ys, &psi.y_grid);
            let part = interp_matrix(&psi.x_grid, xs) * &psi.values * r2.transpose();
            DMatrix::from_fn(xs.len(), ys.len(), |i, j| red.f(xs[i], ys[j]) - part[(i, j)])
        }
    }
}

/// u on the grid of ψ.
pub fn reconstruct_u(red: &Bvp2DReduction, psi: &GridFunction2D, route: Route) -> GridFunction2D {
    let values = reconstruct_u_at(red, psi, route, psi.x_grid.nodes(), psi.y_grid.nodes());
    psi.with_values(values)
}

/// Boundary-corrected fields: U₁ = u₁ − (1−y)u₁(x,0) − y·u₁(x,1) for the x-route,
/// U₂ = u₂ − (1−x)u₂(0,y) − x·u₂(1,y) for the y-route.
pub fn reconstruct_corrected(red: &Bvp2DReduction, psi: &GridFunction2D, route: Route) -> GridFunction2D {
    let (xs, ys) = (psi.x_grid.nodes(), psi.y_grid.nodes());
    let u = reconstruct_u_at(red, psi, route, xs, ys);
    let values = match route {
        Route::X => {
            let edge = reconstruct_u_at(red, psi, route, xs, &[0.0, 1.0]);
            DMatrix::from_fn(xs.len(), ys.len(), |i, j| u[(i, j)] - (1.0 - ys[j]) * edge[(i, 0)] - ys[j] * edge[(i, 1)])
        }
        Route::Y => {
            let edge = reconstruct_u_at(red, psi, route, &[0.0, 1.0], ys);
            DMatrix::from_fn(xs.len(), ys.len(), |i, j| u[(i, j)] - (1.0 - xs[i]) * edge[(0, j)] - xs[i] * edge[(1, j)])
        }
    };
    psi.with_values(values)
}

/// δ = 2‖U₁ − U₂‖/‖U₁ + U₂‖
pub fn closure_delta(u1: &GridFunction2D, u2: &GridFunction2D) -> Result<f64> {
    let den = u1.add(u2).l2_norm();
    if den <= 1e-14 {
        return Err(Error::UndefinedDelta);
    }
    Ok(2.0 * u1.sub(u2).l2_norm() / den)
}

/// Residual of the assembled equation on an independent 64×64 grid.
pub fn verify2d(red: &Bvp2DReduction, psi: &GridFunction2D, threshold: f64) -> ResidualReport {
    let vg = gauss_legendre_panels(VERIFY_ORDER, VERIFY_PANELS, 0.0, 1.0).expect("fixed sizes");
    let lhs = apply_operator_at(red, psi, vg.nodes(), vg.nodes());
    let f = GridFunction2D::sample(&vg, &vg, |x, y| red.f(x, y));
    let r = f.with_values(lhs - &f.values);
    ResidualReport::from_norms(r.l2_norm(), f.l2_norm(), threshold)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Method2dParams {
    pub method: MethodParams,
    pub nx: usize,
    pub ny: usize,
}

impl Method2dParams {
    pub fn new(method: MethodParams, nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidArgument(format!("2D grid needs at least 2×2 nodes, got {nx}×{ny}")));
        }
        if nx * ny > MAX_UNKNOWNS {
            return Err(Error::TooLarge { unknowns: nx * ny, limit: MAX_UNKNOWNS });
        }
        Ok(Self { method, nx, ny })
    }
}

impl Default for Method2dParams {
    fn default() -> Self {
        Self::new(MethodParams::default(), DEFAULT_N_2D, DEFAULT_N_2D).expect("defaults are valid")
    }
}

/// Pointwise kernels of the 2D second-kind equation:
/// N = τ₁ + λ∫H(x,ζ)τ₁(ζ,y,ξ)dζ, M = τ₂, T = λH(x,ξ)τ₂(ξ,y,η).
pub struct Kernels2D {
    n: ComposedKernel,
    h: SeriesKernel,
    tau2: SharedKernel,
    lambda: f64,
}

impl Kernels2D {
    pub fn new(red: &Bvp2DReduction, params: &MethodParams) -> Result<Self> {
        Ok(Self {
            n: build_k(red.tau1.clone(), params)?,
            h: resolvent_h_kernel(params.poisson())?,
            tau2: red.tau2.clone(),
            lambda: params.lambda(),
        })
    }

    pub fn n(&self, x: f64, _y: f64, xi: f64) -> f64 {
        self.n.eval(x, xi)
    }

    pub fn m(&self, _x: f64, y: f64, eta: f64) -> f64 {
        self.tau2.eval(y, eta)
    }

    pub fn t(&self, x: f64, y: f64, xi: f64, eta: f64) -> f64 {
        self.lambda * self.h.eval(x, xi) * self.tau2.eval(y, eta)
    }
}

#[derive(Debug, Clone)]
pub struct Method2dResult {
    pub psi1: GridFunction2D,
    pub psi0: GridFunction2D,
    pub psi: GridFunction2D,
    pub report: ResidualReport,
}

/// Two solves of ψ = μ(I + λĤ)(T₁ + T₂)ψ + F, with F₁ = −μ(I + λĤ)f and
/// F₀ = λĤκ, where Ĥ acts along x.
pub fn method2d_solve(red: &Bvp2DReduction, params: &Method2dParams) -> Result<Method2dResult> {
    method2d_solve_with_threshold(red, params, DEFAULT_THRESHOLD)
}

pub fn method2d_solve_with_threshold(
    red: &Bvp2DReduction,
    params: &Method2dParams,
    threshold: f64,
) -> Result<Method2dResult> {
    let mp = &params.method;
    let p = mp.poisson();
    let (lam, mu, big) = (p.lambda(), mp.mu(), p.big_lambda());
    let h = resolvent_h_kernel(p)?;
    let l = resolvent_l_kernel(p)?;
    let xg = gauss_legendre(params.nx, 0.0, 1.0)?;
    let yg = gauss_legendre(params.ny, 0.0, 1.0)?;
    let ng = gauss_legendre(params.nx, -1.0, 0.0)?;
    let (nx, ny) = (params.nx, params.ny);

    let a1 = nystrom_matrix(&*red.tau1, &xg);
    let a2 = nystrom_matrix(&*red.tau2, &yg);
    let hw = weighted_kernel_matrix(|x, z| h.eval(x, z), xg.nodes(), &xg);
    let g = DMatrix::<f64>::identity(nx, nx) + &hw * lam;
    let iy = DMatrix::<f64>::identity(ny, ny);
    let op = (&g * &a1).kronecker(&iy) + g.kronecker(&a2);
    let sys = DMatrix::<f64>::identity(nx * ny, nx * ny) - op * mu;
    let norm = spectral_norm(&sys);
    let lu = Factored::new(&sys);
    let ratio = if norm > 0.0 { lu.smallest_singular_value() / norm } else { 0.0 };
    if !(ratio > ON_SPECTRUM_TOL) {
        return Err(Error::OnSpectrum { mu, ratio });
    }
    let solve = |rhs: &DMatrix<f64>| -> Result<GridFunction2D> {
        let field = GridFunction2D::new(xg.clone(), yg.clone(), rhs.clone())?;
        let x = lu.solve(&field.to_vector()).ok_or(Error::OnSpectrum { mu, ratio: 0.0 })?;
        Ok(GridFunction2D::from_vector(&xg, &yg, &x))
    };

    let f = GridFunction2D::sample(&xg, &yg, |x, y| red.f(x, y));
    let f1 = (&g * &f.values) * (-mu);
    let psi1 = solve(&f1)?;
    let hpos = weighted_kernel_matrix(|y, x| poisson_h(y, x, p), ng.nodes(), &xg);
    let rho = (hpos * &psi1.values) * (-lam);
    let lw = weighted_kernel_matrix(|y, z| l.eval(y, z), ng.nodes(), &ng);
    let kappa = &rho + (lw * &rho) * big;
    let hneg = weighted_kernel_matrix(|x, z| h.eval(x, z), xg.nodes(), &ng);
    let f0 = (hneg * kappa) * lam;
    let psi0 = solve(&f0)?;
    let psi = psi0.add(&psi1);
    let report = verify2d(red, &psi, threshold);
    Ok(Method2dResult { psi1, psi0, psi, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::PoissonParams;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn ev(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Evaluator {
        Arc::new(f)
    }

    fn grid() -> Grid1D {
        gauss_legendre(64, 0.0, 1.0).unwrap()
    }

    /// ∂²u/∂x² of the membrane solution, from the single sine series in y.
    fn membrane_psi(x: f64, y: f64, n_max: usize) -> f64 {
        (1..=n_max)
            .step_by(2)
            .map(|n| {
                let k = n as f64 * PI;
                -4.0 / k * (k * (x - 0.5)).cosh() / (k / 2.0).cosh() * (k * y).sin()
            })
            .sum()
    }

    #[test]
    fn ode_examples() {
        let g = grid();
        for route in [reduce_ode_volterra, reduce_ode_fredholm] {
            let (psi, u) = route(ev(|_| 0.0), ev(|_| -1.0), &g).unwrap();
            assert!(u.sub(&g.sample(|x| (1.0 - x * x) / 2.0)).max_abs() < 1e-12);
            assert!(psi.values.iter().all(|v| (v + 1.0).abs() < 1e-12));

            let (psi, u) = route(ev(|_| 1.0), ev(|_| -1.0), &g).unwrap();
            let c1 = 1f64.cosh();
            assert!(u.sub(&g.sample(|x| 1.0 - x.cosh() / c1)).max_abs() < 1e-6);
            assert!(psi.sub(&g.sample(|x| -x.cosh() / c1)).max_abs() < 1e-6);
        }
        let (_, uv) = reduce_ode_volterra(ev(|_| 0.0), ev(|_| -1.0), &g).unwrap();
        let (_, uf) = reduce_ode_fredholm(ev(|_| 0.0), ev(|_| -1.0), &g).unwrap();
        assert!(uv.sub(&uf).max_abs() < 1e-10);
        let (_, uv) = reduce_ode_volterra(ev(|x| 1.0 + x * x), ev(|x| (PI * x).sin()), &g).unwrap();
        let (_, uf) = reduce_ode_fredholm(ev(|x| 1.0 + x * x), ev(|x| (PI * x).sin()), &g).unwrap();
        assert!(uv.sub(&uf).max_abs() < 1e-8);
    }

    #[test]
    fn ode_degenerate_and_on_spectrum() {
        // u″ + (π/2)²u = f has the nontrivial homogeneous solution cos(πx/2)
        let g = grid();
        let a = -(PI / 2.0).powi(2);
        assert!(matches!(reduce_ode_volterra(ev(move |_| a), ev(|_| 1.0), &g), Err(Error::Degenerate(_))));
        assert!(matches!(reduce_ode_fredholm(ev(move |_| a), ev(|_| 1.0), &g), Err(Error::OnSpectrum { .. })));
    }

    #[test]
    fn membrane_data() {
        let m = reduce_membrane();
        assert_eq!(m.tau1(0.5, 0.3, 0.25), -0.125);
        assert_eq!(m.tau2(0.3, 0.5, 0.25), -0.125);
        for x in [0.0, 0.4, 1.0] {
            assert_eq!(m.f(x, 0.0), 0.0);
            assert_eq!(m.f(x, 0.5), 0.125);
        }
    }

    #[test]
    fn membrane_oracle_satisfies_assembled_equation() {
        let m = reduce_membrane();
        let g = grid();
        let psi = GridFunction2D::sample(&g, &g, |x, y| membrane_psi(x, y, 20));
        let rep = verify2d(&m, &psi, DEFAULT_THRESHOLD);
        assert!(rep.relative < 1e-3, "{}", rep.relative);
        assert_eq!(rep.solvable, Solvable::Yes);

        let ux = reconstruct_u(&m, &psi, Route::X);
        let uy = reconstruct_u(&m, &psi, Route::Y);
        assert!(ux.sub(&uy).max_abs() < 1e-3);
        let d = closure_delta(&reconstruct_corrected(&m, &psi, Route::X), &reconstruct_corrected(&m, &psi, Route::Y)).unwrap();
        assert!(d < 1e-2, "{d}");
    }

    use crate::method_core::Solvable;

    #[test]
    fn structural_boundary_values() {
        let m = reduce_membrane();
        let g = gauss_legendre(12, 0.0, 1.0).unwrap();
        let psi = GridFunction2D::sample(&g, &g, |x, y| (3.0 * x + y).sin() + x * y * 7.0);
        let pts: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let ux = reconstruct_u_at(&m, &psi, Route::X, &[0.0, 1.0], &pts);
        assert!(ux.iter().all(|v| *v == 0.0));
        let uy = reconstruct_u_at(&m, &psi, Route::Y, &pts, &[0.0, 1.0]);
        assert!(uy.iter().all(|v| *v == 0.0));
        let zero = reconstruct_u(&m, &GridFunction2D::zeros(&g, &g), Route::X);
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn closure_delta_examples() {
        let g = gauss_legendre(8, 0.0, 1.0).unwrap();
        let u = GridFunction2D::sample(&g, &g, |x, y| x + y * y);
        assert_eq!(closure_delta(&u, &u).unwrap(), 0.0);
        assert_abs_diff_eq!(closure_delta(&u, &u.scale(3.0)).unwrap(), 1.0, epsilon = 1e-15);
        let v = GridFunction2D::sample(&g, &g, |x, y| (x * y).exp());
        let d = closure_delta(&u, &v).unwrap();
        for c in [-2.5, 1e-3, 7.0] {
            assert_abs_diff_eq!(closure_delta(&u.scale(c), &v.scale(c)).unwrap(), d, epsilon = 1e-12);
        }
        let z = GridFunction2D::zeros(&g, &g);
        assert!(matches!(closure_delta(&z, &z), Err(Error::UndefinedDelta)));
    }

    #[test]
    fn heat_examples() {
        assert!(reduce_heat(ev(|x| x)).is_err());
        let zero = reduce_heat(ev(|_| 0.0)).unwrap();
        assert_eq!(zero.f(0.3, 0.7), 0.0);
        let heat = reduce_heat(ev(|x| (PI * x).sin())).unwrap();
        let mem = reduce_membrane();
        for (x, xi) in [(0.2, 0.7), (0.9, 0.1), (0.5, 0.5)] {
            assert!((heat.tau1(x, 0.3, xi) - mem.tau1(x, 0.6, xi)).abs() < 1e-12);
        }
        let g = grid();
        let psi = GridFunction2D::sample(&g, &g, |x, t| -PI * PI * (-PI * PI * t).exp() * (PI * x).sin());
        let rep = verify2d(&heat, &psi, DEFAULT_THRESHOLD);
        assert!(rep.relative < 1e-3, "{}", rep.relative);
    }

    #[test]
    fn zero_lambda_kernels() {
        let m = reduce_membrane();
        let p = MethodParams::unvalidated(PoissonParams::new(0.5, 0.0).unwrap(), 0.1).unwrap();
        let k = Kernels2D::new(&m, &p).unwrap();
        for (x, y, xi, eta) in [(0.2, 0.3, 0.7, 0.1), (0.8, 0.5, 0.4, 0.9)] {
            assert_eq!(k.n(x, y, xi), m.tau1(x, y, xi));
            assert_eq!(k.m(x, y, eta), m.tau2(x, y, eta));
            assert_eq!(k.t(x, y, xi, eta), 0.0);
        }
    }

    #[test]
    fn method2d_runs() {
        let m = reduce_membrane();
        let small = Method2dParams::new(MethodParams::default(), 12, 12).unwrap();
        let zero = m.with_free_term(Arc::new(|_, _| 0.0));
        let r = method2d_solve(&zero, &small).unwrap();
        assert_eq!(r.psi.max_abs(), 0.0);
        assert_eq!(r.report.residual_l2, 0.0);

        let r = method2d_solve(&m, &small).unwrap();
        assert!(r.psi.is_finite());
        assert_eq!(r.psi.values, &r.psi0.values + &r.psi1.values);
        assert!(matches!(Method2dParams::new(MethodParams::default(), 80, 80), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn verify2d_rejects_mismatched_data() {
        let m = reduce_membrane();
        let g = gauss_legendre(32, 0.0, 1.0).unwrap();
        let rep = verify2d(&m, &GridFunction2D::zeros(&g, &g), DEFAULT_THRESHOLD);
        assert_eq!(rep.solvable, Solvable::No);
        let one = m.with_free_term(Arc::new(|_, _| 1.0));
        let psi = GridFunction2D::sample(&g, &g, |x, y| membrane_psi(x, y, 20));
        assert_eq!(verify2d(&one, &psi, DEFAULT_THRESHOLD).solvable, Solvable::No);
        assert_eq!(verify2d(&one, &GridFunction2D::zeros(&g, &g), DEFAULT_THRESHOLD).solvable, Solvable::No);
    }
}
