//! Nyström solvers for second-kind Fredholm and Volterra equations,
//! spectrum estimates, and deflation of a spectral component.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, Factored};
use crate::numerics::{integrate_fn, nystrom_matrix, Grid1D, GridFunction, Kernel};

/// Relative singular-value threshold below which a system counts as on the spectrum.
pub const ON_SPECTRUM_TOL: f64 = 1e-10;

/// ψ = μ∫Kψ + F, discretized on a grid.
#[derive(Debug, Clone)]
pub struct SecondKindSystem {
    grid: Grid1D,
    operator: DMatrix<f64>,
    free_term: Vec<f64>,
    mu: f64,
    c1: f64,
}

impl SecondKindSystem {
    /// Discretizes a kernel by product integration and samples the free term.
    pub fn from_kernel(kernel: &dyn Kernel, free_term: impl Fn(f64) -> f64, mu: f64, grid: &Grid1D) -> Self {
        let operator = nystrom_matrix(kernel, grid);
        let c1 = hilbert_schmidt_norm(kernel, grid);
        let free_term = grid.nodes().iter().map(|&x| free_term(x)).collect();
        Self { grid: grid.clone(), operator, free_term, mu, c1 }
    }

    /// Uses a precomputed discrete operator (Σⱼ Aᵢⱼψⱼ ≈ ∫K(xᵢ,ξ)ψ(ξ)dξ).
    pub fn from_operator(operator: DMatrix<f64>, free_term: &GridFunction, mu: f64) -> Result<Self> {
        let grid = free_term.grid.clone();
        let n = grid.len();
        if operator.nrows() != n || operator.ncols() != n {
            return Err(Error::InvalidArgument(format!(
                "operator is {}x{} but the grid has {n} nodes",
                operator.nrows(),
                operator.ncols()
            )));
        }
        let w = grid.weights();
        let c1 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| operator[(i, j)].powi(2) * w[i] / w[j])
            .sum::<f64>()
            .sqrt();
        Ok(Self { grid, operator, free_term: free_term.values.clone(), mu, c1 })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn operator(&self) -> &DMatrix<f64> {
        &self.operator
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// c₁ = (∬K²)^½
    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn free_term(&self) -> GridFunction {
        GridFunction { grid: self.grid.clone(), values: self.free_term.clone() }
    }

    pub fn with_free_term(&self, free_term: &GridFunction) -> Self {
        Self { free_term: free_term.values.clone(), ..self.clone() }
    }

    /// I − μA
    pub fn system_matrix(&self) -> DMatrix<f64> {
        let n = self.grid.len();
        DMatrix::identity(n, n) - &self.operator * self.mu
    }
}

/// (∬K²)^½ by quadrature split at the kernel's kinks.
pub fn hilbert_schmidt_norm(kernel: &dyn Kernel, grid: &Grid1D) -> f64 {
    let order = grid.len().max(8);
    let mut sum = 0.0;
    for (&x, &w) in grid.nodes().iter().zip(grid.weights()) {
        let row = integrate_fn(|xi| kernel.eval(x, xi).powi(2), grid.a(), grid.b(), &kernel.row_breaks(x), order);
        sum += w * row;
    }
    sum.sqrt()
}

/// A second-kind system after the conditioning check, ready for repeated solves.
pub struct SecondKindSolver {
    grid: Grid1D,
    factored: Factored,
    sigma_ratio: f64,
}

impl SecondKindSolver {
    /// Factors I − μA; refuses when σ_min < tol·‖I − μA‖.
    pub fn new(sys: &SecondKindSystem, tol: f64) -> Result<Self> {
        let m = sys.system_matrix();
        let norm = spectral_norm(&m);
        let factored = Factored::new(&m);
        let smin = factored.smallest_singular_value();
        let ratio = if norm > 0.0 { smin / norm } else { 0.0 };
        if !(ratio > tol) {
            return Err(Error::OnSpectrum { mu: sys.mu, ratio });
        }
        Ok(Self { grid: sys.grid.clone(), factored, sigma_ratio: ratio })
    }

    /// σ_min/σ_max of I − μA.
    pub fn sigma_ratio(&self) -> f64 {
        self.sigma_ratio
    }

    pub fn solve(&self, free_term: &GridFunction) -> Result<GridFunction> {
        let b = free_term.to_vector();
        let x = self.factored.solve(&b).ok_or(Error::OnSpectrum { mu: f64::NAN, ratio: 0.0 })?;
        Ok(GridFunction::from_vector(&self.grid, &x))
    }
}

/// Dense LU solve of the Nyström system.
pub fn solve_direct(sys: &SecondKindSystem) -> Result<GridFunction> {
    SecondKindSolver::new(sys, ON_SPECTRUM_TOL)?.solve(&sys.free_term())
}

/// Simple iterations ψ ← μAψ + F until the L₂ step drops below `tol`.
pub fn neumann_iterate(sys: &SecondKindSystem, max_iter: usize, tol: f64) -> Result<GridFunction> {
    let product = sys.mu.abs() * sys.c1;
    if product >= 1.0 {
        return Err(Error::NotContractive { c1: sys.c1, product });
    }
    let f = DVector::from_column_slice(&sys.free_term);
    let w = DVector::from_column_slice(sys.grid.weights());
    let mut psi = f.clone();
    for _ in 0..max_iter {
        let next = &sys.operator * &psi * sys.mu + &f;
        let step = (&next - &psi).map(|d| d * d).dot(&w).sqrt();
        psi = next;
        if step < tol {
            return Ok(GridFunction::from_vector(&sys.grid, &psi));
        }
    }
    Err(Error::InvalidArgument(format!("simple iterations did not reach {tol} in {max_iter} steps")))
}

/// Leading characteristic numbers and eigenfunctions of a symmetric kernel.
#[derive(Debug, Clone)]
pub struct SpectrumEstimate {
    /// Sorted by magnitude, smallest first.
    pub char_numbers: Vec<f64>,
    /// L₂-normalized on the grid.
    pub eigenfunctions: Vec<GridFunction>,
}

pub fn estimate_spectrum(kernel: &dyn Kernel, grid: &Grid1D, count: usize) -> Result<SpectrumEstimate> {
    let x = grid.nodes();
    let n = grid.len();
    let mut scale = 0.0f64;
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in 0..=i {
            let a = kernel.eval(x[i], x[j]);
            let b = kernel.eval(x[j], x[i]);
            scale = scale.max(a.abs());
            asym = asym.max((a - b).abs());
        }
    }
    if asym > 1e-8 * scale.max(1.0) {
        return Err(Error::InvalidArgument(format!("kernel is not symmetric (max asymmetry {asym:.3e})")));
    }
    let a = nystrom_matrix(kernel, grid);
    let sw: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    // similarity transform D^½ A D^−½ is symmetric up to discretization error
    let s = DMatrix::from_fn(n, n, |i, j| sw[i] * a[(i, j)] / sw[j]);
    let s = (&s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::new(s);
    let top = eig.eigenvalues.amax();
    let mut order: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i].abs() > 1e-12 * top).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].abs().total_cmp(&eig.eigenvalues[i].abs()).then(i.cmp(&j)));
    order.truncate(count);
    let mut char_numbers = Vec::with_capacity(order.len());
    let mut eigenfunctions = Vec::with_capacity(order.len());
    for i in order {
        char_numbers.push(1.0 / eig.eigenvalues[i]);
        let v = eig.eigenvectors.column(i);
        let mut values: Vec<f64> = (0..n).map(|k| v[k] / sw[k]).collect();
        let gf = GridFunction { grid: grid.clone(), values: values.clone() };
        let norm = gf.l2_norm();
        let pivot = values.iter().copied().fold(0.0f64, |m, t| if t.abs() > m.abs() { t } else { m });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        values.iter_mut().for_each(|t| *t *= sign / norm);
        eigenfunctions.push(GridFunction { grid: grid.clone(), values });
    }
    Ok(SpectrumEstimate { char_numbers, eigenfunctions })
}

/// f − eig·⟨f, eig⟩
pub fn deflate_on_spectrum(f: &GridFunction, eig: &GridFunction) -> GridFunction {
    let c = f.inner(eig);
    f.zip_map(eig, |a, b| a - c * b)
}

/// Restriction of a kernel to ξ ≤ x.
pub struct VolterraKernel<K>(pub K);

impl<K: Kernel> Kernel for VolterraKernel<K> {
    fn eval(&self, x: f64, xi: f64) -> f64 {
        if xi > x {
            0.0
        } else {
            self.0.eval(x, xi)
        }
    }
    fn row_breaks(&self, x: f64) -> Vec<f64> {
        let mut b = self.0.row_breaks(x);
        b.push(x);
        b
    }
    fn col_breaks(&self, xi: f64) -> Vec<f64> {
        let mut b = self.0.col_breaks(xi);
        b.push(xi);
        b
    }
}

/// ψ(x) = ∫₀ˣK(x,ξ)ψ(ξ)dξ + f(x).
///
/// The Volterra operator is discretized by product integration over [a, x],
/// which couples every node through the interpolant, so the system is solved
/// densely rather than by forward substitution.
pub fn solve_volterra2(kernel: &dyn Kernel, f: impl Fn(f64) -> f64, grid: &Grid1D) -> Result<GridFunction> {
    let vk = VolterraKernel(kernel);
    let sys = SecondKindSystem::from_kernel(&vk, f, 1.0, grid);
    let m = sys.system_matrix();
    let x = Factored::new(&m)
        .solve(&DVector::from_column_slice(&sys.free_term))
        .ok_or_else(|| Error::Degenerate("Volterra system could not be factored".into()))?;
    Ok(GridFunction::from_vector(grid, &x))
}
