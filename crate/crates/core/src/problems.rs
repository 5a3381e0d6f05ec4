//! Registered kernels, manufactured problems, and the right-hand-side noise model.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::kernels::PoissonKernel;
use crate::numerics::{integrate_fn, nystrom_matrix, Grid1D, GridFunction, Kernel, DEFAULT_QUAD_ORDER};

pub type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SharedKernel = Arc<dyn Kernel>;

/// ∫₀¹k(x,ξ)ψ(ξ)dξ = f(x)
#[derive(Clone)]
pub struct FirstKindProblem {
    pub kernel: SharedKernel,
    pub free_term: Evaluator,
    pub name: String,
    pub provenance: String,
    /// Manufacturing input, if any. Solvers never read it.
    pub known_solution: Option<Evaluator>,
}

impl fmt::Debug for FirstKindProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FirstKindProblem")
            .field("name", &self.name)
            .field("provenance", &self.provenance)
            .field("known_solution", &self.known_solution.is_some())
            .finish()
    }
}

impl FirstKindProblem {
    pub fn new(kernel: SharedKernel, free_term: Evaluator, name: impl Into<String>) -> Self {
        Self { kernel, free_term, name: name.into(), provenance: String::new(), known_solution: None }
    }

    pub fn with_provenance(mut self, note: impl Into<String>) -> Self {
        self.provenance = note.into();
        self
    }

    pub fn f(&self, x: f64) -> f64 {
        (self.free_term)(x)
    }

    /// Free term sampled on a grid.
    pub fn sample_f(&self, grid: &Grid1D) -> GridFunction {
        grid.sample(|x| (self.free_term)(x))
    }
}

/// Amplitude and frequency of the perturbation ε·sin(ωx).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub epsilon: f64,
    pub omega: f64,
}

impl NoiseSpec {
    pub fn new(epsilon: f64, omega: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || !omega.is_finite() {
            return Err(Error::InvalidArgument(format!("need epsilon >= 0 and finite omega, got {epsilon}, {omega}")));
        }
        Ok(Self { epsilon, omega })
    }
}

/// k(x,ξ) = x(1−ξ) for x ≤ ξ, ξ(1−x) otherwise: the deflection kernel of a string.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreenTriangular;

impl Kernel for GreenTriangular {
    fn eval(&self, x: f64, xi: f64) -> f64 {
        if x <= xi {
            x * (1.0 - xi)
        } else {
            xi * (1.0 - x)
        }
    }
    fn row_breaks(&self, x: f64) -> Vec<f64> {
        vec![x]
    }
    fn col_breaks(&self, xi: f64) -> Vec<f64> {
        vec![xi]
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantKernel(pub f64);

impl Kernel for ConstantKernel {
    fn eval(&self, _x: f64, _xi: f64) -> f64 {
        self.0
    }
}

/// Kernel sampled on a rectangular table and interpolated bilinearly.
#[derive(Debug, Clone)]
pub struct TabulatedKernel {
    pub source: Option<PathBuf>,
    xs: Vec<f64>,
    xis: Vec<f64>,
    /// row i holds k(xs[i], ·)
    values: Vec<Vec<f64>>,
}

impl TabulatedKernel {
    pub fn new(xs: Vec<f64>, xis: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        let increasing = |v: &[f64]| v.windows(2).all(|p| p[0] < p[1]);
        if xs.len() < 2 || xis.len() < 2 || !increasing(&xs) || !increasing(&xis) {
            return Err(Error::InvalidArgument("table axes need at least two strictly increasing nodes".into()));
        }
        if values.len() != xs.len() || values.iter().any(|r| r.len() != xis.len()) {
            return Err(Error::InvalidArgument("table body does not match its axes".into()));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("table contains non-finite values".into()));
        }
        Ok(Self { source: None, xs, xis, values })
    }

    /// Header row: a label cell then the ξ nodes; each further row: x then values.
    pub fn from_csv_reader(reader: impl std::io::Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
        let bad = |m: String| Error::InvalidArgument(format!("tabulated kernel: {m}"));
        let mut rows = rdr.records();
        let header = rows.next().ok_or_else(|| bad("empty file".into()))?.map_err(|e| bad(e.to_string()))?;
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("not a number: '{s}'")));
        let xis = header.iter().skip(1).map(num).collect::<Result<Vec<_>>>()?;
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for rec in rows {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let mut it = rec.iter();
            xs.push(num(it.next().ok_or_else(|| bad("empty row".into()))?)?);
            values.push(it.map(num).collect::<Result<Vec<_>>>()?);
        }
        Self::new(xs, xis, values)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let mut k = Self::from_csv_reader(file)?;
        k.source = Some(path.to_path_buf());
        Ok(k)
    }

    fn locate(nodes: &[f64], t: f64) -> (usize, f64) {
        let t = t.clamp(nodes[0], nodes[nodes.len() - 1]);
        let i = nodes.partition_point(|&v| v <= t).clamp(1, nodes.len() - 1) - 1;
        (i, (t - nodes[i]) / (nodes[i + 1] - nodes[i]))
    }

    fn interior(nodes: &[f64]) -> Vec<f64> {
        nodes[1..nodes.len() - 1].to_vec()
    }
}

impl Kernel for TabulatedKernel {
    fn eval(&self, x: f64, xi: f64) -> f64 {
        let (i, s) = Self::locate(&self.xs, x);
        let (j, t) = Self::locate(&self.xis, xi);
        let v = &self.values;
        (1.0 - s) * ((1.0 - t) * v[i][j] + t * v[i][j + 1]) + s * ((1.0 - t) * v[i + 1][j] + t * v[i + 1][j + 1])
    }
    fn row_breaks(&self, _x: f64) -> Vec<f64> {
        Self::interior(&self.xis)
    }
    fn col_breaks(&self, _xi: f64) -> Vec<f64> {
        Self::interior(&self.xs)
    }
    fn outer_breaks(&self) -> Vec<f64> {
        Self::interior(&self.xs)
    }
}

/// Options consulted by kernel lookup.
#[derive(Debug, Clone, Default)]
pub struct KernelOptions {
    /// Parameter of "poisson_r"; defaults to 0.5.
    pub r: Option<f64>,
    /// CSV file for "tabulated".
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelInfo {
    pub name: &'static str,
    pub note: &'static str,
}

pub const KERNELS: [KernelInfo; 4] = [
    KernelInfo { name: "green_triangular", note: "string deflection kernel; eigenpairs (nπ)², √2 sin(nπx)" },
    KernelInfo { name: "constant", note: "k ≡ 1" },
    KernelInfo { name: "poisson_r", note: "Poisson kernel h on [0,1]², parameter r (default 0.5)" },
    KernelInfo { name: "tabulated", note: "CSV table, bilinear interpolation" },
];

pub fn kernel_by_name(name: &str, opts: &KernelOptions) -> Result<SharedKernel> {
    match name {
        "green_triangular" => Ok(Arc::new(GreenTriangular)),
        "constant" => Ok(Arc::new(ConstantKernel(1.0))),
        "poisson_r" => {
            let r = opts.r.unwrap_or(0.5);
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::InvalidArgument(format!("poisson_r needs 0 < r < 1, got {r}")));
            }
            Ok(Arc::new(PoissonKernel { r }))
        }
        "tabulated" => {
            let path = opts
                .table
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("tabulated kernel needs a table path".into()))?;
            Ok(Arc::new(TabulatedKernel::from_csv_path(path)?))
        }
        other => Err(Error::UnknownKernel(other.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInfo {
    pub name: &'static str,
    pub kernel: &'static str,
    pub psi_expr: Option<&'static str>,
    pub f_expr: Option<&'static str>,
    pub note: &'static str,
}

pub const PROBLEMS: [ProblemInfo; 6] = [
    ProblemInfo { name: "green_m1", kernel: "green_triangular", psi_expr: Some("sin(pi*x)"), f_expr: None, note: "f = sin(πx)/π², exact solution sin(πx)" },
    ProblemInfo { name: "green_m5", kernel: "green_triangular", psi_expr: Some("sin(5*pi*x)"), f_expr: None, note: "f = sin(5πx)/(5π)², exact solution sin(5πx)" },
    ProblemInfo { name: "green_parabola", kernel: "green_triangular", psi_expr: Some("x*(1-x)"), f_expr: None, note: "exact solution x(1−x)" },
    ProblemInfo { name: "constant_one", kernel: "constant", psi_expr: Some("1"), f_expr: None, note: "k ≡ 1, exact solution 1" },
    ProblemInfo { name: "green_f_one", kernel: "green_triangular", psi_expr: None, f_expr: Some("1"), note: "f ≡ 1 lies outside the range: k vanishes at x = 0, 1" },
    ProblemInfo { name: "green_zero", kernel: "green_triangular", psi_expr: None, f_expr: Some("0"), note: "f ≡ 0" },
];

pub fn problem_by_name(name: &str) -> Result<FirstKindProblem> {
    let info = PROBLEMS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown problem '{name}'")))?;
    let mut p = match (info.psi_expr, info.f_expr) {
        (Some(psi), _) => make_manufactured(info.kernel, psi)?,
        (None, Some(f)) => with_free_term_expr(info.kernel, &KernelOptions::default(), f)?,
        (None, None) => unreachable!("registry entries carry an expression"),
    };
    p.name = info.name.to_string();
    p.provenance = info.note.to_string();
    Ok(p)
}

/// Problem with a free term given as an expression.
pub fn with_free_term_expr(kernel_name: &str, opts: &KernelOptions, f_expr: &str) -> Result<FirstKindProblem> {
    let kernel = kernel_by_name(kernel_name, opts)?;
    let f = Expr::parse(f_expr)?;
    Ok(FirstKindProblem::new(kernel, Arc::new(move |x| f.eval(x)), format!("{kernel_name}[f={f_expr}]"))
        .with_provenance("free term given directly"))
}

/// f(xᵢ) = ∫₀¹k(xᵢ,ξ)ψ(ξ)dξ with the quadrature split at kernel kinks.
pub fn forward_apply(k: &dyn Kernel, psi: &dyn Fn(f64) -> f64, grid: &Grid1D, quad_order: usize) -> GridFunction {
    grid.sample(|x| forward_at(k, psi, x, quad_order))
}

/// The forward map applied to grid values of ψ (interpolated on their own grid).
pub fn forward_apply_values(k: &dyn Kernel, psi: &GridFunction) -> GridFunction {
    let a = nystrom_matrix(k, &psi.grid);
    GridFunction::from_vector(&psi.grid, &(a * psi.to_vector()))
}

fn forward_at(k: &dyn Kernel, psi: &dyn Fn(f64) -> f64, x: f64, quad_order: usize) -> f64 {
    integrate_fn(|xi| k.eval(x, xi) * psi(xi), 0.0, 1.0, &k.row_breaks(x), quad_order)
}

/// Manufactured problem: f is the forward image of a chosen ψ*.
pub fn manufactured(kernel: SharedKernel, psi: Evaluator, name: impl Into<String>) -> FirstKindProblem {
    let k = kernel.clone();
    let p = psi.clone();
    let f: Evaluator = Arc::new(move |x| forward_at(&*k, &*p, x, DEFAULT_QUAD_ORDER));
    FirstKindProblem {
        kernel,
        free_term: f,
        name: name.into(),
        provenance: "manufactured through the forward map".into(),
        known_solution: Some(psi),
    }
}

pub fn make_manufactured(kernel_name: &str, psi_expr: &str) -> Result<FirstKindProblem> {
    make_manufactured_with(kernel_name, &KernelOptions::default(), psi_expr)
}

pub fn make_manufactured_with(kernel_name: &str, opts: &KernelOptions, psi_expr: &str) -> Result<FirstKindProblem> {
    let kernel = kernel_by_name(kernel_name, opts)?;
    let e = Expr::parse(psi_expr)?;
    Ok(manufactured(kernel, Arc::new(move |x| e.eval(x)), format!("{kernel_name}[psi={psi_expr}]")))
}

/// f ↦ f + ε·sin(ωx); the known solution no longer applies.
pub fn perturb(problem: &FirstKindProblem, spec: NoiseSpec) -> FirstKindProblem {
    if spec.epsilon == 0.0 {
        return problem.clone();
    }
    let f = problem.free_term.clone();
    let NoiseSpec { epsilon, omega } = spec;
    FirstKindProblem {
        kernel: problem.kernel.clone(),
        free_term: Arc::new(move |x| f(x) + epsilon * (omega * x).sin()),
        name: format!("{}+noise(eps={epsilon},omega={omega})", problem.name),
        provenance: problem.provenance.clone(),
        known_solution: None,
    }
}

/// Frequency ω = mπ for the m-th sine mode.
pub fn mode_frequency(m: u32) -> f64 {
    m as f64 * PI
}
