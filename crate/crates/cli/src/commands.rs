use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use fredsolve::baselines;
use fredsolve::expr::Expr;
use fredsolve::kernels::{PoissonParams, DEFAULT_LAMBDA, DEFAULT_R};
use fredsolve::method_core::{
    method_v1, method_v2_single, method_v2_with_threshold, verify_solution, MethodParams, ResidualReport, V1Params,
    DEFAULT_MU, DEFAULT_THRESHOLD, DEFAULT_V1_TERMS,
};
use fredsolve::numerics::{gauss_legendre, GridFunction, Kernel};
use fredsolve::problems::{self, Evaluator, FirstKindProblem, KernelOptions, NoiseSpec, SharedKernel};
use fredsolve::reduction2d::{self, Bvp2DReduction, GridFunction2D, Method2dParams, Route, DEFAULT_N_2D};
use fredsolve::Error;

use crate::output::{self, num, Series, Table};
use crate::spec_file::ProblemSpec;
use crate::{BenchArgs, Bvp, CliError, ForwardArgs, Format, Method, MethodArgs, ProblemsArgs, ReduceArgs, SolveArgs};

#[derive(Serialize)]
struct KernelEntry {
    name: String,
    note: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    source: Option<String>,
}

#[derive(Serialize)]
struct ProblemEntry {
    name: &'static str,
    kernel: &'static str,
    psi_expr: Option<&'static str>,
    f_expr: Option<&'static str>,
    note: &'static str,
}

#[derive(Serialize)]
struct Registry {
    kernels: Vec<KernelEntry>,
    problems: Vec<ProblemEntry>,
}

pub fn problems(args: &ProblemsArgs) -> Result<String, CliError> {
    let mut kernels: Vec<KernelEntry> =
        problems::KERNELS.iter().map(|k| KernelEntry { name: k.name.into(), note: k.note.into(), source: None }).collect();
    if let Some(path) = &args.table {
        let opts = KernelOptions { r: None, table: Some(path.clone()) };
        problems::kernel_by_name("tabulated", &opts)?;
        if let Some(k) = kernels.iter_mut().find(|k| k.name == "tabulated") {
            k.source = Some(path.display().to_string());
        }
    }
    let registry = Registry {
        kernels,
        problems: problems::PROBLEMS
            .iter()
            .map(|p| ProblemEntry { name: p.name, kernel: p.kernel, psi_expr: p.psi_expr, f_expr: p.f_expr, note: p.note })
            .collect(),
    };
    match args.format {
        Format::Json => Ok(output::to_json(&registry)),
        Format::Text => {
            let mut s = String::from("KERNELS\n");
            for k in &registry.kernels {
                let src = k.source.as_ref().map(|p| format!(" [loaded from {p}]")).unwrap_or_default();
                s.push_str(&format!("  {:<18} {}{}\n", k.name, k.note, src));
            }
            s.push_str("PROBLEMS\n");
            for p in &registry.problems {
                let data = match (p.psi_expr, p.f_expr) {
                    (Some(e), _) => format!("psi = {e}"),
                    (None, Some(e)) => format!("f = {e}"),
                    _ => String::new(),
                };
                s.push_str(&format!("  {:<16} {:<18} {:<18} {}\n", p.name, p.kernel, data, p.note));
            }
            Ok(s)
        }
        other => Err(CliError::Config(format!("problems supports --format text or json, not {other:?}"))),
    }
}

fn kernel_for(arg: &str) -> Result<SharedKernel, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        let spec = ProblemSpec::read(path)?;
        return Ok(problems::kernel_by_name(&spec.kernel, &spec.options)?);
    }
    if problems::KERNELS.iter().any(|k| k.name == arg) {
        return Ok(problems::kernel_by_name(arg, &KernelOptions::default())?);
    }
    if let Some(p) = problems::PROBLEMS.iter().find(|p| p.name == arg) {
        return Ok(problems::kernel_by_name(p.kernel, &KernelOptions::default())?);
    }
    Err(CliError::Config(format!("'{arg}' is neither a file, a kernel, nor a registered problem")))
}

fn parse_expr(src: &str) -> Result<Evaluator, CliError> {
    let e = Expr::parse(src)?;
    Ok(Arc::new(move |x| e.eval(x)))
}

pub fn forward(args: &ForwardArgs) -> Result<String, CliError> {
    let kernel = kernel_for(&args.problem)?;
    let psi = parse_expr(&args.psi)?;
    let grid = gauss_legendre(args.grid, 0.0, 1.0)?;
    let f = problems::forward_apply(&*kernel, &*psi, &grid, fredsolve::numerics::DEFAULT_QUAD_ORDER);
    let mut t = Table::new(&["x", "f"]);
    for (x, v) in grid.nodes().iter().zip(&f.values) {
        t.row_nums(&[*x, *v]);
    }
    match &args.out {
        Some(dir) => {
            output::write_file(dir, "forward.csv", t.as_str())?;
            Ok(format!("wrote {}\n", dir.join("forward.csv").display()))
        }
        None => Ok(t.as_str().to_string()),
    }
}

fn resolve_problem(arg: &str, psi: Option<&str>, f: Option<&str>) -> Result<FirstKindProblem, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        return ProblemSpec::read(path)?.build();
    }
    match (psi, f) {
        (Some(_), Some(_)) => Err(CliError::Config("give --psi or --f, not both".into())),
        (Some(e), None) => Ok(problems::make_manufactured(arg, e)?),
        (None, Some(e)) => Ok(problems::with_free_term_expr(arg, &KernelOptions::default(), e)?),
        (None, None) => problems::problem_by_name(arg).map_err(|e| CliError::Config(e.to_string())),
    }
}

/// Parameters after defaults are applied.
#[derive(Debug, Clone, Copy)]
pub struct Effective {
    pub r: f64,
    pub lambda: f64,
    pub mu: f64,
    pub alpha: f64,
    pub grid: usize,
    pub fourier_n: usize,
    pub radius: f64,
    pub max_iter: usize,
    pub threshold: f64,
}

impl Effective {
    pub fn from_args(a: &MethodArgs) -> Self {
        let base = baselines::BaselineParams::default();
        Self {
            r: a.r.unwrap_or(DEFAULT_R),
            lambda: a.lambda.unwrap_or(DEFAULT_LAMBDA),
            mu: a.mu.unwrap_or(DEFAULT_MU),
            alpha: a.alpha.unwrap_or(base.alpha),
            grid: a.grid.unwrap_or(64),
            fourier_n: a.fourier_n.unwrap_or(DEFAULT_V1_TERMS),
            radius: a.radius.unwrap_or(base.radius),
            max_iter: a.max_iter.unwrap_or(base.max_iter),
            threshold: a.threshold.unwrap_or(DEFAULT_THRESHOLD),
        }
    }

    fn method_params(&self) -> Result<MethodParams, Error> {
        MethodParams::new(PoissonParams::new(self.r, self.lambda)?, self.mu)?.with_grid(self.grid)
    }

    fn json(&self, method: Method, problem: &str) -> ParamsJson {
        let mut p = ParamsJson { problem: problem.to_string(), grid: self.grid, threshold: self.threshold, ..Default::default() };
        match method {
            Method::V2 | Method::V2Single => {
                p.r = Some(self.r);
                p.lambda = Some(self.lambda);
                p.mu = Some(self.mu);
            }
            Method::V1 => {
                p.r = Some(1.0);
                p.lambda = Some(self.lambda);
                p.mu = Some(self.mu);
                p.fourier_n = Some(self.fourier_n);
            }
            Method::Lavrentiev | Method::Tikhonov => p.alpha = Some(self.alpha),
            Method::Implicit => {
                p.alpha = Some(self.alpha);
                p.max_iter = Some(self.max_iter);
            }
            Method::Fridman | Method::Krasnoselskii | Method::Steepest => p.max_iter = Some(self.max_iter),
            Method::Quasisolution => p.radius = Some(self.radius),
        }
        p
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, Default, PartialEq)]
pub struct ParamsJson {
    pub problem: String,
    pub grid: usize,
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fourier_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct Summary {
    pub method: String,
    pub params: ParamsJson,
    pub residual_l2: Option<f64>,
    pub relative_residual: Option<f64>,
    pub solvable: String,
    pub runtime_ms: f64,
    pub reconstruction_error_if_known: Option<f64>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Runs one method; every result is checked against the equation.
pub fn run_method(problem: &FirstKindProblem, method: Method, e: &Effective) -> Result<(GridFunction, ResidualReport), Error> {
    let grid = gauss_legendre(e.grid, 0.0, 1.0)?;
    let zero = grid.zeros();
    let psi = match method {
        Method::V2 => {
            let state = method_v2_with_threshold(problem, &e.method_params()?, e.threshold)?;
            return Ok((state.psi, state.report));
        }
        Method::V2Single => method_v2_single(problem, &e.method_params()?)?,
        Method::V1 => method_v1(problem, &V1Params::new(e.lambda, e.mu, e.fourier_n)?)?.sample_psi(&grid),
        Method::Lavrentiev => baselines::lavrentiev(problem, &grid, e.alpha)?,
        Method::Tikhonov => baselines::tikhonov_weighted(problem, &grid, e.alpha, |_| 1.0)?,
        Method::Fridman => {
            let step = baselines::smallest_char_number(problem, &grid)?;
            baselines::fridman_iterate(problem, &grid, step, &zero, e.max_iter, None)?.last().clone()
        }
        Method::Krasnoselskii => {
            baselines::krasnoselskii_iterate(problem, &grid, None, &zero, e.max_iter, None)?.last().clone()
        }
        Method::Implicit => baselines::implicit_iterate(problem, &grid, e.alpha, &zero, e.max_iter, None)?.last().clone(),
        Method::Steepest => baselines::steepest_descent(problem, &grid, &zero, e.max_iter, None)?.last().clone(),
        Method::Quasisolution => baselines::quasisolution(problem, &grid, e.radius)?,
    };
    let report = verify_solution(problem, &psi, e.threshold);
    Ok((psi, report))
}

fn known_error(problem: &FirstKindProblem, psi: &GridFunction) -> Option<f64> {
    let exact = problem.known_solution.as_ref()?;
    Some(psi.sub(&psi.grid.sample(|x| exact(x))).l2_norm())
}

fn elapsed_ms(start: Instant, fixed: bool) -> f64 {
    if fixed {
        0.0
    } else {
        (start.elapsed().as_secs_f64() * 1e3 * 1e3).round() / 1e3
    }
}

pub fn solve(args: &SolveArgs) -> Result<String, CliError> {
    let problem = resolve_problem(&args.problem, args.psi.as_deref(), args.f.as_deref())?;
    let eff = Effective::from_args(&args.params);
    let start = Instant::now();
    let (psi, report) = run_method(&problem, args.method, &eff)?;
    let runtime_ms = elapsed_ms(start, args.seedless);

    let mut t = Table::new(&["x", "psi"]);
    for (x, v) in psi.grid.nodes().iter().zip(&psi.values) {
        t.row_nums(&[*x, *v]);
    }
    let summary = Summary {
        method: args.method.name().to_string(),
        params: eff.json(args.method, &problem.name),
        residual_l2: finite(report.residual_l2),
        relative_residual: finite(report.relative),
        solvable: report.solvable.as_str().to_string(),
        runtime_ms,
        reconstruction_error_if_known: known_error(&problem, &psi).and_then(finite),
    };
    let json = output::to_json(&summary);
    output::write_file(&args.out, "psi.csv", t.as_str())?;
    output::write_file(&args.out, "summary.json", &json)?;
    Ok(json)
}

struct BenchRow {
    method: Method,
    lambda: Option<f64>,
    epsilon: f64,
    omega: f64,
    status: &'static str,
    residual: f64,
    reconstruction_error: f64,
    perturbation: f64,
    message: String,
}

fn status_of(e: &Error) -> &'static str {
    match e {
        Error::Excluded(_) => "excluded",
        _ => "error",
    }
}

pub fn bench(args: &BenchArgs) -> Result<String, CliError> {
    let problem = resolve_problem(&args.problem, None, None)?;
    let base = Effective::from_args(&args.params);
    if args.methods.is_empty() || args.epsilons.is_empty() {
        return Err(CliError::Config("bench needs at least one method and one epsilon".into()));
    }
    let mut omegas: Vec<f64> = args.modes.iter().map(|&m| problems::mode_frequency(m)).collect();
    omegas.extend(&args.omegas);
    if omegas.is_empty() {
        omegas.push(problems::mode_frequency(1));
    }
    let lambdas = if args.lambdas.is_empty() { vec![base.lambda] } else { args.lambdas.clone() };
    let mut configs: Vec<(Method, Option<f64>)> = Vec::new();
    for &m in &args.methods {
        if m.uses_lambda() {
            configs.extend(lambdas.iter().map(|&l| (m, Some(l))));
        } else {
            configs.push((m, None));
        }
    }
    let eff_for = |lambda: Option<f64>| Effective { lambda: lambda.unwrap_or(base.lambda), ..base };

    let clean: Vec<Option<GridFunction>> =
        configs.par_iter().map(|&(m, l)| run_method(&problem, m, &eff_for(l)).ok().map(|r| r.0)).collect();
    let mut jobs = Vec::new();
    for (ci, &(m, l)) in configs.iter().enumerate() {
        for &eps in &args.epsilons {
            for &omega in &omegas {
                jobs.push((ci, m, l, eps, omega));
            }
        }
    }
    let rows: Vec<BenchRow> = jobs
        .par_iter()
        .map(|&(ci, method, lambda, epsilon, omega)| {
            let mut row = BenchRow {
                method,
                lambda,
                epsilon,
                omega,
                status: "ok",
                residual: f64::NAN,
                reconstruction_error: f64::NAN,
                perturbation: f64::NAN,
                message: String::new(),
            };
            let outcome = NoiseSpec::new(epsilon, omega)
                .map(|n| problems::perturb(&problem, n))
                .and_then(|p| run_method(&p, method, &eff_for(lambda)).map(|r| (p, r)));
            match outcome {
                Ok((_, (psi, report))) => {
                    row.residual = report.residual_l2;
                    row.reconstruction_error = known_error(&problem, &psi).unwrap_or(f64::NAN);
                    if let Some(c) = &clean[ci] {
                        row.perturbation = psi.sub(c).l2_norm();
                    }
                }
                Err(e) => {
                    row.status = status_of(&e);
                    row.message = e.to_string();
                }
            }
            row
        })
        .collect();

    let mut t = Table::new(&[
        "method",
        "lambda",
        "epsilon",
        "omega",
        "status",
        "residual",
        "reconstruction_error",
        "perturbation",
        "message",
    ]);
    for r in &rows {
        t.row(&[
            r.method.name().to_string(),
            r.lambda.map(num).unwrap_or_default(),
            num(r.epsilon),
            num(r.omega),
            r.status.to_string(),
            num(r.residual),
            num(r.reconstruction_error),
            num(r.perturbation),
            r.message.clone(),
        ]);
    }
    let mut written = Vec::new();
    if args.format.contains(&Format::Csv) {
        output::write_file(&args.out, "bench.csv", t.as_str())?;
        written.push("bench.csv");
    }
    if args.format.contains(&Format::Svg) {
        let series: Vec<Series> = configs
            .iter()
            .map(|&(m, l)| Series {
                label: match l {
                    Some(l) => format!("{} (lambda={l})", m.name()),
                    None => m.name().to_string(),
                },
                points: rows
                    .iter()
                    .filter(|r| r.method == m && r.lambda == l)
                    .enumerate()
                    .map(|(k, r)| {
                        let y = if r.reconstruction_error.is_finite() { r.reconstruction_error } else { r.residual };
                        (k as f64, y)
                    })
                    .collect::<Vec<_>>(),
            })
            .collect();
        let svg = output::line_chart(
            &format!("{}: error over the noise sweep", problem.name),
            "run (epsilon-major, omega-minor)",
            "L2 error (log scale)",
            &series,
        );
        output::write_file(&args.out, "bench.svg", &svg)?;
        written.push("bench.svg");
    }
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    Ok(format!("{} runs ({} not ok); wrote {} in {}\n", rows.len(), failed, written.join(", "), args.out.display()))
}

#[derive(Serialize)]
struct ReduceSummary {
    reduction: String,
    grid: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<ParamsJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    route_difference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual_l2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    relative_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    solvable: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    closure_delta: Option<f64>,
    runtime_ms: f64,
}

fn kernel_table(k: &dyn Kernel, nodes: &[f64], names: [&str; 3]) -> Table {
    let mut t = Table::new(&names);
    for &s in nodes {
        for &sigma in nodes {
            t.row_nums(&[s, sigma, k.eval(s, sigma)]);
        }
    }
    t
}

pub fn reduce(args: &ReduceArgs) -> Result<String, CliError> {
    match args.bvp {
        Bvp::Ode => reduce_ode(args),
        Bvp::Membrane => reduce_2d(args, reduction2d::reduce_membrane()),
        Bvp::Heat => reduce_2d(args, reduction2d::reduce_heat(parse_expr(&args.u0)?)?),
    }
}

fn reduce_ode(args: &ReduceArgs) -> Result<String, CliError> {
    let a = parse_expr(&args.a)?;
    let f = parse_expr(&args.f)?;
    let n = args.params.grid.unwrap_or(64);
    let grid = gauss_legendre(n, 0.0, 1.0)?;
    let green = fredsolve::numerics::DiagonalKinkKernel(|x: f64, xi: f64| {
        let v = if xi <= x { x - xi } else { 0.0 };
        v - (1.0 - xi)
    });
    output::write_file(&args.out, "ode_kernel.csv", kernel_table(&green, grid.nodes(), ["x", "xi", "green"]).as_str())?;
    let mut summary = ReduceSummary {
        reduction: "ode".into(),
        grid: n,
        params: None,
        route_difference: None,
        residual_l2: None,
        relative_residual: None,
        solvable: None,
        closure_delta: None,
        runtime_ms: 0.0,
    };
    if args.solve {
        let start = Instant::now();
        let (pv, uv) = reduction2d::reduce_ode_volterra(a.clone(), f.clone(), &grid)?;
        let (pf, uf) = reduction2d::reduce_ode_fredholm(a, f, &grid)?;
        summary.runtime_ms = elapsed_ms(start, false);
        summary.route_difference = Some(uv.sub(&uf).max_abs());
        let mut t = Table::new(&["x", "psi_volterra", "u_volterra", "psi_fredholm", "u_fredholm"]);
        for i in 0..n {
            t.row_nums(&[grid.nodes()[i], pv.values[i], uv.values[i], pf.values[i], uf.values[i]]);
        }
        output::write_file(&args.out, "ode_solution.csv", t.as_str())?;
    }
    let json = output::to_json(&summary);
    output::write_file(&args.out, "reduce.json", &json)?;
    Ok(json)
}

fn reduce_2d(args: &ReduceArgs, red: Bvp2DReduction) -> Result<String, CliError> {
    let n = args.params.grid.unwrap_or(DEFAULT_N_2D);
    let grid = gauss_legendre(n, 0.0, 1.0)?;
    let f = GridFunction2D::sample(&grid, &grid, |x, y| red.f(x, y));
    let mut t = Table::new(&["x", "y", "f"]);
    for (i, &x) in grid.nodes().iter().enumerate() {
        for (j, &y) in grid.nodes().iter().enumerate() {
            t.row_nums(&[x, y, f.values[(i, j)]]);
        }
    }
    output::write_file(&args.out, "f.csv", t.as_str())?;
    output::write_file(&args.out, "tau1.csv", kernel_table(&**red.tau1_kernel(), grid.nodes(), ["x", "xi", "tau1"]).as_str())?;
    output::write_file(&args.out, "tau2.csv", kernel_table(&**red.tau2_kernel(), grid.nodes(), ["y", "eta", "tau2"]).as_str())?;

    let mut summary = ReduceSummary {
        reduction: red.name.clone(),
        grid: n,
        params: None,
        route_difference: None,
        residual_l2: None,
        relative_residual: None,
        solvable: None,
        closure_delta: None,
        runtime_ms: 0.0,
    };
    if args.solve {
        let eff = Effective::from_args(&args.params);
        let params = Method2dParams::new(eff.method_params()?, n, n)?;
        let start = Instant::now();
        let result = reduction2d::method2d_solve_with_threshold(&red, &params, eff.threshold)?;
        summary.runtime_ms = elapsed_ms(start, false);
        let mut pj = eff.json(Method::V2, &red.name);
        pj.grid = n;
        summary.params = Some(pj);
        let psi = &result.psi;
        let ux = reduction2d::reconstruct_u(&red, psi, Route::X);
        let uy = reduction2d::reconstruct_u(&red, psi, Route::Y);
        let mut t = Table::new(&["x", "y", "psi", "u_x", "u_y"]);
        for (i, &x) in grid.nodes().iter().enumerate() {
            for (j, &y) in grid.nodes().iter().enumerate() {
                t.row_nums(&[x, y, psi.values[(i, j)], ux.values[(i, j)], uy.values[(i, j)]]);
            }
        }
        output::write_file(&args.out, "psi.csv", t.as_str())?;
        summary.residual_l2 = finite(result.report.residual_l2);
        summary.relative_residual = finite(result.report.relative);
        summary.solvable = Some(result.report.solvable.as_str().to_string());
        if args.verify {
            let u1 = reduction2d::reconstruct_corrected(&red, psi, Route::X);
            let u2 = reduction2d::reconstruct_corrected(&red, psi, Route::Y);
            summary.closure_delta = reduction2d::closure_delta(&u1, &u2).ok();
        }
    }
    let json = output::to_json(&summary);
    output::write_file(&args.out, "reduce.json", &json)?;
    Ok(json)
}
