use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod output;
mod spec_file;

#[derive(Debug)]
pub enum CliError {
    /// Bad input: unknown names, unreadable files, malformed expressions.
    Config(String),
    Core(fredsolve::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<fredsolve::Error> for CliError {
    fn from(e: fredsolve::Error) -> Self {
        CliError::Core(e)
    }
}

#[derive(Parser, Debug)]
#[command(name = "fredsolve", version, about = "First-kind Fredholm equations: solvers, baselines and BVP reductions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List registered kernels and problems
    Problems(ProblemsArgs),
    /// Tabulate f = ∫kψ for a given ψ
    Forward(ForwardArgs),
    /// Solve a first-kind problem and verify the result
    Solve(SolveArgs),
    /// Run methods over a noise sweep
    Bench(BenchArgs),
    /// Reduce a boundary-value problem to integral form
    Reduce(ReduceArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Csv,
    Json,
    Svg,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    V2,
    V2Single,
    V1,
    Lavrentiev,
    Tikhonov,
    Fridman,
    Krasnoselskii,
    Implicit,
    Steepest,
    Quasisolution,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::V2 => "v2",
            Method::V2Single => "v2-single",
            Method::V1 => "v1",
            Method::Lavrentiev => "lavrentiev",
            Method::Tikhonov => "tikhonov",
            Method::Fridman => "fridman",
            Method::Krasnoselskii => "krasnoselskii",
            Method::Implicit => "implicit",
            Method::Steepest => "steepest",
            Method::Quasisolution => "quasisolution",
        }
    }

    pub fn uses_lambda(self) -> bool {
        matches!(self, Method::V2 | Method::V2Single | Method::V1)
    }
}

#[derive(Args, Debug)]
pub struct ProblemsArgs {
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    /// CSV table to register as the tabulated kernel
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct MethodArgs {
    /// Poisson parameter r (1 is forced for v1)
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Number of solution grid nodes
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long = "fourier-n")]
    pub fourier_n: Option<usize>,
    /// Norm bound of the quasisolution
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// Relative residual above which the equation is declared unsolvable
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ForwardArgs {
    /// Kernel name, registered problem name, or problem file
    #[arg(long)]
    pub problem: String,
    /// ψ as an expression in x
    #[arg(long)]
    pub psi: String,
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    /// Write forward.csv here instead of printing
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Registered problem name, kernel name (with --psi or --f), or problem file
    #[arg(long)]
    pub problem: String,
    #[arg(long)]
    pub psi: Option<String>,
    #[arg(long = "f")]
    pub f: Option<String>,
    #[arg(long, value_enum, default_value = "v2")]
    pub method: Method,
    #[command(flatten)]
    pub params: MethodArgs,
    #[arg(long, default_value = "fredsolve-out")]
    pub out: PathBuf,
    /// Record runtime_ms as 0 so that repeated runs give identical files
    #[arg(long)]
    pub seedless: bool,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long)]
    pub problem: String,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "lavrentiev")]
    pub methods: Vec<Method>,
    /// λ values for the methods that take one
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub epsilons: Vec<f64>,
    /// Noise modes m, giving ω = mπ
    #[arg(long, value_delimiter = ',')]
    pub modes: Vec<u32>,
    /// Noise frequencies ω, used in addition to --modes
    #[arg(long, value_delimiter = ',')]
    pub omegas: Vec<f64>,
    #[command(flatten)]
    pub params: MethodArgs,
    #[arg(long, default_value = "fredsolve-out")]
    pub out: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "csv,svg")]
    pub format: Vec<Format>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bvp {
    Ode,
    Membrane,
    Heat,
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    #[arg(value_enum)]
    pub bvp: Bvp,
    /// Coefficient a(x) of u″ − a·u = f
    #[arg(long, default_value = "1")]
    pub a: String,
    /// Right side f(x) of the ODE
    #[arg(long = "f", default_value = "-1", allow_hyphen_values = true)]
    pub f: String,
    /// Initial temperature for the heat problem
    #[arg(long, default_value = "sin(pi*x)")]
    pub u0: String,
    #[arg(long)]
    pub solve: bool,
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub params: MethodArgs,
    #[arg(long, default_value = "fredsolve-out")]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Problems(a) => commands::problems(&a),
        Command::Forward(a) => commands::forward(&a),
        Command::Solve(a) => commands::solve(&a),
        Command::Bench(a) => commands::bench(&a),
        Command::Reduce(a) => commands::reduce(&a),
    };
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
