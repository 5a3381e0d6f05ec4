use std::fmt;

/// Family of excluded values for the Poisson parameter λ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExclusionFamily {
    /// λ = 0
    Zero,
    /// λ = r⁻ⁿ
    Reciprocal,
    /// λ = ½r⁻ⁿ
    HalfReciprocal,
    /// λ = (−1+√2)r⁻ⁿ
    SqrtPlus,
    /// λ = (−1−√2)r⁻ⁿ
    SqrtMinus,
}

impl fmt::Display for ExclusionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ExclusionFamily::Zero => "0",
            ExclusionFamily::Reciprocal => "r^-n",
            ExclusionFamily::HalfReciprocal => "½r^-n",
            ExclusionFamily::SqrtPlus => "(-1+√2)r^-n",
            ExclusionFamily::SqrtMinus => "(-1-√2)r^-n",
        };
        f.write_str(s)
    }
}

/// Which excluded value λ came too close to.
#[derive(Debug, Clone, PartialEq)]
pub struct Exclusion {
    pub lambda: f64,
    pub family: ExclusionFamily,
    pub n: usize,
    pub value: f64,
    pub rel_dist: f64,
}

impl fmt::Display for Exclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "lambda = {} is excluded: family {} with n = {} (value {}, relative distance {:.3e})",
            self.lambda, self.family, self.n, self.value, self.rel_dist
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parameter exclusion: {0}")]
    Excluded(Exclusion),
    #[error("system is on the spectrum: mu = {mu}, smallest/largest singular value = {ratio:.3e}")]
    OnSpectrum { mu: f64, ratio: f64 },
    #[error("no valid mu among probed values {probed:?}")]
    NoValidMu { probed: Vec<f64> },
    #[error("contraction condition violated: |mu|·c1 = {product} with c1 = {c1}")]
    NotContractive { c1: f64, product: f64 },
    #[error("step {step} outside the admissible range (0, {bound})")]
    StepBound { step: f64, bound: f64 },
    #[error("invalid radius: {0}")]
    InvalidRadius(String),
    #[error("degenerate problem: {0}")]
    Degenerate(String),
    #[error("closure error undefined: both fields vanish")]
    UndefinedDelta,
    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },
    #[error("unknown kernel '{0}'")]
    UnknownKernel(String),
    #[error("system too large: {unknowns} unknowns (limit {limit})")]
    TooLarge { unknowns: usize, limit: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by numerical parameters rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Excluded(_)
                | Error::OnSpectrum { .. }
                | Error::NoValidMu { .. }
                | Error::NotContractive { .. }
                | Error::StepBound { .. }
                | Error::InvalidRadius(_)
                | Error::Degenerate(_)
                | Error::UndefinedDelta
                | Error::TooLarge { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
