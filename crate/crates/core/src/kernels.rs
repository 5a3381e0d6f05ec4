//! Poisson kernel, its resolvents, and the admissibility test for λ.
//!
//! Every kernel here is a difference kernel of period 1 written as
//! c₀ + 2Σₙ aₙ cos(2nπ(x−ξ)).

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Exclusion, ExclusionFamily, Result};
use crate::numerics::Kernel;

/// Default relative clearance between λ and any excluded value.
pub const DEFAULT_MIN_REL_DIST: f64 = 1e-3;
pub const DEFAULT_SERIES_TOL: f64 = 1e-14;
pub const DEFAULT_R: f64 = 0.5;
pub const DEFAULT_LAMBDA: f64 = 0.2;

/// r, λ, Λ = λ² and the series truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonParams {
    r: f64,
    lambda: f64,
    big_lambda: f64,
    n_trunc: usize,
    series_tol: f64,
}

impl PoissonParams {
    pub fn new(r: f64, lambda: f64) -> Result<Self> {
        Self::with_tol(r, lambda, DEFAULT_SERIES_TOL)
    }

    /// Truncation chosen so that the tail bound 2r^(N+1)/(1−r) is at most `tol`.
    pub fn with_tol(r: f64, lambda: f64, tol: f64) -> Result<Self> {
        check_r(r, lambda)?;
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!("series tolerance must be positive, got {tol}")));
        }
        let mut n = 0usize;
        while tail_bound(r, n) > tol {
            n += 1;
        }
        Ok(Self { r, lambda, big_lambda: lambda * lambda, n_trunc: n, series_tol: tol })
    }

    /// Fixed truncation; the tolerance becomes the implied tail bound.
    pub fn with_truncation(r: f64, lambda: f64, n_trunc: usize) -> Result<Self> {
        check_r(r, lambda)?;
        Ok(Self { r, lambda, big_lambda: lambda * lambda, n_trunc, series_tol: tail_bound(r, n_trunc) })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Λ = λ²
    pub fn big_lambda(&self) -> f64 {
        self.big_lambda
    }

    pub fn n_trunc(&self) -> usize {
        self.n_trunc
    }

    pub fn series_tol(&self) -> f64 {
        self.series_tol
    }

    /// Same r and truncation with another λ.
    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, big_lambda: lambda * lambda, ..*self }
    }
}

impl Default for PoissonParams {
    fn default() -> Self {
        Self::new(DEFAULT_R, DEFAULT_LAMBDA).expect("defaults are valid")
    }
}

fn check_r(r: f64, lambda: f64) -> Result<()> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidArgument(format!("r must lie in (0, 1), got {r}")));
    }
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda must be finite, got {lambda}")));
    }
    Ok(())
}

/// 2r^(N+1)/(1−r)
pub fn tail_bound(r: f64, n: usize) -> f64 {
    2.0 * r.powi(n as i32 + 1) / (1.0 - r)
}

/// Σₙ₌₁ coeffs[n−1]·cos(2nπθ).
fn cos_sum(theta: f64, coeffs: &[f64]) -> f64 {
    let arg = 2.0 * PI * theta;
    let (s1, c1) = arg.sin_cos();
    let mut sum = 0.0;
    let (mut c, mut s) = (1.0, 0.0);
    for (i, a) in coeffs.iter().enumerate() {
        let n = i + 1;
        if n % 64 == 0 {
            // resynchronise the rotation to keep rounding from accumulating
            let (sn, cn) = (n as f64 * arg).sin_cos();
            c = cn;
            s = sn;
        } else {
            let cn = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = cn;
        }
        sum += a * c;
    }
    sum
}

/// Difference kernel c₀ + 2Σₙ aₙcos(2nπ(x−ξ)).
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesKernel {
    c0: f64,
    coeffs: Vec<f64>,
}

impl SeriesKernel {
    pub fn new(c0: f64, coeffs: Vec<f64>) -> Self {
        Self { c0, coeffs }
    }

    pub fn constant_term(&self) -> f64 {
        self.c0
    }

    /// aₙ for n ≥ 1; zero beyond the truncation.
    pub fn coefficient(&self, n: usize) -> f64 {
        if n == 0 {
            self.c0
        } else {
            self.coeffs.get(n - 1).copied().unwrap_or(0.0)
        }
    }

    pub fn n_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, x: f64, xi: f64) -> f64 {
        self.c0 + 2.0 * cos_sum(x - xi, &self.coeffs)
    }
}

impl Kernel for SeriesKernel {
    fn eval(&self, x: f64, xi: f64) -> f64 {
        SeriesKernel::eval(self, x, xi)
    }
}

/// Closed-form Poisson kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonKernel {
    pub r: f64,
}

impl PoissonKernel {
    pub fn eval(&self, x: f64, xi: f64) -> f64 {
        let r = self.r;
        (1.0 - r * r) / (1.0 - 2.0 * r * (2.0 * PI * (x - xi)).cos() + r * r)
    }
}

impl Kernel for PoissonKernel {
    fn eval(&self, x: f64, xi: f64) -> f64 {
        PoissonKernel::eval(self, x, xi)
    }
}

/// h(x,ξ) = (1−r²)/(1−2r·cos(2π(x−ξ))+r²)
pub fn poisson_h(x: f64, xi: f64, p: &PoissonParams) -> f64 {
    PoissonKernel { r: p.r }.eval(x, xi)
}

/// 1 + 2Σₙ₌₁^N rⁿcos(2nπ(x−ξ))
pub fn poisson_h_series(x: f64, xi: f64, p: &PoissonParams) -> f64 {
    poisson_series_kernel(p).eval(x, xi)
}

pub fn poisson_series_kernel(p: &PoissonParams) -> SeriesKernel {
    let coeffs = (1..=p.n_trunc).map(|n| p.r.powi(n as i32)).collect();
    SeriesKernel::new(1.0, coeffs)
}

/// Series of H: 1/(1−2λ) + 2Σ rⁿ/(1−2λrⁿ)·cos(2nπ(x−ξ)).
pub fn resolvent_h_kernel(p: &PoissonParams) -> Result<SeriesKernel> {
    check_families(p, &[ExclusionFamily::HalfReciprocal], DEFAULT_MIN_REL_DIST)?;
    let lam = p.lambda;
    let coeffs = (1..=p.n_trunc)
        .map(|n| {
            let rn = p.r.powi(n as i32);
            rn / (1.0 - 2.0 * lam * rn)
        })
        .collect();
    Ok(SeriesKernel::new(1.0 / (1.0 - 2.0 * lam), coeffs))
}

/// Series of l: 1/(1−2λ) + 2Σ r²ⁿ/(1−2λrⁿ)·cos(2nπ(x−ξ)).
pub fn kernel_l_kernel(p: &PoissonParams) -> Result<SeriesKernel> {
    check_families(p, &[ExclusionFamily::HalfReciprocal], DEFAULT_MIN_REL_DIST)?;
    let lam = p.lambda;
    let coeffs = (1..=p.n_trunc)
        .map(|n| {
            let rn = p.r.powi(n as i32);
            rn * rn / (1.0 - 2.0 * lam * rn)
        })
        .collect();
    Ok(SeriesKernel::new(1.0 / (1.0 - 2.0 * lam), coeffs))
}

/// Series of L: 1/(1−2λ−Λ) + 2Σ r²ⁿ/(1−2λrⁿ−Λr²ⁿ)·cos(2nπ(x−ξ)).
pub fn resolvent_l_kernel(p: &PoissonParams) -> Result<SeriesKernel> {
    check_families(p, &[ExclusionFamily::SqrtPlus, ExclusionFamily::SqrtMinus], DEFAULT_MIN_REL_DIST)?;
    let (lam, big) = (p.lambda, p.big_lambda);
    let coeffs = (1..=p.n_trunc)
        .map(|n| {
            let rn = p.r.powi(n as i32);
            rn * rn / (1.0 - 2.0 * lam * rn - big * rn * rn)
        })
        .collect();
    Ok(SeriesKernel::new(1.0 / (1.0 - 2.0 * lam - big), coeffs))
}

pub fn resolvent_h(x: f64, xi: f64, p: &PoissonParams) -> Result<f64> {
    Ok(resolvent_h_kernel(p)?.eval(x, xi))
}

pub fn kernel_l(x: f64, xi: f64, p: &PoissonParams) -> Result<f64> {
    Ok(kernel_l_kernel(p)?.eval(x, xi))
}

pub fn resolvent_l(x: f64, xi: f64, p: &PoissonParams) -> Result<f64> {
    Ok(resolvent_l_kernel(p)?.eval(x, xi))
}

const ALL_FAMILIES: [ExclusionFamily; 5] = [
    ExclusionFamily::Zero,
    ExclusionFamily::Reciprocal,
    ExclusionFamily::HalfReciprocal,
    ExclusionFamily::SqrtPlus,
    ExclusionFamily::SqrtMinus,
];

fn family_base(f: ExclusionFamily) -> f64 {
    match f {
        ExclusionFamily::Zero => 0.0,
        ExclusionFamily::Reciprocal => 1.0,
        ExclusionFamily::HalfReciprocal => 0.5,
        ExclusionFamily::SqrtPlus => SQRT_2 - 1.0,
        ExclusionFamily::SqrtMinus => -1.0 - SQRT_2,
    }
}

/// Every excluded value, as (family, n, value).
pub fn excluded_values(p: &PoissonParams) -> Vec<(ExclusionFamily, usize, f64)> {
    let mut out = vec![(ExclusionFamily::Zero, 0, 0.0)];
    for fam in &ALL_FAMILIES[1..] {
        for n in 0..=p.n_trunc {
            out.push((*fam, n, family_base(*fam) * p.r.powi(-(n as i32))));
        }
    }
    out
}

fn check_families(p: &PoissonParams, families: &[ExclusionFamily], min_rel_dist: f64) -> Result<()> {
    closest_violation(p, families, min_rel_dist).map_or(Ok(()), |e| Err(Error::Excluded(e)))
}

fn closest_violation(p: &PoissonParams, families: &[ExclusionFamily], min_rel_dist: f64) -> Option<Exclusion> {
    let lam = p.lambda;
    let mut worst: Option<Exclusion> = None;
    for (family, n, value) in excluded_values(p) {
        if !families.contains(&family) {
            continue;
        }
        // the zero family has no scale, so its distance is absolute
        let rel_dist = if value == 0.0 { lam.abs() } else { (lam - value).abs() / value.abs() };
        if rel_dist < min_rel_dist && worst.as_ref().is_none_or(|w| rel_dist < w.rel_dist) {
            worst = Some(Exclusion { lambda: lam, family, n, value, rel_dist });
        }
    }
    worst
}

/// Rejects λ closer than `min_rel_dist` (relative) to any value of
/// {0, r⁻ⁿ, ½r⁻ⁿ, (−1±√2)r⁻ⁿ : n = 0..N}. The report names the nearest one.
pub fn validate_lambda(p: &PoissonParams, min_rel_dist: f64) -> std::result::Result<(), Exclusion> {
    closest_violation(p, &ALL_FAMILIES, min_rel_dist).map_or(Ok(()), Err)
}
