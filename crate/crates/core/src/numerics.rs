//! Quadrature grids, product integration, and trigonometric coefficients.

use std::f64::consts::PI;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::GaussLegendre;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Default number of Gauss nodes per axis.
pub const DEFAULT_QUAD_ORDER: usize = 64;
/// Default Fourier truncation.
pub const DEFAULT_FOURIER_N: usize = 32;

/// A two-argument kernel k(x, ξ).
///
/// `row_breaks(x)` lists the ξ positions where k(x, ·) is not smooth and
/// `col_breaks(ξ)` the x positions where k(·, ξ) is not smooth. Quadrature
/// splits at these points so that piecewise-smooth kernels keep spectral
/// accuracy.
pub trait Kernel: Send + Sync {
    fn eval(&self, x: f64, xi: f64) -> f64;

    fn row_breaks(&self, _x: f64) -> Vec<f64> {
        Vec::new()
    }

    fn col_breaks(&self, _xi: f64) -> Vec<f64> {
        Vec::new()
    }

    /// Fixed x positions where ∫k(x,ξ)g(ξ)dξ may lose smoothness for smooth g.
    fn outer_breaks(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<K: Kernel + ?Sized> Kernel for Arc<K> {
    fn eval(&self, x: f64, xi: f64) -> f64 {
        (**self).eval(x, xi)
    }
    fn row_breaks(&self, x: f64) -> Vec<f64> {
        (**self).row_breaks(x)
    }
    fn col_breaks(&self, xi: f64) -> Vec<f64> {
        (**self).col_breaks(xi)
    }
    fn outer_breaks(&self) -> Vec<f64> {
        (**self).outer_breaks()
    }
}

impl<K: Kernel + ?Sized> Kernel for &K {
    fn eval(&self, x: f64, xi: f64) -> f64 {
        (**self).eval(x, xi)
    }
    fn row_breaks(&self, x: f64) -> Vec<f64> {
        (**self).row_breaks(x)
    }
    fn col_breaks(&self, xi: f64) -> Vec<f64> {
        (**self).col_breaks(xi)
    }
    fn outer_breaks(&self) -> Vec<f64> {
        (**self).outer_breaks()
    }
}

/// Smooth kernel given by a closure.
pub struct FnKernel<F>(pub F);

impl<F: Fn(f64, f64) -> f64 + Send + Sync> Kernel for FnKernel<F> {
    fn eval(&self, x: f64, xi: f64) -> f64 {
        (self.0)(x, xi)
    }
}

/// Kernel with a derivative kink along the diagonal ξ = x.
pub struct DiagonalKinkKernel<F>(pub F);

impl<F: Fn(f64, f64) -> f64 + Send + Sync> Kernel for DiagonalKinkKernel<F> {
    fn eval(&self, x: f64, xi: f64) -> f64 {
        (self.0)(x, xi)
    }
    fn row_breaks(&self, x: f64) -> Vec<f64> {
        vec![x]
    }
    fn col_breaks(&self, xi: f64) -> Vec<f64> {
        vec![xi]
    }
}

/// One Gauss panel of a composite grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    pub start: usize,
    pub len: usize,
}

/// Quadrature grid on [a, b], made of one or more Gauss–Legendre panels.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    a: f64,
    b: f64,
    panels: Vec<Panel>,
    // barycentric weights, local to each panel
    bary: Vec<f64>,
}

type Rule = Arc<(Vec<f64>, Vec<f64>)>;

/// Gauss–Legendre nodes and weights on [−1, 1], ascending. Cached per order.
fn reference_rule(n: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().expect("rule cache poisoned").get(&n) {
        return r.clone();
    }
    let rule: (Vec<f64>, Vec<f64>) = if n == 1 {
        (vec![0.0], vec![2.0])
    } else {
        let mut pairs = GaussLegendre::new(n).expect("order checked by caller").into_node_weight_pairs();
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
        pairs.into_iter().unzip()
    };
    let rule = Arc::new(rule);
    cache.lock().expect("rule cache poisoned").insert(n, rule.clone());
    rule
}

/// Gauss–Legendre rule with `n` nodes mapped to [a, b].
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<Grid1D> {
    gauss_legendre_panels(n, 1, a, b)
}

/// Composite Gauss–Legendre rule: `panels` equal panels with `n` nodes each.
pub fn gauss_legendre_panels(n: usize, panels: usize, a: f64, b: f64) -> Result<Grid1D> {
    if n == 0 {
        return Err(Error::InvalidArgument("quadrature order must be at least 1".into()));
    }
    if panels == 0 {
        return Err(Error::InvalidArgument("panel count must be at least 1".into()));
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!("need a < b, got a = {a}, b = {b}")));
    }
    let rule = reference_rule(n);
    let (t, w) = (&rule.0, &rule.1);
    // barycentric weights for Legendre points: (−1)^j √((1−t²) w)
    let bary_ref: Vec<f64> = t
        .iter()
        .zip(w.iter())
        .enumerate()
        .map(|(j, (tj, wj))| {
            let s = ((1.0 - tj * tj) * wj).sqrt();
            if j % 2 == 0 {
                s
            } else {
                -s
            }
        })
        .collect();
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(n * panels);
    let mut weights = Vec::with_capacity(n * panels);
    let mut bary = Vec::with_capacity(n * panels);
    let mut plist = Vec::with_capacity(panels);
    for p in 0..panels {
        let pa = a + h * p as f64;
        let pb = if p + 1 == panels { b } else { a + h * (p + 1) as f64 };
        let half = 0.5 * (pb - pa);
        let mid = 0.5 * (pa + pb);
        plist.push(Panel { a: pa, b: pb, start: nodes.len(), len: n });
        for j in 0..n {
            nodes.push(mid + half * t[j]);
            weights.push(half * w[j]);
            bary.push(bary_ref[j]);
        }
    }
    Ok(Grid1D { nodes, weights, a, b, panels: plist, bary })
}

impl Grid1D {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn panels(&self) -> &[Panel] {
        &self.panels
    }

    /// Samples an evaluator at the nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction { grid: self.clone(), values: self.nodes.iter().map(|&x| f(x)).collect() }
    }

    pub fn zeros(&self) -> GridFunction {
        GridFunction { grid: self.clone(), values: vec![0.0; self.len()] }
    }

    fn panel_of(&self, x: f64) -> usize {
        self.panels
            .iter()
            .position(|p| x <= p.b)
            .unwrap_or(self.panels.len() - 1)
    }

    /// Values at `x` of the Lagrange basis functions attached to the nodes.
    ///
    /// Each basis function lives on its own panel; `x` outside [a, b] is
    /// extrapolated from the nearest panel.
    pub fn basis_at(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        let p = &self.panels[self.panel_of(x)];
        self.panel_basis(p, x, &mut out[p.start..p.start + p.len]);
        out
    }

    fn panel_basis(&self, p: &Panel, x: f64, out: &mut [f64]) {
        let nodes = &self.nodes[p.start..p.start + p.len];
        let bary = &self.bary[p.start..p.start + p.len];
        if let Some(j) = nodes.iter().position(|&t| t == x) {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[j] = 1.0;
            return;
        }
        let mut denom = 0.0;
        for j in 0..nodes.len() {
            let c = bary[j] / (x - nodes[j]);
            out[j] = c;
            denom += c;
        }
        out.iter_mut().for_each(|v| *v /= denom);
    }

    /// Interpolates grid values at an arbitrary point.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        let p = &self.panels[self.panel_of(x)];
        let mut basis = vec![0.0; p.len];
        self.panel_basis(p, x, &mut basis);
        basis.iter().zip(&values[p.start..p.start + p.len]).map(|(l, v)| l * v).sum()
    }

    /// Product-integration weights: returns `row` such that
    /// ∫ₐᵇ g(ξ)ψ(ξ)dξ ≈ Σⱼ rowⱼ ψ(ξⱼ) for ψ interpolated on the grid.
    ///
    /// `g` may lose smoothness at `breaks`; each panel containing a break is
    /// split there and integrated against the Lagrange basis.
    pub fn integration_row(&self, g: impl Fn(f64) -> f64, breaks: &[f64]) -> Vec<f64> {
        let mut row = vec![0.0; self.len()];
        let mut basis = Vec::new();
        for p in &self.panels {
            let inner: Vec<f64> = breaks
                .iter()
                .copied()
                .filter(|&t| t > p.a && t < p.b)
                .collect();
            if inner.is_empty() {
                for j in p.start..p.start + p.len {
                    row[j] += self.weights[j] * g(self.nodes[j]);
                }
                continue;
            }
            basis.resize(p.len, 0.0);
            let sub = split_points(p.a, p.b, &inner);
            let rule = reference_rule(p.len.max(8));
            let (t, w) = (&rule.0, &rule.1);
            for win in sub.windows(2) {
                let (sa, sb) = (win[0], win[1]);
                let half = 0.5 * (sb - sa);
                let mid = 0.5 * (sa + sb);
                for q in 0..t.len() {
                    let s = mid + half * t[q];
                    let gw = half * w[q] * g(s);
                    if gw == 0.0 {
                        continue;
                    }
                    self.panel_basis(p, s, &mut basis);
                    for (k, l) in basis.iter().enumerate() {
                        row[p.start + k] += gw * l;
                    }
                }
            }
        }
        row
    }
}

/// Sorted list of a, the interior breaks, and b, without duplicates.
pub fn split_points(a: f64, b: f64, breaks: &[f64]) -> Vec<f64> {
    let mut pts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&t| t > a && t < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    pts.extend(inner);
    pts.push(b);
    pts
}

/// ∫ₐᵇ g with a Gauss rule of the given order on every piece between breaks.
pub fn integrate_fn(g: impl Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], order: usize) -> f64 {
    let rule = reference_rule(order.max(1));
    let (t, w) = (&rule.0, &rule.1);
    let mut sum = 0.0;
    for win in split_points(a, b, breaks).windows(2) {
        let half = 0.5 * (win[1] - win[0]);
        let mid = 0.5 * (win[1] + win[0]);
        let mut part = 0.0;
        for q in 0..t.len() {
            part += w[q] * g(mid + half * t[q]);
        }
        sum += half * part;
    }
    sum
}

/// Nyström matrix of a kernel on a grid: (Aψ)(xᵢ) ≈ Σⱼ Aᵢⱼψⱼ.
pub fn nystrom_matrix(k: &dyn Kernel, grid: &Grid1D) -> DMatrix<f64> {
    nystrom_rows(k, grid.nodes(), grid)
}

/// Nyström rows evaluated at arbitrary points `xs`.
pub fn nystrom_rows(k: &dyn Kernel, xs: &[f64], grid: &Grid1D) -> DMatrix<f64> {
    let n = grid.len();
    let mut m = DMatrix::zeros(xs.len(), n);
    for (i, &x) in xs.iter().enumerate() {
        let row = grid.integration_row(|xi| k.eval(x, xi), &k.row_breaks(x));
        for j in 0..n {
            m[(i, j)] = row[j];
        }
    }
    m
}

/// Matrix of a smooth kernel sampled against quadrature weights: k(xᵢ, ξⱼ)wⱼ.
pub fn weighted_kernel_matrix(k: impl Fn(f64, f64) -> f64, xs: &[f64], grid: &Grid1D) -> DMatrix<f64> {
    DMatrix::from_fn(xs.len(), grid.len(), |i, j| k(xs[i], grid.nodes()[j]) * grid.weights()[j])
}

/// A function sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Grid1D,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_vector(grid: &Grid1D, v: &DVector<f64>) -> Self {
        Self { grid: grid.clone(), values: v.iter().copied().collect() }
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.values)
    }

    pub fn integral(&self) -> f64 {
        integrate(self)
    }

    /// ⟨f, g⟩ in L₂ of the grid interval.
    pub fn inner(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .zip(self.grid.weights())
            .map(|((a, b), w)| a * b * w)
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.grid.interpolate(&self.values, x)
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> GridFunction {
        let values = self.grid.nodes().iter().zip(&self.values).map(|(&x, &v)| f(x, v)).collect();
        GridFunction { grid: self.grid.clone(), values }
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        self.map(|_, v| c * v)
    }

    pub fn add(&self, other: &GridFunction) -> GridFunction {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> GridFunction {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn zip_map(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> GridFunction {
        assert_eq!(self.values.len(), other.values.len(), "grid mismatch");
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        GridFunction { grid: self.grid.clone(), values }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Σ weightᵢ·valueᵢ
pub fn integrate(f: &GridFunction) -> f64 {
    f.values.iter().zip(f.grid.weights()).map(|(v, w)| v * w).sum()
}

/// Coefficients of ½c₀ + Σ cₙcos(2nπx) + c′ₙsin(2nπx).
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoeffs {
    pub c0: f64,
    pub cn: Vec<f64>,
    pub cn_prime: Vec<f64>,
}

impl FourierCoeffs {
    pub fn zeros(n: usize) -> Self {
        Self { c0: 0.0, cn: vec![0.0; n], cn_prime: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.cn.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cn.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.c0.is_finite()
            && self.cn.iter().all(|v| v.is_finite())
            && self.cn_prime.iter().all(|v| v.is_finite())
    }

    /// Sum of the series at x.
    pub fn eval(&self, x: f64) -> f64 {
        let mut s = 0.5 * self.c0;
        for n in 1..=self.len() {
            let arg = 2.0 * PI * n as f64 * x;
            s += self.cn[n - 1] * arg.cos() + self.cn_prime[n - 1] * arg.sin();
        }
        s
    }

    /// ∫₀¹ of the squared series, by orthogonality.
    pub fn l2_norm_sq(&self) -> f64 {
        0.25 * self.c0 * self.c0
            + 0.5 * self.cn.iter().chain(&self.cn_prime).map(|c| c * c).sum::<f64>()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            c0: s * self.c0,
            cn: self.cn.iter().map(|c| s * c).collect(),
            cn_prime: self.cn_prime.iter().map(|c| s * c).collect(),
        }
    }
}

/// Panels used for trigonometric integrals up to frequency `n`.
fn trig_grid(n: usize, quad_order: usize) -> Grid1D {
    let panels = 1 + n / 4;
    gauss_legendre_panels(quad_order.max(8), panels, 0.0, 1.0).expect("valid order")
}

/// Fourier coefficients of f on [0, 1] with period 1.
pub fn fourier_coeffs(f: impl Fn(f64) -> f64, n: usize, quad_order: usize) -> Result<FourierCoeffs> {
    if n == 0 {
        return Err(Error::InvalidArgument("Fourier truncation must be at least 1".into()));
    }
    let g = trig_grid(n, quad_order);
    let vals: Vec<f64> = g.nodes().iter().map(|&x| f(x)).collect();
    Ok(coeffs_of_samples(&g, &vals, n))
}

fn coeffs_of_samples(g: &Grid1D, vals: &[f64], n: usize) -> FourierCoeffs {
    let mut out = FourierCoeffs::zeros(n);
    for ((&x, &w), &v) in g.nodes().iter().zip(g.weights()).zip(vals) {
        let wv = 2.0 * w * v;
        out.c0 += wv;
        for m in 1..=n {
            let arg = 2.0 * PI * m as f64 * x;
            out.cn[m - 1] += wv * arg.cos();
            out.cn_prime[m - 1] += wv * arg.sin();
        }
    }
    out
}

/// The nine coefficient families of a kernel against the trigonometric system.
///
/// Index conventions (n for x, m for ξ, both 1-based in the maths, 0-based here):
/// `p0m`/`p0m_prime` integrate cos/sin(2mπξ) with x integrated out, and
/// `p0n`/`p0n_prime` integrate cos/sin(2nπx) with ξ integrated out.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelFourierCoeffs {
    pub p00: f64,
    pub p0m: Vec<f64>,
    pub p0m_prime: Vec<f64>,
    pub p0n: Vec<f64>,
    pub p0n_prime: Vec<f64>,
    /// cos(2nπx)cos(2mπξ)
    pub pnm: DMatrix<f64>,
    /// cos(2nπx)sin(2mπξ)
    pub pnm_prime: DMatrix<f64>,
    /// sin(2nπx)cos(2mπξ)
    pub pnm_second: DMatrix<f64>,
    /// sin(2nπx)sin(2mπξ)
    pub pnm_third: DMatrix<f64>,
}

impl KernelFourierCoeffs {
    pub fn n(&self) -> usize {
        self.p0m.len()
    }

    /// Largest absolute entry over every family.
    pub fn max_abs(&self) -> f64 {
        let mut m = self.p00.abs();
        for v in self.p0m.iter().chain(&self.p0m_prime).chain(&self.p0n).chain(&self.p0n_prime) {
            m = m.max(v.abs());
        }
        for mat in [&self.pnm, &self.pnm_prime, &self.pnm_second, &self.pnm_third] {
            m = m.max(mat.amax());
        }
        m
    }
}

/// Double integrals 2∬k(x,ξ)·trig(x)·trig(ξ) over the unit square.
pub fn kernel_fourier_coeffs(k: &dyn Kernel, n: usize, quad_order: usize) -> Result<KernelFourierCoeffs> {
    if n == 0 {
        return Err(Error::InvalidArgument("Fourier truncation must be at least 1".into()));
    }
    let order = quad_order.max(8);
    let rule = reference_rule(order);
    let (t, w) = (&rule.0, &rule.1);
    let per_unit = 1 + n / 4;
    let inner_breaks: Vec<f64> = (1..per_unit).map(|p| p as f64 / per_unit as f64).collect();
    let mut outer_x = Vec::new();
    let mut outer_w = Vec::new();
    for win in split_points(0.0, 1.0, &k.outer_breaks()).windows(2) {
        let panels = 1 + ((win[1] - win[0]) * per_unit as f64) as usize;
        let g = gauss_legendre_panels(order, panels, win[0], win[1])?;
        outer_x.extend_from_slice(g.nodes());
        outer_w.extend_from_slice(g.weights());
    }

    let mut p00 = 0.0;
    let mut p0m = vec![0.0; n];
    let mut p0m_prime = vec![0.0; n];
    let mut p0n = vec![0.0; n];
    let mut p0n_prime = vec![0.0; n];
    // per x node: r0 = ∫k, rc[m] = ∫k cos(2mπξ), rs[m] = ∫k sin(2mπξ)
    let nx = outer_x.len();
    let mut rc = DMatrix::<f64>::zeros(nx, n);
    let mut rs = DMatrix::<f64>::zeros(nx, n);
    let mut r0 = vec![0.0; nx];
    for (i, &x) in outer_x.iter().enumerate() {
        let mut brk = k.row_breaks(x);
        brk.extend_from_slice(&inner_breaks);
        for win in split_points(0.0, 1.0, &brk).windows(2) {
            let half = 0.5 * (win[1] - win[0]);
            let mid = 0.5 * (win[1] + win[0]);
            for q in 0..t.len() {
                let xi = mid + half * t[q];
                let kw = half * w[q] * k.eval(x, xi);
                r0[i] += kw;
                for m in 1..=n {
                    let arg = 2.0 * PI * m as f64 * xi;
                    rc[(i, m - 1)] += kw * arg.cos();
                    rs[(i, m - 1)] += kw * arg.sin();
                }
            }
        }
    }
    let mut pnm = DMatrix::<f64>::zeros(n, n);
    let mut pnm_prime = DMatrix::<f64>::zeros(n, n);
    let mut pnm_second = DMatrix::<f64>::zeros(n, n);
    let mut pnm_third = DMatrix::<f64>::zeros(n, n);
    for (i, (&x, &wx)) in outer_x.iter().zip(&outer_w).enumerate() {
        let w2 = 2.0 * wx;
        p00 += w2 * r0[i];
        for m in 0..n {
            p0m[m] += w2 * rc[(i, m)];
            p0m_prime[m] += w2 * rs[(i, m)];
        }
        for nn in 1..=n {
            let arg = 2.0 * PI * nn as f64 * x;
            let (cx, sx) = (arg.cos(), arg.sin());
            p0n[nn - 1] += w2 * cx * r0[i];
            p0n_prime[nn - 1] += w2 * sx * r0[i];
            for m in 0..n {
                pnm[(nn - 1, m)] += w2 * cx * rc[(i, m)];
                pnm_prime[(nn - 1, m)] += w2 * cx * rs[(i, m)];
                pnm_second[(nn - 1, m)] += w2 * sx * rc[(i, m)];
                pnm_third[(nn - 1, m)] += w2 * sx * rs[(i, m)];
            }
        }
    }
    Ok(KernelFourierCoeffs { p00, p0m, p0m_prime, p0n, p0n_prime, pnm, pnm_prime, pnm_second, pnm_third })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn midpoint_and_two_point_rules() {
        let g = gauss_legendre(1, 0.0, 1.0).unwrap();
        assert_eq!(g.nodes(), &[0.5]);
        assert_eq!(g.weights(), &[1.0]);
        let g = gauss_legendre(2, -1.0, 1.0).unwrap();
        assert_abs_diff_eq!(g.nodes()[0], -1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(g.nodes()[1], 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(g.weights()[0], 1.0, epsilon = 1e-15);
        let g = gauss_legendre(2, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(integrate(&g.sample(|x| x * x)), 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn bad_arguments() {
        assert!(gauss_legendre(0, 0.0, 1.0).is_err());
        assert!(gauss_legendre(4, 1.0, 1.0).is_err());
        assert!(gauss_legendre(4, 2.0, 1.0).is_err());
    }

    #[test]
    fn integrate_examples() {
        let g = gauss_legendre(8, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(integrate(&g.sample(|_| 1.0)), 1.0, epsilon = 1e-14);
        let g = gauss_legendre(32, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(integrate(&g.sample(|x| (2.0 * PI * x).sin())), 0.0, epsilon = 1e-12);
        let g = gauss_legendre(16, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(integrate(&g.sample(f64::exp)), std::f64::consts::E - 1.0, epsilon = 1e-12);
    }

    #[test]
    fn grid_invariants_large_orders() {
        for n in [1, 2, 5, 64, 128, 256] {
            let g = gauss_legendre(n, -1.0, 0.0).unwrap();
            assert_abs_diff_eq!(g.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            assert!(g.nodes().windows(2).all(|p| p[0] < p[1]));
            assert!(g.nodes().iter().all(|&x| x > -1.0 && x < 0.0));
            assert!(g.weights().iter().all(|&w| w > 0.0));
        }
        let g = gauss_legendre_panels(16, 5, 0.0, 2.0).unwrap();
        assert_abs_diff_eq!(g.weights().iter().sum::<f64>(), 2.0, epsilon = 1e-12);
        assert!(g.nodes().windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn interpolation_reproduces_polynomials_and_analytic_functions() {
        let g = gauss_legendre(12, 0.0, 1.0).unwrap();
        let v: Vec<f64> = g.nodes().iter().map(|x| x.powi(7) - 3.0 * x).collect();
        for x in [0.0, 0.13, 0.5, 0.999, 1.0] {
            assert_abs_diff_eq!(g.interpolate(&v, x), x.powi(7) - 3.0 * x, epsilon = 1e-12);
        }
        let g = gauss_legendre(64, 0.0, 1.0).unwrap();
        let f = g.sample(|x| (PI * x).sin());
        for x in [0.0, 0.3, 1.0] {
            assert_abs_diff_eq!(f.eval(x), (PI * x).sin(), epsilon = 1e-13);
        }
    }

    #[test]
    fn product_integration_handles_kinks() {
        let g = gauss_legendre(32, 0.0, 1.0).unwrap();
        let x = 0.37;
        let row = g.integration_row(|xi| (xi - x).abs(), &[x]);
        // ∫|ξ−x|·ξ² dξ
        let exact = {
            let left = x * x * x * x / 3.0 - x.powi(4) / 4.0;
            let right = (1.0 / 4.0 - x / 3.0) - (x.powi(4) / 4.0 - x.powi(4) / 3.0);
            left + right
        };
        let approx: f64 = row.iter().zip(g.nodes()).map(|(r, t)| r * t * t).sum();
        assert_abs_diff_eq!(approx, exact, epsilon = 1e-14);
    }

    #[test]
    fn fourier_examples() {
        let c = fourier_coeffs(|x| (2.0 * PI * x).sin(), 6, 64).unwrap();
        assert_abs_diff_eq!(c.cn_prime[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(c.c0, 0.0, epsilon = 1e-10);
        assert!(c.cn.iter().all(|v| v.abs() < 1e-10));
        assert!(c.cn_prime[1..].iter().all(|v| v.abs() < 1e-10));
        let c = fourier_coeffs(|_| 1.0, 4, 64).unwrap();
        assert_abs_diff_eq!(c.c0, 2.0, epsilon = 1e-12);
        let c = fourier_coeffs(|x| (4.0 * PI * x).cos(), 4, 64).unwrap();
        assert_abs_diff_eq!(c.cn[1], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(c.cn[0], 0.0, epsilon = 1e-10);
        assert!(fourier_coeffs(|_| 1.0, 0, 64).is_err());
    }

    #[test]
    fn parseval_spot_check() {
        let f = |x: f64| (2.0 * PI * x).sin() + 3.0 * (6.0 * PI * x).cos();
        let c = fourier_coeffs(f, 8, 64).unwrap();
        let g = gauss_legendre(64, 0.0, 1.0).unwrap();
        let e = integrate(&g.sample(|x| f(x) * f(x)));
        assert_abs_diff_eq!(e, (c.cn_prime[0].powi(2) + c.cn[2].powi(2)) / 2.0, epsilon = 1e-8);
    }

    #[test]
    fn kernel_coefficient_examples() {
        let p = kernel_fourier_coeffs(&FnKernel(|_, _| 1.0), 4, 32).unwrap();
        assert_abs_diff_eq!(p.p00, 2.0, epsilon = 1e-10);
        let mut rest = p.clone();
        rest.p00 = 0.0;
        assert!(rest.max_abs() < 1e-10);

        let k = FnKernel(|x: f64, xi: f64| (2.0 * PI * x).cos() * (2.0 * PI * xi).cos());
        let p = kernel_fourier_coeffs(&k, 4, 32).unwrap();
        assert_abs_diff_eq!(p.pnm[(0, 0)], 0.5, epsilon = 1e-10);
        let mut rest = p.clone();
        rest.pnm[(0, 0)] = 0.0;
        assert!(rest.max_abs() < 1e-10);
    }

    #[test]
    fn kernel_coefficients_of_triangular_kernel() {
        let k = DiagonalKinkKernel(|x: f64, xi: f64| if x <= xi { x * (1.0 - xi) } else { xi * (1.0 - x) });
        let p = kernel_fourier_coeffs(&k, 8, 64).unwrap();
        // oracle: 2∫₀¹ x(1−x)/2 dx by a separate rule
        let oracle = 2.0 * integrate_fn(|x| x * (1.0 - x) / 2.0, 0.0, 1.0, &[], 4);
        assert_abs_diff_eq!(p.p00, oracle, epsilon = 1e-8);
        assert_abs_diff_eq!(p.p00, 1.0 / 6.0, epsilon = 1e-12);
        for a in 0..8 {
            for b in 0..8 {
                assert_abs_diff_eq!(p.pnm[(a, b)], p.pnm[(b, a)], epsilon = 1e-8);
            }
        }
    }

    proptest! {
        #[test]
        fn gauss_exact_on_polynomials(n in 1usize..40, coeffs in proptest::collection::vec(-5.0f64..5.0, 1..80), a in -3.0f64..0.0, len in 0.1f64..4.0) {
            let b = a + len;
            let deg = (2 * n - 1).min(coeffs.len() - 1);
            let c = &coeffs[..=deg];
            let g = gauss_legendre(n, a, b).unwrap();
            let val = integrate(&g.sample(|x| c.iter().rev().fold(0.0, |acc, ci| acc * x + ci)));
            let anti = |x: f64| c.iter().enumerate().map(|(k, ci)| ci * x.powi(k as i32 + 1) / (k as f64 + 1.0)).sum::<f64>();
            let exact = anti(b) - anti(a);
            let scale = c.iter().map(|v| v.abs()).sum::<f64>() * (a.abs().max(b.abs()) + 1.0).powi(deg as i32 + 1);
            prop_assert!((val - exact).abs() <= 1e-12 * scale.max(1.0));
        }
    }
}
