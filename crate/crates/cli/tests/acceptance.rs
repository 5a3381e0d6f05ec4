//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p fredsolve-cli --test acceptance -- --nocapture`.
//! The harness fails when the set of failing criteria differs from
//! `EXPECTED_FAILURES`, so a regression and an unexpected fix both show up.

use std::f64::consts::{PI, SQRT_2};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use fredsolve::baselines;
use fredsolve::error::ExclusionFamily;
use fredsolve::fredholm2::{solve_direct, SecondKindSystem};
use fredsolve::kernels::{
    kernel_l, poisson_h, poisson_h_series, resolvent_h, resolvent_l, tail_bound, PoissonParams,
};
use fredsolve::method_core::{
    build_f0, build_f1, build_k, build_kappa, build_rho, method_v1, method_v2, method_v2_single, shared,
    verify_solution, MethodParams, Solvable, V1Params, DEFAULT_THRESHOLD,
};
use fredsolve::numerics::{gauss_legendre, gauss_legendre_panels, integrate_fn, DiagonalKinkKernel, Grid1D, GridFunction, Kernel};
use fredsolve::problems::{self, ConstantKernel, FirstKindProblem, GreenTriangular, NoiseSpec};
use fredsolve::reduction2d::{self, GridFunction2D, Method2dParams, Route};
use fredsolve::Error;

/// Criteria known to fail, with the reason recorded in the project notes.
const EXPECTED_FAILURES: &[u32] = &[8];

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn max_abs_diff(a: &GridFunction, b: &GridFunction) -> f64 {
    a.sub(b).max_abs()
}

fn green_m1() -> FirstKindProblem {
    problems::problem_by_name("green_m1").unwrap()
}

fn exact_on(p: &FirstKindProblem, g: &Grid1D) -> GridFunction {
    let k = p.known_solution.clone().unwrap();
    g.sample(|x| k(x))
}

fn c1_poisson() -> Outcome {
    let p = PoissonParams::with_truncation(0.5, 0.2, 40).map_err(|e| e.to_string())?;
    let bound = tail_bound(0.5, 40);
    check(bound <= 4e-12, || format!("tail bound {bound:e}"))?;
    let pts: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let mut worst = 0.0f64;
    for &x in &pts {
        for &xi in &pts {
            worst = worst.max((poisson_h_series(x, xi, &p) - poisson_h(x, xi, &p)).abs());
        }
    }
    check(worst <= bound, || format!("series vs closed form {worst:e} > {bound:e}"))?;
    let mut mass = 0.0f64;
    let mut eig = 0.0f64;
    for &x in &pts {
        mass = mass.max((integrate_fn(|xi| poisson_h(x, xi, &p), 0.0, 1.0, &[0.25, 0.5, 0.75], 32) - 1.0).abs());
        for n in 1..=8 {
            let w = 2.0 * PI * n as f64;
            let lhs = integrate_fn(|xi| poisson_h(x, xi, &p) * (w * xi).cos(), 0.0, 1.0, &[0.25, 0.5, 0.75], 32);
            eig = eig.max((lhs - 0.5f64.powi(n) * (w * x).cos()).abs());
        }
    }
    check(mass < 1e-10, || format!("unit mass error {mass:e}"))?;
    check(eig < 1e-9, || format!("eigen-action error {eig:e}"))?;
    Ok(format!("series {worst:.1e} <= {bound:.1e}, mass {mass:.1e}, eigen {eig:.1e}"))
}

fn c2_resolvents() -> Outcome {
    let wide = gauss_legendre_panels(24, 16, -1.0, 1.0).unwrap();
    let unit = gauss_legendre_panels(24, 8, 0.0, 1.0).unwrap();
    let pts = [0.0, 0.13, 0.4, 0.77, 0.95];
    let mut worst = 0.0f64;
    for r in [0.3, 0.5, 0.7] {
        for lam in [-0.3, 0.2, 0.35] {
            let p = PoissonParams::new(r, lam).map_err(|e| e.to_string())?;
            let big = p.big_lambda();
            for &x in &pts {
                for &xi in &pts {
                    let h_int: f64 = wide
                        .nodes()
                        .iter()
                        .zip(wide.weights())
                        .map(|(&z, &w)| w * poisson_h(x, z, &p) * resolvent_h(z, xi, &p).unwrap())
                        .sum();
                    let h_res = resolvent_h(x, xi, &p).unwrap() - poisson_h(x, xi, &p) - lam * h_int;
                    let l_int: f64 = unit
                        .nodes()
                        .iter()
                        .zip(unit.weights())
                        .map(|(&z, &w)| w * kernel_l(x, z, &p).unwrap() * resolvent_l(z, xi, &p).unwrap())
                        .sum();
                    let l_res = resolvent_l(x, xi, &p).unwrap() - kernel_l(x, xi, &p).unwrap() - big * l_int;
                    worst = worst.max(h_res.abs()).max(l_res.abs());
                }
            }
        }
    }
    check(worst < 1e-8, || format!("identity residual {worst:e}"))?;
    Ok(format!("max residual {worst:.1e} over 9 (r, lambda) pairs"))
}

fn c3_nystrom() -> Outcome {
    // αψ + Aψ = f, i.e. ψ = −(1/α)Aψ + f/α; sine coefficients of f are exact.
    let alpha = 0.1;
    let f = |x: f64| (PI * x).sin() + x * (1.0 - x);
    let coeff = |n: usize| {
        let w = n as f64 * PI;
        let parabola = if n % 2 == 1 { 8.0 / w.powi(3) } else { 0.0 };
        let mode = if n == 1 { 1.0 } else { 0.0 };
        (mode, parabola, w)
    };
    let oracle = |x: f64| {
        let mut s = f(x) / alpha;
        for n in 1..=400 {
            let (mode, parabola, w) = coeff(n);
            // f = Σ bₙ sin(nπx) with bₙ = mode + parabola
            let b = mode + parabola;
            s -= b / (alpha * (1.0 + alpha * w * w)) * (w * x).sin();
        }
        s
    };
    let g = gauss_legendre(64, 0.0, 1.0).unwrap();
    let sys = SecondKindSystem::from_kernel(&GreenTriangular, |x| f(x) / alpha, -1.0 / alpha, &g);
    let psi = solve_direct(&sys).map_err(|e| e.to_string())?;
    let err = g.nodes().iter().zip(&psi.values).map(|(&x, v)| (v - oracle(x)).abs()).fold(0.0, f64::max);
    check(err < 1e-8, || format!("max error {err:e}"))?;
    Ok(format!("max error {err:.1e} at n = 64"))
}

fn c4_lavrentiev() -> Outcome {
    let p = green_m1();
    let g = baselines::default_grid();
    let exact = exact_on(&p, &g);
    let mut prev = f64::INFINITY;
    let mut parts = Vec::new();
    for alpha in [1e-2, 1e-4, 1e-6] {
        let psi = baselines::lavrentiev(&p, &g, alpha).map_err(|e| e.to_string())?;
        let err = psi.sub(&exact).l2_norm();
        let a = alpha * PI * PI;
        let law = a / (1.0 + a) / SQRT_2;
        check((err / law - 1.0).abs() < 0.05, || format!("alpha {alpha:e}: error {err:e} vs law {law:e}"))?;
        check(err < prev, || format!("error not decreasing at alpha {alpha:e}"))?;
        prev = err;
        parts.push(format!("{alpha:.0e}: {err:.3e}/{law:.3e}"));
    }
    Ok(parts.join(", "))
}

fn monotone(errors: &[f64], floor: f64) -> Option<usize> {
    errors.windows(2).position(|w| !(w[1] < w[0] || w[1] < floor))
}

fn c5_iterations() -> Outcome {
    let p = green_m1();
    let g = baselines::default_grid();
    let exact = exact_on(&p, &g);
    let zero = g.zeros();
    let l1 = baselines::smallest_char_number(&p, &g).map_err(|e| e.to_string())?;
    let runs = [
        ("fridman", baselines::fridman_iterate(&p, &g, 0.5 * l1, &zero, 200, None)),
        ("krasnoselskii", baselines::krasnoselskii_iterate(&p, &g, None, &zero, 200, None)),
        ("implicit", baselines::implicit_iterate(&p, &g, 1e-3, &zero, 100, None)),
    ];
    let mut parts = Vec::new();
    for (name, h) in runs {
        let h = h.map_err(|e| format!("{name}: {e}"))?;
        let errs = h.errors_against(&exact);
        if let Some(k) = monotone(&errs, 1e-12) {
            return Err(format!("{name}: error rises at step {k}: {:e} -> {:e}", errs[k], errs[k + 1]));
        }
        parts.push(format!("{name} {:.1e}->{:.1e}", errs[0], errs[errs.len() - 1]));
    }
    let fixed = [
        baselines::fridman_iterate(&p, &g, 0.5 * l1, &exact, 5, None),
        baselines::krasnoselskii_iterate(&p, &g, None, &exact, 5, None),
        baselines::implicit_iterate(&p, &g, 1e-3, &exact, 5, None),
    ];
    let mut drift = 0.0f64;
    for h in fixed {
        drift = drift.max(max_abs_diff(h.map_err(|e| e.to_string())?.last(), &exact));
    }
    check(drift < 1e-10, || format!("exact solution drifts by {drift:e}"))?;
    parts.push(format!("fixed-point drift {drift:.1e}"));
    Ok(parts.join(", "))
}

fn c6_noise() -> Outcome {
    let p = green_m1();
    let g = baselines::default_grid();
    let clean = baselines::lavrentiev(&p, &g, 1e-6).map_err(|e| e.to_string())?;
    let response = |m: u32| -> Result<f64, String> {
        let noisy = problems::perturb(&p, NoiseSpec::new(1e-3, problems::mode_frequency(m)).unwrap());
        let psi = baselines::lavrentiev(&noisy, &g, 1e-6).map_err(|e| e.to_string())?;
        Ok(psi.sub(&clean).l2_norm())
    };
    let ratio = response(5)? / response(1)?;
    check((12.5..=50.0).contains(&ratio), || format!("ratio {ratio}"))?;
    Ok(format!("m=5 / m=1 output perturbation ratio {ratio:.3}"))
}

fn c7_v2_structure() -> Outcome {
    let params = MethodParams::default();
    let (r, lam) = (params.poisson().r(), params.lambda());
    let big = params.poisson().big_lambda();
    let mu = params.mu();
    let p = green_m1();
    let start = Instant::now();
    let state = method_v2(&p, &params).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    check(state.psi.values == state.psi0.add(&state.psi1).values, || "psi != psi0 + psi1".into())?;
    check(secs < 5.0, || format!("end-to-end took {secs:.2} s"))?;

    for (bad, family) in [(0.5, ExclusionFamily::HalfReciprocal), (SQRT_2 - 1.0, ExclusionFamily::SqrtPlus)] {
        let res = PoissonParams::new(r, bad).and_then(|pp| MethodParams::new(pp, mu));
        match res {
            Err(Error::Excluded(e)) if e.family == family => {}
            other => return Err(format!("lambda {bad}: expected exclusion {family}, got {other:?}")),
        }
    }

    let pos = params.pos_grid();
    let neg = params.neg_grid();
    let (a, b) = (1.7, -0.4);
    let u = pos.sample(|x| (3.0 * x).sin() + x);
    let v = pos.sample(|x| (x * x - 0.3).exp());
    let un = neg.sample(|x| (2.0 * x).cos() * x);
    let vn = neg.sample(|x| 1.0 / (2.0 + x));
    let comb = |f: &GridFunction, g: &GridFunction| f.scale(a).add(&g.scale(b));
    let err = |e: Result<f64, Error>| e.map_err(|e| e.to_string());
    let mut lin = 0.0f64;
    lin = lin.max(err((|| {
        Ok(max_abs_diff(&build_f1(&comb(&u, &v), &params)?, &comb(&build_f1(&u, &params)?, &build_f1(&v, &params)?)))
    })())?);
    lin = lin.max(max_abs_diff(
        &build_rho(&comb(&u, &v), &neg, &params),
        &comb(&build_rho(&u, &neg, &params), &build_rho(&v, &neg, &params)),
    ));
    lin = lin.max(err((|| {
        Ok(max_abs_diff(&build_kappa(&comb(&un, &vn), &params)?, &comb(&build_kappa(&un, &params)?, &build_kappa(&vn, &params)?)))
    })())?);
    lin = lin.max(err((|| {
        Ok(max_abs_diff(
            &build_f0(&comb(&un, &vn), &pos, &params)?,
            &comb(&build_f0(&un, &pos, &params)?, &build_f0(&vn, &pos, &params)?),
        ))
    })())?);
    let k1 = build_k(shared(GreenTriangular), &params).map_err(|e| e.to_string())?;
    let k2 = build_k(shared(ConstantKernel(1.0)), &params).map_err(|e| e.to_string())?;
    let k12 = build_k(
        shared(DiagonalKinkKernel(move |x: f64, xi: f64| a * GreenTriangular.eval(x, xi) + b)),
        &params,
    )
    .map_err(|e| e.to_string())?;
    for (x, xi) in [(0.3, 0.6), (0.8, 0.1), (0.5, 0.5)] {
        lin = lin.max((k12.eval(x, xi) - a * k1.eval(x, xi) - b * k2.eval(x, xi)).abs());
    }
    check(lin < 1e-10, || format!("linearity defect {lin:e}"))?;

    let cosine = |g: &Grid1D| g.sample(|x| (2.0 * PI * x).cos());
    let mut fac = 0.0f64;
    let f1 = build_f1(&cosine(&pos), &params).map_err(|e| e.to_string())?;
    fac = fac.max(max_abs_diff(&f1, &cosine(&pos).scale(-mu * (1.0 - lam * r) / (1.0 - 2.0 * lam * r))));
    let rho = build_rho(&cosine(&pos), &neg, &params);
    fac = fac.max(max_abs_diff(&rho, &cosine(&neg).scale(-lam * r)));
    let kappa = build_kappa(&cosine(&neg), &params).map_err(|e| e.to_string())?;
    let kf = (1.0 - 2.0 * lam * r) / (1.0 - 2.0 * lam * r - big * r * r);
    fac = fac.max(max_abs_diff(&kappa, &cosine(&neg).scale(kf)));
    let f0 = build_f0(&cosine(&neg), &pos, &params).map_err(|e| e.to_string())?;
    fac = fac.max(max_abs_diff(&f0, &cosine(&pos).scale(lam * r / (1.0 - 2.0 * lam * r))));
    check(fac < 1e-9, || format!("eigencomponent factor error {fac:e}"))?;

    let recon = state.psi.sub(&exact_on(&p, &state.psi.grid)).l2_norm();
    Ok(format!(
        "linearity {lin:.1e}, factors {fac:.1e}, m=1 run {secs:.2} s: relative residual {:.3e}, reconstruction error {recon:.3e}",
        state.report.relative
    ))
}

fn c8_cross_route() -> Outcome {
    let params = MethodParams::default();
    let p = green_m1();
    let two = method_v2(&p, &params).map_err(|e| e.to_string())?;
    let single = method_v2_single(&p, &params).map_err(|e| e.to_string())?;
    let diff = max_abs_diff(&two.psi, &single);
    check(diff < 1e-6, || format!("routes differ by {diff:.3e} (|psi| = {:.3e})", two.psi.max_abs()))?;
    Ok(format!("max difference {diff:.1e}"))
}

fn c9_v1() -> Outcome {
    let defaults = V1Params::default();
    let (lam, mu, sigma) = (defaults.lambda(), defaults.mu(), defaults.sigma());
    let zero = problems::problem_by_name("green_zero").unwrap();
    let st = method_v1(&zero, &defaults).map_err(|e| e.to_string())?;
    check(st.t.l2_norm_sq() == 0.0 && st.s.l2_norm_sq() == 0.0, || "f = 0 gives nonzero output".into())?;

    let k0 = FirstKindProblem::new(shared(ConstantKernel(0.0)), Arc::new(|x: f64| 1.0 + (2.0 * PI * x).cos()), "k0");
    let st = method_v1(&k0, &defaults).map_err(|e| e.to_string())?;
    let c0 = 2.0;
    let s0 = -mu * (1.0 - lam) * c0 / (1.0 - 2.0 * lam);
    let t0 = sigma * (-c0);
    check((st.c.c0 - c0).abs() < 1e-12, || format!("c0 = {}", st.c.c0))?;
    check((st.s.c0 - s0).abs() < 1e-12 && (st.t.c0 - t0).abs() < 1e-12, || {
        format!("s0 = {} (want {s0}), t0 = {} (want {t0})", st.s.c0, st.t.c0)
    })?;

    let p = green_m1();
    let start = Instant::now();
    let st = method_v1(&p, &defaults).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    check(st.s.is_finite() && st.t.is_finite(), || "non-finite coefficients".into())?;
    let smax = st.s.cn.iter().chain(&st.s.cn_prime).fold(st.s.c0.abs(), |m, v| m.max(v.abs()));
    check(smax < 1e3, || format!("max |s| = {smax:e}"))?;
    check(secs < 10.0, || format!("run took {secs:.2} s"))?;
    let g = baselines::default_grid();
    let psi = st.sample_psi(&g);
    let recon = psi.sub(&exact_on(&p, &g)).l2_norm();
    let rep = verify_solution(&p, &psi, DEFAULT_THRESHOLD);
    Ok(format!(
        "N = 16, max |s| {smax:.2e}, run {secs:.2} s, relative residual {:.3e}, reconstruction error {recon:.3e}",
        rep.relative
    ))
}

fn c10_ode() -> Outcome {
    let start = Instant::now();
    let g = gauss_legendre(64, 0.0, 1.0).unwrap();
    let a: problems::Evaluator = Arc::new(|_| 1.0);
    let f: problems::Evaluator = Arc::new(|_| -1.0);
    let (_, uv) = reduction2d::reduce_ode_volterra(a.clone(), f.clone(), &g).map_err(|e| e.to_string())?;
    let (_, uf) = reduction2d::reduce_ode_fredholm(a, f, &g).map_err(|e| e.to_string())?;
    let exact = g.sample(|x| 1.0 - x.cosh() / 1f64.cosh());
    let (ev, ef, d) = (max_abs_diff(&uv, &exact), max_abs_diff(&uf, &exact), max_abs_diff(&uv, &uf));
    let secs = start.elapsed().as_secs_f64();
    check(ev < 1e-6 && ef < 1e-6, || format!("analytic errors {ev:e}, {ef:e}"))?;
    check(d < 1e-8, || format!("routes differ by {d:e}"))?;
    check(secs < 1.0, || format!("took {secs:.2} s"))?;
    Ok(format!("errors {ev:.1e} / {ef:.1e}, route gap {d:.1e}, {secs:.2} s"))
}

fn membrane_psi(x: f64, y: f64) -> f64 {
    (1..=20)
        .step_by(2)
        .map(|n| {
            let k = n as f64 * PI;
            -4.0 / k * (k * (x - 0.5)).cosh() / (k / 2.0).cosh() * (k * y).sin()
        })
        .sum()
}

fn c11_membrane() -> Outcome {
    let start = Instant::now();
    let m = reduction2d::reduce_membrane();
    let fine = gauss_legendre(64, 0.0, 1.0).unwrap();
    let oracle = GridFunction2D::sample(&fine, &fine, membrane_psi);
    let rep = reduction2d::verify2d(&m, &oracle, DEFAULT_THRESHOLD);
    check(rep.relative < 1e-3, || format!("oracle relative residual {:e}", rep.relative))?;

    let params = Method2dParams::default();
    let result = reduction2d::method2d_solve(&m, &params).map_err(|e| e.to_string())?;
    let psi = &result.psi;
    check(psi.is_finite(), || "method output not finite".into())?;
    let edge: Vec<f64> = (0..=12).map(|i| i as f64 / 12.0).collect();
    let ux = reduction2d::reconstruct_u_at(&m, psi, Route::X, &[0.0, 1.0], &edge);
    let uy = reduction2d::reconstruct_u_at(&m, psi, Route::Y, &edge, &[0.0, 1.0]);
    check(ux.iter().chain(uy.iter()).all(|v| *v == 0.0), || "boundary values are not exactly zero".into())?;
    let u1 = reduction2d::reconstruct_corrected(&m, psi, Route::X);
    let u2 = reduction2d::reconstruct_corrected(&m, psi, Route::Y);
    let delta = reduction2d::closure_delta(&u1, &u2).map_err(|e| e.to_string())?;
    let mut drift = 0.0f64;
    for c in [-3.0, 0.01, 250.0] {
        let dc = reduction2d::closure_delta(&u1.scale(c), &u2.scale(c)).map_err(|e| e.to_string())?;
        drift = drift.max((dc - delta).abs());
    }
    check(drift < 1e-12, || format!("delta not scale-invariant: {drift:e}"))?;
    let secs = start.elapsed().as_secs_f64();
    check(secs < 10.0, || format!("took {secs:.2} s"))?;
    let oracle_24 = GridFunction2D::sample(&psi.x_grid, &psi.y_grid, membrane_psi);
    Ok(format!(
        "oracle residual {:.1e}; 24x24 run: relative residual {:.3e}, delta {delta:.3e}, error vs oracle {:.3e}; {secs:.2} s",
        rep.relative,
        result.report.relative,
        psi.sub(&oracle_24).l2_norm()
    ))
}

fn c12_filter() -> Outcome {
    let f_one = problems::problem_by_name("green_f_one").unwrap();
    let g = baselines::default_grid();
    let v2 = method_v2(&f_one, &MethodParams::default()).map_err(|e| e.to_string())?;
    let v1 = method_v1(&f_one, &V1Params::default()).map_err(|e| e.to_string())?;
    let candidates = [("zero", g.zeros()), ("v2", v2.psi), ("v1", v1.sample_psi(&g))];
    let mut rels = Vec::new();
    for (name, psi) in &candidates {
        let rep = verify_solution(&f_one, psi, DEFAULT_THRESHOLD);
        check(rep.solvable == Solvable::No, || format!("{name}: relative {:.3e} gives {:?}", rep.relative, rep.solvable))?;
        rels.push(format!("{name} {:.3e}", rep.relative));
    }
    // Regularized candidates approach f in L2 as alpha shrinks; logged only.
    let mut logged = Vec::new();
    for alpha in [1e-2, 1e-4, 1e-6] {
        let psi = baselines::lavrentiev(&f_one, &g, alpha).map_err(|e| e.to_string())?;
        let rep = verify_solution(&f_one, &psi, DEFAULT_THRESHOLD);
        logged.push(format!("lavrentiev {alpha:.0e} {:.3e} ({})", rep.relative, rep.solvable.as_str()));
    }
    let mut max_res = 0.0f64;
    for name in ["green_m1", "green_m5", "green_parabola", "constant_one"] {
        let p = problems::problem_by_name(name).unwrap();
        let rep = verify_solution(&p, &exact_on(&p, &g), DEFAULT_THRESHOLD);
        check(rep.solvable == Solvable::Yes && rep.residual_l2 < 1e-8, || format!("{name}: {rep:?}"))?;
        max_res = max_res.max(rep.residual_l2);
    }
    Ok(format!(
        "f = 1 relative residuals: {} (all no); logged: {}; manufactured residual <= {max_res:.1e} (yes)",
        rels.join(", "),
        logged.join(", ")
    ))
}

fn c13_cli() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_fredsolve");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |sub: &str, extra: &[&str]| {
        let out = dir.path().join(sub);
        let status = Command::new(bin)
            .args(["solve", "--problem", "green_m1", "--method", "v2", "--seedless", "--out"])
            .arg(&out)
            .args(extra)
            .output()
            .map_err(|e| e.to_string())?;
        Ok::<_, String>((out, status))
    };
    let (a, sa) = run("a", &[])?;
    let (b, sb) = run("b", &[])?;
    check(sa.status.success() && sb.status.success(), || "solve failed".into())?;
    for f in ["psi.csv", "summary.json"] {
        let (x, y) = (std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
        check(x == y, || format!("{f} differs between runs"))?;
    }
    let (_, bad) = run("c", &["--lambda", "0.5"])?;
    let code = bad.status.code();
    let stderr = String::from_utf8_lossy(&bad.stderr);
    check(code == Some(2), || format!("exit code {code:?} for excluded lambda"))?;
    check(stderr.contains("½r^-n"), || format!("message lacks the family: {stderr}"))?;
    Ok("identical psi.csv and summary.json; lambda = 0.5 exits with 2".into())
}

#[test]
fn acceptance_report() {
    let criteria: [(u32, &str, fn() -> Outcome); 13] = [
        (1, "Poisson kernel identities", c1_poisson),
        (2, "resolvent identities", c2_resolvents),
        (3, "Nystrom solver vs eigen-expansion", c3_nystrom),
        (4, "Lavrentiev accuracy law", c4_lavrentiev),
        (5, "iteration monotonicity and fixed point", c5_iterations),
        (6, "noise amplification by m^2", c6_noise),
        (7, "method v2 structure", c7_v2_structure),
        (8, "cross-route consistency", c8_cross_route),
        (9, "method v1", c9_v1),
        (10, "ODE reduction", c10_ode),
        (11, "membrane reduction", c11_membrane),
        (12, "solvability filter", c12_filter),
        (13, "CLI determinism and exit codes", c13_cli),
    ];
    let limits = [1.0, 5.0, 1.0, 1.0, 5.0, 2.0, f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY];
    let mut failed = Vec::new();
    for ((id, name, run), limit) in criteria.into_iter().zip(limits) {
        let start = Instant::now();
        let mut outcome = run();
        let secs = start.elapsed().as_secs_f64();
        if outcome.is_ok() && secs > limit {
            outcome = Err(format!("runtime {secs:.2} s exceeds {limit} s"));
        }
        match outcome {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail} [{secs:.2} s]"),
            Err(detail) => {
                println!("FAIL {id:>2} {name}: {detail} [{secs:.2} s]");
                failed.push(id);
            }
        }
    }
    assert_eq!(failed, EXPECTED_FAILURES, "failing criteria changed");
}
