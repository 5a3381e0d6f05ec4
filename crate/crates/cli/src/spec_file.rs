//! Line-oriented `key=value` problem files.
//!
//! ```text
//! # comment
//! kernel=green_triangular
//! psi_expr=sin(pi*x)
//! noise.epsilon=1e-3
//! noise.omega=3.141592653589793
//! ```
//!
//! Keys: `name`, `kernel`, `r` (for poisson_r), `table` (CSV path for
//! tabulated, relative to the file), `psi_expr` or `f_expr`, `noise.epsilon`,
//! `noise.omega`.

use std::path::{Path, PathBuf};

use fredsolve::problems::{self, FirstKindProblem, KernelOptions, NoiseSpec};

use crate::CliError;

#[derive(Debug, Clone, Default)]
pub struct ProblemSpec {
    pub name: Option<String>,
    pub kernel: String,
    pub options: KernelOptions,
    pub psi_expr: Option<String>,
    pub f_expr: Option<String>,
    pub noise_epsilon: Option<f64>,
    pub noise_omega: Option<f64>,
}

fn number(key: &str, value: &str, line: usize) -> Result<f64, CliError> {
    value
        .parse::<f64>()
        .map_err(|_| CliError::Config(format!("line {line}: {key} expects a number, got '{value}'")))
}

impl ProblemSpec {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let mut spec = ProblemSpec::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            let (key, value) = s
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {line}: expected key=value, got '{s}'")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "name" => spec.name = Some(value.to_string()),
                "kernel" => spec.kernel = value.to_string(),
                "r" => spec.options.r = Some(number(key, value, line)?),
                "table" => spec.options.table = Some(resolve(base_dir, value)),
                "psi_expr" => spec.psi_expr = Some(value.to_string()),
                "f_expr" => spec.f_expr = Some(value.to_string()),
                "noise.epsilon" => spec.noise_epsilon = Some(number(key, value, line)?),
                "noise.omega" => spec.noise_omega = Some(number(key, value, line)?),
                other => return Err(CliError::Config(format!("line {line}: unknown key '{other}'"))),
            }
        }
        if spec.kernel.is_empty() {
            return Err(CliError::Config("problem file lacks a kernel= line".into()));
        }
        if spec.psi_expr.is_some() == spec.f_expr.is_some() {
            return Err(CliError::Config("problem file needs exactly one of psi_expr= and f_expr=".into()));
        }
        Ok(spec)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn build(&self) -> Result<FirstKindProblem, CliError> {
        let mut p = match (&self.psi_expr, &self.f_expr) {
            (Some(psi), _) => problems::make_manufactured_with(&self.kernel, &self.options, psi)?,
            (None, Some(f)) => problems::with_free_term_expr(&self.kernel, &self.options, f)?,
            (None, None) => unreachable!("checked by parse"),
        };
        if let Some(name) = &self.name {
            p.name = name.clone();
        }
        match (self.noise_epsilon, self.noise_omega) {
            (None, None) => Ok(p),
            (eps, omega) => {
                let noise = NoiseSpec::new(eps.unwrap_or(0.0), omega.unwrap_or(std::f64::consts::PI))?;
                Ok(problems::perturb(&p, noise))
            }
        }
    }
}

fn resolve(base: &Path, value: &str) -> PathBuf {
    let p = PathBuf::from(value);
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_keys() {
        let text = "# m=1\nname = demo\nkernel=poisson_r\nr=0.3\npsi_expr=sin(pi*x)\n\nnoise.epsilon=1e-3\nnoise.omega=6.0\n";
        let s = ProblemSpec::parse(text, Path::new("/data")).unwrap();
        assert_eq!(s.name.as_deref(), Some("demo"));
        assert_eq!(s.kernel, "poisson_r");
        assert_eq!(s.options.r, Some(0.3));
        assert_eq!(s.psi_expr.as_deref(), Some("sin(pi*x)"));
        assert_eq!((s.noise_epsilon, s.noise_omega), (Some(1e-3), Some(6.0)));
        let p = s.build().unwrap();
        assert!(p.known_solution.is_none());
        let t = ProblemSpec::parse("kernel=tabulated\ntable=k.csv\nf_expr=1", Path::new("/data")).unwrap();
        assert_eq!(t.options.table, Some(PathBuf::from("/data/k.csv")));
    }

    #[test]
    fn rejects_bad_files() {
        let bad = ["psi_expr=x", "kernel=constant", "kernel=constant\npsi_expr=x\nf_expr=1", "kernel=constant\nfoo=1\npsi_expr=x", "kernel constant", "kernel=constant\nr=abc\npsi_expr=x"];
        for b in bad {
            assert!(matches!(ProblemSpec::parse(b, Path::new(".")), Err(CliError::Config(_))), "{b}");
        }
    }

    #[test]
    fn builds_registered_kernel() {
        let s = ProblemSpec::parse("kernel=green_triangular\npsi_expr=sin(pi*x)", Path::new(".")).unwrap();
        let p = s.build().unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((p.f(0.5) - 1.0 / pi2).abs() < 1e-12);
    }
}
