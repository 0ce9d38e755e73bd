//! Run configuration: `section.key = value` lines, `#` comments.

use std::collections::HashMap;
use std::path::PathBuf;

use fracflow::coefficients::{CoefficientSet, Tensor2};
use fracflow::forcing::{ForcingSet, PresetParams, PRESETS};
use fracflow::geometry::DomainSpec;
use fracflow::lab::DEFAULT_EPSILONS;
use fracflow::solver::{InnerMethod, SolverSettings};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { key: String, line: usize },
    #[error("line {line}: key '{key}' expects {expected}, got '{value}'")]
    TypeMismatch {
        key: String,
        line: usize,
        expected: &'static str,
        value: String,
    },
    #[error("line {line}: key '{key}': {reason}")]
    ConstraintViolation { key: String, line: usize, reason: String },
}

impl ConfigError {
    pub fn key(&self) -> &str {
        match self {
            ConfigError::UnknownKey { key, .. }
            | ConfigError::TypeMismatch { key, .. }
            | ConfigError::ConstraintViolation { key, .. } => key,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub coefficients: CoefficientSet,
    pub forcing_preset: String,
    pub forcing: PresetParams,
    pub epsilons: Vec<f64>,
    pub settings: SolverSettings,
    pub output_dir: PathBuf,
    pub dump_fields: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            domain: DomainSpec::default(),
            nx: 64,
            ny: 64,
            nz: 64,
            coefficients: CoefficientSet::default(),
            forcing_preset: "constant".into(),
            forcing: PresetParams::default(),
            epsilons: DEFAULT_EPSILONS.to_vec(),
            settings: SolverSettings::default(),
            output_dir: PathBuf::from("out"),
            dump_fields: false,
        }
    }
}

pub const KEYS: [&str; 24] = [
    "geometry.porous_width",
    "geometry.porous_depth",
    "resolution.nx",
    "resolution.ny",
    "resolution.nz",
    "coefficients.Q",
    "coefficients.mu",
    "coefficients.alpha",
    "coefficients.beta",
    "forcing.preset",
    "forcing.f_t",
    "forcing.f_n",
    "forcing.h1",
    "forcing.g_t",
    "forcing.g_n",
    "forcing.g_h",
    "sweep.epsilons",
    "solver.outer_tol",
    "solver.inner_tol",
    "solver.inner",
    "solver.outer_cap_factor",
    "solver.inner_cap_factor",
    "output.dir",
    "output.dump_fields",
];

impl RunConfig {
    pub fn forcing_set(&self) -> ForcingSet {
        ForcingSet::preset(&self.forcing_preset, &self.forcing).expect("validated preset")
    }
}

struct Entry<'a> {
    key: &'a str,
    value: &'a str,
    line: usize,
}

impl Entry<'_> {
    fn mismatch(&self, expected: &'static str) -> ConfigError {
        ConfigError::TypeMismatch {
            key: self.key.to_string(),
            line: self.line,
            expected,
            value: self.value.to_string(),
        }
    }

    fn violation(&self, reason: impl Into<String>) -> ConfigError {
        ConfigError::ConstraintViolation {
            key: self.key.to_string(),
            line: self.line,
            reason: reason.into(),
        }
    }

    fn float(&self) -> Result<f64, ConfigError> {
        match self.value.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.mismatch("a finite number")),
        }
    }

    fn floats(&self) -> Result<Vec<f64>, ConfigError> {
        self.value
            .split(',')
            .map(|s| match s.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(self.mismatch("a comma-separated list of finite numbers")),
            })
            .collect()
    }

    fn count(&self) -> Result<usize, ConfigError> {
        self.value.parse::<usize>().map_err(|_| self.mismatch("a nonnegative integer"))
    }

    fn positive(&self) -> Result<f64, ConfigError> {
        let v = self.float()?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(self.violation("must be positive"))
        }
    }

    fn nonnegative(&self) -> Result<f64, ConfigError> {
        let v = self.float()?;
        if v >= 0.0 {
            Ok(v)
        } else {
            Err(self.violation("must be nonnegative"))
        }
    }

    fn flag(&self) -> Result<bool, ConfigError> {
        match self.value {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(self.mismatch("true or false")),
        }
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut cfg = RunConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            return Err(ConfigError::TypeMismatch {
                key: content.to_string(),
                line,
                expected: "'section.key = value'",
                value: content.to_string(),
            });
        };
        let e = Entry { key: k.trim(), value: v.trim(), line };
        if !KEYS.contains(&e.key) {
            return Err(ConfigError::UnknownKey { key: e.key.to_string(), line });
        }
        if let Some(first) = seen.insert(e.key.to_string(), line) {
            return Err(e.violation(format!("duplicate key, first set on line {first}")));
        }
        apply(&mut cfg, &e)?;
    }
    Ok(cfg)
}

fn apply(cfg: &mut RunConfig, e: &Entry) -> Result<(), ConfigError> {
    match e.key {
        "geometry.porous_width" => cfg.domain.porous_width = e.positive()?,
        "geometry.porous_depth" => cfg.domain.porous_depth = e.positive()?,
        "resolution.nx" | "resolution.ny" | "resolution.nz" => {
            let n = e.count()?;
            if n < 2 {
                return Err(e.violation("resolution must be at least 2"));
            }
            match e.key {
                "resolution.nx" => cfg.nx = n,
                "resolution.ny" => cfg.ny = n,
                _ => cfg.nz = n,
            }
        }
        "coefficients.Q" => {
            let v = e.floats()?;
            if v.len() != 4 {
                return Err(e.mismatch("four entries, row-major"));
            }
            let q = Tensor2::new(v[0], v[1], v[2], v[3]);
            let trial = CoefficientSet { q, ..CoefficientSet::default() };
            trial.validate().map_err(|err| e.violation(err.to_string()))?;
            cfg.coefficients.q = q;
        }
        "coefficients.mu" => cfg.coefficients.mu = e.positive()?,
        "coefficients.alpha" => cfg.coefficients.alpha = e.nonnegative()?,
        "coefficients.beta" => cfg.coefficients.beta = e.nonnegative()?,
        "forcing.preset" => {
            if !PRESETS.contains(&e.value) {
                return Err(e.violation(format!("unknown preset; choose one of {}", PRESETS.join(", "))));
            }
            cfg.forcing_preset = e.value.to_string();
        }
        "forcing.f_t" => cfg.forcing.f_t = e.float()?,
        "forcing.f_n" => cfg.forcing.f_n = e.float()?,
        "forcing.h1" => cfg.forcing.h1 = e.float()?,
        "forcing.g_t" => cfg.forcing.g_t = e.float()?,
        "forcing.g_n" => cfg.forcing.g_n = e.float()?,
        "forcing.g_h" => cfg.forcing.g_h = e.float()?,
        "sweep.epsilons" => {
            let v = e.floats()?;
            if v.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
                return Err(e.violation("every epsilon must lie in (0, 1)"));
            }
            if v.windows(2).any(|w| w[1] >= w[0]) {
                return Err(e.violation("epsilon list must be strictly decreasing"));
            }
            cfg.epsilons = v;
        }
        "solver.outer_tol" => cfg.settings.outer_tol = e.positive()?,
        "solver.inner_tol" => cfg.settings.inner_tol = e.positive()?,
        "solver.inner" => {
            cfg.settings.inner = match e.value {
                "cholesky" => InnerMethod::Cholesky,
                "cg" => InnerMethod::Cg,
                _ => return Err(e.violation("inner solver must be 'cholesky' or 'cg'")),
            }
        }
        "solver.outer_cap_factor" | "solver.inner_cap_factor" => {
            let n = e.count()?;
            if n == 0 {
                return Err(e.violation("cap factor must be at least 1"));
            }
            if e.key == "solver.outer_cap_factor" {
                cfg.settings.outer_cap_factor = n;
            } else {
                cfg.settings.inner_cap_factor = n;
            }
        }
        "output.dir" => {
            if e.value.is_empty() {
                return Err(e.violation("output directory must be nonempty"));
            }
            cfg.output_dir = PathBuf::from(e.value);
        }
        "output.dump_fields" => cfg.dump_fields = e.flag()?,
        _ => unreachable!("key list checked by caller"),
    }
    Ok(())
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

/// Every key with its current value; floats in shortest round-trip form.
pub fn render_config(c: &RunConfig) -> String {
    let q = c.coefficients.q;
    let lines = [
        format!("geometry.porous_width = {:?}", c.domain.porous_width),
        format!("geometry.porous_depth = {:?}", c.domain.porous_depth),
        format!("resolution.nx = {}", c.nx),
        format!("resolution.ny = {}", c.ny),
        format!("resolution.nz = {}", c.nz),
        format!("coefficients.Q = {}", list(&q.to_array())),
        format!("coefficients.mu = {:?}", c.coefficients.mu),
        format!("coefficients.alpha = {:?}", c.coefficients.alpha),
        format!("coefficients.beta = {:?}", c.coefficients.beta),
        format!("forcing.preset = {}", c.forcing_preset),
        format!("forcing.f_t = {:?}", c.forcing.f_t),
        format!("forcing.f_n = {:?}", c.forcing.f_n),
        format!("forcing.h1 = {:?}", c.forcing.h1),
        format!("forcing.g_t = {:?}", c.forcing.g_t),
        format!("forcing.g_n = {:?}", c.forcing.g_n),
        format!("forcing.g_h = {:?}", c.forcing.g_h),
        format!("sweep.epsilons = {}", list(&c.epsilons)),
        format!("solver.outer_tol = {:?}", c.settings.outer_tol),
        format!("solver.inner_tol = {:?}", c.settings.inner_tol),
        format!("solver.inner = {}", c.settings.inner.name()),
        format!("solver.outer_cap_factor = {}", c.settings.outer_cap_factor),
        format!("solver.inner_cap_factor = {}", c.settings.inner_cap_factor),
        format!("output.dir = {}", c.output_dir.display()),
        format!("output.dump_fields = {}", c.dump_fields),
    ];
    let mut s = lines.join("\n");
    s.push('\n');
    s
}
