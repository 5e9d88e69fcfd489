use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::linalg::MatrixLiteral;
use crate::optuple::Tolerances;
use crate::wold::Verdict;

/// Largest Hilbert space dimension a scenario may build.
pub const MAX_DIM: usize = 2000;
/// Largest number of operators in a tuple.
pub const MAX_N: usize = 8;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub scenarios: Vec<Scenario>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub builder: Builder,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<Expected>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Builder {
    MatrixLiteral {
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        matrices: Vec<MatrixLiteral>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        files: Vec<PathBuf>,
    },
    JordanShift {
        dim: usize,
    },
    SphericalCoisometry {
        /// Joint eigenvalues, one point of the unit sphere per basis vector,
        /// each coordinate given as `[re, im]`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        points: Option<Vec<Vec<[f64; 2]>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    TruncatedBergman {
        n: usize,
        m: usize,
        #[serde(rename = "N")]
        truncation: usize,
        fiber_dim: usize,
    },
    DirectSum {
        parts: Vec<Builder>,
    },
    RandomCommuting {
        n: usize,
        d: usize,
        seed: u64,
        contraction_scale: f64,
    },
}

/// Expected outcome: either a bare verdict string or a verdict with dimensions.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Expected {
    Verdict(String),
    Detailed {
        verdict: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim_h_inf: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim_orbit: Option<usize>,
    },
}

impl Expected {
    pub fn verdict_str(&self) -> &str {
        match self {
            Expected::Verdict(v) | Expected::Detailed { verdict: v, .. } => v,
        }
    }

    pub fn verdict(&self) -> Result<Verdict, String> {
        self.verdict_str().parse().map_err(|e: crate::Error| e.to_string())
    }

    pub fn dim_h_inf(&self) -> Option<usize> {
        match self {
            Expected::Detailed { dim_h_inf, .. } => *dim_h_inf,
            Expected::Verdict(_) => None,
        }
    }

    pub fn dim_orbit(&self) -> Option<usize> {
        match self {
            Expected::Detailed { dim_orbit, .. } => *dim_orbit,
            Expected::Verdict(_) => None,
        }
    }
}

/// Configuration failure, reported with exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(scenario: &str, msg: impl std::fmt::Display) -> ConfigError {
    ConfigError(format!("scenario `{scenario}`: {msg}"))
}

pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    serde_json::from_str(text)
        .map_err(|e| ConfigError(format!("config parse error at line {}, column {}: {e}", e.line(), e.column())))
}

/// Reads, parses and validates a config file; matrix literal files are
/// resolved against the config's directory.
pub fn load_config(path: &Path) -> Result<Config, ConfigError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = parse_config(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    for s in &mut cfg.scenarios {
        resolve_files(&mut s.builder, base);
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn resolve_files(b: &mut Builder, base: &Path) {
    match b {
        Builder::MatrixLiteral { files, .. } => {
            for f in files.iter_mut() {
                if f.is_relative() {
                    *f = base.join(&*f);
                }
            }
        }
        Builder::DirectSum { parts } => parts.iter_mut().for_each(|p| resolve_files(p, base)),
        _ => {}
    }
}

pub fn validate(cfg: &Config) -> Result<(), ConfigError> {
    if cfg.scenarios.is_empty() {
        return Err(ConfigError("config contains no scenarios".into()));
    }
    let mut names = std::collections::HashSet::new();
    for s in &cfg.scenarios {
        if !names.insert(s.name.as_str()) {
            return Err(bad(&s.name, "duplicate scenario name"));
        }
        if s.m == 0 {
            return Err(bad(&s.name, "m must be at least 1"));
        }
        if let Some(t) = &s.tolerances {
            for (k, v) in [("rank", t.rank), ("commute", t.commute), ("identity", t.identity), ("gram", t.gram)] {
                if !(v.is_finite() && v > 0.0) {
                    return Err(bad(&s.name, format!("tolerance `{k}` must be positive and finite")));
                }
            }
        }
        if let Some(e) = &s.expected {
            e.verdict().map_err(|msg| bad(&s.name, msg))?;
        }
        let (n, d) = shape(&s.builder).map_err(|msg| bad(&s.name, msg))?;
        if n == 0 || n > MAX_N {
            return Err(bad(&s.name, format!("number of operators must be in 1..={MAX_N}")));
        }
        if d == 0 || d > MAX_DIM {
            return Err(bad(&s.name, format!("dimension {d} outside 1..={MAX_DIM}")));
        }
    }
    Ok(())
}

/// `(n, d)` of the tuple a builder will produce, after checking its parameters.
pub fn shape(b: &Builder) -> Result<(usize, usize), String> {
    match b {
        Builder::MatrixLiteral { matrices, files } => {
            if matrices.is_empty() == files.is_empty() {
                return Err("matrix_literal needs exactly one of `matrices` or `files`".into());
            }
            if !matrices.is_empty() {
                let d = matrices[0].rows;
                for lit in matrices {
                    if lit.rows != d || lit.cols != d {
                        return Err("matrix literals must all be square of the same size".into());
                    }
                    if lit.re.len() != d * d || lit.im.len() != d * d {
                        return Err(format!("matrix literal needs {} entries in `re` and `im`", d * d));
                    }
                }
                return Ok((matrices.len(), d));
            }
            let mut d = None;
            for f in files {
                let lit = read_literal(f)?;
                if lit.rows != lit.cols || d.is_some_and(|x| x != lit.rows) {
                    return Err(format!("{}: matrices must all be square of the same size", f.display()));
                }
                d = Some(lit.rows);
            }
            Ok((files.len(), d.unwrap_or(0)))
        }
        Builder::JordanShift { dim } => Ok((1, *dim)),
        Builder::SphericalCoisometry { points, d, n, seed } => match (points, d, n, seed) {
            (Some(pts), None, None, None) => {
                let n = pts.first().map(Vec::len).unwrap_or(0);
                for p in pts {
                    if p.len() != n {
                        return Err("all points need the same number of coordinates".into());
                    }
                    let norm: f64 = p.iter().map(|[re, im]| re * re + im * im).sum();
                    if (norm - 1.0).abs() > 1e-12 {
                        return Err(format!("point {p:?} is not on the unit sphere"));
                    }
                }
                Ok((n, pts.len()))
            }
            (None, Some(d), Some(n), Some(_)) => Ok((*n, *d)),
            (None, Some(_), Some(_), None) => Err("random spherical_coisometry needs a `seed`".into()),
            _ => Err("spherical_coisometry needs either `points` or `d`, `n` and `seed`".into()),
        },
        Builder::TruncatedBergman { n, m, truncation, fiber_dim } => {
            if *m == 0 || *fiber_dim == 0 || *n == 0 {
                return Err("truncated_bergman needs n, m, fiber_dim >= 1".into());
            }
            let monomials = crate::multiindex::binomial_f64(n + truncation, *truncation);
            let d = monomials * *fiber_dim as f64;
            if d > MAX_DIM as f64 {
                return Err(format!("truncated_bergman dimension {d} exceeds {MAX_DIM}"));
            }
            Ok((*n, d as usize))
        }
        Builder::DirectSum { parts } => {
            if parts.is_empty() {
                return Err("direct_sum needs at least one part".into());
            }
            let mut n = None;
            let mut total = 0;
            for p in parts {
                let (pn, pd) = shape(p)?;
                if n.is_some_and(|x| x != pn) {
                    return Err("direct_sum parts must have the same number of operators".into());
                }
                n = Some(pn);
                total += pd;
            }
            Ok((n.unwrap_or(0), total))
        }
        Builder::RandomCommuting { n, d, contraction_scale, .. } => {
            if !(contraction_scale.is_finite() && *contraction_scale >= 0.0) {
                return Err("contraction_scale must be finite and non-negative".into());
            }
            Ok((*n, *d))
        }
    }
}

pub(crate) fn read_literal(path: &Path) -> Result<MatrixLiteral, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text)
        .map_err(|e| format!("{}: parse error at line {}, column {}: {e}", path.display(), e.line(), e.column()))
}
