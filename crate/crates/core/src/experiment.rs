//! Scan configs, per-`n` diagnostics tables, verdicts and their CSV/JSON output.
//!
//! A config is a JSON document:
//!
//! ```json
//! {
//!   "operator": { "name": "best-lpa", "sigma_count": 12, "kernel_dim": 2, "seed": 0 },
//!   "n_list": [2, 4, 8],
//!   "m_rule": "factor:4",
//!   "tolerances": { "rank_tol": 1e-12 },
//!   "outputs": [ { "path": "best.csv", "format": "csv" } ]
//! }
//! ```
//!
//! Every verdict is recomputed from the rows and the tolerances alone.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{make_lpa, AnalysisError, LpaDiagnostics};
use crate::gallery::{GalleryError, OperatorFamily, SingularSystem, Truncation};
use crate::tolerances::Tolerances;

pub const CSV_HEADER: [&str; 10] = [
    "n",
    "m",
    "theta_n",
    "sin_theta_gap",
    "sin_theta_qn",
    "norm_tn_dag_t",
    "kernel_core_dim",
    "kernel_dim",
    "kernel_gap",
    "bound_factor",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("field `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
}

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("numerical failure for operator {operator} at n = {n}: {source}")]
    Numerical {
        operator: String,
        n: usize,
        source: AnalysisError,
    },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
}

/// Operator selection in a config, tagged by `name`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorSpec {
    Identity,
    Seidman,
    Du,
    BestLpa {
        /// Explicit nonincreasing singular values; overrides `sigma_count`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigmas: Option<Vec<f64>>,
        /// `σ_k = 1/k²` for `k ≤ sigma_count`.
        #[serde(default = "default_sigma_count")]
        sigma_count: usize,
        #[serde(default = "default_kernel_dim")]
        kernel_dim: usize,
        #[serde(default)]
        seed: u64,
    },
    Random {
        #[serde(default = "default_kernel_dim")]
        kernel_dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kernel_support: Option<usize>,
        #[serde(default)]
        seed: u64,
    },
}

fn default_sigma_count() -> usize {
    12
}

fn default_kernel_dim() -> usize {
    2
}

impl OperatorSpec {
    pub fn family(&self) -> Result<OperatorFamily, GalleryError> {
        Ok(match self {
            Self::Identity => OperatorFamily::Identity,
            Self::Seidman => OperatorFamily::Seidman,
            Self::Du => OperatorFamily::Du,
            Self::BestLpa {
                sigmas,
                sigma_count,
                kernel_dim,
                seed,
            } => OperatorFamily::BestLpa {
                system: match sigmas {
                    Some(s) => SingularSystem::new(s.clone(), *kernel_dim)?,
                    None => SingularSystem::inverse_squares(*sigma_count, *kernel_dim)?,
                },
                seed: *seed,
            },
            Self::Random {
                kernel_dim,
                kernel_support,
                seed,
            } => OperatorFamily::Random {
                kernel_dim: *kernel_dim,
                kernel_support: *kernel_support,
                seed: *seed,
            },
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: PathBuf,
    pub format: OutputFormat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub operator: OperatorSpec,
    pub n_list: Vec<usize>,
    #[serde(default)]
    pub m_rule: Truncation,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub outputs: Vec<OutputSpec>,
}

impl ScanConfig {
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let config: Self = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: strip_position(&e.to_string()),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |field, message: String| Err(ConfigError::Invalid { field, message });
        if self.n_list.is_empty() {
            return invalid("n_list", "must not be empty".into());
        }
        if self.n_list.contains(&0) {
            return invalid("n_list", "entries must be at least 1".into());
        }
        if let Some(w) = self.n_list.windows(2).find(|w| w[0] >= w[1]) {
            return invalid("n_list", format!("must be strictly ascending, found {} then {}", w[0], w[1]));
        }
        let family = match self.operator.family() {
            Ok(f) => f,
            Err(e) => return invalid("operator", e.to_string()),
        };
        for &n in &self.n_list {
            let m = self.m_rule.m_for(n);
            if m < n {
                return invalid("m_rule", format!("{} gives m = {m} < n = {n}", self.m_rule));
            }
            if let OperatorFamily::BestLpa { system, .. } = &family {
                if n > system.sigmas().len() {
                    return invalid(
                        "n_list",
                        format!("n = {n} exceeds the {} singular values of best-lpa", system.sigmas().len()),
                    );
                }
                if m < system.domain_dim() {
                    return invalid(
                        "m_rule",
                        format!("{} gives m = {m} below the best-lpa domain dimension {}", self.m_rule, system.domain_dim()),
                    );
                }
            }
            if let OperatorFamily::Random {
                kernel_dim,
                kernel_support,
                ..
            } = &family
            {
                if *kernel_dim >= m || kernel_support.is_some_and(|s| s > m || s < *kernel_dim) {
                    return invalid(
                        "operator",
                        format!("kernel_dim/kernel_support do not fit truncation m = {m} at n = {n}"),
                    );
                }
            }
        }
        for (name, v) in [
            ("tolerances.route_agreement", self.tolerances.route_agreement),
            ("tolerances.kernel_gap", self.tolerances.kernel_gap),
            ("tolerances.theta_zero", self.tolerances.theta_zero),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return invalid("tolerances", format!("{name} must be finite and nonnegative"));
            }
        }
        if let Some(t) = self.tolerances.rank_tol {
            if !(t.is_finite() && t > 0.0) {
                return invalid("tolerances", "rank_tol must be positive and finite".into());
            }
        }
        Ok(())
    }
}

/// serde_json appends " at line L column C"; the position is reported separately.
fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message.to_string(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelVerdict {
    Holds,
    Violated,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThetaVerdict {
    Bounded,
    Degrading,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundTally {
    pub passed: usize,
    pub total: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    pub kernel_approximability: KernelVerdict,
    pub sup_theta_bounded: ThetaVerdict,
    /// Rows at or beyond `n*` where `‖Tₙ†T‖ ≤ √(1 + tan²θₙ)` (slack as in the error bound).
    pub bound_checks_passed: BoundTally,
    pub n_star: Option<usize>,
}

/// Relative slack when comparing successive `θₙ`.
const TREND_SLACK: f64 = 1e-6;
/// `θ_last ≥ DEGRADING_RATIO·θ_first` on a nondecreasing scan counts as degrading.
const DEGRADING_RATIO: f64 = 1.25;
/// `θ_last ≤ IMPROVING_RATIO·θ_first` on a nonincreasing scan counts as bounded.
const IMPROVING_RATIO: f64 = 0.8;

fn reached(row: &LpaDiagnostics, tol: &Tolerances) -> bool {
    row.kernel_core_dim == row.kernel_dim && row.kernel_gap <= tol.kernel_gap
}

impl Verdicts {
    pub fn from_rows(rows: &[LpaDiagnostics], tol: &Tolerances) -> Self {
        let n_star = rows.iter().find(|r| reached(r, tol)).map(|r| r.n);

        let kernel_approximability = match (rows.first(), rows.last()) {
            (Some(_), Some(last)) if reached(last, tol) => KernelVerdict::Holds,
            (Some(first), Some(last)) if last.kernel_core_dim <= first.kernel_core_dim => KernelVerdict::Violated,
            _ => KernelVerdict::Inconclusive,
        };

        let thetas: Vec<f64> = rows.iter().map(|r| r.theta_n).collect();
        let sup_theta_bounded = if !thetas.is_empty() && thetas.iter().all(|&t| t <= tol.theta_zero) {
            ThetaVerdict::Bounded
        } else if thetas.len() >= 2 {
            let (first, last) = (thetas[0], thetas[thetas.len() - 1]);
            let nondecreasing = thetas.windows(2).all(|w| w[1] >= w[0] * (1.0 - TREND_SLACK));
            let nonincreasing = thetas.windows(2).all(|w| w[1] <= w[0] * (1.0 + TREND_SLACK));
            if nondecreasing && last >= DEGRADING_RATIO * first {
                ThetaVerdict::Degrading
            } else if nonincreasing && last <= IMPROVING_RATIO * first {
                ThetaVerdict::Bounded
            } else {
                ThetaVerdict::Inconclusive
            }
        } else {
            ThetaVerdict::Inconclusive
        };

        let eligible: Vec<&LpaDiagnostics> = rows.iter().filter(|r| n_star.is_some_and(|s| r.n >= s)).collect();
        let passed = eligible
            .iter()
            .filter(|r| r.norm_tn_dag_t <= r.bound_factor * (1.0 + tol.bound_rel) + tol.bound_abs)
            .count();

        Self {
            kernel_approximability,
            sup_theta_bounded,
            bound_checks_passed: BoundTally {
                passed,
                total: eligible.len(),
            },
            n_star,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub config: ScanConfig,
    pub rows: Vec<LpaDiagnostics>,
    pub verdicts: Verdicts,
}

/// Diagnostics for every `n` of the config, computed in parallel and ordered by `n`.
pub fn run_scan(config: &ScanConfig) -> Result<ScanReport, ScanError> {
    let numerical = |n: usize, source: AnalysisError| ScanError::Numerical {
        operator: config.operator_name().to_string(),
        n,
        source,
    };
    let family = config
        .operator
        .family()
        .map_err(|e| numerical(config.n_list.first().copied().unwrap_or(0), e.into()))?;
    let rows = config
        .n_list
        .par_iter()
        .map(|&n| {
            make_lpa(&family, n, config.m_rule.m_for(n), config.tolerances)
                .and_then(|inst| inst.diagnostics())
                .map_err(|e| numerical(n, e))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let verdicts = Verdicts::from_rows(&rows, &config.tolerances);
    Ok(ScanReport {
        config: config.clone(),
        rows,
        verdicts,
    })
}

impl ScanConfig {
    pub fn operator_name(&self) -> &'static str {
        match self.operator {
            OperatorSpec::Identity => "identity",
            OperatorSpec::Seidman => "seidman",
            OperatorSpec::Du => "du",
            OperatorSpec::BestLpa { .. } => "best-lpa",
            OperatorSpec::Random { .. } => "random",
        }
    }
}

/// 17 significant digits: enough to round-trip any `f64`.
fn float(x: f64) -> String {
    format!("{x:.16e}")
}

impl ScanReport {
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                r.m.to_string(),
                float(r.theta_n),
                float(r.sin_theta_gap),
                float(r.sin_theta_qn),
                float(r.norm_tn_dag_t),
                r.kernel_core_dim.to_string(),
                r.kernel_dim.to_string(),
                float(r.kernel_gap),
                float(r.bound_factor),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Writes every configured output; relative paths resolve against `base`.
    pub fn write_outputs(&self, base: Option<&Path>) -> Result<Vec<PathBuf>, ScanError> {
        let mut written = Vec::with_capacity(self.config.outputs.len());
        for out in &self.config.outputs {
            let path = match base {
                Some(dir) if out.path.is_relative() => dir.join(&out.path),
                _ => out.path.clone(),
            };
            let body = match out.format {
                OutputFormat::Csv => self.to_csv(),
                OutputFormat::Json => self.to_json(),
            };
            let write = || -> io::Result<()> {
                if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                    fs::create_dir_all(parent)?;
                }
                fs::write(&path, body)
            };
            write().map_err(|source| ScanError::Write {
                path: path.clone(),
                source,
            })?;
            written.push(path);
        }
        Ok(written)
    }
}
