//! Report generation: run every computation and identity check for a model
//! and collect the results into a deterministic JSON document.
//!
//! Exit-code contract: 0 all checks pass, 1 at least one warning and no
//! failure, 2 any failure, 3 input error.

mod checks;
pub mod spec_file;
mod verify;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::CONVENTIONS;
use crate::linalg::rows_real;
use crate::model::{CMatrix, Model, RealMatrix};
use crate::tolerance::Tolerances;

pub use checks::{density_suite, probability_suite, pure_suite, SuiteOutcome};
pub use spec_file::{BuiltModel, CatalogSpec, ModelKind, ModelSpecFile};
pub use verify::{verify_suite, VerifySummary};

pub const REPORT_FORMAT: &str = "qfim-report/1";

/// Default upper bound on the dimension for which n×n density matrices are formed.
pub const DEFAULT_MAX_DENSE_DIM: usize = 256;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_WARN: i32 = 1;
pub const EXIT_FAIL: i32 = 2;
pub const EXIT_INPUT_ERROR: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    NotApplicable,
    Pass,
    Warn,
    Fail,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::NotApplicable => "not_applicable",
            Status::Pass => "pass",
            Status::Warn => "warn",
            Status::Fail => "fail",
        })
    }
}

/// Deliberate defects for negative-control runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Negate Ω from the direct route before the cross-checks.
    FlipOmegaSign,
}

/// A named identity check: status follows from residual vs tolerance alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    /// Pass when `residual ≤ tolerance`, otherwise `on_violation`.
    pub fn measure(name: &str, residual: f64, tolerance: f64, on_violation: Status) -> Self {
        let status = if residual <= tolerance {
            Status::Pass
        } else {
            on_violation
        };
        Check {
            name: name.to_string(),
            residual: Some(residual),
            tolerance: Some(tolerance),
            status,
            note: None,
        }
    }

    pub fn not_applicable(name: &str, note: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            residual: None,
            tolerance: None,
            status: Status::NotApplicable,
            note: Some(note.into()),
        }
    }

    pub fn failed(name: &str, note: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            residual: None,
            tolerance: None,
            status: Status::Fail,
            note: Some(note.into()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&CMatrix> for ComplexMatrixJson {
    fn from(m: &CMatrix) -> Self {
        ComplexMatrixJson {
            re: rows_real(&m.map(|z| z.re)),
            im: rows_real(&m.map(|z| z.im)),
        }
    }
}

pub type Rows = Vec<Vec<f64>>;

pub(crate) fn rows(m: &RealMatrix) -> Rows {
    rows_real(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEcho {
    pub kind: String,
    pub name: String,
    pub theta: Vec<f64>,
    pub derivative_mode: String,
    pub dim_params: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim_hilbert: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSection {
    /// F_jk = E_p[∂_j ln p ∂_k ln p].
    pub fisher: Rows,
    pub score_means: Vec<f64>,
    pub support_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySection {
    pub h: ComplexMatrixJson,
    pub g: Rows,
    pub omega: Rows,
    pub quarter_classical: Rows,
    pub alpha_covariance: Rows,
    pub mean_dalpha: Vec<f64>,
    pub omega_from_log: Rows,
    pub dominance_gap: Rows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumSection {
    /// Q_jk = Tr[ρ L_j L_k].
    pub q: ComplexMatrixJson,
    pub metric_part: Rows,
    pub asym_part: Rows,
    pub sld_residuals: Vec<f64>,
    pub support_rank: usize,
    pub rho_eigenvalues: Vec<f64>,
    pub purity_defect: f64,
    /// 4 Tr[ρ ∂_jρ ∂_kρ], present for pure states.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pure_trace_metric_part: Option<Rows>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub status: Status,
    pub pass: usize,
    pub warn: usize,
    pub fail: usize,
    pub not_applicable: usize,
    pub exit_code: i32,
}

impl Summary {
    pub fn from_statuses<'a>(statuses: impl IntoIterator<Item = &'a Status>) -> Self {
        let (mut pass, mut warn, mut fail, mut na) = (0, 0, 0, 0);
        for s in statuses {
            match s {
                Status::Pass => pass += 1,
                Status::Warn => warn += 1,
                Status::Fail => fail += 1,
                Status::NotApplicable => na += 1,
            }
        }
        let (status, exit_code) = if fail > 0 {
            (Status::Fail, EXIT_FAIL)
        } else if warn > 0 {
            (Status::Warn, EXIT_WARN)
        } else {
            (Status::Pass, EXIT_PASS)
        };
        Summary {
            status,
            pass,
            warn,
            fail,
            not_applicable: na,
            exit_code,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub format: String,
    pub model: ModelEcho,
    pub conventions: BTreeMap<String, String>,
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pure_geometry: Option<GeometrySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantum: Option<QuantumSection>,
    pub checks: Vec<Check>,
    pub summary: Summary,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn exit_code(&self) -> i32 {
        self.summary.exit_code
    }
}

/// Run the full computation and check suite for a spec file.
pub fn run(spec: &ModelSpecFile) -> Result<Report> {
    run_with_fault(spec, None)
}

pub fn run_with_fault(spec: &ModelSpecFile, fault: Option<Fault>) -> Result<Report> {
    let model = spec.build()?;
    let theta = spec.theta()?;
    let max_dense = spec.options.max_dense_dim.unwrap_or(DEFAULT_MAX_DENSE_DIM);
    let overrides = &spec.options.tolerances;
    let (echo, tol, outcome) = match &model {
        BuiltModel::Probability(m) => {
            let tol = Tolerances::for_mode(m.derivative_mode()).with_overrides(overrides);
            let echo = echo(&model, m, &theta, Some(m.space().len()), None);
            (echo, tol, probability_suite(m, &theta, &tol, max_dense)?)
        }
        BuiltModel::Pure(m) => {
            let tol = Tolerances::for_mode(m.derivative_mode()).with_overrides(overrides);
            let echo = echo(&model, m, &theta, Some(m.space().len()), None);
            (echo, tol, pure_suite(m, &theta, &tol, max_dense, fault)?)
        }
        BuiltModel::Density(m) => {
            let tol = Tolerances::for_mode(m.derivative_mode()).with_overrides(overrides);
            let echo = echo(&model, m, &theta, None, Some(m.dim_hilbert()));
            (echo, tol, density_suite(m, &theta, &tol)?)
        }
    };
    let summary = Summary::from_statuses(outcome.checks.iter().map(|c| &c.status));
    Ok(Report {
        format: REPORT_FORMAT.to_string(),
        model: echo,
        conventions: CONVENTIONS
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect(),
        tolerances: tol,
        classical: outcome.classical,
        pure_geometry: outcome.geometry,
        quantum: outcome.quantum,
        checks: outcome.checks,
        summary,
    })
}

fn echo<M: Model>(
    built: &BuiltModel,
    m: &M,
    theta: &crate::space::ParameterVector,
    sample_points: Option<usize>,
    dim_hilbert: Option<usize>,
) -> ModelEcho {
    ModelEcho {
        kind: built.kind_name().to_string(),
        name: m.name().to_string(),
        theta: theta.as_slice().to_vec(),
        derivative_mode: m.derivative_mode().to_string(),
        dim_params: m.dim_params(),
        sample_points,
        dim_hilbert,
    }
}
