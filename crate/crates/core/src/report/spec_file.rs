//! Spec-file schema and model construction.
//!
//! A spec file is a JSON document. Catalog models are named with their
//! parameters; tabulated models supply values on the full central-difference
//! stencil `{θ, θ ± h_j e_j}`. Complex amplitudes are `[re, im]` pairs.

use std::sync::Arc;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::catalog;
use crate::error::{Error, Result};
use crate::model::{
    CMatrix, CVector, DensityModel, DerivativeMode, Parametric, ProbabilityModel, PureStateModel,
    RVector,
};
use crate::numdiff::fd_step;
use crate::space::{ParamDomain, ParameterVector, SampleSpace};
use crate::tolerance::ToleranceOverrides;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Catalog,
    Probability,
    PureState,
    Density,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum CatalogSpec {
    Bernoulli,
    Qubit,
    PhaseEncoding {
        points: Vec<f64>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
        base_density: Vec<f64>,
        alphas: Vec<f64>,
    },
    GaussianGrid {
        sigma: f64,
        lo: f64,
        hi: f64,
        step: f64,
    },
    RandomPure {
        n: usize,
        m: usize,
        seed: u64,
    },
    RandomReal {
        n: usize,
        m: usize,
        seed: u64,
    },
    RandomProbability {
        n: usize,
        m: usize,
        seed: u64,
    },
    RandomDensity {
        n: usize,
        m: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub points: Vec<f64>,
    /// Unit weights when omitted.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

/// Values on the central-difference stencil.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec<T> {
    /// `h_j`; defaults to `cbrt(ε)·max(1, |θ_j|)`.
    #[serde(default)]
    pub steps: Option<Vec<f64>>,
    pub center: T,
    /// Values at `θ + h_j e_j`, one per parameter.
    pub plus: Vec<T>,
    /// Values at `θ − h_j e_j`, one per parameter.
    pub minus: Vec<T>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    /// Largest Hilbert/sample dimension for which density matrices are formed.
    #[serde(default)]
    pub max_dense_dim: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpecFile {
    pub kind: ModelKind,
    #[serde(default)]
    pub catalog: Option<CatalogSpec>,
    /// Catalog only: force `finite_difference`.
    #[serde(default)]
    pub derivatives: Option<DerivativeMode>,
    #[serde(default)]
    pub space: Option<SpaceSpec>,
    #[serde(default)]
    pub dim_hilbert: Option<usize>,
    pub theta: Vec<f64>,
    #[serde(default)]
    pub table: Option<serde_json::Value>,
    #[serde(default)]
    pub options: Options,
}

pub type ComplexEntry = [f64; 2];

/// A model ready for evaluation.
#[derive(Debug, Clone)]
pub enum BuiltModel {
    Probability(ProbabilityModel),
    Pure(PureStateModel),
    Density(DensityModel),
}

impl BuiltModel {
    pub fn kind_name(&self) -> &'static str {
        match self {
            BuiltModel::Probability(_) => "probability",
            BuiltModel::Pure(_) => "pure_state",
            BuiltModel::Density(_) => "density",
        }
    }
}

fn parse_err(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("field `{field}`: {msg}"))
}

impl ModelSpecFile {
    /// Parse JSON, reporting line/column and the field path on failure.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            // serde_json appends its own " at line L column C"; we lead with it instead.
            let message = inner.to_string();
            let suffix = format!(" at line {} column {}", inner.line(), inner.column());
            let message = message.strip_suffix(&suffix).unwrap_or(&message);
            Error::Parse(format!(
                "line {} column {} (field `{}`): {}",
                inner.line(),
                inner.column(),
                path,
                message
            ))
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn theta(&self) -> Result<ParameterVector> {
        ParameterVector::new(self.theta.clone()).map_err(|e| parse_err("theta", e))
    }

    fn table<T: DeserializeOwned>(&self) -> Result<TableSpec<T>> {
        let value = self
            .table
            .clone()
            .ok_or_else(|| parse_err("table", "required for tabulated models"))?;
        serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            parse_err(&format!("table.{path}"), e.into_inner())
        })
    }

    fn space(&self) -> Result<SampleSpace> {
        let s = self
            .space
            .as_ref()
            .ok_or_else(|| parse_err("space", "required for tabulated models"))?;
        let weights = s.weights.clone().unwrap_or_else(|| vec![1.0; s.points.len()]);
        SampleSpace::new(s.points.clone(), weights).map_err(|e| parse_err("space", e))
    }

    /// Build the model described by the file.
    pub fn build(&self) -> Result<BuiltModel> {
        let theta = self.theta()?;
        match self.kind {
            ModelKind::Catalog => {
                for (present, name) in [
                    (self.table.is_some(), "table"),
                    (self.space.is_some(), "space"),
                    (self.dim_hilbert.is_some(), "dim_hilbert"),
                ] {
                    if present {
                        return Err(parse_err(name, "not allowed for catalog models"));
                    }
                }
                let spec = self
                    .catalog
                    .as_ref()
                    .ok_or_else(|| parse_err("catalog", "required when kind = catalog"))?;
                let model = build_catalog(spec).map_err(|e| parse_err("catalog.params", e))?;
                let fd = self.derivatives == Some(DerivativeMode::FiniteDifference);
                Ok(match model {
                    BuiltModel::Probability(m) if fd => BuiltModel::Probability(m.finite_difference()),
                    BuiltModel::Pure(m) if fd => BuiltModel::Pure(m.finite_difference()),
                    BuiltModel::Density(m) if fd => BuiltModel::Density(m.finite_difference()),
                    other => other,
                })
            }
            kind => {
                if self.catalog.is_some() {
                    return Err(parse_err("catalog", "only allowed when kind = catalog"));
                }
                if self.derivatives == Some(DerivativeMode::Analytic) {
                    return Err(parse_err(
                        "derivatives",
                        "tabulated models only support finite_difference",
                    ));
                }
                match kind {
                    ModelKind::Probability => {
                        let space = self.space()?;
                        let n = space.len();
                        let table: TableSpec<Vec<f64>> = self.table()?;
                        let stencil = Stencil::build(&theta, &table, |v, f| {
                            check_len(v.len(), n, f)?;
                            Ok(RVector::from_column_slice(v))
                        })?;
                        let (map, steps) = stencil.into_parametric("tabulated_probability");
                        Ok(BuiltModel::Probability(
                            ProbabilityModel::new(space, map).with_fd_steps(steps),
                        ))
                    }
                    ModelKind::PureState => {
                        let space = self.space()?;
                        let n = space.len();
                        let table: TableSpec<Vec<ComplexEntry>> = self.table()?;
                        let stencil = Stencil::build(&theta, &table, |v, f| {
                            check_len(v.len(), n, f)?;
                            Ok(CVector::from_iterator(n, v.iter().map(|[re, im]| Complex64::new(*re, *im))))
                        })?;
                        let (map, steps) = stencil.into_parametric("tabulated_pure_state");
                        Ok(BuiltModel::Pure(PureStateModel::new(space, map).with_fd_steps(steps)))
                    }
                    ModelKind::Density => {
                        if self.space.is_some() {
                            return Err(parse_err("space", "not used by density models"));
                        }
                        let n = self
                            .dim_hilbert
                            .ok_or_else(|| parse_err("dim_hilbert", "required for density models"))?;
                        if n == 0 {
                            return Err(parse_err("dim_hilbert", "must be at least 1"));
                        }
                        let table: TableSpec<Vec<Vec<ComplexEntry>>> = self.table()?;
                        let stencil = Stencil::build(&theta, &table, |rows, f| {
                            check_len(rows.len(), n, f)?;
                            for (i, r) in rows.iter().enumerate() {
                                check_len(r.len(), n, &format!("{f}[{i}]"))?;
                            }
                            Ok(CMatrix::from_fn(n, n, |i, j| {
                                Complex64::new(rows[i][j][0], rows[i][j][1])
                            }))
                        })?;
                        let (map, steps) = stencil.into_parametric("tabulated_density");
                        Ok(BuiltModel::Density(DensityModel::new(n, map).with_fd_steps(steps)))
                    }
                    ModelKind::Catalog => unreachable!(),
                }
            }
        }
    }
}

fn check_len(got: usize, expected: usize, field: &str) -> Result<()> {
    if got != expected {
        return Err(parse_err(field, format!("expected {expected} entries, got {got}")));
    }
    Ok(())
}

/// Tabulated values keyed by exact stencil points.
struct Stencil<V> {
    steps: Vec<f64>,
    points: Vec<(ParameterVector, V)>,
    m: usize,
}

impl<V: crate::model::ModelValue> Stencil<V> {
    fn build<T, F>(theta: &ParameterVector, table: &TableSpec<T>, convert: F) -> Result<Self>
    where
        F: Fn(&T, &str) -> Result<V>,
    {
        let m = theta.len();
        check_len(table.plus.len(), m, "table.plus")?;
        check_len(table.minus.len(), m, "table.minus")?;
        let steps = match &table.steps {
            Some(s) => {
                check_len(s.len(), m, "table.steps")?;
                if let Some(j) = s.iter().position(|h| !(*h > 0.0 && h.is_finite())) {
                    return Err(parse_err(&format!("table.steps[{j}]"), "must be positive"));
                }
                s.clone()
            }
            None => theta.as_slice().iter().map(|t| fd_step(*t)).collect(),
        };
        let mut points = vec![(theta.clone(), convert(&table.center, "table.center")?)];
        for j in 0..m {
            points.push((
                theta.shifted(j, steps[j]),
                convert(&table.plus[j], &format!("table.plus[{j}]"))?,
            ));
            points.push((
                theta.shifted(j, -steps[j]),
                convert(&table.minus[j], &format!("table.minus[{j}]"))?,
            ));
        }
        Ok(Stencil { steps, points, m })
    }

    fn into_parametric(self, name: &str) -> (Parametric<V>, Vec<f64>) {
        let points = Arc::new(self.points);
        let label = name.to_string();
        let map = Parametric::new(name, ParamDomain::unbounded(self.m), move |t: &[f64]| {
            points
                .iter()
                .find(|(p, _)| p.as_slice() == t)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| {
                    Error::Validation(format!("`{label}` has no tabulated value at {t:?}"))
                })
        });
        (map, self.steps)
    }
}

pub fn build_catalog(spec: &CatalogSpec) -> Result<BuiltModel> {
    Ok(match spec {
        CatalogSpec::Bernoulli => BuiltModel::Probability(catalog::bernoulli()),
        CatalogSpec::Qubit => BuiltModel::Pure(catalog::qubit()),
        CatalogSpec::PhaseEncoding {
            points,
            weights,
            base_density,
            alphas,
        } => {
            let weights = weights.clone().unwrap_or_else(|| vec![1.0; points.len()]);
            let space = SampleSpace::new(points.clone(), weights)?;
            BuiltModel::Pure(catalog::phase_encoding(space, base_density.clone(), alphas.clone())?)
        }
        CatalogSpec::GaussianGrid { sigma, lo, hi, step } => BuiltModel::Probability(
            catalog::gaussian_grid(*sigma, SampleSpace::uniform_grid(*lo, *hi, *step)?)?,
        ),
        CatalogSpec::RandomPure { n, m, seed } => BuiltModel::Pure(catalog::random_pure(*n, *m, *seed)?),
        CatalogSpec::RandomReal { n, m, seed } => BuiltModel::Pure(catalog::random_real(*n, *m, *seed)?),
        CatalogSpec::RandomProbability { n, m, seed } => {
            BuiltModel::Probability(catalog::random_probability(*n, *m, *seed)?)
        }
        CatalogSpec::RandomDensity { n, m, seed } => {
            BuiltModel::Density(catalog::random_density(*n, *m, *seed)?)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Model;

    #[test]
    fn parses_unit_catalog_entry() {
        let s = ModelSpecFile::from_json(r#"{"kind":"catalog","catalog":{"name":"bernoulli"},"theta":[0.5]}"#)
            .unwrap();
        assert_eq!(s.catalog, Some(CatalogSpec::Bernoulli));
        assert!(matches!(s.build().unwrap(), BuiltModel::Probability(_)));
    }

    #[test]
    fn parse_error_carries_line_and_field() {
        let text = "{\n  \"kind\": \"catalog\",\n  \"catalog\": {\"name\": \"gaussian_grid\", \"params\": {\"sigma\": \"one\"}},\n  \"theta\": [0.0]\n}";
        let msg = ModelSpecFile::from_json(text).unwrap_err().to_string();
        assert!(msg.contains("line 3"), "{msg}");
        assert!(msg.contains("catalog"), "{msg}");
        let msg = ModelSpecFile::from_json(r#"{"kind":"catalog","thta":[1]}"#)
            .unwrap_err()
            .to_string();
        assert!(msg.contains("thta"), "{msg}");
    }

    #[test]
    fn tabulated_stencil_must_be_complete() {
        let text = r#"{"kind":"probability","space":{"points":[0,1]},"theta":[0.3,0.1],
            "table":{"center":[0.7,0.3],"plus":[[0.6,0.4]],"minus":[[0.8,0.2],[0.7,0.3]]}}"#;
        let spec = ModelSpecFile::from_json(text).unwrap();
        let msg = spec.build().unwrap_err().to_string();
        assert!(msg.contains("table.plus"), "{msg}");
    }

    #[test]
    fn tabulated_shapes_are_checked() {
        let text = r#"{"kind":"pure_state","space":{"points":[0,1]},"theta":[0.3],
            "table":{"center":[[1,0],[0,0]],"plus":[[[1,0]]],"minus":[[[1,0],[0,0]]]}}"#;
        let msg = ModelSpecFile::from_json(text).unwrap().build().unwrap_err().to_string();
        assert!(msg.contains("table.plus[0]"), "{msg}");
        let text = r#"{"kind":"pure_state","space":{"points":[0,1]},"theta":[0.3],
            "table":{"center":[[1,0],[0,0]],"plus":[[1,0]],"minus":[[[1,0],[0,0]]]}}"#;
        let msg = ModelSpecFile::from_json(text).unwrap().build().unwrap_err().to_string();
        assert!(msg.contains("table.plus"), "{msg}");
    }

    #[test]
    fn tabulated_bernoulli_evaluates_on_stencil_only() {
        let h = 0.01;
        let text = format!(
            r#"{{"kind":"probability","space":{{"points":[0,1]}},"theta":[0.3],
            "table":{{"steps":[{h}],"center":[0.7,0.3],"plus":[[{},{}]],"minus":[[{},{}]]}}}}"#,
            0.7 - h,
            0.3 + h,
            0.7 + h,
            0.3 - h
        );
        let m = match ModelSpecFile::from_json(&text).unwrap().build().unwrap() {
            BuiltModel::Probability(m) => m,
            _ => unreachable!(),
        };
        assert_eq!(m.derivative_mode(), DerivativeMode::FiniteDifference);
        let t = ParameterVector::new(vec![0.3]).unwrap();
        let d = crate::numdiff::differentiate(&m, &t).unwrap();
        assert!((d[0][1] - 1.0).abs() < 1e-12);
        assert!(m.density(&ParameterVector::new(vec![0.4]).unwrap()).is_err());
    }

    #[test]
    fn analytic_derivatives_rejected_for_tables() {
        let text = r#"{"kind":"probability","derivatives":"analytic","space":{"points":[0,1]},"theta":[0.3],
            "table":{"center":[0.7,0.3],"plus":[[0.6,0.4]],"minus":[[0.8,0.2]]}}"#;
        assert!(ModelSpecFile::from_json(text).unwrap().build().is_err());
    }
}
