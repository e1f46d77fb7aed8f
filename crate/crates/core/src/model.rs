//! Parametrized models: pure states ψ(x;θ), probability densities p(x;θ)
//! and density matrices ρ(θ).
//!
//! Every model wraps a [`Parametric`] map θ ↦ value with an admissible
//! domain and, optionally, an analytic partial-derivative callback. Models
//! are immutable after construction and cheap to clone.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};
use crate::linalg;
use crate::space::{ParamDomain, ParameterVector, SampleSpace};

pub type CVector = DVector<Complex64>;
pub type RVector = DVector<f64>;
pub type CMatrix = DMatrix<Complex64>;
pub type RealMatrix = DMatrix<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    Analytic,
    FiniteDifference,
}

impl fmt::Display for DerivativeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DerivativeMode::Analytic => "analytic",
            DerivativeMode::FiniteDifference => "finite_difference",
        })
    }
}

/// Values a model can produce: anything with a central difference and a max norm.
pub trait ModelValue: Clone + Send + Sync + 'static {
    fn central_difference(plus: &Self, minus: &Self, step: f64) -> Self;
    fn one_sided_difference(to: &Self, from: &Self, step: f64) -> Self;
    fn max_abs(&self) -> f64;
    fn max_abs_diff(&self, other: &Self) -> f64;
    fn shape(&self) -> (usize, usize);
}

macro_rules! impl_model_value {
    ($ty:ty, $norm:ident) => {
        impl ModelValue for $ty {
            fn central_difference(plus: &Self, minus: &Self, step: f64) -> Self {
                (plus - minus).unscale(2.0 * step)
            }
            fn one_sided_difference(to: &Self, from: &Self, step: f64) -> Self {
                (to - from).unscale(step)
            }
            fn max_abs(&self) -> f64 {
                self.iter().fold(0.0, |acc, v| acc.max(v.$norm()))
            }
            fn max_abs_diff(&self, other: &Self) -> f64 {
                if self.shape() != other.shape() {
                    return f64::INFINITY;
                }
                self.iter()
                    .zip(other.iter())
                    .fold(0.0, |acc, (a, b)| acc.max((a - b).$norm()))
            }
            fn shape(&self) -> (usize, usize) {
                (self.nrows(), self.ncols())
            }
        }
    };
}

impl_model_value!(RVector, abs);
impl_model_value!(CVector, norm);
impl_model_value!(CMatrix, norm);

type EvalFn<V> = Arc<dyn Fn(&[f64]) -> Result<V> + Send + Sync>;
type PartialsFn<V> = Arc<dyn Fn(&[f64]) -> Result<Vec<V>> + Send + Sync>;

/// A map θ ↦ V on an admissible domain, with optional analytic partials.
pub struct Parametric<V> {
    name: String,
    domain: ParamDomain,
    eval: EvalFn<V>,
    partials: Option<PartialsFn<V>>,
    mode: DerivativeMode,
    fd_steps: Option<Vec<f64>>,
}

impl<V> Clone for Parametric<V> {
    fn clone(&self) -> Self {
        Parametric {
            name: self.name.clone(),
            domain: self.domain.clone(),
            eval: Arc::clone(&self.eval),
            partials: self.partials.clone(),
            mode: self.mode,
            fd_steps: self.fd_steps.clone(),
        }
    }
}

impl<V> fmt::Debug for Parametric<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Parametric")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("mode", &self.mode)
            .field("fd_steps", &self.fd_steps)
            .finish_non_exhaustive()
    }
}

impl<V: ModelValue> Parametric<V> {
    /// A map without analytic partials; derivatives come from finite differences.
    pub fn new<F>(name: impl Into<String>, domain: ParamDomain, eval: F) -> Self
    where
        F: Fn(&[f64]) -> Result<V> + Send + Sync + 'static,
    {
        Parametric {
            name: name.into(),
            domain,
            eval: Arc::new(eval),
            partials: None,
            mode: DerivativeMode::FiniteDifference,
            fd_steps: None,
        }
    }

    /// Attach analytic partials `[∂_1 V, …, ∂_m V]` and switch to analytic mode.
    pub fn with_partials<F>(mut self, partials: F) -> Self
    where
        F: Fn(&[f64]) -> Result<Vec<V>> + Send + Sync + 'static,
    {
        self.partials = Some(Arc::new(partials));
        self.mode = DerivativeMode::Analytic;
        self
    }

    /// Force central finite differences even if analytic partials exist.
    pub fn finite_difference(mut self) -> Self {
        self.mode = DerivativeMode::FiniteDifference;
        self
    }

    pub fn with_fd_steps(mut self, steps: Vec<f64>) -> Self {
        self.fd_steps = Some(steps);
        self
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &ParamDomain {
        &self.domain
    }

    pub fn dim_params(&self) -> usize {
        self.domain.dim()
    }

    pub fn mode(&self) -> DerivativeMode {
        self.mode
    }

    pub fn fd_steps(&self) -> Option<&[f64]> {
        self.fd_steps.as_deref()
    }

    pub fn has_analytic_partials(&self) -> bool {
        self.partials.is_some()
    }

    pub fn evaluate(&self, theta: &ParameterVector) -> Result<V> {
        self.domain.check(&self.name, theta)?;
        (self.eval)(theta.as_slice())
    }

    /// Analytic partials regardless of the current mode, when available.
    pub fn analytic_partials(&self, theta: &ParameterVector) -> Option<Result<Vec<V>>> {
        let partials = self.partials.as_ref()?;
        Some(
            self.domain
                .check(&self.name, theta)
                .and_then(|()| partials(theta.as_slice()))
                .and_then(|ps| {
                    if ps.len() != self.dim_params() {
                        Err(Error::DimensionMismatch {
                            expected: self.dim_params(),
                            got: ps.len(),
                        })
                    } else {
                        Ok(ps)
                    }
                }),
        )
    }

    fn map_value<W, F>(&self, name: String, f: F) -> Parametric<W>
    where
        W: ModelValue,
        F: Fn(&[f64], V) -> Result<W> + Send + Sync + 'static,
    {
        let eval = Arc::clone(&self.eval);
        let f = Arc::new(f);
        Parametric {
            name,
            domain: self.domain.clone(),
            eval: Arc::new(move |t: &[f64]| f(t, eval(t)?)),
            partials: None,
            mode: DerivativeMode::FiniteDifference,
            fd_steps: self.fd_steps.clone(),
        }
    }
}

/// Common view over the three model kinds.
pub trait Model {
    type Value: ModelValue;
    fn parametric(&self) -> &Parametric<Self::Value>;
    fn expected_shape(&self) -> (usize, usize);

    fn name(&self) -> &str {
        self.parametric().name()
    }

    fn dim_params(&self) -> usize {
        self.parametric().dim_params()
    }

    fn derivative_mode(&self) -> DerivativeMode {
        self.parametric().mode()
    }

    /// Evaluate with domain and shape checks.
    fn value(&self, theta: &ParameterVector) -> Result<Self::Value> {
        let v = self.parametric().evaluate(theta)?;
        let (rows, cols) = v.shape();
        let (er, ec) = self.expected_shape();
        if (rows, cols) != (er, ec) {
            return Err(validation(format!(
                "model `{}` returned a {rows}x{cols} value, expected {er}x{ec}",
                self.name()
            )));
        }
        Ok(v)
    }
}

macro_rules! model_builders {
    () => {
        /// Force finite-difference derivatives.
        pub fn finite_difference(mut self) -> Self {
            self.map = self.map.finite_difference();
            self
        }

        pub fn with_fd_steps(mut self, steps: Vec<f64>) -> Self {
            self.map = self.map.with_fd_steps(steps);
            self
        }
    };
}

/// ψ(x;θ) on a sample space, normalized as Σ w |ψ|² = 1.
#[derive(Debug, Clone)]
pub struct PureStateModel {
    space: SampleSpace,
    map: Parametric<CVector>,
}

impl PureStateModel {
    pub fn new(space: SampleSpace, map: Parametric<CVector>) -> Self {
        PureStateModel { space, map }
    }

    model_builders!();

    pub fn space(&self) -> &SampleSpace {
        &self.space
    }

    pub fn amplitudes(&self, theta: &ParameterVector) -> Result<CVector> {
        self.value(theta)
    }

    /// `⟨ψ|ψ⟩` at θ.
    pub fn norm_squared(&self, theta: &ParameterVector) -> Result<f64> {
        let psi = self.amplitudes(theta)?;
        Ok(self.space.inner(&psi, &psi).re)
    }

    pub fn validate_at(&self, theta: &ParameterVector, norm_tol: f64) -> Result<()> {
        let defect = (self.norm_squared(theta)? - 1.0).abs();
        if defect > norm_tol {
            return Err(validation(format!(
                "model `{}` not normalized at {:?}: |<psi|psi> - 1| = {defect:e}",
                self.name(),
                theta.as_slice()
            )));
        }
        Ok(())
    }

    /// The modulus-squared density p = |ψ|².
    pub fn to_probability(&self) -> ProbabilityModel {
        let mut map = self
            .map
            .map_value(format!("|{}|^2", self.name()), |_, psi: CVector| {
                Ok(psi.map(|z| z.norm_sqr()))
            });
        if let Some(partials) = self.map.partials.clone() {
            let eval = Arc::clone(&self.map.eval);
            map = map.with_partials(move |t| {
                let psi = eval(t)?;
                Ok(partials(t)?
                    .iter()
                    .map(|d| psi.zip_map(d, |z, dz| 2.0 * (z.conj() * dz).re))
                    .collect())
            });
        }
        if self.map.mode == DerivativeMode::FiniteDifference {
            map = map.finite_difference();
        }
        ProbabilityModel::new(self.space.clone(), map)
    }

    /// ρ = |φ⟩⟨φ| with φ_i = √w_i ψ_i, the state in an orthonormal basis.
    pub fn to_density(&self) -> DensityModel {
        let sqrt_w: Arc<CVector> = Arc::new(CVector::from_iterator(
            self.space.len(),
            self.space.weights().iter().map(|w| Complex64::new(w.sqrt(), 0.0)),
        ));
        let sw = Arc::clone(&sqrt_w);
        let mut map = self
            .map
            .map_value(format!("proj({})", self.name()), move |_, psi: CVector| {
                let phi = psi.component_mul(&sw);
                Ok(&phi * phi.adjoint())
            });
        if let Some(partials) = self.map.partials.clone() {
            let eval = Arc::clone(&self.map.eval);
            map = map.with_partials(move |t| {
                let phi = eval(t)?.component_mul(&sqrt_w);
                Ok(partials(t)?
                    .iter()
                    .map(|d| {
                        let dphi = d.component_mul(&sqrt_w);
                        &dphi * phi.adjoint() + &phi * dphi.adjoint()
                    })
                    .collect())
            });
        }
        if self.map.mode == DerivativeMode::FiniteDifference {
            map = map.finite_difference();
        }
        DensityModel::new(self.space.len(), map)
    }
}

impl Model for PureStateModel {
    type Value = CVector;
    fn parametric(&self) -> &Parametric<CVector> {
        &self.map
    }
    fn expected_shape(&self) -> (usize, usize) {
        (self.space.len(), 1)
    }
}

/// p(x;θ) ≥ 0 on a sample space, normalized as Σ w p = 1.
#[derive(Debug, Clone)]
pub struct ProbabilityModel {
    space: SampleSpace,
    map: Parametric<RVector>,
}

impl ProbabilityModel {
    pub fn new(space: SampleSpace, map: Parametric<RVector>) -> Self {
        ProbabilityModel { space, map }
    }

    model_builders!();

    pub fn space(&self) -> &SampleSpace {
        &self.space
    }

    pub fn density(&self, theta: &ParameterVector) -> Result<RVector> {
        self.value(theta)
    }

    pub fn validate_at(&self, theta: &ParameterVector, norm_tol: f64) -> Result<()> {
        let p = self.density(theta)?;
        if let Some(i) = p.iter().position(|v| !(*v >= 0.0)) {
            return Err(validation(format!(
                "model `{}` has negative density {} at point {i}",
                self.name(),
                p[i]
            )));
        }
        let defect = (self.space.integrate(&p) - 1.0).abs();
        if defect > norm_tol {
            return Err(validation(format!(
                "model `{}` not normalized: |sum w p - 1| = {defect:e}",
                self.name()
            )));
        }
        Ok(())
    }

    /// ρ = diag(w_i p_i), the classical model embedded as a commuting family.
    pub fn to_diagonal_density(&self) -> DensityModel {
        let w: Arc<RVector> = Arc::new(RVector::from_column_slice(self.space.weights()));
        let ww = Arc::clone(&w);
        let mut map = self
            .map
            .map_value(format!("diag({})", self.name()), move |_, p: RVector| {
                Ok(diag_complex(&p.component_mul(&ww)))
            });
        if let Some(partials) = self.map.partials.clone() {
            map = map.with_partials(move |t| {
                Ok(partials(t)?
                    .iter()
                    .map(|d| diag_complex(&d.component_mul(&w)))
                    .collect())
            });
        }
        if self.map.mode == DerivativeMode::FiniteDifference {
            map = map.finite_difference();
        }
        DensityModel::new(self.space.len(), map)
    }
}

fn diag_complex(v: &RVector) -> CMatrix {
    CMatrix::from_diagonal(&v.map(|x| Complex64::new(x, 0.0)))
}

impl Model for ProbabilityModel {
    type Value = RVector;
    fn parametric(&self) -> &Parametric<RVector> {
        &self.map
    }
    fn expected_shape(&self) -> (usize, usize) {
        (self.space.len(), 1)
    }
}

/// ρ(θ): Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone)]
pub struct DensityModel {
    dim: usize,
    map: Parametric<CMatrix>,
}

impl DensityModel {
    pub fn new(dim_hilbert: usize, map: Parametric<CMatrix>) -> Self {
        DensityModel {
            dim: dim_hilbert,
            map,
        }
    }

    model_builders!();

    pub fn dim_hilbert(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self, theta: &ParameterVector) -> Result<CMatrix> {
        self.value(theta)
    }
}

impl Model for DensityModel {
    type Value = CMatrix;
    fn parametric(&self) -> &Parametric<CMatrix> {
        &self.map
    }
    fn expected_shape(&self) -> (usize, usize) {
        (self.dim, self.dim)
    }
}

/// Check ρ against the density-state invariants.
pub fn validate_density(rho: &CMatrix, herm_tol: f64, norm_tol: f64, psd_tol: f64) -> Result<()> {
    if !rho.is_square() {
        return Err(validation(format!(
            "density matrix is {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let herm = linalg::hermiticity_defect(rho);
    if herm > herm_tol {
        return Err(validation(format!("density matrix not Hermitian (defect {herm:e})")));
    }
    let tr = linalg::trace(rho);
    if (tr.re - 1.0).abs() > norm_tol || tr.im.abs() > norm_tol {
        return Err(validation(format!("density matrix trace is {tr}")));
    }
    let min = linalg::hermitian_eigenvalues(rho)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if min < -psd_tol {
        return Err(validation(format!(
            "density matrix not positive semidefinite (min eigenvalue {min:e})"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theta(v: &[f64]) -> ParameterVector {
        ParameterVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn evaluation_checks_domain_and_shape() {
        let space = SampleSpace::indices(2).unwrap();
        let map = Parametric::new(
            "short",
            ParamDomain::new(vec![crate::space::Interval::open(0.0, 1.0)]),
            |_t: &[f64]| Ok(RVector::from_vec(vec![1.0])),
        );
        let m = ProbabilityModel::new(space, map);
        assert!(matches!(m.density(&theta(&[2.0])), Err(Error::Domain { .. })));
        assert!(matches!(m.density(&theta(&[0.5])), Err(Error::Validation(_))));
        assert!(matches!(
            m.density(&theta(&[0.5, 0.5])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn density_validation() {
        let ok = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::new(0.5, 0.0),
            Complex64::new(0.5, 0.0),
        ]));
        assert!(validate_density(&ok, 1e-10, 1e-10, 1e-10).is_ok());
        let neg = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex64::new(1.5, 0.0),
            Complex64::new(-0.5, 0.0),
        ]));
        assert!(validate_density(&neg, 1e-10, 1e-10, 1e-10).is_err());
        let mut nonherm = ok.clone();
        nonherm[(0, 1)] = Complex64::new(0.0, 0.1);
        assert!(validate_density(&nonherm, 1e-10, 1e-10, 1e-10).is_err());
    }
}
