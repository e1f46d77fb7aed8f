//! Parameter differentials of models: analytic callbacks or central finite
//! differences, and the logarithmic differentials d ln p and dα of a pure
//! state.
//!
//! Differentials are always evaluated in the coordinate basis: a
//! [`Differential`] holds the m partials ∂V/∂θ_j.

use num_complex::Complex64;

use crate::error::Result;
use crate::model::{CVector, DerivativeMode, Model, ModelValue, PureStateModel, RVector};
use crate::space::{ParameterVector, SampleSpace};
use crate::tolerance::{Tolerances, BOUNDARY_DERIVATIVE_TOL, FD_CONSISTENCY_REL};

/// Central-difference step `cbrt(ε)·max(1, |θ_j|)`.
pub fn fd_step(theta_j: f64) -> f64 {
    f64::EPSILON.cbrt() * theta_j.abs().max(1.0)
}

/// The m partial derivatives of a model value at one parameter point.
#[derive(Debug, Clone)]
pub struct Differential<V> {
    partials: Vec<V>,
    mode: DerivativeMode,
    /// Relative forward/backward stencil disagreement per parameter (FD only).
    stencil_disagreement: Vec<f64>,
}

impl<V> Differential<V> {
    pub fn from_partials(partials: Vec<V>, mode: DerivativeMode) -> Self {
        let m = partials.len();
        Differential {
            partials,
            mode,
            stencil_disagreement: vec![0.0; m],
        }
    }

    pub fn partials(&self) -> &[V] {
        &self.partials
    }

    pub fn into_partials(self) -> Vec<V> {
        self.partials
    }

    pub fn len(&self) -> usize {
        self.partials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partials.is_empty()
    }

    pub fn mode(&self) -> DerivativeMode {
        self.mode
    }

    pub fn stencil_disagreement(&self) -> &[f64] {
        &self.stencil_disagreement
    }

    /// Parameters whose one-sided stencils disagree beyond the smoothness threshold.
    pub fn non_smooth_parameters(&self) -> Vec<usize> {
        self.stencil_disagreement
            .iter()
            .enumerate()
            .filter(|(_, d)| **d > FD_CONSISTENCY_REL)
            .map(|(j, _)| j)
            .collect()
    }
}

impl<V> std::ops::Index<usize> for Differential<V> {
    type Output = V;
    fn index(&self, j: usize) -> &V {
        &self.partials[j]
    }
}

/// Partials of `model` at `theta` using the model's derivative mode.
///
/// Under finite differences every stencil point θ ± h_j e_j must be
/// admissible; otherwise the domain error names the offending parameter.
pub fn differentiate<M: Model>(model: &M, theta: &ParameterVector) -> Result<Differential<M::Value>> {
    match model.derivative_mode() {
        DerivativeMode::Analytic => {
            let map = model.parametric();
            match map.analytic_partials(theta) {
                Some(partials) => {
                    let partials = partials?;
                    let (er, ec) = model.expected_shape();
                    for d in &partials {
                        if d.shape() != (er, ec) {
                            return Err(crate::error::validation(format!(
                                "analytic partial of `{}` has shape {:?}, expected {:?}",
                                model.name(),
                                d.shape(),
                                (er, ec)
                            )));
                        }
                    }
                    Ok(Differential::from_partials(partials, DerivativeMode::Analytic))
                }
                None => central_differences(model, theta),
            }
        }
        DerivativeMode::FiniteDifference => central_differences(model, theta),
    }
}

/// Central finite differences regardless of the model's mode.
pub fn central_differences<M: Model>(
    model: &M,
    theta: &ParameterVector,
) -> Result<Differential<M::Value>> {
    let center = model.value(theta)?;
    let steps = model.parametric().fd_steps();
    let m = model.dim_params();
    let mut partials = Vec::with_capacity(m);
    let mut disagreement = Vec::with_capacity(m);
    for j in 0..m {
        let h = steps
            .and_then(|s| s.get(j).copied())
            .unwrap_or_else(|| fd_step(theta[j]));
        let plus_theta = theta.shifted(j, h);
        let minus_theta = theta.shifted(j, -h);
        let plus = model.value(&plus_theta)?;
        let minus = model.value(&minus_theta)?;
        // Step actually realized in floating point.
        let h_plus = plus_theta[j] - theta[j];
        let h_minus = theta[j] - minus_theta[j];
        let central = M::Value::central_difference(&plus, &minus, 0.5 * (h_plus + h_minus));
        let forward = M::Value::one_sided_difference(&plus, &center, h_plus);
        let backward = M::Value::one_sided_difference(&center, &minus, h_minus);
        let scale = central.max_abs().max(center.max_abs()).max(f64::MIN_POSITIVE);
        disagreement.push(forward.max_abs_diff(&backward) / scale);
        partials.push(central);
    }
    Ok(Differential {
        partials,
        mode: DerivativeMode::FiniteDifference,
        stencil_disagreement: disagreement,
    })
}

/// d ln p and dα of a pure state, restricted to the support of p = |ψ|².
#[derive(Debug, Clone)]
pub struct LogDifferentialPair {
    /// `∂_j ln p = 2 Re(∂_jψ/ψ)`, zero off support.
    pub dlnp: Vec<RVector>,
    /// `∂_j α = Im(∂_jψ/ψ)`, zero off support.
    pub dalpha: Vec<RVector>,
    pub support_mask: Vec<bool>,
    /// `p = |ψ|²` at the evaluation point.
    pub density: RVector,
    /// max over off-support points and parameters of |∂_j p|.
    pub boundary_derivative: f64,
    /// max deviation of `(½ d ln p + i dα)ψ` from `dψ` on the support.
    pub cross_residual: f64,
}

impl LogDifferentialPair {
    pub fn dim_params(&self) -> usize {
        self.dlnp.len()
    }

    pub fn boundary_warning(&self) -> bool {
        self.boundary_derivative > BOUNDARY_DERIVATIVE_TOL
    }

    /// max_j max_x |∂_j α|.
    pub fn max_abs_dalpha(&self) -> f64 {
        self.dalpha
            .iter()
            .flat_map(|a| a.iter())
            .fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

/// Support mask `p_i ≥ supp_tol · max p`.
pub fn support_mask(p: &RVector, supp_tol: f64) -> Vec<bool> {
    let max = p.iter().copied().fold(0.0, f64::max);
    let cut = supp_tol * max;
    p.iter().map(|v| *v > 0.0 && *v >= cut).collect()
}

/// Logarithmic differentials from precomputed ψ and its partials.
///
/// The phase derivative comes from `Im(dψ/ψ)` rather than differentiating
/// `arg ψ`, so no branch cut is involved.
pub fn log_differentials_from(psi: &CVector, dpsi: &[CVector], supp_tol: f64) -> LogDifferentialPair {
    let n = psi.len();
    let density = psi.map(|z| z.norm_sqr());
    let support = support_mask(&density, supp_tol);
    let mut dlnp = Vec::with_capacity(dpsi.len());
    let mut dalpha = Vec::with_capacity(dpsi.len());
    let mut boundary: f64 = 0.0;
    let mut cross: f64 = 0.0;
    for d in dpsi {
        let mut s = RVector::zeros(n);
        let mut a = RVector::zeros(n);
        for i in 0..n {
            if support[i] {
                let ratio = d[i] / psi[i];
                s[i] = 2.0 * ratio.re;
                a[i] = ratio.im;
                let rebuilt = Complex64::new(0.5 * s[i], a[i]) * psi[i];
                cross = cross.max((rebuilt - d[i]).norm());
            } else {
                boundary = boundary.max((2.0 * (psi[i].conj() * d[i]).re).abs());
            }
        }
        dlnp.push(s);
        dalpha.push(a);
    }
    LogDifferentialPair {
        dlnp,
        dalpha,
        support_mask: support,
        density,
        boundary_derivative: boundary,
        cross_residual: cross,
    }
}

pub fn log_differentials(model: &PureStateModel, theta: &ParameterVector) -> Result<LogDifferentialPair> {
    let psi = model.amplitudes(theta)?;
    let dpsi = differentiate(model, theta)?;
    let tol = Tolerances::for_mode(dpsi.mode());
    Ok(log_differentials_from(&psi, dpsi.partials(), tol.support))
}

/// `max_j |Re Σ_i w_i conj(ψ_i) ∂_jψ_i|`; zero for exact derivatives of a normalized state.
pub fn normalization_differential_from(space: &SampleSpace, psi: &CVector, dpsi: &[CVector]) -> f64 {
    dpsi.iter()
        .map(|d| space.inner(psi, d).re.abs())
        .fold(0.0, f64::max)
}

pub fn check_normalization_differential(model: &PureStateModel, theta: &ParameterVector) -> Result<f64> {
    let psi = model.amplitudes(theta)?;
    let dpsi = differentiate(model, theta)?;
    Ok(normalization_differential_from(model.space(), &psi, dpsi.partials()))
}
