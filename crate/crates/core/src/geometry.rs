//! The Hermitian pullback tensor of the Fubini–Study structure,
//!
//! ```text
//! H_jk = ⟨∂_jψ|∂_kψ⟩/⟨ψ|ψ⟩ − ⟨∂_jψ|ψ⟩⟨ψ|∂_kψ⟩/⟨ψ|ψ⟩²,
//! ```
//!
//! and its polar decomposition `H = g − iΩ` into a metric and a symplectic
//! part. With ψ = p^{1/2} e^{iα}, s_j = ∂_j ln p and a_j = ∂_j α:
//!
//! ```text
//! g_jk = ¼ E_p[s_j s_k] + Cov_p(a_j, a_k)
//! Ω_jk = ½ E_p[s_k a_j − s_j a_k]
//! ```
//!
//! The direct formula is the ground truth; the polar route is computed
//! independently and used as a cross-check.

use std::sync::Arc;

use num_complex::Complex64;

use crate::classical::fisher_from_scores;
use crate::error::{validation, Error, Result};
use crate::linalg::{self, max_diff_real};
use crate::model::{CMatrix, CVector, DerivativeMode, Model, Parametric, PureStateModel, RealMatrix};
use crate::numdiff::{differentiate, log_differentials_from, LogDifferentialPair};
use crate::space::{ParameterVector, SampleSpace};
use crate::tolerance::Tolerances;

/// Sign and wedge conventions, echoed in every report.
pub const CONVENTIONS: &[(&str, &str)] = &[
    ("inner_product", "<a|b> = sum_i w_i conj(a_i) b_i"),
    (
        "hermitian_tensor",
        "H_jk = <d_j psi|d_k psi>/<psi|psi> - <d_j psi|psi><psi|d_k psi>/<psi|psi>^2",
    ),
    ("decomposition", "H = g - i*omega, g = Re H, omega = -Im H"),
    ("metric", "g_jk = (1/4) E_p[dj ln p dk ln p] + Cov_p(dj alpha, dk alpha)"),
    ("symplectic", "omega_jk = (1/2) E_p[dk ln p dj alpha - dj ln p dk alpha]"),
    ("wedge", "dtheta_j ^ dtheta_k = dtheta_j (x) dtheta_k - dtheta_k (x) dtheta_j"),
    ("qfi", "Q_jk = Tr[rho L_j L_k], metric_part = Re Q, asym_part = Im Q"),
];

/// Complex m×m tensor over parameter indices, `H = G − iΩ`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianTensor(CMatrix);

impl HermitianTensor {
    pub fn new(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(validation("tensor must be square"));
        }
        Ok(HermitianTensor(entries))
    }

    pub fn entries(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// G = Re H.
    pub fn real_part(&self) -> RealMatrix {
        linalg::real_part(&self.0)
    }

    /// Ω = −Im H.
    pub fn imag_part_negated(&self) -> RealMatrix {
        -linalg::imag_part(&self.0)
    }

    /// ‖H − H†‖_max.
    pub fn hermiticity_defect(&self) -> f64 {
        linalg::hermiticity_defect(&self.0)
    }

    pub fn scaled(&self, factor: f64) -> HermitianTensor {
        HermitianTensor(self.0.scale(factor))
    }
}

/// Direct evaluation of H from ψ and its partials.
pub fn hermitian_tensor_from(space: &SampleSpace, psi: &CVector, dpsi: &[CVector]) -> Result<HermitianTensor> {
    let nn = space.inner(psi, psi).re;
    if !(nn > 0.0) {
        return Err(validation("state vector is zero"));
    }
    let m = dpsi.len();
    let bra_d: Vec<Complex64> = dpsi.iter().map(|d| space.inner(d, psi)).collect();
    let ket_d: Vec<Complex64> = dpsi.iter().map(|d| space.inner(psi, d)).collect();
    let h = CMatrix::from_fn(m, m, |j, k| {
        space.inner(&dpsi[j], &dpsi[k]) / nn - bra_d[j] * ket_d[k] / (nn * nn)
    });
    HermitianTensor::new(h)
}

pub fn hermitian_tensor(model: &PureStateModel, theta: &ParameterVector) -> Result<HermitianTensor> {
    let psi = model.amplitudes(theta)?;
    let dpsi = differentiate(model, theta)?;
    hermitian_tensor_from(model.space(), &psi, dpsi.partials())
}

/// H together with its polar-route pieces and the cross-check residuals.
#[derive(Debug, Clone)]
pub struct PullbackDecomposition {
    pub h: HermitianTensor,
    /// Re H.
    pub g: RealMatrix,
    /// −Im H.
    pub omega: RealMatrix,
    /// ¼ F(|ψ|²).
    pub quarter_classical: RealMatrix,
    /// Cov_p(∂_j α, ∂_k α).
    pub alpha_covariance: RealMatrix,
    /// E_p[∂_j α].
    pub mean_dalpha: Vec<f64>,
    /// Ω assembled from d ln p and dα.
    pub omega_from_log: RealMatrix,
    /// ‖Re H − (¼F + Cov(dα))‖_max.
    pub metric_residual: f64,
    /// ‖Im H + Ω_from_log‖_max.
    pub symplectic_residual: f64,
    pub log: LogDifferentialPair,
    pub mode: DerivativeMode,
}

impl PullbackDecomposition {
    /// g − ¼F.
    pub fn dominance_gap(&self) -> RealMatrix {
        &self.g - &self.quarter_classical
    }

    pub fn assembly_residual(&self) -> f64 {
        self.metric_residual.max(self.symplectic_residual)
    }
}

/// Assemble both routes without judging their agreement.
pub fn assemble(
    space: &SampleSpace,
    psi: &CVector,
    dpsi: &[CVector],
    mode: DerivativeMode,
    supp_tol: f64,
) -> Result<PullbackDecomposition> {
    let h = hermitian_tensor_from(space, psi, dpsi)?;
    let log = log_differentials_from(psi, dpsi, supp_tol);
    let p = &log.density;
    let m = dpsi.len();
    let w = space.weights();
    let e = |f: &dyn Fn(usize) -> f64| -> f64 { (0..p.len()).map(|i| w[i] * p[i] * f(i)).sum() };

    let quarter_classical = fisher_from_scores(space, p, &log.dlnp) * 0.25;
    let mean_dalpha: Vec<f64> = log.dalpha.iter().map(|a| e(&|i| a[i])).collect();
    let alpha_covariance = linalg::symmetrize(&RealMatrix::from_fn(m, m, |j, k| {
        e(&|i| log.dalpha[j][i] * log.dalpha[k][i]) - mean_dalpha[j] * mean_dalpha[k]
    }));
    let omega_from_log = RealMatrix::from_fn(m, m, |j, k| {
        0.5 * e(&|i| log.dlnp[k][i] * log.dalpha[j][i] - log.dlnp[j][i] * log.dalpha[k][i])
    });

    let g = h.real_part();
    let omega = h.imag_part_negated();
    let metric_residual = max_diff_real(&g, &(&quarter_classical + &alpha_covariance));
    let symplectic_residual = max_diff_real(&omega, &omega_from_log);
    Ok(PullbackDecomposition {
        h,
        g,
        omega,
        quarter_classical,
        alpha_covariance,
        mean_dalpha,
        omega_from_log,
        metric_residual,
        symplectic_residual,
        log,
        mode,
    })
}

/// Decompose H at θ; fails if the two routes disagree beyond the assembly tolerance.
pub fn decompose(model: &PureStateModel, theta: &ParameterVector) -> Result<PullbackDecomposition> {
    let psi = model.amplitudes(theta)?;
    let dpsi = differentiate(model, theta)?;
    let tol = Tolerances::for_mode(dpsi.mode());
    let d = assemble(model.space(), &psi, dpsi.partials(), dpsi.mode(), tol.support)?;
    if d.metric_residual > tol.assembly {
        return Err(Error::Consistency {
            what: "metric assembly",
            residual: d.metric_residual,
            tolerance: tol.assembly,
        });
    }
    if d.symplectic_residual > tol.assembly {
        return Err(Error::Consistency {
            what: "symplectic assembly",
            residual: d.symplectic_residual,
            tolerance: tol.assembly,
        });
    }
    Ok(d)
}

/// `g − ¼F`; equals Cov(dα) and is positive semidefinite.
pub fn dominance_gap(model: &PureStateModel, theta: &ParameterVector) -> Result<RealMatrix> {
    Ok(decompose(model, theta)?.dominance_gap())
}

type PhaseFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradientFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A θ-dependent global phase β(θ), optionally with its gradient.
#[derive(Clone)]
pub struct Gauge {
    phase: PhaseFn,
    gradient: Option<GradientFn>,
}

impl Gauge {
    pub fn new<F>(phase: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Gauge {
            phase: Arc::new(phase),
            gradient: None,
        }
    }

    pub fn with_gradient<F>(mut self, gradient: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    pub fn identity() -> Self {
        Gauge::new(|_| 0.0).with_gradient(|t| vec![0.0; t.len()])
    }
}

/// `ψ'(x;θ) = e^{iβ(θ)} ψ(x;θ)`.
///
/// Analytic partials are kept only when both the model and the gauge provide them.
pub fn gauge_transform(model: &PureStateModel, gauge: &Gauge) -> PureStateModel {
    let base = model.clone();
    let phase = Arc::clone(&gauge.phase);
    let mut map = Parametric::new(
        format!("gauge({})", model.name()),
        model.parametric().domain().clone(),
        move |t: &[f64]| {
            let psi = base.amplitudes(&ParameterVector::new(t.to_vec())?)?;
            Ok(psi * Complex64::from_polar(1.0, phase(t)))
        },
    );
    if let Some(steps) = model.parametric().fd_steps() {
        map = map.with_fd_steps(steps.to_vec());
    }
    if let (DerivativeMode::Analytic, Some(grad)) = (model.derivative_mode(), gauge.gradient.clone()) {
        let base = model.clone();
        let phase = Arc::clone(&gauge.phase);
        map = map.with_partials(move |t: &[f64]| {
            let th = ParameterVector::new(t.to_vec())?;
            let psi = base.amplitudes(&th)?;
            let dpsi = differentiate(&base, &th)?;
            let e = Complex64::from_polar(1.0, phase(t));
            let db = grad(t);
            Ok(dpsi
                .partials()
                .iter()
                .zip(db)
                .map(|(d, b)| (d + &psi * Complex64::new(0.0, b)) * e)
                .collect())
        });
    }
    PureStateModel::new(model.space().clone(), map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::classical::classical_fisher_matrix;
    use crate::linalg::{max_abs_real, max_diff_complex, min_eigenvalue_sym};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn theta(v: &[f64]) -> ParameterVector {
        ParameterVector::new(v.to_vec()).unwrap()
    }

    fn phase_model() -> PureStateModel {
        let space = SampleSpace::discrete(vec![-1.0, 0.0, 1.0]).unwrap();
        catalog::phase_encoding(space, vec![0.25, 0.5, 0.25], vec![-1.0, 0.0, 1.0]).unwrap()
    }

    /// Hand-expanded two-component H for the qubit, independent of the library path.
    fn qubit_oracle(t: f64, phi: f64) -> [[Complex64; 2]; 2] {
        let (s, c) = (t / 2.0).sin_cos();
        let e = Complex64::from_polar(1.0, phi);
        let psi = [Complex64::new(c, 0.0), e * s];
        let d = [
            [Complex64::new(-s / 2.0, 0.0), e * (c / 2.0)],
            [Complex64::ZERO, Complex64::i() * e * s],
        ];
        let ip = |a: &[Complex64; 2], b: &[Complex64; 2]| a[0].conj() * b[0] + a[1].conj() * b[1];
        let mut h = [[Complex64::ZERO; 2]; 2];
        for j in 0..2 {
            for k in 0..2 {
                h[j][k] = ip(&d[j], &d[k]) - ip(&d[j], &psi) * ip(&psi, &d[k]);
            }
        }
        h
    }

    #[test]
    fn qubit_tensor_at_equator() {
        let h = hermitian_tensor(&catalog::qubit(), &theta(&[FRAC_PI_2, 0.0])).unwrap();
        let oracle = qubit_oracle(FRAC_PI_2, 0.0);
        for j in 0..2 {
            for k in 0..2 {
                assert!((h.entries()[(j, k)] - oracle[j][k]).norm() < 1e-15);
            }
        }
        let g = h.real_part();
        assert!((g[(0, 0)] - 0.25).abs() < 1e-15 && (g[(1, 1)] - 0.25).abs() < 1e-15);
        assert!(g[(0, 1)].abs() < 1e-15);
        // Direct expansion: Im H_θφ = +¼ sin θ, hence Ω_θφ = −¼.
        assert!((h.entries()[(0, 1)].im - 0.25).abs() < 1e-15);
        assert!((h.imag_part_negated()[(0, 1)] + 0.25).abs() < 1e-15);
    }

    #[test]
    fn qubit_tensor_matches_oracle_everywhere() {
        for (t, phi) in [(0.3, 1.0), (2.0, -0.5), (1.0, 3.0)] {
            let h = hermitian_tensor(&catalog::qubit(), &theta(&[t, phi])).unwrap();
            let o = qubit_oracle(t, phi);
            let oracle = CMatrix::from_fn(2, 2, |j, k| o[j][k]);
            assert!(max_diff_complex(h.entries(), &oracle) < 1e-14);
            assert!((h.real_part()[(1, 1)] - 0.25 * t.sin().powi(2)).abs() < 1e-14);
        }
    }

    #[test]
    fn one_parameter_tensor_is_real() {
        let h = hermitian_tensor(&phase_model(), &theta(&[0.3])).unwrap();
        assert_eq!(h.dim(), 1);
        assert!(h.entries()[(0, 0)].im.abs() < 1e-16);
    }

    #[test]
    fn zero_state_is_rejected() {
        let space = SampleSpace::indices(2).unwrap();
        let z = CVector::zeros(2);
        assert!(hermitian_tensor_from(&space, &z, &[z.clone()]).is_err());
    }

    #[test]
    fn real_state_recovers_classical_fisher() {
        let m = catalog::random_real(8, 3, 2).unwrap();
        let t = theta(&[0.1, -0.3, 0.6]);
        let d = decompose(&m, &t).unwrap();
        assert!(max_abs_real(&d.omega) < 1e-15);
        assert!(max_diff_real(&d.g, &d.quarter_classical) < 1e-12);
        let f = classical_fisher_matrix(&m.to_probability(), &t).unwrap();
        assert!(max_diff_real(&(d.g.clone() * 4.0), &f) < 1e-8);
        assert!(max_abs_real(&d.dominance_gap()) < 1e-12);
    }

    #[test]
    fn phase_encoding_decomposition() {
        let d = decompose(&phase_model(), &theta(&[1.3])).unwrap();
        // Var_p(x) for p = (¼, ½, ¼) on {−1, 0, 1}: E[x²] − E[x]² = ½ − 0.
        let var = 0.25 * 1.0 + 0.25 * 1.0 - (0.25 * -1.0 + 0.25 * 1.0f64).powi(2);
        assert!((d.g[(0, 0)] - var).abs() < 1e-15);
        assert_eq!(d.quarter_classical[(0, 0)], 0.0);
        assert!((d.alpha_covariance[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((dominance_gap(&phase_model(), &theta(&[1.3])).unwrap()[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn qubit_decomposition_pieces() {
        let d = decompose(&catalog::qubit(), &theta(&[FRAC_PI_2, 0.0])).unwrap();
        assert!((d.quarter_classical[(0, 0)] - 0.25).abs() < 1e-14);
        assert!((d.alpha_covariance[(1, 1)] - 0.25).abs() < 1e-14);
        assert!(d.assembly_residual() < 1e-14);
        assert!((d.omega_from_log[(0, 1)] + 0.25).abs() < 1e-14);
    }

    #[test]
    fn gauge_examples() {
        let q = catalog::qubit();
        let t = theta(&[0.8, 0.4]);
        let h0 = hermitian_tensor(&q, &t).unwrap();
        let same = gauge_transform(&q, &Gauge::identity());
        assert_eq!(same.amplitudes(&t).unwrap(), q.amplitudes(&t).unwrap());
        let linear = Gauge::new(|t| 3.0 * t[0]).with_gradient(|t| {
            let mut g = vec![0.0; t.len()];
            g[0] = 3.0;
            g
        });
        let qg = gauge_transform(&q, &linear);
        assert_eq!(qg.derivative_mode(), DerivativeMode::Analytic);
        let h1 = hermitian_tensor(&qg, &t).unwrap();
        assert!(max_diff_complex(h0.entries(), h1.entries()) < 1e-8);

        let r = catalog::random_pure(5, 2, 9).unwrap();
        let t = theta(&[0.7, -1.2]);
        let h0 = hermitian_tensor(&r, &t).unwrap();
        let rg = gauge_transform(&r, &Gauge::new(|t| (t[0] * t[1]).sin()));
        assert_eq!(rg.derivative_mode(), DerivativeMode::FiniteDifference);
        let h1 = hermitian_tensor(&rg, &t).unwrap();
        assert!(max_diff_complex(h0.entries(), h1.entries()) < 1e-7);
    }

    #[test]
    fn broken_derivative_raises_consistency_error() {
        // A derivative that violates Re<ψ|∂ψ> = 0 makes E_p[∂ ln p] ≠ 0, which
        // only the direct route absorbs.
        let q = catalog::qubit();
        let q2 = q.clone();
        let map = Parametric::new("bad_derivative", crate::space::ParamDomain::unbounded(2), move |t: &[f64]| {
            q.amplitudes(&ParameterVector::new(t.to_vec())?)
        })
        .with_partials(move |t: &[f64]| {
            let psi = q2.amplitudes(&ParameterVector::new(t.to_vec())?)?;
            Ok(vec![psi.clone(), psi])
        });
        let m = PureStateModel::new(SampleSpace::indices(2).unwrap(), map);
        let err = decompose(&m, &theta(&[1.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::Consistency { what: "metric assembly", .. }), "{err}");
    }

    #[test]
    fn support_loss_at_pole_shows_in_residual() {
        let q = catalog::qubit();
        let psi = q.amplitudes(&theta(&[0.0, 0.0])).unwrap();
        let dpsi = differentiate(&q, &theta(&[0.0, 0.0])).unwrap();
        let d = assemble(q.space(), &psi, dpsi.partials(), DerivativeMode::Analytic, 1e-12).unwrap();
        assert!((d.metric_residual - 0.25).abs() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn dominance_and_assembly_hold(
            seed in 0u64..100_000,
            n in 2usize..10,
            m in 1usize..4,
            t in proptest::collection::vec(-3.0f64..3.0, 3),
        ) {
            let model = catalog::random_pure(n, m, seed).unwrap();
            let d = decompose(&model, &theta(&t[..m])).unwrap();
            prop_assert!(d.h.hermiticity_defect() <= 1e-12);
            let gap = d.dominance_gap();
            prop_assert!(min_eigenvalue_sym(&gap) >= -1e-9 * max_abs_real(&d.g).max(1e-300));
            prop_assert!(min_eigenvalue_sym(&d.g) >= -1e-9 * max_abs_real(&d.g));
            prop_assert!(max_diff_real(&gap, &d.alpha_covariance) <= 1e-8);
        }
    }
}
