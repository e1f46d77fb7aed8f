//! Check suites per model kind. Each suite computes every quantity the
//! report shows and turns every identity into a [`Check`].

use crate::classical::{fisher_from_scores, scores_from};
use crate::error::Result;
use crate::geometry::{assemble, gauge_transform, hermitian_tensor, Gauge, PullbackDecomposition};
use crate::linalg::{self, max_abs_real, max_diff_real, min_eigenvalue_sym};
use crate::model::{CMatrix, DensityModel, DerivativeMode, ProbabilityModel, PureStateModel, RealMatrix};
use crate::numdiff::{differentiate, normalization_differential_from, Differential};
use crate::sld::{self, qfi_pure_fast, qfi_pure_trace, qfi_tensor, QfiTensor, SldSet};
use crate::space::ParameterVector;
use crate::tolerance::{Tolerances, BOUNDARY_DERIVATIVE_TOL, FD_CONSISTENCY_REL};

use super::{
    rows, Check, ClassicalSection, ComplexMatrixJson, Fault, GeometrySection, QuantumSection, Status,
};

/// Everything a suite produced.
#[derive(Debug, Clone, Default)]
pub struct SuiteOutcome {
    pub classical: Option<ClassicalSection>,
    pub geometry: Option<GeometrySection>,
    pub quantum: Option<QuantumSection>,
    pub checks: Vec<Check>,
}

fn psd_check(name: &str, m: &RealMatrix, scale: f64, tol: &Tolerances) -> Check {
    let residual = (-min_eigenvalue_sym(m)).max(0.0);
    Check::measure(name, residual, tol.psd * scale, Status::Fail)
}

fn stencil_check<V>(d: &Differential<V>) -> Check {
    match d.mode() {
        DerivativeMode::Analytic => Check::not_applicable("fd-stencil-consistency", "analytic derivatives"),
        DerivativeMode::FiniteDifference => {
            let worst = d.stencil_disagreement().iter().copied().fold(0.0, f64::max);
            Check::measure("fd-stencil-consistency", worst, FD_CONSISTENCY_REL, Status::Warn)
        }
    }
}

fn boundary_check(boundary_derivative: f64) -> Check {
    Check::measure("support-boundary", boundary_derivative, BOUNDARY_DERIVATIVE_TOL, Status::Warn)
}

/// Pairwise max deviation among several matrices.
fn pairwise_max(ms: &[&RealMatrix]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in ms.iter().enumerate() {
        for b in &ms[i + 1..] {
            worst = worst.max(max_diff_real(a, b));
        }
    }
    worst
}

struct DensityStage {
    rho: CMatrix,
    drho: Differential<CMatrix>,
    slds: SldSet,
    qfi: QfiTensor,
}

/// Input checks on ρ and ∂ρ, then the SLD solve. Returns `None` if the input is unusable.
fn density_stage(
    model: &DensityModel,
    theta: &ParameterVector,
    tol: &Tolerances,
    checks: &mut Vec<Check>,
) -> Result<Option<DensityStage>> {
    let rho = model.matrix(theta)?;
    let drho = differentiate(model, theta)?;
    let herm = linalg::hermiticity_defect(&rho);
    checks.push(Check::measure("rho-hermitian", herm, tol.hermitian, Status::Fail));
    let tr = linalg::trace(&rho);
    checks.push(Check::measure(
        "rho-trace",
        (tr - num_complex::Complex64::new(1.0, 0.0)).norm(),
        tol.norm,
        Status::Fail,
    ));
    let min_ev = linalg::hermitian_eigenvalues(&rho)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    checks.push(Check::measure("rho-psd", (-min_ev).max(0.0), tol.psd, Status::Fail));
    let dherm = drho
        .partials()
        .iter()
        .map(linalg::hermiticity_defect)
        .fold(0.0, f64::max);
    checks.push(Check::measure("drho-hermitian", dherm, tol.hermitian, Status::Fail));
    let dtr = drho
        .partials()
        .iter()
        .map(|d| linalg::trace(d).norm())
        .fold(0.0, f64::max);
    checks.push(Check::measure("drho-traceless", dtr, tol.trace, Status::Fail));
    checks.push(stencil_check(&drho));

    let slds = match sld::solve(&rho, drho.partials(), tol) {
        Ok(s) => s,
        Err(e) => {
            checks.push(Check::failed("sld-residual", format!("SLD solve rejected input: {e}")));
            return Ok(None);
        }
    };
    checks.push(Check::measure("sld-residual", slds.max_residual(), tol.sld, Status::Fail));
    checks.push(Check::measure(
        "sld-hermitian",
        slds.max_hermiticity_defect(),
        tol.hermitian,
        Status::Fail,
    ));
    let qfi = qfi_tensor(&rho, &slds)?;
    let scale = max_abs_real(&qfi.metric_part);
    checks.push(Check::measure(
        "qfi-hermitian",
        linalg::hermiticity_defect(&qfi.entries),
        tol.hermitian * scale.max(1.0),
        Status::Fail,
    ));
    checks.push(psd_check("qfi-psd", &qfi.metric_part, scale, tol));
    Ok(Some(DensityStage { rho, drho, slds, qfi }))
}

fn quantum_section(stage: &DensityStage, pure_trace: Option<&QfiTensor>) -> QuantumSection {
    QuantumSection {
        q: ComplexMatrixJson::from(&stage.qfi.entries),
        metric_part: rows(&stage.qfi.metric_part),
        asym_part: rows(&stage.qfi.asym_part),
        sld_residuals: stage.slds.residuals.clone(),
        support_rank: stage.slds.support_rank,
        rho_eigenvalues: stage.slds.eigenvalues.clone(),
        purity_defect: sld::purity_check(&stage.rho),
        pure_trace_metric_part: pure_trace.map(|q| rows(&q.metric_part)),
    }
}

pub fn probability_suite(
    model: &ProbabilityModel,
    theta: &ParameterVector,
    tol: &Tolerances,
    max_dense: usize,
) -> Result<SuiteOutcome> {
    let space = model.space();
    let p = model.density(theta)?;
    let dp = differentiate(model, theta)?;
    let mut checks = Vec::new();

    let negative = p.iter().fold(0.0f64, |acc, v| acc.max(-v));
    checks.push(Check::measure("nonnegativity", negative, 0.0, Status::Fail));
    checks.push(Check::measure(
        "normalization",
        (space.integrate(&p) - 1.0).abs(),
        tol.norm,
        Status::Fail,
    ));
    checks.push(stencil_check(&dp));

    let (scores, mask, boundary) = scores_from(&p, dp.partials(), tol.support);
    let f = fisher_from_scores(space, &p, &scores);
    let means: Vec<f64> = scores.iter().map(|s| space.integrate(&s.component_mul(&p))).collect();
    let worst_mean = means.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let score_violation = match dp.mode() {
        DerivativeMode::Analytic => Status::Fail,
        DerivativeMode::FiniteDifference => Status::Warn,
    };
    checks.push(Check::measure("score-zero-mean", worst_mean, tol.score, score_violation));
    checks.push(boundary_check(boundary));
    checks.push(Check::measure("fisher-symmetric", max_diff_real(&f, &f.transpose()), 0.0, Status::Fail));
    checks.push(psd_check("fisher-psd", &f, max_abs_real(&f), tol));

    let mut quantum = None;
    if space.len() <= max_dense {
        let diag = model.to_diagonal_density();
        let mut sub = Vec::new();
        match density_stage(&diag, theta, tol, &mut sub)? {
            Some(stage) => {
                checks.push(Check::measure(
                    "classical-reduction",
                    max_diff_real(&stage.qfi.metric_part, &f),
                    tol.classical_reduction,
                    Status::Fail,
                ));
                checks.extend(sub.into_iter().filter(|c| c.name == "sld-residual"));
                quantum = Some(quantum_section(&stage, None));
            }
            None => checks.extend(sub.into_iter().filter(|c| c.status == Status::Fail)),
        }
    } else {
        checks.push(Check::not_applicable(
            "classical-reduction",
            format!("{} sample points exceed max_dense_dim = {max_dense}", space.len()),
        ));
    }

    Ok(SuiteOutcome {
        classical: Some(ClassicalSection {
            fisher: rows(&f),
            score_means: means,
            support_size: mask.iter().filter(|b| **b).count(),
        }),
        geometry: None,
        quantum,
        checks,
    })
}

/// Fixed global-phase transformations used by the gauge-invariance check.
pub(crate) fn standard_gauges() -> Vec<Gauge> {
    vec![
        Gauge::new(|t| 0.3 + 0.7 * t.iter().sum::<f64>()).with_gradient(|t| vec![0.7; t.len()]),
        Gauge::new(|t| (t[0] * t[t.len() - 1]).sin() + t[0] * t[0]).with_gradient(|t| {
            let last = t.len() - 1;
            let c = (t[0] * t[last]).cos();
            let mut g = vec![0.0; t.len()];
            g[0] += c * t[last] + 2.0 * t[0];
            g[last] += c * t[0];
            g
        }),
        Gauge::new(|t| t.iter().enumerate().map(|(j, v)| (j as f64 + 1.0) * v).sum::<f64>().cos()),
    ]
}

fn geometry_section(d: &PullbackDecomposition) -> GeometrySection {
    GeometrySection {
        h: ComplexMatrixJson::from(d.h.entries()),
        g: rows(&d.g),
        omega: rows(&d.omega),
        quarter_classical: rows(&d.quarter_classical),
        alpha_covariance: rows(&d.alpha_covariance),
        mean_dalpha: d.mean_dalpha.clone(),
        omega_from_log: rows(&d.omega_from_log),
        dominance_gap: rows(&d.dominance_gap()),
    }
}

pub fn pure_suite(
    model: &PureStateModel,
    theta: &ParameterVector,
    tol: &Tolerances,
    max_dense: usize,
    fault: Option<Fault>,
) -> Result<SuiteOutcome> {
    let space = model.space();
    let psi = model.amplitudes(theta)?;
    let dpsi = differentiate(model, theta)?;
    let mut checks = Vec::new();

    checks.push(Check::measure(
        "normalization",
        (space.inner(&psi, &psi).re - 1.0).abs(),
        tol.norm,
        Status::Fail,
    ));
    checks.push(Check::measure(
        "normalization-differential",
        normalization_differential_from(space, &psi, dpsi.partials()),
        tol.normalization_differential,
        Status::Fail,
    ));
    checks.push(stencil_check(&dpsi));

    let mut d = assemble(space, &psi, dpsi.partials(), dpsi.mode(), tol.support)?;
    if fault == Some(Fault::FlipOmegaSign) {
        d.omega = -d.omega;
        d.symplectic_residual = max_diff_real(&d.omega, &d.omega_from_log);
    }
    checks.push(Check::measure("log-differential-cross", d.log.cross_residual, tol.cross, Status::Fail));
    checks.push(boundary_check(d.log.boundary_derivative));
    checks.push(Check::measure(
        "tensor-hermitian",
        d.h.hermiticity_defect(),
        tol.tensor_hermitian,
        Status::Fail,
    ));
    checks.push(Check::measure("metric-assembly", d.metric_residual, tol.assembly, Status::Fail));
    checks.push(Check::measure("symplectic-assembly", d.symplectic_residual, tol.assembly, Status::Fail));
    let g_scale = max_abs_real(&d.g);
    checks.push(psd_check("metric-psd", &d.g, g_scale, tol));
    checks.push(psd_check("dominance", &d.dominance_gap(), g_scale, tol));

    // Classical Fisher of |ψ|² through its own differentiation path.
    let prob = model.to_probability();
    let p = prob.density(theta)?;
    let dp = differentiate(&prob, theta)?;
    let (scores, mask, _) = scores_from(&p, dp.partials(), tol.support);
    let f = fisher_from_scores(space, &p, &scores);
    let means: Vec<f64> = scores.iter().map(|s| space.integrate(&s.component_mul(&p))).collect();
    let worst_mean = means.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let score_violation = match dp.mode() {
        DerivativeMode::Analytic => Status::Fail,
        DerivativeMode::FiniteDifference => Status::Warn,
    };
    checks.push(Check::measure("score-zero-mean", worst_mean, tol.score, score_violation));

    let max_dalpha = d.log.max_abs_dalpha();
    if max_dalpha <= tol.cross {
        let residual = max_diff_real(&(d.g.clone() * 4.0), &f).max(4.0 * max_abs_real(&d.omega));
        checks.push(Check::measure("classical-recovery", residual, tol.classical_recovery, Status::Fail));
    } else {
        checks.push(Check::not_applicable(
            "classical-recovery",
            format!("phase depends on parameters (max |d alpha| = {max_dalpha:e})"),
        ));
    }

    let h0 = d.h.entries();
    let mut gauge_residual: f64 = 0.0;
    for gauge in standard_gauges() {
        let h1 = hermitian_tensor(&gauge_transform(model, &gauge), theta)?;
        gauge_residual = gauge_residual.max(linalg::max_diff_complex(h0, h1.entries()));
    }
    checks.push(Check::measure("gauge-invariance", gauge_residual, tol.gauge, Status::Fail));

    let mut quantum = None;
    let fast = qfi_pure_fast(model, theta)?;
    if space.len() <= max_dense {
        let dm = model.to_density();
        let mut sub = Vec::new();
        let stage = density_stage(&dm, theta, tol, &mut sub)?;
        checks.extend(
            sub.into_iter()
                .filter(|c| matches!(c.name.as_str(), "rho-hermitian" | "sld-residual" | "sld-hermitian")),
        );
        let purity = sld::purity_check(&dm.matrix(theta)?);
        checks.push(Check::measure("purity", purity, tol.purity, Status::Fail));
        if let Some(stage) = stage {
            let identities = sld::pure_state_identity_residuals(&stage.rho, stage.drho.partials())?;
            let [i, ii, iii] = identities.max();
            checks.push(Check::measure("pure-identity-anticommutator", i, tol.pure_identities, Status::Fail));
            checks.push(Check::measure("pure-identity-trace", ii, tol.pure_identities, Status::Fail));
            checks.push(Check::measure("pure-identity-rho-trace", iii, tol.pure_identities, Status::Fail));
            let trace_route = qfi_pure_trace(&stage.rho, stage.drho.partials())?;
            let four_g = &d.g * 4.0;
            let agreement = pairwise_max(&[
                &stage.qfi.metric_part,
                &trace_route.metric_part,
                &fast.metric_part,
                &four_g,
            ]);
            checks.push(Check::measure("qfi-agreement", agreement, tol.qfi_agreement, Status::Fail));
            quantum = Some(quantum_section(&stage, Some(&trace_route)));
        } else {
            checks.push(Check::failed("qfi-agreement", "density route unavailable"));
        }
    } else {
        checks.push(Check::not_applicable(
            "qfi-agreement",
            format!("{} sample points exceed max_dense_dim = {max_dense}", space.len()),
        ));
    }

    Ok(SuiteOutcome {
        classical: Some(ClassicalSection {
            fisher: rows(&f),
            score_means: means,
            support_size: mask.iter().filter(|b| **b).count(),
        }),
        geometry: Some(geometry_section(&d)),
        quantum,
        checks,
    })
}

pub fn density_suite(model: &DensityModel, theta: &ParameterVector, tol: &Tolerances) -> Result<SuiteOutcome> {
    let mut checks = Vec::new();
    let stage = density_stage(model, theta, tol, &mut checks)?;
    let mut quantum = None;
    if let Some(stage) = stage {
        let purity = sld::purity_check(&stage.rho);
        if purity <= tol.purity {
            let identities = sld::pure_state_identity_residuals(&stage.rho, stage.drho.partials())?;
            checks.push(Check::measure(
                "pure-identities",
                identities.max_all(),
                tol.pure_identities,
                Status::Fail,
            ));
            let trace_route = qfi_pure_trace(&stage.rho, stage.drho.partials())?;
            checks.push(Check::measure(
                "qfi-agreement",
                max_diff_real(&stage.qfi.metric_part, &trace_route.metric_part),
                tol.qfi_agreement,
                Status::Fail,
            ));
            quantum = Some(quantum_section(&stage, Some(&trace_route)));
        } else {
            let note = format!("mixed state (||rho^2 - rho|| = {purity:e})");
            checks.push(Check::not_applicable("pure-identities", note.clone()));
            checks.push(Check::not_applicable("qfi-agreement", note));
            quantum = Some(quantum_section(&stage, None));
        }
    }
    Ok(SuiteOutcome {
        classical: None,
        geometry: None,
        quantum,
        checks,
    })
}
