//! Symmetric logarithmic derivatives and the quantum Fisher information.
//!
//! The SLD `L_j` solves `∂_jρ = ½(ρ L_j + L_j ρ)`. In the eigenbasis
//! `ρ = Σ λ_a |a⟩⟨a|` the solution is `(L_j)_ab = 2(∂_jρ)_ab / (λ_a + λ_b)`.
//! Where `λ_a + λ_b` falls below the rank cut the equation leaves L
//! undetermined and those components are set to zero.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::error::{validation, Error, Result};
use crate::geometry::hermitian_tensor_from;
use crate::linalg::{self, hermitian_part, max_abs_complex};
use crate::model::{validate_density, CMatrix, PureStateModel, RealMatrix};
use crate::numdiff::differentiate;
use crate::space::ParameterVector;
use crate::tolerance::Tolerances;

/// One SLD per parameter, solved against a shared eigendecomposition of ρ.
#[derive(Debug, Clone)]
pub struct SldSet {
    pub matrices: Vec<CMatrix>,
    /// Number of eigenvalues of ρ above the rank cut.
    pub support_rank: usize,
    /// `‖½(ρL_j + L_jρ) − ∂_jρ‖_max` on the support block, per parameter.
    pub residuals: Vec<f64>,
    /// Eigenvalues of ρ in ascending order.
    pub eigenvalues: Vec<f64>,
}

impl SldSet {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_hermiticity_defect(&self) -> f64 {
        self.matrices
            .iter()
            .map(linalg::hermiticity_defect)
            .fold(0.0, f64::max)
    }
}

/// `Q_jk = Tr[ρ L_j L_k]`, split into its symmetric real and antisymmetric imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct QfiTensor {
    pub entries: CMatrix,
    /// Re Q, the quantum Fisher information matrix.
    pub metric_part: RealMatrix,
    /// Im Q.
    pub asym_part: RealMatrix,
}

impl QfiTensor {
    pub fn from_entries(entries: CMatrix) -> Self {
        let herm = hermitian_part(&entries);
        let metric_part = linalg::real_part(&herm);
        let asym_part = linalg::imag_part(&herm);
        QfiTensor {
            entries,
            metric_part,
            asym_part,
        }
    }
}

fn check_square_family(rho: &CMatrix, drho: &[CMatrix]) -> Result<usize> {
    if !rho.is_square() {
        return Err(validation(format!("rho is {}x{}", rho.nrows(), rho.ncols())));
    }
    let n = rho.nrows();
    for d in drho {
        if d.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: d.nrows().max(d.ncols()),
            });
        }
    }
    Ok(n)
}

/// Solve for the SLDs and report residuals without judging them.
pub fn solve(rho: &CMatrix, drho: &[CMatrix], tol: &Tolerances) -> Result<SldSet> {
    check_square_family(rho, drho)?;
    validate_density(rho, tol.hermitian, tol.norm, tol.psd)?;
    for (j, d) in drho.iter().enumerate() {
        let defect = linalg::hermiticity_defect(d);
        if defect > tol.hermitian {
            return Err(validation(format!(
                "d_{j} rho is not Hermitian (defect {defect:e})"
            )));
        }
        let tr = linalg::trace(d).norm();
        if tr > tol.trace {
            return Err(validation(format!("d_{j} rho is not traceless (|Tr| = {tr:e})")));
        }
    }

    let eig = SymmetricEigen::new(hermitian_part(rho));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
    let lambda: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let v = CMatrix::from_fn(rho.nrows(), rho.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    let vh = v.adjoint();
    let n = lambda.len();
    let lambda_max = lambda.last().copied().unwrap_or(0.0).max(0.0);
    let cut = tol.rank_cut * lambda_max;
    let support_rank = lambda.iter().filter(|l| **l > cut).count();
    let on_support = |a: usize, b: usize| lambda[a] + lambda[b] > cut;

    let mut matrices = Vec::with_capacity(drho.len());
    let mut residuals = Vec::with_capacity(drho.len());
    for d in drho {
        let d_eig = &vh * d * &v;
        let l_eig = CMatrix::from_fn(n, n, |a, b| {
            if on_support(a, b) {
                d_eig[(a, b)] * (2.0 / (lambda[a] + lambda[b]))
            } else {
                Complex64::ZERO
            }
        });
        let l = hermitian_part(&(&v * l_eig * &vh));
        let r = (rho * &l + &l * rho).scale(0.5) - hermitian_part(d);
        let r_eig = &vh * r * &v;
        let residual = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|&(a, b)| on_support(a, b))
            .map(|(a, b)| r_eig[(a, b)].norm())
            .fold(0.0, f64::max);
        matrices.push(l);
        residuals.push(residual);
    }
    Ok(SldSet {
        matrices,
        support_rank,
        residuals,
        eigenvalues: lambda,
    })
}

/// Solve for the SLDs; a support-block residual above `tol.sld` is a solver failure.
pub fn sld_solve_with(rho: &CMatrix, drho: &[CMatrix], tol: &Tolerances) -> Result<SldSet> {
    let set = solve(rho, drho, tol)?;
    if let Some((j, r)) = set
        .residuals
        .iter()
        .enumerate()
        .find(|(_, r)| **r > tol.sld)
    {
        return Err(Error::SolverFailure {
            param: j,
            residual: *r,
            tolerance: tol.sld,
        });
    }
    Ok(set)
}

pub fn sld_solve(rho: &CMatrix, drho: &[CMatrix]) -> Result<SldSet> {
    sld_solve_with(rho, drho, &Tolerances::analytic())
}

/// `Q_jk = Tr[ρ L_j L_k]`.
pub fn qfi_tensor(rho: &CMatrix, slds: &SldSet) -> Result<QfiTensor> {
    check_square_family(rho, &slds.matrices)?;
    let rho_l: Vec<CMatrix> = slds.matrices.iter().map(|l| rho * l).collect();
    Ok(QfiTensor::from_entries(trace_products(&rho_l, &slds.matrices, 1.0)))
}

/// `scale · Tr[A_j B_k]` for all j, k.
fn trace_products(a: &[CMatrix], b: &[CMatrix], scale: f64) -> CMatrix {
    let m = a.len();
    CMatrix::from_fn(m, m, |j, k| {
        let t: Complex64 = a[j].iter().zip(b[k].transpose().iter()).map(|(x, y)| x * y).sum();
        t * scale
    })
}

/// `4·Tr[ρ ∂_jρ ∂_kρ]`, the pure-state shortcut on a materialized ρ.
pub fn qfi_pure_trace(rho: &CMatrix, drho: &[CMatrix]) -> Result<QfiTensor> {
    check_square_family(rho, drho)?;
    let rho_d: Vec<CMatrix> = drho.iter().map(|d| rho * d).collect();
    Ok(QfiTensor::from_entries(trace_products(&rho_d, drho, 4.0)))
}

/// `Q = 4H` straight from the state vector, without forming ρ.
pub fn qfi_pure_fast(model: &PureStateModel, theta: &ParameterVector) -> Result<QfiTensor> {
    let psi = model.amplitudes(theta)?;
    let dpsi = differentiate(model, theta)?;
    let h = hermitian_tensor_from(model.space(), &psi, dpsi.partials())?;
    Ok(QfiTensor::from_entries(h.entries().scale(4.0)))
}

/// `‖ρ² − ρ‖_max`.
pub fn purity_check(rho: &CMatrix) -> f64 {
    max_abs_complex(&(rho * rho - rho))
}

/// Residuals of `ρdρ + dρρ = dρ`, `Tr dρ = 0` and `Tr(ρ dρ) = 0`, per parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct PureStateResiduals {
    pub per_parameter: Vec<[f64; 3]>,
}

impl PureStateResiduals {
    /// Maximum of each identity over parameters.
    pub fn max(&self) -> [f64; 3] {
        self.per_parameter.iter().fold([0.0; 3], |acc, r| {
            [acc[0].max(r[0]), acc[1].max(r[1]), acc[2].max(r[2])]
        })
    }

    pub fn max_all(&self) -> f64 {
        self.max().into_iter().fold(0.0, f64::max)
    }
}

/// The three identity residuals without checking purity first.
pub fn pure_state_identity_residuals(rho: &CMatrix, drho: &[CMatrix]) -> Result<PureStateResiduals> {
    check_square_family(rho, drho)?;
    let per_parameter = drho
        .iter()
        .map(|d| {
            let rd = rho * d;
            let anti = &rd + d * rho - d;
            [
                max_abs_complex(&anti),
                linalg::trace(d).norm(),
                linalg::trace(&rd).norm(),
            ]
        })
        .collect();
    Ok(PureStateResiduals { per_parameter })
}

/// Identity residuals for a pure ρ; mixed input is a precondition error.
pub fn pure_state_identities(
    rho: &CMatrix,
    drho: &[CMatrix],
    purity_tol: f64,
) -> Result<PureStateResiduals> {
    check_square_family(rho, drho)?;
    let purity = purity_check(rho);
    if purity > purity_tol {
        return Err(Error::Precondition(format!(
            "state is not pure: ||rho^2 - rho|| = {purity:e}"
        )));
    }
    pure_state_identity_residuals(rho, drho)
}
