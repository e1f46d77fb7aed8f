//! Expectations under p and the classical Fisher information matrix
//! `F_jk = E_p[∂_j ln p ∂_k ln p]`.

use crate::error::{Error, Result};
use crate::linalg::symmetrize;
use crate::model::{DerivativeMode, ProbabilityModel, RVector, RealMatrix};
use crate::numdiff::{differentiate, support_mask};
use crate::space::{ParameterVector, SampleSpace};
use crate::tolerance::{Tolerances, BOUNDARY_DERIVATIVE_TOL};

/// `E_p[f] = Σ_i w_i f_i p_i`.
pub fn expectation(space: &SampleSpace, p: &RVector, f: &RVector) -> Result<f64> {
    space.check_len(p.len())?;
    if f.len() != p.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: f.len(),
        });
    }
    Ok(space
        .weights()
        .iter()
        .zip(p.iter().zip(f.iter()))
        .map(|(w, (pi, fi))| w * pi * fi)
        .sum())
}

/// Score vectors `∂_j ln p` on the support of p, with diagnostics.
#[derive(Debug, Clone)]
pub struct ScoreSet {
    pub scores: Vec<RVector>,
    pub density: RVector,
    pub support_mask: Vec<bool>,
    /// max |∂_j p| over masked points; large values mean F may diverge there.
    pub boundary_derivative: f64,
    pub mode: DerivativeMode,
    pub non_smooth_parameters: Vec<usize>,
}

impl ScoreSet {
    /// `E_p[∂_j ln p]` for each j.
    pub fn means(&self, space: &SampleSpace) -> Vec<f64> {
        self.scores
            .iter()
            .map(|s| weighted_sum(space, &self.density, s, None))
            .collect()
    }

    pub fn max_abs_mean(&self, space: &SampleSpace) -> f64 {
        self.means(space).into_iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn boundary_warning(&self) -> bool {
        self.boundary_derivative > BOUNDARY_DERIVATIVE_TOL
    }
}

fn weighted_sum(space: &SampleSpace, p: &RVector, a: &RVector, b: Option<&RVector>) -> f64 {
    let w = space.weights();
    (0..p.len())
        .map(|i| w[i] * p[i] * a[i] * b.map_or(1.0, |b| b[i]))
        .sum()
}

/// Scores `∂_j p / p` from a density and its partials; zero off support.
pub fn scores_from(p: &RVector, dp: &[RVector], supp_tol: f64) -> (Vec<RVector>, Vec<bool>, f64) {
    let mask = support_mask(p, supp_tol);
    let mut boundary: f64 = 0.0;
    let scores = dp
        .iter()
        .map(|d| {
            RVector::from_fn(p.len(), |i, _| {
                if mask[i] {
                    d[i] / p[i]
                } else {
                    boundary = boundary.max(d[i].abs());
                    0.0
                }
            })
        })
        .collect();
    (scores, mask, boundary)
}

pub fn score_functions(model: &ProbabilityModel, theta: &ParameterVector) -> Result<ScoreSet> {
    let p = model.density(theta)?;
    let dp = differentiate(model, theta)?;
    let tol = Tolerances::for_mode(dp.mode());
    let (scores, support_mask, boundary_derivative) = scores_from(&p, dp.partials(), tol.support);
    Ok(ScoreSet {
        scores,
        density: p,
        support_mask,
        boundary_derivative,
        mode: dp.mode(),
        non_smooth_parameters: dp.non_smooth_parameters(),
    })
}

/// `F_jk = Σ_i w_i p_i s_j(x_i) s_k(x_i)`, explicitly symmetrized.
pub fn fisher_from_scores(space: &SampleSpace, p: &RVector, scores: &[RVector]) -> RealMatrix {
    let m = scores.len();
    let f = RealMatrix::from_fn(m, m, |j, k| weighted_sum(space, p, &scores[j], Some(&scores[k])));
    symmetrize(&f)
}

pub fn classical_fisher_matrix(model: &ProbabilityModel, theta: &ParameterVector) -> Result<RealMatrix> {
    let scores = score_functions(model, theta)?;
    Ok(fisher_from_scores(model.space(), &scores.density, &scores.scores))
}
