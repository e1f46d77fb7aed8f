//! Randomized self-verification: run the full check suites on freshly drawn
//! models and tally the outcomes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog;
use crate::error::{validation, Result};
use crate::model::Model;
use crate::space::ParameterVector;
use crate::tolerance::Tolerances;

use super::{density_suite, probability_suite, pure_suite, Fault, Status, Summary, DEFAULT_MAX_DENSE_DIM};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyFailure {
    pub iteration: usize,
    pub model: String,
    pub theta: Vec<f64>,
    pub check: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub seed: u64,
    pub count: usize,
    pub models_checked: usize,
    /// Warnings and failures, in the order encountered.
    pub findings: Vec<VerifyFailure>,
    pub summary: Summary,
}

impl VerifySummary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

fn draw_theta(rng: &mut ChaCha8Rng, m: usize) -> Result<ParameterVector> {
    ParameterVector::new((0..m).map(|_| rng.random_range(-2.0..2.0)).collect())
}

/// Run `count` rounds; each round draws one model of every random family.
pub fn verify_suite(seed: u64, count: usize, fault: Option<Fault>) -> Result<VerifySummary> {
    if count == 0 {
        return Err(validation("verify count must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut statuses = Vec::new();
    let mut findings = Vec::new();
    let mut models_checked = 0;

    for iteration in 0..count {
        let n = rng.random_range(2..=6usize);
        let m = rng.random_range(2..=3usize);
        let model_seed: u64 = rng.random();
        let theta = draw_theta(&mut rng, m)?;

        let mut outcomes = Vec::new();
        let pure = catalog::random_pure(n, m, model_seed)?;
        let pure_fd = pure.clone().finite_difference();
        let real = catalog::random_real(n, m, model_seed)?;
        for model in [pure, pure_fd, real] {
            let tol = Tolerances::for_mode(model.derivative_mode());
            let label = format!("{} ({})", model.name(), model.derivative_mode());
            outcomes.push((label, pure_suite(&model, &theta, &tol, DEFAULT_MAX_DENSE_DIM, fault)?));
        }
        let prob = catalog::random_probability(n, m, model_seed)?;
        let tol = Tolerances::for_mode(prob.derivative_mode());
        outcomes.push((prob.name().to_string(), probability_suite(&prob, &theta, &tol, DEFAULT_MAX_DENSE_DIM)?));
        let dens = catalog::random_density(n, m, model_seed)?;
        let tol = Tolerances::for_mode(dens.derivative_mode());
        outcomes.push((dens.name().to_string(), density_suite(&dens, &theta, &tol)?));

        for (label, outcome) in outcomes {
            models_checked += 1;
            for c in outcome.checks {
                statuses.push(c.status);
                if matches!(c.status, Status::Warn | Status::Fail) {
                    findings.push(VerifyFailure {
                        iteration,
                        model: label.clone(),
                        theta: theta.as_slice().to_vec(),
                        check: c.name,
                        status: c.status,
                        residual: c.residual,
                        tolerance: c.tolerance,
                        note: c.note,
                    });
                }
            }
        }
    }

    Ok(VerifySummary {
        seed,
        count,
        models_checked,
        findings,
        summary: Summary::from_statuses(statuses.iter()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_count_rejected() {
        assert!(verify_suite(1, 0, None).is_err());
    }

    #[test]
    fn clean_run_passes_and_is_deterministic() {
        let a = verify_suite(7, 3, None).unwrap();
        assert_eq!(a.summary.fail, 0, "{:#?}", a.findings);
        assert_eq!(a.models_checked, 15);
        let b = verify_suite(7, 3, None).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn flipped_omega_is_caught() {
        let s = verify_suite(7, 2, Some(Fault::FlipOmegaSign)).unwrap();
        assert!(s.findings.iter().any(|f| f.check == "symplectic-assembly"));
        assert_eq!(s.summary.status, Status::Fail);
    }
}
