//! Sample spaces, parameter vectors and admissible parameter domains.

use std::fmt;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{validation, Error, Result};

/// A finite set of sample points with positive quadrature weights.
///
/// Integrals over the sample space are realized as `Σ_i w_i f(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSpace {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl SampleSpace {
    pub fn new(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(validation("sample space needs at least one point"));
        }
        if points.len() != weights.len() {
            return Err(validation(format!(
                "{} sample points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        if let Some(i) = points.iter().position(|x| !x.is_finite()) {
            return Err(validation(format!("sample point {i} is not finite")));
        }
        if let Some(i) = weights.iter().position(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(validation(format!(
                "weight {i} = {} is not a positive finite number",
                weights[i]
            )));
        }
        let mut sorted = points.clone();
        sorted.sort_by(f64::total_cmp);
        if let Some(pair) = sorted.windows(2).find(|p| p[0] == p[1]) {
            return Err(validation(format!("duplicate sample point {}", pair[0])));
        }
        Ok(SampleSpace { points, weights })
    }

    /// Discrete space with unit weights (counting measure).
    pub fn discrete(points: Vec<f64>) -> Result<Self> {
        let weights = vec![1.0; points.len()];
        Self::new(points, weights)
    }

    /// The labels `0, 1, …, n−1` with unit weights.
    pub fn indices(n: usize) -> Result<Self> {
        Self::discrete((0..n).map(|i| i as f64).collect())
    }

    /// Trapezoidal weights on strictly increasing points.
    pub fn trapezoid(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(validation("trapezoidal rule needs at least two points"));
        }
        if points.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(validation("trapezoidal points must be strictly increasing"));
        }
        let n = points.len();
        let weights = (0..n)
            .map(|i| {
                let left = if i > 0 { points[i] - points[i - 1] } else { 0.0 };
                let right = if i + 1 < n { points[i + 1] - points[i] } else { 0.0 };
                0.5 * (left + right)
            })
            .collect();
        Self::new(points, weights)
    }

    /// Uniform grid from `lo` to `hi` (inclusive) with the given step, trapezoidal weights.
    pub fn uniform_grid(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(validation(format!(
                "invalid grid [{lo}, {hi}] with step {step}"
            )));
        }
        let intervals = ((hi - lo) / step).round() as usize;
        let points = (0..=intervals).map(|i| lo + i as f64 * step).collect();
        Self::trapezoid(points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Σ_i w_i f_i`.
    pub fn integrate(&self, f: &DVector<f64>) -> f64 {
        self.weights.iter().zip(f.iter()).map(|(w, v)| w * v).sum()
    }

    /// `⟨a|b⟩ = Σ_i w_i conj(a_i) b_i`.
    pub fn inner(&self, a: &DVector<Complex64>, b: &DVector<Complex64>) -> Complex64 {
        self.weights
            .iter()
            .zip(a.iter().zip(b.iter()))
            .map(|(w, (x, y))| x.conj() * y * *w)
            .sum()
    }

    pub(crate) fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got,
            });
        }
        Ok(())
    }
}

/// Point in an m-dimensional parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector(Vec<f64>);

impl ParameterVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(validation("parameter vector must have at least one entry"));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(validation(format!("parameter {j} is not finite")));
        }
        Ok(ParameterVector(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, j: usize) -> f64 {
        self.0[j]
    }

    /// Copy with `delta` added to component `j`.
    pub fn shifted(&self, j: usize, delta: f64) -> ParameterVector {
        let mut v = self.0.clone();
        v[j] += delta;
        ParameterVector(v)
    }
}

impl From<ParameterVector> for Vec<f64> {
    fn from(p: ParameterVector) -> Self {
        p.0
    }
}

impl std::ops::Index<usize> for ParameterVector {
    type Output = f64;
    fn index(&self, j: usize) -> &f64 {
        &self.0[j]
    }
}

/// Open interval `(lo, hi)` a parameter must lie in; infinite bounds allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn open(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, v: f64) -> bool {
        v > self.lo && v < self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

/// Per-parameter admissible domain of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamDomain(Vec<Interval>);

impl ParamDomain {
    pub fn unbounded(m: usize) -> Self {
        ParamDomain(vec![Interval::REAL_LINE; m])
    }

    pub fn new(intervals: Vec<Interval>) -> Self {
        ParamDomain(intervals)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.0
    }

    pub fn check(&self, model: &str, theta: &ParameterVector) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: theta.len(),
            });
        }
        for (j, (iv, &v)) in self.0.iter().zip(theta.as_slice()).enumerate() {
            if !iv.contains(v) {
                return Err(Error::Domain {
                    model: model.to_string(),
                    param: j,
                    value: v,
                    range: iv.to_string(),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_spaces() {
        assert!(SampleSpace::new(vec![], vec![]).is_err());
        assert!(SampleSpace::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(SampleSpace::new(vec![0.0, 1.0], vec![1.0, 0.0]).is_err());
        assert!(SampleSpace::new(vec![0.0, 1.0], vec![1.0, -2.0]).is_err());
        assert!(SampleSpace::new(vec![1.0, 0.0, 1.0], vec![1.0; 3]).is_err());
        assert!(SampleSpace::new(vec![f64::NAN], vec![1.0]).is_err());
    }

    #[test]
    fn trapezoid_weights_integrate_linear_exactly() {
        let s = SampleSpace::uniform_grid(-1.0, 3.0, 0.5).unwrap();
        assert_eq!(s.len(), 9);
        let total: f64 = s.weights().iter().sum();
        assert!((total - 4.0).abs() < 1e-14);
        let x = DVector::from_column_slice(s.points());
        assert!((s.integrate(&x) - 4.0).abs() < 1e-13);
    }

    #[test]
    fn parameter_vector_rejects_empty_and_nonfinite() {
        assert!(ParameterVector::new(vec![]).is_err());
        assert!(ParameterVector::new(vec![1.0, f64::INFINITY]).is_err());
        let p = ParameterVector::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(p.shifted(1, 0.5).as_slice(), &[1.0, 2.5]);
    }

    #[test]
    fn domain_error_names_parameter() {
        let d = ParamDomain::new(vec![Interval::REAL_LINE, Interval::open(0.0, 1.0)]);
        let err = d
            .check("m", &ParameterVector::new(vec![5.0, 1.0]).unwrap())
            .unwrap_err();
        match err {
            Error::Domain { param, .. } => assert_eq!(param, 1),
            e => panic!("unexpected {e}"),
        }
    }
}
