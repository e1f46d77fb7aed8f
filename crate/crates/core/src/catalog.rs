//! Built-in model fixtures with known closed forms, plus seeded random
//! generators used by the property sweeps.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{validation, Result};
use crate::model::{
    CMatrix, CVector, DensityModel, Parametric, ProbabilityModel, PureStateModel, RVector,
};
use crate::space::{Interval, ParamDomain, SampleSpace};

/// Normalization tolerance applied to user-tabulated inputs.
const TABULATED_NORM_TOL: f64 = 1e-8;

/// `(name, description)` of every catalog entry.
pub const CATALOG: &[(&str, &str)] = &[
    ("bernoulli", "p(0)=1-t, p(1)=t on X={0,1}; t in (0,1)"),
    ("qubit", "psi=(cos(t/2), sin(t/2) e^{i phi}); parameters (t, phi)"),
    (
        "phase_encoding",
        "psi=sqrt(p) e^{i alpha(x) phi} with fixed p; one parameter phi",
    ),
    (
        "gaussian_grid",
        "Gaussian with unknown mean, renormalized on a trapezoidal grid",
    ),
    (
        "random_pure",
        "seeded complex state rotated by m random unitary one-parameter groups",
    ),
    (
        "random_real",
        "seeded real nonnegative state sqrt(softmax(A t + b))",
    ),
    ("random_probability", "seeded softmax(A t + b) on n points"),
    (
        "random_density",
        "seeded full-rank U(t) diag(softmax(A t + b)) U(t)^dagger",
    ),
];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Bernoulli distribution on {0, 1}, admissible for θ ∈ (0, 1).
pub fn bernoulli() -> ProbabilityModel {
    let space = SampleSpace::discrete(vec![0.0, 1.0]).expect("static space");
    let map = Parametric::new(
        "bernoulli",
        ParamDomain::new(vec![Interval::open(0.0, 1.0)]),
        |t: &[f64]| Ok(RVector::from_vec(vec![1.0 - t[0], t[0]])),
    )
    .with_partials(|_t: &[f64]| Ok(vec![RVector::from_vec(vec![-1.0, 1.0])]));
    ProbabilityModel::new(space, map)
}

/// Spin-½ coherent state with polar angle θ and azimuth φ.
pub fn qubit() -> PureStateModel {
    let space = SampleSpace::discrete(vec![0.0, 1.0]).expect("static space");
    let map = Parametric::new("qubit", ParamDomain::unbounded(2), |t: &[f64]| {
        let (s, co) = (t[0] / 2.0).sin_cos();
        let e = Complex64::from_polar(1.0, t[1]);
        Ok(CVector::from_vec(vec![c(co, 0.0), e * s]))
    })
    .with_partials(|t: &[f64]| {
        let (s, co) = (t[0] / 2.0).sin_cos();
        let e = Complex64::from_polar(1.0, t[1]);
        Ok(vec![
            CVector::from_vec(vec![c(-s / 2.0, 0.0), e * (co / 2.0)]),
            CVector::from_vec(vec![Complex64::ZERO, Complex64::i() * e * s]),
        ])
    });
    PureStateModel::new(space, map)
}

/// ψ(x;φ) = p(x)^{1/2} e^{iα(x)φ}: the modulus carries no information on φ.
pub fn phase_encoding(
    space: SampleSpace,
    base_density: Vec<f64>,
    alphas: Vec<f64>,
) -> Result<PureStateModel> {
    space.check_len(base_density.len())?;
    space.check_len(alphas.len())?;
    if let Some(i) = base_density.iter().position(|p| !(*p >= 0.0 && p.is_finite())) {
        return Err(validation(format!("base density entry {i} is negative or not finite")));
    }
    if alphas.iter().any(|a| !a.is_finite()) {
        return Err(validation("alphas must be finite"));
    }
    let total = space.integrate(&RVector::from_column_slice(&base_density));
    if (total - 1.0).abs() > TABULATED_NORM_TOL {
        return Err(validation(format!(
            "base density integrates to {total}, expected 1"
        )));
    }
    let amp: Vec<f64> = base_density.iter().map(|p| p.sqrt()).collect();
    let (amp2, alphas2) = (amp.clone(), alphas.clone());
    let map = Parametric::new("phase_encoding", ParamDomain::unbounded(1), move |t: &[f64]| {
        Ok(CVector::from_iterator(
            amp.len(),
            amp.iter()
                .zip(&alphas)
                .map(|(r, a)| Complex64::from_polar(*r, a * t[0])),
        ))
    })
    .with_partials(move |t: &[f64]| {
        Ok(vec![CVector::from_iterator(
            amp2.len(),
            amp2.iter()
                .zip(&alphas2)
                .map(|(r, a)| Complex64::i() * *a * Complex64::from_polar(*r, a * t[0])),
        )])
    });
    Ok(PureStateModel::new(space, map))
}

/// Gaussian location family on a grid, renormalized so Σ w p = 1 exactly.
///
/// The mean must stay strictly inside the grid.
pub fn gaussian_grid(sigma: f64, grid: SampleSpace) -> Result<ProbabilityModel> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(validation(format!("sigma must be positive, got {sigma}")));
    }
    let lo = grid.points().iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grid.points().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let x = RVector::from_column_slice(grid.points());
    let w = RVector::from_column_slice(grid.weights());
    let var = sigma * sigma;
    let density = move |mu: f64| -> (RVector, RVector) {
        let u = x.map(|xi| (-(xi - mu) * (xi - mu) / (2.0 * var)).exp());
        let z = u.dot(&w);
        let score = x.map(|xi| (xi - mu) / var);
        (u / z, score)
    };
    let density2 = density.clone();
    let w2 = RVector::from_column_slice(grid.weights());
    let map = Parametric::new(
        "gaussian_grid",
        ParamDomain::new(vec![Interval::open(lo, hi)]),
        move |t: &[f64]| Ok(density(t[0]).0),
    )
    .with_partials(move |t: &[f64]| {
        let (p, s) = density2(t[0]);
        let mean = p.component_mul(&w2).dot(&s);
        Ok(vec![p.zip_map(&s, |pi, si| pi * (si - mean))])
    });
    Ok(ProbabilityModel::new(grid, map))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn check_dims(n: usize, m: usize) -> Result<()> {
    if n < 2 || m < 1 {
        return Err(validation(format!(
            "random models need n >= 2 and m >= 1 (got n={n}, m={m})"
        )));
    }
    Ok(())
}

/// Product of one-parameter unitary groups `U(θ) = U_m(θ_m)…U_1(θ_1)`,
/// `U_j(t) = exp(−i t K_j)` with random Hermitian generators.
#[derive(Debug, Clone)]
struct RotationStack {
    /// Eigenvectors and eigenvalues of each generator.
    factors: Vec<(CMatrix, RVector)>,
}

impl RotationStack {
    fn random(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Self {
        let scale = 1.0 / (2.0 * (n as f64).sqrt());
        let factors = (0..m)
            .map(|_| {
                let a = CMatrix::from_fn(n, n, |_, _| c(normal(rng), normal(rng)));
                let k = (&a + a.adjoint()).scale(scale);
                let eig = SymmetricEigen::new(k);
                (eig.eigenvectors, eig.eigenvalues)
            })
            .collect();
        RotationStack { factors }
    }

    fn factor(&self, j: usize, t: f64) -> CMatrix {
        let (v, d) = &self.factors[j];
        let phases = d.map(|dk| Complex64::from_polar(1.0, -t * dk));
        v * CMatrix::from_diagonal(&phases) * v.adjoint()
    }

    /// `−i K_j U_j(t)`.
    fn factor_derivative(&self, j: usize, t: f64) -> CMatrix {
        let (v, d) = &self.factors[j];
        let phases = d.map(|dk| Complex64::from_polar(1.0, -t * dk) * c(0.0, -dk));
        v * CMatrix::from_diagonal(&phases) * v.adjoint()
    }

    fn unitary(&self, t: &[f64]) -> CMatrix {
        let n = self.factors[0].0.nrows();
        t.iter()
            .enumerate()
            .fold(CMatrix::identity(n, n), |acc, (j, tj)| self.factor(j, *tj) * acc)
    }

    fn unitary_partials(&self, t: &[f64]) -> Vec<CMatrix> {
        let n = self.factors[0].0.nrows();
        let factors: Vec<CMatrix> = t.iter().enumerate().map(|(j, tj)| self.factor(j, *tj)).collect();
        (0..t.len())
            .map(|j| {
                let mut acc = CMatrix::identity(n, n);
                for (k, f) in factors.iter().enumerate() {
                    acc = if k == j {
                        self.factor_derivative(j, t[j]) * acc
                    } else {
                        f * acc
                    };
                }
                acc
            })
            .collect()
    }
}

/// Softmax family `p(θ) = softmax(Aθ + b)` on `n` unit-weight points.
#[derive(Debug, Clone)]
struct Softmax {
    a: nalgebra::DMatrix<f64>,
    b: RVector,
}

impl Softmax {
    fn random(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Self {
        let a = nalgebra::DMatrix::from_fn(n, m, |_, _| normal(rng));
        let b = RVector::from_fn(n, |_, _| normal(rng));
        Softmax { a, b }
    }

    fn density(&self, t: &[f64]) -> RVector {
        let logits = &self.a * RVector::from_column_slice(t) + &self.b;
        let max = logits.max();
        let u = logits.map(|l| (l - max).exp());
        let z = u.sum();
        u / z
    }

    /// Score vectors `∂_j ln p = A_{·j} − E_p[A_{·j}]`.
    fn scores(&self, p: &RVector) -> Vec<RVector> {
        (0..self.a.ncols())
            .map(|j| {
                let col = self.a.column(j).into_owned();
                let mean = col.dot(p);
                col.map(|v| v - mean)
            })
            .collect()
    }
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> CVector {
    let v = CVector::from_fn(n, |_, _| c(normal(rng), normal(rng)));
    let norm = v.norm();
    v / c(norm, 0.0)
}

/// Random smooth pure-state model `ψ(θ) = U(θ) ψ_0`, deterministic per seed.
pub fn random_pure(n: usize, m: usize, seed: u64) -> Result<PureStateModel> {
    check_dims(n, m)?;
    let mut r = rng(seed);
    let psi0 = random_state(n, &mut r);
    let stack = RotationStack::random(n, m, &mut r);
    let (psi0b, stack_b) = (psi0.clone(), stack.clone());
    let map = Parametric::new(
        format!("random_pure(n={n},m={m},seed={seed})"),
        ParamDomain::unbounded(m),
        move |t: &[f64]| Ok(stack.unitary(t) * &psi0),
    )
    .with_partials(move |t: &[f64]| {
        Ok(stack_b
            .unitary_partials(t)
            .iter()
            .map(|du| du * &psi0b)
            .collect())
    });
    Ok(PureStateModel::new(SampleSpace::indices(n)?, map))
}

/// Random real nonnegative pure-state model `ψ = softmax(Aθ + b)^{1/2}` (dα = 0).
pub fn random_real(n: usize, m: usize, seed: u64) -> Result<PureStateModel> {
    check_dims(n, m)?;
    let mut r = rng(seed);
    let sm = Softmax::random(n, m, &mut r);
    let sm2 = sm.clone();
    let map = Parametric::new(
        format!("random_real(n={n},m={m},seed={seed})"),
        ParamDomain::unbounded(m),
        move |t: &[f64]| Ok(sm.density(t).map(|p| c(p.sqrt(), 0.0))),
    )
    .with_partials(move |t: &[f64]| {
        let p = sm2.density(t);
        let psi = p.map(f64::sqrt);
        Ok(sm2
            .scores(&p)
            .iter()
            .map(|s| psi.zip_map(s, |a, sj| c(0.5 * a * sj, 0.0)))
            .collect())
    });
    Ok(PureStateModel::new(SampleSpace::indices(n)?, map))
}

/// Random strictly positive probability model on `n` points.
pub fn random_probability(n: usize, m: usize, seed: u64) -> Result<ProbabilityModel> {
    check_dims(n, m)?;
    let mut r = rng(seed);
    let sm = Softmax::random(n, m, &mut r);
    let sm2 = sm.clone();
    let map = Parametric::new(
        format!("random_probability(n={n},m={m},seed={seed})"),
        ParamDomain::unbounded(m),
        move |t: &[f64]| Ok(sm.density(t)),
    )
    .with_partials(move |t: &[f64]| {
        let p = sm2.density(t);
        Ok(sm2.scores(&p).iter().map(|s| p.component_mul(s)).collect())
    });
    Ok(ProbabilityModel::new(SampleSpace::indices(n)?, map))
}

/// Random full-rank density model `ρ(θ) = U(θ) Λ(θ) U(θ)†`.
pub fn random_density(n: usize, m: usize, seed: u64) -> Result<DensityModel> {
    check_dims(n, m)?;
    let mut r = rng(seed);
    let sm = Softmax::random(n, m, &mut r);
    let stack = RotationStack::random(n, m, &mut r);
    let (sm2, stack2) = (sm.clone(), stack.clone());
    let lambda = |p: &RVector| CMatrix::from_diagonal(&p.map(|v| c(v, 0.0)));
    let map = Parametric::new(
        format!("random_density(n={n},m={m},seed={seed})"),
        ParamDomain::unbounded(m),
        move |t: &[f64]| {
            let u = stack.unitary(t);
            Ok(&u * lambda(&sm.density(t)) * u.adjoint())
        },
    )
    .with_partials(move |t: &[f64]| {
        let u = stack2.unitary(t);
        let p = sm2.density(t);
        let l = lambda(&p);
        let du = stack2.unitary_partials(t);
        Ok(sm2
            .scores(&p)
            .iter()
            .zip(&du)
            .map(|(s, duj)| {
                let dl = lambda(&p.component_mul(s));
                let left = duj * &l * u.adjoint();
                &left + left.adjoint() + &u * dl * u.adjoint()
            })
            .collect())
    });
    Ok(DensityModel::new(n, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Model, ModelValue};
    use crate::space::ParameterVector;

    fn theta(v: &[f64]) -> ParameterVector {
        ParameterVector::new(v.to_vec()).unwrap()
    }

    fn random_theta(m: usize, r: &mut ChaCha8Rng) -> ParameterVector {
        theta(&(0..m).map(|_| r.random_range(-3.0..3.0)).collect::<Vec<_>>())
    }

    #[test]
    fn bernoulli_values() {
        let b = bernoulli();
        assert_eq!(b.density(&theta(&[0.5])).unwrap().as_slice(), &[0.5, 0.5]);
        let p = b.density(&theta(&[0.3])).unwrap();
        assert!((p[0] - 0.7).abs() < 1e-15 && p[1] == 0.3);
        assert!(b.density(&theta(&[1.0])).is_err());
        for t in [0.01, 0.3, 0.77, 0.999] {
            assert!((b.density(&theta(&[t])).unwrap().sum() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn qubit_values() {
        let q = qubit();
        let psi = q.amplitudes(&theta(&[0.0, 0.0])).unwrap();
        assert_eq!(psi[0], c(1.0, 0.0));
        assert!(psi[1].norm() < 1e-16);
        let psi = q.amplitudes(&theta(&[std::f64::consts::FRAC_PI_2, 0.0])).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((psi[0] - c(h, 0.0)).norm() < 1e-15 && (psi[1] - c(h, 0.0)).norm() < 1e-15);
        let mut r = rng(3);
        for _ in 0..100 {
            let t = random_theta(2, &mut r);
            assert!((q.norm_squared(&t).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn phase_encoding_keeps_modulus() {
        let space = SampleSpace::discrete(vec![-1.0, 0.0, 1.0]).unwrap();
        let m = phase_encoding(space.clone(), vec![0.25, 0.5, 0.25], vec![-1.0, 0.0, 1.0]).unwrap();
        for phi in [-2.0, 0.0, 0.7, 5.0] {
            let psi = m.amplitudes(&theta(&[phi])).unwrap();
            let p: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
            for (a, b) in p.iter().zip([0.25, 0.5, 0.25]) {
                assert!((a - b).abs() < 1e-15);
            }
        }
        assert!(phase_encoding(space.clone(), vec![0.5, 0.5, 0.25], vec![0.0; 3]).is_err());
        assert!(phase_encoding(space.clone(), vec![1.5, -0.5, 0.0], vec![0.0; 3]).is_err());
        assert!(phase_encoding(space, vec![0.5, 0.5], vec![0.0; 3]).is_err());
    }

    #[test]
    fn gaussian_is_renormalized() {
        let grid = SampleSpace::uniform_grid(-8.0, 8.0, 0.01).unwrap();
        let g = gaussian_grid(1.0, grid.clone()).unwrap();
        for mu in [0.0, 0.3, -1.2] {
            let p = g.density(&theta(&[mu])).unwrap();
            assert!((grid.integrate(&p) - 1.0).abs() < 1e-14);
        }
        assert!(gaussian_grid(0.0, grid.clone()).is_err());
        assert!(gaussian_grid(-1.0, grid).is_err());
    }

    #[test]
    fn random_pure_is_normalized_and_deterministic() {
        let a = random_pure(6, 3, 11).unwrap();
        let b = random_pure(6, 3, 11).unwrap();
        let other = random_pure(6, 3, 12).unwrap();
        let mut r = rng(99);
        for _ in 0..100 {
            let t = random_theta(3, &mut r);
            assert!((a.norm_squared(&t).unwrap() - 1.0).abs() < 1e-10);
        }
        let t = theta(&[0.3, -0.2, 1.1]);
        let (va, vb, vo) = (
            a.amplitudes(&t).unwrap(),
            b.amplitudes(&t).unwrap(),
            other.amplitudes(&t).unwrap(),
        );
        assert_eq!(va, vb);
        assert!(va.max_abs_diff(&vo) > 1e-3);
        assert!(random_pure(1, 1, 0).is_err());
        assert!(random_pure(3, 0, 0).is_err());
    }

    #[test]
    fn random_density_satisfies_invariants() {
        let d = random_density(5, 2, 4).unwrap();
        let mut r = rng(5);
        for _ in 0..100 {
            let t = random_theta(2, &mut r);
            let rho = d.value(&t).unwrap();
            crate::model::validate_density(&rho, 1e-12, 1e-12, 1e-12).unwrap();
        }
    }

    #[test]
    fn pure_to_probability_is_valid() {
        let mut r = rng(8);
        for seed in 0..20 {
            let m = random_pure(4, 2, seed).unwrap().to_probability();
            let t = random_theta(2, &mut r);
            m.validate_at(&t, 1e-10).unwrap();
        }
    }

    #[test]
    fn catalog_lists_unique_names() {
        let mut names: Vec<_> = CATALOG.iter().map(|(n, _)| *n).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), CATALOG.len());
    }
}
