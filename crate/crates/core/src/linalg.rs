//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::model::{CMatrix, RealMatrix};

pub fn max_abs_real(m: &RealMatrix) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_complex(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.norm()))
}

/// `‖A − B‖_max` for real matrices; infinite on shape mismatch.
pub fn max_diff_real(a: &RealMatrix, b: &RealMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

pub fn max_diff_complex(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `‖A − A†‖_max`.
pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    max_diff_complex(a, &a.adjoint())
}

pub fn trace(a: &CMatrix) -> Complex64 {
    a.diagonal().iter().sum()
}

/// `(A + A†)/2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// `(A + Aᵀ)/2`.
pub fn symmetrize(a: &RealMatrix) -> RealMatrix {
    (a + a.transpose()) * 0.5
}

/// Smallest eigenvalue of the symmetric part of a real square matrix.
pub fn min_eigenvalue_sym(a: &RealMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    SymmetricEigen::new(symmetrize(a))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Eigenvalues of the Hermitian part of a complex square matrix.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    SymmetricEigen::new(hermitian_part(a))
        .eigenvalues
        .iter()
        .copied()
        .collect()
}

pub fn real_part(a: &CMatrix) -> RealMatrix {
    a.map(|z| z.re)
}

pub fn imag_part(a: &CMatrix) -> RealMatrix {
    a.map(|z| z.im)
}

pub fn to_complex(a: &RealMatrix) -> CMatrix {
    a.map(|v| Complex64::new(v, 0.0))
}

/// Row-major nested rows, the layout used in reports and spec files.
pub fn rows_real(a: &RealMatrix) -> Vec<Vec<f64>> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect())
        .collect()
}

pub fn from_rows_real(rows: &[Vec<f64>]) -> Option<RealMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return None;
    }
    Some(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_eigenvalue_of_indefinite_matrix() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!((min_eigenvalue_sym(&a) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn hermitian_eigenvalues_of_pauli_y() {
        let i = Complex64::i();
        let y = DMatrix::from_row_slice(2, 2, &[Complex64::ZERO, -i, i, Complex64::ZERO]);
        let mut ev = hermitian_eigenvalues(&y);
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12);
        assert_eq!(hermiticity_defect(&y), 0.0);
    }

    #[test]
    fn row_layout_roundtrip() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let rows = rows_real(&a);
        assert_eq!(rows[0], vec![1.0, 2.0, 3.0]);
        assert_eq!(from_rows_real(&rows).unwrap(), a);
        assert!(from_rows_real(&[vec![1.0], vec![1.0, 2.0]]).is_none());
    }
}
