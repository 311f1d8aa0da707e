//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// `[A^0, A^1, ..., A^max]` by repeated multiplication.
pub fn matrix_powers(a: &Matrix, max: usize) -> Vec<Matrix> {
    let mut out = Vec::with_capacity(max + 1);
    out.push(Matrix::identity(a.nrows(), a.ncols()));
    for i in 0..max {
        let next = &out[i] * a;
        out.push(next);
    }
    out
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_symmetric_eigenvalue(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    symmetrize(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn max_symmetric_eigenvalue(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return f64::NEG_INFINITY;
    }
    symmetrize(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Spectral norm of a symmetric matrix.
pub fn symmetric_norm(m: &Matrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    symmetrize(m)
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues of a general real square matrix as `(re, im)` pairs.
pub fn eigenvalues(m: &Matrix) -> Vec<(f64, f64)> {
    m.complex_eigenvalues()
        .iter()
        .map(|z| (z.re, z.im))
        .collect()
}

pub fn spectral_radius(m: &Matrix) -> f64 {
    eigenvalues(m)
        .into_iter()
        .fold(0.0_f64, |acc, (re, im)| acc.max(re.hypot(im)))
}

/// Solves `P X = B` for symmetric positive-definite `P`.
pub fn spd_solve(p: &Matrix, b: &Matrix) -> Result<Matrix> {
    let chol = Cholesky::new(symmetrize(p))
        .ok_or_else(|| Error::Solver("matrix is not positive definite".into()))?;
    Ok(chol.solve(b))
}

/// Builds a dense matrix from row-major nested rows. Rejects ragged or
/// non-finite input.
pub fn matrix_from_rows(name: &str, rows: &[Vec<f64>]) -> Result<Matrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(Error::Parse(format!(
                "{name}: row {i} has {} entries, expected {ncols}",
                row.len()
            )));
        }
        if let Some(v) = row.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parse(format!("{name}: non-finite entry {v} in row {i}")));
        }
    }
    Ok(Matrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

pub fn vector_from_slice(name: &str, v: &[f64]) -> Result<Vector> {
    if let Some(x) = v.iter().find(|x| !x.is_finite()) {
        return Err(Error::Parse(format!("{name}: non-finite entry {x}")));
    }
    Ok(Vector::from_column_slice(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powers_start_at_identity() {
        let a = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 3.2, -1.4]);
        let p = matrix_powers(&a, 3);
        assert_eq!(p[0], Matrix::identity(2, 2));
        assert_eq!(p[1], a);
        assert_eq!(p[3], &a * &a * &a);
    }

    #[test]
    fn ragged_rows_rejected() {
        let rows = vec![vec![1.0, 2.0], vec![3.0]];
        assert!(matrix_from_rows("A", &rows).is_err());
        let rows = vec![vec![1.0, f64::NAN]];
        assert!(matrix_from_rows("A", &rows).is_err());
    }

    #[test]
    fn eigenvalues_of_rotation_are_complex() {
        let m = Matrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let ev = eigenvalues(&m);
        assert_eq!(ev.len(), 2);
        for (re, im) in ev {
            assert!(re.abs() < 1e-12);
            assert!((im.abs() - 1.0).abs() < 1e-12);
        }
        assert!((spectral_radius(&m) - 1.0).abs() < 1e-12);
    }
}
