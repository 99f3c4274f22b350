//! Dense linear algebra: numerical rank, null-space bases and orthogonal projectors.
//!
//! Everything rank-related goes through [`RowSpaceQr`], so `rank`,
//! `null_basis` and `row_space_projector` always agree with each other at a
//! given tolerance (rank + nullity = cols exactly).

mod basis;
mod dense;
mod qr;

pub use basis::OrthonormalBasis;
pub use dense::{Matrix, Vector};
pub use qr::RowSpaceQr;

pub(crate) use dense::{axpy, dot};

use crate::error::{check_dim, Result};
use crate::scalar::Scalar;

/// `max(rows, cols) · ε · (largest column norm)`.
pub fn default_tolerance<T: Scalar>(m: &Matrix<T>) -> T {
    let size = T::from_usize(m.rows().max(m.cols())).unwrap_or_else(T::one);
    size * T::epsilon() * m.max_column_norm()
}

fn factor<T: Scalar>(m: &Matrix<T>, tol: Option<T>) -> Result<RowSpaceQr<T>> {
    let tol = tol.unwrap_or_else(|| default_tolerance(m));
    RowSpaceQr::new(m, tol)
}

/// Numerical rank; `tol = None` uses [`default_tolerance`].
pub fn rank<T: Scalar>(m: &Matrix<T>, tol: Option<T>) -> Result<usize> {
    Ok(factor(m, tol)?.rank())
}

/// Orthonormal basis of `{v : M v = 0}`.
pub fn null_basis<T: Scalar>(m: &Matrix<T>, tol: Option<T>) -> Result<OrthonormalBasis<T>> {
    let qr = factor(m, tol)?;
    Ok(OrthonormalBasis::new_unchecked(m.cols(), qr.null_space_columns()))
}

/// Orthonormal basis of the row space of `M`.
pub fn row_space_basis<T: Scalar>(m: &Matrix<T>, tol: Option<T>) -> Result<OrthonormalBasis<T>> {
    let qr = factor(m, tol)?;
    Ok(OrthonormalBasis::new_unchecked(m.cols(), qr.row_space_columns()))
}

/// Symmetric idempotent `P` onto the row space of `M`; `I - P` projects onto the null space.
pub fn row_space_projector<T: Scalar>(m: &Matrix<T>, tol: Option<T>) -> Result<Matrix<T>> {
    Ok(row_space_basis(m, tol)?.projector())
}

/// `P x`
pub fn project<T: Scalar>(p: &Matrix<T>, x: &Vector<T>) -> Result<Vector<T>> {
    check_dim("projector must be square", p.rows(), p.cols())?;
    p.matvec(x)
}

/// `I - P`
pub fn complement_projector<T: Scalar>(p: &Matrix<T>) -> Result<Matrix<T>> {
    check_dim("projector must be square", p.rows(), p.cols())?;
    Matrix::identity(p.rows()).sub(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn rank_of_identity_and_zero() {
        assert_eq!(rank(&Matrix::<f64>::identity(3), None).unwrap(), 3);
        assert_eq!(rank(&Matrix::<f64>::zeros(2, 2), None).unwrap(), 0);
        assert_eq!(rank(&Matrix::<f64>::zeros(0, 4), None).unwrap(), 0);
    }

    #[test]
    fn rank_rejects_non_finite() {
        let mut m = Matrix::<f64>::identity(2);
        m[(0, 1)] = f64::INFINITY;
        assert!(matches!(rank(&m, None), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn null_basis_of_single_row() {
        let m = Matrix::<f64>::from_rows(&[vec![1.0, 0.0, 0.0]]).unwrap();
        let basis = null_basis(&m, None).unwrap();
        assert_eq!(basis.len(), 2);
        for v in basis.vectors() {
            assert!(v[0].abs() < 1e-15);
        }
        // spans {e2, e3}: projector onto the span is diag(0, 1, 1)
        let p = basis.projector();
        let want = Matrix::from_diagonal(&[0.0, 1.0, 1.0]);
        assert!(p.sub(&want).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn null_basis_of_identity_is_empty() {
        assert!(null_basis(&Matrix::<f64>::identity(3), None).unwrap().is_empty());
    }

    #[test]
    fn projector_examples() {
        let m = Matrix::from_rows(&[vec![1.0, 0.0, 0.0]]).unwrap();
        let p = row_space_projector(&m, None).unwrap();
        assert!(p.sub(&Matrix::from_diagonal(&[1.0, 0.0, 0.0])).unwrap().max_abs() < 1e-15);

        let z = row_space_projector(&Matrix::<f64>::zeros(2, 3), None).unwrap();
        assert_eq!(z, Matrix::zeros(3, 3));
        assert_eq!(complement_projector(&z).unwrap(), Matrix::identity(3));
    }

    #[test]
    fn project_examples() {
        let x = Vector::new(vec![3.0, 4.0]);
        assert_eq!(project(&Matrix::identity(2), &x).unwrap(), x);
        assert_eq!(project(&Matrix::zeros(2, 2), &x).unwrap(), Vector::zeros(2));
        let axis = Matrix::from_diagonal(&[1.0, 0.0]);
        assert_eq!(project(&axis, &x).unwrap(), Vector::new(vec![3.0, 0.0]));
        assert!(project(&axis, &Vector::zeros(3)).is_err());
        assert!(project(&Matrix::<f64>::zeros(2, 3), &Vector::zeros(3)).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let m = Matrix::<f32>::from_rows(&[vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0]]).unwrap();
        assert_eq!(rank(&m, None).unwrap(), 1);
        assert_eq!(null_basis(&m, None).unwrap().len(), 2);
    }

    #[test]
    fn explicit_tolerance_truncates() {
        let m = Matrix::from_diagonal(&[1.0, 1e-6]);
        assert_eq!(rank(&m, None).unwrap(), 2);
        assert_eq!(rank(&m, Some(1e-3)).unwrap(), 1);
    }
}
