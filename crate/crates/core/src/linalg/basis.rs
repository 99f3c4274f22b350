use crate::error::{check_dim, Error, Result};
use crate::linalg::dense::{axpy, Matrix, Vector};
use crate::scalar::Scalar;

/// A list of mutually orthogonal unit vectors in `R^ambient_dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthonormalBasis<T> {
    ambient_dim: usize,
    vectors: Vec<Vector<T>>,
}

impl<T: Scalar> OrthonormalBasis<T> {
    /// Accepts `vectors` if every Gram entry is within `tol` of the identity.
    pub fn new(ambient_dim: usize, vectors: Vec<Vector<T>>, tol: T) -> Result<Self> {
        for v in &vectors {
            check_dim("basis vector", ambient_dim, v.dim())?;
        }
        let basis = Self { ambient_dim, vectors };
        let err = basis.orthonormality_error();
        if err > tol {
            return Err(Error::InvalidInput(format!(
                "vectors are not orthonormal: max |G - I| = {err}"
            )));
        }
        Ok(basis)
    }

    pub(crate) fn new_unchecked(ambient_dim: usize, vectors: Vec<Vector<T>>) -> Self {
        Self { ambient_dim, vectors }
    }

    pub fn empty(ambient_dim: usize) -> Self {
        Self::new_unchecked(ambient_dim, Vec::new())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vector<T>] {
        &self.vectors
    }

    /// `max_{i,j} |<v_i, v_j> - δ_ij|`
    pub fn orthonormality_error(&self) -> T {
        let mut worst = T::zero();
        for (i, a) in self.vectors.iter().enumerate() {
            for b in &self.vectors[i..] {
                let d = crate::linalg::dense::dot(a.as_slice(), b.as_slice());
                let want = if std::ptr::eq(a, b) { T::one() } else { T::zero() };
                worst = worst.max((d - want).abs());
            }
        }
        worst
    }

    /// `Σ coeffs_i v_i`
    pub fn combine(&self, coeffs: &[T]) -> Result<Vector<T>> {
        check_dim("basis coefficients", self.len(), coeffs.len())?;
        let mut out = vec![T::zero(); self.ambient_dim];
        for (&c, v) in coeffs.iter().zip(&self.vectors) {
            axpy(c, v.as_slice(), &mut out);
        }
        Ok(Vector::new(out))
    }

    /// Basis vectors as the rows of a `len × ambient_dim` matrix.
    pub fn to_matrix(&self) -> Matrix<T> {
        let data = self.vectors.iter().flat_map(|v| v.as_slice().iter().copied()).collect();
        Matrix::from_row_major(self.len(), self.ambient_dim, data).expect("basis vectors are finite")
    }

    /// Orthogonal projector `Σ v_i v_iᵀ` onto the span.
    pub fn projector(&self) -> Matrix<T> {
        let n = self.ambient_dim;
        let mut p = Matrix::zeros(n, n);
        for v in &self.vectors {
            let v = v.as_slice();
            for i in 0..n {
                let vi = v[i];
                if vi != T::zero() {
                    axpy(vi, &v[i..], &mut p.row_mut(i)[i..]);
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                p[(i, j)] = p[(j, i)];
            }
        }
        p
    }
}
