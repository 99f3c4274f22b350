//! Householder QR with column pivoting, applied to the transpose of the input.
//!
//! Factoring `Mᵀ = Q R Πᵀ` instead of `M` makes the leading `rank` columns of
//! `Q` an orthonormal basis of the row space of `M` and the trailing columns an
//! orthonormal basis of its null space. The columns of `Mᵀ` are the rows of
//! `M`, so the row-major buffer of `M` is already the column-major buffer the
//! reflections want.

use crate::error::{Error, Result};
use crate::linalg::dense::{axpy, dot, Matrix, Vector};
use crate::scalar::Scalar;

/// `H = I - 2 v vᵀ` acting on coordinates `start..n`, with `‖v‖ = 1`.
#[derive(Clone, Debug)]
struct Reflector<T> {
    start: usize,
    v: Vec<T>,
}

impl<T: Scalar> Reflector<T> {
    #[inline]
    fn apply(&self, x: &mut [T]) {
        let tail = &mut x[self.start..];
        let s = dot(&self.v, tail);
        if s != T::zero() {
            axpy(-(s + s), &self.v, tail);
        }
    }
}

/// Rank-revealing factorization of `Mᵀ`.
#[derive(Clone, Debug)]
pub struct RowSpaceQr<T> {
    ambient: usize,
    reflectors: Vec<Reflector<T>>,
    pivots: Vec<usize>,
    r_diagonal: Vec<T>,
}

impl<T: Scalar> RowSpaceQr<T> {
    /// Factors `Mᵀ`, stopping once every remaining pivot candidate has norm `<= tol`.
    pub fn new(m: &Matrix<T>, tol: T) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        if tol.is_nan() || tol < T::zero() {
            return Err(Error::InvalidInput(format!("rank tolerance must be >= 0, got {tol}")));
        }

        let n = m.cols();
        let count = m.rows();
        let mut a = m.as_slice().to_vec();
        let mut pivots: Vec<usize> = (0..count).collect();
        let mut reflectors = Vec::new();
        let mut r_diagonal = Vec::new();

        for k in 0..n.min(count) {
            let mut best = k;
            let mut best_sq = T::neg_infinity();
            for j in k..count {
                let tail = &a[j * n + k..(j + 1) * n];
                let sq = dot(tail, tail);
                if sq > best_sq {
                    best = j;
                    best_sq = sq;
                }
            }
            let norm = best_sq.sqrt();
            if norm <= tol || norm == T::zero() {
                break;
            }
            if best != k {
                for i in k..n {
                    a.swap(k * n + i, best * n + i);
                }
                pivots.swap(k, best);
            }

            let col = &a[k * n + k..(k + 1) * n];
            let alpha = if col[0] >= T::zero() { -norm } else { norm };
            let mut v = col.to_vec();
            v[0] -= alpha;
            let vn = dot(&v, &v).sqrt();
            for x in &mut v {
                *x /= vn;
            }
            let reflector = Reflector { start: k, v };
            for j in k + 1..count {
                reflector.apply(&mut a[j * n..(j + 1) * n]);
            }
            reflectors.push(reflector);
            r_diagonal.push(norm);
        }

        Ok(Self {
            ambient: n,
            reflectors,
            pivots,
            r_diagonal,
        })
    }

    pub fn rank(&self) -> usize {
        self.reflectors.len()
    }

    /// Length of the rows of the factored matrix.
    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    /// Order in which rows of `M` were chosen as pivots.
    pub fn pivots(&self) -> &[usize] {
        &self.pivots[..self.rank()]
    }

    /// `|R_kk|` for the accepted pivots, non-increasing up to rounding.
    pub fn r_diagonal(&self) -> &[T] {
        &self.r_diagonal
    }

    /// Column `j` of the full orthogonal factor.
    pub fn q_column(&self, j: usize) -> Vector<T> {
        let mut y = vec![T::zero(); self.ambient];
        y[j] = T::one();
        for r in self.reflectors.iter().rev() {
            r.apply(&mut y);
        }
        Vector::new(y)
    }

    pub fn row_space_columns(&self) -> Vec<Vector<T>> {
        (0..self.rank()).map(|j| self.q_column(j)).collect()
    }

    pub fn null_space_columns(&self) -> Vec<Vector<T>> {
        (self.rank()..self.ambient).map(|j| self.q_column(j)).collect()
    }
}
