//! Single-channel, stride-1 2-D convolution written as an explicit matrix.
//!
//! Images are flattened row-major. The operator is cross-correlation
//! (no kernel flip): `out[i, j] = Σ_{p,q} K[p, q] · x[i + p − t, j + q − l]`,
//! where `t = l = 0` for valid padding and `t = ⌊(k1−1)/2⌋`, `l = ⌊(k2−1)/2⌋`
//! with zeros outside the image for same padding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, OrthonormalBasis};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Padding {
    Valid,
    Same,
}

impl std::str::FromStr for Padding {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "valid" => Ok(Padding::Valid),
            "same" => Ok(Padding::Same),
            other => Err(Error::InvalidInput(format!("unknown padding {other:?} (valid|same)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Kernel<T> {
    weights: Matrix<T>,
}

impl<T: Scalar> Kernel<T> {
    pub fn new(weights: Matrix<T>) -> Result<Self> {
        if weights.rows() == 0 || weights.cols() == 0 {
            return Err(Error::InvalidInput("kernel must be at least 1x1".into()));
        }
        if !weights.is_finite() {
            return Err(Error::InvalidInput("kernel has non-finite weights".into()));
        }
        Ok(Self { weights })
    }

    /// Entries i.i.d. uniform in `[-1, 1]`.
    pub fn random<R: Rng + ?Sized>(k1: usize, k2: usize, rng: &mut R) -> Result<Self> {
        Self::new(Matrix::from_fn(k1, k2, |_, _| T::lit(rng.random_range(-1.0..=1.0))))
    }

    pub fn k1(&self) -> usize {
        self.weights.rows()
    }

    pub fn k2(&self) -> usize {
        self.weights.cols()
    }

    pub fn weights(&self) -> &Matrix<T> {
        &self.weights
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::new(self.weights.add(&other.weights)?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvOperator<T> {
    kernel: Kernel<T>,
    input_shape: (usize, usize),
    padding: Padding,
    matrix: Matrix<T>,
}

impl<T: Scalar> ConvOperator<T> {
    pub fn kernel(&self) -> &Kernel<T> {
        &self.kernel
    }

    pub fn input_shape(&self) -> (usize, usize) {
        self.input_shape
    }

    pub fn output_shape(&self) -> (usize, usize) {
        output_shape(self.kernel.k1(), self.kernel.k2(), self.input_shape, self.padding)
    }

    pub fn padding(&self) -> Padding {
        self.padding
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }
}

fn output_shape(k1: usize, k2: usize, (n1, n2): (usize, usize), padding: Padding) -> (usize, usize) {
    match padding {
        Padding::Valid => (n1 - k1 + 1, n2 - k2 + 1),
        Padding::Same => (n1, n2),
    }
}

/// `n1·n2 − (n1−k1+1)(n2−k2+1)` for valid padding, 0 for same: the nullity of a full-rank kernel.
pub fn generic_nullity(k1: usize, k2: usize, n1: usize, n2: usize, padding: Padding) -> usize {
    let (o1, o2) = output_shape(k1, k2, (n1, n2), padding);
    n1 * n2 - (o1 * o2).min(n1 * n2)
}

/// Builds the `(out1·out2) × (n1·n2)` matrix of the convolution.
pub fn lower<T: Scalar>(kernel: &Kernel<T>, n1: usize, n2: usize, padding: Padding) -> Result<ConvOperator<T>> {
    let (k1, k2) = (kernel.k1(), kernel.k2());
    if n1 < k1 || n2 < k2 {
        return Err(Error::InvalidInput(format!(
            "image {n1}x{n2} is smaller than kernel {k1}x{k2}"
        )));
    }
    let (o1, o2) = output_shape(k1, k2, (n1, n2), padding);
    let (top, left) = match padding {
        Padding::Valid => (0, 0),
        Padding::Same => ((k1 - 1) / 2, (k2 - 1) / 2),
    };
    let mut m = Matrix::zeros(o1 * o2, n1 * n2);
    for i in 0..o1 {
        for j in 0..o2 {
            let row = m.row_mut(i * o2 + j);
            for p in 0..k1 {
                let Some(r) = (i + p).checked_sub(top).filter(|&r| r < n1) else {
                    continue;
                };
                for q in 0..k2 {
                    let Some(c) = (j + q).checked_sub(left).filter(|&c| c < n2) else {
                        continue;
                    };
                    row[r * n2 + c] = kernel.weights[(p, q)];
                }
            }
        }
    }
    Ok(ConvOperator {
        kernel: kernel.clone(),
        input_shape: (n1, n2),
        padding,
        matrix: m,
    })
}

/// `n1·n2 − rank(M)`
pub fn kernel_nullity<T: Scalar>(
    kernel: &Kernel<T>,
    n1: usize,
    n2: usize,
    padding: Padding,
    tol: Option<T>,
) -> Result<usize> {
    let op = lower(kernel, n1, n2, padding)?;
    Ok(n1 * n2 - linalg::rank(op.matrix(), tol)?)
}

/// Basis of `⋂ Null(K_i)`, the null space of the vertically stacked operators.
pub fn intersect_null_spaces<T: Scalar>(operators: &[ConvOperator<T>], tol: Option<T>) -> Result<OrthonormalBasis<T>> {
    let first = operators
        .first()
        .ok_or_else(|| Error::InvalidInput("no operators to intersect".into()))?;
    for (i, op) in operators.iter().enumerate() {
        if op.input_shape != first.input_shape || op.padding != first.padding {
            return Err(Error::InvalidInput(format!(
                "operator {i} has input {:?}/{:?}, expected {:?}/{:?}",
                op.input_shape, op.padding, first.input_shape, first.padding
            )));
        }
    }
    let blocks: Vec<&Matrix<T>> = operators.iter().map(ConvOperator::matrix).collect();
    linalg::null_basis(&Matrix::vstack(&blocks)?, tol)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SurveyReport {
    pub trials: usize,
    pub full_rank: usize,
    pub fraction_full_rank: f64,
    /// Nullity every full-rank kernel attains.
    pub generic_nullity: usize,
    pub min_nullity: usize,
    pub max_nullity: usize,
}

/// Per-trial generator: stream `trial` of the seed.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Fraction of random uniform `[-1,1]` kernels whose lowered matrix has full rank.
pub fn full_rank_survey<T: Scalar>(
    n1: usize,
    n2: usize,
    k1: usize,
    k2: usize,
    padding: Padding,
    trials: usize,
    seed: u64,
) -> Result<SurveyReport> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let generic = generic_nullity(k1, k2, n1, n2, padding);
    let mut full = 0;
    let (mut lo, mut hi) = (usize::MAX, 0);
    for t in 0..trials {
        let kernel = Kernel::<T>::random(k1, k2, &mut trial_rng(seed, t))?;
        let nullity = kernel_nullity(&kernel, n1, n2, padding, None)?;
        lo = lo.min(nullity);
        hi = hi.max(nullity);
        if nullity == generic {
            full += 1;
        }
    }
    Ok(SurveyReport {
        trials,
        full_rank: full,
        fraction_full_rank: full as f64 / trials as f64,
        generic_nullity: generic,
        min_nullity: lo,
        max_nullity: hi,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntersectionSurvey {
    pub trials: usize,
    pub kernels_per_trial: usize,
    /// Trials whose joint null space is `{0}`.
    pub trivial: usize,
    pub fraction_trivial: f64,
    pub max_dimension: usize,
}

/// Dimension of `⋂ Null(K_i)` for `kernels` independent random kernels, repeated `trials` times.
#[allow(clippy::too_many_arguments)]
pub fn intersection_survey<T: Scalar>(
    n1: usize,
    n2: usize,
    k1: usize,
    k2: usize,
    padding: Padding,
    kernels: usize,
    trials: usize,
    seed: u64,
) -> Result<IntersectionSurvey> {
    if trials == 0 || kernels == 0 {
        return Err(Error::InvalidInput("trials and kernels must be at least 1".into()));
    }
    let mut trivial = 0;
    let mut max_dimension = 0;
    for t in 0..trials {
        let dim = random_intersection_dim::<T>(n1, n2, k1, k2, padding, kernels, &mut trial_rng(seed, t))?;
        max_dimension = max_dimension.max(dim);
        if dim == 0 {
            trivial += 1;
        }
    }
    Ok(IntersectionSurvey {
        trials,
        kernels_per_trial: kernels,
        trivial,
        fraction_trivial: trivial as f64 / trials as f64,
        max_dimension,
    })
}

/// Draws `kernels` random kernels from `rng` and returns the dimension of their joint null space.
pub fn random_intersection_dim<T: Scalar>(
    n1: usize,
    n2: usize,
    k1: usize,
    k2: usize,
    padding: Padding,
    kernels: usize,
    rng: &mut ChaCha8Rng,
) -> Result<usize> {
    let ops = (0..kernels)
        .map(|_| lower(&Kernel::<T>::random(k1, k2, rng)?, n1, n2, padding))
        .collect::<Result<Vec<_>>>()?;
    Ok(intersect_null_spaces(&ops, None)?.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(rows: &[Vec<f64>]) -> Kernel<f64> {
        Kernel::new(Matrix::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn lowered_shapes() {
        let kern = k(&[vec![1.0; 3], vec![1.0; 3], vec![1.0; 3]]);
        assert_eq!(lower(&kern, 5, 5, Padding::Valid).unwrap().matrix().shape(), (9, 25));
        assert_eq!(lower(&kern, 5, 5, Padding::Same).unwrap().matrix().shape(), (25, 25));
        assert!(lower(&kern, 2, 5, Padding::Valid).is_err());
        assert!(lower(&kern, 5, 2, Padding::Same).is_err());
    }

    #[test]
    fn unit_kernel_is_identity() {
        let op = lower(&k(&[vec![1.0]]), 3, 4, Padding::Same).unwrap();
        assert_eq!(op.matrix(), &Matrix::identity(12));
    }

    #[test]
    fn zero_kernel_nullity_is_everything() {
        let zero = k(&[vec![0.0; 3], vec![0.0; 3], vec![0.0; 3]]);
        assert_eq!(kernel_nullity(&zero, 28, 28, Padding::Valid, None).unwrap(), 784);
    }

    #[test]
    fn generic_nullity_formula() {
        assert_eq!(generic_nullity(3, 3, 28, 28, Padding::Valid), 108);
        assert_eq!(generic_nullity(3, 3, 28, 28, Padding::Same), 0);
        assert_eq!(generic_nullity(3, 3, 8, 8, Padding::Valid), 28);
    }

    #[test]
    fn mismatched_operators_rejected() {
        let kern = k(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let a = lower(&kern, 4, 4, Padding::Valid).unwrap();
        let b = lower(&kern, 5, 4, Padding::Valid).unwrap();
        let c = lower(&kern, 4, 4, Padding::Same).unwrap();
        assert!(intersect_null_spaces(&[a.clone(), b], None).is_err());
        assert!(intersect_null_spaces(&[a, c], None).is_err());
        assert!(intersect_null_spaces::<f64>(&[], None).is_err());
    }

    #[test]
    fn scalar_kernels_are_full_rank() {
        let rep = full_rank_survey::<f64>(5, 5, 1, 1, Padding::Same, 50, 3).unwrap();
        assert_eq!(rep.fraction_full_rank, 1.0);
        let rep = full_rank_survey::<f64>(5, 5, 1, 1, Padding::Valid, 50, 3).unwrap();
        assert_eq!(rep.fraction_full_rank, 1.0);
        assert!(full_rank_survey::<f64>(5, 5, 1, 1, Padding::Valid, 0, 3).is_err());
    }

    #[test]
    fn trial_streams_differ_and_repeat() {
        let a: f64 = trial_rng(1, 0).random();
        let b: f64 = trial_rng(1, 1).random();
        let c: f64 = trial_rng(1, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn one_kernel_intersection_is_its_null_space() {
        let rep = intersection_survey::<f64>(6, 6, 3, 3, Padding::Valid, 1, 5, 2).unwrap();
        assert_eq!(rep.trivial, 0);
        assert_eq!(rep.max_dimension, generic_nullity(3, 3, 6, 6, Padding::Valid));
        let rep = intersection_survey::<f64>(6, 6, 3, 3, Padding::Same, 2, 5, 2).unwrap();
        assert_eq!(rep.fraction_trivial, 1.0);
    }

    #[test]
    fn padding_parses() {
        assert_eq!("valid".parse::<Padding>().unwrap(), Padding::Valid);
        assert_eq!("same".parse::<Padding>().unwrap(), Padding::Same);
        assert!("full".parse::<Padding>().is_err());
    }
}
