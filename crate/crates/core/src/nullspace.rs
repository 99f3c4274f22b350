//! Null space of a fully connected network.
//!
//! Writing `f = g ∘ T_1` with `T_1(x) = W_1 x` shows that `Null(W_1)` is a
//! partial null space of `f`: for `W_1 v = 0`, `f(x + a v) = f(x)` for every
//! `x` and `a`. This module reports `Null(W_1)` as the network's null space
//! and supplies sampling checks of that property.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, Matrix, OrthonormalBasis, RowSpaceQr, Vector};
use crate::network::Network;
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct NetworkNullSpace<T> {
    basis: OrthonormalBasis<T>,
    row_projector: Matrix<T>,
    null_projector: Matrix<T>,
    rank: usize,
}

/// `x = null_part + perp_part` with `null_part ∈ N(f)` and `perp_part ⊥ N(f)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionPair<T> {
    pub null_part: Vector<T>,
    pub perp_part: Vector<T>,
}

impl<T: Scalar> NetworkNullSpace<T> {
    /// Extracts `Null(W_1)` at the default rank tolerance.
    pub fn extract(f: &Network<T>) -> Result<Self> {
        Self::extract_with_tolerance(f, None)
    }

    pub fn extract_with_tolerance(f: &Network<T>, tol: Option<T>) -> Result<Self> {
        let w1 = f.first_layer_weights();
        let tol = tol.unwrap_or_else(|| linalg::default_tolerance(w1));
        let qr = RowSpaceQr::new(w1, tol)?;
        let n = w1.cols();
        let row_basis = OrthonormalBasis::new_unchecked(n, qr.row_space_columns());
        let row_projector = row_basis.projector();
        let null_projector = linalg::complement_projector(&row_projector)?;
        Ok(Self {
            basis: OrthonormalBasis::new_unchecked(n, qr.null_space_columns()),
            row_projector,
            null_projector,
            rank: qr.rank(),
        })
    }

    /// `dim N(f) = n_0 − rank(W_1)`.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.ambient_dim()
    }

    pub fn rank_of_first_layer(&self) -> usize {
        self.rank
    }

    pub fn is_trivial(&self) -> bool {
        self.basis.is_empty()
    }

    /// The null space is always read off the first layer.
    pub fn source_layer(&self) -> usize {
        1
    }

    pub fn basis(&self) -> &OrthonormalBasis<T> {
        &self.basis
    }

    /// `P`, onto the row space of `W_1`.
    pub fn row_projector(&self) -> &Matrix<T> {
        &self.row_projector
    }

    /// `I − P`, onto `N(f)`.
    pub fn null_projector(&self) -> &Matrix<T> {
        &self.null_projector
    }

    pub fn decompose(&self, x: &Vector<T>) -> Result<DecompositionPair<T>> {
        check_dim("decompose input", self.ambient_dim(), x.dim())?;
        Ok(DecompositionPair {
            null_part: linalg::project(&self.null_projector, x)?,
            perp_part: linalg::project(&self.row_projector, x)?,
        })
    }

    /// `(I − P) x`
    pub fn null_part(&self, x: &Vector<T>) -> Result<Vector<T>> {
        linalg::project(&self.null_projector, x)
    }

    /// `P x`
    pub fn perp_part(&self, x: &Vector<T>) -> Result<Vector<T>> {
        linalg::project(&self.row_projector, x)
    }

    /// Uniformly distributed unit vector of `span(basis)`; `None` when the basis is empty.
    pub fn random_unit_direction<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Vector<T>> {
        if self.is_trivial() {
            return None;
        }
        loop {
            let coeffs: Vec<T> = (0..self.dim())
                .map(|_| T::lit(rng.sample::<f64, _>(StandardNormal)))
                .collect();
            let v = self.basis.combine(&coeffs).expect("coefficient count matches basis");
            let norm = v.norm();
            if norm > T::zero() {
                return Some(v.scale(T::one() / norm));
            }
        }
    }

    /// Random element of `N(f)` with coefficients uniform in `[-1, 1]`.
    pub fn random_member<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector<T> {
        let coeffs: Vec<T> = (0..self.dim()).map(|_| T::lit(rng.random_range(-1.0..=1.0))).collect();
        self.basis.combine(&coeffs).expect("coefficient count matches basis")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NullPropertyReport {
    pub samples: usize,
    /// `max ‖f(x + a v) − f(x)‖∞` over the samples.
    pub max_output_deviation: f64,
    pub argmax_flips: usize,
    /// Set when the null space is `{0}` and nothing was sampled.
    pub trivial: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SinglePointReport {
    pub samples: usize,
    /// `max ‖f(u) − f(w)‖∞`
    pub max_pair_deviation: f64,
    /// `max ‖f(u) − f(0)‖∞`
    pub max_origin_deviation: f64,
    pub trivial: bool,
}

fn uniform_input<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vector<T> {
    Vector::new((0..n).map(|_| T::lit(rng.random_range(-1.0..=1.0))).collect())
}

fn check_range<T: Scalar>(a_range: (T, T)) -> Result<()> {
    if a_range.0.is_finite() && a_range.1.is_finite() && a_range.0 <= a_range.1 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "bad scalar range [{}, {}]",
            a_range.0, a_range.1
        )))
    }
}

fn sample_deviations<T: Scalar>(
    f: &Network<T>,
    n_samples: usize,
    a_range: (T, T),
    seed: u64,
    mut direction: impl FnMut(&mut ChaCha8Rng) -> Vector<T>,
) -> Result<NullPropertyReport> {
    if n_samples == 0 {
        return Err(Error::InvalidInput("n_samples must be at least 1".into()));
    }
    check_range(a_range)?;
    let (lo, hi) = (a_range.0.to_f64_lossy(), a_range.1.to_f64_lossy());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut flips = 0;
    for _ in 0..n_samples {
        let x = uniform_input(f.input_dim(), &mut rng);
        let a = T::lit(if lo < hi { rng.random_range(lo..=hi) } else { lo });
        let v = direction(&mut rng);
        let base = f.forward(&x)?;
        let moved = f.forward(&x.add_scaled(a, &v)?)?;
        worst = worst.max(base.max_abs_diff(&moved)?.to_f64_lossy());
        if crate::network::argmax(base.as_slice()) != crate::network::argmax(moved.as_slice()) {
            flips += 1;
        }
    }
    Ok(NullPropertyReport {
        samples: n_samples,
        max_output_deviation: worst,
        argmax_flips: flips,
        trivial: false,
    })
}

/// Samples `x ∈ [-1,1]^{n_0}`, `a ∈ a_range` and unit `v ∈ span(basis)` and
/// measures how far `f(x + a v)` moves from `f(x)`.
pub fn verify_null_property<T: Scalar>(
    f: &Network<T>,
    ns: &NetworkNullSpace<T>,
    n_samples: usize,
    a_range: (T, T),
    seed: u64,
) -> Result<NullPropertyReport> {
    check_dim("null space vs network input", f.input_dim(), ns.ambient_dim())?;
    if ns.is_trivial() {
        if n_samples == 0 {
            return Err(Error::InvalidInput("n_samples must be at least 1".into()));
        }
        check_range(a_range)?;
        return Ok(NullPropertyReport {
            samples: 0,
            max_output_deviation: 0.0,
            argmax_flips: 0,
            trivial: true,
        });
    }
    sample_deviations(f, n_samples, a_range, seed, |rng| {
        ns.random_unit_direction(rng).expect("non-trivial basis")
    })
}

/// Same measurement along one fixed direction `v` (not necessarily a null vector).
pub fn verify_direction<T: Scalar>(
    f: &Network<T>,
    v: &Vector<T>,
    n_samples: usize,
    a_range: (T, T),
    seed: u64,
) -> Result<NullPropertyReport> {
    check_dim("direction vs network input", f.input_dim(), v.dim())?;
    sample_deviations(f, n_samples, a_range, seed, |_| v.clone())
}

/// For random `u, w ∈ N(f)`, how far apart `f(u)`, `f(w)` and `f(0)` land.
pub fn check_mapped_to_single_point<T: Scalar>(
    f: &Network<T>,
    ns: &NetworkNullSpace<T>,
    n_samples: usize,
    seed: u64,
) -> Result<SinglePointReport> {
    check_dim("null space vs network input", f.input_dim(), ns.ambient_dim())?;
    if n_samples == 0 {
        return Err(Error::InvalidInput("n_samples must be at least 1".into()));
    }
    if ns.is_trivial() {
        return Ok(SinglePointReport {
            samples: 0,
            max_pair_deviation: 0.0,
            max_origin_deviation: 0.0,
            trivial: true,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let origin = f.forward(&Vector::zeros(f.input_dim()))?;
    let (mut pair, mut to_origin) = (0.0f64, 0.0f64);
    for _ in 0..n_samples {
        let fu = f.forward(&ns.random_member(&mut rng))?;
        let fw = f.forward(&ns.random_member(&mut rng))?;
        pair = pair.max(fu.max_abs_diff(&fw)?.to_f64_lossy());
        to_origin = to_origin
            .max(fu.max_abs_diff(&origin)?.to_f64_lossy())
            .max(fw.max_abs_diff(&origin)?.to_f64_lossy());
    }
    Ok(SinglePointReport {
        samples: n_samples,
        max_pair_deviation: pair,
        max_origin_deviation: to_origin,
        trivial: false,
    })
}
