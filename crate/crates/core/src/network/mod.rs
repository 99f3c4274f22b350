//! Fully connected networks `f = A_{K+1} ∘ T_{K+1} ∘ σ ∘ … ∘ σ ∘ A_1 ∘ T_1`.
//!
//! Layer `i` holds `W_i` (`n_i × n_{i-1}`) and `b_i`; the activation is applied
//! after every layer except the last, so `forward` returns raw logits.

mod io;
mod train;

pub use io::{FORMAT_VERSION, MAGIC};
pub use train::{evaluate, train, train_with_progress, Accuracy, EpochStats, TrainConfig};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, Matrix, Vector};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Relu,
    Sigmoid,
}

impl Activation {
    #[inline]
    pub fn apply<T: Scalar>(self, z: T) -> T {
        match self {
            Activation::Relu => z.max(T::zero()),
            Activation::Sigmoid => T::one() / (T::one() + (-z).exp()),
        }
    }

    /// Derivative expressed through the activation output `a = σ(z)`.
    #[inline]
    pub(crate) fn derivative_from_output<T: Scalar>(self, a: T) -> T {
        match self {
            Activation::Relu => {
                if a > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Sigmoid => a * (T::one() - a),
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            Activation::Relu => 0,
            Activation::Sigmoid => 1,
        }
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Activation::Relu),
            1 => Some(Activation::Sigmoid),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layer<T> {
    pub weights: Matrix<T>,
    pub bias: Vector<T>,
}

impl<T: Scalar> Layer<T> {
    pub fn new(weights: Matrix<T>, bias: Vector<T>) -> Result<Self> {
        check_dim("layer bias", weights.rows(), bias.dim())?;
        if !bias.is_finite() {
            return Err(Error::InvalidInput("bias has non-finite entries".into()));
        }
        Ok(Self { weights, bias })
    }

    pub fn inputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.rows()
    }

    #[inline]
    fn affine_into(&self, x: &[T], out: &mut Vec<T>) {
        out.clear();
        out.extend((0..self.outputs()).map(|i| dot(self.weights.row(i), x) + self.bias[i]));
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network<T> {
    layers: Vec<Layer<T>>,
    activation: Activation,
}

/// Softmax output of a classifier.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prediction<T> {
    pub class: usize,
    pub confidence: T,
    pub distribution: Vec<T>,
}

impl<T: Scalar> Network<T> {
    /// Needs at least one hidden layer and consecutive shapes that chain.
    pub fn new(layers: Vec<Layer<T>>, activation: Activation) -> Result<Self> {
        if layers.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "a network needs at least one hidden layer, got {} layer(s)",
                layers.len()
            )));
        }
        for pair in layers.windows(2) {
            check_dim("layer chaining", pair[0].outputs(), pair[1].inputs())?;
        }
        Ok(Self { layers, activation })
    }

    /// He-uniform weights `U(-√(6/n_in), √(6/n_in))`, zero biases.
    pub fn random<R: Rng + ?Sized>(widths: &[usize], activation: Activation, rng: &mut R) -> Result<Self> {
        validate_widths(widths)?;
        let layers = widths
            .windows(2)
            .map(|w| {
                let (n_in, n_out) = (w[0], w[1]);
                let bound = (6.0 / n_in as f64).sqrt();
                let weights = Matrix::from_fn(n_out, n_in, |_, _| T::lit(rng.random_range(-bound..bound)));
                Layer::new(weights, Vector::zeros(n_out))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(layers, activation)
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Layer<T>] {
        &mut self.layers
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// `(n_0, n_1, …, n_{K+1})`
    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].inputs())
            .chain(self.layers.iter().map(Layer::outputs))
            .collect()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs()
    }

    /// `W_1`, the only layer that determines the null space.
    pub fn first_layer_weights(&self) -> &Matrix<T> {
        &self.layers[0].weights
    }

    pub fn forward(&self, x: &Vector<T>) -> Result<Vector<T>> {
        self.forward_slice(x.as_slice()).map(Vector::new)
    }

    pub fn forward_slice(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim("network input", self.input_dim(), x.len())?;
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.affine_into(&cur, &mut next);
            if i < last {
                for z in &mut next {
                    *z = self.activation.apply(*z);
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    pub fn predict(&self, x: &Vector<T>) -> Result<Prediction<T>> {
        self.predict_slice(x.as_slice())
    }

    pub fn predict_slice(&self, x: &[T]) -> Result<Prediction<T>> {
        Ok(Prediction::from_logits(&self.forward_slice(x)?))
    }
}

pub(crate) fn validate_widths(widths: &[usize]) -> Result<()> {
    if widths.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "widths need input, at least one hidden layer and output, got {widths:?}"
        )));
    }
    if widths.contains(&0) {
        return Err(Error::InvalidInput(format!("zero width in {widths:?}")));
    }
    Ok(())
}

/// Max-shifted softmax.
pub fn softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let m = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|&z| (z - m).exp()).collect();
    let total: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax<T: Scalar>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

impl<T: Scalar> Prediction<T> {
    pub fn from_logits(logits: &[T]) -> Self {
        let distribution = softmax(logits);
        let class = argmax(logits);
        Self {
            class,
            confidence: distribution[class],
            distribution,
        }
    }

    /// `max_i |p_i - q_i|`
    pub fn distribution_gap(&self, other: &Self) -> T {
        self.distribution
            .iter()
            .zip(&other.distribution)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }
}
