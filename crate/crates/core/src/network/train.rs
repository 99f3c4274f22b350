//! Mini-batch SGD with momentum on softmax cross-entropy.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataio::LabeledDataset;
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot};
use crate::network::{softmax, validate_widths, Activation, Network};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Heavy-ball coefficient; 0 gives plain SGD.
    pub momentum: f64,
    pub seed: u64,
    /// Scale applied to the augmented copy of every training image.
    pub rescale_alpha: f64,
    pub activation: Activation,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            batch_size: 32,
            learning_rate: 0.003,
            momentum: 0.9,
            seed: 0,
            rescale_alpha: 0.2,
            activation: Activation::Relu,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidInput(what));
        if self.epochs == 0 || self.batch_size == 0 {
            return bad(format!(
                "epochs and batch_size must be positive (got {} and {})",
                self.epochs, self.batch_size
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad(format!("momentum must lie in [0, 1), got {}", self.momentum));
        }
        if !(self.rescale_alpha > 0.0 && self.rescale_alpha < 1.0) {
            return bad(format!("rescale_alpha must lie in (0, 1), got {}", self.rescale_alpha));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    /// Accuracy of the pre-update predictions seen during the epoch.
    pub running_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Accuracy {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// Mean confidence over the correctly predicted images.
    pub mean_confidence_correct: f64,
}

pub fn evaluate<T: Scalar>(net: &Network<T>, data: &LabeledDataset<T>) -> Result<Accuracy> {
    let mut correct = 0;
    let mut conf = 0.0;
    for i in 0..data.len() {
        let p = net.predict_slice(data.image(i))?;
        if p.class == data.label(i) {
            correct += 1;
            conf += p.confidence.to_f64_lossy();
        }
    }
    Ok(Accuracy {
        total: data.len(),
        correct,
        accuracy: if data.is_empty() {
            0.0
        } else {
            correct as f64 / data.len() as f64
        },
        mean_confidence_correct: if correct == 0 { 0.0 } else { conf / correct as f64 },
    })
}

/// Trains on `data` plus its `cfg.rescale_alpha`-scaled copy.
pub fn train<T: Scalar>(data: &LabeledDataset<T>, widths: &[usize], cfg: &TrainConfig) -> Result<Network<T>> {
    train_with_progress(data, widths, cfg, |_| {})
}

pub fn train_with_progress<T: Scalar>(
    data: &LabeledDataset<T>,
    widths: &[usize],
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochStats),
) -> Result<Network<T>> {
    cfg.validate()?;
    validate_widths(widths)?;
    if data.is_empty() {
        return Err(Error::InvalidInput("training set is empty".into()));
    }
    if widths[0] != data.dim() {
        return Err(Error::InvalidInput(format!(
            "input width {} does not match image dimension {}",
            widths[0],
            data.dim()
        )));
    }
    let classes = widths[widths.len() - 1];
    if data.num_classes() > classes {
        return Err(Error::InvalidInput(format!(
            "label {} does not fit {} output classes",
            data.num_classes() - 1,
            classes
        )));
    }

    let data = data.augment_rescale(T::lit(cfg.rescale_alpha))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut net = Network::random(widths, cfg.activation, &mut rng)?;

    let mut grads = Params::zeros_like(&net);
    let mut velocity = Params::zeros_like(&net);
    let mut scratch = Scratch::new(widths);
    let mut order: Vec<usize> = (0..data.len()).collect();

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut hits = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            grads.fill_zero();
            for &i in batch {
                let (loss, hit) = backprop(&net, data.image(i), data.label(i), &mut scratch, &mut grads);
                loss_sum += loss;
                hits += usize::from(hit);
            }
            let step = T::lit(cfg.learning_rate / batch.len() as f64);
            velocity.momentum_step(T::lit(cfg.momentum), step, &grads);
            velocity.add_to(&mut net);
        }
        on_epoch(&EpochStats {
            epoch: epoch + 1,
            mean_loss: loss_sum / data.len() as f64,
            running_accuracy: hits as f64 / data.len() as f64,
        });
    }
    Ok(net)
}

/// Flat per-layer buffers shaped like a network's weights and biases.
struct Params<T> {
    weights: Vec<Vec<T>>,
    biases: Vec<Vec<T>>,
}

impl<T: Scalar> Params<T> {
    fn zeros_like(net: &Network<T>) -> Self {
        Self {
            weights: net
                .layers()
                .iter()
                .map(|l| vec![T::zero(); l.weights.as_slice().len()])
                .collect(),
            biases: net.layers().iter().map(|l| vec![T::zero(); l.bias.dim()]).collect(),
        }
    }

    fn fill_zero(&mut self) {
        for buf in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            buf.fill(T::zero());
        }
    }

    /// `v ← μ v − η g`
    fn momentum_step(&mut self, mu: T, eta: T, grads: &Self) {
        let pairs = self
            .weights
            .iter_mut()
            .zip(&grads.weights)
            .chain(self.biases.iter_mut().zip(&grads.biases));
        for (v, g) in pairs {
            for (vi, &gi) in v.iter_mut().zip(g) {
                *vi = mu * *vi - eta * gi;
            }
        }
    }

    fn add_to(&self, net: &mut Network<T>) {
        for ((layer, w), b) in net.layers_mut().iter_mut().zip(&self.weights).zip(&self.biases) {
            axpy(T::one(), w, layer.weights.as_mut_slice());
            axpy(T::one(), b, layer.bias.as_mut_slice());
        }
    }
}

struct Scratch<T> {
    /// Post-activation outputs of every layer (logits for the last).
    outputs: Vec<Vec<T>>,
    deltas: Vec<Vec<T>>,
}

impl<T: Scalar> Scratch<T> {
    fn new(widths: &[usize]) -> Self {
        Self {
            outputs: widths[1..].iter().map(|&n| vec![T::zero(); n]).collect(),
            deltas: widths[1..].iter().map(|&n| vec![T::zero(); n]).collect(),
        }
    }
}

/// Accumulates the cross-entropy gradient of one sample; returns `(loss, correct)`.
fn backprop<T: Scalar>(
    net: &Network<T>,
    x: &[T],
    label: usize,
    s: &mut Scratch<T>,
    grads: &mut Params<T>,
) -> (f64, bool) {
    let layers = net.layers();
    let last = layers.len() - 1;
    let act = net.activation();

    for (l, layer) in layers.iter().enumerate() {
        let (done, rest) = s.outputs.split_at_mut(l);
        let input = if l == 0 { x } else { &done[l - 1] };
        let out = &mut rest[0];
        for (i, o) in out.iter_mut().enumerate() {
            let z = dot(layer.weights.row(i), input) + layer.bias[i];
            *o = if l < last { act.apply(z) } else { z };
        }
    }

    let logits = &s.outputs[last];
    let probs = softmax(logits);
    let correct = crate::network::argmax(logits) == label;
    let loss = -probs[label].to_f64_lossy().max(f64::MIN_POSITIVE).ln();

    for (d, (k, &p)) in s.deltas[last].iter_mut().zip(probs.iter().enumerate()) {
        *d = if k == label { p - T::one() } else { p };
    }
    for l in (0..last).rev() {
        let (lower, upper) = s.deltas.split_at_mut(l + 1);
        let below = &mut lower[l];
        below.fill(T::zero());
        let w_next = &layers[l + 1].weights;
        for (r, &d) in upper[0].iter().enumerate() {
            if d != T::zero() {
                axpy(d, w_next.row(r), below);
            }
        }
        for (d, &a) in below.iter_mut().zip(&s.outputs[l]) {
            *d *= act.derivative_from_output(a);
        }
    }

    for l in 0..=last {
        let input = if l == 0 { x } else { &s.outputs[l - 1] };
        let n_in = input.len();
        let gw = &mut grads.weights[l];
        for (r, &d) in s.deltas[l].iter().enumerate() {
            if d != T::zero() {
                axpy(d, input, &mut gw[r * n_in..(r + 1) * n_in]);
            }
        }
        axpy(T::one(), &s.deltas[l], &mut grads.biases[l]);
    }
    (loss, correct)
}
