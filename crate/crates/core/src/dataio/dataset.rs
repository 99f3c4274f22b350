use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::Vector;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Mnist,
    Fmnist,
    Other,
}

/// Flattened images with values in `[-1, 1]` and integer class labels.
#[derive(Clone, Debug)]
pub struct LabeledDataset<T> {
    pixels: Vec<T>,
    labels: Vec<usize>,
    rescaled: Vec<bool>,
    shape: (usize, usize),
    source: Source,
}

impl<T: Scalar> LabeledDataset<T> {
    /// `pixels` holds `labels.len()` images of `h·w` values back to back.
    pub fn from_flat(pixels: Vec<T>, labels: Vec<usize>, shape: (usize, usize), source: Source) -> Result<Self> {
        let dim = shape.0 * shape.1;
        check_dim("dataset pixel count", labels.len() * dim, pixels.len())?;
        if let Some(pos) = pixels.iter().position(|p| !p.is_finite() || p.abs() > T::one()) {
            return Err(Error::InvalidInput(format!(
                "pixel {} of image {} is {} (outside [-1, 1])",
                pos % dim.max(1),
                pos / dim.max(1),
                pixels[pos]
            )));
        }
        let rescaled = vec![false; labels.len()];
        Ok(Self {
            pixels,
            labels,
            rescaled,
            shape,
            source,
        })
    }

    pub fn from_images(
        images: &[Vector<T>],
        labels: Vec<usize>,
        shape: (usize, usize),
        source: Source,
    ) -> Result<Self> {
        check_dim("dataset images vs labels", labels.len(), images.len())?;
        let dim = shape.0 * shape.1;
        let mut pixels = Vec::with_capacity(images.len() * dim);
        for img in images {
            check_dim("dataset image dimension", dim, img.dim())?;
            pixels.extend_from_slice(img.as_slice());
        }
        Self::from_flat(pixels, labels, shape, source)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.shape.0 * self.shape.1
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn image(&self, i: usize) -> &[T] {
        let d = self.dim();
        &self.pixels[i * d..(i + 1) * d]
    }

    pub fn image_vector(&self, i: usize) -> Vector<T> {
        Vector::from_slice(self.image(i))
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn is_rescaled(&self, i: usize) -> bool {
        self.rescaled[i]
    }

    /// One more than the largest label.
    pub fn num_classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    /// Copy containing only the listed images, in the listed order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let d = self.dim();
        let mut pixels = Vec::with_capacity(indices.len() * d);
        for &i in indices {
            pixels.extend_from_slice(self.image(i));
        }
        Self {
            pixels,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            rescaled: indices.iter().map(|&i| self.rescaled[i]).collect(),
            shape: self.shape,
            source: self.source,
        }
    }

    /// The first `n` images.
    pub fn take(&self, n: usize) -> Self {
        let idx: Vec<usize> = (0..n.min(self.len())).collect();
        self.subset(&idx)
    }

    /// Originals followed by a copy of every image multiplied by `alpha`.
    pub fn augment_rescale(&self, alpha: T) -> Result<Self> {
        if !(alpha > T::zero() && alpha < T::one()) {
            return Err(Error::InvalidInput(format!(
                "rescale alpha must lie in (0, 1), got {alpha}"
            )));
        }
        let mut pixels = Vec::with_capacity(2 * self.pixels.len());
        pixels.extend_from_slice(&self.pixels);
        pixels.extend(self.pixels.iter().map(|&p| alpha * p));
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&self.labels);
        let mut rescaled = self.rescaled.clone();
        rescaled.extend(std::iter::repeat_n(true, self.len()));
        Ok(Self {
            pixels,
            labels,
            rescaled,
            shape: self.shape,
            source: self.source,
        })
    }
}
