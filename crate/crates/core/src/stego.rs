//! Steganographic images built from a network's null space.
//!
//! The stego image is `S = α₁ H⊥ + α₂ Ĉ`, where `H⊥` is the row-space part of
//! the hidden image and `Ĉ` the null-space part of the cover. Because
//! `α₂ Ĉ ∈ N(f)`, `f(S) = f(α₁ H⊥)`, and because `α₁ Ĥ ∈ N(f)` as well,
//! `f(α₁ H⊥) = f(α₁ H)`: the network labels `S` as the scaled hidden image
//! while `S` looks like the cover.

use serde::Serialize;

use crate::dataio::{fit_to_display, LabeledDataset};
use crate::error::{check_dim, Error, Result};
use crate::linalg::Vector;
use crate::network::{Network, Prediction};
use crate::nullspace::NetworkNullSpace;
use crate::scalar::Scalar;

pub const DEFAULT_ALPHA1: f64 = 0.2;

#[derive(Clone, Debug)]
pub struct FilteredEntry<T> {
    /// Position in the source dataset.
    pub source_index: usize,
    pub image: Vector<T>,
    pub label: usize,
    pub prediction_original: Prediction<T>,
    pub prediction_rescaled: Prediction<T>,
}

/// Images the network classifies correctly both as-is and scaled by `alpha1`.
#[derive(Clone, Debug)]
pub struct FilteredDataset<T> {
    entries: Vec<FilteredEntry<T>>,
    alpha1: T,
    per_class: Vec<usize>,
}

impl<T: Scalar> FilteredDataset<T> {
    pub fn entries(&self) -> &[FilteredEntry<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn alpha1(&self) -> T {
        self.alpha1
    }

    /// Kept images per class label.
    pub fn per_class_counts(&self) -> &[usize] {
        &self.per_class
    }
}

fn check_alpha<T: Scalar>(name: &str, alpha: T, closed_above: bool) -> Result<()> {
    let ok = alpha > T::zero() && (alpha < T::one() || (closed_above && alpha == T::one()));
    if ok {
        Ok(())
    } else {
        let hi = if closed_above { "]" } else { ")" };
        Err(Error::InvalidInput(format!(
            "{name} must lie in (0, 1{hi}, got {alpha}"
        )))
    }
}

/// Keeps, in dataset order and up to `per_class_cap` per class, the images with
/// `predict(X) = label` and `predict(alpha1·X) = label`.
pub fn build_filtered_dataset<T: Scalar>(
    f: &Network<T>,
    data: &LabeledDataset<T>,
    alpha1: T,
    per_class_cap: usize,
) -> Result<FilteredDataset<T>> {
    check_alpha("alpha1", alpha1, false)?;
    check_dim("dataset image vs network input", f.input_dim(), data.dim())?;
    let classes = f.output_dim();
    let mut per_class = vec![0usize; classes];
    let mut entries = Vec::new();
    for i in 0..data.len() {
        let label = data.label(i);
        if label >= classes || per_class[label] >= per_class_cap {
            continue;
        }
        let image = data.image_vector(i);
        let original = f.predict(&image)?;
        if original.class != label {
            continue;
        }
        let rescaled = f.predict(&image.scale(alpha1))?;
        if rescaled.class != label {
            continue;
        }
        per_class[label] += 1;
        entries.push(FilteredEntry {
            source_index: i,
            image,
            label,
            prediction_original: original,
            prediction_rescaled: rescaled,
        });
        if per_class.iter().all(|&c| c >= per_class_cap) {
            break;
        }
    }
    Ok(FilteredDataset {
        entries,
        alpha1,
        per_class,
    })
}

#[inline]
fn combine<T: Scalar>(alpha1: T, h: T, alpha2: T, c: T) -> T {
    alpha1 * h + alpha2 * c
}

/// Largest `α₂ ∈ [0, 1]` keeping every entry of `α₁ H⊥ + α₂ Ĉ` inside `[-1, 1]`.
pub fn select_alpha2<T: Scalar>(h_perp: &Vector<T>, c_null: &Vector<T>, alpha1: T) -> Result<T> {
    check_dim("select_alpha2 inputs", h_perp.dim(), c_null.dim())?;
    check_alpha("alpha1", alpha1, true)?;
    let one = T::one();
    let mut alpha2 = one;
    for (i, (&h, &c)) in h_perp.iter().zip(c_null.iter()).enumerate() {
        let base = alpha1 * h;
        if base.is_nan() || base.abs() > one {
            return Err(Error::HiddenOutOfRange {
                index: i,
                value: base.to_f64_lossy(),
            });
        }
        if c > T::zero() {
            alpha2 = alpha2.min((one - base) / c);
        } else if c < T::zero() {
            alpha2 = alpha2.min((-one - base) / c);
        }
    }
    alpha2 = alpha2.max(T::zero());

    // The closed-form bound can overshoot by an ulp after rounding.
    let shrink = one - T::lit(4.0) * T::epsilon();
    for _ in 0..64 {
        let inside = h_perp
            .iter()
            .zip(c_null.iter())
            .all(|(&h, &c)| combine(alpha1, h, alpha2, c).abs() <= one);
        if inside {
            return Ok(alpha2);
        }
        alpha2 *= shrink;
    }
    Ok(T::zero())
}

#[derive(Clone, Debug)]
pub struct StegoArtifact<T> {
    pub cover: Vector<T>,
    pub hidden: Vector<T>,
    pub alpha1: T,
    pub alpha2: T,
    /// `Ĉ`, the null-space part of the cover.
    pub cover_null: Vector<T>,
    /// `H⊥`, the row-space part of the hidden image.
    pub hidden_perp: Vector<T>,
    pub stego: Vector<T>,
    pub prediction_on_stego: Prediction<T>,
    /// Prediction on `α₁ H`.
    pub prediction_on_scaled_hidden: Prediction<T>,
}

fn check_image_range<T: Scalar>(name: &str, v: &Vector<T>) -> Result<()> {
    match v.iter().position(|x| x.is_nan() || x.abs() > T::one()) {
        None => Ok(()),
        Some(i) => Err(Error::InvalidInput(format!(
            "{name} pixel {i} = {} lies outside [-1, 1]",
            v[i]
        ))),
    }
}

fn assemble<T: Scalar>(alpha1: T, h_perp: &Vector<T>, alpha2: T, c_null: &Vector<T>) -> Vector<T> {
    Vector::new(
        h_perp
            .iter()
            .zip(c_null.iter())
            .map(|(&h, &c)| combine(alpha1, h, alpha2, c))
            .collect(),
    )
}

/// Hides the class of `hidden` inside an image that looks like `cover`.
pub fn compose_stego<T: Scalar>(
    f: &Network<T>,
    ns: &NetworkNullSpace<T>,
    hidden: &Vector<T>,
    cover: &Vector<T>,
    alpha1: T,
) -> Result<StegoArtifact<T>> {
    check_dim("hidden image", f.input_dim(), hidden.dim())?;
    check_dim("cover image", f.input_dim(), cover.dim())?;
    check_image_range("hidden", hidden)?;
    check_image_range("cover", cover)?;
    let cover_null = ns.null_part(cover)?;
    let hidden_perp = ns.perp_part(hidden)?;
    let alpha2 = select_alpha2(&hidden_perp, &cover_null, alpha1)?;
    let stego = assemble(alpha1, &hidden_perp, alpha2, &cover_null);
    let prediction_on_stego = f.predict(&stego)?;
    let prediction_on_scaled_hidden = f.predict(&hidden.scale(alpha1))?;
    Ok(StegoArtifact {
        cover: cover.clone(),
        hidden: hidden.clone(),
        alpha1,
        alpha2,
        cover_null,
        hidden_perp,
        stego,
        prediction_on_stego,
        prediction_on_scaled_hidden,
    })
}

impl<T: Scalar> StegoArtifact<T> {
    /// Same hidden component with the cover weight replaced by `alpha2`.
    pub fn with_alpha2(&self, f: &Network<T>, alpha2: T) -> Result<Self> {
        let stego = assemble(self.alpha1, &self.hidden_perp, alpha2, &self.cover_null);
        Ok(Self {
            alpha2,
            prediction_on_stego: f.predict(&stego)?,
            stego,
            ..self.clone()
        })
    }

    /// `α₁ H⊥`
    pub fn scaled_hidden_perp(&self) -> Vector<T> {
        self.hidden_perp.scale(self.alpha1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StegoReport {
    /// `predict(S).class == predict(α₁ H⊥).class`
    pub class_match: bool,
    /// `‖softmax(f(S)) − softmax(f(α₁ H⊥))‖∞`
    pub softmax_gap: f64,
    /// Confidence of the prediction on `S`.
    pub confidence: f64,
    pub stego_class: usize,
    /// `predict(S).class == predict(α₁ H).class`
    pub scaled_hidden_class_match: bool,
    /// `‖softmax(f(S)) − softmax(f(α₁ H))‖∞`
    pub scaled_hidden_gap: f64,
    /// Whether `S` is labelled as the hidden image's true class, when known.
    pub label_match: Option<bool>,
}

impl StegoReport {
    pub fn passed(&self) -> bool {
        self.class_match && self.label_match != Some(false)
    }
}

/// Re-evaluates `f` on the artifact and compares `S` with `α₁ H⊥` and `α₁ H`.
pub fn verify_stego<T: Scalar>(
    f: &Network<T>,
    art: &StegoArtifact<T>,
    hidden_label: Option<usize>,
) -> Result<StegoReport> {
    let on_stego = f.predict(&art.stego)?;
    let on_perp = f.predict(&art.scaled_hidden_perp())?;
    let on_hidden = f.predict(&art.hidden.scale(art.alpha1))?;
    Ok(StegoReport {
        class_match: on_stego.class == on_perp.class,
        softmax_gap: on_stego.distribution_gap(&on_perp).to_f64_lossy(),
        confidence: on_stego.confidence.to_f64_lossy(),
        stego_class: on_stego.class,
        scaled_hidden_class_match: on_stego.class == on_hidden.class,
        scaled_hidden_gap: on_stego.distribution_gap(&on_hidden).to_f64_lossy(),
        label_match: hidden_label.map(|l| l == on_stego.class),
    })
}

/// Split of an input into the part the network uses and the part it ignores.
#[derive(Clone, Debug)]
pub struct NnView<T> {
    /// `X⊥`, the only component that reaches the prediction.
    pub seen: Vector<T>,
    /// `X̂ ∈ N(f)`.
    pub unseen: Vector<T>,
    /// `seen` scaled into `[-1, 1]` for rendering.
    pub seen_display: Vector<T>,
    pub unseen_display: Vector<T>,
    pub prediction_input: Prediction<T>,
    pub prediction_seen: Prediction<T>,
}

pub fn what_nn_sees<T: Scalar>(f: &Network<T>, ns: &NetworkNullSpace<T>, x: &Vector<T>) -> Result<NnView<T>> {
    check_dim("image", f.input_dim(), x.dim())?;
    let parts = ns.decompose(x)?;
    Ok(NnView {
        seen_display: fit_to_display(&parts.perp_part),
        unseen_display: fit_to_display(&parts.null_part),
        prediction_input: f.predict(x)?,
        prediction_seen: f.predict(&parts.perp_part)?,
        seen: parts.perp_part,
        unseen: parts.null_part,
    })
}
