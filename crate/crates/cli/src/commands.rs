use std::path::Path;

use anyhow::{bail, Context, Result};
use nullspace_core::convnull::{
    self, full_rank_survey, generic_nullity, intersection_survey, IntersectionSurvey, Kernel, Padding, SurveyReport,
};
use nullspace_core::dataio::{decode_image, fit_to_display, load_split, LabeledDataset};
use nullspace_core::network::{evaluate, train_with_progress, Accuracy, EpochStats, Prediction, TrainConfig};
use nullspace_core::nullspace::{
    check_mapped_to_single_point, verify_null_property, NetworkNullSpace, NullPropertyReport, SinglePointReport,
};
use nullspace_core::stego::{compose_stego, verify_stego, what_nn_sees, StegoReport};
use nullspace_core::{Network64, Vector64};
use serde::Serialize;

use crate::args::{Command, ConvnullArgs, DataArgs, Dims, InspectArgs, NullspaceArgs, StegoArgs, TrainArgs};
use crate::output::{file_sha256, sha256_hex, OutDir};

/// Largest output or probability movement still counted as "unchanged".
pub const TOLERANCE: f64 = 1e-9;
const A_RANGE: (f64, f64) = (-10.0, 10.0);

pub enum Outcome {
    Ok,
    VerificationFailed,
}

impl Outcome {
    fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Ok
        } else {
            Outcome::VerificationFailed
        }
    }
}

pub fn run(command: &Command) -> Result<Outcome> {
    match command {
        Command::Train(a) => train(a, command),
        Command::Nullspace(a) => nullspace(a, command),
        Command::Stego(a) => stego(a, command),
        Command::Inspect(a) => inspect(a, command),
        Command::Convnull(a) => convnull(a, command),
    }
}

fn load_model(path: &Path) -> Result<(Network64, String)> {
    let sha = file_sha256(path)?;
    let net = Network64::load(path).with_context(|| format!("loading model {}", path.display()))?;
    Ok((net, sha))
}

fn load_data(data: &DataArgs, split: nullspace_core::dataio::Split) -> Result<LabeledDataset<f64>> {
    load_split(&data.data_dir, split, data.dataset.into())
        .with_context(|| format!("loading dataset from {}", data.data_dir.display()))
}

#[derive(Serialize)]
struct PredictionOut {
    class: usize,
    confidence: f64,
    distribution: Vec<f64>,
}

impl From<&Prediction<f64>> for PredictionOut {
    fn from(p: &Prediction<f64>) -> Self {
        Self {
            class: p.class,
            confidence: p.confidence,
            distribution: p.distribution.clone(),
        }
    }
}

#[derive(Serialize)]
struct TrainReport {
    command: &'static str,
    model: String,
    model_sha256: String,
    widths: Vec<usize>,
    config: TrainConfig,
    epochs: Vec<EpochStats>,
    accuracy_original: Accuracy,
    accuracy_rescaled: Accuracy,
    accuracy_combined: Accuracy,
    null_space_dim: usize,
}

fn train(a: &TrainArgs, command: &Command) -> Result<Outcome> {
    let data = load_data(&a.data, nullspace_core::dataio::Split::Train)?;
    let cfg = TrainConfig {
        epochs: a.epochs,
        batch_size: a.batch_size,
        learning_rate: a.lr,
        momentum: a.momentum,
        seed: a.seed,
        rescale_alpha: a.alpha1,
        activation: a.activation.into(),
    };
    cfg.validate()?;
    let out = OutDir::create(Some(&a.out), command, vec![])?;

    let mut epochs = Vec::new();
    let net = train_with_progress(&data, &a.widths.0, &cfg, |s| {
        eprintln!(
            "epoch {:>3}: loss {:.4}, running accuracy {:.2}%",
            s.epoch,
            s.mean_loss,
            100.0 * s.running_accuracy
        );
        epochs.push(s.clone());
    })?;

    let bytes = net.to_bytes();
    let model = out
        .write_bytes("model.nspec", &bytes)?
        .expect("train always has an output directory");
    let combined = data.augment_rescale(a.alpha1)?;
    let rescaled = combined.subset(&(data.len()..combined.len()).collect::<Vec<_>>());
    let report = TrainReport {
        command: "train",
        model: model.display().to_string(),
        model_sha256: sha256_hex(&bytes),
        widths: net.widths(),
        config: cfg,
        epochs,
        accuracy_original: evaluate(&net, &data)?,
        accuracy_rescaled: evaluate(&net, &rescaled)?,
        accuracy_combined: evaluate(&net, &combined)?,
        null_space_dim: NetworkNullSpace::extract(&net)?.dim(),
    };
    out.finish(&report)?;
    Ok(Outcome::Ok)
}

#[derive(Serialize)]
struct NullspaceReport {
    command: &'static str,
    model_sha256: String,
    widths: Vec<usize>,
    dimension: usize,
    ambient_dim: usize,
    rank_first_layer: usize,
    source_layer: usize,
    orthonormality_error: f64,
    /// `max ‖W₁ v‖ / ‖W₁‖_F` over the basis.
    max_relative_residual: f64,
    null_property: NullPropertyReport,
    single_point: SinglePointReport,
    tolerance: f64,
    passed: bool,
}

fn nullspace(a: &NullspaceArgs, command: &Command) -> Result<Outcome> {
    let (net, sha) = load_model(&a.model)?;
    let out = OutDir::create(a.out.as_deref(), command, vec![("model", sha.clone())])?;
    let ns = NetworkNullSpace::extract(&net)?;
    let w1 = net.first_layer_weights();
    let scale = w1.frobenius_norm().max(f64::MIN_POSITIVE);
    let mut residual = 0.0f64;
    for v in ns.basis().vectors() {
        residual = residual.max(w1.matvec(v)?.norm() / scale);
    }
    let null_property = verify_null_property(&net, &ns, a.samples, A_RANGE, a.seed)?;
    let single_point = check_mapped_to_single_point(&net, &ns, a.samples.clamp(1, 100), a.seed)?;
    let passed = residual <= TOLERANCE
        && null_property.max_output_deviation <= TOLERANCE
        && null_property.argmax_flips == 0
        && single_point.max_pair_deviation <= TOLERANCE;
    let report = NullspaceReport {
        command: "nullspace",
        model_sha256: sha,
        widths: net.widths(),
        dimension: ns.dim(),
        ambient_dim: ns.ambient_dim(),
        rank_first_layer: ns.rank_of_first_layer(),
        source_layer: ns.source_layer(),
        orthonormality_error: ns.basis().orthonormality_error(),
        max_relative_residual: residual,
        null_property,
        single_point,
        tolerance: TOLERANCE,
        passed,
    };
    out.finish(&report)?;
    Ok(Outcome::from_pass(passed))
}

#[derive(Serialize)]
struct StegoOut {
    command: &'static str,
    model_sha256: String,
    hidden_index: usize,
    hidden_label: usize,
    cover_index: usize,
    cover_label: usize,
    alpha1: f64,
    alpha2: f64,
    prediction_on_stego: PredictionOut,
    prediction_on_scaled_hidden: PredictionOut,
    prediction_on_cover: PredictionOut,
    verification: StegoReport,
    stego_range: (f64, f64),
    images: Vec<String>,
    tolerance: f64,
    passed: bool,
}

fn dataset_image(data: &LabeledDataset<f64>, index: usize, flag: &str) -> Result<Vector64> {
    if index >= data.len() {
        bail!("--{flag} {index} is out of range (dataset has {} images)", data.len());
    }
    Ok(data.image_vector(index))
}

fn stego(a: &StegoArgs, command: &Command) -> Result<Outcome> {
    let (net, sha) = load_model(&a.model)?;
    let data = load_data(&a.data, a.split.into())?;
    let hidden = dataset_image(&data, a.hidden_index, "hidden-index")?;
    let cover = dataset_image(&data, a.cover_index, "cover-index")?;
    let out = OutDir::create(a.out.as_deref(), command, vec![("model", sha.clone())])?;

    let ns = NetworkNullSpace::extract(&net)?;
    let art = compose_stego(&net, &ns, &hidden, &cover, a.alpha1)?;
    let hidden_label = data.label(a.hidden_index);
    let verification = verify_stego(&net, &art, Some(hidden_label))?;

    let shape = data.shape();
    let mut images = Vec::new();
    for (name, img) in [
        ("hidden.pgm", art.hidden.clone()),
        ("cover.pgm", art.cover.clone()),
        ("stego.pgm", art.stego.clone()),
        ("hidden_perp.pgm", fit_to_display(&art.scaled_hidden_perp())),
        ("cover_null.pgm", fit_to_display(&art.cover_null)),
    ] {
        images.extend(out.write_pgm(name, &img, shape)?);
    }

    let passed = verification.class_match
        && verification.scaled_hidden_class_match
        && verification.softmax_gap <= TOLERANCE
        && verification.scaled_hidden_gap <= TOLERANCE;
    let report = StegoOut {
        command: "stego",
        model_sha256: sha,
        hidden_index: a.hidden_index,
        hidden_label,
        cover_index: a.cover_index,
        cover_label: data.label(a.cover_index),
        alpha1: art.alpha1,
        alpha2: art.alpha2,
        prediction_on_stego: (&art.prediction_on_stego).into(),
        prediction_on_scaled_hidden: (&art.prediction_on_scaled_hidden).into(),
        prediction_on_cover: (&net.predict(&cover)?).into(),
        verification,
        stego_range: (
            art.stego.min_entry().unwrap_or(0.0),
            art.stego.max_entry().unwrap_or(0.0),
        ),
        images,
        tolerance: TOLERANCE,
        passed,
    };
    out.finish(&report)?;
    Ok(Outcome::from_pass(passed))
}

#[derive(Serialize)]
struct InspectReport {
    command: &'static str,
    model_sha256: String,
    shape: (usize, usize),
    label: Option<usize>,
    prediction_input: PredictionOut,
    prediction_seen: PredictionOut,
    /// Share of the squared norm that lies in the null space.
    unseen_energy_fraction: f64,
    images: Vec<String>,
}

fn inspect(a: &InspectArgs, command: &Command) -> Result<Outcome> {
    let (net, sha) = load_model(&a.model)?;
    let (image, shape, label) = match (&a.image, a.index, &a.data_dir) {
        (Some(path), _, _) => {
            let (h, w, v) = decode_image::<f64>(path).with_context(|| format!("reading {}", path.display()))?;
            (v, (h, w), None)
        }
        (None, Some(index), Some(dir)) => {
            let data = load_split::<f64>(dir, a.split.into(), nullspace_core::dataio::Source::Other)
                .with_context(|| format!("loading dataset from {}", dir.display()))?;
            (
                dataset_image(&data, index, "index")?,
                data.shape(),
                Some(data.label(index)),
            )
        }
        _ => bail!("give --image, or --index together with --data-dir"),
    };
    if image.dim() != net.input_dim() {
        bail!(
            "image has {} pixels but the model expects {}",
            image.dim(),
            net.input_dim()
        );
    }
    let mut inputs = vec![("model", sha.clone())];
    if let Some(path) = &a.image {
        inputs.push(("image", file_sha256(path)?));
    }
    let out = OutDir::create(a.out.as_deref(), command, inputs)?;

    let ns = NetworkNullSpace::extract(&net)?;
    let view = what_nn_sees(&net, &ns, &image)?;
    let mut images = Vec::new();
    for (name, img) in [
        ("input.pgm", &image),
        ("seen.pgm", &view.seen_display),
        ("unseen.pgm", &view.unseen_display),
    ] {
        images.extend(out.write_pgm(name, img, shape)?);
    }
    let total = image.norm().powi(2);
    let report = InspectReport {
        command: "inspect",
        model_sha256: sha,
        shape,
        label,
        prediction_input: (&view.prediction_input).into(),
        prediction_seen: (&view.prediction_seen).into(),
        unseen_energy_fraction: if total > 0.0 {
            view.unseen.norm().powi(2) / total
        } else {
            0.0
        },
        images,
    };
    out.finish(&report)?;
    Ok(Outcome::Ok)
}

#[derive(Serialize)]
struct ConvnullReport {
    command: &'static str,
    kernel: Dims,
    shape: Dims,
    padding: Padding,
    matrix_shape: (usize, usize),
    /// `n1·n2 − (n1−k1+1)(n2−k2+1)` (valid) or 0 (same).
    generic_nullity: usize,
    /// Nullity of the first random kernel of the survey.
    nullity: usize,
    survey: SurveyReport,
    intersection: IntersectionSurvey,
}

fn convnull(a: &ConvnullArgs, command: &Command) -> Result<Outcome> {
    let (k, s) = (a.kernel, a.shape);
    if k.rows > s.rows || k.cols > s.cols {
        bail!("--kernel {k} does not fit in --shape {s}");
    }
    let padding: Padding = a.padding.into();
    let out = OutDir::create(a.out.as_deref(), command, vec![])?;

    let first = Kernel::<f64>::random(k.rows, k.cols, &mut convnull::trial_rng(a.seed, 0))?;
    let op = convnull::lower(&first, s.rows, s.cols, padding)?;
    let report = ConvnullReport {
        command: "convnull",
        kernel: k,
        shape: s,
        padding,
        matrix_shape: op.matrix().shape(),
        generic_nullity: generic_nullity(k.rows, k.cols, s.rows, s.cols, padding),
        nullity: convnull::kernel_nullity(&first, s.rows, s.cols, padding, None)?,
        survey: full_rank_survey::<f64>(s.rows, s.cols, k.rows, k.cols, padding, a.trials, a.seed)?,
        intersection: intersection_survey::<f64>(s.rows, s.cols, k.rows, k.cols, padding, a.kernels, a.trials, a.seed)?,
    };
    out.finish(&report)?;
    Ok(Outcome::Ok)
}
