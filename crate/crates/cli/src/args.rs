use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use nullspace_core::convnull::Padding;
use nullspace_core::dataio::{Source, Split};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "nspec", version, about = "Null spaces of fully connected networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Train a network on an IDX dataset plus its rescaled copy.
    Train(TrainArgs),
    /// Extract the null space of a model's first layer and check it.
    Nullspace(NullspaceArgs),
    /// Hide one dataset image's class inside another image.
    Stego(StegoArgs),
    /// Split an image into the part the network sees and the part it ignores.
    Inspect(InspectArgs),
    /// Nullity of convolution layers written as matrices.
    Convnull(ConvnullArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct DataArgs {
    /// Directory holding train-*-ubyte / t10k-*-ubyte IDX files.
    #[arg(long)]
    pub data_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = DatasetName::Mnist)]
    pub dataset: DatasetName,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value = "784,32,16,10")]
    pub widths: Widths,
    #[arg(long, value_enum, default_value_t = ActivationName::Relu)]
    pub activation: ActivationName,
    /// Scale of the augmented copy of every training image.
    #[arg(long, default_value_t = 0.2)]
    pub alpha1: f64,
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.003)]
    pub lr: f64,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0.9)]
    pub momentum: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for model.nspec, manifest.json and report.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct NullspaceArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Random (x, a, v) triples used to check that outputs do not move.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct StegoArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = SplitName::Test)]
    pub split: SplitName,
    #[arg(long)]
    pub hidden_index: usize,
    #[arg(long)]
    pub cover_index: usize,
    #[arg(long, default_value_t = 0.2)]
    pub alpha1: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("input").required(true).args(["image", "index"])))]
pub struct InspectArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Binary PGM image to split.
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// Dataset image to split; needs --data-dir.
    #[arg(long, requires = "data_dir")]
    pub index: Option<usize>,
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SplitName::Test)]
    pub split: SplitName,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ConvnullArgs {
    #[arg(long, default_value = "3x3")]
    pub kernel: Dims,
    /// Input image size.
    #[arg(long, default_value = "28x28")]
    pub shape: Dims,
    #[arg(long, value_enum, default_value_t = PaddingName::Valid)]
    pub padding: PaddingName,
    /// Random kernels per survey; also the number of intersection trials.
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Kernels stacked per intersection trial.
    #[arg(long, default_value_t = 6)]
    pub kernels: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetName {
    Mnist,
    Fmnist,
    Other,
}

impl From<DatasetName> for Source {
    fn from(d: DatasetName) -> Self {
        match d {
            DatasetName::Mnist => Source::Mnist,
            DatasetName::Fmnist => Source::Fmnist,
            DatasetName::Other => Source::Other,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Test,
}

impl From<SplitName> for Split {
    fn from(s: SplitName) -> Self {
        match s {
            SplitName::Train => Split::Train,
            SplitName::Test => Split::Test,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PaddingName {
    Valid,
    Same,
}

impl From<PaddingName> for Padding {
    fn from(p: PaddingName) -> Self {
        match p {
            PaddingName::Valid => Padding::Valid,
            PaddingName::Same => Padding::Same,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationName {
    Relu,
    Sigmoid,
}

impl From<ActivationName> for nullspace_core::network::Activation {
    fn from(a: ActivationName) -> Self {
        match a {
            ActivationName::Relu => Self::Relu,
            ActivationName::Sigmoid => Self::Sigmoid,
        }
    }
}

/// Comma-separated layer widths, input first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Widths(pub Vec<usize>);

impl FromStr for Widths {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let widths = s
            .split(',')
            .map(|w| w.trim().parse::<usize>().map_err(|e| format!("bad width {w:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        if widths.len() < 2 || widths.contains(&0) {
            return Err(format!("need at least two positive widths, got {s:?}"));
        }
        Ok(Widths(widths))
    }
}

impl fmt::Display for Widths {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(usize::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// `ROWSxCOLS`, e.g. `3x3` or `28x28`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(into = "String")]
pub struct Dims {
    pub rows: usize,
    pub cols: usize,
}

impl FromStr for Dims {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (r, c) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected ROWSxCOLS, got {s:?}"))?;
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("bad size {v:?}: {e}"));
        let dims = Dims {
            rows: parse(r)?,
            cols: parse(c)?,
        };
        if dims.rows == 0 || dims.cols == 0 {
            return Err(format!("sizes must be positive, got {s:?}"));
        }
        Ok(dims)
    }
}

impl From<Dims> for String {
    fn from(d: Dims) -> Self {
        d.to_string()
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn widths_parse() {
        assert_eq!("784,32,16,10".parse::<Widths>().unwrap().0, vec![784, 32, 16, 10]);
        assert!("784".parse::<Widths>().is_err());
        assert!("784,0,10".parse::<Widths>().is_err());
        assert!("a,b".parse::<Widths>().is_err());
    }

    #[test]
    fn dims_parse() {
        assert_eq!("3x5".parse::<Dims>().unwrap(), Dims { rows: 3, cols: 5 });
        assert!("3".parse::<Dims>().is_err());
        assert!("0x3".parse::<Dims>().is_err());
    }
}
