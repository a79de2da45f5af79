use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "eccentric",
    version,
    about = "Eccentric regularization toolkit: stationary radii, particle systems, toy autoencoders and latent analysis",
    after_help = "Every subcommand accepts --config FILE with one key=value per line; \
                  command-line flags override file values. ECCENTRIC_THREADS caps the worker count (0 = auto)."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct Common {
    /// Seed for all randomness in the run.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Format of the primary output.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the primary output here, with a manifest beside it.
    #[arg(long, conflicts_with = "out_dir")]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Write every output and a manifest.json into this directory.
    #[arg(long)]
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
    /// Recompute and compare against an existing manifest instead of writing.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", default_value_t = false, action = ArgAction::Set)]
    #[serde(skip)]
    pub verify: bool,
    /// Flat key=value file of option defaults.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Solve the stationary-sphere condition for the radius.
    SolveRadius(SolveRadiusArgs),
    /// Maximum percent deviation of the radius from sqrt(d) over a mu grid.
    SweepRadius(SweepRadiusArgs),
    /// Pairwise repulsion magnitude against distance.
    ForceProfile(ForceProfileArgs),
    /// Check the first-moment identity and the closed-form mode of f_{d,a}.
    LemmaCheck(LemmaCheckArgs),
    /// Gradient descent on the batch loss for a cloud of free points.
    Simulate(SimulateArgs),
    /// Train a dense autoencoder with the eccentric regularizer.
    Train(TrainArgs),
    /// Encode a dataset with a trained model.
    Encode(EncodeArgs),
    /// Covariance spectrum of an embedding.
    Spectrum(SpectrumArgs),
    /// Align two principal-component embeddings by signed permutation.
    Align(AlignArgs),
    /// Row-wise similarity and cross-correlation of two embeddings.
    Metrics(MetricsArgs),
    /// Draw latent samples, optionally decoding them.
    Sample(SampleArgs),
    /// k-nearest-neighbour classification of embeddings.
    Knn(KnnArgs),
    /// Decode the mean latent pushed along each principal direction.
    DecodeComponents(DecodeComponentsArgs),
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::SolveRadius(a) => &a.common,
            Command::SweepRadius(a) => &a.common,
            Command::ForceProfile(a) => &a.common,
            Command::LemmaCheck(a) => &a.common,
            Command::Simulate(a) => &a.common,
            Command::Train(a) => &a.common,
            Command::Encode(a) => &a.common,
            Command::Spectrum(a) => &a.common,
            Command::Align(a) => &a.common,
            Command::Metrics(a) => &a.common,
            Command::Sample(a) => &a.common,
            Command::Knn(a) => &a.common,
            Command::DecodeComponents(a) => &a.common,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::SolveRadius(_) => "solve-radius",
            Command::SweepRadius(_) => "sweep-radius",
            Command::ForceProfile(_) => "force-profile",
            Command::LemmaCheck(_) => "lemma-check",
            Command::Simulate(_) => "simulate",
            Command::Train(_) => "train",
            Command::Encode(_) => "encode",
            Command::Spectrum(_) => "spectrum",
            Command::Align(_) => "align",
            Command::Metrics(_) => "metrics",
            Command::Sample(_) => "sample",
            Command::Knn(_) => "knn",
            Command::DecodeComponents(_) => "decode-components",
        }
    }
}

/// Softening scale: explicit `--big-n`, or derived from `(d, mu)` when absent.
#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ScaleArgs {
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long)]
    pub big_n: Option<f64>,
    /// Derive N from d and mu (the default when --big-n is absent).
    #[arg(long, num_args = 0..=1, default_missing_value = "true", default_value_t = false,
          action = ArgAction::Set, conflicts_with = "big_n")]
    pub auto_n: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SolveRadiusArgs {
    #[arg(long)]
    pub dim: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub scale: ScaleArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SweepRadiusArgs {
    #[arg(long, value_delimiter = ',', default_value = "12,38,117", action = ArgAction::Set)]
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = 0.25)]
    pub mu_step: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ForceProfileArgs {
    /// Latent dimension, used only to derive N.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub scale: ScaleArgs,
    /// Largest distance on the grid; defaults to 3 sqrt(N).
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long, default_value_t = 1001)]
    pub steps: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct LemmaCheckArgs {
    #[arg(long, value_delimiter = ',', default_value = "3,4,5,8,16,64", action = ArgAction::Set)]
    pub dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.5,1.0,1.5,1.95", action = ArgAction::Set)]
    pub a_values: Vec<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SimulateArgs {
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.5)]
    pub step_size: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub scale: ScaleArgs,
    #[arg(long, default_value_t = 0.01)]
    pub init_scale: f64,
    #[arg(long, default_value_t = 50)]
    pub record_every: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataKind {
    GaussianMixture,
    NoisyRing,
    SwissRoll,
    Idx,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct DataArgs {
    #[arg(long, value_enum)]
    pub data: DataKind,
    /// Number of generated items.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Gaussian-mixture cluster count.
    #[arg(long, default_value_t = 3)]
    pub clusters: usize,
    /// Gaussian-mixture feature width.
    #[arg(long, default_value_t = 2)]
    pub data_dim: usize,
    #[arg(long, default_value_t = 2)]
    pub rings: usize,
    #[arg(long, default_value_t = 0.02)]
    pub noise: f64,
    /// Generator seed; defaults to --seed.
    #[arg(long)]
    pub data_seed: Option<u64>,
    #[arg(long)]
    pub images: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Keep only the first LIMIT IDX items.
    #[arg(long)]
    pub limit: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct TrainArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 2)]
    pub latent_dim: usize,
    /// Hidden layer widths of the encoder; the decoder mirrors them.
    #[arg(long, value_delimiter = ',', default_value = "32,32", action = ArgAction::Set)]
    pub hidden: Vec<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub scale: ScaleArgs,
    #[arg(long, default_value_t = 100)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub weight_decay: f64,
    #[arg(long, default_value_t = 0.9)]
    pub adam_beta1: f64,
    #[arg(long, default_value_t = 0.999)]
    pub adam_beta2: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub adam_epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    pub holdout_fraction: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct EncodeArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SpectrumArgs {
    /// Embedding CSV (a trailing label column is ignored).
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct AlignArgs {
    /// First embedding of the training items.
    #[arg(long)]
    pub a: PathBuf,
    /// Second embedding of the same training items.
    #[arg(long)]
    pub b: PathBuf,
    /// Held-out items under the first model; correlations are reported on these.
    #[arg(long, requires = "b_test")]
    pub a_test: Option<PathBuf>,
    #[arg(long, requires = "a_test")]
    pub b_test: Option<PathBuf>,
    /// Rotate each embedding onto its own principal axes before aligning.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", default_value_t = true, action = ArgAction::Set)]
    pub principal: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct MetricsArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleKind {
    Standard,
    Matched,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SampleArgs {
    #[arg(long, value_enum, default_value_t = SampleKind::Standard)]
    pub mode: SampleKind,
    #[arg(long)]
    pub n: usize,
    /// Latent width; taken from the reference or model when omitted.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Encoded latents whose Gaussian fit drives matched sampling.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Decode the samples with this model's decoder.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct KnnArgs {
    /// Labelled training embedding.
    #[arg(long)]
    pub train: PathBuf,
    /// Query embedding; its labels, if present, give the error rate.
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct DecodeComponentsArgs {
    /// Latents whose spectrum defines the directions.
    #[arg(long)]
    pub input: PathBuf,
    /// Model whose decoder is used; without it the latents are returned as is.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Multiple of each component's standard deviation.
    #[arg(long, default_value_t = 2.0)]
    pub scale: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}
