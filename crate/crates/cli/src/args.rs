use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "affect-probe", version, about = "Probe word embeddings for valence, arousal and dominance")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the PCA, similarity and classifier probes and write reports.
    Probe(ProbeArgs),
    /// Check a probe configuration without loading any data.
    Validate(ProbeArgs),
    /// Collapse per-occurrence contextual vectors into one vector per word.
    Aggregate(AggregateArgs),
    /// Generate a synthetic embedding table and lexicon with planted signal.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeKind {
    Pca,
    Similarity,
    Classifier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Md,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ProbeArgs {
    /// TOML config file; flags override its values.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Tab-separated VAD lexicon.
    #[arg(long, value_name = "PATH")]
    pub lexicon: Option<PathBuf>,
    /// Embedding table in GloVe text format (repeatable).
    #[arg(long = "embedding", value_name = "LABEL=PATH")]
    pub embeddings: Vec<String>,
    /// Per-occurrence contextual vectors, aggregated by first PC (repeatable).
    #[arg(long = "occurrences", value_name = "LABEL=PATH")]
    pub occurrences: Vec<String>,
    /// Word sample for the similarity probe.
    #[arg(long, value_name = "PATH")]
    pub sample: Option<PathBuf>,
    /// Held-out word sample for the classifier probe.
    #[arg(long, value_name = "PATH")]
    pub test_sample: Option<PathBuf>,
    /// Probes to run; defaults to every probe whose inputs are given.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub probes: Vec<ProbeKind>,
    /// Number of principal components [default: 2].
    #[arg(long)]
    pub k: Option<usize>,
    /// Seed for the train/validation split [default: 42].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Training share of the classifier pool [default: 0.7].
    #[arg(long, value_name = "FLOAT")]
    pub train_frac: Option<f64>,
    /// L2 penalty of the logistic probe [default: 0.01].
    #[arg(long, value_name = "FLOAT")]
    pub l2: Option<f64>,
    /// Gradient-descent iteration cap [default: 2000].
    #[arg(long, value_name = "N")]
    pub max_iter: Option<usize>,
    /// Stop once the largest gradient component falls below this [default: 1e-6].
    #[arg(long, value_name = "FLOAT")]
    pub grad_tol: Option<f64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Extra report formats besides CSV (repeatable).
    #[arg(long = "format", value_name = "FORMAT")]
    pub formats: Vec<Format>,
    /// Write PCA scatter plots as SVG.
    #[arg(long)]
    pub plots: bool,
    /// Keep test-sample words in the classifier's training pool.
    #[arg(long)]
    pub allow_test_overlap: bool,
    /// Aggregate occurrences without subtracting their mean.
    #[arg(long)]
    pub no_center_aggregation: bool,
    /// Save trained classifier models under `<out>/models`.
    #[arg(long)]
    pub save_models: bool,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// Occurrence file (`word<TAB>v1 v2 ...`).
    pub input: PathBuf,
    /// Output embedding-text file.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[arg(long)]
    pub no_center_aggregation: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_name = "N")]
    pub n_words: usize,
    #[arg(long, value_name = "D")]
    pub dim: usize,
    #[arg(long, default_value_t = 0.0)]
    pub snr_valence: f64,
    #[arg(long, default_value_t = 0.0)]
    pub snr_arousal: f64,
    #[arg(long, default_value_t = 0.0)]
    pub snr_dominance: f64,
    #[arg(long, default_value_t = 1.0)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Take words and ratings from this lexicon instead of sampling them.
    #[arg(long, value_name = "PATH")]
    pub lexicon: Option<PathBuf>,
    /// Output directory for `synth_embeddings.txt` and `synth_lexicon.tsv`.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}
