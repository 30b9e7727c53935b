//! Probes for affect (valence, arousal, dominance) information in word
//! embedding spaces.
//!
//! The pipeline loads a human-rated affect lexicon and one or more embedding
//! tables, aligns them on their shared vocabulary, and runs three probes:
//!
//! * [`probes::run_pca_probe`]: Spearman correlation between principal
//!   component scores and ratings, plus explained variance;
//! * [`probes::run_similarity_probe`]: Spearman correlation between the
//!   pairwise cosine similarities of a word sample in different spaces;
//! * [`probes::run_classifier_probe`]: logistic-regression probes on
//!   binarized ratings.
//!
//! [`synth`] generates tables with planted signal for calibrating the probes.

pub mod embed_store;
pub mod error;
pub mod lexicon;
pub mod linear_probe;
pub mod numstats;
pub mod probes;
pub mod report;
pub mod synth;

pub use embed_store::{
    aggregate_first_pc, align, parse_embedding_text, parse_embedding_text_filtered, parse_occurrences,
    AggregateOptions, AlignedDataset, EmbeddingTable, OccurrenceSet,
};
pub use error::{Error, Result};
pub use lexicon::{binarize, load_word_sample, parse_lexicon, AffectLexicon, AffectRating, Dimension, WordSample};
pub use linear_probe::{LogisticModel, SplitSpec, TrainConfig};
pub use numstats::{CorrelationResult, PcaModel};
pub use probes::{
    run_classifier_probe, run_pca_probe, run_similarity_probe, ClassifierOptions, ClfProbeReport, PcaProbeReport,
    SimProbeReport,
};
pub use synth::SynthConfig;
