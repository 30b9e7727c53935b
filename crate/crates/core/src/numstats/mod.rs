//! Numerical core: Jacobi eigensolver, PCA, Spearman correlation and cosine similarity.

pub mod eigen;
mod pca;
mod similarity;
mod spearman;

pub use pca::{fit_pca, transform, PcaModel};
pub use similarity::{condensed_index, cosine, pairwise_cosine, VadSpace, VectorSpace, VAD_LABEL};
pub use spearman::{average_ranks, correlation_p_value, pearson, spearman, CorrelationResult};
