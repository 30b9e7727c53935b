//! The three probes: PCA-component correlation, pairwise-similarity rank
//! correlation and linear classification.

use std::collections::HashSet;

use ndarray::{Array2, Axis};
use rayon::prelude::*;
use serde::Serialize;

use crate::embed_store::{AlignedDataset, EmbeddingTable};
use crate::error::{Error, Result};
use crate::lexicon::{binary_label, AffectLexicon, Dimension, WordSample};
use crate::linear_probe::{accuracy, predict, split, train, LogisticModel, SplitSpec, TrainConfig};
use crate::numstats::{fit_pca, pairwise_cosine, spearman, transform, CorrelationResult, VadSpace, VectorSpace};

/// Threshold used to binarize ratings for the classifier probe.
pub const BINARIZE_THRESHOLD: f64 = 0.5;

fn check_shared_words(datasets: &[AlignedDataset]) -> Result<()> {
    let first = datasets
        .first()
        .ok_or_else(|| Error::InvalidArgument("no datasets".into()))?;
    if datasets.iter().any(|d| d.words != first.words) {
        return Err(Error::InvalidArgument(
            "datasets do not share one word order; align them together".into(),
        ));
    }
    let mut labels = HashSet::new();
    for d in datasets {
        if !labels.insert(d.label.as_str()) {
            return Err(Error::InvalidArgument(format!("duplicate embedding label `{}`", d.label)));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcaCell {
    pub embedding: String,
    pub dimension: Dimension,
    /// 1-based component number.
    pub component: usize,
    pub result: CorrelationResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterRow {
    pub word: String,
    pub pc1: f64,
    pub pc2: f64,
    pub ratings: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcaSummary {
    pub embedding: String,
    pub eigenvalues: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
    pub scatter: Vec<ScatterRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcaProbeReport {
    pub k: usize,
    pub n_words: usize,
    /// Ordered by embedding, then dimension (V, A, D), then component.
    pub cells: Vec<PcaCell>,
    pub embeddings: Vec<PcaSummary>,
}

/// Correlates each of the top `k` principal-component scores with each
/// rating dimension, for every dataset.
pub fn run_pca_probe(datasets: &[AlignedDataset], k: usize) -> Result<PcaProbeReport> {
    check_shared_words(datasets)?;
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }

    let per: Vec<(Vec<PcaCell>, PcaSummary)> = datasets
        .par_iter()
        .map(|ds| {
            let (n, d) = ds.matrix.dim();
            // the scatter needs two components even when k = 1
            let fit_k = k.max(2).min(n.min(d));
            if fit_k < k {
                return Err(Error::InvalidArgument(format!(
                    "k = {k} exceeds min(N, d) = {} for `{}`",
                    n.min(d),
                    ds.label
                )));
            }
            let model = fit_pca(ds.matrix.view(), fit_k)?;
            let scores = transform(&model, ds.matrix.view())?;

            let mut cells = Vec::with_capacity(3 * k);
            for dim in Dimension::ALL {
                let ratings = ds.ratings.column(dim.index()).to_vec();
                for c in 0..k {
                    let pcs = scores.column(c).to_vec();
                    cells.push(PcaCell {
                        embedding: ds.label.clone(),
                        dimension: dim,
                        component: c + 1,
                        result: spearman(&pcs, &ratings)?,
                    });
                }
            }
            let scatter = ds
                .words
                .iter()
                .enumerate()
                .map(|(i, w)| ScatterRow {
                    word: w.clone(),
                    pc1: scores[[i, 0]],
                    pc2: if fit_k > 1 { scores[[i, 1]] } else { 0.0 },
                    ratings: [ds.ratings[[i, 0]], ds.ratings[[i, 1]], ds.ratings[[i, 2]]],
                })
                .collect();
            let summary = PcaSummary {
                embedding: ds.label.clone(),
                eigenvalues: model.eigenvalues[..k].to_vec(),
                explained_variance_ratio: model.explained_variance_ratio[..k].to_vec(),
                scatter,
            };
            Ok((cells, summary))
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    let mut embeddings = Vec::new();
    for (c, s) in per {
        cells.extend(c);
        embeddings.push(s);
    }
    Ok(PcaProbeReport {
        k,
        n_words: datasets[0].len(),
        cells,
        embeddings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimProbeReport {
    /// The VAD rating space first, then the embedding tables in input order.
    pub labels: Vec<String>,
    pub sample_label: String,
    pub n_words: usize,
    /// Unordered pairs per space, `n (n - 1) / 2`.
    pub n_pairs: usize,
    /// Square, row-major over `labels`.
    pub matrix: Vec<Vec<CorrelationResult>>,
}

impl SimProbeReport {
    pub fn get(&self, a: &str, b: &str) -> Option<&CorrelationResult> {
        let i = self.labels.iter().position(|l| l == a)?;
        let j = self.labels.iter().position(|l| l == b)?;
        Some(&self.matrix[i][j])
    }
}

/// Rank-correlates pairwise cosine similarities of the sample words across
/// the VAD rating space and every embedding table.
pub fn run_similarity_probe(
    sample: &WordSample,
    lexicon: &AffectLexicon,
    tables: &[EmbeddingTable],
) -> Result<SimProbeReport> {
    let vad = VadSpace(lexicon);
    let mut spaces: Vec<&(dyn VectorSpace + Sync)> = vec![&vad];
    spaces.extend(tables.iter().map(|t| t as &(dyn VectorSpace + Sync)));

    let mut seen = HashSet::new();
    for s in &spaces {
        if !seen.insert(s.label()) {
            return Err(Error::InvalidArgument(format!("duplicate space label `{}`", s.label())));
        }
    }

    let sims: Vec<Vec<f64>> = spaces
        .par_iter()
        .map(|s| pairwise_cosine(sample, *s))
        .collect::<Result<_>>()?;
    let m = spaces.len();
    let n_pairs = sims[0].len();

    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| ((i + 1)..m).map(move |j| (i, j))).collect();
    let results: Vec<CorrelationResult> = pairs
        .par_iter()
        .map(|&(i, j)| spearman(&sims[i], &sims[j]))
        .collect::<Result<_>>()?;

    let mut matrix = vec![vec![CorrelationResult::identity(n_pairs); m]; m];
    for (&(i, j), r) in pairs.iter().zip(results) {
        matrix[i][j] = r;
        matrix[j][i] = r;
    }
    Ok(SimProbeReport {
        labels: spaces.iter().map(|s| s.label().to_string()).collect(),
        sample_label: sample.label.clone(),
        n_words: sample.len(),
        n_pairs,
        matrix,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassifierOptions {
    /// Keep test-sample words in the train/validation pool.
    pub allow_test_overlap: bool,
    pub threshold: f64,
}

impl Default for ClassifierOptions {
    fn default() -> Self {
        ClassifierOptions {
            allow_test_overlap: false,
            threshold: BINARIZE_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClfCell {
    pub embedding: String,
    pub dimension: Dimension,
    pub train_n: usize,
    pub validation_n: usize,
    pub test_n: usize,
    pub validation_accuracy: f64,
    pub test_accuracy: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClfProbeReport {
    /// Ordered by embedding, then dimension (V, A, D).
    pub cells: Vec<ClfCell>,
    pub split: SplitSpec,
    pub train: TrainConfig,
    pub options: ClassifierOptions,
    pub test_sample_label: String,
    /// Trained models, parallel to `cells`.
    #[serde(skip)]
    pub models: Vec<LogisticModel>,
}

impl ClfProbeReport {
    pub fn get(&self, embedding: &str, dim: Dimension) -> Option<&ClfCell> {
        self.cells.iter().find(|c| c.embedding == embedding && c.dimension == dim)
    }
}

fn select_rows(m: &Array2<f64>, rows: &[usize]) -> Array2<f64> {
    m.select(Axis(0), rows)
}

/// Trains one logistic probe per (dataset, dimension) on binarized ratings
/// and reports validation and held-out test-sample accuracy.
pub fn run_classifier_probe(
    datasets: &[AlignedDataset],
    lexicon: &AffectLexicon,
    test_sample: &WordSample,
    split_spec: &SplitSpec,
    train_cfg: &TrainConfig,
    options: &ClassifierOptions,
) -> Result<ClfProbeReport> {
    check_shared_words(datasets)?;
    split_spec.validate()?;
    train_cfg.validate()?;
    let base = &datasets[0];

    let not_in_lexicon: Vec<String> = test_sample
        .words()
        .iter()
        .filter(|w| !lexicon.contains(w))
        .cloned()
        .collect();
    if !not_in_lexicon.is_empty() {
        return Err(Error::MissingWords {
            space: "lexicon".into(),
            words: not_in_lexicon,
        });
    }
    let mut test_rows = Vec::with_capacity(test_sample.len());
    let mut not_aligned = Vec::new();
    for w in test_sample.words() {
        match base.row_of(w) {
            Some(r) => test_rows.push(r),
            None => not_aligned.push(w.clone()),
        }
    }
    if !not_aligned.is_empty() {
        return Err(Error::MissingWords {
            space: "aligned embedding vocabulary".into(),
            words: not_aligned,
        });
    }

    let pool: Vec<usize> = if options.allow_test_overlap {
        (0..base.len()).collect()
    } else {
        let test: HashSet<usize> = test_rows.iter().copied().collect();
        (0..base.len()).filter(|i| !test.contains(i)).collect()
    };

    let labels_for = |rows: &[usize], dim: Dimension| -> Vec<u8> {
        rows.iter()
            .map(|&r| binary_label(base.ratings[[r, dim.index()]], options.threshold))
            .collect()
    };

    // one split per dimension, shared by every embedding
    let mut splits = Vec::with_capacity(3);
    for dim in Dimension::ALL {
        let labels = labels_for(&pool, dim);
        let (tr, va) = split(&labels, split_spec)?;
        let train_rows: Vec<usize> = tr.iter().map(|&i| pool[i]).collect();
        let val_rows: Vec<usize> = va.iter().map(|&i| pool[i]).collect();
        splits.push((dim, train_rows, val_rows));
    }

    let jobs: Vec<(usize, usize)> = (0..datasets.len()).flat_map(|d| (0..3).map(move |s| (d, s))).collect();
    let trained: Vec<(ClfCell, LogisticModel)> = jobs
        .par_iter()
        .map(|&(d, s)| {
            let ds = &datasets[d];
            let (dim, train_rows, val_rows) = &splits[s];
            let model = train(
                select_rows(&ds.matrix, train_rows).view(),
                &labels_for(train_rows, *dim),
                train_cfg,
            )?;
            let val_acc = if val_rows.is_empty() {
                f64::NAN
            } else {
                let pred = predict(&model, select_rows(&ds.matrix, val_rows).view())?;
                accuracy(&pred, &labels_for(val_rows, *dim))?
            };
            let pred = predict(&model, select_rows(&ds.matrix, &test_rows).view())?;
            let test_acc = accuracy(&pred, &labels_for(&test_rows, *dim))?;
            let cell = ClfCell {
                embedding: ds.label.clone(),
                dimension: *dim,
                train_n: train_rows.len(),
                validation_n: val_rows.len(),
                test_n: test_rows.len(),
                validation_accuracy: val_acc,
                test_accuracy: test_acc,
                converged: model.converged,
                iterations: model.iterations,
            };
            Ok((cell, model))
        })
        .collect::<Result<_>>()?;
    let (cells, models) = trained.into_iter().unzip();

    Ok(ClfProbeReport {
        cells,
        split: *split_spec,
        train: *train_cfg,
        options: *options,
        test_sample_label: test_sample.label.clone(),
        models,
    })
}
