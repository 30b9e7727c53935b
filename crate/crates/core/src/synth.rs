//! Synthetic embedding tables with affect signal planted along known axes.
//!
//! For word `w` with ratings `r_V, r_A, r_D` the vector is
//!
//! ```text
//! x(w) = snr_V (r_V - 0.5) e_0 + snr_A (r_A - 0.5) e_1 + snr_D (r_D - 0.5) e_2 + noise
//! ```
//!
//! with `e_k` the coordinate axes and `noise ~ N(0, sigma² I)`.
//!
//! Randomness is reproducible from the generator name alone: each word gets
//! its own SplitMix64 stream whose state is `base XOR word_index` (0-based),
//! where `base` is the first output of SplitMix64 seeded with `seed`. Mixing
//! the seed first keeps streams for different seeds disjoint; a plain
//! `seed XOR index` would only permute the same streams across words. Without a lexicon the stream first yields three ratings as
//! `(next_u64 >> 11) * 2^-53`, then Gaussian noise is drawn in Box–Muller
//! pairs `u1 = 1 - uniform`, `u2 = uniform`,
//! `(sqrt(-2 ln u1) cos 2πu2, sqrt(-2 ln u1) sin 2πu2)`.

use std::f64::consts::TAU;

use ndarray::Array2;
use rand::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::Serialize;

use crate::embed_store::EmbeddingTable;
use crate::error::{Error, Result};
use crate::lexicon::{AffectLexicon, AffectRating, Dimension};

pub const GENERATOR_NAME: &str = "splitmix64-mixed-seed-xor-index/box-muller";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SynthConfig {
    pub n_words: usize,
    pub dim: usize,
    /// Signal strength per dimension, indexed by [`Dimension::index`].
    pub snr: [f64; 3],
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SynthConfig {
    pub fn new(n_words: usize, dim: usize, seed: u64) -> Self {
        SynthConfig {
            n_words,
            dim,
            snr: [0.0; 3],
            noise_sigma: 1.0,
            seed,
        }
    }

    pub fn with_snr(mut self, dim: Dimension, snr: f64) -> Self {
        self.snr[dim.index()] = snr;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_words < 10 {
            return Err(Error::InvalidArgument(format!("n_words {} must be >= 10", self.n_words)));
        }
        if self.dim < 4 {
            return Err(Error::InvalidArgument(format!("dim {} must be >= 4", self.dim)));
        }
        if self.snr.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::InvalidArgument("snr values must be finite and >= 0".into()));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma > 0.0) {
            return Err(Error::InvalidArgument("noise_sigma must be > 0".into()));
        }
        Ok(())
    }

    /// `#` comment header recording the generator and configuration.
    pub fn header(&self) -> String {
        format!(
            "# affect-probe synth generator={} seed={} n_words={} dim={} snr_valence={} snr_arousal={} snr_dominance={} noise_sigma={}",
            GENERATOR_NAME,
            self.seed,
            self.n_words,
            self.dim,
            self.snr[0],
            self.snr[1],
            self.snr[2],
            self.noise_sigma
        )
    }
}

fn uniform(rng: &mut SplitMix64) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn fill_normal(rng: &mut SplitMix64, out: &mut [f64]) {
    for pair in out.chunks_mut(2) {
        let u1 = 1.0 - uniform(rng);
        let u2 = uniform(rng);
        let r = (-2.0 * u1.ln()).sqrt();
        pair[0] = r * (TAU * u2).cos();
        if let Some(second) = pair.get_mut(1) {
            *second = r * (TAU * u2).sin();
        }
    }
}

/// Synthetic word name for a 0-based index: `w000001`, `w000002`, ...
pub fn synth_word(index: usize) -> String {
    format!("w{:06}", index + 1)
}

/// Generates a table with planted signal and the lexicon it was planted from.
///
/// With `lexicon`, the first `n_words` entries (lexicographic order) supply
/// words and ratings; otherwise ratings are drawn uniformly on `[0, 1)`.
pub fn generate(config: &SynthConfig, lexicon: Option<&AffectLexicon>) -> Result<(EmbeddingTable, AffectLexicon)> {
    config.validate()?;
    let given: Option<Vec<&AffectRating>> = match lexicon {
        Some(lex) => {
            if config.n_words > lex.len() {
                return Err(Error::InvalidArgument(format!(
                    "n_words {} exceeds lexicon size {}",
                    config.n_words,
                    lex.len()
                )));
            }
            Some(lex.iter().take(config.n_words).collect())
        }
        None => None,
    };

    let base = SplitMix64::seed_from_u64(config.seed).next_u64();
    let rows: Vec<(AffectRating, Vec<f64>)> = (0..config.n_words)
        .into_par_iter()
        .map(|i| {
            let mut rng = SplitMix64::seed_from_u64(base ^ i as u64);
            let rating = match &given {
                Some(g) => g[i].clone(),
                None => AffectRating {
                    word: synth_word(i),
                    valence: uniform(&mut rng),
                    arousal: uniform(&mut rng),
                    dominance: uniform(&mut rng),
                },
            };
            let mut v = vec![0.0; config.dim];
            fill_normal(&mut rng, &mut v);
            v.iter_mut().for_each(|x| *x *= config.noise_sigma);
            for (axis, r) in rating.as_array().iter().enumerate() {
                v[axis] += config.snr[axis] * (r - 0.5);
            }
            (rating, v)
        })
        .collect();

    let mut vectors = Array2::zeros((config.n_words, config.dim));
    let mut words = Vec::with_capacity(config.n_words);
    let mut ratings = Vec::with_capacity(config.n_words);
    for (i, (rating, v)) in rows.into_iter().enumerate() {
        vectors.row_mut(i).assign(&ndarray::ArrayView1::from(&v));
        words.push(rating.word.clone());
        ratings.push(rating);
    }
    let table = EmbeddingTable::new("synth", words, vectors)?;
    let lexicon = AffectLexicon::from_ratings(ratings)?;
    Ok((table, lexicon))
}
