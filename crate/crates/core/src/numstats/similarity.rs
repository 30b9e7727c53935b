use std::borrow::Cow;

use crate::error::{Error, Result};
use crate::lexicon::{AffectLexicon, WordSample};

/// Anything that maps words to vectors.
pub trait VectorSpace {
    fn label(&self) -> &str;
    fn vector(&self, word: &str) -> Option<Cow<'_, [f64]>>;
}

/// The lexicon viewed as raw `(V, A, D)` 3-vectors.
#[derive(Debug, Clone, Copy)]
pub struct VadSpace<'a>(pub &'a AffectLexicon);

pub const VAD_LABEL: &str = "VAD";

impl VectorSpace for VadSpace<'_> {
    fn label(&self) -> &str {
        VAD_LABEL
    }

    fn vector(&self, word: &str) -> Option<Cow<'_, [f64]>> {
        self.0.get(word).map(|r| Cow::Owned(r.as_array().to_vec()))
    }
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Cosine similarity, clamped to `[-1, 1]`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    // sqrt(a * b) rather than sqrt(a) * sqrt(b) keeps cosine(v, v) exactly 1
    let (nu, nv) = (sq_norm(u), sq_norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::InvalidArgument("cosine of a zero vector".into()));
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    Ok((dot / (nu * nv).sqrt()).clamp(-1.0, 1.0))
}

/// Index of pair `(i, j)`, `i < j`, in a condensed vector over `n` items.
pub fn condensed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Cosine similarity of every unordered word pair, in `(i, j)`, `i < j`
/// order over the sample. Length is `n (n - 1) / 2`.
pub fn pairwise_cosine(sample: &WordSample, space: &dyn VectorSpace) -> Result<Vec<f64>> {
    let n = sample.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "pairwise similarity needs at least 3 words, got {n}"
        )));
    }
    let mut missing = Vec::new();
    let mut vectors = Vec::with_capacity(n);
    for w in sample.words() {
        match space.vector(w) {
            Some(v) => vectors.push(v),
            None => missing.push(w.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingWords {
            space: space.label().to_string(),
            words: missing,
        });
    }

    let mut norms = Vec::with_capacity(n);
    for (w, v) in sample.words().iter().zip(&vectors) {
        let nv = sq_norm(v);
        if nv == 0.0 {
            return Err(Error::ZeroVector(w.clone()));
        }
        norms.push(nv);
    }

    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let dot: f64 = vectors[i].iter().zip(vectors[j].iter()).map(|(a, b)| a * b).sum();
            out.push((dot / (norms[i] * norms[j]).sqrt()).clamp(-1.0, 1.0));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    use std::collections::HashMap;

    struct MapSpace(HashMap<String, Vec<f64>>);

    impl VectorSpace for MapSpace {
        fn label(&self) -> &str {
            "map"
        }
        fn vector(&self, word: &str) -> Option<Cow<'_, [f64]>> {
            self.0.get(word).map(|v| Cow::Borrowed(v.as_slice()))
        }
    }

    fn space(rows: &[(&str, Vec<f64>)]) -> MapSpace {
        MapSpace(rows.iter().map(|(w, v)| (w.to_string(), v.clone())).collect())
    }

    fn sample(words: &[&str]) -> WordSample {
        WordSample::new("t", words.iter().map(|w| w.to_string()).collect()).unwrap()
    }

    #[test]
    fn cosine_basics() {
        assert_eq!(cosine(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert_eq!(cosine(&[0.1, 0.7, -0.3], &[0.1, 0.7, -0.3]).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(cosine(&[1.0, 0.0], &[-1.0, 0.0]).unwrap(), -1.0);
        assert!(cosine(&[0.0, 0.0], &[1.0, 0.0]).is_err());
        assert!(cosine(&[1.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn condensed_order() {
        let s = space(&[
            ("a", vec![1.0, 0.0]),
            ("b", vec![0.0, 1.0]),
            ("c", vec![1.0, 1.0]),
        ]);
        let v = pairwise_cosine(&sample(&["a", "b", "c"]), &s).unwrap();
        let h = 0.5f64.sqrt();
        assert_eq!(v.len(), 3);
        assert_eq!(v[0], 0.0);
        assert!((v[1] - h).abs() < 1e-15);
        assert!((v[2] - h).abs() < 1e-15);
        let n = 5;
        let mut k = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                assert_eq!(condensed_index(n, i, j), k);
                k += 1;
            }
        }
    }

    #[test]
    fn eighty_words_give_3160_pairs() {
        let rows: Vec<(String, Vec<f64>)> = (0..80)
            .map(|i| (format!("w{i}"), vec![1.0, i as f64]))
            .collect();
        let s = MapSpace(rows.into_iter().collect());
        let words: Vec<String> = (0..80).map(|i| format!("w{i}")).collect();
        let v = pairwise_cosine(&WordSample::new("s", words).unwrap(), &s).unwrap();
        assert_eq!(v.len(), 3160);
    }

    #[test]
    fn missing_words_listed() {
        let s = space(&[("a", vec![1.0])]);
        match pairwise_cosine(&sample(&["a", "x", "y"]), &s).unwrap_err() {
            Error::MissingWords { words, .. } => assert_eq!(words, ["x", "y"]),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn zero_vector_named() {
        let s = space(&[
            ("a", vec![1.0, 0.0]),
            ("b", vec![0.0, 0.0]),
            ("c", vec![1.0, 1.0]),
        ]);
        assert!(matches!(
            pairwise_cosine(&sample(&["a", "b", "c"]), &s),
            Err(Error::ZeroVector(w)) if w == "b"
        ));
    }

    #[test]
    fn identical_vectors_give_constant_similarities() {
        let s = space(&[
            ("a", vec![1.0, 2.0]),
            ("b", vec![1.0, 2.0]),
            ("c", vec![1.0, 2.0]),
        ]);
        let v = pairwise_cosine(&sample(&["a", "b", "c"]), &s).unwrap();
        assert!(matches!(
            crate::numstats::spearman(&v, &[0.1, 0.2, 0.3]),
            Err(Error::ConstantInput)
        ));
    }
}
