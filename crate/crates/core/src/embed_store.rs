//! Embedding tables, per-occurrence contextual vectors and vocabulary alignment.
//!
//! Two text formats are read here:
//!
//! * embedding text (GloVe layout): `word v1 v2 ... vd`, space separated,
//!   no header;
//! * occurrence exchange: `word<TAB>v1 v2 ... vd`, one contextual
//!   occurrence per line, words may repeat.
//!
//! Both accept `#` comment lines before the first data line.

use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lexicon::AffectLexicon;
use crate::numstats::eigen::top_eigenvector;
use crate::numstats::VectorSpace;

/// A word → vector table with a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    label: String,
    words: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Array2<f64>,
}

impl EmbeddingTable {
    /// Builds a table; rows of `vectors` follow `words`.
    pub fn new(label: impl Into<String>, words: Vec<String>, vectors: Array2<f64>) -> Result<Self> {
        if words.len() != vectors.nrows() {
            return Err(Error::LengthMismatch {
                left: words.len(),
                right: vectors.nrows(),
            });
        }
        if words.is_empty() {
            return Err(Error::Empty("no vectors"));
        }
        if vectors.ncols() == 0 {
            return Err(Error::InvalidArgument("embedding dimension must be positive".into()));
        }
        let mut index = HashMap::with_capacity(words.len());
        let mut folded = Vec::with_capacity(words.len());
        for (i, w) in words.into_iter().enumerate() {
            let w = w.to_lowercase();
            if vectors.row(i).iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { line: i + 1 });
            }
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::DuplicateWord { line: i + 1, word: w });
            }
            folded.push(w);
        }
        Ok(EmbeddingTable {
            label: label.into(),
            words: folded,
            index,
            vectors,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = label.into();
    }

    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Words in insertion (file) order.
    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn get(&self, word: &str) -> Option<ArrayView1<'_, f64>> {
        self.index.get(word).map(|&i| self.vectors.row(i))
    }

    pub fn vectors(&self) -> ArrayView2<'_, f64> {
        self.vectors.view()
    }

    /// Writes the table in embedding-text format, one word per line in
    /// table order, components in shortest round-trip notation.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        for (w, row) in self.words.iter().zip(self.vectors.outer_iter()) {
            out.write_all(w.as_bytes())?;
            for v in row {
                write!(out, " {v}")?;
            }
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

impl VectorSpace for EmbeddingTable {
    fn label(&self) -> &str {
        &self.label
    }

    fn vector(&self, word: &str) -> Option<Cow<'_, [f64]>> {
        self.get(word).map(|row| match row.to_slice() {
            Some(s) => Cow::Borrowed(s),
            None => Cow::Owned(row.to_vec()),
        })
    }
}

fn parse_components(line: usize, tokens: &[&str], out: &mut Vec<f64>) -> Result<()> {
    for tok in tokens {
        let v: f64 = tok.parse().map_err(|_| Error::InvalidNumber {
            line,
            token: (*tok).to_string(),
        })?;
        if !v.is_finite() {
            return Err(Error::NonFinite { line });
        }
        out.push(v);
    }
    Ok(())
}

/// Parses an embedding-text stream.
pub fn parse_embedding_text<R: BufRead>(reader: R, label: &str) -> Result<EmbeddingTable> {
    parse_embedding_text_filtered(reader, label, |_| true)
}

/// Parses an embedding-text stream, keeping only words accepted by `keep`
/// (called with the lowercased word). Every line is still checked for a
/// consistent dimension; values of skipped lines are not parsed.
pub fn parse_embedding_text_filtered<R, F>(reader: R, label: &str, keep: F) -> Result<EmbeddingTable>
where
    R: BufRead,
    F: Fn(&str) -> bool,
{
    let mut dim: Option<usize> = None;
    let mut words = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut flat = Vec::new();
    let mut seen_data = false;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if !seen_data && line.starts_with('#') {
            continue;
        }
        seen_data = true;

        let tokens: Vec<&str> = line.split_ascii_whitespace().collect();
        let found = tokens.len() - 1;
        if found == 0 {
            return Err(Error::BadLine {
                line: lineno,
                msg: "word without vector components".into(),
            });
        }
        let expected = *dim.get_or_insert(found);
        if found != expected {
            return Err(Error::DimensionMismatch {
                line: lineno,
                expected,
                found,
            });
        }
        let word = tokens[0].to_lowercase();
        if !keep(&word) {
            continue;
        }
        if index.contains_key(&word) {
            return Err(Error::DuplicateWord { line: lineno, word });
        }
        parse_components(lineno, &tokens[1..], &mut flat)?;
        index.insert(word.clone(), words.len());
        words.push(word);
    }

    let dim = dim.ok_or(Error::Empty("no vectors"))?;
    if words.is_empty() {
        return Err(Error::Empty("no vectors"));
    }
    let vectors = Array2::from_shape_vec((words.len(), dim), flat).expect("row-major shape");
    Ok(EmbeddingTable {
        label: label.to_string(),
        words,
        index,
        vectors,
    })
}

/// Per-word lists of contextual occurrence vectors, awaiting aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct OccurrenceSet {
    dim: usize,
    // row-major occurrence vectors, file order per word
    occurrences: BTreeMap<String, Vec<f64>>,
}

impl OccurrenceSet {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("occurrence dimension must be positive".into()));
        }
        Ok(OccurrenceSet {
            dim,
            occurrences: BTreeMap::new(),
        })
    }

    pub fn push(&mut self, word: &str, vector: &[f64]) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::LengthMismatch {
                left: vector.len(),
                right: self.dim,
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite occurrence for `{word}`"
            )));
        }
        self.occurrences
            .entry(word.to_lowercase())
            .or_default()
            .extend_from_slice(vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of distinct words.
    pub fn len(&self) -> usize {
        self.occurrences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occurrences.is_empty()
    }

    pub fn count(&self, word: &str) -> usize {
        self.occurrences.get(word).map_or(0, |v| v.len() / self.dim)
    }

    /// Occurrence matrix of one word, rows in file order.
    pub fn matrix(&self, word: &str) -> Option<ArrayView2<'_, f64>> {
        self.occurrences.get(word).map(|flat| {
            ArrayView2::from_shape((flat.len() / self.dim, self.dim), flat).expect("row-major shape")
        })
    }

    /// Words in lexicographic order.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.occurrences.keys().map(String::as_str)
    }
}

/// Parses the occurrence exchange format (`word<TAB>v1 v2 ... vd`).
pub fn parse_occurrences<R: BufRead>(reader: R) -> Result<OccurrenceSet> {
    let mut set: Option<OccurrenceSet> = None;
    let mut buf = Vec::new();
    let mut seen_data = false;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if !seen_data && line.starts_with('#') {
            continue;
        }
        seen_data = true;

        let Some((word, rest)) = line.split_once('\t') else {
            return Err(Error::MalformedLine {
                line: lineno,
                expected: 2,
                found: 1,
            });
        };
        let word = word.trim();
        if word.is_empty() {
            return Err(Error::BadLine {
                line: lineno,
                msg: "empty word".into(),
            });
        }
        let tokens: Vec<&str> = rest.split_ascii_whitespace().collect();
        if tokens.is_empty() {
            return Err(Error::BadLine {
                line: lineno,
                msg: "word without vector components".into(),
            });
        }
        let set = match &mut set {
            Some(s) => s,
            None => set.insert(OccurrenceSet::new(tokens.len())?),
        };
        if tokens.len() != set.dim {
            return Err(Error::DimensionMismatch {
                line: lineno,
                expected: set.dim,
                found: tokens.len(),
            });
        }
        buf.clear();
        parse_components(lineno, &tokens, &mut buf)?;
        set.push(word, &buf)?;
    }
    set.ok_or(Error::Empty("no occurrences"))
}

/// How occurrence matrices are reduced to a single direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AggregateOptions {
    /// Subtract the per-word mean occurrence before extracting the first PC.
    pub center: bool,
}

impl Default for AggregateOptions {
    fn default() -> Self {
        AggregateOptions { center: true }
    }
}

// relative threshold below which a centered occurrence matrix counts as constant
const ZERO_VARIANCE_REL: f64 = 1e-24;
// relative threshold below which the PC is treated as orthogonal to the mean
const SIGN_TIE_REL: f64 = 1e-12;

fn unit(mut v: Array1<f64>, word: &str) -> Result<Array1<f64>> {
    let n = v.dot(&v).sqrt();
    if n == 0.0 {
        return Err(Error::ZeroVector(word.to_string()));
    }
    v /= n;
    Ok(v)
}

/// Reduces one word's occurrence matrix to a unit vector.
///
/// * one occurrence: the occurrence itself, normalized;
/// * several: the first principal direction of the (centered) occurrence
///   matrix, oriented so its dot product with the mean occurrence is
///   non-negative, falling back to the first nonzero coordinate being
///   positive when the direction is orthogonal to the mean;
/// * constant occurrences: the normalized mean.
pub fn aggregate_word(word: &str, occ: ArrayView2<f64>, opts: AggregateOptions) -> Result<Array1<f64>> {
    let m = occ.nrows();
    if m == 0 {
        return Err(Error::Empty("word has no occurrences"));
    }
    if m == 1 {
        return unit(occ.row(0).to_owned(), word);
    }

    let mean = occ.mean_axis(Axis(0)).expect("m >= 2");
    let x = if opts.center {
        &occ - &mean
    } else {
        occ.to_owned()
    };
    let energy: f64 = x.iter().map(|v| v * v).sum();
    let scale: f64 = occ.iter().map(|v| v * v).sum();
    if energy <= ZERO_VARIANCE_REL * scale {
        return unit(mean, word);
    }

    // eigen-solve on whichever of XᵀX (d×d) or XXᵀ (m×m) is smaller
    let mut dir = if m < x.ncols() {
        let gram = x.dot(&x.t());
        let (_, a) = top_eigenvector(gram.view())?;
        x.t().dot(&a)
    } else {
        let scatter = x.t().dot(&x);
        top_eigenvector(scatter.view())?.1
    };
    dir = unit(dir, word)?;

    let d = dir.dot(&mean);
    let tie = SIGN_TIE_REL * mean.dot(&mean).sqrt();
    let flip = if d.abs() > tie {
        d < 0.0
    } else {
        dir.iter().find(|v| v.abs() > SIGN_TIE_REL).is_some_and(|&v| v < 0.0)
    };
    if flip {
        dir.mapv_inplace(|v| -v);
    }
    Ok(dir)
}

/// Collapses every word's occurrences into a single unit vector; words come
/// out in lexicographic order.
pub fn aggregate_first_pc(occ: &OccurrenceSet, label: &str, opts: AggregateOptions) -> Result<EmbeddingTable> {
    let words: Vec<&str> = occ.words().collect();
    let rows: Vec<Array1<f64>> = words
        .par_iter()
        .map(|w| aggregate_word(w, occ.matrix(w).expect("listed word"), opts))
        .collect::<Result<_>>()?;
    let dim = occ.dim();
    let mut vectors = Array2::zeros((rows.len(), dim));
    for (i, r) in rows.iter().enumerate() {
        vectors.row_mut(i).assign(r);
    }
    EmbeddingTable::new(label, words.into_iter().map(str::to_string).collect(), vectors)
}

/// One embedding space restricted to the shared vocabulary, with ratings.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedDataset {
    pub label: String,
    /// Sorted lexicographically; identical across datasets from one `align` call.
    pub words: Vec<String>,
    /// `N × d`, row `i` is the vector of `words[i]`.
    pub matrix: Array2<f64>,
    /// `N × 3`, columns valence, arousal, dominance.
    pub ratings: Array2<f64>,
}

impl AlignedDataset {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn row_of(&self, word: &str) -> Option<usize> {
        self.words.binary_search_by(|w| w.as_str().cmp(word)).ok()
    }
}

/// Restricts every table and the lexicon to their common vocabulary.
pub fn align(tables: &[EmbeddingTable], lexicon: &AffectLexicon) -> Result<Vec<AlignedDataset>> {
    if tables.is_empty() {
        return Err(Error::InvalidArgument("no embedding tables to align".into()));
    }
    if lexicon.is_empty() {
        return Err(Error::Empty("no entries"));
    }
    let words: Vec<String> = lexicon
        .words()
        .filter(|w| tables.iter().all(|t| t.contains(w)))
        .map(str::to_string)
        .collect();
    if words.is_empty() {
        return Err(Error::EmptyIntersection);
    }

    let mut ratings = Array2::zeros((words.len(), 3));
    for (i, w) in words.iter().enumerate() {
        let r = lexicon.get(w).expect("lexicon word");
        ratings.row_mut(i).assign(&ArrayView1::from(&r.as_array()));
    }

    Ok(tables
        .iter()
        .map(|t| {
            let mut matrix = Array2::zeros((words.len(), t.dim()));
            for (i, w) in words.iter().enumerate() {
                matrix.row_mut(i).assign(&t.get(w).expect("aligned word"));
            }
            AlignedDataset {
                label: t.label().to_string(),
                words: words.clone(),
                matrix,
                ratings: ratings.clone(),
            }
        })
        .collect())
}
