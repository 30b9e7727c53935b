//! Human-rated affect lexicon (valence, arousal, dominance) and curated word samples.
//!
//! The lexicon file is tab separated, `word<TAB>V<TAB>A<TAB>D`, with an
//! optional header line and optional leading `#` comment lines. Words are
//! case-folded to lowercase on ingestion.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use serde::Serialize;

use crate::error::{Error, Result};

/// One of the three affect dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    Valence,
    Arousal,
    Dominance,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [Dimension::Valence, Dimension::Arousal, Dimension::Dominance];

    /// Column index of this dimension in a `(V, A, D)` triple.
    pub fn index(self) -> usize {
        match self {
            Dimension::Valence => 0,
            Dimension::Arousal => 1,
            Dimension::Dominance => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Dimension::Valence => "valence",
            Dimension::Arousal => "arousal",
            Dimension::Dominance => "dominance",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffectRating {
    pub word: String,
    pub valence: f64,
    pub arousal: f64,
    pub dominance: f64,
}

impl AffectRating {
    pub fn get(&self, dim: Dimension) -> f64 {
        match dim {
            Dimension::Valence => self.valence,
            Dimension::Arousal => self.arousal,
            Dimension::Dominance => self.dominance,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.valence, self.arousal, self.dominance]
    }
}

/// Word → rating map. Iteration order is lexicographic by word.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AffectLexicon {
    entries: BTreeMap<String, AffectRating>,
    skipped_multiword: usize,
}

impl AffectLexicon {
    /// Builds a lexicon from ratings, validating every entry.
    pub fn from_ratings<I>(ratings: I) -> Result<Self>
    where
        I: IntoIterator<Item = AffectRating>,
    {
        let mut entries = BTreeMap::new();
        for (i, mut r) in ratings.into_iter().enumerate() {
            let line = i + 1;
            r.word = r.word.to_lowercase();
            if r.word.is_empty() || r.word.chars().any(char::is_whitespace) {
                return Err(Error::BadLine {
                    line,
                    msg: format!("invalid word `{}`", r.word),
                });
            }
            for v in r.as_array() {
                check_rating(line, v)?;
            }
            if entries.contains_key(&r.word) {
                return Err(Error::DuplicateWord { line, word: r.word });
            }
            entries.insert(r.word.clone(), r);
        }
        if entries.is_empty() {
            return Err(Error::Empty("no entries"));
        }
        Ok(AffectLexicon {
            entries,
            skipped_multiword: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&AffectRating> {
        self.entries.get(word)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn iter(&self) -> impl Iterator<Item = &AffectRating> {
        self.entries.values()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Number of multi-word expressions dropped while parsing.
    pub fn skipped_multiword(&self) -> usize {
        self.skipped_multiword
    }

    /// Writes the lexicon in its canonical tab-separated form (no header).
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        for r in self.entries.values() {
            writeln!(out, "{}\t{}\t{}\t{}", r.word, r.valence, r.arousal, r.dominance)?;
        }
        Ok(())
    }
}

fn check_rating(line: usize, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::NonFinite { line });
    }
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::RatingOutOfRange { line, value });
    }
    Ok(())
}

fn parse_field(line: usize, token: &str) -> Result<f64> {
    let value: f64 = token.trim().parse().map_err(|_| Error::InvalidNumber {
        line,
        token: token.to_string(),
    })?;
    check_rating(line, value)?;
    Ok(value)
}

/// Parses a tab-separated VAD lexicon.
///
/// The first data line is treated as a header when its second field is not
/// numeric. Leading `#` lines and blank lines are ignored. Entries whose word
/// contains internal whitespace (multi-word expressions) are skipped and
/// counted in [`AffectLexicon::skipped_multiword`].
pub fn parse_lexicon<R: BufRead>(reader: R) -> Result<AffectLexicon> {
    let mut entries = BTreeMap::new();
    let mut skipped_multiword = 0;
    let mut seen_data = false;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if !seen_data && line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let first = !seen_data;
        seen_data = true;

        if first && fields.len() >= 2 && fields[1].trim().parse::<f64>().is_err() {
            continue;
        }
        if fields.len() != 4 {
            return Err(Error::MalformedLine {
                line: lineno,
                expected: 4,
                found: fields.len(),
            });
        }

        let word = fields[0].trim().to_lowercase();
        if word.is_empty() {
            return Err(Error::BadLine {
                line: lineno,
                msg: "empty word".into(),
            });
        }
        if word.chars().any(char::is_whitespace) {
            skipped_multiword += 1;
            continue;
        }
        let valence = parse_field(lineno, fields[1])?;
        let arousal = parse_field(lineno, fields[2])?;
        let dominance = parse_field(lineno, fields[3])?;

        if entries.contains_key(&word) {
            return Err(Error::DuplicateWord { line: lineno, word });
        }
        entries.insert(
            word.clone(),
            AffectRating {
                word,
                valence,
                arousal,
                dominance,
            },
        );
    }

    if entries.is_empty() {
        return Err(Error::Empty("no entries"));
    }
    Ok(AffectLexicon {
        entries,
        skipped_multiword,
    })
}

/// Binary label for a rating: 1 iff `rating >= threshold`.
pub fn binary_label(rating: f64, threshold: f64) -> u8 {
    u8::from(rating >= threshold)
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "threshold {threshold} must lie in (0, 1)"
        )))
    }
}

/// Binarizes one dimension of the lexicon; the boundary goes to the high class.
pub fn binarize(
    lexicon: &AffectLexicon,
    dim: Dimension,
    threshold: f64,
) -> Result<BTreeMap<String, u8>> {
    check_threshold(threshold)?;
    Ok(lexicon
        .iter()
        .map(|r| (r.word.clone(), binary_label(r.get(dim), threshold)))
        .collect())
}

/// An ordered list of distinct words, e.g. a curated affect-word sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WordSample {
    pub label: String,
    words: Vec<String>,
}

impl WordSample {
    pub fn new(label: impl Into<String>, words: Vec<String>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut folded = Vec::with_capacity(words.len());
        for (i, w) in words.into_iter().enumerate() {
            let w = w.trim().to_lowercase();
            if !seen.insert(w.clone()) {
                return Err(Error::DuplicateWord { line: i + 1, word: w });
            }
            folded.push(w);
        }
        if folded.is_empty() {
            return Err(Error::Empty("word sample is empty"));
        }
        Ok(WordSample {
            label: label.into(),
            words: folded,
        })
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Reads a word sample: one token per line, `#` lines and blank lines ignored.
pub fn load_word_sample<R: BufRead>(reader: R, label: &str) -> Result<WordSample> {
    let mut seen = HashSet::new();
    let mut words = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let token = line.trim();
        if token.is_empty() || token.starts_with('#') {
            continue;
        }
        let word = token.to_lowercase();
        if !seen.insert(word.clone()) {
            return Err(Error::DuplicateWord {
                line: idx + 1,
                word,
            });
        }
        words.push(word);
    }
    if words.is_empty() {
        return Err(Error::Empty("word sample is empty"));
    }
    Ok(WordSample {
        label: label.to_string(),
        words,
    })
}
