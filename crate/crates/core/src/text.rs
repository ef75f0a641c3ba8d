//! Word identity, vocabulary construction, and corpus occurrence counts.
//!
//! Everything downstream keys on [`Word`]: a token string after NFC
//! normalization, lowercasing, and stripping of leading/trailing
//! non-alphanumeric characters. Interior punctuation (as in "don't")
//! survives. Two producers that tokenize differently still agree on the
//! word "tasty" under this rule, which is the whole point.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Serialize, Serializer};
use unicode_normalization::UnicodeNormalization;

use crate::attribution::InstanceAttribution;
use crate::error::{Error, Result};

/// Reserved pseudo-word for token groups that normalize to nothing
/// (pure punctuation). The angle brackets cannot survive normalization,
/// so no real input word can collide with it.
pub const PUNCT_MARKER: &str = "\u{27e8}punct\u{27e9}";

/// A normalized word. Construct via [`Word::normalize`]; the inner
/// string is guaranteed non-empty.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(String);

impl Word {
    /// Normalize a raw token or word string. Returns `None` when nothing
    /// alphanumeric remains (the "empty marker" case).
    ///
    /// The pass is NFC -> lowercase -> NFC -> trim non-alphanumeric edges.
    /// Lowercasing can emit combining sequences (e.g. U+0130), hence the
    /// second NFC before trimming.
    pub fn normalize(raw: &str) -> Option<Word> {
        let lowered = raw.nfc().collect::<String>().to_lowercase();
        let recomposed = lowered.nfc().collect::<String>();
        let trimmed = recomposed.trim_matches(|c: char| !c.is_alphanumeric());
        if trimmed.is_empty() {
            None
        } else {
            Some(Word(trimmed.to_owned()))
        }
    }

    /// The reserved punctuation bucket word.
    pub fn punct() -> Word {
        Word(PUNCT_MARKER.to_owned())
    }

    pub fn is_punct_marker(&self) -> bool {
        self.0 == PUNCT_MARKER
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

/// Ordered word set with a dense id per word. Ordering is lexicographic,
/// so two builds over the same corpus assign identical ids.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocabulary {
    words: Vec<Word>,
    index: HashMap<Word, usize>,
}

impl Vocabulary {
    pub fn from_words<I: IntoIterator<Item = Word>>(words: I) -> Vocabulary {
        let mut words: Vec<Word> = words.into_iter().collect();
        words.sort();
        words.dedup();
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Vocabulary { words, index }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &Word) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: usize) -> &Word {
        &self.words[id]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Word> {
        self.words.iter()
    }
}

/// Per-word occurrence counts over a corpus. `total` is always the sum
/// of all per-word counts.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CorpusCounts {
    counts: BTreeMap<Word, u64>,
    total: u64,
}

impl CorpusCounts {
    pub fn new() -> CorpusCounts {
        CorpusCounts::default()
    }

    pub fn record(&mut self, word: Word) {
        *self.counts.entry(word).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn from_documents(docs: &[Vec<Word>]) -> CorpusCounts {
        let mut counts = CorpusCounts::new();
        for doc in docs {
            for w in doc {
                counts.record(w.clone());
            }
        }
        counts
    }

    pub fn count(&self, word: &Word) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, u64)> {
        self.counts.iter().map(|(w, &c)| (w, c))
    }
}

/// Build the vocabulary and occurrence counts over the word groups of a
/// set of attributed instances. Punctuation groups are counted under the
/// reserved [`PUNCT_MARKER`] word so that inverse-frequency weighting is
/// defined for every word the aggregation stage will ever see.
pub fn build_vocabulary(instances: &[InstanceAttribution]) -> Result<(Vocabulary, CorpusCounts)> {
    let mut counts = CorpusCounts::new();
    for inst in instances {
        for word in inst.group_words() {
            counts.record(word);
        }
    }
    if counts.total() == 0 {
        return Err(Error::EmptyCorpus(
            "no word occurrences found in any instance".to_owned(),
        ));
    }
    let vocab = Vocabulary::from_words(counts.iter().map(|(w, _)| w.clone()));
    Ok((vocab, counts))
}
