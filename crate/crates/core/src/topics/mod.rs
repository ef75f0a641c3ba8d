//! Topic membership weights P(topic|w) from two sources: a trained LDA
//! model and a LIWC-style lexicon.

mod lda;
mod lexicon;

pub use lda::{lda_train, AlphaMode, GibbsSampler, LdaParams};
pub use lexicon::{lexicon_membership, Lexicon, LexiconEntry};

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{CorpusCounts, Vocabulary, Word};

/// Where a membership came from. Explanations record this and
/// comparisons refuse to mix sources.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MembershipSource {
    Lda,
    Lexicon,
}

/// Training provenance kept alongside a trained topic model.
#[derive(Clone, Debug)]
pub struct TrainingMeta {
    pub alpha: f64,
    pub alpha_mode: AlphaMode,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
    pub stopwords: Vec<Word>,
}

/// A topic-word model: T rows, each a probability distribution
/// P(w|topic_t) over the model vocabulary.
#[derive(Clone, Debug)]
pub struct TopicModel {
    vocab: Vocabulary,
    topic_word: Vec<Vec<f64>>,
    pub training_meta: Option<TrainingMeta>,
}

impl TopicModel {
    /// Build from an explicit matrix. Each row must be non-negative and
    /// sum to 1 within `tolerance`; rows are then renormalized so the
    /// stored distributions sum to 1 exactly up to float division.
    pub fn from_matrix(
        vocab: Vocabulary,
        topic_word: Vec<Vec<f64>>,
        tolerance: f64,
    ) -> Result<TopicModel> {
        if topic_word.is_empty() {
            return Err(Error::InvalidParameter("topic matrix has no topics".into()));
        }
        let v = vocab.len();
        let mut rows = topic_word;
        for (t, row) in rows.iter_mut().enumerate() {
            if row.len() != v {
                return Err(Error::ShapeMismatch(format!(
                    "topic {t} has {} entries for a vocabulary of {v}",
                    row.len()
                )));
            }
            let mut sum = 0.0;
            for &p in row.iter() {
                if !p.is_finite() || p < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "topic {t} contains a negative or non-finite probability"
                    )));
                }
                sum += p;
            }
            if (sum - 1.0).abs() > tolerance {
                return Err(Error::InvalidParameter(format!(
                    "topic {t} row sums to {sum}, expected 1 within {tolerance}"
                )));
            }
            for p in row.iter_mut() {
                *p /= sum;
            }
        }
        // every word needs mass somewhere, or its membership is undefined
        for w in 0..v {
            if rows.iter().all(|row| row[w] == 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "word {:?} has zero mass in every topic",
                    vocab.word(w).as_str()
                )));
            }
        }
        Ok(TopicModel {
            vocab,
            topic_word: rows,
            training_meta: None,
        })
    }

    pub fn num_topics(&self) -> usize {
        self.topic_word.len()
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn row(&self, topic: usize) -> &[f64] {
        &self.topic_word[topic]
    }

    pub fn p_word_given_topic(&self, topic: usize, word_id: usize) -> f64 {
        self.topic_word[topic][word_id]
    }

    /// Top-k words of a topic by P(w|topic), ties broken lexicographically.
    pub fn top_words(&self, topic: usize, k: usize) -> Vec<(&Word, f64)> {
        let mut ranked: Vec<(usize, f64)> = self.topic_word[topic]
            .iter()
            .copied()
            .enumerate()
            .collect();
        ranked.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then_with(|| self.vocab.word(a.0).cmp(self.vocab.word(b.0)))
        });
        ranked
            .into_iter()
            .take(k)
            .map(|(w, p)| (self.vocab.word(w), p))
            .collect()
    }
}

/// Sparse per-word topic distributions P(topic|w). Words absent from the
/// map are uncovered and route to the OTHER bucket downstream.
#[derive(Clone, Debug)]
pub struct TopicMembership {
    labels: Vec<String>,
    source: MembershipSource,
    map: BTreeMap<Word, Vec<(usize, f64)>>,
}

impl TopicMembership {
    pub fn new(
        labels: Vec<String>,
        source: MembershipSource,
        map: BTreeMap<Word, Vec<(usize, f64)>>,
    ) -> TopicMembership {
        for (word, entries) in &map {
            for (t, _) in entries {
                assert!(
                    *t < labels.len(),
                    "membership for {word} references topic {t} but only {} labels exist",
                    labels.len()
                );
            }
        }
        TopicMembership { labels, source, map }
    }

    pub fn num_topics(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn source(&self) -> MembershipSource {
        self.source
    }

    /// The membership vector of a covered word.
    pub fn get(&self, word: &Word) -> Option<&[(usize, f64)]> {
        self.map.get(word).map(|v| v.as_slice())
    }

    pub fn is_covered(&self, word: &Word) -> bool {
        self.map.contains_key(word)
    }

    pub fn covered_words(&self) -> impl Iterator<Item = &Word> {
        self.map.keys()
    }

    pub fn coverage(&self) -> usize {
        self.map.len()
    }
}

/// The k most frequent words. Exactly k words are returned (boundary
/// ties broken lexicographically); if k exceeds the vocabulary size all
/// words are returned with a warning.
pub fn compute_stopwords(counts: &CorpusCounts, k: usize) -> Result<BTreeSet<Word>> {
    if counts.total() == 0 {
        return Err(Error::EmptyCorpus("cannot compute stopwords".into()));
    }
    let v = counts.distinct();
    if k > v {
        log::warn!("stopword count {k} exceeds vocabulary size {v}; returning all words");
    }
    let mut ranked: Vec<(&Word, u64)> = counts.iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    Ok(ranked.into_iter().take(k).map(|(w, _)| w.clone()).collect())
}

/// Derive P(topic|w) from a topic model by renormalizing each word's
/// column across topics (uniform topic prior). Every model-vocabulary
/// word is covered; smoothing guarantees positive mass.
pub fn lda_membership(model: &TopicModel) -> TopicMembership {
    let t_count = model.num_topics();
    let labels: Vec<String> = (0..t_count).map(|t| format!("topic_{t}")).collect();
    let mut map = BTreeMap::new();
    for w in 0..model.vocab().len() {
        let column_sum: f64 = (0..t_count).map(|t| model.p_word_given_topic(t, w)).sum();
        let entry: Vec<(usize, f64)> = (0..t_count)
            .map(|t| (t, model.p_word_given_topic(t, w) / column_sum))
            .collect();
        map.insert(model.vocab().word(w).clone(), entry);
    }
    TopicMembership::new(labels, MembershipSource::Lda, map)
}

/// Write a topic model as CSV with header `topic_id,word,p_word_given_topic`,
/// rows ordered by topic then word id.
pub fn export_topic_matrix_csv<W: Write>(model: &TopicModel, writer: W) -> Result<()> {
    let mut csv_writer = csv::Writer::from_writer(writer);
    csv_writer
        .write_record(["topic_id", "word", "p_word_given_topic"])
        .map_err(|e| Error::Internal(format!("writing csv header: {e}")))?;
    for t in 0..model.num_topics() {
        for w in 0..model.vocab().len() {
            csv_writer
                .write_record([
                    t.to_string(),
                    model.vocab().word(w).as_str().to_owned(),
                    format!("{}", model.p_word_given_topic(t, w)),
                ])
                .map_err(|e| Error::Internal(format!("writing csv row: {e}")))?;
        }
    }
    csv_writer
        .flush()
        .map_err(|e| Error::Internal(format!("flushing csv: {e}")))?;
    Ok(())
}

/// Read a topic model from CSV. Words are normalized; absent
/// (topic, word) pairs are zero; each topic's row must sum to 1 within
/// 1e-6. Topic ids must cover 0..=max contiguously.
pub fn import_topic_matrix_csv<R: Read>(reader: R) -> Result<TopicModel> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let line_of = |pos: Option<&csv::Position>| pos.map(|p| p.line()).unwrap_or(0);

    let headers = csv_reader
        .headers()
        .map_err(|e| Error::TopicMatrix {
            line: 1,
            message: format!("cannot read header: {e}"),
        })?
        .clone();
    let expected = ["topic_id", "word", "p_word_given_topic"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::TopicMatrix {
            line: 1,
            message: format!("expected header {expected:?}, got {headers:?}"),
        });
    }

    let mut cells: BTreeMap<(usize, Word), f64> = BTreeMap::new();
    let mut max_topic = 0usize;
    for record in csv_reader.records() {
        let record = record.map_err(|e| Error::TopicMatrix {
            line: line_of(e.position()),
            message: e.to_string(),
        })?;
        let line = line_of(record.position());
        let fail = |message: String| Error::TopicMatrix { line, message };
        if record.len() != 3 {
            return Err(fail(format!("expected 3 fields, got {}", record.len())));
        }
        let topic: usize = record[0]
            .parse()
            .map_err(|_| fail(format!("bad topic_id {:?}", &record[0])))?;
        let word = Word::normalize(&record[1])
            .ok_or_else(|| fail(format!("word {:?} normalizes to nothing", &record[1])))?;
        let p: f64 = record[2]
            .parse()
            .map_err(|_| fail(format!("bad probability {:?}", &record[2])))?;
        if !p.is_finite() || p < 0.0 {
            return Err(fail(format!("probability {p} out of range")));
        }
        if cells.insert((topic, word.clone()), p).is_some() {
            return Err(fail(format!(
                "duplicate entry for topic {topic}, word {:?}",
                word.as_str()
            )));
        }
        max_topic = max_topic.max(topic);
    }
    if cells.is_empty() {
        return Err(Error::TopicMatrix {
            line: 0,
            message: "no rows".into(),
        });
    }

    let num_topics = max_topic + 1;
    let vocab = Vocabulary::from_words(cells.keys().map(|(_, w)| w.clone()));
    let mut rows = vec![vec![0.0; vocab.len()]; num_topics];
    for ((t, w), p) in &cells {
        rows[*t][vocab.id(w).expect("word from cells")] = *p;
    }
    for (t, row) in rows.iter().enumerate() {
        if row.iter().all(|&p| p == 0.0) {
            return Err(Error::TopicMatrix {
                line: 0,
                message: format!("topic {t} has no rows (topic ids must be contiguous)"),
            });
        }
    }
    TopicModel::from_matrix(vocab, rows, 1e-6).map_err(|e| match e {
        Error::InvalidParameter(m) | Error::ShapeMismatch(m) => {
            Error::TopicMatrix { line: 0, message: m }
        }
        other => other,
    })
}
