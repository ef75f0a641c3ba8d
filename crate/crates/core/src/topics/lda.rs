//! Collapsed Gibbs sampling for latent Dirichlet allocation with
//! symmetric priors.
//!
//! A single chain is inherently sequential; determinism comes from one
//! seeded ChaCha stream and a fixed document processing order (identical
//! corpus order + seed means bit-identical output). Multiple chains with
//! different seeds can run on separate threads.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{Vocabulary, Word};

use super::{TopicModel, TrainingMeta};

/// How the `alpha` parameter is read.
///
/// `TotalOverTopics` treats it as the total Dirichlet concentration and
/// uses `alpha / T` per topic, matching the MALLET convention this
/// trainer follows; `PerTopic` uses it directly.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaMode {
    #[default]
    TotalOverTopics,
    PerTopic,
}

#[derive(Clone, Debug)]
pub struct LdaParams {
    pub num_topics: usize,
    pub alpha: f64,
    pub alpha_mode: AlphaMode,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for LdaParams {
    fn default() -> LdaParams {
        LdaParams {
            num_topics: 30,
            alpha: 5.0,
            alpha_mode: AlphaMode::TotalOverTopics,
            beta: 0.01,
            iterations: 1000,
            seed: 0,
        }
    }
}

/// Sampler state, exposed so callers can step the chain and observe the
/// count invariant between sweeps.
pub struct GibbsSampler {
    vocab: Vocabulary,
    docs: Vec<Vec<usize>>,
    assignments: Vec<Vec<usize>>,
    topic_word_counts: Vec<Vec<u64>>, // T x V
    topic_totals: Vec<u64>,           // T
    doc_topic_counts: Vec<Vec<u64>>,  // D x T
    alpha_per_topic: f64,
    beta: f64,
    total_tokens: u64,
    rng: ChaCha8Rng,
    params: LdaParams,
    stopwords: Vec<Word>,
    weight_buf: Vec<f64>,
}

impl GibbsSampler {
    /// Initialize a chain. Stopwords are removed from the corpus before
    /// the model vocabulary is built; documents made empty by removal
    /// are kept (and skipped during sweeps) so document indices are
    /// stable.
    pub fn new(
        corpus: &[Vec<Word>],
        params: &LdaParams,
        stopwords: &BTreeSet<Word>,
    ) -> Result<GibbsSampler> {
        if params.num_topics < 2 {
            return Err(Error::InvalidParameter(
                "lda needs at least 2 topics".into(),
            ));
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(params.alpha) || !positive(params.beta) {
            return Err(Error::InvalidParameter(
                "lda priors alpha and beta must be positive".into(),
            ));
        }
        if params.iterations == 0 {
            return Err(Error::InvalidParameter(
                "lda needs at least one iteration".into(),
            ));
        }

        let kept: Vec<Vec<&Word>> = corpus
            .iter()
            .map(|doc| doc.iter().filter(|w| !stopwords.contains(*w)).collect())
            .collect();
        let vocab =
            Vocabulary::from_words(kept.iter().flatten().map(|w| (*w).clone()));
        if vocab.is_empty() {
            return Err(Error::EmptyCorpus(
                "every document is empty after stopword removal".into(),
            ));
        }

        let t_count = params.num_topics;
        let docs: Vec<Vec<usize>> = kept
            .iter()
            .map(|doc| doc.iter().map(|w| vocab.id(w).expect("kept word")).collect())
            .collect();

        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut topic_word_counts = vec![vec![0u64; vocab.len()]; t_count];
        let mut topic_totals = vec![0u64; t_count];
        let mut doc_topic_counts = vec![vec![0u64; t_count]; docs.len()];
        let mut assignments = Vec::with_capacity(docs.len());
        let mut total_tokens = 0u64;
        for (d, doc) in docs.iter().enumerate() {
            let mut z = Vec::with_capacity(doc.len());
            for &w in doc {
                let t = rng.gen_range(0..t_count);
                z.push(t);
                topic_word_counts[t][w] += 1;
                topic_totals[t] += 1;
                doc_topic_counts[d][t] += 1;
                total_tokens += 1;
            }
            assignments.push(z);
        }

        let alpha_per_topic = match params.alpha_mode {
            AlphaMode::TotalOverTopics => params.alpha / t_count as f64,
            AlphaMode::PerTopic => params.alpha,
        };

        Ok(GibbsSampler {
            vocab,
            docs,
            assignments,
            topic_word_counts,
            topic_totals,
            doc_topic_counts,
            alpha_per_topic,
            beta: params.beta,
            total_tokens,
            rng,
            params: params.clone(),
            stopwords: stopwords.iter().cloned().collect(),
            weight_buf: vec![0.0; t_count],
        })
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Current sum of all topic-word counts; equals [`total_tokens`]
    /// after every sweep (and every single reassignment).
    pub fn count_sum(&self) -> u64 {
        self.topic_totals.iter().sum()
    }

    /// One full sweep: resample the topic of every token.
    pub fn step(&mut self) {
        let t_count = self.params.num_topics;
        let v_beta = self.vocab.len() as f64 * self.beta;
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i];
                let old = self.assignments[d][i];
                self.topic_word_counts[old][w] -= 1;
                self.topic_totals[old] -= 1;
                self.doc_topic_counts[d][old] -= 1;

                let mut total = 0.0;
                for t in 0..t_count {
                    let doc_part = self.doc_topic_counts[d][t] as f64 + self.alpha_per_topic;
                    let word_part = (self.topic_word_counts[t][w] as f64 + self.beta)
                        / (self.topic_totals[t] as f64 + v_beta);
                    let weight = doc_part * word_part;
                    total += weight;
                    self.weight_buf[t] = weight;
                }
                let mut u = self.rng.gen::<f64>() * total;
                let mut new = t_count - 1;
                for (t, &weight) in self.weight_buf.iter().enumerate() {
                    u -= weight;
                    if u <= 0.0 {
                        new = t;
                        break;
                    }
                }

                self.assignments[d][i] = new;
                self.topic_word_counts[new][w] += 1;
                self.topic_totals[new] += 1;
                self.doc_topic_counts[d][new] += 1;
            }
        }
        debug_assert_eq!(self.count_sum(), self.total_tokens);
    }

    /// Finalize: topic_word[t][w] = (n_tw + beta) / (n_t + V*beta) from
    /// the current counts.
    pub fn into_model(self) -> TopicModel {
        let v = self.vocab.len();
        let v_beta = v as f64 * self.beta;
        let topic_word: Vec<Vec<f64>> = self
            .topic_word_counts
            .iter()
            .zip(&self.topic_totals)
            .map(|(row, &n_t)| {
                row.iter()
                    .map(|&n_tw| (n_tw as f64 + self.beta) / (n_t as f64 + v_beta))
                    .collect()
            })
            .collect();
        TopicModel {
            vocab: self.vocab,
            topic_word,
            training_meta: Some(TrainingMeta {
                alpha: self.params.alpha,
                alpha_mode: self.params.alpha_mode,
                beta: self.params.beta,
                iterations: self.params.iterations,
                seed: self.params.seed,
                stopwords: self.stopwords,
            }),
        }
    }
}

/// Train an LDA topic model by collapsed Gibbs sampling.
pub fn lda_train(
    corpus: &[Vec<Word>],
    params: &LdaParams,
    stopwords: &BTreeSet<Word>,
) -> Result<TopicModel> {
    let mut sampler = GibbsSampler::new(corpus, params, stopwords)?;
    for i in 0..params.iterations {
        sampler.step();
        if sampler.count_sum() != sampler.total_tokens() {
            return Err(Error::Internal(format!(
                "gibbs count conservation broken at iteration {i}"
            )));
        }
    }
    Ok(sampler.into_model())
}
