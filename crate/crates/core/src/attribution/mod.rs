//! Token-level attribution records and their aggregation to word level.
//!
//! An [`InstanceAttribution`] carries one explained input: an ordered
//! token list with scores, plus word groups mapping contiguous token
//! spans onto normalized words. Word grouping is explicit in the data
//! rather than inferred from subword markers, which keeps the pipeline
//! tokenizer-agnostic. [`word_groups_from_offsets`] builds spans from
//! character offsets for producers that have them.

mod jsonl;
mod shapley;
mod toy;

pub use jsonl::{emit_attributions, ingest_attributions, IngestMode, IngestWarning};
#[cfg(feature = "parallel")]
pub use shapley::{exact_shapley_par, sampled_shapley_par};
pub use shapley::{
    exact_shapley, exact_shapley_model, exact_shapley_seq, sampled_shapley,
    sampled_shapley_model, sampled_shapley_seq, EXACT_ENUMERATION_BOUND, MAX_TOKENS,
};
pub use toy::ToyModel;

use crate::error::{Error, Result};
use crate::exec;
use crate::text::Word;

/// One token of an explained input with its attribution score.
#[derive(Clone, Debug, PartialEq)]
pub struct TokenAttribution {
    pub text: String,
    pub score: f64,
}

/// A contiguous token span `[start, end)` belonging to one word.
/// `word == None` marks a punctuation group (tokens that normalize to
/// nothing); its values are later booked under the reserved punct word.
#[derive(Clone, Debug, PartialEq)]
pub struct WordGroup {
    pub word: Option<Word>,
    pub start: usize,
    pub end: usize,
}

/// Token-level attributions for one (instance, explained class) pair.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceAttribution {
    pub instance_id: String,
    pub class_label: String,
    /// Model output on the fully-masked input.
    pub base_value: f64,
    pub tokens: Vec<TokenAttribution>,
    pub word_groups: Vec<WordGroup>,
}

impl InstanceAttribution {
    /// Validating constructor. Word groups must partition the token
    /// index range exactly; all scores must be finite.
    pub fn new(
        instance_id: String,
        class_label: String,
        base_value: f64,
        tokens: Vec<TokenAttribution>,
        word_groups: Vec<WordGroup>,
    ) -> Result<InstanceAttribution> {
        let inst = InstanceAttribution {
            instance_id,
            class_label,
            base_value,
            tokens,
            word_groups,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Build an instance where every token is its own word group, with
    /// the group word derived by normalization.
    pub fn from_single_token_words(
        instance_id: String,
        class_label: String,
        base_value: f64,
        tokens: Vec<TokenAttribution>,
    ) -> Result<InstanceAttribution> {
        let word_groups = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| WordGroup {
                word: Word::normalize(&t.text),
                start: i,
                end: i + 1,
            })
            .collect();
        InstanceAttribution::new(instance_id, class_label, base_value, tokens, word_groups)
    }

    fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParameter(msg));
        if !self.base_value.is_finite() {
            return fail(format!(
                "instance {:?}: base_value is not finite",
                self.instance_id
            ));
        }
        for (i, t) in self.tokens.iter().enumerate() {
            if !t.score.is_finite() {
                return fail(format!(
                    "instance {:?}: token {i} has non-finite score",
                    self.instance_id
                ));
            }
        }
        let mut expected_start = 0usize;
        for (i, g) in self.word_groups.iter().enumerate() {
            if g.start != expected_start {
                let kind = if g.start > expected_start { "gap" } else { "overlap" };
                return fail(format!(
                    "instance {:?}: word_groups have a {kind} before group {i} \
                     (expected start {expected_start}, got {})",
                    self.instance_id, g.start
                ));
            }
            if g.end <= g.start {
                return fail(format!(
                    "instance {:?}: word group {i} is empty",
                    self.instance_id
                ));
            }
            expected_start = g.end;
        }
        if expected_start != self.tokens.len() {
            return fail(format!(
                "instance {:?}: word_groups cover {} of {} tokens",
                self.instance_id,
                expected_start,
                self.tokens.len()
            ));
        }
        Ok(())
    }

    /// Sum of all token scores.
    pub fn token_total(&self) -> f64 {
        self.tokens.iter().map(|t| t.score).sum()
    }

    /// The word each group is booked under (punct groups map to the
    /// reserved marker word).
    pub fn group_words(&self) -> impl Iterator<Item = Word> + '_ {
        self.word_groups
            .iter()
            .map(|g| g.word.clone().unwrap_or_else(Word::punct))
    }
}

/// Word-level attribution values for one instance: one entry per word
/// group, in group order. The entry values always sum to the instance's
/// token total (up to float accumulation).
#[derive(Clone, Debug, PartialEq)]
pub struct WordLocalValues {
    pub instance_id: String,
    /// Carried through so the additivity-preserving local path can state
    /// `base + sum(topic values) = model output` per instance.
    pub base_value: f64,
    pub values: Vec<(Word, f64)>,
}

impl WordLocalValues {
    pub fn total(&self) -> f64 {
        self.values.iter().map(|(_, v)| v).sum()
    }
}

/// Sum token scores over each word group.
pub fn aggregate_tokens_to_words(instance: &InstanceAttribution) -> WordLocalValues {
    let values = instance
        .word_groups
        .iter()
        .map(|g| {
            let v: f64 = instance.tokens[g.start..g.end].iter().map(|t| t.score).sum();
            (g.word.clone().unwrap_or_else(Word::punct), v)
        })
        .collect();
    WordLocalValues {
        instance_id: instance.instance_id.clone(),
        base_value: instance.base_value,
        values,
    }
}

/// Batch form of [`aggregate_tokens_to_words`]; output order matches
/// input order.
pub fn aggregate_batch(instances: &[InstanceAttribution]) -> Vec<WordLocalValues> {
    exec::map_indexed(instances.len(), |i| aggregate_tokens_to_words(&instances[i]))
}

#[doc(hidden)]
pub fn aggregate_batch_seq(instances: &[InstanceAttribution]) -> Vec<WordLocalValues> {
    exec::map_indexed_seq(instances.len(), |i| aggregate_tokens_to_words(&instances[i]))
}

#[cfg(feature = "parallel")]
#[doc(hidden)]
pub fn aggregate_batch_par(instances: &[InstanceAttribution]) -> Vec<WordLocalValues> {
    exec::map_indexed_par(instances.len(), |i| aggregate_tokens_to_words(&instances[i]))
}

/// Build word groups from byte-offset token spans into the original
/// text. Tokens whose start offset falls inside the same whitespace-
/// delimited run of `text` are grouped; the group word is the normalized
/// run text. Tokens starting on whitespace become their own group, keyed
/// by their own normalized text.
pub fn word_groups_from_offsets(text: &str, token_spans: &[(usize, usize)]) -> Vec<WordGroup> {
    // non-whitespace byte runs of the original text
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut run_start: Option<usize> = None;
    for (i, ch) in text.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = run_start.take() {
                runs.push((s, i));
            }
        } else if run_start.is_none() {
            run_start = Some(i);
        }
    }
    if let Some(s) = run_start {
        runs.push((s, text.len()));
    }

    let run_of = |pos: usize| -> Option<usize> {
        runs.iter()
            .position(|&(s, e)| pos >= s && pos < e)
    };

    let mut groups: Vec<WordGroup> = Vec::new();
    let mut current: Option<(usize, usize)> = None; // (run index, group start)
    for (k, &(tok_start, tok_end)) in token_spans.iter().enumerate() {
        match run_of(tok_start) {
            Some(r) => {
                match current {
                    Some((cr, _)) if cr == r => {} // extend current group
                    _ => {
                        if let Some((cr, gs)) = current.take() {
                            groups.push(WordGroup {
                                word: Word::normalize(&text[runs[cr].0..runs[cr].1]),
                                start: gs,
                                end: k,
                            });
                        }
                        current = Some((r, k));
                    }
                }
            }
            None => {
                if let Some((cr, gs)) = current.take() {
                    groups.push(WordGroup {
                        word: Word::normalize(&text[runs[cr].0..runs[cr].1]),
                        start: gs,
                        end: k,
                    });
                }
                groups.push(WordGroup {
                    word: Word::normalize(&text[tok_start..tok_end]),
                    start: k,
                    end: k + 1,
                });
            }
        }
    }
    if let Some((cr, gs)) = current {
        groups.push(WordGroup {
            word: Word::normalize(&text[runs[cr].0..runs[cr].1]),
            start: gs,
            end: token_spans.len(),
        });
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tok(text: &str, score: f64) -> TokenAttribution {
        TokenAttribution {
            text: text.to_owned(),
            score,
        }
    }

    #[test]
    fn subtoken_scores_merge_into_word_score() {
        // "ta" + "sty" -> "tasty" with summed score 0.73
        let inst = InstanceAttribution::new(
            "i1".into(),
            "5-star".into(),
            0.0,
            vec![tok("ta", 0.4), tok("sty", 0.33)],
            vec![WordGroup {
                word: Word::normalize("tasty"),
                start: 0,
                end: 2,
            }],
        )
        .unwrap();
        let wv = aggregate_tokens_to_words(&inst);
        assert_eq!(wv.values.len(), 1);
        assert_eq!(wv.values[0].0.as_str(), "tasty");
        assert!((wv.values[0].1 - 0.73).abs() < 1e-12);
    }

    #[test]
    fn single_token_word_is_identity() {
        let inst = InstanceAttribution::from_single_token_words(
            "i1".into(),
            "c".into(),
            0.0,
            vec![tok("fries", 0.5)],
        )
        .unwrap();
        let wv = aggregate_tokens_to_words(&inst);
        assert_eq!(wv.values, vec![(Word::normalize("fries").unwrap(), 0.5)]);
    }

    #[test]
    fn aggregation_preserves_token_total() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for trial in 0..50 {
            let n = rng.gen_range(1..=12);
            let tokens: Vec<TokenAttribution> = (0..n)
                .map(|i| tok(&format!("w{i}"), rng.gen_range(-2.0..2.0)))
                .collect();
            // random contiguous grouping
            let mut groups = Vec::new();
            let mut start = 0;
            while start < n {
                let end = (start + rng.gen_range(1..=3)).min(n);
                groups.push(WordGroup {
                    word: Word::normalize(&format!("g{start}")),
                    start,
                    end,
                });
                start = end;
            }
            let inst = InstanceAttribution::new(
                format!("t{trial}"),
                "c".into(),
                0.0,
                tokens,
                groups,
            )
            .unwrap();
            let wv = aggregate_tokens_to_words(&inst);
            assert!(
                (wv.total() - inst.token_total()).abs() < 1e-12,
                "trial {trial}"
            );
        }
    }

    #[test]
    fn punct_group_booked_under_marker() {
        let inst = InstanceAttribution::new(
            "i".into(),
            "c".into(),
            0.0,
            vec![tok("good", 0.3), tok("!!", 0.05)],
            vec![
                WordGroup {
                    word: Word::normalize("good"),
                    start: 0,
                    end: 1,
                },
                WordGroup {
                    word: None,
                    start: 1,
                    end: 2,
                },
            ],
        )
        .unwrap();
        let wv = aggregate_tokens_to_words(&inst);
        assert!(wv.values[1].0.is_punct_marker());
        assert!((wv.values[1].1 - 0.05).abs() < 1e-15);
    }

    #[test]
    fn gap_and_overlap_rejected() {
        let tokens = vec![tok("a", 0.0), tok("b", 0.0)];
        let gap = InstanceAttribution::new(
            "i".into(),
            "c".into(),
            0.0,
            tokens.clone(),
            vec![WordGroup {
                word: Word::normalize("b"),
                start: 1,
                end: 2,
            }],
        );
        assert!(gap.is_err());
        let overlap = InstanceAttribution::new(
            "i".into(),
            "c".into(),
            0.0,
            tokens,
            vec![
                WordGroup {
                    word: Word::normalize("a"),
                    start: 0,
                    end: 2,
                },
                WordGroup {
                    word: Word::normalize("b"),
                    start: 1,
                    end: 2,
                },
            ],
        );
        assert!(overlap.is_err());
    }

    #[test]
    fn non_finite_score_rejected() {
        let e = InstanceAttribution::from_single_token_words(
            "i".into(),
            "c".into(),
            0.0,
            vec![tok("a", f64::NAN)],
        )
        .unwrap_err();
        assert!(e.to_string().contains("non-finite"));
    }

    #[test]
    fn offsets_group_subtokens_of_one_word() {
        let text = "The burgers were tasty!";
        // "tasty!" split into "ta" (17..19) and "sty!" (19..23)
        let spans = [(0, 3), (4, 11), (12, 16), (17, 19), (19, 23)];
        let groups = word_groups_from_offsets(text, &spans);
        assert_eq!(groups.len(), 4);
        assert_eq!(groups[3].start, 3);
        assert_eq!(groups[3].end, 5);
        assert_eq!(groups[3].word.as_ref().unwrap().as_str(), "tasty");
        assert_eq!(groups[0].word.as_ref().unwrap().as_str(), "the");
    }

    #[test]
    fn offsets_handle_punctuation_run() {
        let text = "good !!!";
        let spans = [(0, 4), (5, 8)];
        let groups = word_groups_from_offsets(text, &spans);
        assert_eq!(groups.len(), 2);
        assert!(groups[1].word.is_none());
    }
}
