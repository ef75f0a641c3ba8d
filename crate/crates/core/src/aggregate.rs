//! Global and local aggregation of word-level attribution values into
//! topic-level explanations.
//!
//! Two first-class paths exist and are recorded in every explanation's
//! metadata:
//!
//! * `GLOBAL_WORD` — per-word magnitudes are aggregated over the whole
//!   dataset (optionally frequency-normalized), then apportioned to
//!   topics by membership. Uncovered words land in the reserved OTHER
//!   bucket, always materialized at the last index.
//! * `LOCAL_ADDITIVE` — signed per-instance topic vectors that sum to
//!   the instance's attribution total (preserving additivity), then
//!   aggregated globally by entrywise absolute sum.
//!
//! The two paths apply the absolute value at different levels and
//! generally give different numbers; comparisons refuse to mix them.
//!
//! All cross-instance sums order their addends canonically before
//! accumulating, so results are exactly invariant under instance
//! reordering (not merely up to float noise).

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::attribution::WordLocalValues;
use crate::error::{Error, Result};
use crate::exec;
use crate::text::{CorpusCounts, Word};
use crate::topics::{MembershipSource, TopicMembership};

/// Label of the reserved bucket for words outside every topic.
pub const OTHER_LABEL: &str = "OTHER";

/// Weighting C(w) applied when aggregating word magnitudes globally.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WeightingScheme {
    /// C(w) = 1: plain summation, frequency effects kept.
    Sum,
    /// C(w) = 1/count(w): the mean absolute local value per occurrence.
    #[default]
    InverseFrequency,
}

/// Which aggregation path produced an explanation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AggregationPath {
    #[default]
    GlobalWord,
    LocalAdditive,
}

/// Caller-supplied provenance recorded in explanation metadata.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub model_id: String,
    pub dataset_id: String,
    pub class_label: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplanationMetadata {
    pub model_id: String,
    pub dataset_id: String,
    pub class_label: String,
    pub scheme: WeightingScheme,
    pub membership_source: MembershipSource,
    pub path: AggregationPath,
    pub num_topics: usize,
    pub instance_count: usize,
}

/// Dataset-level non-negative word importances.
#[derive(Clone, Debug)]
pub struct GlobalWordImportance {
    pub scheme: WeightingScheme,
    pub instance_count: usize,
    g: BTreeMap<Word, f64>,
}

impl GlobalWordImportance {
    pub fn get(&self, word: &Word) -> Option<f64> {
        self.g.get(word).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, f64)> {
        self.g.iter().map(|(w, &v)| (w, v))
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.g.values().sum()
    }
}

/// Sum a slice in a canonical order, independent of how it was built.
/// Inputs on every caller are non-negative; empty buckets come out as
/// +0.0 (the std sum identity is -0.0, which would leak into output).
fn sorted_sum(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let sum: f64 = values.iter().sum();
    if sum == 0.0 {
        0.0
    } else {
        sum
    }
}

/// g_w = C(w) * sum of |v| over every occurrence of w in every instance.
///
/// With `InverseFrequency` this is the mean absolute local value per
/// occurrence; a word seen in the instances but missing from `counts`
/// is a consistency error.
pub fn global_word_importance(
    instances: &[WordLocalValues],
    counts: &CorpusCounts,
    scheme: WeightingScheme,
) -> Result<GlobalWordImportance> {
    let mut occurrences: BTreeMap<Word, Vec<f64>> = BTreeMap::new();
    for inst in instances {
        for (word, v) in &inst.values {
            occurrences.entry(word.clone()).or_default().push(v.abs());
        }
    }
    let mut g = BTreeMap::new();
    for (word, mut vals) in occurrences {
        let c = match scheme {
            WeightingScheme::Sum => 1.0,
            WeightingScheme::InverseFrequency => {
                let count = counts.count(&word);
                if count == 0 {
                    return Err(Error::MissingCount(word.as_str().to_owned()));
                }
                1.0 / count as f64
            }
        };
        let sum = sorted_sum(&mut vals);
        g.insert(word, c * sum);
    }
    Ok(GlobalWordImportance {
        scheme,
        instance_count: instances.len(),
        g,
    })
}

/// A topic-level global explanation: non-negative importances for the
/// T membership topics plus the OTHER bucket at index T.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalTopicExplanation {
    pub metadata: ExplanationMetadata,
    pub topic_labels: Vec<String>,
    #[serde(rename = "G")]
    pub values: Vec<f64>,
}

impl GlobalTopicExplanation {
    pub fn num_topics_with_other(&self) -> usize {
        self.values.len()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Serialize as the explanation JSON document.
    pub fn to_writer<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)
            .map_err(|e| Error::Internal(format!("serializing explanation: {e}")))
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<GlobalTopicExplanation> {
        let expl: GlobalTopicExplanation = serde_json::from_reader(reader)
            .map_err(|e| Error::InvalidParameter(format!("explanation JSON: {e}")))?;
        if expl.topic_labels.len() != expl.values.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} topic labels but {} values",
                expl.topic_labels.len(),
                expl.values.len()
            )));
        }
        if expl.topic_labels.last().map(String::as_str) != Some(OTHER_LABEL) {
            return Err(Error::InvalidParameter(format!(
                "last topic label must be {OTHER_LABEL:?}"
            )));
        }
        if let Some(v) = expl.values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "explanation values must be finite and non-negative, found {v}"
            )));
        }
        Ok(expl)
    }
}

fn labels_with_other(membership: &TopicMembership) -> Vec<String> {
    let mut labels = membership.labels().to_vec();
    labels.push(OTHER_LABEL.to_owned());
    labels
}

/// G_t = sum over covered words of membership * g_w; uncovered words'
/// importances go to OTHER.
pub fn topic_importance(
    g: &GlobalWordImportance,
    membership: &TopicMembership,
    provenance: &Provenance,
) -> GlobalTopicExplanation {
    let t_count = membership.num_topics();
    let mut per_topic: Vec<Vec<f64>> = vec![Vec::new(); t_count + 1];
    for (word, gw) in g.iter() {
        match membership.get(word) {
            Some(entries) => {
                for &(t, p) in entries {
                    per_topic[t].push(p * gw);
                }
            }
            None => per_topic[t_count].push(gw),
        }
    }
    let values: Vec<f64> = per_topic.iter_mut().map(|v| sorted_sum(v)).collect();
    GlobalTopicExplanation {
        metadata: ExplanationMetadata {
            model_id: provenance.model_id.clone(),
            dataset_id: provenance.dataset_id.clone(),
            class_label: provenance.class_label.clone(),
            scheme: g.scheme,
            membership_source: membership.source(),
            path: AggregationPath::GlobalWord,
            num_topics: t_count,
            instance_count: g.instance_count,
        },
        topic_labels: labels_with_other(membership),
        values,
    }
}

/// Signed per-word sums within one instance (no absolute value).
pub fn local_word_importance(instance: &WordLocalValues) -> BTreeMap<Word, f64> {
    let mut l: BTreeMap<Word, f64> = BTreeMap::new();
    for (word, v) in &instance.values {
        *l.entry(word.clone()).or_insert(0.0) += v;
    }
    l
}

/// Signed topic-level explanation for a single instance. The values sum
/// to the instance's word-value total, so `base_value + sum(values)`
/// equals the model output the attributions explain.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalTopicExplanation {
    pub instance_id: String,
    pub base_value: f64,
    /// Length T+1; OTHER last.
    pub values: Vec<f64>,
}

impl LocalTopicExplanation {
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// L_t = sum over words of membership * l_w, signed; uncovered words'
/// values go to OTHER.
pub fn local_topic_importance(
    instance: &WordLocalValues,
    membership: &TopicMembership,
) -> LocalTopicExplanation {
    let l = local_word_importance(instance);
    let t_count = membership.num_topics();
    let mut values = vec![0.0; t_count + 1];
    for (word, lw) in &l {
        match membership.get(word) {
            Some(entries) => {
                for &(t, p) in entries {
                    values[t] += p * lw;
                }
            }
            None => values[t_count] += lw,
        }
    }
    LocalTopicExplanation {
        instance_id: instance.instance_id.clone(),
        base_value: instance.base_value,
        values,
    }
}

/// Batch form of [`local_topic_importance`]; output order matches input.
pub fn local_topic_batch(
    instances: &[WordLocalValues],
    membership: &TopicMembership,
) -> Vec<LocalTopicExplanation> {
    exec::map_indexed(instances.len(), |i| {
        local_topic_importance(&instances[i], membership)
    })
}

#[doc(hidden)]
pub fn local_topic_batch_seq(
    instances: &[WordLocalValues],
    membership: &TopicMembership,
) -> Vec<LocalTopicExplanation> {
    exec::map_indexed_seq(instances.len(), |i| {
        local_topic_importance(&instances[i], membership)
    })
}

#[cfg(feature = "parallel")]
#[doc(hidden)]
pub fn local_topic_batch_par(
    instances: &[WordLocalValues],
    membership: &TopicMembership,
) -> Vec<LocalTopicExplanation> {
    exec::map_indexed_par(instances.len(), |i| {
        local_topic_importance(&instances[i], membership)
    })
}

/// G_t = sum over instances of |L_t|.
pub fn global_from_local(
    locals: &[LocalTopicExplanation],
    membership: &TopicMembership,
    scheme: WeightingScheme,
    provenance: &Provenance,
) -> Result<GlobalTopicExplanation> {
    let width = membership.num_topics() + 1;
    let mut per_topic: Vec<Vec<f64>> = vec![Vec::with_capacity(locals.len()); width];
    for local in locals {
        if local.values.len() != width {
            return Err(Error::ShapeMismatch(format!(
                "instance {:?} has {} topic values, expected {width}",
                local.instance_id,
                local.values.len()
            )));
        }
        for (t, v) in local.values.iter().enumerate() {
            per_topic[t].push(v.abs());
        }
    }
    let values: Vec<f64> = per_topic.iter_mut().map(|v| sorted_sum(v)).collect();
    Ok(GlobalTopicExplanation {
        metadata: ExplanationMetadata {
            model_id: provenance.model_id.clone(),
            dataset_id: provenance.dataset_id.clone(),
            class_label: provenance.class_label.clone(),
            // recorded for provenance; the local path applies no C(w)
            scheme,
            membership_source: membership.source(),
            path: AggregationPath::LocalAdditive,
            num_topics: membership.num_topics(),
            instance_count: locals.len(),
        },
        topic_labels: labels_with_other(membership),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topics::MembershipSource;

    fn w(s: &str) -> Word {
        Word::normalize(s).unwrap()
    }

    fn wlv(id: &str, base: f64, pairs: &[(&str, f64)]) -> WordLocalValues {
        WordLocalValues {
            instance_id: id.to_owned(),
            base_value: base,
            values: pairs.iter().map(|(s, v)| (w(s), *v)).collect(),
        }
    }

    fn counts_of(instances: &[WordLocalValues]) -> CorpusCounts {
        let mut c = CorpusCounts::new();
        for inst in instances {
            for (word, _) in &inst.values {
                c.record(word.clone());
            }
        }
        c
    }

    fn membership(entries: &[(&str, &[(usize, f64)])], labels: &[&str]) -> TopicMembership {
        let map = entries
            .iter()
            .map(|(word, m)| (w(word), m.to_vec()))
            .collect();
        TopicMembership::new(
            labels.iter().map(|s| (*s).to_owned()).collect(),
            MembershipSource::Lexicon,
            map,
        )
    }

    fn prov() -> Provenance {
        Provenance {
            model_id: "m".into(),
            dataset_id: "d".into(),
            class_label: "c".into(),
        }
    }

    #[test]
    fn inverse_frequency_averages_occurrences() {
        // the worked micro-example: 0.73 and 1.29 average to 1.01
        let insts = [
            wlv("i1", 0.0, &[("tasty", 0.73)]),
            wlv("i2", 0.0, &[("tasty", 1.29)]),
        ];
        let counts = counts_of(&insts);
        let g =
            global_word_importance(&insts, &counts, WeightingScheme::InverseFrequency).unwrap();
        assert!((g.get(&w("tasty")).unwrap() - 1.01).abs() < 1e-12);
    }

    #[test]
    fn sum_scheme_keeps_frequency() {
        let insts = [
            wlv("i1", 0.0, &[("tasty", 0.73)]),
            wlv("i2", 0.0, &[("tasty", 1.29)]),
        ];
        let counts = counts_of(&insts);
        let g = global_word_importance(&insts, &counts, WeightingScheme::Sum).unwrap();
        assert!((g.get(&w("tasty")).unwrap() - 2.02).abs() < 1e-12);
    }

    #[test]
    fn absolute_value_applies_before_averaging() {
        let insts = [
            wlv("i1", 0.0, &[("x", -0.5)]),
            wlv("i2", 0.0, &[("x", 0.5)]),
        ];
        let counts = counts_of(&insts);
        let g =
            global_word_importance(&insts, &counts, WeightingScheme::InverseFrequency).unwrap();
        assert!((g.get(&w("x")).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn missing_count_is_a_consistency_error() {
        let insts = [wlv("i1", 0.0, &[("x", 1.0)])];
        let counts = CorpusCounts::new();
        let err = global_word_importance(&insts, &counts, WeightingScheme::InverseFrequency)
            .unwrap_err();
        assert!(matches!(err, Error::MissingCount(_)));
    }

    #[test]
    fn topic_importance_hand_sum() {
        // food example: all three words fully in FOOD
        let insts = [
            wlv("i1", 0.0, &[("tasty", 0.73), ("burgers", 0.40)]),
            wlv("i2", 0.0, &[("tasty", 1.29), ("fries", 0.57)]),
        ];
        let counts = counts_of(&insts);
        let g =
            global_word_importance(&insts, &counts, WeightingScheme::InverseFrequency).unwrap();
        let m = membership(
            &[
                ("tasty", &[(0, 1.0)]),
                ("burgers", &[(0, 1.0)]),
                ("fries", &[(0, 1.0)]),
            ],
            &["FOOD"],
        );
        let expl = topic_importance(&g, &m, &prov());
        // 1.01 + 0.40 + 0.57
        assert!((expl.values[0] - 1.98).abs() < 1e-12);
        assert_eq!(expl.values[1], 0.0);
        assert_eq!(expl.topic_labels, vec!["FOOD", "OTHER"]);
    }

    #[test]
    fn split_membership_distributes_linearly() {
        let insts = [wlv("i1", 0.0, &[("x", 2.0)])];
        let counts = counts_of(&insts);
        let g = global_word_importance(&insts, &counts, WeightingScheme::Sum).unwrap();
        let m = membership(&[("x", &[(0, 0.5), (1, 0.5)])], &["A", "B"]);
        let expl = topic_importance(&g, &m, &prov());
        assert!((expl.values[0] - 1.0).abs() < 1e-15);
        assert!((expl.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_membership_routes_everything_to_other() {
        let insts = [wlv("i1", 0.0, &[("x", 1.0), ("y", 2.0)])];
        let counts = counts_of(&insts);
        let g = global_word_importance(&insts, &counts, WeightingScheme::Sum).unwrap();
        let m = membership(&[], &["A", "B"]);
        let expl = topic_importance(&g, &m, &prov());
        assert_eq!(expl.values[0], 0.0);
        assert_eq!(expl.values[1], 0.0);
        assert!((expl.values[2] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn mass_is_conserved_including_other() {
        let insts = [
            wlv("i1", 0.0, &[("a", 0.3), ("b", -0.7), ("c", 1.1)]),
            wlv("i2", 0.0, &[("a", -0.2), ("d", 0.9)]),
        ];
        let counts = counts_of(&insts);
        let g =
            global_word_importance(&insts, &counts, WeightingScheme::InverseFrequency).unwrap();
        let m = membership(
            &[("a", &[(0, 0.25), (1, 0.75)]), ("b", &[(1, 1.0)])],
            &["A", "B"],
        );
        let expl = topic_importance(&g, &m, &prov());
        assert!((expl.total() - g.total()).abs() < 1e-9);
    }

    #[test]
    fn local_word_importance_sums_signed() {
        let inst = wlv("i", 0.0, &[("good", 0.3), ("good", -0.1), ("bad", -0.4)]);
        let l = local_word_importance(&inst);
        assert!((l[&w("good")] - 0.2).abs() < 1e-15);
        assert!((l[&w("bad")] + 0.4).abs() < 1e-15);
        let total: f64 = l.values().sum();
        assert!((total - inst.total()).abs() < 1e-12);
    }

    #[test]
    fn local_topic_additivity_is_exact() {
        let inst = wlv("i", 0.5, &[("a", 0.3), ("b", -0.8), ("zzz", 0.25)]);
        let m = membership(
            &[("a", &[(0, 0.5), (1, 0.5)]), ("b", &[(0, 1.0)])],
            &["A", "B"],
        );
        let local = local_topic_importance(&inst, &m);
        assert_eq!(local.values.len(), 3);
        let diff = (local.total() - inst.total()).abs();
        assert!(diff < 1e-12, "additivity off by {diff}");
    }

    #[test]
    fn local_topic_empty_membership_all_other() {
        let inst = wlv("i", 0.0, &[("a", 0.3), ("b", -0.8)]);
        let m = membership(&[], &["A"]);
        let local = local_topic_importance(&inst, &m);
        assert_eq!(local.values[0], 0.0);
        assert!((local.values[1] - (-0.5)).abs() < 1e-15);
    }

    #[test]
    fn global_from_local_hand_arithmetic() {
        let locals = vec![
            LocalTopicExplanation {
                instance_id: "1".into(),
                base_value: 0.0,
                values: vec![1.0, -2.0],
            },
            LocalTopicExplanation {
                instance_id: "2".into(),
                base_value: 0.0,
                values: vec![-3.0, 4.0],
            },
        ];
        let m = membership(&[], &["A"]);
        let g = global_from_local(&locals, &m, WeightingScheme::Sum, &prov()).unwrap();
        assert_eq!(g.values, vec![4.0, 6.0]);
        assert_eq!(g.metadata.path, AggregationPath::LocalAdditive);
    }

    #[test]
    fn global_from_local_single_is_absolute() {
        let locals = vec![LocalTopicExplanation {
            instance_id: "1".into(),
            base_value: 0.0,
            values: vec![-1.5, 0.25],
        }];
        let m = membership(&[], &["A"]);
        let g = global_from_local(&locals, &m, WeightingScheme::Sum, &prov()).unwrap();
        assert_eq!(g.values, vec![1.5, 0.25]);
    }

    #[test]
    fn global_from_local_rejects_mismatched_width() {
        let locals = vec![LocalTopicExplanation {
            instance_id: "1".into(),
            base_value: 0.0,
            values: vec![1.0, 2.0, 3.0],
        }];
        let m = membership(&[], &["A"]);
        let err = global_from_local(&locals, &m, WeightingScheme::Sum, &prov()).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch(_)));
    }

    #[test]
    fn instance_order_does_not_change_global_values_at_all() {
        let a = wlv("i1", 0.0, &[("x", 0.1), ("y", -0.7)]);
        let b = wlv("i2", 0.0, &[("x", 0.3)]);
        let c = wlv("i3", 0.0, &[("x", -0.2), ("y", 0.9)]);
        let counts = counts_of(&[a.clone(), b.clone(), c.clone()]);
        let m = membership(&[("x", &[(0, 1.0)]), ("y", &[(0, 0.5), (1, 0.5)])], &["A", "B"]);

        let order1 = [a.clone(), b.clone(), c.clone()];
        let order2 = [c, a, b];
        let g1 =
            global_word_importance(&order1, &counts, WeightingScheme::InverseFrequency).unwrap();
        let g2 =
            global_word_importance(&order2, &counts, WeightingScheme::InverseFrequency).unwrap();
        let e1 = topic_importance(&g1, &m, &prov());
        let e2 = topic_importance(&g2, &m, &prov());
        assert_eq!(e1.values, e2.values); // bitwise

        let l1 = local_topic_batch(&order1, &m);
        let l2 = local_topic_batch(&order2, &m);
        let gl1 = global_from_local(&l1, &m, WeightingScheme::Sum, &prov()).unwrap();
        let gl2 = global_from_local(&l2, &m, WeightingScheme::Sum, &prov()).unwrap();
        assert_eq!(gl1.values, gl2.values);
    }

    #[test]
    fn scaling_tokens_by_two_scales_explanations_exactly() {
        let insts = [
            wlv("i1", 0.0, &[("a", 0.3), ("b", -0.7)]),
            wlv("i2", 0.0, &[("a", -0.2)]),
        ];
        let scaled: Vec<WordLocalValues> = insts
            .iter()
            .map(|i| WordLocalValues {
                instance_id: i.instance_id.clone(),
                base_value: i.base_value,
                values: i.values.iter().map(|(w, v)| (w.clone(), v * 2.0)).collect(),
            })
            .collect();
        let counts = counts_of(&insts);
        let m = membership(&[("a", &[(0, 1.0)])], &["A"]);

        let g1 =
            global_word_importance(&insts, &counts, WeightingScheme::InverseFrequency).unwrap();
        let g2 =
            global_word_importance(&scaled, &counts, WeightingScheme::InverseFrequency).unwrap();
        let e1 = topic_importance(&g1, &m, &prov());
        let e2 = topic_importance(&g2, &m, &prov());
        for (v1, v2) in e1.values.iter().zip(&e2.values) {
            assert_eq!(v1 * 2.0, *v2); // exact for power-of-two scale
        }

        let gl1 = global_from_local(&local_topic_batch(&insts, &m), &m, g1.scheme, &prov())
            .unwrap();
        let gl2 = global_from_local(&local_topic_batch(&scaled, &m), &m, g2.scheme, &prov())
            .unwrap();
        for (v1, v2) in gl1.values.iter().zip(&gl2.values) {
            assert_eq!(v1 * 2.0, *v2);
        }
    }

    #[test]
    fn increasing_a_magnitude_never_decreases_covered_topics() {
        let base = [
            wlv("i1", 0.0, &[("a", 0.3), ("b", 0.5)]),
            wlv("i2", 0.0, &[("a", -0.1)]),
        ];
        let bumped = [
            wlv("i1", 0.0, &[("a", 0.3), ("b", 0.5)]),
            wlv("i2", 0.0, &[("a", -0.9)]),
        ];
        let counts = counts_of(&base);
        let m = membership(&[("a", &[(0, 0.6), (1, 0.4)]), ("b", &[(1, 1.0)])], &["A", "B"]);
        let g1 = global_word_importance(&base, &counts, WeightingScheme::InverseFrequency)
            .unwrap();
        let g2 = global_word_importance(&bumped, &counts, WeightingScheme::InverseFrequency)
            .unwrap();
        let e1 = topic_importance(&g1, &m, &prov());
        let e2 = topic_importance(&g2, &m, &prov());
        for (v1, v2) in e1.values.iter().zip(&e2.values) {
            assert!(v2 >= v1);
        }
    }

    #[test]
    fn explanation_json_roundtrip() {
        let m = membership(&[("a", &[(0, 1.0)])], &["A"]);
        let insts = [wlv("i1", 0.0, &[("a", 0.4)])];
        let counts = counts_of(&insts);
        let g = global_word_importance(&insts, &counts, WeightingScheme::Sum).unwrap();
        let expl = topic_importance(&g, &m, &prov());
        let mut buf = Vec::new();
        expl.to_writer(&mut buf).unwrap();
        let back = GlobalTopicExplanation::from_reader(buf.as_slice()).unwrap();
        assert_eq!(back, expl);
    }

    #[test]
    fn explanation_reader_validates_shape_and_other_bucket() {
        let m = membership(&[("a", &[(0, 1.0)])], &["A"]);
        let insts = [wlv("i1", 0.0, &[("a", 0.4)])];
        let counts = counts_of(&insts);
        let g = global_word_importance(&insts, &counts, WeightingScheme::Sum).unwrap();
        let expl = topic_importance(&g, &m, &prov());
        let mut buf = Vec::new();
        expl.to_writer(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();

        let truncated = text.replace("\"OTHER\"", "\"misc\"");
        let err = GlobalTopicExplanation::from_reader(truncated.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("OTHER"));

        let mismatched = text.replace("0.4,\n    0.0", "0.4");
        assert_ne!(mismatched, text, "replacement must hit the G array");
        let err = GlobalTopicExplanation::from_reader(mismatched.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch(_)), "{err}");
    }
}
