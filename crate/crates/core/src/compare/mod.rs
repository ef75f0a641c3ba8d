//! Model-vs-model comparison of topic explanations: L1 normalization,
//! the signed residual, and ranked topic tables.
//!
//! Comparisons only make sense over the same topic space, membership
//! source, and aggregation path; [`residual`] enforces all three and
//! refuses otherwise.

mod render;

pub use render::{render_report, ReportFormat};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::aggregate::{ExplanationMetadata, GlobalTopicExplanation};
use crate::error::{Error, Result};

/// An explanation rescaled so its values sum to 1.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedExplanation {
    pub metadata: ExplanationMetadata,
    pub topic_labels: Vec<String>,
    pub values: Vec<f64>,
}

/// Divide by the total importance. An all-zero explanation cannot be
/// normalized.
pub fn l1_normalize(explanation: &GlobalTopicExplanation) -> Result<NormalizedExplanation> {
    let total = explanation.total();
    if total <= 0.0 {
        return Err(Error::DegenerateExplanation);
    }
    Ok(NormalizedExplanation {
        metadata: explanation.metadata.clone(),
        topic_labels: explanation.topic_labels.clone(),
        values: explanation.values.iter().map(|v| v / total).collect(),
    })
}

/// Signed per-topic difference of two normalized explanations
/// (A minus B), plus the scalar L1 distance between them.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualExplanation {
    pub model_a: String,
    pub model_b: String,
    pub topic_labels: Vec<String>,
    pub delta: Vec<f64>,
    pub distance_l1: f64,
}

pub fn residual(
    a: &NormalizedExplanation,
    b: &NormalizedExplanation,
) -> Result<ResidualExplanation> {
    if a.topic_labels != b.topic_labels {
        return Err(Error::ComparisonRefused(format!(
            "topic spaces differ: [{}] vs [{}]",
            a.topic_labels.join(", "),
            b.topic_labels.join(", ")
        )));
    }
    if a.metadata.membership_source != b.metadata.membership_source {
        return Err(Error::ComparisonRefused(format!(
            "membership sources differ: {:?} vs {:?}",
            a.metadata.membership_source, b.metadata.membership_source
        )));
    }
    if a.metadata.path != b.metadata.path {
        return Err(Error::ComparisonRefused(format!(
            "aggregation paths differ: {:?} vs {:?}",
            a.metadata.path, b.metadata.path
        )));
    }
    if a.metadata.scheme != b.metadata.scheme {
        log::warn!(
            "comparing explanations with different weighting schemes ({:?} vs {:?})",
            a.metadata.scheme,
            b.metadata.scheme
        );
    }
    let delta: Vec<f64> = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(va, vb)| va - vb)
        .collect();
    let distance_l1 = delta.iter().map(|d| d.abs()).sum();
    Ok(ResidualExplanation {
        model_a: a.metadata.model_id.clone(),
        model_b: b.metadata.model_id.clone(),
        topic_labels: a.topic_labels.clone(),
        delta,
        distance_l1,
    })
}

/// One row of a residual-ranked table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedRow {
    pub rank: usize,
    pub topic: String,
    pub value_a: f64,
    pub value_b: f64,
    pub delta: f64,
}

/// One row of a per-model importance table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelRow {
    pub rank: usize,
    pub topic: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelTables {
    pub model_id: String,
    pub most_important: Vec<ModelRow>,
    pub least_important: Vec<ModelRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerModel {
    pub a: ModelTables,
    pub b: ModelTables,
}

/// The comparison report: residual vector, scalar distance, and the
/// ranked topic tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub models: [String; 2],
    pub distance_l1: f64,
    /// Per-topic signed residual, keyed by topic label.
    pub delta: BTreeMap<String, f64>,
    pub most_different: Vec<RankedRow>,
    pub most_similar: Vec<RankedRow>,
    pub per_model: PerModel,
}

#[derive(Clone, Copy, Debug)]
pub struct RankOptions {
    pub k: usize,
    /// When false, the OTHER bucket is left out of every ranked table
    /// (it stays in the delta map).
    pub include_other: bool,
}

impl Default for RankOptions {
    fn default() -> RankOptions {
        RankOptions {
            k: 3,
            include_other: true,
        }
    }
}

fn ranked_rows(
    indices: &[usize],
    labels: &[String],
    a: &[f64],
    b: &[f64],
    delta: &[f64],
) -> Vec<RankedRow> {
    indices
        .iter()
        .enumerate()
        .map(|(i, &t)| RankedRow {
            rank: i + 1,
            topic: labels[t].clone(),
            value_a: a[t],
            value_b: b[t],
            delta: delta[t],
        })
        .collect()
}

fn model_rows(indices: &[usize], labels: &[String], values: &[f64]) -> Vec<ModelRow> {
    indices
        .iter()
        .enumerate()
        .map(|(i, &t)| ModelRow {
            rank: i + 1,
            topic: labels[t].clone(),
            value: values[t],
        })
        .collect()
}

/// Rank topics by residual magnitude and per-model importance.
///
/// All orderings are deterministic: ties break on the topic label.
pub fn rank_topics(
    residual: &ResidualExplanation,
    a: &NormalizedExplanation,
    b: &NormalizedExplanation,
    opts: RankOptions,
) -> Result<ComparisonReport> {
    if opts.k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let labels = &residual.topic_labels;
    if a.topic_labels != *labels || b.topic_labels != *labels {
        return Err(Error::ShapeMismatch(
            "residual and explanations have different topic labels".into(),
        ));
    }

    let candidates: Vec<usize> = (0..labels.len())
        .filter(|&t| opts.include_other || labels[t] != crate::aggregate::OTHER_LABEL)
        .collect();
    let k = opts.k.min(candidates.len());

    let by_abs_delta_desc = {
        let mut idx = candidates.clone();
        idx.sort_by(|&x, &y| {
            residual.delta[y]
                .abs()
                .total_cmp(&residual.delta[x].abs())
                .then_with(|| labels[x].cmp(&labels[y]))
        });
        idx
    };
    let by_abs_delta_asc = {
        let mut idx = candidates.clone();
        idx.sort_by(|&x, &y| {
            residual.delta[x]
                .abs()
                .total_cmp(&residual.delta[y].abs())
                .then_with(|| labels[x].cmp(&labels[y]))
        });
        idx
    };
    let model_tables = |values: &[f64], model_id: &str| {
        let mut desc = candidates.clone();
        desc.sort_by(|&x, &y| {
            values[y]
                .total_cmp(&values[x])
                .then_with(|| labels[x].cmp(&labels[y]))
        });
        let mut asc = candidates.clone();
        asc.sort_by(|&x, &y| {
            values[x]
                .total_cmp(&values[y])
                .then_with(|| labels[x].cmp(&labels[y]))
        });
        ModelTables {
            model_id: model_id.to_owned(),
            most_important: model_rows(&desc[..k], labels, values),
            least_important: model_rows(&asc[..k], labels, values),
        }
    };

    Ok(ComparisonReport {
        models: [residual.model_a.clone(), residual.model_b.clone()],
        distance_l1: residual.distance_l1,
        delta: labels
            .iter()
            .cloned()
            .zip(residual.delta.iter().copied())
            .collect(),
        most_different: ranked_rows(
            &by_abs_delta_desc[..k],
            labels,
            &a.values,
            &b.values,
            &residual.delta,
        ),
        most_similar: ranked_rows(
            &by_abs_delta_asc[..k],
            labels,
            &a.values,
            &b.values,
            &residual.delta,
        ),
        per_model: PerModel {
            a: model_tables(&a.values, &residual.model_a),
            b: model_tables(&b.values, &residual.model_b),
        },
    })
}
