//! A deterministic linear bag-of-words scorer used as the value function
//! for the Shapley oracles.
//!
//! Scoring convention: every unmasked token contributes the weight of
//! its normalized word (0 if the word is unweighted or normalizes to
//! nothing); duplicate occurrences count once per occurrence. Masked
//! tokens contribute nothing (feature removal = drop). The score of the
//! empty input is the bias. Callers supplying their own value function
//! to the oracles should match this drop-style masking convention.

use std::collections::BTreeMap;
use std::io::Read;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::text::Word;

#[derive(Clone, Debug)]
pub struct ToyModel {
    pub model_id: String,
    pub class_label: String,
    pub bias: f64,
    weights: BTreeMap<Word, f64>,
}

#[derive(Deserialize)]
struct WireToyModel {
    model_id: String,
    class_label: String,
    #[serde(default)]
    bias: f64,
    weights: BTreeMap<String, f64>,
}

impl ToyModel {
    pub fn new(
        model_id: String,
        class_label: String,
        bias: f64,
        weights: BTreeMap<Word, f64>,
    ) -> ToyModel {
        ToyModel {
            model_id,
            class_label,
            bias,
            weights,
        }
    }

    /// Load from the JSON definition format:
    /// `{"model_id": str, "class_label": str, "bias": float, "weights": {word: float}}`.
    /// Weight keys are normalized; keys that normalize to nothing or
    /// collide after normalization are rejected.
    pub fn from_json_reader<R: Read>(reader: R) -> Result<ToyModel> {
        let wire: WireToyModel = serde_json::from_reader(reader)
            .map_err(|e| Error::InvalidParameter(format!("toy model file: {e}")))?;
        if !wire.bias.is_finite() {
            return Err(Error::InvalidParameter("toy model bias is not finite".into()));
        }
        let mut weights = BTreeMap::new();
        for (raw, value) in wire.weights {
            if !value.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "toy model weight for {raw:?} is not finite"
                )));
            }
            let word = Word::normalize(&raw).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "toy model weight key {raw:?} normalizes to nothing"
                ))
            })?;
            if weights.insert(word.clone(), value).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "toy model has two weight keys that both normalize to {:?}",
                    word.as_str()
                )));
            }
        }
        Ok(ToyModel::new(wire.model_id, wire.class_label, wire.bias, weights))
    }

    pub fn weight(&self, word: &Word) -> f64 {
        self.weights.get(word).copied().unwrap_or(0.0)
    }

    /// Per-token weights for a concrete token sequence.
    pub fn token_weights(&self, tokens: &[String]) -> Vec<f64> {
        tokens
            .iter()
            .map(|t| match Word::normalize(t) {
                Some(w) => self.weight(&w),
                None => 0.0,
            })
            .collect()
    }

    /// Score of a token subset given by a presence bitmask.
    pub fn masked_score(&self, token_weights: &[f64], mask: u64) -> f64 {
        let mut s = self.bias;
        for (k, w) in token_weights.iter().enumerate() {
            if mask & (1u64 << k) != 0 {
                s += w;
            }
        }
        s
    }

    /// Score of the full (unmasked) token sequence.
    pub fn full_score(&self, tokens: &[String]) -> f64 {
        self.bias + self.token_weights(tokens).iter().sum::<f64>()
    }
}
