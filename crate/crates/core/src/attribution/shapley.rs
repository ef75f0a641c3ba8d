//! Exact and sampled Shapley values over token-presence masks.
//!
//! The value function is any `Fn(u64) -> f64` where bit `k` of the mask
//! marks token `k` as present. Exact computation enumerates all 2^n
//! coalitions (n capped at [`EXACT_ENUMERATION_BOUND`]); the sampled
//! estimator averages marginal contributions over seeded random
//! permutations and converges to the exact values.
//!
//! Both entry points are bit-deterministic: the parallel paths produce
//! per-token (or per-sample) partial results in index order and reduce
//! them sequentially, so thread count never changes the output.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec;

use super::{InstanceAttribution, TokenAttribution, ToyModel};

/// Largest token count for exact enumeration (2^n coalition evaluations).
pub const EXACT_ENUMERATION_BOUND: usize = 20;

/// Hard cap for any mask-based value function (mask is a u64).
pub const MAX_TOKENS: usize = 63;

fn attribution_from_values(
    instance_id: &str,
    class_label: &str,
    base_value: f64,
    tokens: &[String],
    values: &[f64],
) -> Result<InstanceAttribution> {
    let token_attrs = tokens
        .iter()
        .zip(values)
        .map(|(t, &v)| TokenAttribution {
            text: t.clone(),
            score: v,
        })
        .collect();
    InstanceAttribution::from_single_token_words(
        instance_id.to_owned(),
        class_label.to_owned(),
        base_value,
        token_attrs,
    )
}

/// Shapley coalition weight |S|!(n-|S|-1)!/n!, computed exactly as
/// 1 / (n * C(n-1, |S|)).
fn coalition_weights(n: usize) -> Vec<f64> {
    let mut binom = vec![1u64; n];
    for s in 1..n {
        // C(n-1, s) = C(n-1, s-1) * (n-s) / s
        binom[s] = binom[s - 1] * (n as u64 - s as u64) / s as u64;
    }
    binom
        .iter()
        .map(|&b| 1.0 / (n as f64 * b as f64))
        .collect()
}

fn exact_values_for_token(cache: &[f64], weights: &[f64], n: usize, k: usize) -> f64 {
    let bit = 1u64 << k;
    let mut v = 0.0;
    for mask in 0..(1u64 << n) {
        if mask & bit != 0 {
            continue;
        }
        let s = mask.count_ones() as usize;
        v += weights[s] * (cache[(mask | bit) as usize] - cache[mask as usize]);
    }
    v
}

#[derive(Clone, Copy)]
enum Mode {
    Seq,
    #[cfg(feature = "parallel")]
    Par,
}

impl Mode {
    fn auto() -> Mode {
        #[cfg(feature = "parallel")]
        {
            Mode::Par
        }
        #[cfg(not(feature = "parallel"))]
        {
            Mode::Seq
        }
    }

    fn map<U, F>(self, n: usize, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(usize) -> U + Sync + Send,
    {
        match self {
            Mode::Seq => exec::map_indexed_seq(n, f),
            #[cfg(feature = "parallel")]
            Mode::Par => exec::map_indexed_par(n, f),
        }
    }
}

fn exact_shapley_with<F>(
    value: F,
    tokens: &[String],
    instance_id: &str,
    class_label: &str,
    mode: Mode,
) -> Result<InstanceAttribution>
where
    F: Fn(u64) -> f64 + Sync,
{
    let n = tokens.len();
    if n > EXACT_ENUMERATION_BOUND {
        return Err(Error::EnumerationBound {
            n,
            bound: EXACT_ENUMERATION_BOUND,
        });
    }
    if n == 0 {
        return attribution_from_values(instance_id, class_label, value(0), tokens, &[]);
    }
    let cache: Vec<f64> = mode.map(1usize << n, |m| value(m as u64));
    let weights = coalition_weights(n);
    let values: Vec<f64> = mode.map(n, |k| exact_values_for_token(&cache, &weights, n, k));
    attribution_from_values(instance_id, class_label, cache[0], tokens, &values)
}

/// Exact Shapley values by coalition enumeration.
///
/// `base_value` of the result is `value(0)`; efficiency holds:
/// the token values sum to `value(full) - value(0)`.
pub fn exact_shapley<F>(
    value: F,
    tokens: &[String],
    instance_id: &str,
    class_label: &str,
) -> Result<InstanceAttribution>
where
    F: Fn(u64) -> f64 + Sync,
{
    exact_shapley_with(value, tokens, instance_id, class_label, Mode::auto())
}

#[doc(hidden)]
pub fn exact_shapley_seq<F>(
    value: F,
    tokens: &[String],
    instance_id: &str,
    class_label: &str,
) -> Result<InstanceAttribution>
where
    F: Fn(u64) -> f64 + Sync,
{
    exact_shapley_with(value, tokens, instance_id, class_label, Mode::Seq)
}

#[cfg(feature = "parallel")]
#[doc(hidden)]
pub fn exact_shapley_par<F>(
    value: F,
    tokens: &[String],
    instance_id: &str,
    class_label: &str,
) -> Result<InstanceAttribution>
where
    F: Fn(u64) -> f64 + Sync,
{
    exact_shapley_with(value, tokens, instance_id, class_label, Mode::Par)
}

/// Exact Shapley attribution of a [`ToyModel`] on a token sequence.
pub fn exact_shapley_model(
    model: &ToyModel,
    tokens: &[String],
    instance_id: &str,
) -> Result<InstanceAttribution> {
    let w = model.token_weights(tokens);
    let bias = model.bias;
    exact_shapley(
        move |mask| {
            let mut s = bias;
            for (k, wk) in w.iter().enumerate() {
                if mask & (1u64 << k) != 0 {
                    s += wk;
                }
            }
            s
        },
        tokens,
        instance_id,
        &model.class_label,
    )
}

/// One permutation's marginal-contribution vector. Sample index `i`
/// gets its own ChaCha stream, so samples are independent of execution
/// order.
fn permutation_contribution<F>(value: &F, n: usize, seed: u64, i: u64) -> Vec<f64>
where
    F: Fn(u64) -> f64,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i.wrapping_add(1));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    let mut contrib = vec![0.0; n];
    let mut mask = 0u64;
    let mut prev = value(mask);
    for &k in &order {
        mask |= 1u64 << k;
        let cur = value(mask);
        contrib[k] = cur - prev;
        prev = cur;
    }
    contrib
}

fn sampled_shapley_with<F>(
    value: F,
    tokens: &[String],
    samples: usize,
    seed: u64,
    instance_id: &str,
    class_label: &str,
    mode: Mode,
) -> Result<InstanceAttribution>
where
    F: Fn(u64) -> f64 + Sync,
{
    if samples == 0 {
        return Err(Error::InvalidParameter(
            "sampled_shapley requires at least one sample".into(),
        ));
    }
    let n = tokens.len();
    if n > MAX_TOKENS {
        return Err(Error::InvalidParameter(format!(
            "{n} tokens exceeds the {MAX_TOKENS}-token mask limit"
        )));
    }
    let base_value = value(0);
    if n == 0 {
        return attribution_from_values(instance_id, class_label, base_value, tokens, &[]);
    }
    let per_sample: Vec<Vec<f64>> =
        mode.map(samples, |i| permutation_contribution(&value, n, seed, i as u64));
    let mut totals = vec![0.0; n];
    for contrib in &per_sample {
        for (t, c) in totals.iter_mut().zip(contrib) {
            *t += c;
        }
    }
    for t in totals.iter_mut() {
        *t /= samples as f64;
    }
    attribution_from_values(instance_id, class_label, base_value, tokens, &totals)
}

/// Monte-Carlo permutation estimate of Shapley values. Deterministic
/// given `seed`; converges to [`exact_shapley`] as `samples` grows.
pub fn sampled_shapley<F>(
    value: F,
    tokens: &[String],
    samples: usize,
    seed: u64,
    instance_id: &str,
    class_label: &str,
) -> Result<InstanceAttribution>
where
    F: Fn(u64) -> f64 + Sync,
{
    sampled_shapley_with(
        value,
        tokens,
        samples,
        seed,
        instance_id,
        class_label,
        Mode::auto(),
    )
}

#[doc(hidden)]
pub fn sampled_shapley_seq<F>(
    value: F,
    tokens: &[String],
    samples: usize,
    seed: u64,
    instance_id: &str,
    class_label: &str,
) -> Result<InstanceAttribution>
where
    F: Fn(u64) -> f64 + Sync,
{
    sampled_shapley_with(
        value,
        tokens,
        samples,
        seed,
        instance_id,
        class_label,
        Mode::Seq,
    )
}

#[cfg(feature = "parallel")]
#[doc(hidden)]
pub fn sampled_shapley_par<F>(
    value: F,
    tokens: &[String],
    samples: usize,
    seed: u64,
    instance_id: &str,
    class_label: &str,
) -> Result<InstanceAttribution>
where
    F: Fn(u64) -> f64 + Sync,
{
    sampled_shapley_with(
        value,
        tokens,
        samples,
        seed,
        instance_id,
        class_label,
        Mode::Par,
    )
}

/// Sampled Shapley attribution of a [`ToyModel`] on a token sequence.
pub fn sampled_shapley_model(
    model: &ToyModel,
    tokens: &[String],
    samples: usize,
    seed: u64,
    instance_id: &str,
) -> Result<InstanceAttribution> {
    let w = model.token_weights(tokens);
    let bias = model.bias;
    sampled_shapley(
        move |mask| {
            let mut s = bias;
            for (k, wk) in w.iter().enumerate() {
                if mask & (1u64 << k) != 0 {
                    s += wk;
                }
            }
            s
        },
        tokens,
        samples,
        seed,
        instance_id,
        &model.class_label,
    )
}
