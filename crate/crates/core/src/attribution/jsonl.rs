//! JSONL wire format for attribution records.
//!
//! One record per line:
//! `{"instance_id": str, "class_label": str, "base_value": float,
//!   "tokens": [{"text": str, "score": float}...],
//!   "word_groups": [{"word": str|null, "start": int, "end": int}...]}`
//!
//! A null group word means "derive by normalizing the concatenated token
//! texts". Explicit group words are normalized on ingest so downstream
//! lookups always key on normalized words; a supplied word that
//! normalizes to nothing marks a punctuation group.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::Word;

use super::{InstanceAttribution, TokenAttribution, WordGroup};

#[derive(Debug, Serialize, Deserialize)]
struct WireToken {
    text: String,
    score: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireGroup {
    word: Option<String>,
    start: usize,
    end: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct WireInstance {
    instance_id: String,
    class_label: String,
    base_value: f64,
    tokens: Vec<WireToken>,
    word_groups: Vec<WireGroup>,
}

/// How to react to invalid records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IngestMode {
    /// First invalid record aborts ingestion.
    Strict,
    /// Invalid records are skipped and reported as warnings.
    Lenient,
}

/// A skipped record in lenient mode.
#[derive(Debug, Clone)]
pub struct IngestWarning {
    pub line: u64,
    pub message: String,
}

fn instance_from_wire(wire: WireInstance) -> std::result::Result<InstanceAttribution, String> {
    let tokens: Vec<TokenAttribution> = wire
        .tokens
        .into_iter()
        .map(|t| TokenAttribution {
            text: t.text,
            score: t.score,
        })
        .collect();
    let mut groups = Vec::with_capacity(wire.word_groups.len());
    for g in wire.word_groups {
        if g.end > tokens.len() || g.start >= g.end {
            return Err(format!(
                "word group [{}, {}) out of range for {} tokens",
                g.start,
                g.end,
                tokens.len()
            ));
        }
        let word = match g.word {
            Some(w) => Word::normalize(&w),
            None => {
                let concat: String = tokens[g.start..g.end]
                    .iter()
                    .map(|t| t.text.as_str())
                    .collect();
                Word::normalize(&concat)
            }
        };
        groups.push(WordGroup {
            word,
            start: g.start,
            end: g.end,
        });
    }
    InstanceAttribution::new(
        wire.instance_id,
        wire.class_label,
        wire.base_value,
        tokens,
        groups,
    )
    .map_err(|e| e.to_string())
}

/// Ingest a JSONL stream of attribution records. Blank lines are
/// skipped. Every error names the 1-based line it came from; in lenient
/// mode bad records become [`IngestWarning`]s instead of aborting.
pub fn ingest_attributions<R: BufRead>(
    reader: R,
    mode: IngestMode,
) -> Result<(Vec<InstanceAttribution>, Vec<IngestWarning>)> {
    let mut instances = Vec::new();
    let mut warnings = Vec::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();

    for (index, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = index as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }

        let parsed: std::result::Result<InstanceAttribution, String> = {
            let mut de = serde_json::Deserializer::from_str(&line);
            match serde_path_to_error::deserialize::<_, WireInstance>(&mut de) {
                Ok(wire) => instance_from_wire(wire),
                Err(e) => Err(format!("{}: {}", e.path(), e.inner())),
            }
        };

        let outcome = parsed.and_then(|inst| {
            let key = (inst.instance_id.clone(), inst.class_label.clone());
            if !seen.insert(key) {
                Err(format!(
                    "duplicate record for instance {:?} class {:?}",
                    inst.instance_id, inst.class_label
                ))
            } else {
                Ok(inst)
            }
        });

        match outcome {
            Ok(inst) => instances.push(inst),
            Err(message) => match mode {
                IngestMode::Strict => {
                    return Err(Error::Ingest {
                        line: line_no,
                        message,
                    })
                }
                IngestMode::Lenient => warnings.push(IngestWarning {
                    line: line_no,
                    message,
                }),
            },
        }
    }
    Ok((instances, warnings))
}

/// Emit instances in the JSONL wire format, one record per line.
/// Derivable group words are written explicitly; punctuation groups are
/// written as null.
pub fn emit_attributions<W: Write>(mut writer: W, instances: &[InstanceAttribution]) -> Result<()> {
    for inst in instances {
        let wire = WireInstance {
            instance_id: inst.instance_id.clone(),
            class_label: inst.class_label.clone(),
            base_value: inst.base_value,
            tokens: inst
                .tokens
                .iter()
                .map(|t| WireToken {
                    text: t.text.clone(),
                    score: t.score,
                })
                .collect(),
            word_groups: inst
                .word_groups
                .iter()
                .map(|g| WireGroup {
                    word: g.word.as_ref().map(|w| w.as_str().to_owned()),
                    start: g.start,
                    end: g.end,
                })
                .collect(),
        };
        let json = serde_json::to_string(&wire)
            .map_err(|e| Error::Internal(format!("serializing record: {e}")))?;
        writeln!(writer, "{json}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    const VALID_LINE: &str = r#"{"instance_id":"i1","class_label":"5-star","base_value":0.1,"tokens":[{"text":"ta","score":0.4},{"text":"sty","score":0.33}],"word_groups":[{"word":null,"start":0,"end":2}]}"#;

    #[test]
    fn two_valid_lines_ingest() {
        let second = VALID_LINE.replace("\"i1\"", "\"i2\"");
        let data = format!("{VALID_LINE}\n{second}\n");
        let (insts, warns) =
            ingest_attributions(data.as_bytes(), IngestMode::Strict).unwrap();
        assert_eq!(insts.len(), 2);
        assert!(warns.is_empty());
        // null word derived from concatenated tokens
        assert_eq!(
            insts[0].word_groups[0].word.as_ref().unwrap().as_str(),
            "tasty"
        );
    }

    #[test]
    fn nan_score_names_line_and_field() {
        let bad = VALID_LINE.replace("0.33", "\"NaN\"");
        let data = format!("{VALID_LINE}\n{bad}\n");
        let err = ingest_attributions(data.as_bytes(), IngestMode::Strict).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("score"), "{msg}");
    }

    #[test]
    fn malformed_json_reports_line() {
        let data = format!("{VALID_LINE}\nnot json\n");
        let err = ingest_attributions(data.as_bytes(), IngestMode::Strict).unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn duplicate_instance_class_rejected() {
        let data = format!("{VALID_LINE}\n{VALID_LINE}\n");
        let err = ingest_attributions(data.as_bytes(), IngestMode::Strict).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn same_instance_different_class_allowed() {
        let other = VALID_LINE.replace("5-star", "1-star");
        let data = format!("{VALID_LINE}\n{other}\n");
        let (insts, _) = ingest_attributions(data.as_bytes(), IngestMode::Strict).unwrap();
        assert_eq!(insts.len(), 2);
    }

    #[test]
    fn lenient_mode_skips_and_warns() {
        let data = format!("{VALID_LINE}\nnot json\n");
        let (insts, warns) =
            ingest_attributions(data.as_bytes(), IngestMode::Lenient).unwrap();
        assert_eq!(insts.len(), 1);
        assert_eq!(warns.len(), 1);
        assert_eq!(warns[0].line, 2);
    }

    #[test]
    fn gapped_word_groups_rejected_with_line() {
        let bad = r#"{"instance_id":"g","class_label":"c","base_value":0.0,"tokens":[{"text":"a","score":0.1},{"text":"b","score":0.2}],"word_groups":[{"word":null,"start":1,"end":2}]}"#;
        let err = ingest_attributions(bad.as_bytes(), IngestMode::Strict).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 1") && msg.contains("gap"), "{msg}");
    }

    fn random_instance(rng: &mut impl Rng, id: usize) -> InstanceAttribution {
        let n = rng.gen_range(1..=10);
        let tokens: Vec<TokenAttribution> = (0..n)
            .map(|i| TokenAttribution {
                text: if rng.gen_bool(0.1) {
                    "!".to_owned()
                } else {
                    format!("w{i}x")
                },
                score: rng.gen_range(-3.0..3.0),
            })
            .collect();
        let mut groups = Vec::new();
        let mut start = 0;
        while start < n {
            let end = (start + rng.gen_range(1..=2)).min(n);
            let concat: String = tokens[start..end].iter().map(|t| t.text.as_str()).collect();
            groups.push(WordGroup {
                word: Word::normalize(&concat),
                start,
                end,
            });
            start = end;
        }
        InstanceAttribution::new(
            format!("inst{id}"),
            "c".to_owned(),
            rng.gen_range(-1.0..1.0),
            tokens,
            groups,
        )
        .unwrap()
    }

    #[test]
    fn roundtrip_fifty_random_instances() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let instances: Vec<InstanceAttribution> =
            (0..50).map(|i| random_instance(&mut rng, i)).collect();
        let mut buf = Vec::new();
        emit_attributions(&mut buf, &instances).unwrap();
        let (back, warns) = ingest_attributions(buf.as_slice(), IngestMode::Strict).unwrap();
        assert!(warns.is_empty());
        assert_eq!(back, instances);
    }
}
