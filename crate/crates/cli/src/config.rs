//! TOML config file mirroring every flag. Flags override config values;
//! defaults apply last. Keys are kebab-case, matching the flag names.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;

use topiclens_core::aggregate::{AggregationPath, WeightingScheme};
use topiclens_core::topics::AlphaMode;
use topiclens_core::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Exact,
    Sampled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeArg {
    Sum,
    InverseFrequency,
}

impl From<SchemeArg> for WeightingScheme {
    fn from(s: SchemeArg) -> WeightingScheme {
        match s {
            SchemeArg::Sum => WeightingScheme::Sum,
            SchemeArg::InverseFrequency => WeightingScheme::InverseFrequency,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathArg {
    GlobalWord,
    LocalAdditive,
}

impl From<PathArg> for AggregationPath {
    fn from(p: PathArg) -> AggregationPath {
        match p {
            PathArg::GlobalWord => AggregationPath::GlobalWord,
            PathArg::LocalAdditive => AggregationPath::LocalAdditive,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaModeArg {
    TotalOverTopics,
    PerTopic,
}

impl From<AlphaModeArg> for AlphaMode {
    fn from(a: AlphaModeArg) -> AlphaMode {
        match a {
            AlphaModeArg::TotalOverTopics => AlphaMode::TotalOverTopics,
            AlphaModeArg::PerTopic => AlphaMode::PerTopic,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    #[serde(default)]
    pub attribute: AttributeSection,
    #[serde(default)]
    pub lda: LdaSection,
    #[serde(default)]
    pub explain: ExplainSection,
    #[serde(default)]
    pub compare: CompareSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct AttributeSection {
    pub model: Option<PathBuf>,
    pub sentences: Option<PathBuf>,
    pub mode: Option<ModeArg>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct LdaSection {
    pub corpus: Option<PathBuf>,
    pub topics: Option<usize>,
    pub alpha: Option<f64>,
    pub alpha_mode: Option<AlphaModeArg>,
    pub beta: Option<f64>,
    pub iterations: Option<usize>,
    pub seed: Option<u64>,
    pub stopword_k: Option<usize>,
    pub out_matrix: Option<PathBuf>,
    pub out_top_words: Option<PathBuf>,
    pub top_words: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExplainSection {
    pub attributions: Option<PathBuf>,
    pub class_label: Option<String>,
    pub topic_matrix: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub scheme: Option<SchemeArg>,
    pub path: Option<PathArg>,
    pub model_id: Option<String>,
    pub dataset_id: Option<String>,
    pub lenient: Option<bool>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct CompareSection {
    pub a: Option<PathBuf>,
    pub b: Option<PathBuf>,
    pub k: Option<usize>,
    pub formats: Option<Vec<String>>,
    pub out_dir: Option<PathBuf>,
    pub topic_matrix: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub exclude_other: Option<bool>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig> {
        match path {
            None => Ok(FileConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)?;
                toml::from_str(&text).map_err(|e| {
                    Error::InvalidParameter(format!("config {}: {e}", p.display()))
                })
            }
        }
    }
}

/// Flag wins over config; `missing` names the flag in the error.
pub fn require<T>(flag: Option<T>, cfg: Option<T>, missing: &str) -> Result<T> {
    flag.or(cfg)
        .ok_or_else(|| Error::InvalidParameter(format!("missing required option --{missing}")))
}

pub fn pick<T>(flag: Option<T>, cfg: Option<T>, default: T) -> T {
    flag.or(cfg).unwrap_or(default)
}

pub fn pick_opt<T>(flag: Option<T>, cfg: Option<T>) -> Option<T> {
    flag.or(cfg)
}
