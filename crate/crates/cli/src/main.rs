//! `topiclens` — aggregate token attributions into topic-level
//! explanations and compare models on a shared topic space.
//!
//! Subcommands: `attribute` (toy-model Shapley attribution), `lda-train`
//! (topic model training), `explain` (topic-level explanation), and
//! `compare` (residual report). Every flag can also be set in a TOML
//! config (`--config`); explicit flags win. Exit codes: 0 success,
//! 1 validation error, 2 I/O error, 3 internal invariant violation.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use topiclens_core::compare::ReportFormat;
use topiclens_core::topics::LdaParams;
use topiclens_core::Result;

use commands::{
    AttributeOptions, CompareOptions, ExplainOptions, LdaTrainOptions, MembershipSpec,
};
use config::{pick, pick_opt, require, AlphaModeArg, FileConfig, ModeArg, PathArg, SchemeArg};

#[derive(Parser)]
#[command(name = "topiclens", version, about = "Topic-level model explanations and comparison")]
struct Cli {
    /// TOML config file mirroring all flags (flags override it).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Attribute sentences with a toy model's exact or sampled Shapley values.
    Attribute(AttributeArgs),
    /// Train an LDA topic model over a one-document-per-line corpus.
    LdaTrain(LdaTrainArgs),
    /// Aggregate token attributions into a topic-level explanation.
    Explain(ExplainArgs),
    /// Compare two explanations and write ranked report files.
    Compare(CompareArgs),
}

#[derive(Args)]
struct AttributeArgs {
    /// Toy model definition (JSON with model_id, class_label, bias, weights).
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
    /// Sentences, one per line, whitespace-tokenized.
    #[arg(long, value_name = "FILE")]
    sentences: Option<PathBuf>,
    /// exact = coalition enumeration, sampled = seeded permutation sampling.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Permutation samples per sentence (sampled mode).
    #[arg(long)]
    samples: Option<usize>,
    /// Seed for sampled mode.
    #[arg(long)]
    seed: Option<u64>,
    /// Output attribution JSONL.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LdaTrainArgs {
    /// Corpus file, one document per line.
    #[arg(long, value_name = "FILE")]
    corpus: Option<PathBuf>,
    /// Number of topics.
    #[arg(long)]
    topics: Option<usize>,
    /// Dirichlet document-topic concentration.
    #[arg(long)]
    alpha: Option<f64>,
    /// Whether alpha is a total (divided by the topic count) or per-topic.
    #[arg(long, value_enum)]
    alpha_mode: Option<AlphaModeArg>,
    /// Dirichlet topic-word smoothing.
    #[arg(long)]
    beta: Option<f64>,
    /// Gibbs sweeps.
    #[arg(long)]
    iterations: Option<usize>,
    /// Chain seed.
    #[arg(long)]
    seed: Option<u64>,
    /// How many of the most frequent words to drop as stopwords.
    #[arg(long)]
    stopword_k: Option<usize>,
    /// Output topic-word matrix CSV.
    #[arg(long, value_name = "FILE")]
    out_matrix: Option<PathBuf>,
    /// Optional top-words listing.
    #[arg(long, value_name = "FILE")]
    out_top_words: Option<PathBuf>,
    /// Words per topic in the listing.
    #[arg(long)]
    top_words: Option<usize>,
}

#[derive(Args)]
struct ExplainArgs {
    /// Attribution JSONL input.
    #[arg(long, value_name = "FILE")]
    attributions: Option<PathBuf>,
    /// Explained class; records with other labels are ignored.
    #[arg(long)]
    class_label: Option<String>,
    /// Topic-word matrix CSV as the membership source.
    #[arg(long, value_name = "FILE")]
    topic_matrix: Option<PathBuf>,
    /// LIWC-style lexicon as the membership source.
    #[arg(long, value_name = "FILE")]
    lexicon: Option<PathBuf>,
    /// Word weighting: sum or inverse-frequency.
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Aggregation path: global-word or local-additive.
    #[arg(long, value_enum)]
    path: Option<PathArg>,
    /// Model id recorded in the explanation metadata.
    #[arg(long)]
    model_id: Option<String>,
    /// Dataset id recorded in the explanation metadata.
    #[arg(long)]
    dataset_id: Option<String>,
    /// Skip invalid attribution records instead of aborting.
    #[arg(long)]
    lenient: bool,
    /// Output explanation JSON.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// First explanation JSON (the A side of A minus B).
    #[arg(long, value_name = "FILE")]
    a: Option<PathBuf>,
    /// Second explanation JSON.
    #[arg(long, value_name = "FILE")]
    b: Option<PathBuf>,
    /// Rows per ranked table.
    #[arg(short, long)]
    k: Option<usize>,
    /// Comma-separated output formats: json, csv, svg, text.
    #[arg(long, value_delimiter = ',')]
    formats: Option<Vec<String>>,
    /// Directory for the report files.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Topic-word matrix for SVG word clouds.
    #[arg(long, value_name = "FILE")]
    topic_matrix: Option<PathBuf>,
    /// Lexicon for SVG word clouds.
    #[arg(long, value_name = "FILE")]
    lexicon: Option<PathBuf>,
    /// Leave the OTHER bucket out of the ranked tables.
    #[arg(long)]
    exclude_other: bool,
}

fn parse_formats(raw: Option<Vec<String>>, cfg: Option<Vec<String>>) -> Result<Vec<ReportFormat>> {
    let names = raw
        .or(cfg)
        .unwrap_or_else(|| vec!["json".to_owned(), "text".to_owned()]);
    let mut formats = Vec::new();
    for name in names {
        let f: ReportFormat = name.parse()?;
        if !formats.contains(&f) {
            formats.push(f);
        }
    }
    Ok(formats)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Attribute(args) => {
            let c = cfg.attribute;
            commands::run_attribute(&AttributeOptions {
                model: require(args.model, c.model, "model")?,
                sentences: require(args.sentences, c.sentences, "sentences")?,
                mode: pick(args.mode, c.mode, ModeArg::Exact),
                samples: pick(args.samples, c.samples, 2000),
                seed: pick(args.seed, c.seed, 0),
                out: require(args.out, c.out, "out")?,
            })
        }
        Command::LdaTrain(args) => {
            let c = cfg.lda;
            let defaults = LdaParams::default();
            commands::run_lda_train(&LdaTrainOptions {
                corpus: require(args.corpus, c.corpus, "corpus")?,
                params: LdaParams {
                    num_topics: pick(args.topics, c.topics, defaults.num_topics),
                    alpha: pick(args.alpha, c.alpha, defaults.alpha),
                    alpha_mode: pick(
                        args.alpha_mode,
                        c.alpha_mode,
                        AlphaModeArg::TotalOverTopics,
                    )
                    .into(),
                    beta: pick(args.beta, c.beta, defaults.beta),
                    iterations: pick(args.iterations, c.iterations, defaults.iterations),
                    seed: pick(args.seed, c.seed, defaults.seed),
                },
                stopword_k: pick(args.stopword_k, c.stopword_k, 100),
                out_matrix: require(args.out_matrix, c.out_matrix, "out-matrix")?,
                out_top_words: pick_opt(args.out_top_words, c.out_top_words),
                top_words: pick(args.top_words, c.top_words, 15),
            })
        }
        Command::Explain(args) => {
            let c = cfg.explain;
            let attributions = require(args.attributions, c.attributions, "attributions")?;
            let membership = MembershipSpec::from_options(
                pick_opt(args.topic_matrix, c.topic_matrix),
                pick_opt(args.lexicon, c.lexicon),
            )?;
            let model_id = pick_opt(args.model_id, c.model_id).unwrap_or_else(|| {
                attributions
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "model".to_owned())
            });
            commands::run_explain(&ExplainOptions {
                class_label: require(args.class_label, c.class_label, "class-label")?,
                membership,
                scheme: pick(args.scheme, c.scheme, SchemeArg::InverseFrequency),
                path: pick(args.path, c.path, PathArg::GlobalWord),
                model_id,
                dataset_id: pick(args.dataset_id, c.dataset_id, "unspecified".to_owned()),
                lenient: args.lenient || c.lenient.unwrap_or(false),
                out: require(args.out, c.out, "out")?,
                attributions,
            })
        }
        Command::Compare(args) => {
            let c = cfg.compare;
            let membership = match (
                pick_opt(args.topic_matrix, c.topic_matrix),
                pick_opt(args.lexicon, c.lexicon),
            ) {
                (None, None) => None,
                (m, l) => Some(MembershipSpec::from_options(m, l)?),
            };
            commands::run_compare(&CompareOptions {
                a: require(args.a, c.a, "a")?,
                b: require(args.b, c.b, "b")?,
                k: pick(args.k, c.k, 3),
                formats: parse_formats(args.formats, c.formats)?,
                out_dir: pick(args.out_dir, c.out_dir, PathBuf::from(".")),
                membership,
                exclude_other: args.exclude_other || c.exclude_other.unwrap_or(false),
            })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
