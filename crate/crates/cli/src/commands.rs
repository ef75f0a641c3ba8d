//! Implementations of the four subcommands. All output files are
//! written atomically (temp file in the target directory + rename).

use std::fs::{self, File};
use std::io::{BufRead, BufReader, Write as _};
use std::path::{Path, PathBuf};

use topiclens_core::aggregate::{
    self, AggregationPath, GlobalTopicExplanation, Provenance, WeightingScheme,
};
use topiclens_core::attribution::{
    self, emit_attributions, ingest_attributions, IngestMode, InstanceAttribution, ToyModel,
    EXACT_ENUMERATION_BOUND,
};
use topiclens_core::compare::{
    l1_normalize, rank_topics, render_report, residual, RankOptions, ReportFormat,
};
use topiclens_core::text::{build_vocabulary, CorpusCounts, Vocabulary, Word};
use topiclens_core::topics::{
    compute_stopwords, export_topic_matrix_csv, import_topic_matrix_csv, lda_membership,
    lda_train, lexicon_membership, LdaParams, Lexicon, TopicMembership,
};
use topiclens_core::{Error, Result};

use crate::config::{ModeArg, PathArg, SchemeArg};

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })
}

pub struct AttributeOptions {
    pub model: PathBuf,
    pub sentences: PathBuf,
    pub mode: ModeArg,
    pub samples: usize,
    pub seed: u64,
    pub out: PathBuf,
}

pub fn run_attribute(opts: &AttributeOptions) -> Result<()> {
    let model = ToyModel::from_json_reader(open(&opts.model)?)?;
    let reader = BufReader::new(open(&opts.sentences)?);

    let mut instances: Vec<InstanceAttribution> = Vec::new();
    let mut sentence_no = 0usize;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        sentence_no += 1;
        let tokens: Vec<String> = line.split_whitespace().map(str::to_owned).collect();
        let instance_id = format!("s{sentence_no:04}");
        let attribution = match opts.mode {
            ModeArg::Exact => {
                if tokens.len() > EXACT_ENUMERATION_BOUND {
                    return Err(Error::InvalidParameter(format!(
                        "sentence {sentence_no} has {} tokens, above the exact enumeration \
                         bound of {EXACT_ENUMERATION_BOUND}; use --mode sampled",
                        tokens.len()
                    )));
                }
                attribution::exact_shapley_model(&model, &tokens, &instance_id)?
            }
            ModeArg::Sampled => attribution::sampled_shapley_model(
                &model,
                &tokens,
                opts.samples,
                opts.seed,
                &instance_id,
            )?,
        };
        instances.push(attribution);
    }
    if instances.is_empty() {
        return Err(Error::EmptyCorpus(format!(
            "no sentences in {}",
            opts.sentences.display()
        )));
    }

    let mut buf = Vec::new();
    emit_attributions(&mut buf, &instances)?;
    write_atomic(&opts.out, &buf)?;
    log::info!(
        "attributed {} sentences with {} -> {}",
        instances.len(),
        model.model_id,
        opts.out.display()
    );
    Ok(())
}

pub struct LdaTrainOptions {
    pub corpus: PathBuf,
    pub params: LdaParams,
    pub stopword_k: usize,
    pub out_matrix: PathBuf,
    pub out_top_words: Option<PathBuf>,
    pub top_words: usize,
}

fn load_corpus(path: &Path) -> Result<Vec<Vec<Word>>> {
    let reader = BufReader::new(open(path)?);
    let mut docs = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        docs.push(line.split_whitespace().filter_map(Word::normalize).collect());
    }
    if docs.is_empty() {
        return Err(Error::EmptyCorpus(format!("no documents in {}", path.display())));
    }
    Ok(docs)
}

pub fn run_lda_train(opts: &LdaTrainOptions) -> Result<()> {
    let docs = load_corpus(&opts.corpus)?;
    let counts = CorpusCounts::from_documents(&docs);
    let stopwords = compute_stopwords(&counts, opts.stopword_k)?;
    let model = lda_train(&docs, &opts.params, &stopwords)?;

    let mut matrix = Vec::new();
    export_topic_matrix_csv(&model, &mut matrix)?;
    write_atomic(&opts.out_matrix, &matrix)?;

    if let Some(top_path) = &opts.out_top_words {
        let mut listing = String::new();
        let p = &opts.params;
        listing.push_str(&format!(
            "# topics={} alpha={} alpha-mode={:?} beta={} iterations={} seed={} stopwords={}\n",
            p.num_topics,
            p.alpha,
            p.alpha_mode,
            p.beta,
            p.iterations,
            p.seed,
            stopwords.len()
        ));
        for t in 0..model.num_topics() {
            let words: Vec<String> = model
                .top_words(t, opts.top_words)
                .into_iter()
                .map(|(w, prob)| format!("{w} ({prob:.4})"))
                .collect();
            listing.push_str(&format!("topic_{t}: {}\n", words.join(", ")));
        }
        write_atomic(top_path, listing.as_bytes())?;
    }
    log::info!(
        "trained {} topics over {} documents -> {}",
        model.num_topics(),
        docs.len(),
        opts.out_matrix.display()
    );
    Ok(())
}

pub enum MembershipSpec {
    TopicMatrix(PathBuf),
    Lexicon(PathBuf),
}

impl MembershipSpec {
    pub fn from_options(
        topic_matrix: Option<PathBuf>,
        lexicon: Option<PathBuf>,
    ) -> Result<MembershipSpec> {
        match (topic_matrix, lexicon) {
            (Some(m), None) => Ok(MembershipSpec::TopicMatrix(m)),
            (None, Some(l)) => Ok(MembershipSpec::Lexicon(l)),
            (Some(_), Some(_)) => Err(Error::InvalidParameter(
                "--topic-matrix and --lexicon are mutually exclusive".into(),
            )),
            (None, None) => Err(Error::InvalidParameter(
                "exactly one membership source is required: --topic-matrix or --lexicon".into(),
            )),
        }
    }

    /// Resolve against the vocabulary the explanation will aggregate over.
    fn membership(&self, vocab: &Vocabulary) -> Result<TopicMembership> {
        match self {
            MembershipSpec::TopicMatrix(path) => {
                let model = import_topic_matrix_csv(open(path)?)?;
                Ok(lda_membership(&model))
            }
            MembershipSpec::Lexicon(path) => {
                let lexicon = Lexicon::parse(BufReader::new(open(path)?))?;
                Ok(lexicon_membership(&lexicon, vocab))
            }
        }
    }

    /// Membership for report rendering, where no corpus vocabulary is at
    /// hand: lexicon word clouds fall back to the lexicon's own exact
    /// patterns and prefix stems as the word set.
    pub fn membership_for_render(&self) -> Result<TopicMembership> {
        match self {
            MembershipSpec::TopicMatrix(path) => {
                let model = import_topic_matrix_csv(open(path)?)?;
                Ok(lda_membership(&model))
            }
            MembershipSpec::Lexicon(path) => {
                let lexicon = Lexicon::parse(BufReader::new(open(path)?))?;
                let vocab = Vocabulary::from_words(
                    lexicon
                        .entries()
                        .iter()
                        .filter_map(|e| Word::normalize(&e.pattern)),
                );
                Ok(lexicon_membership(&lexicon, &vocab))
            }
        }
    }
}

pub struct ExplainOptions {
    pub attributions: PathBuf,
    pub class_label: String,
    pub membership: MembershipSpec,
    pub scheme: SchemeArg,
    pub path: PathArg,
    pub model_id: String,
    pub dataset_id: String,
    pub lenient: bool,
    pub out: PathBuf,
}

pub fn run_explain(opts: &ExplainOptions) -> Result<()> {
    let mode = if opts.lenient {
        IngestMode::Lenient
    } else {
        IngestMode::Strict
    };
    let (instances, warnings) =
        ingest_attributions(BufReader::new(open(&opts.attributions)?), mode).map_err(|e| {
            match e {
                Error::Ingest { line, message } => Error::Ingest {
                    line,
                    message: format!("{}: {message}", opts.attributions.display()),
                },
                other => other,
            }
        })?;
    for w in &warnings {
        log::warn!(
            "{}:{}: skipped record: {}",
            opts.attributions.display(),
            w.line,
            w.message
        );
    }

    let filtered: Vec<InstanceAttribution> = instances
        .into_iter()
        .filter(|i| i.class_label == opts.class_label)
        .collect();
    if filtered.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no instances with class label {:?} in {}",
            opts.class_label,
            opts.attributions.display()
        )));
    }

    let (vocab, counts) = build_vocabulary(&filtered)?;
    let membership = opts.membership.membership(&vocab)?;
    let scheme: WeightingScheme = opts.scheme.into();
    let provenance = Provenance {
        model_id: opts.model_id.clone(),
        dataset_id: opts.dataset_id.clone(),
        class_label: opts.class_label.clone(),
    };

    let word_values = attribution::aggregate_batch(&filtered);
    let explanation = match AggregationPath::from(opts.path) {
        AggregationPath::GlobalWord => {
            let g = aggregate::global_word_importance(&word_values, &counts, scheme)?;
            aggregate::topic_importance(&g, &membership, &provenance)
        }
        AggregationPath::LocalAdditive => {
            let locals = aggregate::local_topic_batch(&word_values, &membership);
            aggregate::global_from_local(&locals, &membership, scheme, &provenance)?
        }
    };

    let mut buf = Vec::new();
    explanation.to_writer(&mut buf)?;
    buf.push(b'\n');
    write_atomic(&opts.out, &buf)?;
    log::info!(
        "explained {} instances of class {:?} -> {}",
        filtered.len(),
        opts.class_label,
        opts.out.display()
    );
    Ok(())
}

pub struct CompareOptions {
    pub a: PathBuf,
    pub b: PathBuf,
    pub k: usize,
    pub formats: Vec<ReportFormat>,
    pub out_dir: PathBuf,
    pub membership: Option<MembershipSpec>,
    pub exclude_other: bool,
}

pub fn run_compare(opts: &CompareOptions) -> Result<()> {
    let expl_a = GlobalTopicExplanation::from_reader(open(&opts.a)?)?;
    let expl_b = GlobalTopicExplanation::from_reader(open(&opts.b)?)?;
    let norm_a = l1_normalize(&expl_a)?;
    let norm_b = l1_normalize(&expl_b)?;
    let res = residual(&norm_a, &norm_b)?;
    let report = rank_topics(
        &res,
        &norm_a,
        &norm_b,
        RankOptions {
            k: opts.k,
            include_other: !opts.exclude_other,
        },
    )?;

    let membership = match &opts.membership {
        Some(spec) => Some(spec.membership_for_render()?),
        None => None,
    };
    let written = render_report(&report, membership.as_ref(), &opts.formats, &opts.out_dir)?;
    let mut stdout = std::io::stdout().lock();
    for path in &written {
        let _ = writeln!(stdout, "{}", path.display());
    }
    Ok(())
}
