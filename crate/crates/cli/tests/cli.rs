//! Behavior tests for the `topiclens` binary: exit codes, wire formats,
//! config-file handling, and refusal messages.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_topiclens"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn topiclens")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> String {
    p.to_str().unwrap().to_owned()
}

/// attribute -> explain for one model, returning the explanation path.
fn explain_fixture(dir: &Path, model: &str, extra: &[&str]) -> PathBuf {
    let fx = fixtures();
    let attr = dir.join(format!("{model}.jsonl"));
    let out = run(&[
        "attribute",
        "--model",
        &path_str(&fx.join(format!("{model}.json"))),
        "--sentences",
        &path_str(&fx.join("corpus.txt")),
        "--mode",
        "exact",
        "--out",
        &path_str(&attr),
    ]);
    assert!(out.status.success(), "attribute: {}", stderr(&out));

    let expl = dir.join(format!("{model}_expl.json"));
    let mut args = vec![
        "explain".to_owned(),
        "--attributions".to_owned(),
        path_str(&attr),
        "--class-label".to_owned(),
        "positive".to_owned(),
        "--model-id".to_owned(),
        model.to_owned(),
        "--dataset-id".to_owned(),
        "reviews".to_owned(),
        "--out".to_owned(),
        path_str(&expl),
    ];
    if extra.is_empty() {
        args.push("--topic-matrix".to_owned());
        args.push(path_str(&fx.join("membership.csv")));
    } else {
        args.extend(extra.iter().map(|s| (*s).to_owned()));
    }
    let out = bin().args(&args).output().unwrap();
    assert!(out.status.success(), "explain: {}", stderr(&out));
    expl
}

#[test]
fn attribute_output_reingests_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures();
    let attr = dir.path().join("a.jsonl");
    let out = run(&[
        "attribute",
        "--model",
        &path_str(&fx.join("model_a.json")),
        "--sentences",
        &path_str(&fx.join("corpus.txt")),
        "--mode",
        "exact",
        "--out",
        &path_str(&attr),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    let data = fs::File::open(&attr).unwrap();
    let (instances, warnings) = topiclens_core::attribution::ingest_attributions(
        std::io::BufReader::new(data),
        topiclens_core::attribution::IngestMode::Strict,
    )
    .unwrap();
    assert_eq!(instances.len(), 20);
    assert!(warnings.is_empty());
    assert_eq!(instances[0].instance_id, "s0001");
}

#[test]
fn attribute_exact_bound_exceeded_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures();
    let sentences = dir.path().join("long.txt");
    let long: Vec<String> = (0..21).map(|i| format!("w{i}")).collect();
    fs::write(&sentences, long.join(" ")).unwrap();
    let out = run(&[
        "attribute",
        "--model",
        &path_str(&fx.join("model_a.json")),
        "--sentences",
        &path_str(&sentences),
        "--mode",
        "exact",
        "--out",
        &path_str(&dir.path().join("o.jsonl")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr(&out);
    assert!(msg.contains("sampled"), "{msg}");
}

#[test]
fn attribute_zero_samples_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures();
    let out = run(&[
        "attribute",
        "--model",
        &path_str(&fx.join("model_a.json")),
        "--sentences",
        &path_str(&fx.join("corpus.txt")),
        "--mode",
        "sampled",
        "--samples",
        "0",
        "--out",
        &path_str(&dir.path().join("o.jsonl")),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_input_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "attribute",
        "--model",
        "/nonexistent/model.json",
        "--sentences",
        "/nonexistent/corpus.txt",
        "--out",
        &path_str(&dir.path().join("o.jsonl")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn explain_empty_class_filter_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures();
    let attr = dir.path().join("a.jsonl");
    let out = run(&[
        "attribute",
        "--model",
        &path_str(&fx.join("model_a.json")),
        "--sentences",
        &path_str(&fx.join("corpus.txt")),
        "--out",
        &path_str(&attr),
    ]);
    assert!(out.status.success());
    let out = run(&[
        "explain",
        "--attributions",
        &path_str(&attr),
        "--class-label",
        "no-such-class",
        "--topic-matrix",
        &path_str(&fx.join("membership.csv")),
        "--out",
        &path_str(&dir.path().join("e.json")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no-such-class"));
}

#[test]
fn explain_requires_exactly_one_membership_source() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures();
    let attr = dir.path().join("a.jsonl");
    run(&[
        "attribute",
        "--model",
        &path_str(&fx.join("model_a.json")),
        "--sentences",
        &path_str(&fx.join("corpus.txt")),
        "--out",
        &path_str(&attr),
    ]);
    let both = run(&[
        "explain",
        "--attributions",
        &path_str(&attr),
        "--class-label",
        "positive",
        "--topic-matrix",
        &path_str(&fx.join("membership.csv")),
        "--lexicon",
        &path_str(&fx.join("lexicon.dic")),
        "--out",
        &path_str(&dir.path().join("e.json")),
    ]);
    assert_eq!(both.status.code(), Some(1));
    assert!(stderr(&both).contains("mutually exclusive"));

    let neither = run(&[
        "explain",
        "--attributions",
        &path_str(&attr),
        "--class-label",
        "positive",
        "--out",
        &path_str(&dir.path().join("e.json")),
    ]);
    assert_eq!(neither.status.code(), Some(1));
}

#[test]
fn explain_metadata_records_every_knob() {
    let dir = tempfile::tempdir().unwrap();
    let expl = explain_fixture(dir.path(), "model_a", &[]);
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&expl).unwrap()).unwrap();
    let meta = &doc["metadata"];
    assert_eq!(meta["model_id"], "model_a");
    assert_eq!(meta["dataset_id"], "reviews");
    assert_eq!(meta["class_label"], "positive");
    assert_eq!(meta["scheme"], "INVERSE_FREQUENCY");
    assert_eq!(meta["membership_source"], "LDA");
    assert_eq!(meta["path"], "GLOBAL_WORD");
    assert_eq!(meta["num_topics"], 3);
    assert_eq!(meta["instance_count"], 20);
    assert_eq!(doc["topic_labels"].as_array().unwrap().len(), 4);
}

#[test]
fn explain_lenient_skips_bad_lines() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures();
    let attr = dir.path().join("a.jsonl");
    run(&[
        "attribute",
        "--model",
        &path_str(&fx.join("model_a.json")),
        "--sentences",
        &path_str(&fx.join("corpus.txt")),
        "--out",
        &path_str(&attr),
    ]);
    let mut data = fs::read_to_string(&attr).unwrap();
    data.insert_str(0, "this is not json\n");
    fs::write(&attr, data).unwrap();

    let strict = run(&[
        "explain",
        "--attributions",
        &path_str(&attr),
        "--class-label",
        "positive",
        "--topic-matrix",
        &path_str(&fx.join("membership.csv")),
        "--out",
        &path_str(&dir.path().join("e.json")),
    ]);
    assert_eq!(strict.status.code(), Some(1));
    assert!(stderr(&strict).contains("line 1"));

    let lenient = run(&[
        "explain",
        "--attributions",
        &path_str(&attr),
        "--class-label",
        "positive",
        "--topic-matrix",
        &path_str(&fx.join("membership.csv")),
        "--lenient",
        "--out",
        &path_str(&dir.path().join("e.json")),
    ]);
    assert!(lenient.status.success(), "{}", stderr(&lenient));
}

#[test]
fn compare_with_itself_gives_zero_residual() {
    let dir = tempfile::tempdir().unwrap();
    let expl = explain_fixture(dir.path(), "model_a", &[]);
    let report_dir = dir.path().join("report");
    let out = run(&[
        "compare",
        "--a",
        &path_str(&expl),
        "--b",
        &path_str(&expl),
        "--formats",
        "json",
        "--out-dir",
        &path_str(&report_dir),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(report_dir.join("report.json")).unwrap())
            .unwrap();
    assert_eq!(doc["distance_l1"], 0.0);
    for (_, v) in doc["delta"].as_object().unwrap() {
        assert_eq!(v.as_f64().unwrap(), 0.0);
    }
}

#[test]
fn compare_refuses_mismatched_topic_spaces() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures();
    let a = explain_fixture(dir.path(), "model_a", &[]);
    let b = explain_fixture(
        dir.path(),
        "model_b",
        &["--lexicon", &path_str(&fx.join("lexicon.dic"))],
    );
    let out = run(&[
        "compare",
        "--a",
        &path_str(&a),
        "--b",
        &path_str(&b),
        "--out-dir",
        &path_str(&dir.path().join("report")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr(&out);
    assert!(msg.contains("topic spaces differ"), "{msg}");
}

#[test]
fn compare_unknown_format_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let expl = explain_fixture(dir.path(), "model_a", &[]);
    let out = run(&[
        "compare",
        "--a",
        &path_str(&expl),
        "--b",
        &path_str(&expl),
        "--formats",
        "json,bogus",
        "--out-dir",
        &path_str(&dir.path().join("report")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("bogus"));
}

#[test]
fn config_file_drives_a_command_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures();
    let out_cfg = dir.path().join("from_config.jsonl");
    let config = dir.path().join("run.toml");
    fs::write(
        &config,
        format!(
            "[attribute]\nmodel = {:?}\nsentences = {:?}\nmode = \"exact\"\nout = {:?}\n",
            path_str(&fx.join("model_a.json")),
            path_str(&fx.join("corpus.txt")),
            path_str(&out_cfg),
        ),
    )
    .unwrap();

    let out = run(&["attribute", "--config", &path_str(&config)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out_cfg.exists());

    // flag overrides the config's output path
    let out_flag = dir.path().join("from_flag.jsonl");
    let out = run(&[
        "attribute",
        "--config",
        &path_str(&config),
        "--out",
        &path_str(&out_flag),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out_flag.exists());
    assert_eq!(
        fs::read(&out_cfg).unwrap(),
        fs::read(&out_flag).unwrap(),
        "same inputs must give identical attribution bytes"
    );
}

#[test]
fn config_with_unknown_key_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    fs::write(&config, "[attribute]\nmodell = \"x\"\n").unwrap();
    let out = run(&["attribute", "--config", &path_str(&config)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero_and_documents_subcommands() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    for sub in ["attribute", "lda-train", "explain", "compare"] {
        assert!(text.contains(sub), "missing {sub}");
    }
}

#[test]
fn lda_train_writes_matrix_and_top_words() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures();
    let matrix = dir.path().join("matrix.csv");
    let tops = dir.path().join("topics.txt");
    let out = run(&[
        "lda-train",
        "--corpus",
        &path_str(&fx.join("corpus.txt")),
        "--topics",
        "3",
        "--iterations",
        "50",
        "--seed",
        "7",
        "--stopword-k",
        "5",
        "--out-matrix",
        &path_str(&matrix),
        "--out-top-words",
        &path_str(&tops),
        "--top-words",
        "4",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let matrix_text = fs::read_to_string(&matrix).unwrap();
    assert!(matrix_text.starts_with("topic_id,word,p_word_given_topic"));
    // trained matrix round-trips through the importer
    let model =
        topiclens_core::topics::import_topic_matrix_csv(matrix_text.as_bytes()).unwrap();
    assert_eq!(model.num_topics(), 3);
    let tops_text = fs::read_to_string(&tops).unwrap();
    assert!(tops_text.contains("topic_0:"), "{tops_text}");
}
