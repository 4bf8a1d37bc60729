use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus")
}

fn corpus_file(name: &str) -> String {
    corpus_dir().join(format!("{name}.eg")).to_string_lossy().into_owned()
}

fn cfspanner(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfspanner"))
        .args(args)
        .env_remove("CFSPANNER_ORACLE_BUDGET")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn lines(out: &Output) -> BTreeSet<String> {
    stdout(out).lines().map(str::to_string).collect()
}

fn documents(max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        layer = layer.iter().flat_map(|w| [format!("{w}a"), format!("{w}b")]).collect();
        out.extend(layer.iter().cloned());
    }
    out
}

#[test]
fn eval_anbn_capture_golden() {
    let out = cfspanner(&["eval", &corpus_file("anbn_capture"), "--text", "ababb"]);
    assert!(out.status.success());
    let expected = BTreeSet::from([
        r#"{"x":[1,2],"y":[2,3]}"#.to_string(),
        r#"{"x":[3,4],"y":[4,5]}"#.to_string(),
    ]);
    assert_eq!(lines(&out), expected);
    let naive = cfspanner(&[
        "eval",
        &corpus_file("anbn_capture"),
        "--text",
        "ababb",
        "--mode",
        "naive",
    ]);
    assert_eq!(lines(&naive), expected);
}

#[test]
fn eval_output_is_deterministic() {
    let args = ["eval", &corpus_file("disj_eq_len"), "--text", "abaab"];
    let first = cfspanner(&args);
    assert!(first.status.success());
    assert!(!first.stdout.is_empty());
    assert_eq!(first.stdout, cfspanner(&args).stdout);
}

#[test]
fn eval_reads_documents_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let doc = dir.path().join("doc.txt");
    std::fs::write(&doc, "ababb\n").unwrap();
    let out = cfspanner(&["eval", &corpus_file("anbn_capture"), "--doc", doc.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(lines(&out).len(), 2);
}

#[test]
fn eval_limit_and_dump() {
    let out = cfspanner(&["eval", &corpus_file("any_span"), "--text", "abab", "--limit", "3"]);
    assert_eq!(stdout(&out).lines().count(), 3);
    let out = cfspanner(&[
        "eval",
        &corpus_file("anbn_capture"),
        "--text",
        "ab",
        "--dump-stage",
        "decorated",
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("->"));
    assert_eq!(stdout(&out).lines().count(), 1);
}

#[test]
fn compare_over_the_corpus_never_mismatches() {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "eg"))
        .collect();
    paths.sort();
    assert!(paths.len() >= 10);
    for path in paths {
        for d in documents(4) {
            let out = cfspanner(&["eval", path.to_str().unwrap(), "--text", &d, "--mode", "compare"]);
            assert_eq!(
                out.status.code(),
                Some(0),
                "{} on {d:?}: {}",
                path.display(),
                String::from_utf8_lossy(&out.stderr)
            );
        }
    }
}

#[test]
fn exit_codes() {
    let out = cfspanner(&["eval", &corpus_file("anbn_capture"), "--doc", "/nonexistent/doc.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());

    assert_eq!(cfspanner(&["eval"]).status.code(), Some(1));
    assert_eq!(cfspanner(&["--help"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.eg");
    std::fs::write(&bad, "vars: x\nstart: S\nS -> {x 'a' z}\n").unwrap();
    let out = cfspanner(&["eval", bad.to_str().unwrap(), "--text", "a"]);
    assert_eq!(out.status.code(), Some(2));

    let wide = dir.path().join("wide.eg");
    let vars: Vec<String> = (0..16).map(|i| format!("v{i}")).collect();
    std::fs::write(&wide, format!("vars: {}\nstart: S\nS -> 'a'\n", vars.join(", "))).unwrap();
    let out = cfspanner(&["eval", wide.to_str().unwrap(), "--text", "a"]);
    assert_eq!(out.status.code(), Some(3));

    let args = [
        "eval",
        &corpus_file("anbn_capture"),
        "--text",
        "ababb",
        "--mode",
        "compare",
        "--oracle-budget",
        "10",
    ];
    assert_eq!(cfspanner(&args).status.code(), Some(3));
    let out = Command::new(env!("CARGO_BIN_EXE_cfspanner"))
        .args(&args[..6])
        .env("CFSPANNER_ORACLE_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

fn write_transform(dir: &Path, name: &str, args: &[&str]) -> String {
    let out = cfspanner(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let path = dir.join(name);
    std::fs::write(&path, &out.stdout).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn transforms_reparse_and_preserve_semantics() {
    let dir = tempfile::tempdir().unwrap();
    let anbn_capture = corpus_file("anbn_capture");
    let functional = write_transform(dir.path(), "f.eg", &["transform", &anbn_capture, "--to", "functional"]);
    let cnf = write_transform(dir.path(), "c.eg", &["transform", &anbn_capture, "--to", "cnf"]);
    let twice = write_transform(
        dir.path(),
        "u.eg",
        &["transform", &anbn_capture, "--to", &format!("union:{anbn_capture}")],
    );
    for d in ["ab", "ababb", "aabb"] {
        let expected = lines(&cfspanner(&["eval", &anbn_capture, "--text", d, "--mode", "naive"]));
        for g in [&functional, &cnf, &twice] {
            let out = cfspanner(&["eval", g, "--text", d, "--mode", "compare"]);
            assert_eq!(out.status.code(), Some(0), "{g} on {d}");
            assert_eq!(lines(&out), expected, "{g} on {d}");
        }
    }

    let boolean = write_transform(dir.path(), "b.eg", &["transform", &anbn_capture, "--to", "project:"]);
    let report: Value = serde_json::from_slice(&cfspanner(&["check", &boolean]).stdout).unwrap();
    assert_eq!(report["variables"], Value::Array(Vec::new()));
    let out = cfspanner(&["eval", &boolean, "--text", "ab"]);
    assert_eq!(stdout(&out), "{}\n");

    let x_only = write_transform(dir.path(), "x.eg", &["transform", &anbn_capture, "--to", "project:x"]);
    let out = cfspanner(&["eval", &x_only, "--text", "ababb"]);
    assert_eq!(
        lines(&out),
        BTreeSet::from([r#"{"x":[1,2]}"#.to_string(), r#"{"x":[3,4]}"#.to_string()])
    );

    assert_eq!(
        cfspanner(&["transform", &anbn_capture, "--to", "bogus"]).status.code(),
        Some(1)
    );
}

#[test]
fn check_reports_grammar_properties() {
    let report: Value = serde_json::from_slice(&cfspanner(&["check", &corpus_file("regular_form")]).stdout).unwrap();
    assert_eq!(report["regular_form"], Value::Bool(true));
    assert_eq!(report["functional"], Value::Bool(true));
    assert_eq!(report["functional_witness"], Value::Null);

    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("nf.eg");
    std::fs::write(&g, "vars: x\nstart: S\nS -> {x 'a' x} | 'a'\n").unwrap();
    let report: Value = serde_json::from_slice(&cfspanner(&["check", g.to_str().unwrap()]).stdout).unwrap();
    assert_eq!(report["functional"], Value::Bool(false));
    assert!(report["functional_witness"].is_string());
}

fn bench(args: &[&str]) -> Value {
    let out = cfspanner(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn bench_delay_is_constant_across_lengths() {
    let grammar = corpus_file("disj_eq_len_unambiguous");
    let docs: Vec<String> = [8, 16, 32, 64].iter().map(|&n| "ab".repeat(n / 2)).collect();
    let mut args = vec!["bench", grammar.as_str(), "--repeats", "1"];
    for d in &docs {
        args.extend(["--text", d.as_str()]);
    }
    let report = bench(&args);
    assert_eq!(report["max_delay_constant"], Value::Bool(true));
    let runs = report["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 4);
    for run in runs {
        assert!(run["outputs"].as_u64().unwrap() > 0);
        assert!(run["preprocessing_ms"]["adjust"].is_number());
        assert!(run["delay"]["histogram"].is_object());
    }

    let again = bench(&args);
    let counts = |r: &Value| -> Vec<u64> {
        r["runs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|run| run["outputs"].as_u64().unwrap())
            .collect()
    };
    assert_eq!(counts(&report), counts(&again));
}

#[test]
fn bench_with_no_outputs() {
    let report = bench(&["bench", &corpus_file("anbn"), "--text", "ba"]);
    let run = &report["runs"][0];
    assert_eq!(run["outputs"], 0);
    assert!(run["preprocessing_ms"]["total"].is_number());
}
