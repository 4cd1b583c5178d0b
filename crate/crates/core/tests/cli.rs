use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use melodic_maxent::cli::{ArtifactInfo, Encoding};
use melodic_maxent::TrainReport;
use tempfile::TempDir;

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/structured_melody.txt")
}

fn melomax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_melomax"))
        .args(args)
        .env_remove("MELOMAX_OUT")
        .output()
        .expect("spawn melomax")
}

fn ok(args: &[&str]) {
    let out = melomax(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn info(dir: &Path) -> ArtifactInfo {
    serde_json::from_str(&fs::read_to_string(dir.join("artifact.json")).unwrap()).unwrap()
}

/// Ingests the first `n` notes of the fixture.
fn small_corpus(tmp: &Path, n: usize) -> PathBuf {
    let text = fs::read_to_string(fixture()).unwrap();
    let notes: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .flat_map(str::split_whitespace)
        .take(n)
        .collect();
    let src = tmp.join(format!("first_{n}.txt"));
    fs::write(&src, notes.join(" ")).unwrap();
    let out = tmp.join(format!("corpus_{n}"));
    ok(&["ingest", s(&src), "--out", s(&out)]);
    out
}

#[test]
fn ingest_records_q_and_n() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("c");
    ok(&["ingest", s(&fixture()), "--out", s(&out)]);
    let meta = info(&out);
    assert_eq!(meta.kind, "corpus");
    assert_eq!(meta.encoding, Encoding::Pitch);
    assert_eq!(meta.n, Some(3000));
    assert_eq!(meta.q, 15);
    assert!(out.join("manifest.json").is_file());
}

#[test]
fn ingest_intervals_needs_two_notes() {
    let tmp = TempDir::new().unwrap();
    let src = tmp.path().join("one.txt");
    fs::write(&src, "60\n").unwrap();
    let out = melomax(&["ingest", s(&src), "--intervals", "--out", s(&tmp.path().join("c"))]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("at least 2"), "{err}");
}

#[test]
fn reingest_is_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&["ingest", s(&fixture()), "--intervals", "--out", s(&a)]);
    ok(&["ingest", s(&fixture()), "--intervals", "--out", s(&b)]);
    for f in ["sequence.txt", "alphabet.json", "artifact.json", "manifest.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_eq!(info(&a).encoding, Encoding::Interval);
}

#[test]
fn malformed_corpus_is_a_data_error() {
    let tmp = TempDir::new().unwrap();
    let src = tmp.path().join("bad.txt");
    fs::write(&src, "60 62\n64 x 65\n").unwrap();
    let out = melomax(&["ingest", s(&src), "--out", s(&tmp.path().join("c"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn stronger_penalty_zeroes_more_couplings() {
    let tmp = TempDir::new().unwrap();
    let corpus = small_corpus(tmp.path(), 600);
    let fraction = |lambda: &str| {
        let out = tmp.path().join(format!("m{lambda}"));
        ok(&["train", s(&corpus), "--kmax", "3", "--lambda", lambda, "--out", s(&out)]);
        let report: TrainReport =
            serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
        assert!(report.converged, "lambda {lambda} did not converge");
        report.zero_coupling_fraction
    };
    let loose = fraction("0");
    let tight = fraction("8");
    assert!(tight > loose, "{tight} <= {loose}");
}

#[test]
fn kmax_too_large_for_corpus() {
    let tmp = TempDir::new().unwrap();
    let corpus = small_corpus(tmp.path(), 20);
    let out = melomax(&["train", s(&corpus), "--kmax", "10", "--out", s(&tmp.path().join("m"))]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("at least 21") && err.contains("at most 9"), "{err}");
}

#[test]
fn train_reads_toml_config() {
    let tmp = TempDir::new().unwrap();
    let corpus = small_corpus(tmp.path(), 300);
    let cfg = tmp.path().join("train.toml");
    fs::write(&cfg, "k_max = 2\nlambda = 1.0\n").unwrap();
    let out = tmp.path().join("m");
    ok(&["train", s(&corpus), "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(info(&out).k_max, Some(2));
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "k_max = 2\nlamda = 1.0\n").unwrap();
    let run = melomax(&["train", s(&corpus), "--config", s(&bad), "--out", s(&out)]);
    assert_eq!(run.status.code(), Some(3));
}

#[test]
fn generators_and_batch_evaluation() {
    let tmp = TempDir::new().unwrap();
    let root = tmp.path();
    let corpus = small_corpus(root, 400);
    let model = root.join("model");
    ok(&["train", s(&corpus), "--kmax", "2", "--out", s(&model)]);

    let gens = root.join("gens");
    let maxent = gens.join("maxent");
    ok(&["generate", "--model", s(&model), "--n", "500", "--seed", "7", "--out", s(&maxent)]);
    let again = root.join("maxent_again");
    ok(&["generate", "--model", s(&model), "--n", "500", "--seed", "7", "--out", s(&again)]);
    assert_eq!(
        fs::read(maxent.join("sequence.txt")).unwrap(),
        fs::read(again.join("sequence.txt")).unwrap()
    );

    let fo = gens.join("fo");
    ok(&["generate", "--markov", "fo", "--corpus", s(&corpus), "--order", "1", "--n", "300", "--out", s(&fo)]);
    assert!(fo.join("markov.json").is_file());
    assert_eq!(info(&fo).generator.as_deref(), Some("fo"));

    let vo = gens.join("vo");
    ok(&["generate", "--markov", "vo", "--corpus", s(&corpus), "--vo-kmax", "10", "--n", "300", "--out", s(&vo)]);
    let log = fs::read_to_string(vo.join("vo_log.csv")).unwrap();
    assert_eq!(log.lines().next(), Some("position,order,distinct_continuations"));
    assert_eq!(log.lines().count(), 301);

    let single = root.join("self");
    ok(&["evaluate", s(&corpus), s(&corpus), "--out", s(&single)]);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(single.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["lcs"], 399);

    let batch = root.join("batch");
    ok(&["evaluate", s(&corpus), "--batch", s(&gens), "--out", s(&batch)]);
    let csv = fs::read_to_string(batch.join("similarity.csv")).unwrap();
    let models: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(models, ["fo", "maxent", "vo"]);
}

#[test]
fn markov_needs_corpus() {
    let out = melomax(&["generate", "--markov", "fo", "--n", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_artifact_is_a_file_error() {
    let tmp = TempDir::new().unwrap();
    let gone = tmp.path().join("nowhere");
    let out = melomax(&["evaluate", s(&gone), s(&gone), "--out", s(&tmp.path().join("e"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere"));
}

#[test]
fn analyze_figures_write_tables() {
    let tmp = TempDir::new().unwrap();
    let root = tmp.path();
    let corpus = small_corpus(root, 500);
    let fo = root.join("fo");
    ok(&["generate", "--markov", "fo", "--corpus", s(&corpus), "--n", "500", "--seed", "1", "--out", s(&fo)]);
    let run = |figure: &str, extra: &[&str]| {
        let out = root.join(figure);
        let mut args = vec!["analyze", s(&corpus), s(&fo), "--figure", figure, "--out", s(&out)];
        args.extend_from_slice(extra);
        ok(&args);
        out
    };

    let rank = run("rankfreq", &["--max-len", "6"]);
    let table = fs::read_to_string(rank.join("rankfreq.csv")).unwrap();
    let lengths: std::collections::BTreeSet<&str> =
        table.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(lengths.into_iter().collect::<Vec<_>>(), ["1", "2", "3", "4", "5", "6"]);

    let inno = run("innovation", &["--lengths", "2..8"]);
    let rows = fs::read_to_string(inno.join("innovation.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 7);
    for line in rows.lines().skip(1) {
        let v: Vec<usize> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(v[2] <= v[1] && v[3] <= v[4], "{line}");
    }

    let mats = run("matrices", &["--k", "1", "--k", "5"]);
    let frob = fs::read_to_string(mats.join("frobenius.csv")).unwrap();
    assert_eq!(frob.lines().count(), 3);
    assert!(mats.join("corpus_matrices.csv").is_file());
    assert!(mats.join("generated_matrices.csv").is_file());

    let scatter = run("scatter", &["--kmax", "4"]);
    assert!(scatter.join("scatter.csv").is_file());
    assert!(scatter.join("summary.json").is_file());
}

#[test]
fn replay_detects_changed_input() {
    let tmp = TempDir::new().unwrap();
    let src = tmp.path().join("c.txt");
    fs::write(&src, "60 62 64 62 60").unwrap();
    let out = tmp.path().join("c");
    ok(&["ingest", s(&src), "--out", s(&out)]);
    ok(&["replay", s(&out)]);
    fs::write(&src, "60 62 64 62 61").unwrap();
    let run = melomax(&["replay", s(&out.join("manifest.json"))]);
    assert_eq!(run.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&run.stderr).contains("replay mismatch"));
}

#[test]
fn default_output_root_comes_from_environment() {
    let tmp = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_melomax"))
        .args(["ingest", s(&fixture())])
        .env("MELOMAX_OUT", tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(tmp.path().join("ingest/sequence.txt").is_file());
}
