use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};
use tokcomp::compression::{compression_table, format_pct};
use tokcomp::grid::{correlate_grid, ResultsGrid};
use tokcomp::lm::zerogram_loglik;

fn tokcomp(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tokcomp"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split('\t').map(str::to_owned).collect()).collect()
}

fn grid_fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/support_grid.tsv")
}

fn digest(path: &Path) -> Vec<u8> {
    Sha256::digest(fs::read(path).unwrap()).to_vec()
}

const CORPUS: &str = "the cat sat on the mat\nthe dog sat on the log\nthe cat and the dog\n";

#[test]
fn train_writes_one_model_per_support() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.txt"), "abab abab abab\n").unwrap();
    let out = stdout(&tokcomp(&["train", "--corpus", "c.txt", "--supports", "0,1", "--vocab-size", "300", "--out", "m"], dir.path()));
    let table = rows(&out);
    assert_eq!(table.len(), 2);
    assert_eq!((table[0][0].as_str(), table[0][3].as_str()), ("char", "0"));
    assert_eq!(table[1][0], "1-doc");
    let char_model = tokcomp::bpe::load_model(&dir.path().join("m/char.model")).unwrap();
    assert!(char_model.merges().is_empty());
    let trained = tokcomp::bpe::load_model(&dir.path().join("m/1-doc.model")).unwrap();
    assert!(!trained.merges().is_empty());
}

#[test]
fn train_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.txt"), CORPUS.repeat(5)).unwrap();
    let args = |out: &'static str| ["train", "--corpus", "c.txt", "--supports", "0,1,10", "--vocab-size", "120", "--out", out];
    stdout(&tokcomp(&args("a"), dir.path()));
    stdout(&tokcomp(&args("b"), dir.path()));
    for name in ["char", "1-doc", "10-doc"] {
        let file = format!("{name}.model");
        assert_eq!(digest(&dir.path().join("a").join(&file)), digest(&dir.path().join("b").join(&file)), "{name}");
    }
}

#[test]
fn compress_reports_relative_lengths() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.txt"), CORPUS.repeat(3)).unwrap();
    stdout(&tokcomp(&["train", "--corpus", "c.txt", "--supports", "0,3", "--vocab-size", "250", "--out", "m"], dir.path()));

    let single = rows(&stdout(&tokcomp(&["compress", "--heldout", "c.txt", "m/3-doc.model"], dir.path())));
    assert_eq!(single[0][4], "+0%");

    let both = rows(&stdout(&tokcomp(&["compress", "--heldout", "c.txt", "m/char.model", "m/3-doc.model"], dir.path())));
    assert_eq!(both[0][0], "3-doc");
    assert_eq!(both[1][0], "char");
    let tokens: Vec<u64> = both.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(tokens[1] > tokens[0]);
    assert_eq!(both[1][2], both[1][3], "char tokens equal non-whitespace chars");
}

#[test]
fn published_counts_format_as_percentages() {
    let counts = [9_336_052u64, 9_541_368, 10_489_029, 15_126_769, 20_647_861, 39_480_577];
    let supports = [1_000_000usize, 1000, 100, 10, 1, 0];
    let rows = supports.iter().zip(counts).map(|(&s, c)| (s.to_string(), s, c, c)).collect();
    let pct: Vec<String> = compression_table(rows)
        .unwrap()
        .iter()
        .map(|r| format_pct(r.relative_length_pct.unwrap()))
        .collect();
    assert_eq!(pct, ["+0%", "+2%", "+12%", "+62%", "+121%", "+323%"]);
}

#[test]
fn correlate_prints_the_library_results() {
    let dir = tempfile::tempdir().unwrap();
    let grid = grid_fixture();
    let out = rows(&stdout(&tokcomp(&["correlate", "--grid", grid.to_str().unwrap()], dir.path())));
    let lib = correlate_grid(&ResultsGrid::load(&grid).unwrap()).unwrap();
    assert_eq!(out.len(), 12);
    for (row, r) in out.iter().zip(&lib) {
        assert_eq!(row[0], r.metric);
        let s = &r.spearman;
        assert_eq!(row[1], format!("{:.3}{}", s.coefficient, tokcomp::stats::stars(s.p_value.unwrap())));
        assert!(row[3].starts_with(&format!("{:.3}", r.pearson.coefficient)));
    }
    assert_eq!(out[2][1], "0.943**");
    assert_eq!(out[0][1], "0.714");
    assert_eq!(out[9][3], "-0.710");

    let structured = stdout(&tokcomp(&["--report", "structured", "correlate", "--grid", grid.to_str().unwrap()], dir.path()));
    let first: serde_json::Value = serde_json::from_str(structured.lines().next().unwrap()).unwrap();
    assert_eq!(first["metric"], "1B/QQP");
    assert_eq!(first["pearson"]["coefficient"].as_f64().unwrap(), lib[0].pearson.coefficient);
}

#[test]
fn rouge_matrix_of_identical_outputs_is_all_ones() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.txt"), "the cat sat\na dog\n").unwrap();
    fs::write(dir.path().join("b.txt"), "the cat sat\na dog\n").unwrap();
    let out = rows(&stdout(&tokcomp(&["rouge-matrix", "a.txt", "b.txt"], dir.path())));
    assert_eq!(out, vec![vec!["a", "1.000", "1.000"], vec!["b", "1.000", "1.000"]]);
}

#[test]
fn char_model_scores_two_characters() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.txt"), "x\n").unwrap();
    stdout(&tokcomp(&["train", "--corpus", "c.txt", "--supports", "0", "--out", "m"], dir.path()));
    let vocab = tokcomp::bpe::load_model(&dir.path().join("m/char.model")).unwrap().vocab_size();
    let out = rows(&stdout(&tokcomp(&["lm-score", "--model", "m/char.model", "--text", "ab"], dir.path())));
    let ll: f64 = out[0][0].parse().unwrap();
    assert_eq!(ll, zerogram_loglik(2, vocab).unwrap());
    assert_eq!(ll, -2.0 * (vocab as f64).ln());
}

#[test]
fn frequency_commands_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.txt"), CORPUS).unwrap();
    let count = rows(&stdout(&tokcomp(&["count", "--corpus", "c.txt", "--out", "f.tsv"], dir.path())));
    assert_eq!(count[0], ["3", "8", "17"]);
    let cov = rows(&stdout(&tokcomp(&["coverage", "--freq-table", "f.tsv", "--threshold", "2"], dir.path())));
    assert_eq!(cov[0][..2], ["2", "5"]);
    stdout(&tokcomp(&["train", "--corpus", "c.txt", "--supports", "0", "--out", "m"], dir.path()));
    let freq = rows(&stdout(&tokcomp(&["freq", "--freq-table", "f.tsv", "m/char.model"], dir.path())));
    let types: usize = freq.iter().map(|r| r[1].parse::<usize>().unwrap()).sum();
    assert_eq!(types, 8);
    let profile = rows(&stdout(&tokcomp(&["profile", "--freq-table", "f.tsv", "--examples", "c.txt", "--bin-fraction", "0.5"], dir.path())));
    assert_eq!(profile.iter().map(|r| r[1].as_str()).collect::<Vec<_>>(), ["2", "1"]);
}

#[test]
fn exit_codes_follow_the_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.txt"), CORPUS).unwrap();
    fs::write(dir.path().join("bad.model"), "tokcomp-bpe\nformat_version 1\n").unwrap();
    let code = |args: &[&str]| tokcomp(args, dir.path()).status.code().unwrap();
    assert_eq!(code(&["train", "--corpus", "c.txt", "--supports", "3,1", "--out", "m"]), 2);
    assert_eq!(code(&["train", "--corpus", "c.txt", "--supports", "1", "--vocab-size", "2", "--out", "m"]), 2);
    assert_eq!(code(&["coverage", "--freq-table", "missing.tsv", "--threshold", "1"]), 3);
    assert_eq!(code(&["lm-score", "--model", "bad.model", "--text", "a"]), 4);
    assert_eq!(code(&["correlate", "--grid", "c.txt"]), 4);
    assert_eq!(code(&["correlate", "--no-such-flag"]), 2);
}
