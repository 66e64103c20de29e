use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn decaf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_decaf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const TRIANGLE: &str = "ewcd 1 3 3\ne 0 1 2\ne 0 2 1\ne 1 2 1\n";

fn k6_text() -> String {
    let mut s = String::from("ewcd 1 6 15\n");
    for i in 0..6 {
        for j in i + 1..6 {
            s.push_str(&format!("e {i} {j} 1\n"));
        }
    }
    s
}

#[test]
fn triangle_yes_and_no() {
    let dir = tempfile::tempdir().unwrap();
    let tri = write(dir.path(), "tri.ewcd", TRIANGLE);

    let out = decaf(&["solve", "--input", &tri, "--k", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("yes\n"));
    assert_eq!(text.lines().filter(|l| l.starts_with("c ")).count(), 2);

    let out = decaf(&["solve", "--input", &tri, "--k", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("no\n"));
}

#[test]
fn every_preset_and_flag_combination_accepts_the_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let tri = write(dir.path(), "tri.ewcd", TRIANGLE);
    for preset in ["decaf", "cricca", "cricca-star"] {
        let out = decaf(&["solve", "--input", &tri, "--k", "2", "--preset", preset]);
        assert_eq!(out.status.code(), Some(0), "{preset}");
    }
    let out = decaf(&[
        "solve", "--input", &tri, "--k", "2", "--kernel", "none", "--order", "keep_first",
        "--srules", "01", "--symmetry-break", "--lp", "float", "--timeout", "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn k6_lifts_back_to_six_vertices() {
    let dir = tempfile::tempdir().unwrap();
    let k6 = write(dir.path(), "k6.ewcd", &k6_text());
    let sol = dir.path().join("k6.sol");
    let out = decaf(&["solve", "--input", &k6, "--k", "3", "--out", sol.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&sol).unwrap();
    let mut seen: Vec<usize> = text
        .lines()
        .filter(|l| l.starts_with("c "))
        .flat_map(|l| l.split_whitespace().skip(2).map(|t| t.parse::<usize>().unwrap()))
        .collect();
    seen.sort();
    seen.dedup();
    assert_eq!(seen, vec![0, 1, 2, 3, 4, 5]);
    assert!(text.contains("s n_kernel 1"));

    let out = decaf(&["verify", "--input", &k6, "--solution", sol.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn verify_reports_a_perturbed_weight() {
    let dir = tempfile::tempdir().unwrap();
    let tri = write(dir.path(), "tri.ewcd", TRIANGLE);
    let good = write(dir.path(), "good.sol", "yes\nc 1 0 1 2\nc 1 0 1\n");
    let bad = write(dir.path(), "bad.sol", "yes\nc 1 0 1 2\nc 3/2 0 1\n");

    assert_eq!(decaf(&["verify", "--input", &tri, "--solution", &good]).status.code(), Some(0));
    let out = decaf(&["verify", "--input", &tri, "--solution", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("(0, 1)"));
}

#[test]
fn data_errors_exit_65() {
    let dir = tempfile::tempdir().unwrap();
    let tri = write(dir.path(), "tri.ewcd", TRIANGLE);
    let outside = write(dir.path(), "outside.sol", "yes\nc 1 0 7\n");
    assert_eq!(decaf(&["verify", "--input", &tri, "--solution", &outside]).status.code(), Some(65));

    let broken = write(dir.path(), "broken.ewcd", "ewcd 1 3 1\ne 0 0 1\n");
    let out = decaf(&["solve", "--input", &broken, "--k", "2"]);
    assert_eq!(out.status.code(), Some(65));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 2"));

    let missing = dir.path().join("nope.ewcd");
    let out = decaf(&["solve", "--input", missing.to_str().unwrap(), "--k", "2"]);
    assert_eq!(out.status.code(), Some(65));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(decaf(&["solve", "--k", "2"]).status.code(), Some(64));
    assert_eq!(decaf(&["frobnicate"]).status.code(), Some(64));
    let dir = tempfile::tempdir().unwrap();
    let tri = write(dir.path(), "tri.ewcd", TRIANGLE);
    assert_eq!(
        decaf(&["solve", "--input", &tri, "--k", "2", "--preset", "fast"]).status.code(),
        Some(64)
    );
    assert_eq!(decaf(&["--help"]).status.code(), Some(0));
}

#[test]
fn kernelize_prints_a_loadable_instance() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = k6_text().replace("ewcd 1 6 15", "ewcd 1 7 16");
    text.push_str("e 5 6 1\n");
    let inp = write(dir.path(), "k6p.ewcd", &text);
    let out = decaf(&["kernelize", "--input", &inp, "--k", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let kernel = write(dir.path(), "kernel.ewcd", &String::from_utf8(out.stdout).unwrap());
    assert_eq!(decaf(&["solve", "--input", &kernel, "--k", "2"]).status.code(), Some(0));

    let out = decaf(&["kernelize", "--input", &inp, "--k", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn generate_bench_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let out = decaf(&[
        "generate", "--n", "20", "--k-values", "2,3", "--per-k", "2", "--multipliers", "1,0.5",
        "--size-max", "8", "--seed", "9", "--out", corpus.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read_dir(&corpus).unwrap().count(), 16);

    let csv = dir.path().join("bench.csv");
    let out = decaf(&[
        "bench", "--corpus", corpus.to_str().unwrap(), "--configs", "decaf,cricca,none:arbitrary:none",
        "--timeout", "10", "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let records = decaf::io::read_bench_csv(fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(records.len(), 8 * 3);
    for r in &records {
        if r.expected == "yes" || r.expected == "no" {
            assert!(r.outcome == r.expected || r.outcome == "timeout", "{r:?}");
        }
    }
}

#[test]
fn oracle_minimal_k() {
    let dir = tempfile::tempdir().unwrap();
    let tri = write(dir.path(), "tri.ewcd", TRIANGLE);
    let out = decaf(&["oracle", "--input", &tri, "--minimal-k", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "minimal_k 2");
    assert_eq!(decaf(&["oracle", "--input", &tri, "--k", "1"]).status.code(), Some(1));
}
