use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const PROTEIN: &str = "\
ustr protein
pos P:1
pos S:0.7 F:0.3
pos F:1
pos P:1
pos Q:0.5 T:0.5
pos P:1
pos A:0.4 F:0.4 P:0.2
pos I:0.2 L:0.2 P:0.3 T:0.3
pos A:1
pos S:0.5 T:0.5
pos A:1
end
";

const TRIO: &str = "\
ustr d1
pos A:0.4 B:0.3 F:0.3
pos B:0.3 L:0.3 F:0.3 J:0.1
pos F:0.5 J:0.5
end
ustr d2
pos A:0.6 C:0.4
pos B:0.5 F:0.3 J:0.2
pos B:0.4 C:0.3 E:0.2 F:0.1
end
ustr d3
pos A:0.4 F:0.4 P:0.2
pos I:0.3 L:0.3 P:0.3 T:0.1
pos A:1
end
";

fn ustrix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ustrix"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn build(dir: &TempDir, src: &str, extra: &[&str]) -> PathBuf {
    let input = write(dir, "in.ust", src);
    let idx = dir.path().join("in.idx");
    let mut args = vec!["build", s(&input), "--out", s(&idx)];
    args.extend_from_slice(extra);
    let o = ustrix(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    idx
}

#[test]
fn query_prints_positions() {
    let dir = TempDir::new().unwrap();
    let idx = build(&dir, PROTEIN, &["--tau-min", "0.1"]);
    let o = ustrix(&["query", s(&idx), "--pattern", "AT", "--tau", "0.4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "9\n");
}

#[test]
fn query_batch_one_line_per_pattern() {
    let dir = TempDir::new().unwrap();
    let idx = build(&dir, PROTEIN, &["--tau-min", "0.1"]);
    let o = ustrix(&["query", s(&idx), "-p", "P", "-p", "ZZ", "-p", "AT", "--tau", "0.4"]);
    assert_eq!(stdout(&o), "1 4 6\n\n9\n");
}

#[test]
fn list_prints_document_names() {
    let dir = TempDir::new().unwrap();
    let idx = build(&dir, TRIO, &["--tau-min", "0.1"]);
    let o = ustrix(&["list", s(&idx), "--pattern", "BF", "--tau", "0.1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "d1\n");
}

#[test]
fn json_output_has_one_object_per_result() {
    let dir = TempDir::new().unwrap();
    let idx = build(&dir, PROTEIN, &["--tau-min", "0.1", "--epsilon", "0.05"]);
    let o = ustrix(&["query", s(&idx), "--pattern", "AT", "--tau", "0.4", "--json"]);
    let rows: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["position"], 9);
    assert!((rows[0]["probability"].as_f64().unwrap() - 0.5).abs() < 1e-9);

    let o = ustrix(&["approx", s(&idx), "--pattern", "AT", "--tau", "0.4"]);
    assert_eq!(stdout(&o), "9\n");

    let dir = TempDir::new().unwrap();
    let idx = build(&dir, TRIO, &["--tau-min", "0.1", "--metric", "or"]);
    let o = ustrix(&["list", s(&idx), "--pattern", "BF", "--tau", "0.1", "--json"]);
    let rows: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["doc"], "d1");
    assert!(rows[0]["relevance"].as_f64().unwrap() > 0.1);
}

#[test]
fn tau_below_floor_is_a_threshold_error() {
    let dir = TempDir::new().unwrap();
    let idx = build(&dir, PROTEIN, &["--tau-min", "0.2"]);
    let o = ustrix(&["query", s(&idx), "--pattern", "AT", "--tau", "0.1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("tau_min"));
}

#[test]
fn parse_error_names_file_and_line() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.ust", "ustr x\npos A:0.5 B:oops\nend\n");
    let idx = dir.path().join("x.idx");
    let o = ustrix(&["build", s(&bad), "--tau-min", "0.1", "--out", s(&idx)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.ust:2:"), "{}", stderr(&o));

    let unnormalized = write(&dir, "sum.ust", "ustr x\npos A:0.5 B:0.2\nend\n");
    let o = ustrix(&["build", s(&unnormalized), "--tau-min", "0.1", "--out", s(&idx)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("sum.ust:1:"), "{}", stderr(&o));
}

#[test]
fn capacity_error_names_flag() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "in.ust", PROTEIN);
    let idx = dir.path().join("in.idx");
    let o = ustrix(&["build", s(&input), "--tau-min", "0.1", "--max-text-len", "5", "--out", s(&idx)]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("--max-text-len"), "{}", stderr(&o));
}

#[test]
fn missing_index_kind_is_reported() {
    let dir = TempDir::new().unwrap();
    let idx = build(&dir, PROTEIN, &["--tau-min", "0.1"]);
    let o = ustrix(&["approx", s(&idx), "--pattern", "AT", "--tau", "0.4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--epsilon"));
}

#[test]
fn verify_seeded_strings() {
    let o = ustrix(&["verify", "--count", "50", "--max-len", "40"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).starts_with("ok: 50 instance(s)"));
}

#[test]
fn verify_input_file() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "trio.ust", TRIO);
    let o = ustrix(&["verify", "--input", s(&input), "--tau-min", "0.1"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
}

#[test]
fn gen_then_build_round_trip() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("g.ust");
    let args = ["gen", "--random", "300", "--alphabet", "ACGT", "--theta", "0.3", "--samples", "8", "--seed", "4"];
    let mut with_out = args.to_vec();
    with_out.extend(["--out", s(&out)]);
    assert!(ustrix(&with_out).status.success());
    let again = ustrix(&args);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), stdout(&again));

    let idx = dir.path().join("g.idx");
    let o = ustrix(&["build", s(&out), "--tau-min", "0.2", "--out", s(&idx)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let a = ustrix(&["query", s(&idx), "-p", "AC", "-p", "GTA", "--tau", "0.3"]);
    let b = ustrix(&["query", s(&idx), "-p", "AC", "-p", "GTA", "--tau", "0.3"]);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(stdout(&a).lines().count(), 2);
}

#[test]
fn gen_chunks_into_collection() {
    let o = ustrix(&[
        "gen", "--random", "200", "--alphabet", "ACGT", "--samples", "4", "--chunk-mean", "50", "--chunk-sd", "5",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).matches("ustr ").count() >= 3);
}

#[test]
fn bench_emits_csv() {
    let o = ustrix(&["bench", "--axis", "m", "--values", "2,4", "--n", "500", "--queries", "20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "axis,value,mean_query_us,mean_outputs");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("m,2,"));
}
