//! End-to-end tests of the seqdesign binary: report contents, file round
//! trips, and exit codes (0 valid, 1 invalid verdict, 2 usage error).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_seqdesign"))
}

fn run(args: &[&str]) -> (Value, Output) {
    let output = bin().args(args).output().expect("binary runs");
    let stdout = String::from_utf8_lossy(&output.stdout);
    let json = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (json, output)
}

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("seqdesign-cli-{name}"));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn sequence_counts_and_first() {
    let (json, out) = run(&["sequence", "--action", "pgl2:8", "--mode", "count"]);
    assert!(out.status.success());
    assert_eq!(json["S"], 12);
    assert_eq!(json["T"], 271);
    assert_eq!(json["n"], 9);
    assert_eq!(json["k"], 3);

    let (json, out) = run(&["sequence", "--action", "alt:7", "--mode", "count"]);
    assert!(out.status.success(), "no sequencing is still exit 0");
    assert_eq!(json["S"], 0);

    let (json, _) = run(&["sequence", "--action", "affine:5", "--mode", "first"]);
    let first: Vec<String> = json["first"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert_eq!(first, ["1", "0", "2", "4", "3"]);
}

#[test]
fn sequence_report_is_deterministic() {
    let strip_elapsed = |v: &mut Value| {
        v.as_object_mut().unwrap().remove("elapsed_ms");
    };
    let (mut a, _) = run(&["sequence", "--action", "affine:8", "--mode", "enumerate"]);
    let (mut b, _) = run(&["sequence", "--action", "affine:8", "--mode", "enumerate"]);
    strip_elapsed(&mut a);
    strip_elapsed(&mut b);
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn rho_check_and_search() {
    let (json, out) = run(&["rho", "--action", "pgl2:5", "--check", "2,4,3"]);
    assert_eq!(out.status.code(), Some(1), "invalid verdict exits 1");
    assert_eq!(json["valid"], false);
    assert_eq!(json["violation"]["kind"], "vanishing-distinguisher");
    assert_eq!(json["violation"]["order"], 3);
    assert_eq!(json["violation"]["window"][0], 1);
    assert_eq!(json["violation"]["window"][1], 3);

    let (json, out) = run(&["rho", "--action", "affine:9", "--mode", "count"]);
    assert!(out.status.success());
    assert_eq!(json["S"], 52);

    let (json, out) = run(&["rho", "--action", "affine:7", "--check", "2,3,4,5,6"]);
    assert!(out.status.success());
    assert_eq!(json["valid"], true);
}

#[test]
fn design_verify_round_trip() {
    let dir = tmpdir("design");
    let csv = dir.join("d.csv");
    let (json, out) = run(&[
        "design",
        "--action",
        "affine:5",
        "--seq",
        "zigzag",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(json["rows"], 20);
    assert_eq!(json["t"], 3);

    // verify via sidecar (t and lambda come from the file)
    let sidecar = dir.join("d.csv.json");
    assert!(sidecar.exists());
    let (json, out) = run(&["verify", sidecar.to_str().unwrap()]);
    assert!(out.status.success(), "valid design exits 0");
    assert_eq!(json["valid"], true);
    assert_eq!(json["expected_tuples"], 60);

    // verify the bare CSV with explicit t
    let (json, out) = run(&["verify", csv.to_str().unwrap(), "--t", "3"]);
    assert!(out.status.success());
    assert_eq!(json["valid"], true);

    // drop a row: three triples go missing, exit code 1
    let text = std::fs::read_to_string(&csv).unwrap();
    let truncated: Vec<&str> = text.lines().take(19).collect();
    let broken = dir.join("broken.csv");
    std::fs::write(&broken, truncated.join("\n")).unwrap();
    let (json, out) = run(&["verify", broken.to_str().unwrap(), "--t", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json["valid"], false);
    assert_eq!(json["histogram"]["0"], 3);

    // bare CSV without --t is a usage error
    let (_, out) = run(&["verify", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn design_with_infinity_labels() {
    let dir = tmpdir("pgl");
    let csv = dir.join("pgl8.csv");
    let (json, out) = run(&[
        "design",
        "--action",
        "pgl2:8",
        "--seq",
        "first",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(json["rows"], 504);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.contains("inf"));

    let (json, out) = run(&["verify", csv.to_str().unwrap(), "--t", "4"]);
    assert!(out.status.success());
    assert_eq!(json["valid"], true);
    assert_eq!(json["expected_tuples"], 3024);
}

#[test]
fn carthage_analysis() {
    let dir = tmpdir("carthage");
    let csv = dir.join("d.csv");
    run(&[
        "design",
        "--action",
        "affine:5",
        "--seq",
        "zigzag",
        "--out",
        csv.to_str().unwrap(),
    ]);
    let (json, out) = run(&["carthage", csv.to_str().unwrap(), "--k", "2"]);
    assert!(out.status.success());
    assert_eq!(json["is_carthaginian"], true);
    assert_eq!(json["rectangle_condition"], true);
    assert_eq!(json["group_order"], 20);
    assert_eq!(json["sharply_transitive"], true);

    // a square that covers pairs but is not Latin fails, exit 1
    let rows = "0,1,2,3,4,5,6\n1,4,6,3,5,0,2\n2,6,1,0,5,4,3\n3,0,6,5,2,4,1\n4,2,5,1,3,6,0\n5,3,1,6,2,0,4\n6,4,0,3,2,1,5\n";
    let tuscan = dir.join("tuscan.csv");
    std::fs::write(&tuscan, rows).unwrap();
    let (json, out) = run(&["carthage", tuscan.to_str().unwrap(), "--k", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json["is_carthaginian"], false);
}

#[test]
fn locate_tuple() {
    let (json, out) = run(&[
        "locate",
        "--action",
        "affine:5",
        "--seq",
        "zigzag",
        "--tuple",
        "2,4,0",
    ]);
    assert!(out.status.success());
    assert_eq!(json["offset"], 0);
    let row: Vec<String> = json["row"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert_eq!(row, ["2", "4", "0", "1", "3"]);

    let (_, out) = run(&[
        "locate",
        "--action",
        "affine:5",
        "--seq",
        "zigzag",
        "--tuple",
        "2,4",
    ]);
    assert_eq!(out.status.code(), Some(2), "wrong tuple arity is a usage error");
}

#[test]
fn flat_designs() {
    let (json, out) = run(&["flat", "--action", "dihedral:5", "--narrow"]);
    assert!(out.status.success());
    assert_eq!(json["rows"], 10);
    assert_eq!(json["width"], 3);
    assert_eq!(json["lambda"], 1);
    assert_eq!(json["valid"], true);

    let (json, out) = run(&["flat", "--action", "dihedral:7", "--wide", "--seq", "zigzag"]);
    assert!(out.status.success());
    assert_eq!(json["rows"], 14);
    assert_eq!(json["lambda"], 2);
    assert_eq!(json["valid"], true);

    let (_, out) = run(&["flat", "--action", "dihedral:4", "--wide"]);
    assert_eq!(out.status.code(), Some(2), "even dihedral degree is rejected");
}

#[test]
fn estimate_and_table() {
    let (json, out) = run(&["estimate", "--m", "5"]);
    assert!(out.status.success());
    assert_eq!(json["expected_S"]["rendered"], "4.6");
    assert_eq!(json["expected_T"]["rendered"], "78.4");
    assert_eq!(json["expected_S"]["exact"], "576/125");

    let (json, out) = run(&["table2", "--qmax", "5"]);
    assert!(out.status.success());
    let rows = json["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2]["affine"]["S"], 1);
    assert_eq!(rows[2]["affine"]["T"], 8);
    assert_eq!(rows[2]["predicted"]["S"], "1.33");

    // text format renders an aligned table
    let out = bin()
        .args(["table2", "--qmax", "4", "--format", "text"])
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("predicted S/T"));
    assert!(text.contains("affine"));
}

#[test]
fn permfile_actions() {
    let gens = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/m11.gens");
    let spec = format!("permfile:{}:4", gens.display());
    let (json, out) = run(&["sequence", "--action", &spec, "--mode", "first"]);
    assert!(out.status.success());
    assert_eq!(json["n"], 11);
    assert_eq!(json["k"], 4);
    assert_eq!(json["kind"], "generic");
    assert!(json["first"].is_array());

    // budget env kills the closure
    let out = bin()
        .args(["sequence", "--action", &spec])
        .env("SEQDESIGN_BUDGET", "50")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("budget"));
}

#[test]
fn usage_errors() {
    let (_, out) = run(&["sequence", "--action", "affine:6"]);
    assert_eq!(out.status.code(), Some(2), "GF(6) does not exist");
    let (_, out) = run(&["sequence", "--action", "nonsense:5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["sequence"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "missing required argument");
}
