use std::path::Path;
use std::process::{Command, Output};

fn dht(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dht"))
        .args(args)
        .env("DHT_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const HAMMING_ROC: &[&str] = &[
    "roc", "--scheme", "quantization", "--code", "hamming-7-4", "--p0", "0.5", "--p1", "0.5", "--c0", "0.1",
    "--c1", "0.4",
];

#[test]
fn code_info_reports_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let o = dht(&["code-info", "--code", "bch-31-16"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("n=31 k=16 d_min=7"), "{text}");
    assert!(text.contains("covering radius 5"), "{text}");
}

#[test]
fn analytic_csv_has_header_and_full_grid() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = HAMMING_ROC.to_vec();
    args.extend(["--engine", "analytic"]);
    let o = dht(&args, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("scheme,setup,n,rate,threshold,alpha,beta,alpha_ci,beta_ci,trials,engine,seed")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 9);
    assert!(rows[0].starts_with("quantization,asym,7,"));
    assert!(!text.contains("-0"), "negative zero in output:\n{text}");
}

#[test]
fn out_file_gets_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("roc.csv");
    let mut args = HAMMING_ROC.to_vec();
    args.extend(["--trials", "500", "--seed", "0x2a", "--out", out.to_str().unwrap()]);
    let o = dht(&args, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 1 + 9);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("roc.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["command"], "roc");
    assert!(manifest["codes"].as_array().is_some_and(|c| !c.is_empty()));
}

#[test]
fn json_output_is_a_single_document() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = HAMMING_ROC.to_vec();
    args.extend(["--trials", "300", "--format", "json"]);
    let o = dht(&args, dir.path());
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[0]["trials"], 300);
    assert_eq!(doc["manifest"]["parameters"]["scheme"], "quantization");
}

#[test]
fn reruns_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = HAMMING_ROC.to_vec();
    args.extend(["--trials", "2000", "--seed", "17", "--setup", "sym"]);
    let a = dht(&args, dir.path());
    let b = dht(&args, dir.path());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn enumeration_is_cached() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["enumerate", "--code", "hamming-7-4", "--what", "cosets"];
    let first = stdout(&dht(&args, dir.path()));
    let second = stdout(&dht(&args, dir.path()));
    assert!(first.contains("E0=1 E1=7"), "{first}");
    assert!(first.contains("miss"), "{first}");
    assert!(second.contains("hit"), "{second}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| dht(args, dir.path()).status.code();

    // Usage: missing length for an uncoded scheme, unknown flag, bad number.
    assert_eq!(code(&["roc", "--scheme", "separate", "--p0", "0.1", "--p1", "0.5", "--c0", "0.1", "--c1", "0.3"]), Some(2));
    assert_eq!(code(&["roc", "--bogus"]), Some(2));
    assert_eq!(code(&["exponent", "--p0", "abc", "--p1", "0.5", "--rate", "0.4"]), Some(2));

    // An unknown code name is a usage error too.
    assert_eq!(code(&["code-info", "--code", "no-such-code"]), Some(2));

    // Out of scope: no closed form for the symmetric setup.
    let mut sym = HAMMING_ROC.to_vec();
    sym.extend(["--setup", "sym", "--engine", "analytic"]);
    assert_eq!(code(&sym), Some(3));

    // Budget: coset enumeration of a 27-bit redundancy code.
    assert_eq!(code(&["enumerate", "--code", "bch-63-36", "--what", "cosets"]), Some(4));
}

#[test]
fn exponent_reports_both_bases() {
    let dir = tempfile::tempdir().unwrap();
    let o = dht(&["exponent", "--p0", "0.05", "--p1", "0.5", "--rate", "0.4", "--delta", "0.1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("exp(-n*theta)") && text.contains("2^(-n*theta)"), "{text}");
}
