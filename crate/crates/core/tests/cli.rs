use corechase::backerr::{matched_distance, CSV_HEADER};
use corechase::cli::run;
use corechase::Complex64;
use std::path::PathBuf;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["corechase"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("corechase-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn parse_roots(text: &str) -> Vec<Complex64> {
    text.lines()
        .map(|l| {
            let (re, im) = l.split_once(',').unwrap();
            Complex64::new(re.parse().unwrap(), im.parse().unwrap())
        })
        .collect()
}

#[test]
fn inline_quadratic() {
    let (code, out, _) = call(&["roots", "--inline", "-1,0,1"]);
    assert_eq!(code, 0);
    let roots = parse_roots(&out);
    let exact = [Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)];
    assert!(matched_distance(&roots, &exact) <= 1e-14);
}

#[test]
fn qz_and_qr_agree_on_file_input() {
    // (z-1)(z-2)(z-3)(z+i)(z-i) expanded, ascending
    let path = scratch("quintic.json", "[[-6,0],[11,0],[-12,0],[12,0],[-6,0],[1,0]]");
    let file = path.to_str().unwrap();
    let (c1, qr, _) = call(&["roots", file, "--method", "qr"]);
    let (c2, qz, _) = call(&["roots", file, "--method", "qz"]);
    assert_eq!((c1, c2), (0, 0));
    let (qr, qz) = (parse_roots(&qr), parse_roots(&qz));
    assert!(matched_distance(&qr, &qz) <= 1e-9);
    let exact = [1.0, 2.0, 3.0].map(|x| Complex64::new(x, 0.0));
    let exact: Vec<Complex64> = exact.into_iter().chain([Complex64::i(), -Complex64::i()]).collect();
    assert!(matched_distance(&qr, &exact) <= 1e-10);
}

#[test]
fn malformed_json_names_token() {
    let path = scratch("bad.json", "[[1,0],[2,0]x]");
    let (code, out, err) = call(&["roots", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("`x`"), "{err}");
}

#[test]
fn experiment_grid_is_deterministic() {
    let args = ["experiment", "--samples", "2", "--degrees", "10", "--seed", "7"];
    let (c1, a, _) = call(&args);
    let (c2, b, _) = call(&args);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    let rows: Vec<&str> = a.lines().filter(|l| l.starts_with("companionQR,")).collect();
    assert_eq!(a.lines().next(), Some(CSV_HEADER));
    assert_eq!(rows.len(), 24);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(call(&["bench", "--repeats", "0"]).0, 1);
    assert_eq!(call(&["roots", "--inline", "1,nope"]).0, 1);
    assert_eq!(call(&["roots", "--inline", "0"]).0, 1);
    assert_eq!(call(&["frobnicate"]).0, 1);
    assert_eq!(call(&["--help"]).0, 0);
}

#[test]
fn json_output_with_diagnostics() {
    let (code, out, _) = call(&["roots", "--inline", "2,-3,1", "--json", "--diagnostics"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["roots"].as_array().unwrap().len(), 2);
    assert!(v["diagnostics"]["sweeps"].as_u64().is_some());
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_corechase");
    let ok = std::process::Command::new(bin).args(["roots", "--inline", "-2,0,1"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&ok.stdout).lines().count(), 2);
    let bad = std::process::Command::new(bin).args(["roots", "--method", "lu", "--inline", "1,1"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
