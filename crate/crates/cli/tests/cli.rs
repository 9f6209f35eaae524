mod common;

use std::path::Path;
use std::process::{Command, Output};

use khier::io::{instance_to_string, parse_certificate, parse_instance};
use khier_core::generators::{gen_khachiyan, gen_mild};

fn khier(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_khier")).args(args).env("NO_COLOR", "1").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn generate_round_trips_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    for (family, size, coeffs) in [
        ("khachiyan", "4", None),
        ("exact-khachiyan", "3", None),
        ("mild", "4", None),
        ("perturbed-khachiyan", "0", None),
        ("polyopt", "3", Some("1,0,0,0,0,0,1")),
        ("odonnell", "3", None),
    ] {
        let out = path(dir.path(), &format!("{family}.json"));
        let mut args = vec!["generate", "--family", family, "--size", size, "--out", &out];
        if let Some(c) = coeffs {
            args.extend(["--coeffs", c]);
        }
        assert!(khier(&args).status.success(), "{family}");
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(instance_to_string(&parse_instance(&text).unwrap()), text, "{family}");
    }
    let polyopt = std::fs::read_to_string(dir.path().join("polyopt.json")).unwrap();
    assert_eq!(parse_instance(&polyopt).unwrap().n(), 4);
}

#[test]
fn analyze_reports_golden_hierarchies() {
    let dir = tempfile::tempdir().unwrap();
    let kh = path(dir.path(), "kh.json");
    khier(&["generate", "--family", "khachiyan", "--size", "4", "--out", &kh]);
    let o = khier(&["analyze", "--in", &kh]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("alpha recursion: (2, 2, 2)"), "{text}");
    assert!(text.contains("magnitude gap:   8"), "{text}");

    let mild = path(dir.path(), "mild.json");
    let json = path(dir.path(), "mild.report.json");
    khier(&["generate", "--family", "mild", "--size", "4", "--out", &mild]);
    assert!(khier(&["analyze", "--in", &mild, "--json", &json]).status.success());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["alpha_recursion"]["alpha"], serde_json::json!(["4/3", "3/2", "2"]));
    assert_eq!(report["alpha_match"], serde_json::json!(true));
    assert_eq!(report["magnitude_gap"], serde_json::json!("4"));
}

#[test]
fn analyze_flags_non_regular_input() {
    let dir = tempfile::tempdir().unwrap();
    let p = path(dir.path(), "offdiag.json");
    std::fs::write(&p, r#"{"n":2,"m":1,"A":[[[1,2,"1"]]],"B":[],"fixed_tail":null,"label":"offdiag"}"#).unwrap();
    let o = khier(&["analyze", "--in", &p]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("regular:         false"));
    assert!(text.contains("reduce"));
}

#[test]
fn parse_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = path(dir.path(), "bad.json");
    std::fs::write(&p, "{\"n\": 2,\n \"m\": 1,\n \"A\": [[[2,1,\"1\"]]]}").unwrap();
    let o = khier(&["analyze", "--in", &p]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("$.A[0][0]"));
    std::fs::write(&p, "{\"n\": 2,\n \"m\": ").unwrap();
    let o = khier(&["analyze", "--in", &p]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn exponents_command() {
    let o = khier(&["exponents", "--tails", "3,4,5"]);
    assert!(stdout(&o).starts_with("4/3, 3/2, 2\n"));
    let o = khier(&["exponents", "--tails", "5,5,5", "--k", "4"]);
    assert!(stdout(&o).starts_with("2, 2, 2\n"));
    let o = khier(&["exponents", "--tails", "2,4,5"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("INVALID_TAILS"));
}

#[test]
fn reduce_recovers_scrambled_khachiyan() {
    let dir = tempfile::tempdir().unwrap();
    let input = path(dir.path(), "in.json");
    let out = path(dir.path(), "out.json");
    let cert = path(dir.path(), "cert.json");
    let scrambled = common::scramble(&gen_khachiyan(4).unwrap(), 5);
    std::fs::write(&input, instance_to_string(&scrambled)).unwrap();
    let o = khier(&["reduce", "--in", &input, "--out", &out, "--cert", &cert]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("k = 4"));
    let output = parse_instance(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let c = parse_certificate(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(c.r, vec![1, 1, 1, 1]);
    assert!(c.verify(&scrambled, &output).unwrap() < 2f64.powi(-30));
    let o = khier(&["analyze", "--in", &out]);
    assert!(stdout(&o).contains("alpha recursion: (2, 2, 2)"));
}

#[test]
fn reduce_of_identity_takes_one_step() {
    let dir = tempfile::tempdir().unwrap();
    let input = path(dir.path(), "id.json");
    let out = path(dir.path(), "id.out.json");
    std::fs::write(&input, r#"{"n":3,"m":2,"A":[[[1,1,"1"],[2,2,"1"],[3,3,"1"]],[[1,2,"1"]]],"B":[],"label":"id"}"#).unwrap();
    let o = khier(&["reduce", "--in", &input, "--out", &out]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("k = 1"));
    assert!(Path::new(&format!("{out}.cert.json")).exists());
}

#[test]
fn reduce_reports_ambiguity() {
    // the PSD part of span{A1, A2} is the single ray A1 + sqrt(2) A2,
    // so neither alternative has a rational certificate
    let dir = tempfile::tempdir().unwrap();
    let input = path(dir.path(), "amb.json");
    let out = path(dir.path(), "amb.out.json");
    std::fs::write(
        &input,
        r#"{"n":4,"m":2,"A":[[[1,1,"1"],[2,2,"2"],[3,4,"1"]],[[1,2,"1"],[3,3,"1"],[4,4,"1/2"]]],"B":[],"label":"irrational"}"#,
    )
    .unwrap();
    let o = khier(&["reduce", "--in", &input, "--out", &out]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("AMBIGUOUS"));
    assert!(!Path::new(&out).exists());
}

#[test]
fn verify_writes_csv_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let mild = path(dir.path(), "mild.json");
    let csv = path(dir.path(), "sweep.csv");
    let summary = path(dir.path(), "summary.csv");
    khier(&["generate", "--family", "mild", "--size", "4", "--out", &mild]);
    let o = khier(&["verify", "--in", &mild, "--scales", "1e2:1e5:8", "--out", &csv, "--summary", &summary]);
    assert!(o.status.success(), "{}", stdout(&o));
    let sweep = std::fs::read_to_string(&csv).unwrap();
    let mut lines = sweep.lines();
    assert_eq!(lines.next(), Some("scale,x1,x2,x3,x4"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "1.0000000000000000e2");
    assert!(first.iter().all(|f| f.split('e').next().unwrap().replace(['.', '-'], "").len() == 17));
    let summary = std::fs::read_to_string(&summary).unwrap();
    assert_eq!(summary.lines().count(), 4);
    assert!(summary.lines().skip(1).all(|l| l.ends_with("PASS")));

    let o = khier(&["verify", "--in", &mild, "--alpha", "2,2,2"]);
    assert_eq!(o.status.code(), Some(5));

    let no_tail = path(dir.path(), "notail.json");
    let text = std::fs::read_to_string(&mild).unwrap().replace("\"fixed_tail\": []", "\"fixed_tail\": null");
    std::fs::write(&no_tail, text).unwrap();
    let o = khier(&["verify", "--in", &no_tail]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NOT_PARTIALLY_STRICT"));
}

#[test]
fn verify_khachiyan_passes() {
    let dir = tempfile::tempdir().unwrap();
    let p = path(dir.path(), "kh.json");
    std::fs::write(&p, instance_to_string(&gen_khachiyan(4).unwrap())).unwrap();
    assert!(khier(&["verify", "--in", &p]).status.success());
    let m = path(dir.path(), "mild.json");
    std::fs::write(&m, instance_to_string(&gen_mild(4).unwrap())).unwrap();
    let o = khier(&["verify", "--in", &m]);
    assert!(stdout(&o).contains("slope 1.3333 vs 4/3"));
}
