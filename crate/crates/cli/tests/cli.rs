use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mixnet::generators::{hammersley, HammersleyPattern};
use mixnet::haar::spectrum_size;
use mixnet::PointSet;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixnet")).args(args).output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen_hammersley(dir: &Path, name: &str, pattern: &str) -> String {
    let file = dir.join(name);
    let out = run(&["gen", "--family", "hammersley", "--b", "2", "--n", "3", "--pattern", pattern, "--out", path_str(&file)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    file.to_str().unwrap().to_string()
}

#[test]
fn gen_hammersley_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen_hammersley(dir.path(), "h.csv", "ssc");
    let text = fs::read_to_string(&file).unwrap();
    assert!(text.lines().next().unwrap().contains("an=2"));
    let p = PointSet::read_csv(text.as_bytes()).unwrap();
    assert_eq!(p.len(), 8);
    let direct = hammersley(2, 3, &"ssc".parse::<HammersleyPattern>().unwrap()).unwrap();
    assert_eq!(p.coords(), direct.coords());
    assert_eq!((p.base(), p.resolution(), p.dim()), (2, Some(3), 2));
}

#[test]
fn an_shortcut_matches_pattern() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen_hammersley(dir.path(), "a.csv", "ssc");
    let b = dir.path().join("b.csv");
    assert!(run(&["gen", "--family", "hammersley", "--b", "2", "--n", "3", "--an", "2", "--out", path_str(&b)]).status.success());
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn identity_suite_passes() {
    let v = ok_json(&["verify", "--identities", "--bmax", "20"]);
    assert_eq!(v["passed"], Value::Bool(true));
    assert_eq!(v["schema"], 1);
}

#[test]
fn besov_at_p2_q2_r0_equals_l2() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen_hammersley(dir.path(), "h.csv", "ssc");
    let l2 = ok_json(&["disc", "--in", &file, "--norm", "l2"]);
    let besov = ok_json(&["disc", "--in", &file, "--norm", "besov", "--p", "2", "--q", "2", "--r", "0"]);
    assert_eq!(besov["schema"], 1);
    let (a, b) = (l2["value"].as_f64().unwrap(), besov["value"].as_f64().unwrap());
    assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen_hammersley(dir.path(), "h.csv", "sss");
    let cmds: Vec<Vec<&str>> = vec![
        vec!["gen", "--family", "cs", "--b", "11", "--n", "4", "--N", "100"],
        vec!["gen", "--family", "kronecker", "--N", "50"],
        vec!["gen", "--family", "halton", "--N", "30", "--d", "3"],
        vec!["disc", "--in", &file, "--norm", "lp", "--p", "3", "--samples", "2000", "--seed", "9"],
        vec!["walsh-split", "--in", &file, "--samples", "20", "--seed", "4"],
        vec!["haar", "--in", &file, "--jmax", "2"],
        vec!["bounds", "--with", &file],
    ];
    for c in &cmds {
        let (x, y) = (run(c), run(c));
        assert!(x.status.success(), "{c:?}: {}", String::from_utf8_lossy(&x.stderr));
        assert_eq!(x.stdout, y.stdout, "{c:?}");
    }
    let single = Command::new(env!("CARGO_BIN_EXE_mixnet"))
        .args(&cmds[3])
        .env("MIXNET_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(single.stdout, run(&cmds[3]).stdout);
}

#[test]
fn flag_errors_exit_2() {
    for args in [
        vec!["gen", "--family", "nope"],
        vec!["gen", "--family", "hammersley", "--b", "2"],
        vec!["gen", "--family", "hammersley", "--b", "2", "--n", "3", "--pattern", "sxc"],
        vec!["disc", "--norm", "l2"],
        vec!["disc", "--in", "/nonexistent.csv", "--norm", "l2"],
        vec!["verify"],
        vec!["frobnicate"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
    let dir = tempfile::tempdir().unwrap();
    let file = gen_hammersley(dir.path(), "h.csv", "ssc");
    let bad_window = run(&["disc", "--in", &file, "--norm", "besov", "--p", "2", "--q", "2", "--r", "0.7"]);
    assert_eq!(bad_window.status.code(), Some(2));
    // an affine (complemented) set is not linear in the index digits
    assert_eq!(run(&["walsh-split", "--in", &file]).status.code(), Some(2));
}

#[test]
fn failed_assertions_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen_hammersley(dir.path(), "h.csv", "ssc");
    assert_eq!(run(&["check-net", "--in", &file, "--v-expected", "1"]).status.code(), Some(1));
    assert_eq!(run(&["check-net", "--in", &file, "--v-expected", "0"]).status.code(), Some(0));
    assert_eq!(run(&["walsh-split", "--in", &gen_hammersley(dir.path(), "s.csv", "sss"), "--tol=-1"]).status.code(), Some(1));
}

#[test]
fn check_net_reports_dual_distances() {
    let dir = tempfile::tempdir().unwrap();
    let cs = dir.path().join("cs.csv");
    assert!(run(&["gen", "--family", "cs", "--b", "11", "--n", "4", "--out", path_str(&cs)]).status.success());
    let v = ok_json(&["check-net", "--in", path_str(&cs), "--v-expected", "0"]);
    assert_eq!(v["digital"], Value::Bool(true));
    assert!(v["dual_delta"].as_u64().unwrap() >= 5);
    assert!(v["dual_kappa"].as_u64().unwrap() >= 5);
    assert_eq!(v["N"], 14641);
}

#[test]
fn walsh_split_agrees_on_digital_net() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen_hammersley(dir.path(), "h.csv", "sss");
    let v = ok_json(&["walsh-split", "--in", &file, "--samples", "30", "--seed", "1"]);
    assert_eq!(v["agree"], Value::Bool(true));
    assert!(v["sup_scaled_rest"].as_f64().unwrap().is_finite());
}

#[test]
fn haar_dump_has_every_index() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen_hammersley(dir.path(), "h.csv", "ssc");
    let out = dir.path().join("spec.csv");
    assert!(run(&["haar", "--in", &file, "--jmax", "3", "--out", path_str(&out)]).status.success());
    let text = fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "j_1,j_2,m_1,m_2,l_1,l_2,re,im");
    assert_eq!(lines.count() as u128, spectrum_size(2, 2, 3));
}

#[test]
fn parseval_and_bound_reports() {
    let dir = tempfile::tempdir().unwrap();
    let file = gen_hammersley(dir.path(), "h.csv", "ssc");
    let v = ok_json(&["verify", "--parseval", "--in", &file, "--jmax", "7"]);
    assert_eq!(v["passed"], Value::Bool(true));
    assert!(v["gap"].as_f64().unwrap() < 1e-6);
    let b = ok_json(&["bounds", "--with", &file]);
    assert_eq!(b["schema"], 1);
    assert!(b["assertions"].as_array().unwrap().iter().all(|a| a["passed"] == Value::Bool(true)));
    let t = ok_json(&["bounds", "--report", "--d", "2", "--b", "2"]);
    assert_eq!(t["gamma"], "1/1344");
}

#[test]
fn equidistant_star_discrepancy() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("e.csv");
    assert!(run(&["gen", "--family", "equidistant", "--N", "10", "--out", path_str(&file)]).status.success());
    let v = ok_json(&["disc", "--in", path_str(&file), "--norm", "star"]);
    assert!((v["value"].as_f64().unwrap() - 0.05).abs() < 1e-15);
}
