use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;

const WSQ_CPD: &str = "field 2
shape 4 4 4
rank 8
factor 0
1 0 0 0 0 0 0 0
1 0 0 1 0 0 1 0
1 0 1 0 0 1 0 0
1 1 0 0 1 1 1 1
factor 1
1 1 1 1 0 0 0 0
0 0 0 1 0 0 1 1
0 0 1 0 0 1 0 1
0 1 0 0 1 0 0 0
factor 2
1 1 1 1 0 0 0 0
0 0 0 1 0 0 1 1
0 0 1 0 0 1 0 1
0 1 0 0 1 0 0 0
";

const MOTIVATING: &str = "field 2\nshape 2 2 2\n0 1\n1 0\n1 0\n0 0\n";

fn cpdsearch(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_cpdsearch"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// The text after `witness:` in a command's output.
fn witness_block(out: &str) -> String {
    let start = out.find("witness:\n").expect("witness block") + "witness:\n".len();
    out[start..]
        .lines()
        .take_while(|l| !l.starts_with("stats:"))
        .map(|l| format!("{l}\n"))
        .collect()
}

fn wstate_sq_file() -> String {
    let t = cpd_core::tensor::generate("wstate_sq", &[]).unwrap();
    cpd_cli::format::write_tensor_file(&cpd_cli::format::TensorFile {
        field: cpd_core::PrimeField::gf2(),
        entries: cpd_cli::format::Entries::Field(t),
    })
}

#[test]
fn rank_exact_wstate() {
    let (code, out, _) = cpdsearch(&["rank", "--gen", "wstate", "--field", "2", "--exact", "--progress", "0"]);
    assert_eq!(code, 0);
    assert!(out.contains("rank = 3"), "{out}");
}

#[test]
fn rank_le_six_for_mm222_is_no() {
    let (code, out, _) = cpdsearch(&["rank", "--gen", "mm:2,2,2", "--field", "2", "--le", "6", "--progress", "0"]);
    assert_eq!(code, 0);
    assert!(out.contains("rank <= 6: no"), "{out}");
    assert!(out.contains("estimate: 2^20.0"), "{out}");
}

#[test]
fn malformed_shape_line() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "bad.txt", "field 2\nshape 2 two 2\n0 0 0 0 0 0 0 0\n");
    let (code, _, err) = cpdsearch(&["rank", s(&f), "--exact"]);
    assert_eq!(code, 2);
    assert!(err.contains(":2:9:"), "{err}");
}

#[test]
fn budget_refusal_and_override() {
    let (code, out, err) = cpdsearch(&["rank", "--gen", "mm:2,2,2", "--le", "6", "--budget", "10"]);
    assert_eq!(code, 3);
    assert!(out.contains("estimate: 2^20.0"));
    assert!(err.contains("refused"), "{err}");
    let (code, _, _) = cpdsearch(&["rank", "--gen", "wstate", "--le", "3", "--budget", "1", "--long-ok"]);
    assert_eq!(code, 0);
}

#[test]
fn printed_witnesses_verify() {
    let dir = TempDir::new().unwrap();
    for (gen, field) in [("wstate", "2"), ("addmod2", "3"), ("polymul:2", "2"), ("diagshift:3", "2"), ("counterexample3", "2")] {
        let (code, out, _) = cpdsearch(&["rank", "--gen", gen, "--field", field, "--exact", "--progress", "0"]);
        assert_eq!(code, 0, "{gen}");
        let cpd = write(&dir, "w.txt", &witness_block(&out));
        let (name, params) = cpd_core::tensor::parse_family(gen).unwrap();
        let t = cpd_core::tensor::generate(&name, &params).unwrap();
        let tf = cpd_cli::format::write_tensor_file(&cpd_cli::format::TensorFile {
            field: cpd_core::PrimeField::new(field.parse().unwrap()).unwrap(),
            entries: cpd_cli::format::Entries::Field(t),
        });
        let tpath = write(&dir, "t.txt", &tf);
        let (code, vout, verr) = cpdsearch(&["verify", s(&tpath), s(&cpd)]);
        assert_eq!((code, vout.trim()), (0, "OK"), "{gen}: {verr}");
    }
}

#[test]
fn charmatrix_input() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "w.cm", "v0, v1\nv1, 0\n");
    let (code, out, _) = cpdsearch(&["rank", s(&f), "--exact", "--progress", "0"]);
    assert_eq!(code, 0);
    assert!(out.contains("rank = 3"));
    let f = write(&dir, "x.cm", "v0, 0, 0, 0; 0, v0, 0, v2; v2, 0, v0, v1\n");
    let (code, out, _) = cpdsearch(&["rank", s(&f), "--exact", "--progress", "0"]);
    assert_eq!(code, 0);
    assert!(out.contains("rank = 6"), "{out}");
}

#[test]
fn json_dump() {
    let (code, out, _) = cpdsearch(&["rank", "--gen", "wstate", "--exact", "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["answer"], 3);
    assert_eq!(v["witness"]["rank"], 3);
    assert_eq!(v["witness"]["factors"].as_array().unwrap().len(), 3);
}

#[test]
fn border_rank_motivating() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "m.txt", MOTIVATING);
    let (code, out, _) = cpdsearch(&["border-rank", s(&f), "--H", "2", "--exact"]);
    assert_eq!(code, 0);
    assert!(out.contains("border-rank(H=2) = 2"), "{out}");
    let w = write(&dir, "w.txt", &witness_block(&out));
    let scaled = write(&dir, "s.txt", "field 2\nH 2\nshape 2 2 2\n0 x\nx 0\nx 0\n0 0\n");
    let (code, vout, _) = cpdsearch(&["verify", s(&scaled), s(&w)]);
    assert_eq!((code, vout.trim()), (0, "OK"));

    let (code, out, _) = cpdsearch(&["border-rank", s(&f), "--H", "1", "--exact"]);
    assert_eq!(code, 0);
    assert!(out.contains("border-rank(H=1) = 3"), "{out}");

    let (code, _, _) = cpdsearch(&["border-rank", s(&f), "--H", "0", "--exact"]);
    assert_eq!(code, 2);

    let (code, out, _) = cpdsearch(&["border-rank", s(&scaled), "--le", "1"]);
    assert_eq!(code, 0);
    assert!(out.contains("border-rank(H=2) <= 1: no"));
}

#[test]
fn border_budget_refusal() {
    let (code, _, err) = cpdsearch(&["border-rank", "--gen", "mm:2,2,2", "--H", "2", "--le", "6"]);
    assert_eq!(code, 3);
    assert!(err.contains("refused"), "{err}");
}

#[test]
fn maxrank_commands() {
    let (code, out, _) = cpdsearch(&["maxrank", "--shape", "3,3,4", "--R0", "6", "--count-only"]);
    assert_eq!((code, out.trim()), (0, "14664"));
    let (code, _, err) = cpdsearch(&["maxrank", "--shape", "5,5,5"]);
    assert_eq!(code, 3, "{err}");
    let (code, _, _) = cpdsearch(&["maxrank", "--shape", "3,3,4", "--field", "3"]);
    assert_eq!(code, 2);
    let (code, out, _) = cpdsearch(&["maxrank", "--shape", "2,2,2", "--R0", "2"]);
    assert_eq!(code, 0);
    assert!(out.contains("max rank: 3"), "{out}");
}

#[test]
fn bounds_commands() {
    let (code, out, _) = cpdsearch(&["bounds", "--shape", "3,3,3"]);
    assert_eq!(code, 0);
    for needle in ["counting 3", "howell 7", "trivial 9"] {
        assert!(out.contains(needle), "{needle}: {out}");
    }
    let (code, out, _) = cpdsearch(&["bounds", "--shape", "4,2,2", "--field", "2"]);
    assert_eq!(code, 0);
    assert!(out.contains("nn2 exact 4"), "{out}");
    let (code, _, _) = cpdsearch(&["bounds", "--shape", "2,2"]);
    assert_eq!(code, 2);
}

#[test]
fn verify_wstate_sq_factors() {
    let dir = TempDir::new().unwrap();
    let t = write(&dir, "t.txt", &wstate_sq_file());
    let c = write(&dir, "c.txt", WSQ_CPD);
    let (code, out, _) = cpdsearch(&["verify", s(&t), s(&c)]);
    assert_eq!((code, out.trim()), (0, "OK"));

    // flip factor 0, entry (0, 0)
    let bad = WSQ_CPD.replacen("factor 0\n1 0", "factor 0\n0 0", 1);
    let c = write(&dir, "bad.txt", &bad);
    let (code, out, _) = cpdsearch(&["verify", s(&t), s(&c)]);
    assert_eq!(code, 1);
    assert!(out.starts_with("MISMATCH at ("), "{out}");

    let small = write(&dir, "small.txt", "field 2\nshape 2 2 2\nrank 0\nfactor 0\nfactor 1\nfactor 2\n");
    let (code, _, _) = cpdsearch(&["verify", s(&t), s(&small)]);
    assert_eq!(code, 2);
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let (code, _, _) = cpdsearch(&["frobnicate"]);
    assert_eq!(code, 2);
    let (code, _, _) = cpdsearch(&["rank", "--gen", "nosuch", "--exact"]);
    assert_eq!(code, 2);
}
