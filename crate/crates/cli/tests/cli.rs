use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;

struct Run {
    stdout: String,
    stderr: String,
    code: i32,
}

fn cmetric(args: &[&str]) -> Run {
    cmetric_env(args, None)
}

fn cmetric_env(args: &[&str], prec: Option<&str>) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cmetric"));
    cmd.args(args).env_remove("CMETRIC_PREC");
    if let Some(p) = prec {
        cmd.env("CMETRIC_PREC", p);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
        code: out.status.code().unwrap(),
    }
}

struct Files {
    dir: TempDir,
}

impl Files {
    fn new() -> Files {
        Files { dir: tempfile::tempdir().unwrap() }
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn unit2(&self) -> PathBuf {
        self.write("unit2.fms", "fms 2\n0 1\n1 0\n")
    }

    fn single(&self) -> PathBuf {
        self.write("single.fms", "fms 1\n0\n")
    }

    fn line3(&self) -> PathBuf {
        self.write("line3.fms", "# three points on a line\nfms 3\n0 1/2 3/2\n1/2 0 1\n3/2 1 0\n")
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_reports() {
    let f = Files::new();
    let ok = cmetric(&["validate", s(&f.line3())]);
    assert_eq!((ok.stdout.as_str(), ok.code), ("OK n=3 diameter=3/2\n", 0));
    let decimal = cmetric(&["validate", s(&f.line3()), "--digits", "3"]);
    assert_eq!(decimal.stdout, "OK n=3 diameter=1.500\n");

    let bad = f.write("bad.fms", "fms 3\n0 1 5\n1 0 1\n5 1 0\n");
    let r = cmetric(&["validate", s(&bad)]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("(0, 1, 2)"), "{}", r.stderr);

    let missing = cmetric(&["validate", "/nonexistent/space.fms"]);
    assert_eq!(missing.code, 2);
    let garbled = f.write("garbled.fms", "fms 2\n0 x\n1 0\n");
    assert_eq!(cmetric(&["validate", s(&garbled)]).code, 2);
}

#[test]
fn dist_prints_exact_entries() {
    let f = Files::new();
    assert_eq!(cmetric(&["dist", s(&f.unit2()), "0", "1"]).stdout, "1\n");
    assert_eq!(cmetric(&["dist", s(&f.unit2()), "0", "0"]).stdout, "0\n");
    assert_eq!(cmetric(&["dist", s(&f.line3()), "0", "2"]).stdout, "3/2\n");
    assert_eq!(cmetric(&["dist", s(&f.line3()), "0", "5"]).code, 1);
}

#[test]
fn urysohn_embed_outputs() {
    let f = Files::new();
    let one = cmetric(&["urysohn-embed", s(&f.single())]);
    assert_eq!((one.stdout.as_str(), one.code), ("()\nVERIFIED 0 pairs\n", 0));
    let two = cmetric(&["urysohn-embed", s(&f.unit2())]);
    assert_eq!(two.stdout, "()\n(():1)\nVERIFIED 1 pairs\n");
    let three = cmetric(&["urysohn-embed", s(&f.line3())]);
    assert!(three.stdout.ends_with("VERIFIED 3 pairs\n"));
    assert_eq!(three.stdout, cmetric(&["urysohn-embed", s(&f.line3())]).stdout);
}

#[test]
fn urysohn_extend_outputs() {
    let f = Files::new();
    let empty = cmetric(&["urysohn-extend", s(&f.unit2())]);
    assert_eq!(empty.stdout, "()\n");
    let r = cmetric(&["urysohn-extend", s(&f.line3()), "--base", "0", "--dists", "2"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.ends_with("d(·, f(0)) = 2\n"), "{}", r.stdout);
    let r = cmetric(&["urysohn-extend", s(&f.line3()), "--base", "0,2", "--dists", "1/2,1"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("d(·, f(0)) = 1/2\n") && r.stdout.contains("d(·, f(2)) = 1\n"), "{}", r.stdout);

    let bad = cmetric(&["urysohn-extend", s(&f.unit2()), "--base", "0,1", "--dists", "5,1"]);
    assert_eq!(bad.code, 1);
    assert!(bad.stderr.contains("(i, j) = (0, 1)"), "{}", bad.stderr);
    assert_eq!(cmetric(&["urysohn-extend", s(&f.unit2()), "--base", "0", "--dists", "1,2"]).code, 1);
    assert_eq!(cmetric(&["urysohn-extend", s(&f.unit2()), "--base", "0", "--dists=-1"]).code, 1);
}

#[test]
fn hilbert_outputs() {
    let f = Files::new();
    let r = cmetric(&["hilbert", s(&f.unit2()), "0", "--coords", "3"]);
    let coords: Vec<&str> = r.stdout.trim_end().split(", ").collect();
    assert_eq!(coords.len(), 3);
    for (c, want) in coords.iter().zip(["0", "1", "0"]) {
        assert!(c.starts_with(want), "{}", r.stdout);
        assert!(c.contains(" ± "));
    }
    let single = cmetric(&["hilbert", s(&f.single()), "0", "--coords", "4"]);
    assert!(single.stdout.trim_end().split(", ").all(|c| c.starts_with("0.")));
    let none = cmetric(&["hilbert", s(&f.unit2()), "0", "--coords", "0"]);
    assert_eq!((none.stdout.as_str(), none.code), ("", 0));
    let empty = f.write("empty.fms", "fms 0\n");
    assert_eq!(cmetric(&["hilbert", s(&empty), "0"]).code, 1);
}

#[test]
fn baire_outputs() {
    let f = Files::new();
    let enc = cmetric(&["baire", s(&f.unit2()), "encode", "1"]);
    assert_eq!(enc.code, 0);
    let mut lines = enc.stdout.lines();
    assert_eq!(lines.next(), Some("1,*"));
    let bound = lines.next().unwrap().rsplit(' ').next().unwrap().to_string();
    let bound: cmetric::Rational = cmetric::numerics::parse_rational(&bound).unwrap();
    assert!(bound <= cmetric::numerics::pow2(-10));

    let dec = cmetric(&["baire", s(&f.unit2()), "decode", "0,*"]);
    assert_eq!(dec.code, 0);
    assert!(dec.stdout.contains("nearest base point 0"), "{}", dec.stdout);
    let bad = cmetric(&["baire", s(&f.unit2()), "decode", "0,0,0,1,*"]);
    assert_eq!(bad.code, 1);
    assert!(bad.stderr.contains("index 2"), "{}", bad.stderr);
    assert_eq!(cmetric(&["baire", s(&f.unit2()), "decode", "0,1"]).code, 2);
}

#[test]
fn verify_is_deterministic() {
    let a = cmetric(&["verify", "urysohn", "--trials", "100", "--seed", "42"]);
    let b = cmetric(&["verify", "urysohn", "--trials", "100", "--seed", "42"]);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    assert!(a.stdout.ends_with("0 failed\n"));
    let all = cmetric(&["verify", "all", "--trials", "10", "--seed", "0"]);
    assert_eq!(all.code, 0, "{}", all.stdout);
    assert!(all.stdout.lines().filter(|l| l.starts_with("PASS")).count() > 10);
    assert_eq!(cmetric(&["verify", "nonsense"]).code, 2);
}

#[test]
fn precision_from_environment() {
    let f = Files::new();
    let coarse = cmetric_env(&["hilbert", s(&f.line3()), "1", "--coords", "2"], Some("4"));
    let fine = cmetric_env(&["hilbert", s(&f.line3()), "1", "--coords", "2"], None);
    assert_eq!(coarse.code, 0);
    assert!(coarse.stdout.len() < fine.stdout.len(), "{} vs {}", coarse.stdout, fine.stdout);
    assert_eq!(cmetric(&["hilbert", s(&f.line3()), "1", "--prec", "0"]).code, 1);
}
