use std::fs;
use std::path::PathBuf;
use std::process::Command;

use serde_json::{json, Value};
use tempfile::TempDir;

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        let ws = Workspace {
            dir: tempfile::tempdir().unwrap(),
        };
        ws.write(
            "T.json",
            r#"{"states":["t1","t2","t3"],"neighbourhoods":{"t1":[["t2"]],"t2":[["t2"]],"t3":[[]]}}"#,
        );
        ws.write(
            "Tp.json",
            r#"{"states":["t1","t2","t3"],"neighbourhoods":{"t1":[["t2"]],"t2":[[]],"t3":[[]]}}"#,
        );
        ws.write("S.json", r#"{"states":["s"]}"#);
        ws.write("U.json", r#"{"states":["u1","u2"],"neighbourhoods":{"u2":[[]]}}"#);
        ws
    }

    fn write(&self, name: &str, text: &str) -> String {
        let path: PathBuf = self.dir.path().join(name);
        fs::write(&path, text).unwrap();
        path.to_string_lossy().into_owned()
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).to_string_lossy().into_owned()
    }
}

fn nbhd(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_nbhd"))
        .args(args)
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let value = serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}: {text}"));
    (out.status.code().unwrap(), value)
}

fn nbhd_text(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_nbhd"))
        .args(args)
        .output()
        .unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn equiv_all_on_t_and_s() {
    let ws = Workspace::new();
    let (code, out) = nbhd(&[
        "equiv",
        "--left",
        &ws.path("T.json"),
        "--right",
        &ws.path("S.json"),
        "--kind",
        "all",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out["bisimulation"]["pairs"], json!([]));
    assert_eq!(out["precocongruence"]["pairs"], json!([["t1", "s"], ["t2", "s"]]));
    assert_eq!(out["behavioural"]["pairs"], json!([["t1", "s"], ["t2", "s"]]));
    assert_eq!(out["behavioural"]["certificates"][0]["pair"], json!(["t3", "s"]));
}

#[test]
fn equiv_single_kind_and_given_relation() {
    let ws = Workspace::new();
    let (t, s) = (ws.path("T.json"), ws.path("S.json"));
    let (code, out) = nbhd(&["equiv", "--left", &t, "--right", &s, "--kind", "precocong"]);
    assert_eq!(code, 0);
    assert_eq!(out["kind"], "precocongruence");

    let good = ws.write("good.json", r#"[["t1","s"],["t2","s"]]"#);
    let (code, out) = nbhd(&[
        "equiv",
        "--left",
        &t,
        "--right",
        &s,
        "--kind",
        "precocong",
        "--relation",
        &good,
    ]);
    assert_eq!(code, 0);
    assert_eq!(out["holds"], true);

    let (code, out) = nbhd(&[
        "equiv",
        "--left",
        &t,
        "--right",
        &s,
        "--kind",
        "bis",
        "--relation",
        &good,
    ]);
    assert_eq!(code, 1);
    assert_eq!(out["certificate"]["violation"], "domain-split");

    let bad = ws.write("bad.json", r#"[["t3","s"]]"#);
    let (code, out) = nbhd(&[
        "equiv",
        "--left",
        &t,
        "--right",
        &s,
        "--kind",
        "beh",
        "--relation",
        &bad,
    ]);
    assert_eq!(code, 1);
    assert_eq!(out["certificate"]["violation"], "distinguished");

    let unknown = ws.write("unknown.json", r#"[["t9","s"]]"#);
    let (code, out) = nbhd(&["equiv", "--left", &t, "--right", &s, "--relation", &unknown]);
    assert_eq!(code, 2);
    assert!(out["error"].as_str().unwrap().contains("t9"));
}

#[test]
fn morphisms() {
    let ws = Workspace::new();
    let f1 = ws.write("f1.json", r#"{"t1":"u1","t2":"u1","t3":"u2"}"#);
    let (code, out) = nbhd(&[
        "morphism",
        "--from",
        &ws.path("T.json"),
        "--to",
        &ws.path("U.json"),
        "--map",
        &f1,
    ]);
    assert_eq!((code, out["bounded_morphism"].clone()), (0, json!(true)));

    let f1p = ws.write("f1p.json", r#"{"t1":"u1","t2":"u2","t3":"u2"}"#);
    let (code, _) = nbhd(&[
        "morphism",
        "--from",
        &ws.path("Tp.json"),
        "--to",
        &ws.path("U.json"),
        "--map",
        &f1p,
    ]);
    assert_eq!(code, 0);
    let (code, out) = nbhd(&[
        "morphism",
        "--from",
        &ws.path("T.json"),
        "--to",
        &ws.path("U.json"),
        "--map",
        &f1p,
    ]);
    assert_eq!(code, 1);
    assert_eq!(out["violation"]["violation"], "neighbourhood");

    let partial = ws.write("partial.json", r#"{"t1":"u1"}"#);
    let (code, _) = nbhd(&[
        "morphism",
        "--from",
        &ws.path("T.json"),
        "--to",
        &ws.path("U.json"),
        "--map",
        &partial,
    ]);
    assert_eq!(code, 2);
}

#[test]
fn quotient_and_minimize() {
    let ws = Workspace::new();
    let t = ws.path("T.json");
    let eq = ws.write(
        "eq.json",
        r#"[["t1","t1"],["t2","t2"],["t3","t3"],["t1","t2"],["t2","t1"]]"#,
    );
    let (code, out) = nbhd(&["quotient", "--model", &t, "--relation", &eq]);
    assert_eq!(code, 0);
    assert_eq!(out["model"]["states"], json!(["t1", "t3"]));
    assert_eq!(out["map"]["t2"], "t1");

    let not_cong = ws.write(
        "nc.json",
        r#"[["t1","t1"],["t2","t2"],["t3","t3"],["t1","t3"],["t3","t1"]]"#,
    );
    let (code, out) = nbhd(&["quotient", "--model", &t, "--relation", &not_cong]);
    assert_eq!(code, 1);
    assert_eq!(out["congruence"], false);

    let not_eq = ws.write("ne.json", r#"[["t1","t2"]]"#);
    assert_eq!(nbhd(&["quotient", "--model", &t, "--relation", &not_eq]).0, 2);

    let (code, out) = nbhd(&["minimize", "--model", &t]);
    assert_eq!(code, 0);
    assert_eq!(out["blocks"], json!([["t1", "t2"], ["t3"]]));
}

#[test]
fn ufext_translate_and_kripke() {
    let ws = Workspace::new();
    let t = ws.path("T.json");
    let (code, out) = nbhd(&["ufext", "--model", &t]);
    assert_eq!(code, 0);
    assert_eq!(out["model"]["states"], json!(["uf:t1", "uf:t2", "uf:t3"]));
    assert_eq!(out["principal"]["t1"], "uf:t1");

    let (_, out) = nbhd(&["translate", "--formula", "[]p0"]);
    assert_eq!(out["st"], "Ex u (x N u & Ay (u E y <-> P0 y))");
    let (code, out) = nbhd(&["translate", "--model", &t]);
    assert_eq!(code, 0);
    assert_eq!(out["neighbourhoods"], json!(["{}", "{t2}"]));

    let k = ws.write(
        "k.json",
        r#"{"states":["a","b"],"edges":[["a","b"]],"atoms":["p0"],"valuation":{"p0":["b"]}}"#,
    );
    let (code, out) = nbhd(&["from-kripke", "--kripke", &k]);
    assert_eq!(code, 0);
    let m = ws.write("m.json", &out.to_string());
    let (code, back) = nbhd(&["to-kripke", "--model", &m]);
    assert_eq!(code, 0);
    assert_eq!(back["edges"], json!([["a", "b"]]));

    let (code, out) = nbhd(&["to-kripke", "--model", &ws.path("S.json")]);
    assert_eq!(code, 1);
    assert_eq!(out["state"], "s");
}

#[test]
fn decision_commands() {
    let (code, out) = nbhd(&["valid", "--formula", "[]p0 & []p1 -> [](p0 & p1)"]);
    assert_eq!(code, 1);
    assert_eq!(out["verdict"], "INVALID");
    assert!(out["model"]["states"].is_array());
    assert!(out["witness"].is_string());

    let (code, out) = nbhd(&["valid", "--formula", "[](p0 & p1) <-> [](p1 & p0)"]);
    assert_eq!((code, out["verdict"].clone()), (0, json!("VALID")));

    let (code, out) = nbhd(&["sat", "--formula", "[]p0"]);
    assert_eq!(code, 0);
    assert_eq!(out["verdict"], "SAT");
    assert_eq!(out["model"]["neighbourhoods"]["w0"], json!([["w0"]]));

    let (code, out) = nbhd(&["sat", "--formula", "p0 & ~p0"]);
    assert_eq!((code, out["verdict"].clone()), (1, json!("UNSAT")));

    let (code, out) = nbhd(&[
        "valid",
        "--formula",
        "[]p0",
        "--premise",
        "[]p0",
        "--premise",
        "p1",
    ]);
    assert_eq!((code, out["verdict"].clone()), (0, json!("VALID")));

    let (code, out) = nbhd(&["interpolate", "--left", "[]p0 & p1", "--right", "[]p0 | p2"]);
    assert_eq!(code, 0);
    assert_eq!(out["interpolant"], "[](p0)");
    let (code, out) = nbhd(&["interpolate", "--left", "p0", "--right", "p1"]);
    assert_eq!((code, out["verdict"].clone()), (1, json!("NOT_VALID")));

    let wide = (0..17).map(|i| format!("p{i}")).collect::<Vec<_>>().join(" & ");
    let (code, _) = nbhd(&["sat", "--formula", &wide]);
    assert_eq!(code, 3);
    let (code, _) = nbhd(&["sat", "--formula", "p0 &&"]);
    assert_eq!(code, 2);
}

#[test]
fn examples_rederive_their_facts() {
    let (code, out) = nbhd(&["examples", "ex1"]);
    assert_eq!(code, 0);
    assert!(out["facts"]
        .as_array()
        .unwrap()
        .iter()
        .all(|f| f["holds"] == true));
    let (code, out) = nbhd(&["examples", "ex2"]);
    assert_eq!(code, 0);
    assert_eq!(
        out["summary"],
        "largest precocongruence empty; behavioural equivalence relates (t1,s)"
    );
    let (code, text) = nbhd_text(&["examples", "ex2", "--pretty"]);
    assert_eq!(code, 0);
    assert!(text.lines().all(|l| !l.starts_with("[FAILED]")));
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let ws = Workspace::new();
    let args = |jobs: &'static str| {
        vec![
            "--jobs".to_string(),
            jobs.to_string(),
            "equiv".to_string(),
            "--left".to_string(),
            ws.path("T.json"),
            "--right".to_string(),
            ws.path("Tp.json"),
        ]
    };
    let run = |a: Vec<String>| {
        let out = Command::new(env!("CARGO_BIN_EXE_nbhd"))
            .args(&a)
            .output()
            .unwrap();
        out.stdout
    };
    assert_eq!(run(args("1")), run(args("4")));
    let interp = |jobs: &str| {
        Command::new(env!("CARGO_BIN_EXE_nbhd"))
            .args([
                "--jobs",
                jobs,
                "interpolate",
                "--left",
                "p0 & []p1",
                "--right",
                "[]p1 | p2",
            ])
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(interp("1"), interp("3"));
}
