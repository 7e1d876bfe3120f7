use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn vge(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vge"))
        .args(args)
        .env("VGE_CACHE_DIR", cache)
        .output()
        .unwrap()
}

fn file(dir: &TempDir, name: &str, text: &str) -> String {
    let p: PathBuf = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const TWO_LOOPS: &str =
    r#"{"vertices": 1, "edges": [{"from": 0, "to": 0, "len": 1}, {"from": 0, "to": 0, "len": 1}]}"#;
const L3: &str = r#"{"n": 3, "sigma_h": [2, 1, 3], "sigma_v": [3, 2, 1]}"#;

#[test]
fn graph_entropy_json() {
    let d = tempfile::tempdir().unwrap();
    let g = file(&d, "two_loops.json", TWO_LOOPS);
    let out = vge(&["graph", "entropy", &g, "--tol", "1e-10"], d.path());
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["h"].as_f64().unwrap() - std::f64::consts::LN_2).abs() < 1e-10);
    assert_eq!(v["subexponential"], false);
}

#[test]
fn origami_info_and_volume() {
    let d = tempfile::tempdir().unwrap();
    let o = file(&d, "l3.json", L3);
    let out = vge(&["origami", "info", &o, "--emit", "json"], d.path());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["genus"], 2);
    assert_eq!(v["cones"].as_array().unwrap().len(), 1);
    assert_eq!(v["cones"][0]["k"], 2);

    let out = vge(
        &[
            "origami", "volume", &o, "--center", "0", "--rmax", "1.2", "--step", "0.1",
        ],
        d.path(),
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("R,value"));
    let last = text.lines().last().unwrap();
    let (r, val) = last.split_once(',').unwrap();
    assert_eq!(r, "1.2");
    let pi = std::f64::consts::PI;
    let want = 3.0 * pi * 1.44 + 24.0 * pi * 0.04;
    assert!((val.parse::<f64>().unwrap() - want).abs() < 1e-10 * want);
}

#[test]
fn saddle_cache_round_trip() {
    let d = tempfile::tempdir().unwrap();
    let o = file(&d, "l3.json", L3);
    let cache = d.path().join("cache");
    let first = vge(
        &[
            "origami", "saddles", &o, "--lmax", "12", "--cache", "--emit", "json",
        ],
        &cache,
    );
    let second = vge(
        &[
            "origami", "saddles", &o, "--lmax", "12", "--cache", "--emit", "json",
        ],
        &cache,
    );
    let fresh = vge(
        &["origami", "saddles", &o, "--lmax", "12", "--emit", "json"],
        &cache,
    );
    let parse = |o: &Output| -> serde_json::Value { serde_json::from_slice(&o.stdout).unwrap() };
    let (mut a, mut b, c) = (parse(&first), parse(&second), parse(&fresh));
    assert_eq!(a["cache"], "written");
    assert_eq!(b["cache"], "hit");
    a.as_object_mut().unwrap().remove("cache");
    b.as_object_mut().unwrap().remove("cache");
    assert_eq!(a, b);
    assert_eq!(a, c);
    let entries: Vec<_> = std::fs::read_dir(&cache).unwrap().collect();
    assert_eq!(entries.len(), 1);

    // a tampered length is caught on load
    let path = entries[0].as_ref().unwrap().path();
    let text = std::fs::read_to_string(&path).unwrap();
    let bad = text.replacen(",1.0\n", ",1.25\n", 1);
    assert_ne!(bad, text);
    std::fs::write(&path, bad).unwrap();
    let out = vge(
        &["origami", "saddles", &o, "--lmax", "12", "--cache"],
        &cache,
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let g = file(&d, "g.json", TWO_LOOPS);
    let cache = d.path();
    assert_eq!(vge(&["graph"], cache).status.code(), Some(1));
    assert_eq!(
        vge(&["graph", "entropy", &g, "--bogus"], cache)
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        vge(&["graph", "count", &g, "--rmax", "0"], cache)
            .status
            .code(),
        Some(1)
    );

    let missing = d.path().join("nope.json");
    assert_eq!(
        vge(&["graph", "entropy", missing.to_str().unwrap()], cache)
            .status
            .code(),
        Some(2)
    );
    let neg = file(
        &d,
        "neg.json",
        r#"{"vertices": 1, "edges": [{"from": 0, "to": 0, "len": -1}]}"#,
    );
    assert_eq!(
        vge(&["graph", "entropy", &neg], cache).status.code(),
        Some(2)
    );
    let notperm = file(
        &d,
        "np.json",
        r#"{"n": 2, "sigma_h": [1, 1], "sigma_v": [1, 2]}"#,
    );
    assert_eq!(
        vge(&["origami", "info", &notperm], cache).status.code(),
        Some(2)
    );

    let torus = file(&d, "t.json", r#"{"n": 1, "sigma_h": [1], "sigma_v": [1]}"#);
    assert_eq!(
        vge(&["origami", "info", &torus], cache).status.code(),
        Some(3)
    );
    let l3 = file(&d, "l3.json", L3);
    assert_eq!(
        vge(&["origami", "arcs", &l3, "--to", "5", "--rmax", "2"], cache)
            .status
            .code(),
        Some(3)
    );
    let decreasing = file(
        &d,
        "dec.json",
        r#"{"vertices": 1, "tails": [{"from": 0, "to": 0, "kind": "power", "a": 1, "alpha": -1}]}"#,
    );
    assert_eq!(
        vge(&["graph", "entropy", &decreasing], cache).status.code(),
        Some(2)
    );

    let capped = vge(
        &["graph", "count", &g, "--rmax", "30", "--visit-cap", "1000"],
        cache,
    );
    assert_eq!(capped.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&capped.stderr).contains("resource limit"));
}

#[test]
fn output_file_and_formats() {
    let d = tempfile::tempdir().unwrap();
    let g = file(&d, "g.json", TWO_LOOPS);
    let out = d.path().join("counts.json");
    let st = vge(
        &[
            "graph",
            "count",
            &g,
            "--rmax",
            "3",
            "--step",
            "1",
            "--emit",
            "json",
            "-o",
            out.to_str().unwrap(),
        ],
        d.path(),
    );
    assert_eq!(st.status.code(), Some(0));
    assert!(st.stdout.is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["counts"], serde_json::json!([2, 6, 14]));
    let csv = vge(
        &["graph", "count", &g, "--rmax", "3", "--step", "1"],
        d.path(),
    );
    assert_eq!(
        String::from_utf8(csv.stdout).unwrap(),
        "R,count\n1,2\n2,6\n3,14\n"
    );
}
