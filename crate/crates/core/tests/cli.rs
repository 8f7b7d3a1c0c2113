use std::path::{Path, PathBuf};
use std::process::Command;

use sensorcover::cli::run;

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }

    fn run(&self, args: &[&str]) -> i32 {
        let mut full = vec!["sensorcover".to_string(), "--deterministic".to_string()];
        full.extend(args.iter().map(|a| {
            a.strip_prefix('@').map(|n| self.arg(n)).unwrap_or_else(|| a.to_string())
        }));
        run(full)
    }

    fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.path(name)).unwrap()
    }

    /// Room mesh, samples, candidates and visibility, ready to solve.
    fn room(&self) {
        assert_eq!(self.run(&["gen-scene", "--kind", "room", "--out", "@room.obj"]), 0);
        assert_eq!(
            self.run(&["sample", "--mesh", "@room.obj", "--pitch", "0.7", "--out", "@samples.json"]),
            0
        );
        assert_eq!(
            self.run(&[
                "candidates", "--plane-z", "2.7", "--rect", "0.3", "0.5", "5.7", "3.5", "--pitch",
                "0.6", "--out", "@cands.json",
            ]),
            0
        );
        assert_eq!(self.visibility(), 0);
    }

    fn visibility(&self) -> i32 {
        self.run(&[
            "visibility", "--mesh", "@room.obj", "--samples", "@samples.json", "--candidates",
            "@cands.json", "--out", "@vis.spvm",
        ])
    }

    fn solve(&self, extra: &[&str], out: &str) -> i32 {
        let mut args = vec![
            "solve", "--samples", "@samples.json", "--candidates", "@cands.json", "--vis",
            "@vis.spvm", "--out", out,
        ];
        args.extend_from_slice(extra);
        self.run(&args)
    }
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn room_pipeline_problem_one() {
    let w = Workspace::new();
    w.room();
    assert_eq!(w.solve(&["--problem", "1", "--k", "3"], "@result.json"), 0);
    let doc = json(&w.path("result.json"));
    let ratio = doc["ratio"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&ratio));
    let placement: Vec<u64> = doc["placement"]["selected"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    assert_eq!(placement.len(), 3);
    assert!(placement.iter().all(|&j| j < 60));
    assert!(placement.windows(2).all(|p| p[0] != p[1]));
    assert!(doc.get("timestamp").is_none());
}

#[test]
fn subcommands_are_idempotent() {
    let w = Workspace::new();
    w.room();
    let first = [
        w.read("room.obj"),
        w.read("samples.json"),
        w.read("cands.json"),
    ];
    let vis = std::fs::read(w.path("vis.spvm")).unwrap();
    w.room();
    assert_eq!(first, [w.read("room.obj"), w.read("samples.json"), w.read("cands.json")]);
    assert_eq!(vis, std::fs::read(w.path("vis.spvm")).unwrap());

    for name in ["a.json", "b.json"] {
        let out = format!("@{name}");
        assert_eq!(w.solve(&["--problem", "2", "--k", "2", "--rho", "0.8"], &out), 0);
    }
    assert_eq!(w.read("a.json"), w.read("b.json"));

    for name in ["a.ply", "b.ply"] {
        let out = format!("@{name}");
        assert_eq!(w.run(&["export", "--in", "@a.json", "--out", &out]), 0);
    }
    assert_eq!(w.read("a.ply"), w.read("b.ply"));
}

#[test]
fn sweep_objective_is_non_decreasing() {
    let w = Workspace::new();
    w.room();
    let code = w.run(&[
        "sweep", "--problem", "1", "--samples", "@samples.json", "--candidates", "@cands.json",
        "--vis", "@vis.spvm", "--k-range", "1..6", "--out", "@sweep.csv",
    ]);
    assert_eq!(code, 0);
    let csv = w.read("sweep.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,objective,ratio,gap,elapsed,status"));
    let objectives: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(objectives.len(), 6);
    assert!(objectives.windows(2).all(|w| w[0] <= w[1]), "{objectives:?}");
}

#[test]
fn empty_placement_exports_white() {
    let w = Workspace::new();
    w.room();
    assert_eq!(w.solve(&["--problem", "1", "--k", "0"], "@empty.json"), 0);
    assert_eq!(w.run(&["export", "--in", "@empty.json", "--out", "@empty.ply"]), 0);
    let ply = w.read("empty.ply");
    let n = json(&w.path("samples.json"))["samples"]["samples"].as_array().unwrap().len();
    assert!(ply.contains(&format!("element vertex {n}\n")));
    let body: Vec<&str> = ply.split("end_header\n").nth(1).unwrap().lines().collect();
    assert_eq!(body.len(), n);
    assert!(body.iter().all(|l| l.ends_with(" 255 255 255")));
}

#[test]
fn stale_visibility_is_rejected() {
    let w = Workspace::new();
    w.room();
    // Resample at another pitch; the stored matrix no longer matches.
    assert_eq!(
        w.run(&["sample", "--mesh", "@room.obj", "--pitch", "0.9", "--out", "@samples.json"]),
        0
    );
    assert_eq!(w.solve(&["--problem", "1", "--k", "2"], "@result.json"), 1);
    assert!(!w.path("result.json").exists());
    // Re-running the visibility step recomputes instead of reusing.
    assert_eq!(w.visibility(), 0);
    assert_eq!(w.solve(&["--problem", "1", "--k", "2"], "@result.json"), 0);
}

#[test]
fn exit_codes() {
    let w = Workspace::new();
    w.room();
    // Conflicting flags.
    assert_eq!(w.solve(&["--problem", "1", "--k", "2", "--phi", "0.1"], "@x.json"), 2);
    assert_eq!(w.solve(&["--problem", "3", "--k", "2"], "@x.json"), 2);
    assert_eq!(
        w.run(&["gen-scene", "--kind", "room", "--cells", "4", "--out", "@r.obj"]),
        2
    );
    // Unreachable coverage ratio.
    assert_eq!(w.solve(&["--problem", "2", "--k", "1", "--rho", "1.0"], "@x.json"), 3);
    // A hard threshold instance cannot finish in a microsecond.
    assert_eq!(
        w.solve(
            &["--problem", "3", "--k", "4", "--phi", "0.15", "--time-limit", "0.000001"],
            "@x.json"
        ),
        4
    );
}

#[test]
fn approx_then_onecenter_refine() {
    let w = Workspace::new();
    assert_eq!(
        w.run(&["gen-scene", "--kind", "terrain", "--seed", "3", "--amplitude", "0.2", "--out", "@t.obj"]),
        0
    );
    assert_eq!(w.run(&["sample", "--mesh", "@t.obj", "--pitch", "1.0", "--out", "@s.json"]), 0);
    assert_eq!(
        w.run(&["approx", "--samples", "@s.json", "--k", "3", "--plane-z", "4", "--out", "@a.json"]),
        0
    );
    assert_eq!(
        w.run(&["refine", "--method", "onecenter", "--in", "@a.json", "--out", "@r.json"]),
        0
    );
    let a = json(&w.path("a.json"))["objective"].as_f64().unwrap();
    let r = json(&w.path("r.json"))["objective"].as_f64().unwrap();
    assert!(r <= a);
}

#[test]
fn grid_refine_improves_or_keeps() {
    let w = Workspace::new();
    w.room();
    assert_eq!(w.solve(&["--problem", "1", "--k", "2"], "@p1.json"), 0);
    assert_eq!(
        w.run(&[
            "refine", "--method", "grid", "--fine-pitch", "0.3", "--rounds", "2", "--in",
            "@p1.json", "--out", "@p1r.json",
        ]),
        0
    );
    let before = json(&w.path("p1.json"))["objective"].as_f64().unwrap();
    let after = json(&w.path("p1r.json"))["objective"].as_f64().unwrap();
    assert!(after >= before);
    assert_eq!(
        w.run(&["refine", "--method", "grid", "--in", "@p1.json", "--out", "@x.json"]),
        2
    );
}

#[test]
fn binary_runs() {
    let out = Command::new(env!("CARGO_BIN_EXE_sensorcover"))
        .arg("--help")
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for sub in ["gen-scene", "sample", "candidates", "visibility", "solve", "approx", "refine", "sweep", "export"] {
        assert!(text.contains(sub), "missing {sub}");
    }
}
