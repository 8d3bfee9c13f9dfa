use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cmdp-explore"));
    c.env_remove("CMDP_EXPLORE_OUT");
    c
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn config(out_dir: &Path, lr: f64) -> String {
    format!(
        r#"{{
  "n_seeds": 2,
  "out_dir": "{}",
  "n_bootstrap": 100,
  "cells": [
    {{
      "task": "corridors",
      "method": "global",
      "train": {{
        "pool": {{ "kind": "corridors:m=3,t=4", "contexts": 1 }},
        "bonus": {{ "episodic": "none", "global": "inverse_sqrt_count", "combiner": "global_only" }},
        "lr_actor": {lr},
        "lr_critic": {lr},
        "total_steps": 400,
        "eval_every": 200,
        "eval_episodes": 5
      }}
    }}
  ]
}}"#,
        out_dir.display()
    )
}

#[test]
fn run_resume_and_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = dir.path().join("exp.json");
    fs::write(&cfg, config(&out_dir, 0.1)).unwrap();

    let first = bin().args(["run", "--config"]).arg(&cfg).args(["--workers", "2"]).output().unwrap();
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    let report = fs::read_to_string(out_dir.join("report.csv")).unwrap();
    assert_eq!(report.lines().next().unwrap(), "cell,metric,point,ci_low,ci_high");
    assert!(out_dir.join("summary.md").exists() && out_dir.join("curves.csv").exists());
    assert_eq!(fs::read_dir(out_dir.join("logs")).unwrap().count(), 2);

    let again = bin().args(["run", "--resume", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(code(&again), 0);
    let stderr = String::from_utf8_lossy(&again.stderr);
    assert!(stderr.contains("0 computed, 2 resumed, 0 failed"), "{stderr}");
    assert_eq!(fs::read_to_string(out_dir.join("report.csv")).unwrap(), report);

    let agg = bin()
        .args(["aggregate", "--in"])
        .arg(&out_dir)
        .args(["--metric", "iqm", "--bootstrap", "50", "--seed", "3"])
        .output()
        .unwrap();
    assert_eq!(code(&agg), 0);
    let rows: Vec<String> = fs::read_to_string(out_dir.join("report.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(String::from)
        .collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.contains(",iqm,")));
}

#[test]
fn out_dir_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    fs::write(&cfg, config(&dir.path().join("ignored"), 0.1)).unwrap();
    let target = dir.path().join("elsewhere");
    let out = bin()
        .env("CMDP_EXPLORE_OUT", &target)
        .args(["run", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(target.join("manifest.json").exists());
    assert!(!dir.path().join("ignored").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");

    let mut v: serde_json::Value = serde_json::from_str(&config(&dir.path().join("a"), 0.1)).unwrap();
    v["cells"][0]["train"]["warmup"] = 3.into();
    fs::write(&cfg, v.to_string()).unwrap();
    let out = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warmup"));

    let missing = bin().args(["run", "--config"]).arg(dir.path().join("nope.json")).output().unwrap();
    assert_eq!(code(&missing), 2);

    fs::write(&cfg, config(&dir.path().join("b"), 1e300)).unwrap();
    let out = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAILED"));

    let bad_env = bin().args(["export", "--layout", "--env", "maze"]).output().unwrap();
    assert_eq!(code(&bad_env), 2);
}

#[test]
fn analyze_writes_similarity_and_maps() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "analyze",
            "--env",
            "multiroom:n_rooms=2,width=9,height=9",
            "--psi",
            "position,message",
            "--contexts",
            "1,3",
            "--pairs",
            "10",
            "--gamma",
            "0.9",
            "--domain",
            "reachable",
            "--maps",
            "2",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let sim = fs::read_to_string(dir.path().join("similarity.csv")).unwrap();
    let lines: Vec<&str> = sim.lines().collect();
    assert_eq!(lines[0], "env,psi,n_contexts,mean_cos,stderr");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].ends_with(",position,1,1,0"), "{}", lines[1]);
    assert_eq!(fs::read_dir(dir.path().join("maps")).unwrap().count(), 4);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("analysis.json")).unwrap()).unwrap();
    assert_eq!(meta["domain"], "reachable");
}

#[test]
fn export_layout_and_value_map() {
    let out = bin().args(["export", "--layout", "--env", "keyroom:size=5", "--seed", "4"]).output().unwrap();
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 7);
    for glyph in ['<', '>', 'k', '+', '#'] {
        assert!(text.contains(glyph), "{glyph} in\n{text}");
    }

    let out = bin()
        .args(["export", "--value-map", "--env", "corridors:m=2,t=3", "--psi", "message"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# context_id=0 psi=message kind=corridors:m=2,t=3"));
    assert!(text.contains("goal_reached,1\n"));

    let both = bin().args(["export", "--layout", "--value-map"]).output().unwrap();
    assert_eq!(code(&both), 2);
}
