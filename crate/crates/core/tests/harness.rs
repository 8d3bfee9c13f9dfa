use std::fs;

use cmdp_core::bonus::{BonusSpec, Preset};
use cmdp_core::env::{ContextCount, EnvKind, FeatureKind, PoolSpec};
use cmdp_core::harness::{
    emit_report, load_runs, run_experiment, run_experiment_with, AggregateOptions, ExperimentConfig, GridMethod,
    GridTask, Metric, RunStatus, RunnerOptions, LOG_DIR, REPORT_FILE,
};
use cmdp_core::learner::{parse_log_file_name, TrainConfig};

fn grid(out: &std::path::Path, n_seeds: u64) -> ExperimentConfig {
    let corridors = PoolSpec::new(EnvKind::corridors(3, 4).unwrap(), ContextCount::Finite(1), 0);
    let tasks = [
        GridTask {
            name: "corridors".into(),
            pool: corridors,
            psi: FeatureKind::Position,
        },
        GridTask {
            name: "keyroom".into(),
            pool: PoolSpec::new(EnvKind::key_room(5).unwrap(), ContextCount::Infinite, 0),
            psi: FeatureKind::Message,
        },
    ];
    let methods = [
        GridMethod {
            name: "global".into(),
            bonus: Some(BonusSpec::preset(Preset::Global)),
        },
        GridMethod {
            name: "noveld".into(),
            bonus: Some(BonusSpec::preset(Preset::NovelD)),
        },
    ];
    let mut template = TrainConfig::new(corridors, None, 600);
    template.eval_every = 300;
    template.eval_episodes = 5;
    let mut cfg = ExperimentConfig::grid(&tasks[..], &methods, &template, n_seeds);
    cfg.out_dir = out.to_path_buf();
    cfg.n_bootstrap = 200;
    cfg
}

fn log_files(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir.join(LOG_DIR))
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn single_run_writes_one_log() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = grid(dir.path(), 1);
    cfg.cells.truncate(1);
    let out = run_experiment(&cfg, RunnerOptions::default()).unwrap();
    assert!(out.all_ok());
    let files = log_files(dir.path());
    assert_eq!(files.len(), 1);
    let (digest, seed) = parse_log_file_name(&files[0].0).unwrap();
    assert_eq!((digest, seed), (cfg.cells[0].digest(), 0));
    assert_eq!(files[0].1, out.records[0].to_jsonl().into_bytes());
}

#[test]
fn parallel_matches_serial_and_resume_skips_work() {
    let serial_dir = tempfile::tempdir().unwrap();
    let parallel_dir = tempfile::tempdir().unwrap();
    let serial = run_experiment(
        &grid(serial_dir.path(), 5),
        RunnerOptions {
            workers: Some(1),
            ..Default::default()
        },
    )
    .unwrap();
    let parallel = run_experiment(
        &grid(parallel_dir.path(), 5),
        RunnerOptions {
            workers: Some(4),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(serial.records.len(), 20);
    assert_eq!(serial.records, parallel.records);
    assert_eq!(serial.manifest, parallel.manifest);
    assert_eq!(log_files(serial_dir.path()), log_files(parallel_dir.path()));

    let calls = std::sync::atomic::AtomicUsize::new(0);
    let resumed = run_experiment_with(
        &grid(serial_dir.path(), 5),
        RunnerOptions {
            resume: true,
            ..Default::default()
        },
        |e| {
            assert_eq!(e.status, RunStatus::Resumed);
            calls.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        },
    )
    .unwrap();
    assert_eq!(calls.into_inner(), 20);
    assert_eq!(resumed.count(RunStatus::Computed), 0);
    assert_eq!(resumed.records, serial.records);
}

#[test]
fn report_from_disk_matches_memory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = grid(dir.path(), 3);
    let out = run_experiment(&cfg, RunnerOptions::default()).unwrap();
    let opts = AggregateOptions {
        n_bootstrap: cfg.n_bootstrap,
        seed: 11,
        ..Default::default()
    };
    let memory = emit_report(dir.path(), &out.summaries(), &Metric::ALL, opts).unwrap();
    let bytes = fs::read(dir.path().join(REPORT_FILE)).unwrap();
    let disk = emit_report(dir.path(), &load_runs(dir.path()).unwrap(), &Metric::ALL, opts).unwrap();
    assert_eq!(memory, disk);
    assert_eq!(fs::read(dir.path().join(REPORT_FILE)).unwrap(), bytes);
    // 4 cells and 2 pooled methods, 3 metrics each, plus the header.
    assert_eq!(String::from_utf8(bytes).unwrap().lines().count(), 1 + 6 * 3);
}

#[test]
fn failed_runs_are_recorded_and_others_finish() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = grid(dir.path(), 2);
    cfg.cells.truncate(2);
    cfg.cells[1].train.lr_critic = 1e300;
    cfg.cells[1].train.lr_actor = 1e300;
    let out = run_experiment(&cfg, RunnerOptions::default()).unwrap();
    assert!(!out.all_ok());
    assert_eq!(out.count(RunStatus::Computed), 2);
    assert_eq!(out.count(RunStatus::Failed), 2);
    let failed = out.failures().next().unwrap();
    assert!(failed.error.as_deref().unwrap().contains("non-finite"));
    let names: Vec<String> = log_files(dir.path()).into_iter().map(|(n, _)| n).collect();
    assert_eq!(names.iter().filter(|n| n.contains(".partial.")).count(), 2);
    assert_eq!(load_runs(dir.path()).unwrap().len(), 2);
}
