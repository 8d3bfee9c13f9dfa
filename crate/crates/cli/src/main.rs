//! `cmdp-explore`: run bonus experiments, aggregate them, and analyse how
//! optimal values vary across contexts.
//!
//! Exit codes: 0 success, 1 a run (or anything else) failed, 2 invalid
//! config or arguments.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand};

use cmdp_core::analysis::{
    avg_cosine_similarity, optimal_values, project_value, write_value_map, Domain, Pairing, SimilarityOptions,
};
use cmdp_core::env::{generate_context, ContextCount, EnvKind, FeatureKind, PoolSpec};
use cmdp_core::harness::{
    emit_report, load_runs, run_experiment_with, AggregateOptions, ExperimentConfig, Metric, RunStatus,
    RunnerOptions,
};
use cmdp_core::rng::{stream, Stream};

const OUT_ENV: &str = "CMDP_EXPLORE_OUT";

#[derive(Parser)]
#[command(name = "cmdp-explore", version, about = "Global and episodic novelty bonuses in contextual MDPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every cell of an experiment config for every seed.
    Run(RunArgs),
    /// Exact value maps and cross-context cosine similarity.
    Analyze(AnalyzeArgs),
    /// Recompute the report of an existing output directory.
    Aggregate(AggregateArgs),
    /// Print a generated context as text or as a value map.
    Export(ExportArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
    /// Keep complete logs from an earlier invocation.
    #[arg(long)]
    resume: bool,
    /// Log the per-step bonus decomposition.
    #[arg(long)]
    trace_bonus: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Environment kind, e.g. `multiroom:n_rooms=4` or `corridors:m=8,t=12`.
    #[arg(long)]
    env: String,
    /// Feature spaces, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "position")]
    psi: Vec<String>,
    /// Context counts, comma separated (`inf` for unbounded).
    #[arg(long, value_delimiter = ',', default_value = "1,3,5,10,inf")]
    contexts: Vec<String>,
    #[arg(long, default_value_t = 50)]
    pairs: usize,
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
    /// Output directory (default: $CMDP_EXPLORE_OUT or `analysis`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// `full` fills unreachable features with 0; `reachable` keeps features
    /// reachable in both contexts.
    #[arg(long, default_value = "full")]
    domain: String,
    /// `with_replacement` or `distinct`.
    #[arg(long, default_value = "with_replacement")]
    pairing: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Value maps to export per feature space.
    #[arg(long, default_value_t = 3)]
    maps: u64,
}

#[derive(Args)]
struct AggregateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Metrics, comma separated (default: mean, median and iqm).
    #[arg(long, value_delimiter = ',')]
    metric: Vec<String>,
    #[arg(long, default_value_t = 2000)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.95)]
    confidence: f64,
}

#[derive(Args)]
#[command(group(ArgGroup::new("what").required(true).args(["layout", "value_map"])))]
struct ExportArgs {
    /// Text layout: `.` floor, `#` wall, `~` lava, `+` door, `k` key, `<` start, `>` goal.
    #[arg(long)]
    layout: bool,
    /// Optimal value map as CSV.
    #[arg(long)]
    value_map: bool,
    #[arg(long, default_value = "multiroom")]
    env: String,
    /// Context seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "position")]
    psi: String,
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Bad input, as opposed to a failure while doing the work.
#[derive(Debug, thiserror::Error)]
#[error("{0:#}")]
struct Invalid(anyhow::Error);

fn invalid<T, E: Into<anyhow::Error>>(r: std::result::Result<T, E>) -> Result<T> {
    r.map_err(|e| Invalid(e.into()).into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Analyze(a) => analyze(a),
        Command::Aggregate(a) => aggregate(a),
        Command::Export(a) => export(a).map(|()| ExitCode::SUCCESS),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Invalid>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn out_override() -> Option<PathBuf> {
    std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let mut cfg = invalid(ExperimentConfig::load(&args.config))?;
    if let Some(dir) = out_override() {
        cfg.out_dir = dir;
    }
    if args.workers == Some(0) {
        return Err(Invalid(anyhow::anyhow!("--workers must be at least 1")).into());
    }
    let total = cfg.cells.len() * cfg.n_seeds as usize;
    let done = AtomicUsize::new(0);
    let opts = RunnerOptions {
        workers: args.workers,
        resume: args.resume,
        trace_bonus: args.trace_bonus,
    };
    let outcome = run_experiment_with(&cfg, opts, |e| {
        let n = done.fetch_add(1, Ordering::Relaxed) + 1;
        let what = match (e.status, e.final_success, &e.error) {
            (RunStatus::Failed, _, Some(err)) => format!("FAILED: {err}"),
            (RunStatus::Resumed, Some(s), _) => format!("resumed, success {s:.3}"),
            (_, Some(s), _) => format!("success {s:.3}"),
            _ => "no evaluation".into(),
        };
        eprintln!("[{n}/{total}] {}/{} seed {}: {what}", e.task, e.method, e.seed);
    })?;

    let summaries = outcome.summaries();
    if !summaries.is_empty() {
        let opts = AggregateOptions {
            n_bootstrap: cfg.n_bootstrap,
            seed: cfg.analysis_seed,
            ..Default::default()
        };
        let report = emit_report(&cfg.out_dir, &summaries, &Metric::ALL, opts)?;
        println!("{}", report.to_markdown());
    }
    let failed = outcome.count(RunStatus::Failed);
    eprintln!(
        "{} computed, {} resumed, {failed} failed; output in {}",
        outcome.count(RunStatus::Computed),
        outcome.count(RunStatus::Resumed),
        cfg.out_dir.display()
    );
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn aggregate(args: AggregateArgs) -> Result<ExitCode> {
    let metrics = if args.metric.is_empty() {
        Metric::ALL.to_vec()
    } else {
        invalid(args.metric.iter().map(|m| m.parse()).collect::<std::result::Result<Vec<Metric>, _>>())?
    };
    if args.bootstrap == 0 || !(args.confidence > 0.0 && args.confidence < 1.0) {
        return Err(Invalid(anyhow::anyhow!("--bootstrap must be positive and --confidence in (0, 1)")).into());
    }
    let runs = load_runs(&args.input)?;
    if runs.is_empty() {
        bail!("{} has no successful runs", args.input.display());
    }
    let opts = AggregateOptions {
        n_bootstrap: args.bootstrap,
        confidence: args.confidence,
        seed: args.seed,
    };
    let report = emit_report(&args.input, &runs, &metrics, opts)?;
    println!("{}", report.to_markdown());
    eprintln!("wrote report for {} runs to {}", runs.len(), args.input.display());
    Ok(ExitCode::SUCCESS)
}

fn analyze(args: AnalyzeArgs) -> Result<ExitCode> {
    let kind: EnvKind = invalid(args.env.parse())?;
    let psis: Vec<FeatureKind> = invalid(args.psi.iter().map(|p| p.parse()).collect::<std::result::Result<_, _>>())?;
    let counts: Vec<ContextCount> =
        invalid(args.contexts.iter().map(|c| c.parse()).collect::<std::result::Result<_, _>>())?;
    let domain: Domain = invalid(args.domain.parse())?;
    let pairing: Pairing = invalid(args.pairing.parse())?;
    if args.pairs == 0 || !(args.gamma > 0.0 && args.gamma < 1.0) {
        return Err(Invalid(anyhow::anyhow!("--pairs must be positive and --gamma in (0, 1)")).into());
    }
    let out = args.out.or_else(out_override).unwrap_or_else(|| PathBuf::from("analysis"));
    let maps_dir = out.join("maps");
    fs::create_dir_all(&maps_dir).with_context(|| format!("creating {}", maps_dir.display()))?;

    let opts = SimilarityOptions {
        n_pairs: args.pairs,
        gamma: args.gamma,
        domain,
        pairing,
    };
    let mut w = csv::Writer::from_path(out.join("similarity.csv"))?;
    w.write_record(["env", "psi", "n_contexts", "mean_cos", "stderr"])?;
    for &psi in &psis {
        for &count in &counts {
            let spec = PoolSpec::new(kind, count, 0);
            let mut rng = stream(args.seed, Stream::Analysis);
            let est = avg_cosine_similarity(&spec, psi, &opts, &mut rng)?;
            println!("{kind} {psi} |C|={count}: {:.4} ± {:.4}", est.mean, est.stderr);
            w.write_record([
                kind.to_string(),
                psi.to_string(),
                count.to_string(),
                est.mean.to_string(),
                est.stderr.to_string(),
            ])?;
        }
        for seed in 0..args.maps {
            let ctx = generate_context(&kind, seed)?;
            let vm = project_value(&optimal_values(&ctx, args.gamma), psi, &ctx);
            write_value_map(&vm, &maps_dir.join(format!("{}_{psi}_{seed}.csv", kind.archetype())))?;
        }
    }
    w.flush()?;
    let meta = serde_json::json!({
        "env": kind.to_string(),
        "gamma": args.gamma,
        "pairs": args.pairs,
        "seed": args.seed,
        "domain": domain.to_string(),
        "pairing": pairing.to_string(),
        "unreachable_fill": 0.0,
        "value_maps": args.maps,
    });
    write(&out.join("analysis.json"), &serde_json::to_string_pretty(&meta)?)?;
    eprintln!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn export(args: ExportArgs) -> Result<()> {
    let kind: EnvKind = invalid(args.env.parse())?;
    let ctx = generate_context(&kind, args.seed)?;
    let text = if args.layout {
        ctx.render()
    } else {
        let psi: FeatureKind = invalid(args.psi.parse())?;
        if !(args.gamma > 0.0 && args.gamma < 1.0) {
            return Err(Invalid(anyhow::anyhow!("--gamma must lie in (0, 1)")).into());
        }
        cmdp_core::analysis::export_value_map(&project_value(&optimal_values(&ctx, args.gamma), psi, &ctx))
    };
    match &args.out {
        Some(path) => write(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
