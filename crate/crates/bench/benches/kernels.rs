use std::collections::BTreeMap;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cmdp_bench::{context, random_transitions};
use cmdp_core::analysis::{optimal_values, project_value};
use cmdp_core::bonus::{BonusEngine, BonusSpec, Preset, StepInput};
use cmdp_core::embed::EllipticalState;
use cmdp_core::env::{obs_dim, reset, step, ContextCount, EnvKind, FeatureKind, ObsConfig, PoolSpec};
use cmdp_core::harness::{stratified_bootstrap_ci, Metric};
use cmdp_core::learner::{train_run, TrainConfig};

fn env_step(c: &mut Criterion) {
    let ctx = context("multiroom", 1);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut s = reset(&ctx);
    c.bench_function("env/multiroom_step", |b| {
        b.iter(|| {
            let tr = step(&ctx, &s, rng.random_range(0..4)).unwrap();
            s = if tr.done { reset(&ctx) } else { tr.next_state };
            black_box(tr.reward)
        })
    });
}

fn elliptical(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let phis: Vec<Vec<f64>> = (0..256)
        .map(|_| (0..32).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    c.bench_function("embed/elliptical_k32", |b| {
        b.iter_batched_ref(
            || EllipticalState::new(32, 0.1),
            |state| {
                for phi in &phis {
                    black_box(state.bonus_and_update(phi).unwrap());
                }
            },
            BatchSize::SmallInput,
        )
    });
}

fn bonus_engine(c: &mut Criterion) {
    let ctx = context("multiroom", 1);
    let obs = ObsConfig::default_for(ContextCount::Infinite);
    let dim = obs_dim(ctx.kind(), &obs);
    let steps = random_transitions(&ctx, &obs, FeatureKind::Position, 256);
    let mut group = c.benchmark_group("bonus");
    for preset in [Preset::Combined, Preset::NovelD, Preset::E3b] {
        group.bench_function(preset.name(), |b| {
            b.iter_batched_ref(
                || {
                    let mut rng = ChaCha8Rng::seed_from_u64(0);
                    let mut e = BonusEngine::new(BonusSpec::preset(preset), dim, 4, 0.05, &mut rng).unwrap();
                    e.begin_episode(&steps[0].obs, steps[0].next_key).unwrap();
                    e
                },
                |engine| {
                    for r in &steps {
                        let out = engine
                            .step(StepInput {
                                obs: &r.obs,
                                next_obs: &r.next_obs,
                                next_key: r.next_key,
                                action: r.action,
                                policy_next: None,
                            })
                            .unwrap();
                        black_box(out.normalized);
                    }
                },
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

fn training(c: &mut Criterion) {
    let pool = PoolSpec::new(EnvKind::corridors(8, 12).unwrap(), ContextCount::Finite(1), 0);
    let mut cfg = TrainConfig::new(pool, Some(BonusSpec::preset(Preset::Global)), 5000);
    cfg.eval_every = 5000;
    cfg.eval_episodes = 10;
    let mut group = c.benchmark_group("learner");
    group.sample_size(20);
    group.bench_function("corridors_5k_steps", |b| b.iter(|| black_box(train_run(&cfg).unwrap())));
    group.finish();
}

fn analysis(c: &mut Criterion) {
    let ctx = context("multiroom", 3);
    c.bench_function("analysis/value_map_multiroom", |b| {
        b.iter(|| black_box(project_value(&optimal_values(&ctx, 0.9), FeatureKind::Position, &ctx)))
    });
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let tasks: BTreeMap<String, Vec<f64>> = (0..16)
        .map(|t| (format!("t{t}"), (0..5).map(|_| rng.random()).collect()))
        .collect();
    c.bench_function("harness/bootstrap_iqm_2000", |b| {
        b.iter(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            black_box(stratified_bootstrap_ci(&tasks, Metric::Iqm, 2000, 0.95, &mut rng).unwrap())
        })
    });
}

criterion_group!(benches, env_step, elliptical, bonus_engine, training, analysis);
criterion_main!(benches);
