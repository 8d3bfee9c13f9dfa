//! On-policy linear actor-critic.
//!
//! Each episode samples a context from the pool, starts the bonus engine's
//! episode, and rolls out the stochastic policy with shaped reward
//! `r + alpha * b`, updating after every step. Evaluation episodes use the
//! same pool with their own random stream and no intrinsic reward.

mod policy;
mod record;
mod train;

use thiserror::Error;

use crate::bonus::BonusError;
use crate::env::EnvError;

pub use policy::{sample_categorical, Experience, LinearPolicy, StepSizes, Traces};
pub use record::{
    log_file_name, parse_log_file_name, EpisodeLine, EvalPoint, LogLine, RunRecord, TraceLine,
};
pub use train::{
    evaluate, evaluate_in, train_policy, train_run, train_run_with, RunOptions, TrainConfig, TrainFailure,
};

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("observation dimension {got} does not match policy input {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("action {0} out of range")]
    InvalidAction(usize),
    #[error("non-finite {what}: {value}")]
    NonFinite { what: &'static str, value: f64 },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("malformed run log: {0}")]
    BadLog(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Bonus(#[from] BonusError),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bonus::{BonusSpec, Preset};
    use crate::env::{ContextCount, ContextPool, EnvKind, ObsConfig, Planner, PoolSpec};
    use crate::rng::{stream, Stream};

    fn corridors(bonus: Option<BonusSpec>, steps: u64) -> TrainConfig {
        let pool = PoolSpec::new(EnvKind::corridors(4, 5).unwrap(), ContextCount::Finite(1), 0);
        let mut cfg = TrainConfig::new(pool, bonus, steps);
        cfg.eval_every = 500;
        cfg.eval_episodes = 10;
        cfg.seed = 3;
        cfg
    }

    #[test]
    fn empty_run_has_initial_eval_only() {
        let rec = train_run(&corridors(None, 0)).unwrap();
        assert_eq!(rec.lines.len(), 1);
        let e = rec.episodes().next().unwrap();
        assert_eq!((e.step, e.episode), (0, 0));
        assert!(e.eval_success.is_some());
    }

    #[test]
    fn runs_are_bit_identical() {
        let cfg = corridors(Some(BonusSpec::preset(Preset::NovelD)), 2000);
        let a = train_run_with(&cfg, RunOptions { trace_bonus: true }).unwrap();
        let b = train_run_with(&cfg, RunOptions { trace_bonus: true }).unwrap();
        assert_eq!(a.to_jsonl(), b.to_jsonl());
        assert!(a.traces().count() == 2000);
        assert_eq!(a.episodes().last().unwrap().step, 2000);
    }

    #[test]
    fn zero_alpha_matches_no_bonus() {
        for preset in [Preset::Global, Preset::E3b, Preset::Agac] {
            let spec = BonusSpec::preset(preset).with_alpha(0.0);
            let with = train_run(&corridors(Some(spec), 1500)).unwrap();
            let without = train_run(&corridors(None, 1500)).unwrap();
            let returns = |r: &RunRecord| -> Vec<(u64, f64, Option<f64>)> {
                r.episodes().map(|e| (e.step, e.ext_return, e.eval_success)).collect()
            };
            assert_eq!(returns(&with), returns(&without), "{preset}");
        }
    }

    #[test]
    fn digest_ignores_seed() {
        let mut a = corridors(None, 10);
        let b = a.clone();
        a.seed = 99;
        assert_eq!(a.digest(), b.digest());
        a.total_steps = 11;
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 16);
    }

    #[test]
    fn evaluate_bounds_and_oracles() {
        let spec = PoolSpec::new(EnvKind::corridors(8, 12).unwrap(), ContextCount::Finite(1), 0);
        let obs = ObsConfig::default();
        let mut rng = stream(0, Stream::Evaluation);
        let mut pool = ContextPool::new(spec);
        let noop = evaluate_in(&mut pool, &obs, 20, &mut rng, |_, _, _, _| Ok(1))
            .unwrap();
        assert_eq!(noop, 0.0);
        let uniform = evaluate(&LinearPolicy::new(13 * 8, 8), &spec, &obs, 20, &mut rng);
        assert!(uniform.is_err());

        let pool_spec = PoolSpec::new(EnvKind::multi_room(4, true, 15, 15).unwrap(), ContextCount::Infinite, 0);
        let mut pool = ContextPool::new(pool_spec);
        let oracle = evaluate_in(&mut pool, &obs, 30, &mut rng, |ctx, s, _, _| {
            Ok(Planner::new(ctx).best_action(s).unwrap())
        })
        .unwrap();
        assert_eq!(oracle, 1.0);
        let dim = crate::env::obs_dim(&pool_spec.kind, &obs);
        let r = evaluate(&LinearPolicy::new(dim, 4), &pool_spec, &obs, 10, &mut rng).unwrap();
        assert!((0.0..=1.0).contains(&r));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = corridors(None, 10);
        cfg.gamma = 0.0;
        assert!(train_run(&cfg).is_err());
        let mut cfg = corridors(None, 10);
        cfg.obs = Some(ObsConfig {
            window: 4,
            abs_position: false,
        });
        assert!(train_run(&cfg).is_err());
    }
}
