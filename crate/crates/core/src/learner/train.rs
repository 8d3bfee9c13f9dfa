use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::record::{EpisodeLine, LogLine, RunRecord, TraceLine};
use super::{Experience, LearnerError, LinearPolicy, StepSizes, Traces};
use crate::bonus::{shaped_reward, BonusEngine, BonusSpec, GlobalKind, StepInput};
use crate::env::{
    extract_feature, observe, obs_dim, reset, step, ContextCount, ContextInstance, ContextPool, ObsConfig,
    ObservationVector, PoolSpec, State,
};
use crate::rng::{self, Stream};

/// One training run's full configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub pool: PoolSpec,
    /// `None` trains on extrinsic reward alone.
    #[serde(default)]
    pub bonus: Option<BonusSpec>,
    /// Observation layout; `None` picks the pool-dependent default.
    #[serde(default)]
    pub obs: Option<ObsConfig>,
    #[serde(default = "defaults::gamma")]
    pub gamma: f64,
    #[serde(default = "defaults::lr")]
    pub lr_actor: f64,
    #[serde(default = "defaults::lr")]
    pub lr_critic: f64,
    #[serde(default = "defaults::entropy_coef")]
    pub entropy_coef: f64,
    /// Eligibility-trace decay; 0 gives one-step TD.
    #[serde(default = "defaults::trace_lambda")]
    pub trace_lambda: f64,
    pub total_steps: u64,
    #[serde(default = "defaults::eval_every")]
    pub eval_every: u64,
    #[serde(default = "defaults::eval_episodes")]
    pub eval_episodes: u32,
    #[serde(default)]
    pub seed: u64,
}

mod defaults {
    pub fn gamma() -> f64 {
        0.99
    }
    pub fn lr() -> f64 {
        0.05
    }
    pub fn entropy_coef() -> f64 {
        0.005
    }
    pub fn trace_lambda() -> f64 {
        0.9
    }
    pub fn eval_every() -> u64 {
        2000
    }
    pub fn eval_episodes() -> u32 {
        50
    }
}

impl TrainConfig {
    pub fn new(pool: PoolSpec, bonus: Option<BonusSpec>, total_steps: u64) -> Self {
        TrainConfig {
            pool,
            bonus,
            obs: None,
            gamma: defaults::gamma(),
            lr_actor: defaults::lr(),
            lr_critic: defaults::lr(),
            entropy_coef: defaults::entropy_coef(),
            trace_lambda: defaults::trace_lambda(),
            total_steps,
            eval_every: defaults::eval_every(),
            eval_episodes: defaults::eval_episodes(),
            seed: 0,
        }
    }

    pub fn obs_config(&self) -> ObsConfig {
        self.obs.unwrap_or_else(|| ObsConfig::default_for(self.pool.contexts))
    }

    pub fn validate(&self) -> Result<(), LearnerError> {
        let bad = |why: String| Err(LearnerError::InvalidConfig(why));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        for (name, v) in [
            ("lr_actor", self.lr_actor),
            ("lr_critic", self.lr_critic),
            ("entropy_coef", self.entropy_coef),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        if !(0.0..=1.0).contains(&self.trace_lambda) {
            return bad(format!("trace_lambda must lie in [0, 1], got {}", self.trace_lambda));
        }
        if self.eval_every == 0 {
            return bad("eval_every must be positive".into());
        }
        if self.eval_episodes == 0 {
            return bad("eval_episodes must be positive".into());
        }
        let obs = self.obs_config();
        if obs.window.is_multiple_of(2) {
            return bad(format!("observation window must be odd, got {}", obs.window));
        }
        if let Some(b) = &self.bonus {
            b.validate()?;
        }
        Ok(())
    }

    /// First 16 hex digits of SHA-256 over the canonical JSON of the config
    /// with the seed zeroed, so every seed of a cell shares one digest.
    pub fn digest(&self) -> String {
        let canonical = TrainConfig { seed: 0, ..self.clone() };
        let json = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))[..16].to_string()
    }
}

/// Switches that change what is logged but not what is computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub trace_bonus: bool,
}

/// A run that aborted, with whatever it logged before the fault.
#[derive(Debug)]
pub struct TrainFailure {
    pub error: LearnerError,
    pub partial: RunRecord,
}

impl std::fmt::Display for TrainFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} log lines)", self.error, self.partial.lines.len())
    }
}

impl std::error::Error for TrainFailure {}

pub fn train_run(cfg: &TrainConfig) -> Result<RunRecord, TrainFailure> {
    train_run_with(cfg, RunOptions::default())
}

pub fn train_run_with(cfg: &TrainConfig, opts: RunOptions) -> Result<RunRecord, TrainFailure> {
    train_policy(cfg, opts).map(|(record, _)| record)
}

/// Like [`train_run_with`], also returning the trained policy.
pub fn train_policy(cfg: &TrainConfig, opts: RunOptions) -> Result<(RunRecord, LinearPolicy), TrainFailure> {
    let mut record = RunRecord {
        digest: cfg.digest(),
        seed: cfg.seed,
        lines: Vec::new(),
    };
    match run_loop(cfg, opts, &mut record.lines) {
        Ok(policy) => Ok((record, policy)),
        Err(error) => Err(TrainFailure {
            error,
            partial: record,
        }),
    }
}

#[derive(Default)]
struct EpisodeStats {
    ext_return: f64,
    episodic: f64,
    global: f64,
    bonus_steps: u64,
    invdyn: f64,
    invdyn_steps: u64,
}

fn run_loop(cfg: &TrainConfig, opts: RunOptions, lines: &mut Vec<LogLine>) -> Result<LinearPolicy, LearnerError> {
    cfg.validate()?;
    let obs_cfg = cfg.obs_config();
    let kind = cfg.pool.kind;
    let dim = obs_dim(&kind, &obs_cfg);
    let n_actions = kind.n_actions();
    let mut policy = LinearPolicy::new(dim, n_actions);
    let mut engine = match &cfg.bonus {
        Some(spec) => Some(BonusEngine::new(
            *spec,
            dim,
            n_actions,
            cfg.lr_actor,
            &mut rng::stream(cfg.seed, Stream::BonusInit),
        )?),
        None => None,
    };
    let alpha = cfg.bonus.map_or(0.0, |b| b.alpha);
    let psi = cfg.bonus.map(|b| b.psi);
    let needs_next_policy = cfg
        .bonus
        .is_some_and(|b| b.uses_global() && b.global == GlobalKind::AdversaryKl);

    let mut pool = ContextPool::new(cfg.pool);
    let mut context_rng = match cfg.pool.contexts {
        ContextCount::Finite(_) => rng::stream(cfg.seed, Stream::EpisodeSampling),
        ContextCount::Infinite => rng::stream(cfg.seed, Stream::EnvGeneration),
    };
    let mut policy_rng = rng::stream(cfg.seed, Stream::PolicySampling);
    let lrs = StepSizes {
        actor: cfg.lr_actor,
        critic: cfg.lr_critic,
    };

    let mut traces = Traces::new(&policy);
    let mut steps = 0u64;
    let mut episode = 0u64;
    let mut next_eval = cfg.eval_every;
    let mut eval_round = 0u64;
    while steps < cfg.total_steps {
        let ctx = pool.sample(&mut context_rng)?;
        let mut state = reset(&ctx);
        let mut obs = observe(&ctx, &state, &obs_cfg);
        if let (Some(e), Some(psi)) = (&mut engine, psi) {
            e.begin_episode(&obs, extract_feature(psi, &state))?;
        }
        let mut stats = EpisodeStats::default();
        loop {
            let pi = policy.forward(&obs)?;
            let action = super::sample_categorical(&pi, &mut policy_rng);
            let tr = step(&ctx, &state, action)?;
            let next_obs = observe(&ctx, &tr.next_state, &obs_cfg);
            steps += 1;
            let mut reward = tr.reward;
            if let (Some(e), Some(psi)) = (&mut engine, psi) {
                let pi_next = if needs_next_policy { Some(policy.forward(&next_obs)?) } else { None };
                let out = e.step(StepInput {
                    obs: &obs,
                    next_obs: &next_obs,
                    next_key: extract_feature(psi, &tr.next_state),
                    action,
                    policy_next: pi_next.as_deref(),
                })?;
                reward = shaped_reward(tr.reward, out.normalized, alpha);
                stats.episodic += out.episodic;
                stats.global += out.global;
                stats.bonus_steps += 1;
                if let Some(l) = out.invdyn_loss {
                    stats.invdyn += l;
                    stats.invdyn_steps += 1;
                }
                if opts.trace_bonus {
                    lines.push(LogLine::Trace(TraceLine {
                        step: steps,
                        episodic_value: out.episodic,
                        global_value: out.global,
                        combined: out.combined,
                        normalized: out.normalized,
                    }));
                }
            }
            stats.ext_return += tr.reward;
            policy.update_traced(
                &Experience {
                    obs: &obs,
                    action,
                    reward,
                    next_obs: &next_obs,
                    done: tr.done,
                },
                cfg.gamma,
                cfg.trace_lambda,
                lrs,
                cfg.entropy_coef,
                &mut traces,
            )?;
            state = tr.next_state;
            obs = next_obs;
            if tr.done || steps >= cfg.total_steps {
                break;
            }
        }
        episode += 1;
        let mean = |x: f64, n: u64| if n == 0 { 0.0 } else { x / n as f64 };
        let mut line = EpisodeLine {
            step: steps,
            episode,
            ext_return: stats.ext_return,
            ep_bonus_mean: mean(stats.episodic, stats.bonus_steps),
            gl_bonus_mean: mean(stats.global, stats.bonus_steps),
            invdyn_loss: (stats.invdyn_steps > 0).then(|| mean(stats.invdyn, stats.invdyn_steps)),
            eval_success: None,
        };
        if steps >= next_eval && steps < cfg.total_steps {
            line.eval_success = Some(eval_policy(&policy, &mut pool, cfg, &obs_cfg, eval_round)?);
            eval_round += 1;
            while next_eval <= steps {
                next_eval += cfg.eval_every;
            }
        }
        lines.push(LogLine::Episode(line));
    }
    let final_eval = eval_policy(&policy, &mut pool, cfg, &obs_cfg, eval_round)?;
    match lines.iter_mut().rev().find_map(|l| match l {
        LogLine::Episode(e) => Some(e),
        LogLine::Trace(_) => None,
    }) {
        Some(last) => last.eval_success = Some(final_eval),
        None => lines.push(LogLine::Episode(EpisodeLine {
            step: 0,
            episode: 0,
            ext_return: 0.0,
            ep_bonus_mean: 0.0,
            gl_bonus_mean: 0.0,
            invdyn_loss: None,
            eval_success: Some(final_eval),
        })),
    }
    Ok(policy)
}

fn eval_policy(
    policy: &LinearPolicy,
    pool: &mut ContextPool,
    cfg: &TrainConfig,
    obs_cfg: &ObsConfig,
    round: u64,
) -> Result<f64, LearnerError> {
    let mut rng = rng::sub_stream(cfg.seed, Stream::Evaluation, round);
    evaluate_in(pool, obs_cfg, cfg.eval_episodes, &mut rng, |_, _, obs, rng| {
        policy.sample(obs, rng)
    })
}

/// Success rate of the stochastic `policy` over `n_episodes` fresh contexts.
/// Intrinsic reward plays no part and nothing is mutated.
pub fn evaluate<R: Rng>(
    policy: &LinearPolicy,
    pool: &PoolSpec,
    obs_cfg: &ObsConfig,
    n_episodes: u32,
    rng: &mut R,
) -> Result<f64, LearnerError> {
    let mut pool = ContextPool::new(*pool);
    evaluate_in(&mut pool, obs_cfg, n_episodes, rng, |_, _, obs, rng| {
        policy.sample(obs, rng)
    })
}

/// Evaluate an arbitrary behaviour `act(ctx, state, obs, rng) -> action`.
pub fn evaluate_in<R: Rng>(
    pool: &mut ContextPool,
    obs_cfg: &ObsConfig,
    n_episodes: u32,
    rng: &mut R,
    mut act: impl FnMut(&ContextInstance, &State, &ObservationVector, &mut R) -> Result<usize, LearnerError>,
) -> Result<f64, LearnerError> {
    if n_episodes == 0 {
        return Err(LearnerError::InvalidConfig("n_episodes must be at least 1".into()));
    }
    let mut successes = 0u32;
    for _ in 0..n_episodes {
        let ctx = pool.sample(rng)?;
        let mut state = reset(&ctx);
        loop {
            let obs = observe(&ctx, &state, obs_cfg);
            let a = act(&ctx, &state, &obs, rng)?;
            let tr = step(&ctx, &state, a)?;
            if tr.done {
                if tr.reward > 0.0 {
                    successes += 1;
                }
                break;
            }
            state = tr.next_state;
        }
    }
    Ok(successes as f64 / n_episodes as f64)
}
