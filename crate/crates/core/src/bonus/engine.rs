use rand::Rng;

use super::formulas::{combine, first_visit_indicator, inverse_sqrt_count, noveld_diff, ride};
use super::{BonusError, BonusSpec, CountTable, EmbeddingSource, EpisodicKind, GlobalKind, Scope};
use crate::embed::{
    kl_categorical, softmax, sq_dist, EllipticalState, EmbeddingModel, RunningStd, TinyNet, HIDDEN,
};
use crate::env::{FeatureKey, ObservationVector};

/// What the engine needs to know about one transition `s -> s'`.
#[derive(Debug, Clone, Copy)]
pub struct StepInput<'a> {
    pub obs: &'a ObservationVector,
    pub next_obs: &'a ObservationVector,
    pub next_key: FeatureKey,
    pub action: usize,
    /// `pi(.|s')`; required when the global kind is `AdversaryKl`.
    pub policy_next: Option<&'a [f64]>,
}

/// Per-step bonus decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BonusOutput {
    pub episodic: f64,
    pub global: f64,
    pub combined: f64,
    /// The value that enters the shaped reward.
    pub normalized: f64,
    /// Inverse-dynamics loss if the embedding trained this step.
    pub invdyn_loss: Option<f64>,
}

#[derive(Debug, Clone)]
enum Embedder {
    Learned(EmbeddingModel),
    Fixed(TinyNet),
}

impl Embedder {
    fn embed(&self, obs: &ObservationVector) -> Result<Vec<f64>, BonusError> {
        Ok(match self {
            Embedder::Learned(m) => m.embed(obs)?,
            Embedder::Fixed(n) => n.forward(obs)?,
        })
    }
}

#[derive(Debug, Clone)]
struct Rnd {
    target: TinyNet,
    predictor: TinyNet,
}

/// Linear softmax policy that imitates the agent.
#[derive(Debug, Clone)]
struct Adversary {
    n_actions: usize,
    /// Input-major `obs_dim x n_actions`.
    w: Vec<f64>,
}

impl Adversary {
    fn dist(&self, obs: &ObservationVector) -> Vec<f64> {
        let a = self.n_actions;
        let mut z = vec![0.0; a];
        for &i in obs.active() {
            let row = &self.w[i as usize * a..(i as usize + 1) * a];
            for (zj, w) in z.iter_mut().zip(row) {
                *zj += w;
            }
        }
        softmax(&z)
    }

    /// Cross-entropy step toward `target`.
    fn imitate(&mut self, obs: &ObservationVector, target: &[f64], lr: f64) {
        let p = self.dist(obs);
        let a = self.n_actions;
        for &i in obs.active() {
            let row = &mut self.w[i as usize * a..(i as usize + 1) * a];
            for j in 0..a {
                row[j] -= lr * (p[j] - target[j]);
            }
        }
    }
}

/// All mutable novelty machinery of one run.
#[derive(Debug, Clone)]
pub struct BonusEngine {
    spec: BonusSpec,
    global_counts: CountTable,
    episodic_counts: CountTable,
    rnd: Option<Rnd>,
    prev_rnd: Option<f64>,
    elliptical: Option<EllipticalState>,
    embedder: Option<Embedder>,
    adversary: Option<Adversary>,
    adversary_lr: f64,
    norm: RunningStd,
    norm_episodic: RunningStd,
    norm_global: RunningStd,
}

impl BonusEngine {
    /// `policy_lr` sets the adversary's step size; all networks draw their
    /// initial weights from `rng`.
    pub fn new<R: Rng + ?Sized>(
        spec: BonusSpec,
        obs_dim: usize,
        n_actions: usize,
        policy_lr: f64,
        rng: &mut R,
    ) -> Result<Self, BonusError> {
        spec.validate()?;
        let k = spec.embed_dim;
        let needs_rnd = spec.uses_global() && matches!(spec.global, GlobalKind::Rnd | GlobalKind::NovelDDiff);
        let rnd = needs_rnd.then(|| Rnd {
            target: TinyNet::new(obs_dim, HIDDEN, k, false, rng),
            predictor: TinyNet::new(obs_dim, HIDDEN, k, true, rng),
        });
        let needs_phi = spec.uses_episodic() && matches!(spec.episodic, EpisodicKind::Elliptical | EpisodicKind::Ride);
        let embedder = needs_phi.then(|| match spec.embedding {
            EmbeddingSource::Learned => Embedder::Learned(EmbeddingModel::new(obs_dim, k, n_actions, rng)),
            EmbeddingSource::FixedRandom => Embedder::Fixed(TinyNet::new(obs_dim, HIDDEN, k, false, rng)),
        });
        let elliptical = (needs_phi && spec.episodic == EpisodicKind::Elliptical)
            .then(|| EllipticalState::new(k, spec.ridge_lambda));
        let adversary = (spec.uses_global() && spec.global == GlobalKind::AdversaryKl).then(|| Adversary {
            n_actions,
            w: vec![0.0; obs_dim * n_actions],
        });
        Ok(BonusEngine {
            spec,
            global_counts: CountTable::new(Scope::Global),
            episodic_counts: CountTable::new(Scope::Episodic),
            rnd,
            prev_rnd: None,
            elliptical,
            embedder,
            adversary,
            adversary_lr: spec.adversary_lr_ratio * policy_lr,
            norm: RunningStd::new(),
            norm_episodic: RunningStd::new(),
            norm_global: RunningStd::new(),
        })
    }

    pub fn spec(&self) -> &BonusSpec {
        &self.spec
    }

    pub fn global_counts(&self) -> &CountTable {
        &self.global_counts
    }

    pub fn episodic_counts(&self) -> &CountTable {
        &self.episodic_counts
    }

    pub fn elliptical(&self) -> Option<&EllipticalState> {
        self.elliptical.as_ref()
    }

    /// Clear the episodic substate; global counts, networks, the adversary
    /// and the running std are untouched.
    pub fn reset_episode(&mut self) {
        self.episodic_counts.clear();
        if let Some(e) = &mut self.elliptical {
            e.reset();
        }
        self.prev_rnd = None;
    }

    /// Start an episode in `obs0`: reset the episodic state and register the
    /// initial state as visited. No bonus is paid for it.
    pub fn begin_episode(&mut self, obs0: &ObservationVector, key0: FeatureKey) -> Result<(), BonusError> {
        self.reset_episode();
        self.record(key0);
        if self.rnd.is_some() {
            self.prev_rnd = Some(self.rnd_bonus(obs0)?);
        }
        if let (Some(emb), Some(ell)) = (&self.embedder, &mut self.elliptical) {
            ell.update(&emb.embed(obs0)?)?;
        }
        Ok(())
    }

    fn record(&mut self, key: FeatureKey) {
        self.global_counts.record(key);
        self.episodic_counts.record(key);
    }

    /// `1 / sqrt(N(key))` for an already-recorded key.
    pub fn global_count_bonus(&self, key: &FeatureKey) -> f64 {
        inverse_sqrt_count(self.global_counts.get(key).max(1))
    }

    /// Count-based episodic bonus for an already-recorded key.
    pub fn episodic_bonus(&self, key: &FeatureKey, kind: EpisodicKind) -> f64 {
        let n_e = self.episodic_counts.get(key).max(1);
        match kind {
            EpisodicKind::FirstVisitIndicator => first_visit_indicator(n_e),
            EpisodicKind::InverseSqrtEpisodicCount => inverse_sqrt_count(n_e),
            _ => panic!("{kind:?} is not a count bonus"),
        }
    }

    /// `1[N_e = 1] / sqrt(N)` for an already-recorded key.
    pub fn combined_count_bonus(&self, key: &FeatureKey) -> f64 {
        self.episodic_bonus(key, EpisodicKind::FirstVisitIndicator) * self.global_count_bonus(key)
    }

    /// Prediction error at `obs`, then one predictor step on it.
    pub fn rnd_bonus(&mut self, obs: &ObservationVector) -> Result<f64, BonusError> {
        let lr = self.spec.predictor_lr;
        let rnd = self.rnd.as_mut().ok_or(BonusError::Missing("random network"))?;
        let target = rnd.target.forward(obs)?;
        let err = rnd.predictor.sgd_step(&target, obs, lr)?;
        Ok(err)
    }

    /// `phi^T C^-1 phi` before inserting `phi(obs)`, then insert it.
    pub fn e3b_bonus(&mut self, obs: &ObservationVector) -> Result<f64, BonusError> {
        let emb = self.embedder.as_ref().ok_or(BonusError::Missing("embedding"))?;
        let phi = emb.embed(obs)?;
        let ell = self.elliptical.as_mut().ok_or(BonusError::Missing("elliptical state"))?;
        Ok(ell.bonus_and_update(&phi)?)
    }

    fn ride_bonus(&self, input: &StepInput<'_>) -> Result<f64, BonusError> {
        let emb = self.embedder.as_ref().ok_or(BonusError::Missing("embedding"))?;
        let d = sq_dist(&emb.embed(input.obs)?, &emb.embed(input.next_obs)?).sqrt();
        Ok(ride(d, self.episodic_counts.get(&input.next_key).max(1)))
    }

    fn adversary_kl(&mut self, input: &StepInput<'_>) -> Result<f64, BonusError> {
        let pi = input.policy_next.ok_or(BonusError::Missing("policy distribution"))?;
        let lr = self.adversary_lr;
        let adv = self.adversary.as_mut().ok_or(BonusError::Missing("adversary"))?;
        let q = adv.dist(input.next_obs);
        let kl = kl_categorical(pi, &q).value;
        adv.imitate(input.next_obs, pi, lr);
        Ok(kl)
    }

    /// Bonus for arriving in `s'`.
    pub fn step(&mut self, input: StepInput<'_>) -> Result<BonusOutput, BonusError> {
        self.record(input.next_key);
        let spec = self.spec;
        let episodic = if spec.uses_episodic() {
            match spec.episodic {
                EpisodicKind::None => 0.0,
                k @ (EpisodicKind::FirstVisitIndicator | EpisodicKind::InverseSqrtEpisodicCount) => {
                    self.episodic_bonus(&input.next_key, k)
                }
                EpisodicKind::Elliptical => self.e3b_bonus(input.next_obs)?,
                EpisodicKind::Ride => self.ride_bonus(&input)?,
            }
        } else {
            0.0
        };
        let global = if spec.uses_global() {
            match spec.global {
                GlobalKind::None => 0.0,
                GlobalKind::InverseSqrtCount => self.global_count_bonus(&input.next_key),
                GlobalKind::Rnd => self.rnd_bonus(input.next_obs)?,
                GlobalKind::NovelDDiff => {
                    let next = self.rnd_bonus(input.next_obs)?;
                    let cur = self.prev_rnd.replace(next).unwrap_or(0.0);
                    noveld_diff(next, cur, spec.noveld_c)
                }
                GlobalKind::AdversaryKl => self.adversary_kl(&input)?,
            }
        } else {
            0.0
        };
        let mut invdyn_loss = None;
        if spec.update_embedding {
            if let Some(Embedder::Learned(m)) = &mut self.embedder {
                invdyn_loss = Some(m.train_step(input.obs, input.next_obs, input.action, spec.embedding_lr)?);
            }
        }
        let combined = combine(episodic, global, spec.combiner);
        let normalized = if spec.per_factor_normalize {
            let e = if spec.uses_episodic() { self.norm_episodic.normalize(episodic) } else { 0.0 };
            let g = if spec.uses_global() { self.norm_global.normalize(global) } else { 0.0 };
            combine(e, g, spec.combiner)
        } else if spec.normalize {
            self.norm.normalize(combined)
        } else {
            combined
        };
        if !normalized.is_finite() || !combined.is_finite() {
            return Err(BonusError::NonFinite {
                episodic,
                global,
            });
        }
        Ok(BonusOutput {
            episodic,
            global,
            combined,
            normalized,
            invdyn_loss,
        })
    }
}
