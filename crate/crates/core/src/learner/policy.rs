use rand::Rng;

use super::LearnerError;
use crate::embed::softmax;
use crate::env::ObservationVector;

/// Softmax actor and linear critic over binary observations.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPolicy {
    obs_dim: usize,
    n_actions: usize,
    /// Input-major `obs_dim x n_actions`.
    actor: Vec<f64>,
    critic: Vec<f64>,
}

/// Step sizes for [`LinearPolicy::update`].
///
/// Both are divided by the number of active features of the updated
/// observation, so one setting suits observations of any density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSizes {
    pub actor: f64,
    pub critic: f64,
}

impl StepSizes {
    fn per_feature(self, obs: &ObservationVector) -> StepSizes {
        let n = obs.active().len().max(1) as f64;
        StepSizes {
            actor: self.actor / n,
            critic: self.critic / n,
        }
    }
}

/// One transition as seen by the learner.
#[derive(Debug, Clone, Copy)]
pub struct Experience<'a> {
    pub obs: &'a ObservationVector,
    pub action: usize,
    pub reward: f64,
    pub next_obs: &'a ObservationVector,
    pub done: bool,
}

impl LinearPolicy {
    /// All-zero weights: uniform actor, zero critic.
    pub fn new(obs_dim: usize, n_actions: usize) -> Self {
        LinearPolicy {
            obs_dim,
            n_actions,
            actor: vec![0.0; obs_dim * n_actions],
            critic: vec![0.0; obs_dim],
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn actor_weights(&self) -> &[f64] {
        &self.actor
    }

    pub fn actor_weights_mut(&mut self) -> &mut [f64] {
        &mut self.actor
    }

    fn check(&self, obs: &ObservationVector) -> Result<(), LearnerError> {
        if obs.dim() == self.obs_dim {
            Ok(())
        } else {
            Err(LearnerError::DimensionMismatch {
                expected: self.obs_dim,
                got: obs.dim(),
            })
        }
    }

    pub fn logits(&self, obs: &ObservationVector) -> Result<Vec<f64>, LearnerError> {
        self.check(obs)?;
        let a = self.n_actions;
        let mut z = vec![0.0; a];
        for &i in obs.active() {
            for (zj, w) in z.iter_mut().zip(&self.actor[i as usize * a..(i as usize + 1) * a]) {
                *zj += w;
            }
        }
        Ok(z)
    }

    /// `softmax(actor . obs)`.
    pub fn forward(&self, obs: &ObservationVector) -> Result<Vec<f64>, LearnerError> {
        Ok(softmax(&self.logits(obs)?))
    }

    pub fn value(&self, obs: &ObservationVector) -> Result<f64, LearnerError> {
        self.check(obs)?;
        Ok(obs.active().iter().map(|&i| self.critic[i as usize]).sum())
    }

    pub fn sample<R: Rng + ?Sized>(&self, obs: &ObservationVector, rng: &mut R) -> Result<usize, LearnerError> {
        Ok(sample_categorical(&self.forward(obs)?, rng))
    }

    /// One-step actor-critic update; returns the TD error.
    ///
    /// `delta = r + gamma V(s') (1 - done) - V(s)`; the critic moves by
    /// `lr_c delta x / |x|` and the actor ascends `delta grad log pi(a|s)`
    /// plus `entropy_coef grad H(pi(.|s))`, scaled the same way.
    pub fn update(
        &mut self,
        exp: &Experience<'_>,
        gamma: f64,
        lr: StepSizes,
        entropy_coef: f64,
    ) -> Result<f64, LearnerError> {
        if exp.action >= self.n_actions {
            return Err(LearnerError::InvalidAction(exp.action));
        }
        let v = self.value(exp.obs)?;
        let v_next = if exp.done { 0.0 } else { self.value(exp.next_obs)? };
        let delta = exp.reward + gamma * v_next - v;
        if !delta.is_finite() {
            return Err(LearnerError::NonFinite {
                what: "TD error",
                value: delta,
            });
        }
        let pi = self.forward(exp.obs)?;
        let entropy: f64 = -pi.iter().map(|&p| p * p.ln()).sum::<f64>();
        let a = self.n_actions;
        let lr = lr.per_feature(exp.obs);
        let grad: Vec<f64> = (0..a)
            .map(|b| {
                let indicator = if b == exp.action { 1.0 } else { 0.0 };
                lr.actor * (delta * (indicator - pi[b]) - entropy_coef * pi[b] * (pi[b].ln() + entropy))
            })
            .collect();
        for &i in exp.obs.active() {
            let i = i as usize;
            self.critic[i] += lr.critic * delta;
            for (w, g) in self.actor[i * a..(i + 1) * a].iter_mut().zip(&grad) {
                *w += g;
            }
        }
        Ok(delta)
    }
}

/// Accumulating eligibility traces for [`LinearPolicy::update_traced`].
///
/// Only features touched since the last [`clear`](Traces::clear) are stored,
/// so decay costs scale with the episode, not the observation size.
#[derive(Debug, Clone, Default)]
pub struct Traces {
    touched: Vec<u32>,
    seen: Vec<bool>,
    critic: Vec<f64>,
    actor: Vec<f64>,
}

impl Traces {
    pub fn new(policy: &LinearPolicy) -> Self {
        Traces {
            touched: Vec::new(),
            seen: vec![false; policy.obs_dim],
            critic: vec![0.0; policy.obs_dim],
            actor: vec![0.0; policy.obs_dim * policy.n_actions],
        }
    }

    /// Zero all traces; call at every episode boundary.
    pub fn clear(&mut self) {
        let a = self.actor.len() / self.critic.len().max(1);
        for &i in &self.touched {
            let i = i as usize;
            self.seen[i] = false;
            self.critic[i] = 0.0;
            self.actor[i * a..(i + 1) * a].fill(0.0);
        }
        self.touched.clear();
    }
}

impl LinearPolicy {
    /// Actor-critic update with eligibility traces.
    ///
    /// Both traces decay by `gamma * lambda` and then accumulate the current
    /// gradients (`x` for the critic, `grad log pi(a|s)` for the actor); the
    /// TD error then moves each weight along its trace. The entropy term acts
    /// on the current state only. With `lambda = 0` this is exactly
    /// [`update`](Self::update). Traces are cleared after a terminal step.
    pub fn update_traced(
        &mut self,
        exp: &Experience<'_>,
        gamma: f64,
        lambda: f64,
        lr: StepSizes,
        entropy_coef: f64,
        traces: &mut Traces,
    ) -> Result<f64, LearnerError> {
        if exp.action >= self.n_actions {
            return Err(LearnerError::InvalidAction(exp.action));
        }
        let v = self.value(exp.obs)?;
        let v_next = if exp.done { 0.0 } else { self.value(exp.next_obs)? };
        let delta = exp.reward + gamma * v_next - v;
        if !delta.is_finite() {
            return Err(LearnerError::NonFinite {
                what: "TD error",
                value: delta,
            });
        }
        let pi = self.forward(exp.obs)?;
        let entropy: f64 = -pi.iter().map(|&p| p * p.ln()).sum::<f64>();
        let a = self.n_actions;
        let lr = lr.per_feature(exp.obs);
        let decay = gamma * lambda;
        for &i in &traces.touched {
            let i = i as usize;
            traces.critic[i] *= decay;
            for z in &mut traces.actor[i * a..(i + 1) * a] {
                *z *= decay;
            }
        }
        for &i in exp.obs.active() {
            let iu = i as usize;
            if !traces.seen[iu] {
                traces.seen[iu] = true;
                traces.touched.push(i);
            }
            traces.critic[iu] += 1.0;
            for (b, z) in traces.actor[iu * a..(iu + 1) * a].iter_mut().enumerate() {
                *z += if b == exp.action { 1.0 } else { 0.0 } - pi[b];
            }
        }
        for &i in &traces.touched {
            let i = i as usize;
            self.critic[i] += lr.critic * delta * traces.critic[i];
            for (w, z) in self.actor[i * a..(i + 1) * a].iter_mut().zip(&traces.actor[i * a..(i + 1) * a]) {
                *w += lr.actor * delta * z;
            }
        }
        let ent_grad: Vec<f64> = pi.iter().map(|&p| -lr.actor * entropy_coef * p * (p.ln() + entropy)).collect();
        for &i in exp.obs.active() {
            let i = i as usize;
            for (w, g) in self.actor[i * a..(i + 1) * a].iter_mut().zip(&ent_grad) {
                *w += g;
            }
        }
        if exp.done {
            traces.clear();
        }
        Ok(delta)
    }
}

/// Inverse-CDF draw from a distribution.
pub fn sample_categorical<R: Rng + ?Sized>(p: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        acc += pi;
        if u < acc {
            return i;
        }
    }
    p.len() - 1
}
