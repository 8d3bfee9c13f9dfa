use rand::Rng;

use super::{softmax, EmbedError, Input};

/// Linear embedding `phi(x) = W x` plus an inverse-dynamics head that
/// predicts the action from `[phi(s), phi(s')]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    in_dim: usize,
    k: usize,
    n_actions: usize,
    /// Input-major `in_dim x k`.
    w: Vec<f64>,
    /// Action-major `n_actions x 2k`.
    u: Vec<f64>,
    c: Vec<f64>,
}

impl EmbeddingModel {
    pub fn new<R: Rng + ?Sized>(in_dim: usize, k: usize, n_actions: usize, rng: &mut R) -> Self {
        let a = 1.0 / (in_dim as f64).sqrt();
        let w = (0..in_dim * k).map(|_| rng.random_range(-a..a)).collect();
        let b = 1.0 / ((2 * k) as f64).sqrt();
        let u = (0..n_actions * 2 * k).map(|_| rng.random_range(-b..b)).collect();
        EmbeddingModel {
            in_dim,
            k,
            n_actions,
            w,
            u,
            c: vec![0.0; n_actions],
        }
    }

    /// Identity embedding of a `k`-dimensional input; handy for toys.
    pub fn identity(k: usize, n_actions: usize) -> Self {
        let mut w = vec![0.0; k * k];
        for i in 0..k {
            w[i * k + i] = 1.0;
        }
        EmbeddingModel {
            in_dim: k,
            k,
            n_actions,
            w,
            u: vec![0.0; n_actions * 2 * k],
            c: vec![0.0; n_actions],
        }
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn embed<'a>(&self, x: impl Into<Input<'a>>) -> Result<Vec<f64>, EmbedError> {
        let x = x.into();
        x.check(self.in_dim)?;
        let mut phi = vec![0.0; self.k];
        let k = self.k;
        x.for_each(|i, v| {
            for (p, w) in phi.iter_mut().zip(&self.w[i * k..(i + 1) * k]) {
                *p += w * v;
            }
        });
        Ok(phi)
    }

    fn logits(&self, phi: &[f64], phi2: &[f64]) -> Vec<f64> {
        let k2 = 2 * self.k;
        (0..self.n_actions)
            .map(|a| {
                let row = &self.u[a * k2..(a + 1) * k2];
                self.c[a]
                    + row[..self.k].iter().zip(phi).map(|(w, x)| w * x).sum::<f64>()
                    + row[self.k..].iter().zip(phi2).map(|(w, x)| w * x).sum::<f64>()
            })
            .collect()
    }

    /// Predicted action distribution for the transition `s -> s'`.
    pub fn predict<'a>(
        &self,
        s: impl Into<Input<'a>>,
        s2: impl Into<Input<'a>>,
    ) -> Result<Vec<f64>, EmbedError> {
        let phi = self.embed(s)?;
        let phi2 = self.embed(s2)?;
        Ok(softmax(&self.logits(&phi, &phi2)))
    }

    /// Cross-entropy of predicting `action` from the pair.
    pub fn loss<'a>(
        &self,
        s: impl Into<Input<'a>>,
        s2: impl Into<Input<'a>>,
        action: usize,
    ) -> Result<f64, EmbedError> {
        self.check_action(action)?;
        let p = self.predict(s, s2)?;
        Ok(-p[action].max(f64::MIN_POSITIVE).ln())
    }

    fn check_action(&self, action: usize) -> Result<(), EmbedError> {
        if action < self.n_actions {
            Ok(())
        } else {
            Err(EmbedError::InvalidAction {
                action,
                n_actions: self.n_actions,
            })
        }
    }

    /// One cross-entropy SGD step; returns the pre-step loss.
    pub fn train_step<'a>(
        &mut self,
        s: impl Into<Input<'a>>,
        s2: impl Into<Input<'a>>,
        action: usize,
        lr: f64,
    ) -> Result<f64, EmbedError> {
        self.check_action(action)?;
        let (s, s2) = (s.into(), s2.into());
        let phi = self.embed(s)?;
        let phi2 = self.embed(s2)?;
        let p = softmax(&self.logits(&phi, &phi2));
        let loss = -p[action].max(f64::MIN_POSITIVE).ln();
        if !loss.is_finite() {
            return Err(EmbedError::NonFinite { what: "inverse dynamics loss" });
        }
        if lr == 0.0 {
            return Ok(loss);
        }
        let k = self.k;
        let k2 = 2 * k;
        let mut g = p;
        g[action] -= 1.0;
        // dL/dz = U^T g, split into the two embedding halves.
        let mut dz = vec![0.0; k2];
        for (a, &ga) in g.iter().enumerate() {
            let row = &mut self.u[a * k2..(a + 1) * k2];
            for j in 0..k2 {
                dz[j] += ga * row[j];
                let z = if j < k { phi[j] } else { phi2[j - k] };
                row[j] -= lr * ga * z;
            }
            self.c[a] -= lr * ga;
        }
        for (x, d) in [(s, &dz[..k]), (s2, &dz[k..])] {
            x.for_each(|i, v| {
                for (w, gj) in self.w[i * k..(i + 1) * k].iter_mut().zip(d) {
                    *w -= lr * gj * v;
                }
            });
        }
        Ok(loss)
    }

    fn params(&self) -> Vec<f64> {
        [&self.w[..], &self.u, &self.c].concat()
    }

    #[cfg(test)]
    fn set_param(&mut self, idx: usize, value: f64) {
        let mut i = idx;
        for block in [&mut self.w, &mut self.u, &mut self.c] {
            if i < block.len() {
                block[i] = value;
                return;
            }
            i -= block.len();
        }
        panic!("parameter index {idx} out of range");
    }

    /// Total parameter count.
    pub fn n_params(&self) -> usize {
        self.params().len()
    }
}
