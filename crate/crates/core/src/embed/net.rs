use rand::Rng;

use super::{EmbedError, Input};

/// Default hidden width.
pub const HIDDEN: usize = 32;

/// `x -> tanh(W1 x + b1) -> W2 h + b2`.
#[derive(Debug, Clone, PartialEq)]
pub struct TinyNet {
    in_dim: usize,
    hidden: usize,
    out_dim: usize,
    /// Input-major: row `i` holds the `hidden` weights fed by input `i`.
    w1: Vec<f64>,
    b1: Vec<f64>,
    /// Output-major: row `o` holds the `hidden` weights into output `o`.
    w2: Vec<f64>,
    b2: Vec<f64>,
    trainable: bool,
}

/// Parameter gradient, laid out like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetGrad {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl TinyNet {
    /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases.
    pub fn new<R: Rng + ?Sized>(
        in_dim: usize,
        hidden: usize,
        out_dim: usize,
        trainable: bool,
        rng: &mut R,
    ) -> Self {
        let mut uniform = |n: usize, fan_in: usize| -> Vec<f64> {
            let a = 1.0 / (fan_in as f64).sqrt();
            (0..n).map(|_| rng.random_range(-a..a)).collect()
        };
        let w1 = uniform(in_dim * hidden, in_dim);
        let b1 = uniform(hidden, in_dim);
        let w2 = uniform(hidden * out_dim, hidden);
        let b2 = uniform(out_dim, hidden);
        TinyNet {
            in_dim,
            hidden,
            out_dim,
            w1,
            b1,
            w2,
            b2,
            trainable,
        }
    }

    pub fn zeros(in_dim: usize, hidden: usize, out_dim: usize, trainable: bool) -> Self {
        TinyNet {
            in_dim,
            hidden,
            out_dim,
            w1: vec![0.0; in_dim * hidden],
            b1: vec![0.0; hidden],
            w2: vec![0.0; hidden * out_dim],
            b2: vec![0.0; out_dim],
            trainable,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn is_trainable(&self) -> bool {
        self.trainable
    }

    /// Same weights with a different trainable flag.
    pub fn with_trainable(mut self, trainable: bool) -> Self {
        self.trainable = trainable;
        self
    }

    pub fn n_params(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    /// All parameters flattened in the order `w1, b1, w2, b2`.
    pub fn params(&self) -> Vec<f64> {
        [&self.w1[..], &self.b1, &self.w2, &self.b2].concat()
    }

    pub fn set_param(&mut self, idx: usize, value: f64) {
        let mut i = idx;
        for block in [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2] {
            if i < block.len() {
                block[i] = value;
                return;
            }
            i -= block.len();
        }
        panic!("parameter index {idx} out of range");
    }

    fn hidden_act(&self, x: Input<'_>) -> Vec<f64> {
        let mut h = self.b1.clone();
        let hd = self.hidden;
        x.for_each(|i, v| {
            let row = &self.w1[i * hd..(i + 1) * hd];
            for (hj, w) in h.iter_mut().zip(row) {
                *hj += w * v;
            }
        });
        for hj in &mut h {
            *hj = hj.tanh();
        }
        h
    }

    fn output(&self, h: &[f64]) -> Vec<f64> {
        self.b2
            .iter()
            .zip(self.w2.chunks_exact(self.hidden))
            .map(|(b, row)| b + row.iter().zip(h).map(|(w, x)| w * x).sum::<f64>())
            .collect()
    }

    pub fn forward<'a>(&self, x: impl Into<Input<'a>>) -> Result<Vec<f64>, EmbedError> {
        let x = x.into();
        x.check(self.in_dim)?;
        Ok(self.output(&self.hidden_act(x)))
    }

    /// Loss `||f(x) - target||^2` and its parameter gradient.
    pub fn loss_grad<'a>(
        &self,
        target: &[f64],
        x: impl Into<Input<'a>>,
    ) -> Result<(f64, NetGrad), EmbedError> {
        let x = x.into();
        x.check(self.in_dim)?;
        if target.len() != self.out_dim {
            return Err(EmbedError::DimensionMismatch {
                expected: self.out_dim,
                got: target.len(),
            });
        }
        let h = self.hidden_act(x);
        let y = self.output(&h);
        let dy: Vec<f64> = y.iter().zip(target).map(|(a, b)| 2.0 * (a - b)).collect();
        let loss = y.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum();
        let hd = self.hidden;
        let mut w2 = vec![0.0; self.w2.len()];
        let mut dh = vec![0.0; hd];
        for (o, &g) in dy.iter().enumerate() {
            let row = &self.w2[o * hd..(o + 1) * hd];
            for j in 0..hd {
                w2[o * hd + j] = g * h[j];
                dh[j] += g * row[j];
            }
        }
        let dpre: Vec<f64> = dh.iter().zip(&h).map(|(g, a)| g * (1.0 - a * a)).collect();
        let mut w1 = vec![0.0; self.w1.len()];
        x.for_each(|i, v| {
            for j in 0..hd {
                w1[i * hd + j] = dpre[j] * v;
            }
        });
        Ok((
            loss,
            NetGrad {
                w1,
                b1: dpre,
                w2,
                b2: dy,
            },
        ))
    }

    /// One SGD step on `||f(x) - target||^2`; returns the pre-step loss.
    pub fn sgd_step<'a>(
        &mut self,
        target: &[f64],
        x: impl Into<Input<'a>>,
        lr: f64,
    ) -> Result<f64, EmbedError> {
        if !self.trainable {
            return Err(EmbedError::Frozen);
        }
        let x = x.into();
        x.check(self.in_dim)?;
        // Recompute inline rather than through `loss_grad` so the sparse path
        // only touches the active input rows.
        let h = self.hidden_act(x);
        let y = self.output(&h);
        let loss: f64 = y.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum();
        if !loss.is_finite() {
            return Err(EmbedError::NonFinite { what: "predictor loss" });
        }
        if lr == 0.0 {
            return Ok(loss);
        }
        let hd = self.hidden;
        let mut dh = vec![0.0; hd];
        for (o, (yo, to)) in y.iter().zip(target).enumerate() {
            let g = 2.0 * (yo - to);
            let row = &mut self.w2[o * hd..(o + 1) * hd];
            for j in 0..hd {
                dh[j] += g * row[j];
                row[j] -= lr * g * h[j];
            }
            self.b2[o] -= lr * g;
        }
        let dpre: Vec<f64> = dh.iter().zip(&h).map(|(g, a)| g * (1.0 - a * a)).collect();
        x.for_each(|i, v| {
            let row = &mut self.w1[i * hd..(i + 1) * hd];
            for (w, g) in row.iter_mut().zip(&dpre) {
                *w -= lr * g * v;
            }
        });
        for (b, g) in self.b1.iter_mut().zip(&dpre) {
            *b -= lr * g;
        }
        Ok(loss)
    }
}

impl NetGrad {
    pub fn flatten(&self) -> Vec<f64> {
        [&self.w1[..], &self.b1, &self.w2, &self.b2].concat()
    }
}
