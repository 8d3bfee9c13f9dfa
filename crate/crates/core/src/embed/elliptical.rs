use super::EmbedError;

const RESYMMETRIZE_EVERY: u64 = 1000;

/// Inverse of `lambda * I + sum phi phi^T` over the current episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticalState {
    k: usize,
    lambda: f64,
    cinv: Vec<f64>,
    /// The accumulated matrix itself, kept for from-scratch recovery.
    acc: Vec<f64>,
    updates: u64,
    recoveries: u64,
}

impl EllipticalState {
    pub fn new(k: usize, lambda: f64) -> Self {
        assert!(lambda > 0.0, "ridge must be positive");
        let mut s = EllipticalState {
            k,
            lambda,
            cinv: vec![0.0; k * k],
            acc: vec![0.0; k * k],
            updates: 0,
            recoveries: 0,
        };
        s.reset();
        s
    }

    /// Back to `(lambda I)^-1`.
    pub fn reset(&mut self) {
        self.cinv.fill(0.0);
        self.acc.fill(0.0);
        for i in 0..self.k {
            self.cinv[i * self.k + i] = 1.0 / self.lambda;
            self.acc[i * self.k + i] = self.lambda;
        }
        self.updates = 0;
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Row-major `k x k` inverse.
    pub fn cinv(&self) -> &[f64] {
        &self.cinv
    }

    /// Number of times the inverse had to be rebuilt from the accumulator.
    pub fn recoveries(&self) -> u64 {
        self.recoveries
    }

    fn mat_vec(&self, phi: &[f64]) -> Vec<f64> {
        self.cinv
            .chunks_exact(self.k)
            .map(|row| row.iter().zip(phi).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `phi^T Cinv phi`.
    pub fn quad(&self, phi: &[f64]) -> Result<f64, EmbedError> {
        self.check(phi)?;
        Ok(self.mat_vec(phi).iter().zip(phi).map(|(a, b)| a * b).sum())
    }

    fn check(&self, phi: &[f64]) -> Result<(), EmbedError> {
        if phi.len() != self.k {
            return Err(EmbedError::DimensionMismatch {
                expected: self.k,
                got: phi.len(),
            });
        }
        if phi.iter().any(|v| !v.is_finite()) {
            return Err(EmbedError::NonFinite { what: "embedding" });
        }
        Ok(())
    }

    /// Rank-one Sherman–Morrison update with `phi`.
    pub fn update(&mut self, phi: &[f64]) -> Result<(), EmbedError> {
        self.check(phi)?;
        let k = self.k;
        for i in 0..k {
            for j in 0..k {
                self.acc[i * k + j] += phi[i] * phi[j];
            }
        }
        let u = self.mat_vec(phi);
        let denom = 1.0 + u.iter().zip(phi).map(|(a, b)| a * b).sum::<f64>();
        if denom <= 0.0 || !denom.is_finite() {
            self.recover()?;
        } else {
            for (row, &ui) in self.cinv.chunks_exact_mut(k).zip(&u) {
                let ui = ui / denom;
                for (c, &uj) in row.iter_mut().zip(&u) {
                    *c -= ui * uj;
                }
            }
        }
        self.updates += 1;
        if self.updates.is_multiple_of(RESYMMETRIZE_EVERY) {
            self.symmetrize();
        }
        Ok(())
    }

    fn symmetrize(&mut self) {
        let k = self.k;
        for i in 0..k {
            for j in i + 1..k {
                let m = 0.5 * (self.cinv[i * k + j] + self.cinv[j * k + i]);
                self.cinv[i * k + j] = m;
                self.cinv[j * k + i] = m;
            }
        }
    }

    fn recover(&mut self) -> Result<(), EmbedError> {
        self.recoveries += 1;
        self.cinv = cholesky_inverse(&self.acc, self.k).ok_or(EmbedError::NonFinite {
            what: "covariance inverse",
        })?;
        self.symmetrize();
        Ok(())
    }

    /// Episodic bonus: the quadratic form before inserting `phi`, then insert.
    pub fn bonus_and_update(&mut self, phi: &[f64]) -> Result<f64, EmbedError> {
        let b = self.quad(phi)?;
        self.update(phi)?;
        Ok(b)
    }
}

/// Inverse of a symmetric positive-definite `k x k` matrix via Cholesky
/// factorization; `None` if the matrix is not numerically PD.
pub fn cholesky_inverse(a: &[f64], k: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let s: f64 = (0..j).map(|p| l[i * k + p] * l[j * k + p]).sum();
            if i == j {
                let d = a[i * k + i] - s;
                if d <= 0.0 || !d.is_finite() {
                    return None;
                }
                l[i * k + i] = d.sqrt();
            } else {
                l[i * k + j] = (a[i * k + j] - s) / l[j * k + j];
            }
        }
    }
    // Solve L L^T X = I column by column.
    let mut inv = vec![0.0; k * k];
    let mut y = vec![0.0; k];
    for c in 0..k {
        for i in 0..k {
            let rhs = if i == c { 1.0 } else { 0.0 };
            let s: f64 = (0..i).map(|p| l[i * k + p] * y[p]).sum();
            y[i] = (rhs - s) / l[i * k + i];
        }
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|p| l[p * k + i] * inv[p * k + c]).sum();
            inv[i * k + c] = (y[i] - s) / l[i * k + i];
        }
    }
    Some(inv)
}
