/// Floor applied to `q` entries inside [`kl_categorical`].
pub const KL_FLOOR: f64 = 1e-12;

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = logits.iter().map(|&z| (z - m).exp()).collect();
    let s: f64 = p.iter().sum();
    for x in &mut p {
        *x /= s;
    }
    p
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlDivergence {
    pub value: f64,
    /// Some `q` entry was below the floor where `p` was positive.
    pub clamped: bool,
}

/// `sum p log(p / q)`, with `q` floored at [`KL_FLOOR`]. Terms with `p = 0`
/// contribute nothing.
pub fn kl_categorical(p: &[f64], q: &[f64]) -> KlDivergence {
    debug_assert_eq!(p.len(), q.len());
    let mut clamped = false;
    let mut value = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi <= 0.0 {
            continue;
        }
        let qi = if qi < KL_FLOOR {
            clamped = true;
            KL_FLOOR
        } else {
            qi
        };
        value += pi * (pi / qi).ln();
    }
    // Rounding can leave a tiny negative for p ~= q.
    KlDivergence {
        value: value.max(0.0),
        clamped,
    }
}

/// Welford accumulator for a population standard deviation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStd {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStd {
    pub fn new() -> Self {
        RunningStd::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
        if self.m2 < 0.0 {
            self.m2 = 0.0;
        }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `sqrt(m2 / n)`; zero before the first sample.
    pub fn std(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.m2 / self.n as f64).sqrt()
        }
    }

    /// Record `b` and return it divided by the running std, or unchanged
    /// while fewer than two samples exist or the std is below `1e-8`.
    pub fn normalize(&mut self, b: f64) -> f64 {
        self.push(b);
        let s = self.std();
        if self.n < 2 || s < 1e-8 {
            b
        } else {
            b / s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_pass(xs: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n).sqrt()
    }

    #[test]
    fn constant_stream_has_zero_std() {
        let mut rs = RunningStd::new();
        for _ in 0..3 {
            rs.push(2.0);
        }
        assert_eq!(rs.std(), 0.0);
    }

    #[test]
    fn population_std_of_one_to_four() {
        let mut rs = RunningStd::new();
        for x in [1.0, 2.0, 3.0, 4.0] {
            rs.push(x);
        }
        assert!((rs.std() - 1.25f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn order_independent_and_matches_two_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut xs: Vec<f64> = (0..100).map(|_| rng.random_range(-5.0..5.0)).collect();
        let reference = two_pass(&xs);
        for _ in 0..20 {
            xs.shuffle(&mut rng);
            let mut rs = RunningStd::new();
            xs.iter().for_each(|&x| rs.push(x));
            assert!((rs.std() - reference).abs() <= 1e-12);
        }
        let long: Vec<f64> = (0..100_000).map(|_| rng.random_range(0.0..3.0)).collect();
        let mut rs = RunningStd::new();
        long.iter().for_each(|&x| rs.push(x));
        assert!((rs.std() - two_pass(&long)).abs() <= 1e-10);
    }

    #[test]
    fn normalization_guards_and_ratio() {
        let mut rs = RunningStd::new();
        // Constant streams keep sigma at zero, so values pass through.
        for _ in 0..10 {
            assert_eq!(rs.normalize(5.0), 5.0);
        }
        // Alternating 0, 2 has population sigma 1 once balanced.
        let mut rs = RunningStd::new();
        let mut last = (0.0, 0.0);
        for i in 0..2000 {
            let x = if i % 2 == 0 { 0.0 } else { 2.0 };
            let y = rs.normalize(x);
            last = if i % 2 == 0 { (y, last.1) } else { (last.0, y) };
        }
        assert_eq!(last.0, 0.0);
        assert!((last.1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn kl_basics() {
        let p = [0.2, 0.3, 0.5];
        assert_eq!(kl_categorical(&p, &p).value, 0.0);
        let k = kl_categorical(&[1.0, 0.0], &[0.5, 0.5]);
        assert!((k.value - 2f64.ln()).abs() < 1e-12 && !k.clamped);
        let z = kl_categorical(&[0.5, 0.5], &[1.0, 0.0]);
        assert!(z.clamped && z.value > 10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let a = softmax(&[rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), 0.0]);
            let b = softmax(&[rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), 0.0]);
            assert!(kl_categorical(&a, &b).value >= 0.0);
        }
    }

    #[test]
    fn softmax_is_shift_invariant() {
        let a = softmax(&[1.0, 2.0, 3.0]);
        let b = softmax(&[101.0, 102.0, 103.0]);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
