//! Closed-form bonus expressions, free of any state.

use super::Combiner;

/// `1 / sqrt(n)`; callers record the visit first, so `n >= 1`.
pub fn inverse_sqrt_count(n: u64) -> f64 {
    debug_assert!(n >= 1);
    1.0 / (n as f64).sqrt()
}

/// `1[n_e = 1]`.
pub fn first_visit_indicator(n_e: u64) -> f64 {
    if n_e == 1 {
        1.0
    } else {
        0.0
    }
}

/// `1[n_e = 1] / sqrt(n)`.
pub fn combined_count_bonus(n_e: u64, n: u64) -> f64 {
    first_visit_indicator(n_e) * inverse_sqrt_count(n)
}

/// `[b_next - c b_cur]_+`.
pub fn noveld_diff(b_next: f64, b_cur: f64, c: f64) -> f64 {
    (b_next - c * b_cur).max(0.0)
}

/// `[b_next - c b_cur]_+ 1[n_e = 1]`.
pub fn noveld(b_next: f64, b_cur: f64, c: f64, n_e: u64) -> f64 {
    noveld_diff(b_next, b_cur, c) * first_visit_indicator(n_e)
}

/// `KL + beta / sqrt(n_e)`.
pub fn agac(kl: f64, n_e: u64, beta: f64) -> f64 {
    kl + beta * inverse_sqrt_count(n_e)
}

/// `||phi(s') - phi(s)|| / sqrt(n_e)`.
pub fn ride(displacement: f64, n_e: u64) -> f64 {
    displacement * inverse_sqrt_count(n_e)
}

pub fn combine(episodic: f64, global: f64, combiner: Combiner) -> f64 {
    match combiner {
        Combiner::EpisodicOnly => episodic,
        Combiner::GlobalOnly => global,
        Combiner::Multiply => episodic * global,
        Combiner::AddWeighted { beta } => episodic + beta * global,
    }
}

/// `r + alpha b`.
pub fn shaped_reward(r: f64, b: f64, alpha: f64) -> f64 {
    r + alpha * b
}
