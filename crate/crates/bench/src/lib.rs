//! Fixtures shared by the benchmarks in `benches/`.

use rand::Rng;

use cmdp_core::env::{
    extract_feature, generate_context, observe, reset, step, ContextInstance, EnvKind, FeatureKey, FeatureKind,
    ObsConfig, ObservationVector,
};
use cmdp_core::rng::{stream, Stream};

/// One recorded transition, ready to feed a bonus engine.
pub struct Recorded {
    pub obs: ObservationVector,
    pub next_obs: ObservationVector,
    pub next_key: FeatureKey,
    pub action: usize,
}

pub fn context(kind: &str, seed: u64) -> ContextInstance {
    let kind: EnvKind = kind.parse().expect("bench env kind");
    generate_context(&kind, seed).expect("bench context")
}

/// `n` uniformly random transitions, resetting at episode ends.
pub fn random_transitions(ctx: &ContextInstance, obs: &ObsConfig, psi: FeatureKind, n: usize) -> Vec<Recorded> {
    let mut rng = stream(0, Stream::PolicySampling);
    let mut s = reset(ctx);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let action = rng.random_range(0..ctx.n_actions());
        let tr = step(ctx, &s, action).expect("valid action");
        out.push(Recorded {
            obs: observe(ctx, &s, obs),
            next_obs: observe(ctx, &tr.next_state, obs),
            next_key: extract_feature(psi, &tr.next_state),
            action,
        });
        s = if tr.done { reset(ctx) } else { tr.next_state };
    }
    out
}
