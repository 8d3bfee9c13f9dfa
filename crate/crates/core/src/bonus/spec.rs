use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::BonusError;
use crate::env::FeatureKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpisodicKind {
    None,
    /// `1[N_e(z) = 1]`.
    FirstVisitIndicator,
    /// `1 / sqrt(N_e(z))`.
    InverseSqrtEpisodicCount,
    /// `phi^T C^-1 phi` over the episode so far.
    Elliptical,
    /// `||phi(s') - phi(s)|| / sqrt(N_e(z'))`.
    Ride,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlobalKind {
    None,
    /// `1 / sqrt(N(z))`.
    InverseSqrtCount,
    /// Squared prediction error against a fixed random network.
    Rnd,
    /// `[rnd(s') - c rnd(s)]_+`, without the episodic gate.
    NovelDDiff,
    /// `KL(pi || pi_adv)` at the next state.
    AdversaryKl,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Combiner {
    EpisodicOnly,
    GlobalOnly,
    Multiply,
    AddWeighted { beta: f64 },
}

/// Where the embedding `phi` for elliptical and RIDE bonuses comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingSource {
    /// Linear map trained online by inverse dynamics.
    Learned,
    /// A frozen randomly initialized two-layer network.
    FixedRandom,
}

/// Full description of an intrinsic bonus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BonusSpec {
    pub episodic: EpisodicKind,
    pub global: GlobalKind,
    pub combiner: Combiner,
    #[serde(default = "defaults::alpha")]
    pub alpha: f64,
    #[serde(default = "defaults::noveld_c")]
    pub noveld_c: f64,
    #[serde(default = "defaults::ridge_lambda")]
    pub ridge_lambda: f64,
    #[serde(default = "defaults::yes")]
    pub normalize: bool,
    /// Normalize each factor separately instead of the combined value.
    #[serde(default)]
    pub per_factor_normalize: bool,
    #[serde(default = "defaults::psi")]
    pub psi: FeatureKind,
    #[serde(default = "defaults::embedding")]
    pub embedding: EmbeddingSource,
    #[serde(default = "defaults::embed_dim")]
    pub embed_dim: usize,
    #[serde(default = "defaults::predictor_lr")]
    pub predictor_lr: f64,
    #[serde(default = "defaults::embedding_lr")]
    pub embedding_lr: f64,
    /// Keep training the learned embedding during the run.
    #[serde(default = "defaults::yes")]
    pub update_embedding: bool,
    /// Adversary step size as a multiple of the policy's.
    #[serde(default = "defaults::adversary_lr_ratio")]
    pub adversary_lr_ratio: f64,
}

mod defaults {
    use crate::bonus::EmbeddingSource;
    use crate::env::FeatureKind;

    pub fn alpha() -> f64 {
        1.0
    }
    pub fn noveld_c() -> f64 {
        0.1
    }
    pub fn ridge_lambda() -> f64 {
        0.1
    }
    pub fn yes() -> bool {
        true
    }
    pub fn psi() -> FeatureKind {
        FeatureKind::Position
    }
    pub fn embedding() -> EmbeddingSource {
        EmbeddingSource::Learned
    }
    pub fn embed_dim() -> usize {
        16
    }
    pub fn predictor_lr() -> f64 {
        1e-2
    }
    pub fn embedding_lr() -> f64 {
        1e-2
    }
    pub fn adversary_lr_ratio() -> f64 {
        0.3
    }
}

impl BonusSpec {
    /// Spec with every tunable at its default.
    pub fn new(episodic: EpisodicKind, global: GlobalKind, combiner: Combiner) -> Self {
        BonusSpec {
            episodic,
            global,
            combiner,
            alpha: defaults::alpha(),
            noveld_c: defaults::noveld_c(),
            ridge_lambda: defaults::ridge_lambda(),
            normalize: true,
            per_factor_normalize: false,
            psi: defaults::psi(),
            embedding: defaults::embedding(),
            embed_dim: defaults::embed_dim(),
            predictor_lr: defaults::predictor_lr(),
            embedding_lr: defaults::embedding_lr(),
            update_embedding: true,
            adversary_lr_ratio: defaults::adversary_lr_ratio(),
        }
    }

    pub fn preset(p: Preset) -> Self {
        use EpisodicKind as E;
        use GlobalKind as G;
        let (e, g, c) = match p {
            Preset::Global => (E::None, G::InverseSqrtCount, Combiner::GlobalOnly),
            Preset::Episodic => (E::FirstVisitIndicator, G::None, Combiner::EpisodicOnly),
            Preset::Combined => (E::FirstVisitIndicator, G::InverseSqrtCount, Combiner::Multiply),
            Preset::Rnd => (E::None, G::Rnd, Combiner::GlobalOnly),
            Preset::NovelD => (E::FirstVisitIndicator, G::NovelDDiff, Combiner::Multiply),
            Preset::Agac => (
                E::InverseSqrtEpisodicCount,
                G::AdversaryKl,
                Combiner::AddWeighted { beta: 1.0 },
            ),
            Preset::Ride => (E::Ride, G::None, Combiner::EpisodicOnly),
            Preset::E3b => (E::Elliptical, G::None, Combiner::EpisodicOnly),
        };
        BonusSpec::new(e, g, c)
    }

    pub fn with_psi(mut self, psi: FeatureKind) -> Self {
        self.psi = psi;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn uses_episodic(&self) -> bool {
        !matches!(self.combiner, Combiner::GlobalOnly)
    }

    pub fn uses_global(&self) -> bool {
        !matches!(self.combiner, Combiner::EpisodicOnly)
    }

    pub fn validate(&self) -> Result<(), BonusError> {
        let bad = |why: String| Err(BonusError::InvalidSpec(why));
        if self.uses_episodic() && self.episodic == EpisodicKind::None {
            return bad(format!("{:?} needs an episodic kind", self.combiner));
        }
        if self.uses_global() && self.global == GlobalKind::None {
            return bad(format!("{:?} needs a global kind", self.combiner));
        }
        if let Combiner::AddWeighted { beta } = self.combiner {
            if !(beta.is_finite() && beta >= 0.0) {
                return bad(format!("beta must be finite and non-negative, got {beta}"));
            }
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return bad(format!("alpha must be non-negative, got {}", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.noveld_c) {
            return bad(format!("noveld_c must lie in [0, 1], got {}", self.noveld_c));
        }
        if !(self.ridge_lambda.is_finite() && self.ridge_lambda > 0.0) {
            return bad(format!("ridge_lambda must be positive, got {}", self.ridge_lambda));
        }
        if self.embed_dim == 0 {
            return bad("embed_dim must be positive".into());
        }
        for (name, v) in [
            ("predictor_lr", self.predictor_lr),
            ("embedding_lr", self.embedding_lr),
            ("adversary_lr_ratio", self.adversary_lr_ratio),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        Ok(())
    }

    /// Short label such as `elliptical*rnd` used in reports.
    pub fn label(&self) -> String {
        let e = match self.episodic {
            EpisodicKind::None => "",
            EpisodicKind::FirstVisitIndicator => "first_visit",
            EpisodicKind::InverseSqrtEpisodicCount => "inv_sqrt_ep",
            EpisodicKind::Elliptical => "elliptical",
            EpisodicKind::Ride => "ride",
        };
        let g = match self.global {
            GlobalKind::None => "",
            GlobalKind::InverseSqrtCount => "inv_sqrt",
            GlobalKind::Rnd => "rnd",
            GlobalKind::NovelDDiff => "noveld_diff",
            GlobalKind::AdversaryKl => "adversary_kl",
        };
        match self.combiner {
            Combiner::EpisodicOnly => e.to_string(),
            Combiner::GlobalOnly => g.to_string(),
            Combiner::Multiply => format!("{e}*{g}"),
            Combiner::AddWeighted { beta } => format!("{e}+{beta}*{g}"),
        }
    }
}

/// Named bonus configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Global,
    Episodic,
    Combined,
    Rnd,
    NovelD,
    Agac,
    Ride,
    E3b,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::Global,
        Preset::Episodic,
        Preset::Combined,
        Preset::Rnd,
        Preset::NovelD,
        Preset::Agac,
        Preset::Ride,
        Preset::E3b,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Global => "global",
            Preset::Episodic => "episodic",
            Preset::Combined => "combined",
            Preset::Rnd => "rnd",
            Preset::NovelD => "noveld",
            Preset::Agac => "agac",
            Preset::Ride => "ride",
            Preset::E3b => "e3b",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = BonusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| BonusError::InvalidSpec(format!("unknown preset `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for p in Preset::ALL {
            BonusSpec::preset(p).validate().unwrap();
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
    }

    #[test]
    fn validation_rejects_inconsistent_specs() {
        let mut s = BonusSpec::new(EpisodicKind::None, GlobalKind::Rnd, Combiner::Multiply);
        assert!(s.validate().is_err());
        s.episodic = EpisodicKind::Elliptical;
        s.validate().unwrap();
        s.noveld_c = 1.5;
        assert!(s.validate().is_err());
        s.noveld_c = 0.1;
        s.ridge_lambda = 0.0;
        assert!(s.validate().is_err());
        s.ridge_lambda = 0.1;
        s.alpha = -1.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn json_defaults_and_unknown_keys() {
        let s: BonusSpec = serde_json::from_str(
            r#"{"episodic":"elliptical","global":"rnd","combiner":{"add_weighted":{"beta":10.0}}}"#,
        )
        .unwrap();
        assert_eq!(s.ridge_lambda, 0.1);
        assert_eq!(s.noveld_c, 0.1);
        assert_eq!(s.alpha, 1.0);
        assert!(s.normalize);
        assert_eq!(s.label(), "elliptical+10*rnd");
        let bad = serde_json::from_str::<BonusSpec>(
            r#"{"episodic":"none","global":"rnd","combiner":"global_only","colour":1}"#,
        );
        assert!(bad.is_err());
    }
}
