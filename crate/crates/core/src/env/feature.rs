use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{EnvError, EventId, Pos, State};

/// Which projection of the state defines novelty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Position,
    Message,
    FullState,
}

impl FeatureKind {
    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Position => "position",
            FeatureKind::Message => "message",
            FeatureKind::FullState => "full_state",
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureKind {
    type Err = EnvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "position" | "pos" | "p" => Ok(FeatureKind::Position),
            "message" | "msg" | "m" => Ok(FeatureKind::Message),
            "full_state" | "full" | "fullstate" | "f" => Ok(FeatureKind::FullState),
            other => Err(EnvError::InvalidKind(format!("unknown feature kind `{other}`"))),
        }
    }
}

/// Canonical encoding of every `State` field except the step counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FullKey {
    pub pos: Pos,
    pub has_key: bool,
    pub open_doors: u32,
    pub last_event: EventId,
}

impl From<&State> for FullKey {
    fn from(s: &State) -> Self {
        FullKey {
            pos: s.pos,
            has_key: s.has_key,
            open_doors: s.open_doors,
            last_event: s.last_event,
        }
    }
}

/// A point of the novelty space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureKey {
    Pos(Pos),
    Msg(EventId),
    Full(FullKey),
}

pub fn extract_feature(psi: FeatureKind, state: &State) -> FeatureKey {
    match psi {
        FeatureKind::Position => FeatureKey::Pos(state.pos),
        FeatureKind::Message => FeatureKey::Msg(state.last_event),
        FeatureKind::FullState => FeatureKey::Full(FullKey::from(state)),
    }
}

/// Text form used in CSV exports: `x;y`, `event_name`, or
/// `x;y;has_key;open_doors;event_name`.
impl fmt::Display for FeatureKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureKey::Pos(p) => write!(f, "{};{}", p.x, p.y),
            FeatureKey::Msg(e) => f.write_str(e.name()),
            FeatureKey::Full(k) => write!(
                f,
                "{};{};{};{};{}",
                k.pos.x,
                k.pos.y,
                u8::from(k.has_key),
                k.open_doors,
                k.last_event.name()
            ),
        }
    }
}

impl FromStr for FeatureKey {
    type Err = EnvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || EnvError::BadLayout(format!("bad feature key `{s}`"));
        let parts: Vec<&str> = s.trim().split(';').collect();
        let int = |t: &str| t.parse::<i32>().map_err(|_| bad());
        match parts.as_slice() {
            [e] => EventId::from_name(e).map(FeatureKey::Msg).ok_or_else(bad),
            [x, y] => Ok(FeatureKey::Pos(Pos::new(int(x)?, int(y)?))),
            [x, y, k, d, e] => Ok(FeatureKey::Full(FullKey {
                pos: Pos::new(int(x)?, int(y)?),
                has_key: match *k {
                    "0" => false,
                    "1" => true,
                    _ => return Err(bad()),
                },
                open_doors: d.parse().map_err(|_| bad())?,
                last_event: EventId::from_name(e).ok_or_else(bad)?,
            })),
            _ => Err(bad()),
        }
    }
}
