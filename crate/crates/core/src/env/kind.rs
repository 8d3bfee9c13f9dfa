use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EnvError;

/// Environment archetype and its size parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvVariant {
    /// A chain of rooms joined by closed doors; start in the first room, goal in the last.
    MultiRoom {
        n_rooms: u32,
        lava: bool,
        width: u32,
        height: u32,
    },
    /// Junction plus `m` dead-end chains of length `t`; only chain 0 is rewarded.
    Corridors { m: u32, t: u32 },
    /// A square room with a key and a locked goal room in one corner.
    KeyRoom { size: u32 },
}

/// Archetype plus per-episode step budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "EnvKindRepr", into = "EnvKindRepr")]
pub struct EnvKind {
    pub variant: EnvVariant,
    pub max_steps: u32,
}

/// JSON form: `{"variant": {...}, "max_steps": n}` or the text form parsed by
/// `FromStr`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EnvKindRepr {
    Fields(EnvKindFields),
    Text(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvKindFields {
    variant: EnvVariant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_steps: Option<u32>,
}

impl TryFrom<EnvKindRepr> for EnvKind {
    type Error = EnvError;

    fn try_from(repr: EnvKindRepr) -> Result<Self, Self::Error> {
        match repr {
            EnvKindRepr::Fields(f) => {
                let max_steps = f.max_steps.unwrap_or_else(|| default_max_steps(&f.variant));
                EnvKind::new(f.variant, max_steps)
            }
            EnvKindRepr::Text(s) => s.parse(),
        }
    }
}

impl From<EnvKind> for EnvKindRepr {
    fn from(kind: EnvKind) -> Self {
        EnvKindRepr::Fields(EnvKindFields {
            variant: kind.variant,
            max_steps: Some(kind.max_steps),
        })
    }
}

fn default_max_steps(variant: &EnvVariant) -> u32 {
    match *variant {
        EnvVariant::MultiRoom { .. } => 120,
        EnvVariant::Corridors { t, .. } => t,
        EnvVariant::KeyRoom { .. } => 80,
    }
}

impl EnvKind {
    pub fn new(variant: EnvVariant, max_steps: u32) -> Result<Self, EnvError> {
        let invalid = |why: &str| {
            Err(EnvError::InvalidKind(format!("{variant:?}: {why}")))
        };
        match variant {
            EnvVariant::MultiRoom {
                n_rooms,
                width,
                height,
                ..
            } => {
                if n_rooms < 2 {
                    return invalid("n_rooms must be at least 2");
                }
                if width < 5 || height < 5 {
                    return invalid("grid must be at least 5x5");
                }
                if width > 64 || height > 64 {
                    return invalid("grid must be at most 64x64");
                }
                if n_rooms > 31 {
                    return invalid("at most 31 rooms are supported");
                }
            }
            EnvVariant::Corridors { m, t } => {
                if m < 2 {
                    return invalid("m must be at least 2");
                }
                if t < 1 {
                    return invalid("t must be at least 1");
                }
            }
            EnvVariant::KeyRoom { size } => {
                if size < 5 {
                    return invalid("size must be at least 5");
                }
                if size > 62 {
                    return invalid("size must be at most 62");
                }
            }
        }
        if max_steps < 1 {
            return invalid("max_steps must be at least 1");
        }
        Ok(EnvKind { variant, max_steps })
    }

    /// Kind with the default step budget for its archetype.
    pub fn with_default_budget(variant: EnvVariant) -> Result<Self, EnvError> {
        EnvKind::new(variant, default_max_steps(&variant))
    }

    pub fn multi_room(n_rooms: u32, lava: bool, width: u32, height: u32) -> Result<Self, EnvError> {
        EnvKind::with_default_budget(EnvVariant::MultiRoom {
            n_rooms,
            lava,
            width,
            height,
        })
    }

    pub fn corridors(m: u32, t: u32) -> Result<Self, EnvError> {
        EnvKind::with_default_budget(EnvVariant::Corridors { m, t })
    }

    pub fn key_room(size: u32) -> Result<Self, EnvError> {
        EnvKind::with_default_budget(EnvVariant::KeyRoom { size })
    }

    pub fn is_grid(&self) -> bool {
        !matches!(self.variant, EnvVariant::Corridors { .. })
    }

    pub fn n_actions(&self) -> usize {
        match self.variant {
            EnvVariant::Corridors { m, .. } => m as usize,
            _ => 4,
        }
    }

    /// Bounding lattice `(W_max, H_max)` of positions across all contexts.
    pub fn lattice(&self) -> (u32, u32) {
        match self.variant {
            EnvVariant::MultiRoom { width, height, .. } => (width, height),
            EnvVariant::Corridors { m, t } => (m, t + 1),
            EnvVariant::KeyRoom { size } => (size + 2, size + 2),
        }
    }

    /// Short archetype name used in reports.
    pub fn archetype(&self) -> &'static str {
        match self.variant {
            EnvVariant::MultiRoom { .. } => "multiroom",
            EnvVariant::Corridors { .. } => "corridors",
            EnvVariant::KeyRoom { .. } => "keyroom",
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.variant {
            EnvVariant::MultiRoom {
                n_rooms,
                lava,
                width,
                height,
            } => write!(
                f,
                "multiroom:n_rooms={n_rooms},lava={lava},width={width},height={height},max_steps={}",
                self.max_steps
            ),
            EnvVariant::Corridors { m, t } => {
                write!(f, "corridors:m={m},t={t},max_steps={}", self.max_steps)
            }
            EnvVariant::KeyRoom { size } => {
                write!(f, "keyroom:size={size},max_steps={}", self.max_steps)
            }
        }
    }
}

/// Parses `name[:key=value,...]`, e.g. `multiroom:n_rooms=4,lava=true` or `corridors:m=8,t=12`.
/// Omitted parameters take archetype defaults.
impl FromStr for EnvKind {
    type Err = EnvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n.trim(), p.trim()),
            None => (s.trim(), ""),
        };
        let mut pairs = Vec::new();
        for item in params.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| EnvError::InvalidKind(format!("bad parameter `{item}` in `{s}`")))?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        let mut take = |key: &str| -> Option<String> {
            let idx = pairs.iter().position(|(k, _)| k == key)?;
            Some(pairs.remove(idx).1)
        };
        let num = |v: Option<String>, default: u32| -> Result<u32, EnvError> {
            match v {
                None => Ok(default),
                Some(v) => v
                    .parse()
                    .map_err(|_| EnvError::InvalidKind(format!("`{v}` is not a count"))),
            }
        };
        let variant = match name {
            "multiroom" => EnvVariant::MultiRoom {
                n_rooms: num(take("n_rooms"), 4)?,
                lava: match take("lava").as_deref() {
                    None | Some("true") => true,
                    Some("false") => false,
                    Some(v) => return Err(EnvError::InvalidKind(format!("`{v}` is not a flag"))),
                },
                width: num(take("width"), 15)?,
                height: num(take("height"), 15)?,
            },
            "corridors" => EnvVariant::Corridors {
                m: num(take("m"), 8)?,
                t: num(take("t"), 12)?,
            },
            "keyroom" => EnvVariant::KeyRoom {
                size: num(take("size"), 7)?,
            },
            other => return Err(EnvError::InvalidKind(format!("unknown environment `{other}`"))),
        };
        let max_steps = num(take("max_steps"), default_max_steps(&variant))?;
        if let Some((k, _)) = pairs.first() {
            return Err(EnvError::InvalidKind(format!("unknown parameter `{k}` for `{name}`")));
        }
        EnvKind::new(variant, max_steps)
    }
}
