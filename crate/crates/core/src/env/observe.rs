use serde::{Deserialize, Serialize};

use super::dynamics::{cell_view, CellView};
use super::{ContextCount, ContextInstance, EnvKind, Layout, Pos, State};

/// Number of one-hot cell categories per window cell.
pub const OBS_CATEGORIES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObsConfig {
    /// Side of the egocentric window; must be odd.
    pub window: u32,
    /// Append a one-hot of the absolute position over the kind's lattice.
    pub abs_position: bool,
}

impl ObsConfig {
    /// 5x5 window; absolute position only for singleton pools.
    pub fn default_for(contexts: ContextCount) -> Self {
        ObsConfig {
            window: 5,
            abs_position: contexts == ContextCount::Finite(1),
        }
    }
}

impl Default for ObsConfig {
    fn default() -> Self {
        ObsConfig {
            window: 5,
            abs_position: false,
        }
    }
}

/// Binary vector stored as its sorted active indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObservationVector {
    dim: usize,
    active: Vec<u32>,
}

impl ObservationVector {
    pub fn from_active(dim: usize, mut active: Vec<u32>) -> Self {
        active.sort_unstable();
        active.dedup();
        debug_assert!(active.last().is_none_or(|&i| (i as usize) < dim));
        ObservationVector { dim, active }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Indices of the entries equal to 1.
    pub fn active(&self) -> &[u32] {
        &self.active
    }

    pub fn get(&self, i: usize) -> f64 {
        if self.active.binary_search(&(i as u32)).is_ok() {
            1.0
        } else {
            0.0
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for &i in &self.active {
            v[i as usize] = 1.0;
        }
        v
    }
}

/// Observation dimension for a kind under `cfg`.
pub fn obs_dim(kind: &EnvKind, cfg: &ObsConfig) -> usize {
    let (w, h) = kind.lattice();
    if !kind.is_grid() {
        // Junction, one slot per (corridor, depth), and an in-corridor flag.
        return 2 + ((h - 1) * w) as usize;
    }
    let k = cfg.window as usize;
    let abs = if cfg.abs_position { (w * h) as usize } else { 0 };
    k * k * OBS_CATEGORIES + 1 + abs
}

pub fn observe(ctx: &ContextInstance, state: &State, cfg: &ObsConfig) -> ObservationVector {
    let dim = obs_dim(ctx.kind(), cfg);
    match ctx.layout() {
        Layout::Corridors { t, .. } => {
            // The flag is shared by every corridor cell, which lets "advance"
            // generalize across corridors without favouring any at the junction.
            let active = if state.pos.y == 0 {
                vec![0]
            } else {
                vec![1 + state.pos.x as u32 * t + (state.pos.y as u32 - 1), dim as u32 - 1]
            };
            ObservationVector::from_active(dim, active)
        }
        Layout::Grid(_) => {
            let k = cfg.window as i32;
            let r = k / 2;
            let mut active = Vec::with_capacity((k * k + 2) as usize);
            for dy in -r..=r {
                for dx in -r..=r {
                    let cell = ((dy + r) * k + (dx + r)) as u32;
                    let view = cell_view(ctx, state, Pos::new(state.pos.x + dx, state.pos.y + dy));
                    active.push(cell * OBS_CATEGORIES as u32 + category(view));
                }
            }
            let base = (k * k) as u32 * OBS_CATEGORIES as u32;
            if state.has_key {
                active.push(base);
            }
            if cfg.abs_position {
                let (w, _) = ctx.kind().lattice();
                active.push(base + 1 + state.pos.y as u32 * w + state.pos.x as u32);
            }
            ObservationVector::from_active(dim, active)
        }
    }
}

fn category(view: CellView) -> u32 {
    match view {
        CellView::Floor => 0,
        CellView::Wall => 1,
        CellView::Lava => 2,
        CellView::ClosedDoor => 3,
        CellView::LockedDoor => 4,
        CellView::Key => 5,
        CellView::Goal => 6,
        CellView::OpenDoor => 7,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{generate_context, reset, EnvVariant};

    fn kind() -> EnvKind {
        EnvKind::new(
            EnvVariant::MultiRoom {
                n_rooms: 2,
                lava: false,
                width: 12,
                height: 7,
            },
            50,
        )
        .unwrap()
    }

    #[test]
    fn boxed_in_agent_sees_eight_walls() {
        let text = "#####\n###>#\n##<##\n#####\n#####\n";
        let ctx = ContextInstance::from_ascii(kind(), 0, text).unwrap();
        let cfg = ObsConfig {
            window: 3,
            abs_position: false,
        };
        let o = observe(&ctx, &reset(&ctx), &cfg);
        assert_eq!(o.dim(), 9 * OBS_CATEGORIES + 1);
        // Goal sits diagonally up-right (window cell 2); everything else is wall except the centre floor.
        let expected: Vec<u32> = (0..9u32)
            .map(|c| {
                c * OBS_CATEGORIES as u32
                    + match c {
                        2 => 6,
                        4 => 0,
                        _ => 1,
                    }
            })
            .collect();
        assert_eq!(o.active(), expected.as_slice());

        let sealed = "#####\n#####\n##<##\n#####\n####>\n";
        let ctx = ContextInstance::from_ascii(kind(), 0, sealed).unwrap();
        let o = observe(&ctx, &reset(&ctx), &cfg);
        let walls = o
            .active()
            .iter()
            .filter(|&&i| i % OBS_CATEGORIES as u32 == 1)
            .count();
        assert_eq!(walls, 8);
        assert_eq!(o.active().len(), 9);
    }

    #[test]
    fn egocentric_view_is_translation_invariant() {
        let a = "############\n#<..#......#\n#...#...>..#\n############\n############\n############\n############\n";
        let b = "############\n############\n############\n#######<..##\n#######...##\n####>#######\n############\n";
        let ca = ContextInstance::from_ascii(kind(), 0, a).unwrap();
        let cb = ContextInstance::from_ascii(kind(), 1, b).unwrap();
        let cfg = ObsConfig {
            window: 3,
            abs_position: false,
        };
        let oa = observe(&ca, &reset(&ca), &cfg);
        let ob = observe(&cb, &reset(&cb), &cfg);
        assert_eq!(oa, ob);
        let with_abs = ObsConfig {
            abs_position: true,
            ..cfg
        };
        assert_ne!(observe(&ca, &reset(&ca), &with_abs), observe(&cb, &reset(&cb), &with_abs));
    }

    #[test]
    fn deterministic_and_fixed_dimension() {
        let k = EnvKind::multi_room(3, true, 13, 13).unwrap();
        let cfg = ObsConfig::default();
        for seed in 0..5 {
            let c = generate_context(&k, seed).unwrap();
            let s = reset(&c);
            let o = observe(&c, &s, &cfg);
            assert_eq!(o, observe(&c, &s, &cfg));
            assert_eq!(o.dim(), obs_dim(&k, &cfg));
            assert_eq!(o.to_dense().iter().filter(|&&x| x == 1.0).count(), o.active().len());
        }
    }

    #[test]
    fn corridor_one_hot() {
        let k = EnvKind::corridors(3, 4).unwrap();
        let c = generate_context(&k, 0).unwrap();
        let cfg = ObsConfig::default();
        assert_eq!(obs_dim(&k, &cfg), 14);
        let s = reset(&c);
        assert_eq!(observe(&c, &s, &cfg).active(), &[0]);
        let s2 = State {
            pos: Pos::new(2, 3),
            ..s
        };
        assert_eq!(observe(&c, &s2, &cfg).active(), &[1 + 2 * 4 + 2, 13]);
    }
}
