//! Contextual MDP environments.
//!
//! A context is a deterministic function of `(EnvKind, seed)`. Three
//! archetypes are provided: `MultiRoom` (a chain of rooms whose placement
//! varies with the seed), `KeyRoom` (fetch a key, unlock the goal room) and
//! `Corridors` (a seed-independent junction with `m` dead-end chains).
//! Dynamics are deterministic; every transition emits an [`EventId`], the
//! desk-scale analogue of a game message.

mod dynamics;
mod feature;
mod generate;
mod graph;
mod kind;
mod observe;
mod pool;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dynamics::{reset, step};
pub use feature::{extract_feature, FeatureKey, FeatureKind, FullKey};
pub use generate::generate_context;
pub use graph::{enumerate_reachable, Planner, StateGraph};
pub use kind::{EnvKind, EnvVariant};
pub use observe::{obs_dim, observe, ObsConfig, ObservationVector, OBS_CATEGORIES};
pub use pool::{sample_context, ContextCount, ContextPool, PoolSpec};

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("invalid environment: {0}")]
    InvalidKind(String),
    #[error("layout generation failed for {kind} seed {seed} after {attempts} attempts")]
    Generation { kind: String, seed: u64, attempts: u32 },
    #[error("action {action} out of range for {n_actions}-action environment")]
    InvalidAction { action: usize, n_actions: usize },
    #[error("bad layout text: {0}")]
    BadLayout(String),
}

/// Grid position; for Corridors, `x` is the corridor index and `y` the depth
/// (the junction is `(0, 0)`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pos {
    pub x: i32,
    pub y: i32,
}

impl Pos {
    pub const fn new(x: i32, y: i32) -> Self {
        Pos { x, y }
    }

    fn offset(self, dx: i32, dy: i32) -> Self {
        Pos::new(self.x + dx, self.y + dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Floor,
    Wall,
    Lava,
    ClosedDoor,
    LockedDoor,
    Key,
    Goal,
}

impl Cell {
    fn glyph(self) -> char {
        match self {
            Cell::Floor => '.',
            Cell::Wall => '#',
            Cell::Lava => '~',
            Cell::ClosedDoor | Cell::LockedDoor => '+',
            Cell::Key => 'k',
            Cell::Goal => '>',
        }
    }
}

/// Message emitted by a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventId {
    Blank,
    BumpWall,
    DoorLocked,
    DoorOpened,
    KeyPickedUp,
    GoalReached,
    LavaDeath,
}

impl EventId {
    pub const ALL: [EventId; 7] = [
        EventId::Blank,
        EventId::BumpWall,
        EventId::DoorLocked,
        EventId::DoorOpened,
        EventId::KeyPickedUp,
        EventId::GoalReached,
        EventId::LavaDeath,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EventId::Blank => "blank",
            EventId::BumpWall => "bump_wall",
            EventId::DoorLocked => "door_locked",
            EventId::DoorOpened => "door_opened",
            EventId::KeyPickedUp => "key_picked_up",
            EventId::GoalReached => "goal_reached",
            EventId::LavaDeath => "lava_death",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        EventId::ALL.into_iter().find(|e| e.name() == name)
    }
}

/// A rectangular cell array, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Grid {
    width: u32,
    height: u32,
    cells: Vec<Cell>,
}

impl Grid {
    fn filled(width: u32, height: u32, cell: Cell) -> Self {
        Grid {
            width,
            height,
            cells: vec![cell; (width * height) as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn in_bounds(&self, p: Pos) -> bool {
        p.x >= 0 && p.y >= 0 && (p.x as u32) < self.width && (p.y as u32) < self.height
    }

    /// Static cell; out-of-bounds reads as `Wall`.
    pub fn get(&self, p: Pos) -> Cell {
        if self.in_bounds(p) {
            self.cells[(p.y as u32 * self.width + p.x as u32) as usize]
        } else {
            Cell::Wall
        }
    }

    fn set(&mut self, p: Pos, cell: Cell) {
        debug_assert!(self.in_bounds(p));
        let idx = (p.y as u32 * self.width + p.x as u32) as usize;
        self.cells[idx] = cell;
    }

    fn positions(&self) -> impl Iterator<Item = Pos> + '_ {
        (0..self.height as i32).flat_map(move |y| (0..self.width as i32).map(move |x| Pos::new(x, y)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Layout {
    Grid(Grid),
    /// Abstract junction-and-chains graph.
    Corridors { m: u32, t: u32 },
}

/// One sampled environment instance. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContextInstance {
    kind: EnvKind,
    context_id: u64,
    layout: Layout,
    start: Pos,
    goal: Pos,
    doors: Vec<Pos>,
    event_vocabulary: Vec<EventId>,
}

impl ContextInstance {
    pub fn kind(&self) -> &EnvKind {
        &self.kind
    }

    pub fn context_id(&self) -> u64 {
        self.context_id
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn grid(&self) -> Option<&Grid> {
        match &self.layout {
            Layout::Grid(g) => Some(g),
            Layout::Corridors { .. } => None,
        }
    }

    pub fn start(&self) -> Pos {
        self.start
    }

    pub fn goal(&self) -> Pos {
        self.goal
    }

    /// Door positions; `State::open_doors` is a bitmask over this list.
    pub fn doors(&self) -> &[Pos] {
        &self.doors
    }

    pub fn event_vocabulary(&self) -> &[EventId] {
        &self.event_vocabulary
    }

    pub fn n_actions(&self) -> usize {
        self.kind.n_actions()
    }

    fn door_index(&self, p: Pos) -> Option<usize> {
        self.doors.iter().position(|&d| d == p)
    }

    /// Plain-text dump: `.` floor, `#` wall, `~` lava, `+` door, `k` key,
    /// `<` start, `>` goal. Corridors render one row per chain with the
    /// junction in column 0.
    pub fn render(&self) -> String {
        let mut out = String::new();
        match &self.layout {
            Layout::Grid(g) => {
                for y in 0..g.height as i32 {
                    for x in 0..g.width as i32 {
                        let p = Pos::new(x, y);
                        out.push(if p == self.start { '<' } else { g.get(p).glyph() });
                    }
                    out.push('\n');
                }
            }
            Layout::Corridors { m, t } => {
                for i in 0..*m {
                    out.push(if i == 0 { '<' } else { '|' });
                    for d in 1..=*t {
                        out.push(if i == 0 && d == *t { '>' } else { '.' });
                    }
                    out.push('\n');
                }
            }
        }
        out
    }

    /// Build a grid context from a text layout using the `render` alphabet
    /// (`+` is a closed door, `L` a locked door). Checks there is exactly one
    /// start and one goal; reachability is not checked.
    pub fn from_ascii(kind: EnvKind, context_id: u64, text: &str) -> Result<Self, EnvError> {
        let rows: Vec<&str> = text.lines().filter(|l| !l.is_empty()).collect();
        let height = rows.len() as u32;
        let width = rows.first().map_or(0, |r| r.chars().count()) as u32;
        if height == 0 || width == 0 || rows.iter().any(|r| r.chars().count() as u32 != width) {
            return Err(EnvError::BadLayout("rows must be non-empty and equal length".into()));
        }
        let mut grid = Grid::filled(width, height, Cell::Wall);
        let (mut start, mut goal) = (None, None);
        let mut doors = Vec::new();
        let mut has_key = false;
        for (y, row) in rows.iter().enumerate() {
            for (x, ch) in row.chars().enumerate() {
                let p = Pos::new(x as i32, y as i32);
                let cell = match ch {
                    '.' => Cell::Floor,
                    '#' => Cell::Wall,
                    '~' => Cell::Lava,
                    '+' => Cell::ClosedDoor,
                    'L' => Cell::LockedDoor,
                    'k' => {
                        has_key = true;
                        Cell::Key
                    }
                    '<' => {
                        if start.replace(p).is_some() {
                            return Err(EnvError::BadLayout("more than one start".into()));
                        }
                        Cell::Floor
                    }
                    '>' => {
                        if goal.replace(p).is_some() {
                            return Err(EnvError::BadLayout("more than one goal".into()));
                        }
                        Cell::Goal
                    }
                    other => return Err(EnvError::BadLayout(format!("unknown glyph `{other}`"))),
                };
                if matches!(cell, Cell::ClosedDoor | Cell::LockedDoor) {
                    doors.push(p);
                }
                grid.set(p, cell);
            }
        }
        let (start, goal) = match (start, goal) {
            (Some(s), Some(g)) => (s, g),
            _ => return Err(EnvError::BadLayout("need exactly one start and one goal".into())),
        };
        if doors.len() > 32 {
            return Err(EnvError::BadLayout("at most 32 doors".into()));
        }
        let vocabulary = grid_vocabulary(&grid, has_key);
        Ok(ContextInstance {
            kind,
            context_id,
            layout: Layout::Grid(grid),
            start,
            goal,
            doors,
            event_vocabulary: vocabulary,
        })
    }
}

fn grid_vocabulary(grid: &Grid, has_key: bool) -> Vec<EventId> {
    let any = |c: Cell| grid.cells.contains(&c);
    let mut v = vec![EventId::Blank, EventId::BumpWall];
    if any(Cell::LockedDoor) {
        v.push(EventId::DoorLocked);
    }
    if any(Cell::ClosedDoor) || any(Cell::LockedDoor) {
        v.push(EventId::DoorOpened);
    }
    if has_key {
        v.push(EventId::KeyPickedUp);
    }
    v.push(EventId::GoalReached);
    if any(Cell::Lava) {
        v.push(EventId::LavaDeath);
    }
    v
}

/// Message vocabulary shared by every context of `kind` (the message
/// feature space `Z`).
pub fn kind_vocabulary(kind: &EnvKind) -> Vec<EventId> {
    match kind.variant {
        EnvVariant::MultiRoom { lava, .. } => {
            let mut v = vec![EventId::Blank, EventId::BumpWall, EventId::DoorOpened, EventId::GoalReached];
            if lava {
                v.push(EventId::LavaDeath);
            }
            v
        }
        EnvVariant::Corridors { .. } => vec![EventId::Blank, EventId::GoalReached],
        EnvVariant::KeyRoom { .. } => vec![
            EventId::Blank,
            EventId::BumpWall,
            EventId::DoorLocked,
            EventId::DoorOpened,
            EventId::KeyPickedUp,
            EventId::GoalReached,
        ],
    }
}

/// Agent situation within a context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct State {
    pub pos: Pos,
    pub has_key: bool,
    /// Bitmask over `ContextInstance::doors`.
    pub open_doors: u32,
    pub last_event: EventId,
    pub t: u32,
}

impl State {
    pub fn door_open(&self, index: usize) -> bool {
        self.open_doors & (1 << index) != 0
    }
}

/// One environment step's full record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub state: State,
    pub action: usize,
    pub next_state: State,
    pub reward: f64,
    pub done: bool,
    pub event: EventId,
}
