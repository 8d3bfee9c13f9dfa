//! Procedural layout generation.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    kind_vocabulary, Cell, ContextInstance, EnvError, EnvKind, EnvVariant, Grid, Layout, Pos,
};

const MAX_ATTEMPTS: u32 = 100;
const MIN_ROOM: i32 = 4;
const MAX_ROOM: i32 = 7;
const PLACEMENT_TRIES: u32 = 24;

/// Deterministically build the context for `(kind, seed)`.
pub fn generate_context(kind: &EnvKind, seed: u64) -> Result<ContextInstance, EnvError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let built = match kind.variant {
        EnvVariant::Corridors { m, t } => Some(Built {
            layout: Layout::Corridors { m, t },
            start: Pos::new(0, 0),
            goal: Pos::new(0, t as i32),
            doors: Vec::new(),
        }),
        EnvVariant::MultiRoom {
            n_rooms,
            lava,
            width,
            height,
        } => (0..MAX_ATTEMPTS).find_map(|_| multi_room(&mut rng, n_rooms, lava, width, height)),
        EnvVariant::KeyRoom { size } => (0..MAX_ATTEMPTS).find_map(|_| key_room(&mut rng, size)),
    };
    let built = built.ok_or_else(|| EnvError::Generation {
        kind: kind.to_string(),
        seed,
        attempts: MAX_ATTEMPTS,
    })?;
    Ok(ContextInstance {
        kind: *kind,
        context_id: seed,
        layout: built.layout,
        start: built.start,
        goal: built.goal,
        doors: built.doors,
        event_vocabulary: kind_vocabulary(kind),
    })
}

struct Built {
    layout: Layout,
    start: Pos,
    goal: Pos,
    doors: Vec<Pos>,
}

/// Room rectangle including its walls.
#[derive(Debug, Clone, Copy)]
struct Room {
    x0: i32,
    y0: i32,
    w: i32,
    h: i32,
}

impl Room {
    fn x1(&self) -> i32 {
        self.x0 + self.w - 1
    }

    fn y1(&self) -> i32 {
        self.y0 + self.h - 1
    }

    fn interior_intersects(&self, other: &Room) -> bool {
        // Interior of self vs. full rectangle of other.
        let (ax0, ay0, ax1, ay1) = (self.x0 + 1, self.y0 + 1, self.x1() - 1, self.y1() - 1);
        ax0 <= other.x1() && other.x0 <= ax1 && ay0 <= other.y1() && other.y0 <= ay1
    }

    fn random_interior(&self, rng: &mut ChaCha8Rng) -> Pos {
        Pos::new(
            rng.random_range(self.x0 + 1..self.x1()),
            rng.random_range(self.y0 + 1..self.y1()),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Up,
    Down,
    Left,
    Right,
}

impl Side {
    const ALL: [Side; 4] = [Side::Up, Side::Down, Side::Left, Side::Right];

    fn opposite(self) -> Side {
        match self {
            Side::Up => Side::Down,
            Side::Down => Side::Up,
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Sequential room carving: each room is attached to a random wall of the
/// previous one through a door at a random gap.
fn multi_room(rng: &mut ChaCha8Rng, n_rooms: u32, lava: bool, width: u32, height: u32) -> Option<Built> {
    let (gw, gh) = (width as i32, height as i32);
    let max_w = MAX_ROOM.min(gw);
    let max_h = MAX_ROOM.min(gh);
    if max_w < MIN_ROOM || max_h < MIN_ROOM {
        return None;
    }
    let w = rng.random_range(MIN_ROOM..=max_w);
    let h = rng.random_range(MIN_ROOM..=max_h);
    let first = Room {
        x0: rng.random_range(0..=gw - w),
        y0: rng.random_range(0..=gh - h),
        w,
        h,
    };
    let mut rooms = vec![first];
    let mut doors: Vec<Pos> = Vec::new();
    let mut entry: Option<Side> = None;

    for _ in 1..n_rooms {
        let prev = *rooms.last().unwrap();
        let mut placed = false;
        for _ in 0..PLACEMENT_TRIES {
            let side = Side::ALL[rng.random_range(0..4)];
            if Some(side) == entry {
                continue;
            }
            let nw = rng.random_range(MIN_ROOM..=max_w);
            let nh = rng.random_range(MIN_ROOM..=max_h);
            let (door, room) = match side {
                Side::Right | Side::Left => {
                    let x = if side == Side::Right { prev.x1() } else { prev.x0 };
                    let y = rng.random_range(prev.y0 + 1..prev.y1());
                    let y0 = rng.random_range(y - nh + 2..=y - 1);
                    let x0 = if side == Side::Right { x } else { x - nw + 1 };
                    (Pos::new(x, y), Room { x0, y0, w: nw, h: nh })
                }
                Side::Up | Side::Down => {
                    let y = if side == Side::Down { prev.y1() } else { prev.y0 };
                    let x = rng.random_range(prev.x0 + 1..prev.x1());
                    let x0 = rng.random_range(x - nw + 2..=x - 1);
                    let y0 = if side == Side::Down { y } else { y - nh + 1 };
                    (Pos::new(x, y), Room { x0, y0, w: nw, h: nh })
                }
            };
            if room.x0 < 0 || room.y0 < 0 || room.x1() >= gw || room.y1() >= gh {
                continue;
            }
            let clash = rooms
                .iter()
                .any(|r| room.interior_intersects(r) || r.interior_intersects(&room));
            if clash || doors.iter().any(|d| on_border(&room, *d)) {
                continue;
            }
            rooms.push(room);
            doors.push(door);
            entry = Some(side.opposite());
            placed = true;
            break;
        }
        if !placed {
            return None;
        }
    }

    let wall = if lava { Cell::Lava } else { Cell::Wall };
    let mut grid = Grid::filled(width, height, Cell::Wall);
    for r in &rooms {
        for x in r.x0..=r.x1() {
            grid.set(Pos::new(x, r.y0), wall);
            grid.set(Pos::new(x, r.y1()), wall);
        }
        for y in r.y0..=r.y1() {
            grid.set(Pos::new(r.x0, y), wall);
            grid.set(Pos::new(r.x1(), y), wall);
        }
    }
    for r in &rooms {
        for y in r.y0 + 1..r.y1() {
            for x in r.x0 + 1..r.x1() {
                grid.set(Pos::new(x, y), Cell::Floor);
            }
        }
    }
    for d in &doors {
        grid.set(*d, Cell::ClosedDoor);
    }
    let start = rooms[0].random_interior(rng);
    let goal = rooms.last().unwrap().random_interior(rng);
    grid.set(goal, Cell::Goal);
    if !cell_path_exists(&grid, start, goal) {
        return None;
    }
    Some(Built {
        layout: Layout::Grid(grid),
        start,
        goal,
        doors,
    })
}

fn on_border(room: &Room, p: Pos) -> bool {
    let inside = p.x >= room.x0 && p.x <= room.x1() && p.y >= room.y0 && p.y <= room.y1();
    inside && (p.x == room.x0 || p.x == room.x1() || p.y == room.y0 || p.y == room.y1())
}

/// One square room of interior `size x size`; a goal room of interior
/// `r x r` (r in {1, 2}) is walled off in a random corner behind a locked
/// door, and the key lies somewhere in the main area.
fn key_room(rng: &mut ChaCha8Rng, size: u32) -> Option<Built> {
    let s = size as i32;
    let dim = size + 2;
    let mut grid = Grid::filled(dim, dim, Cell::Wall);
    for y in 1..=s {
        for x in 1..=s {
            grid.set(Pos::new(x, y), Cell::Floor);
        }
    }
    let r = rng.random_range(1..=2);
    let flip_x = rng.random_bool(0.5);
    let flip_y = rng.random_bool(0.5);
    // Corner coordinates are built for the top-left corner and mirrored.
    let map = |x: i32, y: i32| {
        Pos::new(if flip_x { s + 1 - x } else { x }, if flip_y { s + 1 - y } else { y })
    };
    let mut goal_cells = Vec::new();
    for y in 1..=r + 1 {
        for x in 1..=r + 1 {
            if x == r + 1 || y == r + 1 {
                grid.set(map(x, y), Cell::Wall);
            } else {
                goal_cells.push(map(x, y));
            }
        }
    }
    let door_slots: Vec<Pos> = (1..=r)
        .map(|y| map(r + 1, y))
        .chain((1..=r).map(|x| map(x, r + 1)))
        .collect();
    let door = door_slots[rng.random_range(0..door_slots.len())];
    grid.set(door, Cell::LockedDoor);
    let goal = goal_cells[rng.random_range(0..goal_cells.len())];
    grid.set(goal, Cell::Goal);

    let main: Vec<Pos> = grid
        .positions()
        .filter(|p| grid.get(*p) == Cell::Floor && !goal_cells.contains(p))
        .collect();
    let key = main[rng.random_range(0..main.len())];
    let start = loop {
        let p = main[rng.random_range(0..main.len())];
        if p != key {
            break p;
        }
    };
    grid.set(key, Cell::Key);
    if !cell_path_exists(&grid, start, key) || !cell_path_exists(&grid, start, goal) {
        return None;
    }
    Some(Built {
        layout: Layout::Grid(grid),
        start,
        goal,
        doors: vec![door],
    })
}

/// Cell-level BFS treating doors as passable and walls/lava as blocked.
fn cell_path_exists(grid: &Grid, from: Pos, to: Pos) -> bool {
    let mut seen = vec![false; (grid.width * grid.height) as usize];
    let idx = |p: Pos| (p.y as u32 * grid.width + p.x as u32) as usize;
    let mut queue = VecDeque::from([from]);
    seen[idx(from)] = true;
    while let Some(p) = queue.pop_front() {
        if p == to {
            return true;
        }
        for (dx, dy) in [(0, -1), (0, 1), (-1, 0), (1, 0)] {
            let q = p.offset(dx, dy);
            if !grid.in_bounds(q) || seen[idx(q)] {
                continue;
            }
            if matches!(grid.get(q), Cell::Wall | Cell::Lava) {
                continue;
            }
            seen[idx(q)] = true;
            queue.push_back(q);
        }
    }
    false
}
