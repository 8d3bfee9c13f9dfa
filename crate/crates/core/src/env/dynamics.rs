use super::{Cell, ContextInstance, EnvError, EventId, Layout, Pos, State, Transition};

/// Grid action deltas: Up, Down, Left, Right.
const MOVES: [(i32, i32); 4] = [(0, -1), (0, 1), (-1, 0), (1, 0)];

/// What a cell looks like given the dynamic parts of a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CellView {
    Floor,
    Wall,
    Lava,
    ClosedDoor,
    LockedDoor,
    Key,
    Goal,
    OpenDoor,
}

pub(crate) fn cell_view(ctx: &ContextInstance, state: &State, p: Pos) -> CellView {
    let Some(grid) = ctx.grid() else {
        return CellView::Wall;
    };
    match grid.get(p) {
        Cell::Floor => CellView::Floor,
        Cell::Wall => CellView::Wall,
        Cell::Lava => CellView::Lava,
        Cell::Goal => CellView::Goal,
        Cell::Key => {
            if state.has_key {
                CellView::Floor
            } else {
                CellView::Key
            }
        }
        door @ (Cell::ClosedDoor | Cell::LockedDoor) => {
            let open = ctx.door_index(p).is_some_and(|i| state.door_open(i));
            match (open, door) {
                (true, _) => CellView::OpenDoor,
                (false, Cell::LockedDoor) => CellView::LockedDoor,
                _ => CellView::ClosedDoor,
            }
        }
    }
}

/// Initial state: at the start, no key, all doors shut.
pub fn reset(ctx: &ContextInstance) -> State {
    State {
        pos: ctx.start(),
        has_key: false,
        open_doors: 0,
        last_event: EventId::Blank,
        t: 0,
    }
}

/// Advance one step. The step counter saturates the episode at `max_steps`.
pub fn step(ctx: &ContextInstance, state: &State, action: usize) -> Result<Transition, EnvError> {
    let n_actions = ctx.n_actions();
    if action >= n_actions {
        return Err(EnvError::InvalidAction { action, n_actions });
    }
    let (mut next, reward, terminal) = match ctx.layout() {
        Layout::Corridors { t, .. } => corridor_step(state, action, *t),
        Layout::Grid(_) => grid_step(ctx, state, action),
    };
    next.t = state.t + 1;
    let done = terminal || next.t >= ctx.kind().max_steps;
    Ok(Transition {
        state: *state,
        action,
        next_state: next,
        reward,
        done,
        event: next.last_event,
    })
}

fn corridor_step(state: &State, action: usize, t: u32) -> (State, f64, bool) {
    let mut next = *state;
    next.last_event = EventId::Blank;
    let Pos { x: corridor, y: depth } = state.pos;
    if depth == 0 {
        next.pos = Pos::new(action as i32, 1);
    } else if action == 0 && (depth as u32) < t {
        next.pos = Pos::new(corridor, depth + 1);
    }
    if next.pos.x == 0 && next.pos.y as u32 == t {
        next.last_event = EventId::GoalReached;
        return (next, 1.0, true);
    }
    (next, 0.0, false)
}

fn grid_step(ctx: &ContextInstance, state: &State, action: usize) -> (State, f64, bool) {
    let (dx, dy) = MOVES[action];
    let target = state.pos.offset(dx, dy);
    let mut next = *state;
    let mut moved = true;
    let (event, reward, terminal) = match cell_view(ctx, state, target) {
        CellView::Floor | CellView::OpenDoor => (EventId::Blank, 0.0, false),
        CellView::Wall => {
            moved = false;
            (EventId::BumpWall, 0.0, false)
        }
        CellView::Lava => {
            moved = false;
            (EventId::LavaDeath, 0.0, true)
        }
        CellView::Key => {
            next.has_key = true;
            (EventId::KeyPickedUp, 0.0, false)
        }
        CellView::ClosedDoor => {
            open(ctx, &mut next, target);
            (EventId::DoorOpened, 0.0, false)
        }
        CellView::LockedDoor => {
            if state.has_key {
                open(ctx, &mut next, target);
                (EventId::DoorOpened, 0.0, false)
            } else {
                moved = false;
                (EventId::DoorLocked, 0.0, false)
            }
        }
        CellView::Goal => (EventId::GoalReached, 1.0, true),
    };
    if moved {
        next.pos = target;
    }
    next.last_event = event;
    (next, reward, terminal)
}

fn open(ctx: &ContextInstance, state: &mut State, door: Pos) {
    if let Some(i) = ctx.door_index(door) {
        state.open_doors |= 1 << i;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{generate_context, EnvKind};

    const UP: usize = 0;
    const DOWN: usize = 1;
    const LEFT: usize = 2;
    const RIGHT: usize = 3;

    fn ctx(text: &str) -> ContextInstance {
        ContextInstance::from_ascii(EnvKind::key_room(5).unwrap(), 0, text).unwrap()
    }

    #[test]
    fn wall_bump_keeps_position() {
        let c = ctx("#####\n#<.>#\n#####\n");
        let s = reset(&c);
        let tr = step(&c, &s, UP).unwrap();
        assert_eq!(tr.next_state.pos, s.pos);
        assert_eq!(tr.event, EventId::BumpWall);
        assert_eq!(tr.reward, 0.0);
        assert!(!tr.done);
        assert_eq!(tr.next_state.t, 1);
    }

    #[test]
    fn lava_terminates_without_reward() {
        let c = ctx("#####\n#~<>#\n#####\n");
        let tr = step(&c, &reset(&c), LEFT).unwrap();
        assert!(tr.done);
        assert_eq!(tr.reward, 0.0);
        assert_eq!(tr.event, EventId::LavaDeath);
        assert_eq!(tr.next_state.pos, c.start());
    }

    #[test]
    fn goal_gives_reward_and_terminates() {
        let c = ctx("#####\n#<.>#\n#####\n");
        let s = step(&c, &reset(&c), RIGHT).unwrap().next_state;
        let tr = step(&c, &s, RIGHT).unwrap();
        assert_eq!((tr.reward, tr.done, tr.event), (1.0, true, EventId::GoalReached));
    }

    #[test]
    fn locked_door_needs_key() {
        // Bump the locked door, fetch the key, come back and pass.
        let c = ctx("#######\n#k.<L>#\n#######\n");
        let s0 = reset(&c);
        let bump = step(&c, &s0, RIGHT).unwrap();
        assert_eq!(bump.event, EventId::DoorLocked);
        assert_eq!(bump.next_state.pos, s0.pos);
        let mut s = bump.next_state;
        for _ in 0..2 {
            s = step(&c, &s, LEFT).unwrap().next_state;
        }
        assert!(s.has_key);
        assert_eq!(s.last_event, EventId::KeyPickedUp);
        for _ in 0..2 {
            s = step(&c, &s, RIGHT).unwrap().next_state;
        }
        let open = step(&c, &s, RIGHT).unwrap();
        assert_eq!(open.event, EventId::DoorOpened);
        assert_eq!(open.next_state.pos, Pos::new(4, 1));
        assert!(open.next_state.door_open(0));
        let goal = step(&c, &open.next_state, RIGHT).unwrap();
        assert_eq!(goal.event, EventId::GoalReached);
    }

    #[test]
    fn closed_door_opens_and_passes_then_is_blank() {
        let c = ctx("#######\n#<+..>#\n#######\n");
        let s = reset(&c);
        let tr = step(&c, &s, RIGHT).unwrap();
        assert_eq!(tr.event, EventId::DoorOpened);
        assert_eq!(tr.next_state.pos, Pos::new(2, 1));
        let back = step(&c, &tr.next_state, LEFT).unwrap().next_state;
        let again = step(&c, &back, RIGHT).unwrap();
        assert_eq!(again.event, EventId::Blank);
    }

    #[test]
    fn step_budget_forces_done() {
        let kind = EnvKind::new(crate::env::EnvVariant::KeyRoom { size: 5 }, 2).unwrap();
        let c = ContextInstance::from_ascii(kind, 0, "#####\n#<.>#\n#####\n").unwrap();
        let s = step(&c, &reset(&c), DOWN).unwrap();
        assert!(!s.done);
        let s = step(&c, &s.next_state, DOWN).unwrap();
        assert!(s.done);
        assert_eq!(s.next_state.t, 2);
    }

    #[test]
    fn invalid_action_is_an_error() {
        let c = ctx("#####\n#<.>#\n#####\n");
        assert!(matches!(
            step(&c, &reset(&c), 4),
            Err(EnvError::InvalidAction { action: 4, n_actions: 4 })
        ));
    }

    #[test]
    fn corridors_dynamics() {
        let c = generate_context(&EnvKind::corridors(3, 4).unwrap(), 0).unwrap();
        let s0 = reset(&c);
        assert_eq!(s0.pos, Pos::new(0, 0));
        // Enter chain 2, no-op, advance to the dead end, advance again.
        let mut s = step(&c, &s0, 2).unwrap().next_state;
        assert_eq!(s.pos, Pos::new(2, 1));
        s = step(&c, &s, 1).unwrap().next_state;
        assert_eq!(s.pos, Pos::new(2, 1));
        for _ in 0..3 {
            s.t = 0;
            s = step(&c, &s, 0).unwrap().next_state;
        }
        assert_eq!(s.pos, Pos::new(2, 4));
        s.t = 0;
        let tr = step(&c, &s, 0).unwrap();
        assert_eq!(tr.next_state.pos, Pos::new(2, 4));
        assert_eq!(tr.reward, 0.0);
        // Chain 0 straight through reaches the goal exactly at the budget.
        let mut tr = step(&c, &s0, 0).unwrap();
        for _ in 0..3 {
            tr = step(&c, &tr.next_state, 0).unwrap();
        }
        assert_eq!((tr.reward, tr.done, tr.event), (1.0, true, EventId::GoalReached));
        assert_eq!(tr.next_state.t, 4);
    }
}
