//! Low-level motion: turning and stepping along lattice axes, and the greedy
//! point-goal follower used while exploring.

use crate::grid::CellPos;
use crate::mapping::{VisState, VisibilityMap};
use crate::world::{Action, Heading, Pose};

/// Heading (in 30° steps) closest to the bearing from the pose to `target`.
pub fn heading_to(pose: &Pose, target: CellPos) -> Heading {
    let (tx, ty) = target.center();
    let deg = (ty - pose.y).atan2(tx - pose.x).to_degrees();
    Heading::from_index((deg / f64::from(Heading::STEP_DEG)).round() as i32)
}

/// Turn that reduces the angular error to `want`; ties turn left.
pub fn turn_toward(current: Heading, want: Heading) -> Option<Action> {
    match current.turns_to(want) {
        0 => None,
        d if d > 0 => Some(Action::TurnLeft),
        _ => Some(Action::TurnRight),
    }
}

/// One action towards a neighbouring cell. Diagonal neighbours are reached
/// through an open orthogonal cell so the agent stays on cell centres.
/// Returns `None` when the agent is already in `next`.
pub fn drive_toward(pose: &Pose, next: CellPos, open: impl Fn(CellPos) -> bool) -> Option<Action> {
    let here = pose.cell();
    if here == next && pose.on_lattice() {
        return None;
    }
    let (dx, dy) = (next.x - here.x, next.y - here.y);
    let step_to = if dx != 0 && dy != 0 && dx.abs() <= 1 && dy.abs() <= 1 {
        let options = [here.offset(dx, 0), here.offset(0, dy)];
        options
            .into_iter()
            .filter(|&c| open(c))
            .min_by_key(|&c| pose.heading.turns_to(heading_to(pose, c)).abs())
            .unwrap_or(options[0])
    } else {
        next
    };
    let want = heading_to(pose, step_to);
    Some(turn_toward(pose.heading, want).unwrap_or(Action::MoveForward))
}

/// Greedy point-goal stepping: move to the 4-neighbour closest (straight
/// line) to `goal`, avoiding known obstacles and stairs. It does not plan, so
/// it can oscillate in front of concave obstacles.
pub fn greedy_step(pose: &Pose, goal: CellPos, vis: &VisibilityMap) -> Action {
    let here = pose.cell();
    if here == goal {
        return drive_toward(pose, goal, |_| true).unwrap_or(Action::TurnLeft);
    }
    let passable = |c: CellPos| match vis.state(c) {
        None | Some(VisState::Occupied) => false,
        Some(VisState::Stair(_)) => c == goal,
        _ => true,
    };
    let (gx, gy) = goal.center();
    let best = here
        .neighbors4()
        .into_iter()
        .filter(|&c| passable(c))
        .enumerate()
        .min_by(|(i, a), (j, b)| {
            let (ax, ay) = a.center();
            let (bx, by) = b.center();
            let da = (ax - gx).hypot(ay - gy);
            let db = (bx - gx).hypot(by - gy);
            let ta = pose.heading.turns_to(heading_to(pose, *a)).abs();
            let tb = pose.heading.turns_to(heading_to(pose, *b)).abs();
            da.total_cmp(&db).then(ta.cmp(&tb)).then(i.cmp(j))
        })
        .map(|(_, c)| c);
    match best {
        Some(c) => drive_toward(pose, c, passable).unwrap_or(Action::TurnLeft),
        None => Action::TurnLeft,
    }
}
