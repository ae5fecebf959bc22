//! Escape behaviour for a stalled agent: a waypoint-segmented A* plan for
//! far frontiers and reasoner-guided fine actions for near ones.

use crate::config::RecoveryConfig;
use crate::grid::{octile_distance, CellPos};
use crate::locomotion::drive_toward;
use crate::mapping::{MappingError, Traversal, VisState, VisibilityMap};
use crate::reasoner::{fine_action_query, Candidate, Reasoner};
use crate::world::{Action, Observation, Pose};
use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecoveryError {
    /// The plan's goal is occupied or can no longer be reached.
    #[error("plan to {goal:?} invalidated")]
    PlanInvalidated { goal: CellPos },
}

#[derive(Debug, Clone, Copy)]
struct Open {
    f: f64,
    h: f64,
    g: f64,
    cell: CellPos,
}

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Open {}
impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Open {
    // smallest (f, h, cell) pops first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.cell.cmp(&self.cell))
    }
}

/// Traversal rule shared by planning and following: unknown space is usable
/// only when the goal itself borders it.
pub fn plan_traversal(vis: &VisibilityMap, start: CellPos, goal: CellPos) -> Traversal {
    Traversal {
        start,
        goal: Some(goal),
        allow_unknown: vis.is_frontier_cell(goal),
    }
}

/// Minimum-cost 8-connected path with the octile heuristic. Ties are broken
/// by (f, h, cell), so the result is deterministic.
pub fn astar(vis: &VisibilityMap, start: CellPos, goal: CellPos) -> Result<Vec<CellPos>, MappingError> {
    let unreachable = MappingError::Unreachable { from: start, to: goal };
    if start == goal {
        return Ok(vec![start]);
    }
    let t = plan_traversal(vis, start, goal);
    if !t.open(vis, goal) || vis.state(start).is_none() {
        return Err(unreachable);
    }
    let mut g: HashMap<CellPos, f64> = HashMap::from([(start, 0.0)]);
    let mut parent: HashMap<CellPos, CellPos> = HashMap::new();
    let mut closed: BTreeSet<CellPos> = BTreeSet::new();
    let mut heap = BinaryHeap::new();
    let h0 = octile_distance(start, goal);
    heap.push(Open {
        f: h0,
        h: h0,
        g: 0.0,
        cell: start,
    });
    let mut buf = Vec::new();
    while let Some(Open { g: gc, cell, .. }) = heap.pop() {
        if !closed.insert(cell) {
            continue;
        }
        if cell == goal {
            let mut path = vec![goal];
            let mut c = goal;
            while let Some(&p) = parent.get(&c) {
                path.push(p);
                c = p;
            }
            path.reverse();
            return Ok(path);
        }
        buf.clear();
        t.neighbors(vis, cell, &mut buf);
        for &(n, w) in &buf {
            if closed.contains(&n) {
                continue;
            }
            let ng = gc + w;
            if g.get(&n).is_none_or(|&old| ng < old) {
                g.insert(n, ng);
                parent.insert(n, cell);
                let h = octile_distance(n, goal);
                heap.push(Open {
                    f: ng + h,
                    h,
                    g: ng,
                    cell: n,
                });
            }
        }
    }
    Err(unreachable)
}

/// Length of a cell path in metres.
pub fn path_length(path: &[CellPos]) -> f64 {
    path.windows(2).map(|w| w[0].metric_distance(w[1])).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaypointPlan {
    /// The full A* path, start cell first.
    pub path: Vec<CellPos>,
    /// Indices into `path`; the last one is the goal.
    pub waypoints: Vec<usize>,
    /// Next waypoint to reach.
    pub current: usize,
    pub interval_m: f64,
    /// Position of the agent along `path`.
    cursor: usize,
    pub replans: usize,
}

impl WaypointPlan {
    pub fn goal(&self) -> CellPos {
        *self.path.last().expect("plans are built from nonempty paths")
    }

    pub fn waypoint_cells(&self) -> Vec<CellPos> {
        self.waypoints.iter().map(|&i| self.path[i]).collect()
    }

    pub fn current_waypoint(&self) -> Option<CellPos> {
        self.waypoints.get(self.current).map(|&i| self.path[i])
    }

    pub fn is_done(&self) -> bool {
        self.current >= self.waypoints.len()
    }

    /// Remaining path length from the agent's path position to the current
    /// waypoint.
    pub fn leg_remaining_m(&self) -> f64 {
        match self.waypoints.get(self.current) {
            Some(&w) if w >= self.cursor => path_length(&self.path[self.cursor..=w]),
            _ => 0.0,
        }
    }
}

/// Samples the path at multiples of `interval_m` of cumulative length and
/// always ends with the final cell.
pub fn segment_waypoints(path: Vec<CellPos>, interval_m: f64) -> WaypointPlan {
    assert!(!path.is_empty(), "segment_waypoints needs a nonempty path");
    assert!(interval_m > 0.0, "waypoint interval must be positive");
    let mut waypoints = Vec::new();
    let mut cum = 0.0;
    let mut next_mark = interval_m;
    for i in 1..path.len() {
        cum += path[i - 1].metric_distance(path[i]);
        if cum + 1e-9 >= next_mark {
            waypoints.push(i);
            while cum + 1e-9 >= next_mark {
                next_mark += interval_m;
            }
        }
    }
    let last = path.len() - 1;
    if waypoints.last() != Some(&last) {
        waypoints.push(last);
    }
    WaypointPlan {
        path,
        waypoints,
        current: 0,
        interval_m,
        cursor: 0,
        replans: 0,
    }
}

/// Plans from the agent's cell to `goal` and segments the path.
pub fn plan_to(vis: &VisibilityMap, from: CellPos, goal: CellPos, interval_m: f64) -> Result<WaypointPlan, MappingError> {
    astar(vis, from, goal).map(|p| segment_waypoints(p, interval_m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FollowStep {
    Act(Action),
    /// The last waypoint was consumed.
    Done,
}

/// Advances the plan by one action: consumes captured waypoints, replans
/// when the next leg is blocked or the agent left the path, then drives
/// along the path towards the current waypoint.
pub fn follow_plan(
    plan: &mut WaypointPlan,
    pose: &Pose,
    vis: &VisibilityMap,
    capture_radius_m: f64,
) -> Result<FollowStep, RecoveryError> {
    let goal = plan.goal();
    let invalid = RecoveryError::PlanInvalidated { goal };
    if vis.state(goal) == Some(VisState::Occupied) {
        return Err(invalid);
    }
    let here = pose.cell();
    let located = plan.path[plan.cursor..].iter().position(|&c| c == here).map(|i| i + plan.cursor);
    if let Some(i) = located {
        plan.cursor = i;
    }
    while let Some(w) = plan.current_waypoint() {
        let idx = plan.waypoints[plan.current];
        let captured = pose.distance_to_cell(w) <= capture_radius_m && idx <= plan.cursor + 1;
        if idx <= plan.cursor || captured {
            plan.current += 1;
        } else {
            break;
        }
    }
    if plan.is_done() {
        return Ok(FollowStep::Done);
    }
    let t = plan_traversal(vis, here, goal);
    // the side cell of a split diagonal move is off the path but still on track
    let on_track = located.is_some() || here.chebyshev(plan.path[plan.cursor + 1]) <= 1;
    let leg_end = plan.waypoints[plan.current];
    let blocked = !on_track || plan.path[plan.cursor + 1..=leg_end].iter().any(|&c| !t.open(vis, c));
    if blocked {
        let fresh = astar(vis, here, goal).map_err(|_| invalid.clone())?;
        let replans = plan.replans + 1;
        *plan = segment_waypoints(fresh, plan.interval_m);
        plan.replans = replans;
        if plan.path.len() == 1 {
            plan.current = plan.waypoints.len();
            return Ok(FollowStep::Done);
        }
    }
    let next = plan.path[plan.cursor + 1];
    let action = drive_toward(pose, next, |c| t.open(vis, c)).unwrap_or(Action::MoveForward);
    Ok(FollowStep::Act(action))
}

/// Per-recovery state of a near-frontier escape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NearEscape {
    pub frontier: CellPos,
    pub steps: usize,
}

impl NearEscape {
    pub fn new(frontier: CellPos) -> Self {
        Self { frontier, steps: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EscapeStep {
    Act(Action),
    Reached,
    /// Budget spent without reaching the frontier; the caller blacklists it.
    BudgetSpent,
}

/// One fine-grained step towards a close frontier, chosen by the reasoner
/// among the five motion actions.
pub fn near_frontier_escape(
    obs: &Observation,
    vis: &VisibilityMap,
    esc: &mut NearEscape,
    reasoner: &dyn Reasoner,
    target: &str,
    cfg: &RecoveryConfig,
) -> EscapeStep {
    if obs.agent_pose.distance_to_cell(esc.frontier) <= cfg.capture_radius_m {
        return EscapeStep::Reached;
    }
    if esc.steps >= cfg.max_escape_steps {
        return EscapeStep::BudgetSpent;
    }
    esc.steps += 1;
    EscapeStep::Act(fine_action(obs, vis, esc.frontier, reasoner, target))
}

/// Asks the reasoner for one motion action towards `goal`.
pub fn fine_action(obs: &Observation, vis: &VisibilityMap, goal: CellPos, reasoner: &dyn Reasoner, target: &str) -> Action {
    let q = fine_action_query(obs, vis, goal, target);
    let d = reasoner.decide(&q);
    match d.first().and_then(|i| q.candidates.get(i)) {
        Some(Candidate::Action { action }) => *action,
        _ => Action::TurnLeft,
    }
}

/// Frontier cells that failed an escape and must not be selected again.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Blacklist {
    cells: BTreeSet<(usize, CellPos)>,
}

impl Blacklist {
    pub fn insert(&mut self, floor: usize, cell: CellPos) {
        self.cells.insert((floor, cell));
    }

    pub fn contains(&self, floor: usize, cell: CellPos) -> bool {
        self.cells.contains(&(floor, cell))
    }

    /// A frontier is excluded when any of its cells is blacklisted.
    pub fn excludes(&self, floor: usize, members: &[CellPos]) -> bool {
        members.iter().any(|&c| self.contains(floor, c))
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}
