//! The per-episode controller: perception, map upkeep, triggers, state
//! transitions and the policy of each state.

use crate::config::EpisodeConfig;
use crate::fast_thinking::{select_frontier, ErConfig, ErState, SelectParams, UncertaintyField};
use crate::grid::CellPos;
use crate::locomotion::{drive_toward, greedy_step};
use crate::mapping::{FloorMaps, Frontier, VisState};
use crate::priors::TargetPriors;
use crate::reasoner::{build_scene_description, map_sketch, Candidate, QueryKind, Reasoner, ReasonerQuery};
use crate::recovery::{
    astar, fine_action, follow_plan, near_frontier_escape, plan_to, plan_traversal, Blacklist, EscapeStep, FollowStep,
    NearEscape, WaypointPlan,
};
use crate::reminiscing::{find_staircase, on_floor_change, verify_targets, StairTarget};
use crate::state_machine::{
    detect_stuck, transition, AgentState, FrontierContext, LogLine, PoseHistory, RecoveryMode, Triggers,
};
use crate::world::{Action, MultiFloorWorld, Observation, Pose};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

/// Triggers raised by a policy for the next step's transition.
#[derive(Debug, Clone, Copy, Default)]
struct Pending {
    recovery_done: bool,
    reminisce_done: bool,
    slow_decision_done: bool,
    floor_changed: bool,
}

#[derive(Debug, Clone)]
enum RecoveryCtl {
    Far { plan: WaypointPlan, steps: usize },
    Near(NearEscape),
}

/// Keypoints still to visit during target verification.
#[derive(Debug, Clone, Default)]
struct VerifyCtl {
    queue: Vec<usize>,
    plan: Option<WaypointPlan>,
}

#[derive(Debug, Clone)]
enum StairGoal {
    /// Walk onto a stair cell that is on the map.
    Stair { cell: CellPos, plan: Option<WaypointPlan> },
    /// Walk to a keypoint, then align towards the stair its view showed.
    KeyPoint {
        index: usize,
        plan: Option<WaypointPlan>,
        stair_cell: Option<CellPos>,
        align_steps: usize,
    },
}

#[derive(Debug, Clone, Default)]
struct StairCtl {
    tried: BTreeSet<usize>,
    goal: Option<StairGoal>,
}

pub(super) struct Agent<'a> {
    world: &'a MultiFloorWorld,
    cfg: &'a EpisodeConfig,
    priors: &'a TargetPriors,
    reasoner: &'a dyn Reasoner,
    pub pose: Pose,
    pub maps: BTreeMap<usize, FloorMaps>,
    visited: BTreeSet<usize>,
    pub state: AgentState,
    history: PoseHistory,
    n_total: BTreeMap<usize, usize>,
    blacklist: Blacklist,
    pending: Pending,
    seen_doors: BTreeSet<(usize, CellPos)>,
    region: Option<u32>,
    recovery: Option<RecoveryCtl>,
    verify: VerifyCtl,
    stairs: StairCtl,
    rng: ChaCha8Rng,
    pub log: Vec<LogLine>,
}

/// What a step produced.
pub(super) struct StepOutcome {
    pub action: Action,
}

impl<'a> Agent<'a> {
    pub fn new(
        world: &'a MultiFloorWorld,
        cfg: &'a EpisodeConfig,
        priors: &'a TargetPriors,
        reasoner: &'a dyn Reasoner,
        rng: ChaCha8Rng,
    ) -> Self {
        let pose = world.start;
        let mut maps = BTreeMap::new();
        let (w, h) = floor_size(world, pose.floor);
        on_floor_change(&mut maps, pose.floor, w, h);
        let mut history = PoseHistory::new(cfg.stuck.n_rec);
        history.push(&pose);
        Self {
            world,
            cfg,
            priors,
            reasoner,
            pose,
            maps,
            visited: BTreeSet::from([pose.floor]),
            state: AgentState::default(),
            history,
            n_total: BTreeMap::new(),
            blacklist: Blacklist::default(),
            pending: Pending::default(),
            seen_doors: BTreeSet::new(),
            region: None,
            recovery: None,
            verify: VerifyCtl::default(),
            stairs: StairCtl::default(),
            rng,
            log: Vec::new(),
        }
    }

    fn floor(&self) -> usize {
        self.pose.floor
    }

    fn fmaps(&self) -> &FloorMaps {
        &self.maps[&self.pose.floor]
    }

    /// Senses, dropping target-related detections at the configured rates.
    fn sense(&mut self) -> Observation {
        let mut obs = self.world.sense(&self.pose, self.cfg.sensor.fov_deg, self.cfg.sensor.range_m);
        if !self.cfg.detection_noise.is_empty() {
            for vc in &mut obs.visible_cells {
                let p = vc.label.category.as_ref().and_then(|c| self.cfg.detection_noise.get(c)).copied();
                if let Some(p) = p {
                    if p > 0.0 && self.rng.gen::<f64>() < p {
                        vc.label.category = None;
                    }
                }
            }
        }
        obs
    }

    /// Known target cells on the current floor that a path reaches, nearest
    /// first, as the first step of that path.
    fn approach_step(&self) -> Option<Action> {
        let m = self.fmaps();
        let here = self.pose.cell();
        let mut targets: Vec<CellPos> = m
            .semantics
            .iter()
            .filter(|(c, l)| {
                l.as_ref().and_then(|l| l.category.as_deref()) == Some(self.priors.target.as_str())
                    && matches!(m.visibility.state(*c), Some(VisState::Free | VisState::Door))
            })
            .map(|(c, _)| c)
            .collect();
        if targets.is_empty() {
            return None;
        }
        targets.sort_by(|a, b| {
            a.metric_distance(here).total_cmp(&b.metric_distance(here)).then(a.cmp(b))
        });
        if targets.contains(&here) && self.pose.distance_to_cell(here) <= self.cfg.success_radius_m {
            return Some(Action::Stop);
        }
        targets.iter().find_map(|&t| {
            let path = astar(&m.visibility, here, t).ok()?;
            let tr = plan_traversal(&m.visibility, here, t);
            let next = if path.len() >= 2 { path[1] } else { here };
            Some(drive_toward(&self.pose, next, |c| tr.open(&m.visibility, c)).unwrap_or(Action::Stop))
        })
    }

    /// Rebuilds and scores the current floor's frontiers, dropping
    /// blacklisted ones.
    fn refresh_frontiers(&mut self) {
        let floor = self.floor();
        let here = self.pose.cell();
        let visited = self.visited.clone();
        let blacklist = self.blacklist.clone();
        let m = self.maps.get_mut(&floor).expect("current floor has maps");
        let mut fs = m.extract_frontiers(self.cfg.mapping.merge_radius_cells, |f| !visited.contains(&f));
        fs.retain(|f| !blacklist.excludes(floor, &f.members));
        m.frontiers = fs;
        m.score_frontiers(here, self.priors, &self.cfg.mapping);
        let n = m.intra_frontiers().count();
        let e = self.n_total.entry(floor).or_insert(0);
        *e = (*e).max(n);
    }

    /// Reachable intra-floor frontiers, restricted to the chosen region while
    /// that region still has some.
    fn usable_frontiers(&mut self) -> Vec<Frontier> {
        let m = self.fmaps();
        let usable: Vec<Frontier> = m
            .intra_frontiers()
            .filter(|f| f.distance_m.is_finite())
            .cloned()
            .collect();
        if let Some(room) = self.region {
            let in_room: Vec<Frontier> = usable.iter().filter(|f| self.room_of(f.cell) == Some(room)).cloned().collect();
            if !in_room.is_empty() {
                return in_room;
            }
            self.region = None;
        }
        usable
    }

    fn room_of(&self, c: CellPos) -> Option<u32> {
        self.fmaps().semantics.get(c).cloned().flatten().and_then(|l| l.room_id)
    }

    fn weights(&self, step: usize, n_frontier: usize) -> (f64, f64) {
        let p = &self.cfg.planner;
        if !self.cfg.ablation.dynamic_weights {
            return (p.static_alpha, p.static_beta);
        }
        let m = self.fmaps();
        let er = ErState::compute(
            step as u32,
            m.visibility.unknown_count(),
            m.visibility.width() * m.visibility.height(),
            n_frontier,
            self.n_total.get(&self.floor()).copied().unwrap_or(0),
            &ErConfig {
                sigma: p.er_weights,
                k_max: self.cfg.k_max(),
                alpha_min: p.alpha_min,
                beta_max: p.beta_max,
            },
        );
        (er.alpha, er.beta)
    }

    /// The frontier fast thinking would pursue now.
    fn select(&mut self, step: usize) -> Option<Frontier> {
        let usable = self.usable_frontiers();
        if usable.is_empty() {
            return None;
        }
        let (alpha, beta) = self.weights(step, usable.len());
        let p = &self.cfg.planner;
        let field = UncertaintyField::from_frontiers(&usable, p.sigma_g_m, p.boundary_base_score);
        let params = SelectParams {
            alpha,
            beta,
            fov_deg: p.coverage_fov_deg,
            range_m: self.cfg.coverage_range_m(),
            lambda_overlap: p.lambda_overlap,
        };
        let sel = select_frontier(&self.fmaps().visibility, &usable, &field, &params).ok()?;
        log::debug!(
            "step {step}: alpha {alpha:.3} beta {beta:.3} -> {:?} {:?}",
            sel.frontier.cell,
            sel.scores
                .iter()
                .map(|c| (c.cell.x, c.cell.y, c.value, c.info_norm))
                .collect::<Vec<_>>()
        );
        Some(sel.frontier)
    }

    /// Nearest reachable stair cell on this floor; with `unvisited_only` only
    /// stairs leading to floors not seen yet.
    fn nearest_stair(&self, unvisited_only: bool) -> Option<CellPos> {
        let m = self.fmaps();
        let here = self.pose.cell();
        let floor = self.floor();
        let mut best: Option<(f64, CellPos)> = None;
        for (c, s) in m.visibility.grid().iter() {
            let VisState::Stair(dir) = *s else { continue };
            let Some(dest) = dir.target_floor(floor) else { continue };
            if unvisited_only && self.visited.contains(&dest) {
                continue;
            }
            if let Ok(path) = astar(&m.visibility, here, c) {
                let d = crate::recovery::path_length(&path);
                if best.is_none_or(|b| (d, c) < b) {
                    best = Some((d, c));
                }
            }
        }
        best.map(|b| b.1)
    }

    /// Door sighting that warrants a region choice: a door not seen before and
    /// at least two distinct regions in view.
    fn door_seen(&mut self, obs: &Observation) -> bool {
        let floor = self.floor();
        let fresh = obs
            .door_cells_in_view
            .iter()
            .filter(|&&d| self.seen_doors.insert((floor, d)))
            .count();
        if fresh == 0 {
            return false;
        }
        let scene = build_scene_description(obs, &self.priors.target);
        let rooms: BTreeSet<(&str, Option<u32>)> = scene
            .rooms
            .iter()
            .filter(|r| r.room_type != "unknown")
            .map(|r| (r.room_type.as_str(), r.room_id))
            .collect();
        rooms.len() >= 2
    }

    /// Region choice at a doorway: one candidate per visible room that still
    /// has a frontier.
    fn slow_decision(&mut self, obs: &Observation) {
        let scene = build_scene_description(obs, &self.priors.target);
        let usable = self.usable_frontiers();
        let mut candidates = Vec::new();
        let mut seen_rooms = BTreeSet::new();
        for r in &scene.rooms {
            let Some(room) = r.room_id else { continue };
            if !seen_rooms.insert(room) {
                continue;
            }
            let best = usable
                .iter()
                .filter(|f| self.room_of(f.cell) == Some(room))
                .max_by(|a, b| a.value.total_cmp(&b.value).then(b.cell.cmp(&a.cell)));
            if let Some(f) = best {
                candidates.push(Candidate::Region {
                    room_type: r.room_type.clone(),
                    room_id: Some(room),
                    via_door: r.via_door,
                    frontier: f.cell,
                });
            }
        }
        let chosen = match candidates.len() {
            0 => None,
            1 => Some(0),
            _ => {
                let q = ReasonerQuery {
                    kind: QueryKind::FrontierChoice,
                    target: self.priors.target.clone(),
                    scene: Some(scene),
                    candidates: candidates.clone(),
                    fine: None,
                    map_sketch: map_sketch(&self.fmaps().visibility, self.pose.cell(), 12, None),
                };
                self.reasoner.decide(&q).first()
            }
        };
        if let Some(Candidate::Region { room_id, .. }) = chosen.and_then(|i| candidates.get(i)) {
            self.region = *room_id;
        }
        self.pending.slow_decision_done = true;
    }

    fn enter(&mut self, state: AgentState, obs: &Observation) {
        self.history.clear();
        self.recovery = None;
        match state {
            AgentState::Recovery { mode, frontier } => {
                let here = self.pose.cell();
                self.recovery = match mode {
                    RecoveryMode::FarFrontier => {
                        match plan_to(&self.fmaps().visibility, here, frontier, self.cfg.recovery.waypoint_interval_m) {
                            Ok(plan) => Some(RecoveryCtl::Far { plan, steps: 0 }),
                            Err(_) => {
                                self.blacklist.insert(self.floor(), frontier);
                                self.pending.recovery_done = true;
                                None
                            }
                        }
                    }
                    RecoveryMode::NearFrontier => Some(RecoveryCtl::Near(NearEscape::new(frontier))),
                };
            }
            AgentState::Exploration { .. } if state == AgentState::EXP_SLOW => self.slow_decision(obs),
            AgentState::Reminiscing { .. } if state == AgentState::REM_VERIFY => {
                let queue = verify_targets(self.fmaps(), &self.priors.target, self.reasoner);
                if queue.is_empty() {
                    self.pending.reminisce_done = true;
                }
                self.verify = VerifyCtl { queue, plan: None };
            }
            AgentState::Reminiscing { .. } => {
                self.stairs = StairCtl::default();
            }
            _ => {}
        }
    }

    fn explore_action(&mut self, goal: Option<&Frontier>) -> Action {
        if let Some(f) = goal {
            return greedy_step(&self.pose, f.cell, &self.fmaps().visibility);
        }
        // nothing left to explore here: without reminiscing, take any stair
        if !self.cfg.ablation.reminiscing {
            if let Some(s) = self.nearest_stair(true) {
                return self.walk_to(s);
            }
        }
        Action::TurnLeft
    }

    /// One A*-guided step onto `goal`; turns in place when no path exists.
    fn walk_to(&self, goal: CellPos) -> Action {
        let m = &self.fmaps().visibility;
        let here = self.pose.cell();
        match astar(m, here, goal) {
            Ok(path) if path.len() >= 2 => {
                let t = plan_traversal(m, here, goal);
                drive_toward(&self.pose, path[1], |c| t.open(m, c)).unwrap_or(Action::MoveForward)
            }
            _ => Action::TurnLeft,
        }
    }

    fn recovery_action(&mut self, obs: &Observation) -> Option<Action> {
        let floor = self.floor();
        let budget = self.cfg.recovery.max_escape_steps;
        let capture = self.cfg.recovery.capture_radius_m;
        match self.recovery.as_mut()? {
            RecoveryCtl::Far { plan, steps } => {
                *steps += 1;
                // a plan that keeps failing is abandoned like a near escape
                let limit = 4 * plan.path.len() + 4 * budget;
                let goal = plan.goal();
                let vis = &self.maps[&floor].visibility;
                let r = if *steps > limit { None } else { follow_plan(plan, &self.pose, vis, capture).ok() };
                match r {
                    Some(FollowStep::Act(a)) => Some(a),
                    Some(FollowStep::Done) => {
                        self.finish_recovery();
                        None
                    }
                    None => {
                        self.blacklist.insert(floor, goal);
                        self.finish_recovery();
                        None
                    }
                }
            }
            RecoveryCtl::Near(esc) => {
                let mut e = *esc;
                let vis = self.maps[&floor].visibility.clone();
                let step = near_frontier_escape(obs, &vis, &mut e, self.reasoner, &self.priors.target, &self.cfg.recovery);
                match step {
                    EscapeStep::Act(a) => {
                        self.recovery = Some(RecoveryCtl::Near(e));
                        Some(a)
                    }
                    EscapeStep::Reached => {
                        self.finish_recovery();
                        None
                    }
                    EscapeStep::BudgetSpent => {
                        self.blacklist.insert(floor, e.frontier);
                        self.finish_recovery();
                        None
                    }
                }
            }
        }
    }

    fn finish_recovery(&mut self) {
        self.recovery = None;
        self.pending.recovery_done = true;
    }

    fn verify_action(&mut self) -> Option<Action> {
        let floor = self.floor();
        let capture = self.cfg.recovery.capture_radius_m;
        loop {
            let &idx = self.verify.queue.first()?;
            let pos = self.maps[&floor].keypoints[idx].pos;
            if self.verify.plan.is_none() {
                match plan_to(&self.fmaps().visibility, self.pose.cell(), pos, self.cfg.recovery.waypoint_interval_m) {
                    Ok(p) => self.verify.plan = Some(p),
                    Err(_) => {
                        self.consume_verified(idx);
                        continue;
                    }
                }
            }
            let vis = &self.maps[&floor].visibility;
            let plan = self.verify.plan.as_mut().expect("just planned");
            match follow_plan(plan, &self.pose, vis, capture) {
                Ok(FollowStep::Act(a)) => return Some(a),
                // arrived: the fresh view taken here is the confirmation; one
                // turn in place gives the sensor another look
                Ok(FollowStep::Done) => {
                    self.consume_verified(idx);
                    return Some(Action::TurnLeft);
                }
                Err(_) => {
                    self.consume_verified(idx);
                }
            }
        }
    }

    fn consume_verified(&mut self, idx: usize) {
        let floor = self.floor();
        self.maps.get_mut(&floor).expect("floor maps").keypoints[idx].consumed = true;
        self.verify.queue.remove(0);
        self.verify.plan = None;
        if self.verify.queue.is_empty() {
            self.pending.reminisce_done = true;
        }
    }

    fn stair_action(&mut self, obs: &Observation) -> Option<Action> {
        let floor = self.floor();
        let capture = self.cfg.recovery.capture_radius_m;
        let interval = self.cfg.recovery.waypoint_interval_m;
        let budget = self.cfg.recovery.max_escape_steps;
        for _ in 0..4 {
            if self.stairs.goal.is_none() {
                let found = find_staircase(self.fmaps(), &self.stairs.tried, &self.priors.target, self.reasoner);
                self.stairs.goal = match found {
                    Ok(StairTarget::Frontier(cell)) => Some(StairGoal::Stair { cell, plan: None }),
                    Ok(StairTarget::KeyPoint { index, stair_cell, .. }) => Some(StairGoal::KeyPoint {
                        index,
                        plan: None,
                        stair_cell,
                        align_steps: 0,
                    }),
                    Err(_) => {
                        // no candidates left: any stair at all, else keep exploring
                        if let Some(s) = self.nearest_stair(false) {
                            return Some(self.walk_to(s));
                        }
                        return None;
                    }
                };
            }
            let vis = self.maps[&floor].visibility.clone();
            match self.stairs.goal.as_mut().expect("goal set") {
                StairGoal::Stair { cell, plan } => {
                    let cell = *cell;
                    if plan.is_none() {
                        match plan_to(&vis, self.pose.cell(), cell, interval) {
                            Ok(p) => *plan = Some(p),
                            Err(_) => {
                                self.stairs.goal = None;
                                self.blacklist.insert(floor, cell);
                                continue;
                            }
                        }
                    }
                    let p = plan.as_mut().expect("planned");
                    match follow_plan(p, &self.pose, &vis, capture) {
                        Ok(FollowStep::Act(a)) => return Some(a),
                        // the capture radius stops one cell short of the stair
                        Ok(FollowStep::Done) => return Some(self.walk_to(cell)),
                        Err(_) => {
                            self.stairs.goal = None;
                            self.blacklist.insert(floor, cell);
                        }
                    }
                }
                StairGoal::KeyPoint {
                    index,
                    plan,
                    stair_cell,
                    align_steps,
                } => {
                    let index = *index;
                    let pos = self.maps[&floor].keypoints[index].pos;
                    let arrived = plan.as_ref().is_some_and(WaypointPlan::is_done);
                    if !arrived {
                        if plan.is_none() {
                            match plan_to(&vis, self.pose.cell(), pos, interval) {
                                Ok(p) => *plan = Some(p),
                                Err(_) => {
                                    self.stairs.tried.insert(index);
                                    self.stairs.goal = None;
                                    continue;
                                }
                            }
                        }
                        match follow_plan(plan.as_mut().expect("planned"), &self.pose, &vis, capture) {
                            Ok(FollowStep::Act(a)) => return Some(a),
                            Ok(FollowStep::Done) => {}
                            Err(_) => {
                                self.stairs.tried.insert(index);
                                self.stairs.goal = None;
                                continue;
                            }
                        }
                    }
                    match *stair_cell {
                        Some(s) if *align_steps < budget => {
                            *align_steps += 1;
                            return Some(fine_action(obs, &vis, s, self.reasoner, &self.priors.target));
                        }
                        _ => {
                            self.stairs.tried.insert(index);
                            self.stairs.goal = None;
                        }
                    }
                }
            }
        }
        None
    }

    /// One perceive-decide-act cycle. Returns the executed action.
    pub fn step(&mut self, t: usize) -> StepOutcome {
        let obs = self.sense();
        let floor = self.floor();
        self.maps
            .get_mut(&floor)
            .expect("current floor has maps")
            .integrate(&obs, self.cfg.sensor.stair_detect_range_m)
            .expect("observation comes from the agent's floor");

        if let Some(action) = self.approach_step() {
            self.log.push(LogLine {
                step: t,
                state: self.state,
                triggers: Triggers::default(),
                pose: self.pose,
                action,
                frontier: None,
                frontier_distance_m: None,
                approaching: true,
                keypoints: vec![],
            });
            return self.act(action);
        }

        self.refresh_frontiers();
        let goal = self.select(t);
        let ctx = goal.as_ref().map(|f| FrontierContext {
            cell: f.cell,
            distance_m: f.distance_m,
        });
        let door_seen = self.door_seen(&obs);
        let stuck = self.cfg.ablation.recovery
            && self.state.is_exploration()
            && detect_stuck(&self.history, &self.cfg.stuck).unwrap_or(false);
        let pending = std::mem::take(&mut self.pending);
        let triggers = Triggers {
            stuck,
            exhausted: self.cfg.ablation.reminiscing && goal.is_none(),
            recovery_done: pending.recovery_done,
            reminisce_done: pending.reminisce_done,
            door_seen: self.cfg.ablation.slow_thinking && door_seen,
            slow_decision_done: pending.slow_decision_done,
            floor_changed: pending.floor_changed,
        };
        let next = transition(self.state, &triggers, ctx, self.cfg.stuck.d_split_m);
        if next != self.state {
            self.state = next;
            self.enter(next, &obs);
        }

        let action = match self.state {
            AgentState::Recovery { .. } => self.recovery_action(&obs),
            AgentState::Reminiscing { .. } if self.state == AgentState::REM_VERIFY => self.verify_action(),
            AgentState::Reminiscing { .. } => self.stair_action(&obs),
            AgentState::Exploration { .. } => None,
        };
        // the exploration goal may have moved into a newly chosen region
        let goal = if self.region.is_some() && action.is_none() { self.select(t) } else { goal };
        let action = action.unwrap_or_else(|| self.explore_action(goal.as_ref()));

        let here = self.pose;
        let kp_frontier = goal.as_ref().filter(|_| self.state.is_exploration()).map(|f| f.cell);
        let m = self.maps.get_mut(&floor).expect("current floor has maps");
        let before = m.keypoints.len();
        m.update_keypoints(&obs, &here, kp_frontier, t, self.cfg.sensor.range_m, &self.cfg.mapping);
        let keypoints = m.keypoints[before..].iter().map(|k| k.pos).collect();

        self.log.push(LogLine {
            step: t,
            state: self.state,
            triggers,
            pose: here,
            action,
            frontier: ctx.map(|c| c.cell),
            frontier_distance_m: ctx.map(|c| c.distance_m),
            approaching: false,
            keypoints,
        });
        self.act(action)
    }

    fn act(&mut self, action: Action) -> StepOutcome {
        let before = self.pose;
        let (next, _blocked) = self.world.step(&before, action);
        self.pose = next;
        if next.floor != before.floor {
            let (w, h) = floor_size(self.world, next.floor);
            on_floor_change(&mut self.maps, next.floor, w, h);
            self.visited.insert(next.floor);
            self.pending = Pending {
                floor_changed: true,
                ..Pending::default()
            };
            self.recovery = None;
            self.verify = VerifyCtl::default();
            self.stairs = StairCtl::default();
            self.region = None;
            self.history.clear();
        }
        self.history.push(&self.pose);
        StepOutcome { action }
    }
}

fn floor_size(world: &MultiFloorWorld, floor: usize) -> (usize, usize) {
    let g = &world.floor(floor).grid;
    (g.width(), g.height())
}
