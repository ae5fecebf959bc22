//! Ground-truth multi-floor grid environment: scenario loading, discrete
//! action execution, and a ray-cast field-of-view sensor.
//!
//! Poses are continuous over a 0.25 m lattice. Headings come in 30° steps
//! measured from +x towards +y, so `TurnLeft` increments the heading index.

mod scenario;

pub use scenario::{load_scenario, FloorSpec, ScenarioError, ScenarioFile, SemanticSpec, StairSpec, StartSpec};

use crate::grid::{CellPos, Grid, CELL_SIZE, MOVES8};
use crate::raycast::{cast_fan, RayHit};
use crate::search::dijkstra;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellKind {
    Free,
    Obstacle,
    Door,
    StairUp,
    StairDown,
}

impl CellKind {
    pub fn is_stair(self) -> bool {
        matches!(self, CellKind::StairUp | CellKind::StairDown)
    }

    pub fn is_traversable(self) -> bool {
        self != CellKind::Obstacle
    }

    pub fn legend(self) -> char {
        match self {
            CellKind::Free => '.',
            CellKind::Obstacle => '#',
            CellKind::Door => 'D',
            CellKind::StairUp => 'U',
            CellKind::StairDown => 'd',
        }
    }
}

/// Scenario annotation for one cell. Every traversable cell carries a room.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SemanticLabel {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub room_id: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub room_type: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldCell {
    pub kind: CellKind,
    pub label: SemanticLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StairLink {
    pub floor: usize,
    pub pos: CellPos,
}

#[derive(Debug, Clone)]
pub struct Floor {
    pub grid: Grid<WorldCell>,
    pub stair_links: BTreeMap<CellPos, StairLink>,
}

impl Floor {
    pub fn kind(&self, pos: CellPos) -> Option<CellKind> {
        self.grid.get(pos).map(|c| c.kind)
    }
}

/// One of twelve discrete orientations, stored as a multiple of 30°.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i32", try_from = "i32")]
pub struct Heading(u8);

impl Heading {
    pub const COUNT: u8 = 12;
    pub const STEP_DEG: i32 = 30;

    pub fn from_index(i: i32) -> Self {
        Heading(i.rem_euclid(i32::from(Self::COUNT)) as u8)
    }

    pub fn from_degrees(deg: i32) -> Option<Self> {
        (deg % Self::STEP_DEG == 0).then(|| Self::from_index(deg / Self::STEP_DEG))
    }

    pub fn index(self) -> i32 {
        i32::from(self.0)
    }

    pub fn degrees(self) -> i32 {
        self.index() * Self::STEP_DEG
    }

    pub fn left(self) -> Self {
        Self::from_index(self.index() + 1)
    }

    pub fn right(self) -> Self {
        Self::from_index(self.index() - 1)
    }

    /// Exact unit vector; axis-aligned headings have exact zero components.
    pub fn unit(self) -> (f64, f64) {
        const C: f64 = 0.866_025_403_784_438_6;
        const TABLE: [(f64, f64); 12] = [
            (1.0, 0.0),
            (C, 0.5),
            (0.5, C),
            (0.0, 1.0),
            (-0.5, C),
            (-C, 0.5),
            (-1.0, 0.0),
            (-C, -0.5),
            (-0.5, -C),
            (0.0, -1.0),
            (0.5, -C),
            (C, -0.5),
        ];
        TABLE[self.0 as usize]
    }

    /// Signed number of left turns (positive) or right turns (negative) to
    /// reach `target`, choosing the shorter way; a half turn counts as left.
    pub fn turns_to(self, target: Heading) -> i32 {
        let d = (target.index() - self.index()).rem_euclid(12);
        if d <= 6 {
            d
        } else {
            d - 12
        }
    }
}

impl From<Heading> for i32 {
    fn from(h: Heading) -> i32 {
        h.degrees()
    }
}

impl TryFrom<i32> for Heading {
    type Error = String;
    fn try_from(deg: i32) -> Result<Self, Self::Error> {
        Heading::from_degrees(deg).ok_or_else(|| format!("heading {deg}° is not a multiple of 30°"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub floor: usize,
    pub x: f64,
    pub y: f64,
    #[serde(rename = "heading_deg")]
    pub heading: Heading,
}

impl Pose {
    pub fn cell(&self) -> CellPos {
        CellPos::containing(self.x, self.y)
    }

    pub fn distance_to_cell(&self, cell: CellPos) -> f64 {
        let (cx, cy) = cell.center();
        (self.x - cx).hypot(self.y - cy)
    }

    /// True when the pose sits on a cell centre (up to rounding).
    pub fn on_lattice(&self) -> bool {
        self.distance_to_cell(self.cell()) < 1e-9
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    MoveForward,
    TurnLeft,
    TurnRight,
    LookUp,
    LookDown,
    Stop,
}

impl Action {
    pub const ALL: [Action; 6] = [
        Action::MoveForward,
        Action::TurnLeft,
        Action::TurnRight,
        Action::LookUp,
        Action::LookDown,
        Action::Stop,
    ];

    /// The five non-terminal actions offered to the reasoner for fine control.
    pub const MOTION: [Action; 5] = [
        Action::MoveForward,
        Action::TurnLeft,
        Action::TurnRight,
        Action::LookUp,
        Action::LookDown,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Action::MoveForward => "MOVE_FORWARD",
            Action::TurnLeft => "TURN_LEFT",
            Action::TurnRight => "TURN_RIGHT",
            Action::LookUp => "LOOK_UP",
            Action::LookDown => "LOOK_DOWN",
            Action::Stop => "STOP",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibleCell {
    pub floor: usize,
    pub pos: CellPos,
    pub kind: CellKind,
    pub label: SemanticLabel,
    /// First door the line of sight passed through, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub via_door: Option<CellPos>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub agent_pose: Pose,
    /// Sorted by cell position.
    pub visible_cells: Vec<VisibleCell>,
    pub door_cells_in_view: Vec<CellPos>,
}

impl Observation {
    pub fn floor(&self) -> usize {
        self.agent_pose.floor
    }

    pub fn categories(&self) -> impl Iterator<Item = &str> + '_ {
        self.visible_cells.iter().filter_map(|c| c.label.category.as_deref())
    }

    pub fn contains_category(&self, category: &str) -> bool {
        self.categories().any(|c| c == category)
    }

    pub fn cell(&self, pos: CellPos) -> Option<&VisibleCell> {
        self.visible_cells
            .binary_search_by(|c| c.pos.cmp(&pos))
            .ok()
            .map(|i| &self.visible_cells[i])
    }
}

/// A validated, immutable scenario.
#[derive(Debug, Clone)]
pub struct MultiFloorWorld {
    pub name: String,
    pub tags: Vec<String>,
    pub floors: Vec<Floor>,
    pub start: Pose,
    pub target_category: String,
    pub optimal_path_length_m: Option<f64>,
}

impl MultiFloorWorld {
    /// Builds and fully validates a world, including target presence and
    /// start connectivity.
    pub fn from_scenario(file: &ScenarioFile) -> Result<Self, ScenarioError> {
        scenario::build(file, true)
    }

    /// Builds a world checking only structural invariants. Used for worlds
    /// that intentionally contain no reachable target.
    pub fn from_scenario_without_target_checks(file: &ScenarioFile) -> Result<Self, ScenarioError> {
        scenario::build(file, false)
    }

    pub fn floor(&self, index: usize) -> &Floor {
        &self.floors[index]
    }

    pub fn cell(&self, floor: usize, pos: CellPos) -> Option<&WorldCell> {
        self.floors.get(floor).and_then(|f| f.grid.get(pos))
    }

    pub fn cell_count(&self) -> usize {
        self.floors.iter().map(|f| f.grid.len()).sum()
    }

    /// Positions of target-category cells on one floor.
    pub fn target_cells(&self, floor: usize) -> Vec<CellPos> {
        self.floors[floor]
            .grid
            .iter()
            .filter(|(_, c)| c.label.category.as_deref() == Some(self.target_category.as_str()))
            .map(|(p, _)| p)
            .collect()
    }

    /// Ray-cast sensor: every cell entered by a ray over the FOV cone before
    /// (and including) the first obstacle, within `range_m`.
    pub fn sense(&self, pose: &Pose, fov_deg: f64, range_m: f64) -> Observation {
        let floor = &self.floors[pose.floor];
        let seen = cast_fan(
            (pose.x, pose.y),
            f64::from(pose.heading.degrees()),
            fov_deg,
            range_m,
            |c| match floor.kind(c) {
                None => RayHit::OutOfBounds,
                Some(CellKind::Obstacle) => RayHit::Opaque,
                Some(CellKind::Door) => RayHit::Portal,
                Some(_) => RayHit::Transparent,
            },
        );
        let mut visible_cells = Vec::with_capacity(seen.len());
        let mut door_cells_in_view = Vec::new();
        for (pos, via_door) in seen {
            let Some(cell) = floor.grid.get(pos) else { continue };
            if cell.kind == CellKind::Door {
                door_cells_in_view.push(pos);
            }
            visible_cells.push(VisibleCell {
                floor: pose.floor,
                pos,
                kind: cell.kind,
                label: cell.label.clone(),
                via_door,
            });
        }
        Observation {
            agent_pose: *pose,
            visible_cells,
            door_cells_in_view,
        }
    }

    /// Executes one action. Returns the new pose and whether a forward move
    /// was blocked. Entering a stair cell relocates the agent to the linked
    /// cell on the adjacent floor.
    pub fn step(&self, pose: &Pose, action: Action) -> (Pose, bool) {
        let mut next = *pose;
        match action {
            Action::TurnLeft => next.heading = pose.heading.left(),
            Action::TurnRight => next.heading = pose.heading.right(),
            Action::LookUp | Action::LookDown | Action::Stop => {}
            Action::MoveForward => {
                let (ux, uy) = pose.heading.unit();
                next.x = pose.x + ux * CELL_SIZE;
                next.y = pose.y + uy * CELL_SIZE;
                let floor = &self.floors[pose.floor];
                let dest = next.cell();
                match floor.kind(dest) {
                    None | Some(CellKind::Obstacle) => return (*pose, true),
                    Some(kind) if kind.is_stair() && dest != pose.cell() => {
                        if let Some(link) = floor.stair_links.get(&dest) {
                            let (x, y) = link.pos.center();
                            next.floor = link.floor;
                            next.x = x;
                            next.y = y;
                        }
                    }
                    Some(_) => {}
                }
            }
        }
        (next, false)
    }

    /// Distance from the pose to the nearest target cell centre on the same
    /// floor; other floors are infinitely far.
    pub fn distance_to_target(&self, pose: &Pose, target_category: &str) -> f64 {
        self.floors[pose.floor]
            .grid
            .iter()
            .filter(|(_, c)| c.label.category.as_deref() == Some(target_category))
            .map(|(p, _)| pose.distance_to_cell(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_success(&self, pose: &Pose, target_category: &str, success_radius_m: f64, stop_issued: bool) -> bool {
        stop_issued && self.distance_to_target(pose, target_category) <= success_radius_m
    }

    /// Lattice moves available from `pos` in the ground truth: 8-connected,
    /// no corner cutting, entering a stair cell lands on its partner.
    pub(crate) fn ground_truth_moves(&self, floor: usize, pos: CellPos, out: &mut Vec<((usize, CellPos), f64)>) {
        let f = &self.floors[floor];
        let open = |c: CellPos| f.kind(c).is_some_and(CellKind::is_traversable);
        for &(dx, dy, cost) in &MOVES8 {
            let n = pos.offset(dx, dy);
            if !open(n) {
                continue;
            }
            if dx != 0 && dy != 0 && !(open(pos.offset(dx, 0)) && open(pos.offset(0, dy))) {
                continue;
            }
            let dest = match f.stair_links.get(&n) {
                Some(link) if f.kind(n).is_some_and(CellKind::is_stair) => (link.floor, link.pos),
                _ => (floor, n),
            };
            out.push((dest, cost));
        }
    }

    /// Multi-floor shortest path length from the start to the nearest
    /// traversable target cell (or, if the target only occupies obstacles, to
    /// the nearest cell next to one).
    pub fn optimal_path_length(&self) -> Option<f64> {
        let start = (self.start.floor, self.start.cell());
        let target = self.target_category.as_str();
        let is_target = |floor: usize, pos: CellPos| {
            self.cell(floor, pos).is_some_and(|c| c.kind.is_traversable() && c.label.category.as_deref() == Some(target))
        };
        let any_traversable_target =
            (0..self.floors.len()).any(|f| self.floors[f].grid.positions().any(|p| is_target(f, p)));
        let goal = |(floor, pos): (usize, CellPos)| {
            if any_traversable_target {
                is_target(floor, pos)
            } else {
                MOVES8.iter().any(|&(dx, dy, _)| {
                    self.cell(floor, pos.offset(dx, dy))
                        .is_some_and(|c| c.label.category.as_deref() == Some(target))
                })
            }
        };
        let (dist, found) = dijkstra(start, |(f, p), out| self.ground_truth_moves(f, p, out), goal);
        found.map(|n| dist[&n])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn single_floor(rows: &[&str], target: &str, semantics: &[(&str, &str)]) -> ScenarioFile {
        ScenarioFile {
            name: Some("t".into()),
            tags: vec![],
            floors: vec![FloorSpec {
                grid: rows.iter().map(|r| r.to_string()).collect(),
                semantics: semantics
                    .iter()
                    .map(|(k, c)| {
                        (
                            k.to_string(),
                            SemanticSpec {
                                category: Some(c.to_string()),
                                ..Default::default()
                            },
                        )
                    })
                    .collect(),
                stairs: vec![],
            }],
            start: StartSpec {
                floor: 0,
                x: 1,
                y: 1,
                heading_deg: 0,
            },
            target_category: target.into(),
            optimal_path_length_m: None,
        }
    }

    fn two_floor(with_partner: bool) -> ScenarioFile {
        let upper = if with_partner { "d...." } else { "....." };
        ScenarioFile {
            name: None,
            tags: vec![],
            floors: vec![
                FloorSpec {
                    grid: vec![".....".into(), "....U".into()],
                    semantics: BTreeMap::new(),
                    stairs: vec![StairSpec {
                        from: [4, 1],
                        to_floor: 1,
                        to: [0, 0],
                    }],
                },
                FloorSpec {
                    grid: vec![upper.into(), ".....".into()],
                    semantics: [(
                        "3,1".to_string(),
                        SemanticSpec {
                            category: Some("bed".into()),
                            ..Default::default()
                        },
                    )]
                    .into_iter()
                    .collect(),
                    stairs: vec![],
                },
            ],
            start: StartSpec {
                floor: 0,
                x: 0,
                y: 0,
                heading_deg: 0,
            },
            target_category: "bed".into(),
            optimal_path_length_m: None,
        }
    }

    #[test]
    fn minimal_single_floor_loads() {
        let file = single_floor(&[".....", ".....", ".....", ".....", "...."], "bed", &[]);
        assert!(matches!(MultiFloorWorld::from_scenario(&file), Err(ScenarioError::Validation(_))));
        let file = single_floor(&[".....", ".....", ".....", ".....", "....."], "bed", &[("3,3", "bed")]);
        let w = MultiFloorWorld::from_scenario(&file).unwrap();
        assert_eq!(w.floors.len(), 1);
        assert_eq!(w.cell_count(), 25);
    }

    #[test]
    fn stairs_cross_link() {
        let w = MultiFloorWorld::from_scenario(&two_floor(true)).unwrap();
        let up = w.floors[0].stair_links[&CellPos::new(4, 1)];
        assert_eq!(up, StairLink { floor: 1, pos: CellPos::new(0, 0) });
        let down = w.floors[1].stair_links[&CellPos::new(0, 0)];
        assert_eq!(down, StairLink { floor: 0, pos: CellPos::new(4, 1) });
        // following a link twice returns to the origin
        let back = w.floors[down.floor].stair_links[&down.pos];
        assert_eq!(back, up);
    }

    #[test]
    fn unmatched_stair_is_rejected() {
        match MultiFloorWorld::from_scenario(&two_floor(false)) {
            Err(ScenarioError::Validation(msgs)) => {
                assert!(msgs.iter().any(|m| m.contains("unmatched stair")), "{msgs:?}")
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn disconnected_start_is_rejected() {
        let file = single_floor(&["..#..", "..#..", "..#.."], "bed", &[("4,1", "bed")]);
        match MultiFloorWorld::from_scenario(&file) {
            Err(ScenarioError::Validation(msgs)) => assert!(msgs[0].contains("disconnected start")),
            other => panic!("{other:?}"),
        }
        assert!(MultiFloorWorld::from_scenario_without_target_checks(&file).is_ok());
    }

    #[test]
    fn rooms_partition_by_doors() {
        let mut file = single_floor(&["...#...", "...D...", "...#..."], "bed", &[("5,1", "bed")]);
        file.floors[0].semantics.insert(
            "0,0".into(),
            SemanticSpec {
                room_type: Some("hallway".into()),
                ..Default::default()
            },
        );
        file.floors[0].semantics.get_mut("5,1").unwrap().room_type = Some("bedroom".into());
        let w = MultiFloorWorld::from_scenario(&file).unwrap();
        let label = |x, y| w.cell(0, CellPos::new(x, y)).unwrap().label.clone();
        assert_eq!(label(1, 2).room_type.as_deref(), Some("hallway"));
        assert_eq!(label(6, 0).room_type.as_deref(), Some("bedroom"));
        assert_ne!(label(1, 2).room_id, label(6, 0).room_id);
        assert_eq!(label(3, 1).room_type.as_deref(), Some("doorway"));
        for (_, c) in w.floors[0].grid.iter() {
            if c.kind.is_traversable() {
                assert!(c.label.room_id.is_some());
            }
        }
    }

    fn open_world(n: usize) -> MultiFloorWorld {
        let rows: Vec<String> = (0..n).map(|_| ".".repeat(n)).collect();
        let rows: Vec<&str> = rows.iter().map(String::as_str).collect();
        MultiFloorWorld::from_scenario(&single_floor(&rows, "bed", &[("0,0", "bed")])).unwrap()
    }

    fn pose_at(x: i32, y: i32, heading_deg: i32) -> Pose {
        let (cx, cy) = CellPos::new(x, y).center();
        Pose {
            floor: 0,
            x: cx,
            y: cy,
            heading: Heading::from_degrees(heading_deg).unwrap(),
        }
    }

    #[test]
    fn step_forward_and_collide() {
        let w = open_world(5);
        let p = pose_at(1, 1, 0);
        let (n, hit) = w.step(&p, Action::MoveForward);
        assert!(!hit);
        assert_eq!(n.x, p.x + 0.25);
        assert_eq!(n.y, p.y);
        let edge = pose_at(4, 1, 0);
        let (n, hit) = w.step(&edge, Action::MoveForward);
        assert!(hit);
        assert_eq!(n, edge);

        let file = single_floor(&["..#", "...", "..."], "bed", &[("0,2", "bed")]);
        let w = MultiFloorWorld::from_scenario(&file).unwrap();
        let (n, hit) = w.step(&pose_at(1, 0, 0), Action::MoveForward);
        assert!(hit);
        assert_eq!(n, pose_at(1, 0, 0));
    }

    #[test]
    fn turns_and_noops() {
        let w = open_world(3);
        let p = pose_at(1, 1, 0);
        assert_eq!(w.step(&p, Action::TurnLeft).0.heading.degrees(), 30);
        assert_eq!(w.step(&p, Action::TurnRight).0.heading.degrees(), 330);
        for a in [Action::LookUp, Action::LookDown, Action::Stop] {
            assert_eq!(w.step(&p, a), (p, false));
        }
    }

    #[test]
    fn stepping_onto_stair_changes_floor() {
        let w = MultiFloorWorld::from_scenario(&two_floor(true)).unwrap();
        let p = pose_at(3, 1, 0);
        let (n, hit) = w.step(&p, Action::MoveForward);
        assert!(!hit);
        assert_eq!(n.floor, 1);
        assert_eq!(n.cell(), CellPos::new(0, 0));
    }

    #[test]
    fn success_requires_stop_and_same_floor() {
        let w = MultiFloorWorld::from_scenario(&two_floor(true)).unwrap();
        let mut on_target = pose_at(3, 1, 0);
        on_target.floor = 1;
        assert!(w.is_success(&on_target, "bed", 0.1, true));
        assert!(!w.is_success(&on_target, "bed", 0.1, false));
        let same_xy_other_floor = pose_at(3, 1, 0);
        assert!(!w.is_success(&same_xy_other_floor, "bed", 0.1, true));
        assert_eq!(w.distance_to_target(&same_xy_other_floor, "bed"), f64::INFINITY);

        let far = open_world(25);
        assert!(!far.is_success(&pose_at(20, 0, 0), "bed", 0.1, true));
    }

    #[test]
    fn optimal_path_crosses_floors() {
        let w = MultiFloorWorld::from_scenario(&two_floor(true)).unwrap();
        // (0,0) -> stair (4,1): 3 straight + 1 diagonal; upstairs (0,0) -> bed (3,1):
        // 2 straight + 1 diagonal.
        let expected = 0.25 * (3.0 + 2f64.sqrt()) + 0.25 * (2.0 + 2f64.sqrt());
        assert!((w.optimal_path_length().unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn sense_open_room_sees_everything() {
        let w = open_world(11);
        let obs = w.sense(&pose_at(5, 5, 0), 360.0, 10.0);
        assert_eq!(obs.visible_cells.len(), 121);
    }

    #[test]
    fn sense_zero_fov_sees_own_cell() {
        let w = open_world(11);
        let obs = w.sense(&pose_at(5, 5, 0), 0.0, 10.0);
        assert_eq!(obs.visible_cells.len(), 1);
        assert_eq!(obs.visible_cells[0].pos, CellPos::new(5, 5));
    }

    #[test]
    fn heading_turn_direction() {
        let h = Heading::from_degrees(0).unwrap();
        assert_eq!(h.turns_to(Heading::from_degrees(90).unwrap()), 3);
        assert_eq!(h.turns_to(Heading::from_degrees(270).unwrap()), -3);
        assert_eq!(h.turns_to(Heading::from_degrees(180).unwrap()), 6);
        assert!(Heading::from_degrees(45).is_none());
    }
}
