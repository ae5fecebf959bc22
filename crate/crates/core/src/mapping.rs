//! The agent's per-floor belief: visibility map, frontiers and their values,
//! and the keypoint memory used when reminiscing.

use crate::config::MappingConfig;
use crate::grid::{CellPos, Grid, CELL_AREA, MOVES8};
use crate::priors::TargetPriors;
use crate::raycast::{cast_fan, RayHit};
use crate::search::dijkstra;
use crate::world::{CellKind, Observation, Pose, SemanticLabel, VisibleCell};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MappingError {
    #[error("observation from floor {got} integrated into the map of floor {expected}")]
    FloorMismatch { expected: usize, got: usize },
    #[error("no path from {from:?} to {to:?}")]
    Unreachable { from: CellPos, to: CellPos },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StairDir {
    Up,
    Down,
}

impl StairDir {
    pub fn target_floor(self, floor: usize) -> Option<usize> {
        match self {
            StairDir::Up => floor.checked_add(1),
            StairDir::Down => floor.checked_sub(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum VisState {
    #[default]
    Unknown,
    Free,
    Occupied,
    Door,
    Stair(StairDir),
}

impl VisState {
    pub fn is_known(self) -> bool {
        self != VisState::Unknown
    }

    pub fn is_stair(self) -> bool {
        matches!(self, VisState::Stair(_))
    }

    pub fn legend(self) -> char {
        match self {
            VisState::Unknown => '?',
            VisState::Free => '.',
            VisState::Occupied => '#',
            VisState::Door => 'D',
            VisState::Stair(StairDir::Up) => 'U',
            VisState::Stair(StairDir::Down) => 'd',
        }
    }

    pub fn from_legend(c: char) -> Option<Self> {
        Some(match c {
            '?' => VisState::Unknown,
            '.' => VisState::Free,
            '#' => VisState::Occupied,
            'D' => VisState::Door,
            'U' => VisState::Stair(StairDir::Up),
            'd' => VisState::Stair(StairDir::Down),
            _ => return None,
        })
    }

    fn from_kind(kind: CellKind) -> Self {
        match kind {
            CellKind::Free => VisState::Free,
            CellKind::Obstacle => VisState::Occupied,
            CellKind::Door => VisState::Door,
            CellKind::StairUp => VisState::Stair(StairDir::Up),
            CellKind::StairDown => VisState::Stair(StairDir::Down),
        }
    }
}

/// Which cells a path may use. Stairs are only usable as an endpoint so that
/// planned paths never trigger an unplanned floor change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Traversal {
    pub start: CellPos,
    pub goal: Option<CellPos>,
    pub allow_unknown: bool,
}

impl Traversal {
    pub fn open(&self, vis: &VisibilityMap, c: CellPos) -> bool {
        match vis.state(c) {
            None | Some(VisState::Occupied) => false,
            Some(VisState::Free | VisState::Door) => true,
            Some(VisState::Stair(_)) => c == self.start || Some(c) == self.goal,
            Some(VisState::Unknown) => self.allow_unknown,
        }
    }

    /// 8-connected moves from `c` without cutting corners.
    pub fn neighbors(&self, vis: &VisibilityMap, c: CellPos, out: &mut Vec<(CellPos, f64)>) {
        for &(dx, dy, cost) in &MOVES8 {
            let n = c.offset(dx, dy);
            if !self.open(vis, n) {
                continue;
            }
            if dx != 0 && dy != 0 && !(self.open(vis, c.offset(dx, 0)) && self.open(vis, c.offset(0, dy))) {
                continue;
            }
            out.push((n, cost));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisibilityMap {
    grid: Grid<VisState>,
}

impl VisibilityMap {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            grid: Grid::filled(width, height, VisState::Unknown),
        }
    }

    /// Parses the text dump format; rows must have equal length.
    pub fn from_text(rows: &[&str]) -> Option<Self> {
        let width = rows.first()?.chars().count();
        let mut data = Vec::with_capacity(width * rows.len());
        for row in rows {
            if row.chars().count() != width {
                return None;
            }
            for c in row.chars() {
                data.push(VisState::from_legend(c)?);
            }
        }
        Some(Self {
            grid: Grid::from_vec(width, rows.len(), data),
        })
    }

    pub fn width(&self) -> usize {
        self.grid.width()
    }

    pub fn height(&self) -> usize {
        self.grid.height()
    }

    pub fn grid(&self) -> &Grid<VisState> {
        &self.grid
    }

    pub fn state(&self, c: CellPos) -> Option<VisState> {
        self.grid.get(c).copied()
    }

    pub fn set(&mut self, c: CellPos, s: VisState) {
        if let Some(cell) = self.grid.get_mut(c) {
            *cell = s;
        }
    }

    pub fn unknown_count(&self) -> usize {
        self.grid.values().filter(|s| !s.is_known()).count()
    }

    /// Free or Door, and 4-adjacent to an in-bounds Unknown cell. A door seen
    /// at a grazing angle hides the room behind it; it is still a frontier.
    pub fn is_frontier_cell(&self, c: CellPos) -> bool {
        matches!(self.state(c), Some(VisState::Free | VisState::Door))
            && c.neighbors4().iter().any(|&n| self.state(n) == Some(VisState::Unknown))
    }

    pub fn frontier_cells(&self) -> Vec<CellPos> {
        self.grid.positions().filter(|&c| self.is_frontier_cell(c)).collect()
    }

    /// One character per cell, rows separated by newlines.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity((self.width() + 1) * self.height());
        for y in 0..self.height() as i32 {
            for x in 0..self.width() as i32 {
                s.push(self.grid.get(CellPos::new(x, y)).map_or(' ', |v| v.legend()));
            }
            s.push('\n');
        }
        s
    }

    /// Rays from `c` over the known map. Occupied cells stop rays; Unknown
    /// cells stop them too unless `see_through_unknown`.
    pub fn cast_from(&self, c: CellPos, range_m: f64, see_through_unknown: bool) -> BTreeMap<CellPos, Option<CellPos>> {
        cast_fan(c.center(), 0.0, 360.0, range_m, |p| match self.state(p) {
            None => RayHit::OutOfBounds,
            Some(VisState::Occupied) => RayHit::Opaque,
            Some(VisState::Unknown) if !see_through_unknown => RayHit::Opaque,
            Some(VisState::Door) => RayHit::Portal,
            Some(_) => RayHit::Transparent,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FrontierKind {
    IntraFloor,
    Stair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frontier {
    pub floor: usize,
    pub cell: CellPos,
    pub kind: FrontierKind,
    /// Cluster members, sorted; contains `cell`.
    pub members: Vec<CellPos>,
    pub s_sem: f64,
    pub s_dist: f64,
    pub value: f64,
    /// Geodesic distance from the agent when last scored.
    pub distance_m: f64,
}

impl Frontier {
    fn unscored(floor: usize, cell: CellPos, kind: FrontierKind, members: Vec<CellPos>) -> Self {
        Self {
            floor,
            cell,
            kind,
            members,
            s_sem: 0.0,
            s_dist: 0.0,
            value: 0.0,
            distance_m: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueMapEntry {
    pub cell: CellPos,
    pub alpha: f64,
    pub beta: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KeyPointKind {
    RoomEntrance,
    OpenFrontier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyPoint {
    pub floor: usize,
    pub pos: CellPos,
    pub kind: KeyPointKind,
    pub open_area_m2: f64,
    pub snapshot: Observation,
    pub visited_step: usize,
    /// Set once the keypoint has been checked during reminiscing.
    pub consumed: bool,
}

/// The belief for one floor.
#[derive(Debug, Clone)]
pub struct FloorMaps {
    pub floor: usize,
    pub visibility: VisibilityMap,
    /// Labels of cells seen so far.
    pub semantics: Grid<Option<SemanticLabel>>,
    pub frontiers: Vec<Frontier>,
    pub value_map: Vec<ValueMapEntry>,
    pub keypoints: Vec<KeyPoint>,
}

impl FloorMaps {
    pub fn new(floor: usize, width: usize, height: usize) -> Self {
        Self {
            floor,
            visibility: VisibilityMap::new(width, height),
            semantics: Grid::filled(width, height, None),
            frontiers: Vec::new(),
            value_map: Vec::new(),
            keypoints: Vec::new(),
        }
    }

    /// Marks every visible cell. Known cells keep their state, except that a
    /// cell mapped as Free may be refined to Stair once seen up close.
    /// Stairs farther than `stair_detect_range_m` are recorded as Free.
    pub fn integrate(&mut self, obs: &Observation, stair_detect_range_m: f64) -> Result<(), MappingError> {
        if obs.floor() != self.floor {
            return Err(MappingError::FloorMismatch {
                expected: self.floor,
                got: obs.floor(),
            });
        }
        for vc in &obs.visible_cells {
            let Some(current) = self.visibility.state(vc.pos) else { continue };
            let mut seen = VisState::from_kind(vc.kind);
            if seen.is_stair() && obs.agent_pose.distance_to_cell(vc.pos) > stair_detect_range_m + 1e-9 {
                seen = VisState::Free;
            }
            let next = match current {
                VisState::Unknown => seen,
                VisState::Free if seen.is_stair() => seen,
                other => other,
            };
            self.visibility.set(vc.pos, next);
            if let Some(slot) = self.semantics.get_mut(vc.pos) {
                // a later sighting may recover a dropped category
                let missing = slot.as_ref().is_none_or(|l| l.category.is_none() && vc.label.category.is_some());
                if missing {
                    *slot = Some(vc.label.clone());
                }
            }
        }
        Ok(())
    }

    /// Intra-floor frontier clusters, then Stair frontiers whose destination
    /// floor satisfies `unvisited`.
    pub fn extract_frontiers(&self, merge_radius: i32, unvisited: impl Fn(usize) -> bool) -> Vec<Frontier> {
        let mut out: Vec<Frontier> = cluster_frontier_cells(&self.visibility.frontier_cells(), merge_radius)
            .into_iter()
            .map(|(rep, members)| Frontier::unscored(self.floor, rep, FrontierKind::IntraFloor, members))
            .collect();
        for (c, s) in self.visibility.grid().iter() {
            if let VisState::Stair(dir) = *s {
                if dir.target_floor(self.floor).is_some_and(&unvisited) {
                    out.push(Frontier::unscored(self.floor, c, FrontierKind::Stair, vec![c]));
                }
            }
        }
        out
    }

    pub fn intra_frontiers(&self) -> impl Iterator<Item = &Frontier> {
        self.frontiers.iter().filter(|f| f.kind == FrontierKind::IntraFloor)
    }

    /// An observation synthesised from the known map as if standing at `c`.
    pub fn known_view(&self, c: CellPos, radius_m: f64) -> Observation {
        let (x, y) = c.center();
        let seen = self.visibility.cast_from(c, radius_m, false);
        let mut visible_cells = Vec::new();
        let mut door_cells_in_view = Vec::new();
        for (pos, via_door) in seen {
            let Some(state) = self.visibility.state(pos) else { continue };
            let kind = match state {
                VisState::Unknown => continue,
                VisState::Free => CellKind::Free,
                VisState::Occupied => CellKind::Obstacle,
                VisState::Door => {
                    door_cells_in_view.push(pos);
                    CellKind::Door
                }
                VisState::Stair(StairDir::Up) => CellKind::StairUp,
                VisState::Stair(StairDir::Down) => CellKind::StairDown,
            };
            visible_cells.push(VisibleCell {
                floor: self.floor,
                pos,
                kind,
                label: self.semantics.get(pos).cloned().flatten().unwrap_or_default(),
                via_door,
            });
        }
        Observation {
            agent_pose: Pose {
                floor: self.floor,
                x,
                y,
                heading: Default::default(),
            },
            visible_cells,
            door_cells_in_view,
        }
    }

    /// Fills `s_sem`, `s_dist` and `value` of every frontier and rebuilds the
    /// value map. Frontiers the agent cannot reach keep a zero distance score.
    pub fn score_frontiers(&mut self, from: CellPos, priors: &TargetPriors, cfg: &MappingConfig) {
        let field = geodesic_field(&self.visibility, from, true);
        let mut frontiers = std::mem::take(&mut self.frontiers);
        for f in &mut frontiers {
            let d = if f.kind == FrontierKind::Stair {
                geodesic_distance(&self.visibility, from, f.cell).ok()
            } else {
                field.get(&f.cell).copied()
            };
            f.distance_m = d.unwrap_or(f64::INFINITY);
            f.s_dist = d.map_or(0.0, |d| distance_score(d, cfg.d_max_m));
            f.s_sem = semantic_score(&self.known_view(f.cell, cfg.semantic_radius_m), priors);
            f.value = frontier_value(f.s_sem, f.s_dist, cfg.alpha, cfg.beta);
        }
        self.value_map = frontiers
            .iter()
            .map(|f| ValueMapEntry {
                cell: f.cell,
                alpha: cfg.alpha,
                beta: cfg.beta,
                value: f.value,
            })
            .collect();
        self.frontiers = frontiers;
    }

    /// Records room entrances and open frontiers. Returns how many keypoints
    /// were added.
    pub fn update_keypoints(
        &mut self,
        obs: &Observation,
        pose: &Pose,
        frontier: Option<CellPos>,
        step: usize,
        open_range_m: f64,
        cfg: &MappingConfig,
    ) -> usize {
        let mut added = 0;
        let here = pose.cell();
        let near_door = (-1..=1)
            .flat_map(|dy| (-1..=1).map(move |dx| here.offset(dx, dy)))
            .any(|c| self.visibility.state(c) == Some(VisState::Door));
        if near_door {
            let area = open_area(&self.visibility, here, open_range_m);
            added += usize::from(self.push_keypoint(here, KeyPointKind::RoomEntrance, area, obs, step, cfg));
        }
        if let Some(f) = frontier {
            let area = open_area(&self.visibility, f, open_range_m);
            if area >= cfg.open_area_threshold_m2 {
                added += usize::from(self.push_keypoint(f, KeyPointKind::OpenFrontier, area, obs, step, cfg));
            }
        }
        added
    }

    fn push_keypoint(
        &mut self,
        pos: CellPos,
        kind: KeyPointKind,
        open_area_m2: f64,
        obs: &Observation,
        step: usize,
        cfg: &MappingConfig,
    ) -> bool {
        let dup = self
            .keypoints
            .iter()
            .any(|k| k.kind == kind && k.pos.metric_distance(pos) <= cfg.keypoint_dedup_m + 1e-9);
        if dup {
            return false;
        }
        self.keypoints.push(KeyPoint {
            floor: self.floor,
            pos,
            kind,
            open_area_m2,
            snapshot: obs.clone(),
            visited_step: step,
            consumed: false,
        });
        true
    }
}

/// Greedy clustering in lexicographic seed order: each cluster takes the
/// unassigned cells of the seed's 8-connected component within Chebyshev
/// distance `radius` of the seed. Returns `(representative, members)` where
/// the representative is the member nearest the centroid.
pub fn cluster_frontier_cells(cells: &[CellPos], radius: i32) -> Vec<(CellPos, Vec<CellPos>)> {
    let set: BTreeSet<CellPos> = cells.iter().copied().collect();
    let mut component: BTreeMap<CellPos, usize> = BTreeMap::new();
    let mut next = 0;
    for &c in &set {
        if component.contains_key(&c) {
            continue;
        }
        let mut stack = vec![c];
        component.insert(c, next);
        while let Some(p) = stack.pop() {
            for &(dx, dy, _) in &MOVES8 {
                let n = p.offset(dx, dy);
                if set.contains(&n) && !component.contains_key(&n) {
                    component.insert(n, next);
                    stack.push(n);
                }
            }
        }
        next += 1;
    }
    let mut assigned = BTreeSet::new();
    let mut out = Vec::new();
    for &seed in &set {
        if assigned.contains(&seed) {
            continue;
        }
        let comp = component[&seed];
        let members: Vec<CellPos> = set
            .iter()
            .copied()
            .filter(|&c| !assigned.contains(&c) && component[&c] == comp && c.chebyshev(seed) <= radius)
            .collect();
        assigned.extend(members.iter().copied());
        let n = members.len() as f64;
        let cx = members.iter().map(|c| f64::from(c.x)).sum::<f64>() / n;
        let cy = members.iter().map(|c| f64::from(c.y)).sum::<f64>() / n;
        let rep = *members
            .iter()
            .min_by(|a, b| {
                let da = (f64::from(a.x) - cx).powi(2) + (f64::from(a.y) - cy).powi(2);
                let db = (f64::from(b.x) - cx).powi(2) + (f64::from(b.y) - cy).powi(2);
                da.total_cmp(&db).then(a.cmp(b))
            })
            .expect("cluster has its seed");
        out.push((rep, members));
    }
    out
}

/// Best prior among the categories visible in `obs`, or 0.
pub fn semantic_score(obs: &Observation, priors: &TargetPriors) -> f64 {
    obs.categories().map(|c| priors.object(c)).fold(0.0, f64::max).clamp(0.0, 1.0)
}

pub fn distance_score(d: f64, d_max: f64) -> f64 {
    (1.0 - d / d_max).max(0.0)
}

pub fn frontier_value(s_sem: f64, s_dist: f64, alpha: f64, beta: f64) -> f64 {
    alpha * s_sem + beta * s_dist
}

/// Area of known non-occupied cells visible from `c` within `range_m`.
pub fn open_area(vis: &VisibilityMap, c: CellPos, range_m: f64) -> f64 {
    let seen = vis.cast_from(c, range_m, false);
    let n = seen
        .keys()
        .filter(|&&p| matches!(vis.state(p), Some(s) if s.is_known() && s != VisState::Occupied))
        .count();
    n as f64 * CELL_AREA
}

/// Shortest 8-connected path length from `a` to `b` on the known map.
pub fn geodesic_distance(vis: &VisibilityMap, a: CellPos, b: CellPos) -> Result<f64, MappingError> {
    if a == b {
        return Ok(0.0);
    }
    let t = Traversal {
        start: a,
        goal: Some(b),
        allow_unknown: vis.is_frontier_cell(b),
    };
    if !t.open(vis, b) {
        return Err(MappingError::Unreachable { from: a, to: b });
    }
    let (dist, found) = dijkstra(a, |c, out| t.neighbors(vis, c, out), |c| c == b);
    found
        .map(|n| dist[&n])
        .ok_or(MappingError::Unreachable { from: a, to: b })
}

/// Distances in metres from `a` to every reachable cell. Stairs other than
/// `a` are excluded.
pub fn geodesic_field(vis: &VisibilityMap, a: CellPos, allow_unknown: bool) -> HashMap<CellPos, f64> {
    let t = Traversal {
        start: a,
        goal: None,
        allow_unknown,
    };
    dijkstra(a, |c, out| t.neighbors(vis, c, out), |_| false).0
}
