//! On-disk scenario schema and its validation into a [`MultiFloorWorld`].

use super::{CellKind, Floor, Heading, MultiFloorWorld, Pose, SemanticLabel, StairLink, WorldCell};
use crate::grid::{CellPos, Grid};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scenario: {}", .0.join("; "))]
    Validation(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub tags: Vec<String>,
    pub floors: Vec<FloorSpec>,
    pub start: StartSpec,
    pub target_category: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimal_path_length_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorSpec {
    pub grid: Vec<String>,
    /// Keyed by `"x,y"`.
    #[serde(default)]
    pub semantics: BTreeMap<String, SemanticSpec>,
    #[serde(default)]
    pub stairs: Vec<StairSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SemanticSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub room_id: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub room_type: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StairSpec {
    pub from: [i32; 2],
    pub to_floor: usize,
    pub to: [i32; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartSpec {
    pub floor: usize,
    pub x: i32,
    pub y: i32,
    #[serde(default)]
    pub heading_deg: i32,
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<MultiFloorWorld, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file: ScenarioFile = serde_json::from_str(&text)?;
    let mut world = MultiFloorWorld::from_scenario(&file)?;
    if world.name.is_empty() {
        world.name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
    }
    Ok(world)
}

fn parse_key(key: &str) -> Option<CellPos> {
    let (x, y) = key.split_once(',')?;
    Some(CellPos::new(x.trim().parse().ok()?, y.trim().parse().ok()?))
}

fn legend(c: char) -> Option<CellKind> {
    Some(match c {
        '.' => CellKind::Free,
        '#' => CellKind::Obstacle,
        'D' => CellKind::Door,
        'U' => CellKind::StairUp,
        'd' => CellKind::StairDown,
        _ => return None,
    })
}

pub(super) fn build(file: &ScenarioFile, require_target: bool) -> Result<MultiFloorWorld, ScenarioError> {
    let mut errors = Vec::new();
    if file.floors.is_empty() {
        return Err(ScenarioError::Validation(vec!["scenario has no floors".into()]));
    }

    let mut floors = Vec::with_capacity(file.floors.len());
    for (fi, spec) in file.floors.iter().enumerate() {
        match build_floor(fi, spec, &mut errors) {
            Some(f) => floors.push(f),
            None => {
                return Err(ScenarioError::Validation(errors));
            }
        }
    }

    link_stairs(file, &mut floors, &mut errors);

    let start = &file.start;
    let heading = Heading::from_degrees(start.heading_deg);
    if heading.is_none() {
        errors.push(format!("start heading {}° is not a multiple of 30°", start.heading_deg));
    }
    let start_cell = CellPos::new(start.x, start.y);
    match floors.get(start.floor).and_then(|f| f.grid.get(start_cell)) {
        None => errors.push(format!("start {start_cell} on floor {} is outside the world", start.floor)),
        Some(c) if c.kind == CellKind::Obstacle => {
            errors.push(format!("start {start_cell} on floor {} is an obstacle", start.floor))
        }
        Some(_) => {}
    }

    if !errors.is_empty() {
        return Err(ScenarioError::Validation(errors));
    }

    let (cx, cy) = start_cell.center();
    let world = MultiFloorWorld {
        name: file.name.clone().unwrap_or_default(),
        tags: file.tags.clone(),
        floors,
        start: Pose {
            floor: start.floor,
            x: cx,
            y: cy,
            heading: heading.unwrap_or_default(),
        },
        target_category: file.target_category.clone(),
        optimal_path_length_m: file.optimal_path_length_m,
    };

    if require_target {
        let mut target_errors = Vec::new();
        let has_target = world
            .floors
            .iter()
            .any(|f| f.grid.values().any(|c| c.label.category.as_deref() == Some(&world.target_category)));
        if !has_target {
            target_errors.push(format!("missing target: no cell has category \"{}\"", world.target_category));
        } else if world.optimal_path_length().is_none() {
            target_errors.push(format!(
                "disconnected start cell: no \"{}\" cell is reachable from the start",
                world.target_category
            ));
        }
        if let Some(l) = world.optimal_path_length_m {
            if !(l > 0.0 && l.is_finite()) {
                target_errors.push(format!("optimal_path_length_m must be positive, got {l}"));
            }
        }
        if !target_errors.is_empty() {
            return Err(ScenarioError::Validation(target_errors));
        }
    }
    Ok(world)
}

fn build_floor(fi: usize, spec: &FloorSpec, errors: &mut Vec<String>) -> Option<Floor> {
    let height = spec.grid.len();
    let width = spec.grid.first().map(|r| r.chars().count()).unwrap_or(0);
    if height == 0 || width == 0 {
        errors.push(format!("floor {fi}: empty grid"));
        return None;
    }
    let mut cells = Vec::with_capacity(width * height);
    for (y, row) in spec.grid.iter().enumerate() {
        if row.chars().count() != width {
            errors.push(format!("floor {fi}: row {y} has length {} (expected {width})", row.chars().count()));
            return None;
        }
        for (x, ch) in row.chars().enumerate() {
            match legend(ch) {
                Some(kind) => cells.push(WorldCell {
                    kind,
                    label: SemanticLabel::default(),
                }),
                None => {
                    errors.push(format!("floor {fi}: unknown legend character '{ch}' at ({x}, {y})"));
                    return None;
                }
            }
        }
    }
    let mut grid = Grid::from_vec(width, height, cells);

    let mut annotated = BTreeMap::new();
    for (key, sem) in &spec.semantics {
        let Some(pos) = parse_key(key) else {
            errors.push(format!("floor {fi}: bad semantics key \"{key}\""));
            continue;
        };
        let Some(cell) = grid.get_mut(pos) else {
            errors.push(format!("floor {fi}: semantics key {pos} out of bounds"));
            continue;
        };
        cell.label.category = sem.category.clone();
        cell.label.room_id = sem.room_id;
        cell.label.room_type = sem.room_type.clone();
        annotated.insert(pos, sem.clone());
    }

    assign_rooms(fi, &mut grid, errors);

    Some(Floor {
        grid,
        stair_links: BTreeMap::new(),
    })
}

fn is_room_cell(kind: CellKind) -> bool {
    matches!(kind, CellKind::Free | CellKind::StairUp | CellKind::StairDown)
}

/// Flood-fills door-separated regions and propagates room annotations across
/// each region.
fn assign_rooms(fi: usize, grid: &mut Grid<WorldCell>, errors: &mut Vec<String>) {
    let mut region_of: Grid<Option<usize>> = Grid::filled(grid.width(), grid.height(), None);
    let mut regions: Vec<Vec<CellPos>> = Vec::new();
    let positions: Vec<CellPos> = grid.positions().collect();
    for &seed in &positions {
        if !is_room_cell(grid.get(seed).unwrap().kind) || region_of.get(seed).unwrap().is_some() {
            continue;
        }
        let id = regions.len();
        let mut members = Vec::new();
        let mut queue = VecDeque::from([seed]);
        *region_of.get_mut(seed).unwrap() = Some(id);
        while let Some(c) = queue.pop_front() {
            members.push(c);
            for n in c.neighbors4() {
                if let Some(cell) = grid.get(n) {
                    if is_room_cell(cell.kind) && region_of.get(n).unwrap().is_none() {
                        *region_of.get_mut(n).unwrap() = Some(id);
                        queue.push_back(n);
                    }
                }
            }
        }
        regions.push(members);
    }

    let max_annotated = grid.values().filter_map(|c| c.label.room_id).max();
    let mut next_auto = max_annotated.map_or(0, |m| m + 1);
    let mut used_ids: BTreeMap<u32, usize> = BTreeMap::new();
    let mut region_room: Vec<u32> = Vec::with_capacity(regions.len());

    for (ri, members) in regions.iter().enumerate() {
        let ids: BTreeSet<u32> = members.iter().filter_map(|&c| grid.get(c).unwrap().label.room_id).collect();
        let types: BTreeSet<String> =
            members.iter().filter_map(|&c| grid.get(c).unwrap().label.room_type.clone()).collect();
        if ids.len() > 1 {
            errors.push(format!("floor {fi}: one connected region carries room ids {ids:?}"));
        }
        if types.len() > 1 {
            errors.push(format!("floor {fi}: one connected region carries room types {types:?}"));
        }
        let room_id = match ids.first() {
            Some(&id) => id,
            None => {
                let id = next_auto;
                next_auto += 1;
                id
            }
        };
        if let Some(prev) = used_ids.insert(room_id, ri) {
            if prev != ri {
                errors.push(format!("floor {fi}: room_id {room_id} spans disconnected regions"));
            }
        }
        let room_type = types.first().cloned().unwrap_or_else(|| "unknown".to_string());
        for &c in members {
            let label = &mut grid.get_mut(c).unwrap().label;
            label.room_id = Some(room_id);
            label.room_type = Some(room_type.clone());
        }
        region_room.push(room_id);
    }

    // Doors inherit the lowest adjacent room unless annotated.
    let doors: Vec<CellPos> = positions
        .iter()
        .copied()
        .filter(|&c| grid.get(c).unwrap().kind == CellKind::Door)
        .collect();
    for d in doors {
        let adjacent = d
            .neighbors4()
            .iter()
            .filter_map(|&n| region_of.get(n).copied().flatten())
            .map(|r| region_room[r])
            .min();
        let label = &mut grid.get_mut(d).unwrap().label;
        if label.room_id.is_none() {
            label.room_id = Some(adjacent.unwrap_or_else(|| {
                let id = next_auto;
                next_auto += 1;
                id
            }));
        }
        if label.room_type.is_none() {
            label.room_type = Some("doorway".to_string());
        }
    }
}

fn link_stairs(file: &ScenarioFile, floors: &mut [Floor], errors: &mut Vec<String>) {
    let n = floors.len();
    let mut links: Vec<BTreeMap<CellPos, StairLink>> = vec![BTreeMap::new(); n];
    for (fi, spec) in file.floors.iter().enumerate() {
        for s in &spec.stairs {
            let from = CellPos::new(s.from[0], s.from[1]);
            let to = CellPos::new(s.to[0], s.to[1]);
            let Some(kind) = floors[fi].grid.get(from).map(|c| c.kind) else {
                errors.push(format!("floor {fi}: stair source {from} out of bounds"));
                continue;
            };
            let expected_floor = match kind {
                CellKind::StairUp => fi + 1,
                CellKind::StairDown if fi > 0 => fi - 1,
                CellKind::StairDown => {
                    errors.push(format!("unmatched stair: StairDown at floor 0 {from} has no floor below"));
                    continue;
                }
                _ => {
                    errors.push(format!("floor {fi}: stair source {from} is not a stair cell"));
                    continue;
                }
            };
            if s.to_floor != expected_floor || s.to_floor >= n {
                errors.push(format!(
                    "unmatched stair: {kind:?} at floor {fi} {from} links to floor {} (expected {expected_floor})",
                    s.to_floor
                ));
                continue;
            }
            let want = if kind == CellKind::StairUp { CellKind::StairDown } else { CellKind::StairUp };
            match floors[s.to_floor].grid.get(to).map(|c| c.kind) {
                Some(k) if k == want => {}
                _ => {
                    errors.push(format!(
                        "unmatched stair: {kind:?} at floor {fi} {from} has no {want:?} at floor {} {to}",
                        s.to_floor
                    ));
                    continue;
                }
            }
            for (a_floor, a, b_floor, b) in [(fi, from, s.to_floor, to), (s.to_floor, to, fi, from)] {
                let link = StairLink { floor: b_floor, pos: b };
                if let Some(prev) = links[a_floor].insert(a, link) {
                    if prev != link {
                        errors.push(format!("floor {a_floor}: stair {a} has conflicting links"));
                    }
                }
            }
        }
    }
    for (fi, floor) in floors.iter_mut().enumerate() {
        for (pos, cell) in floor.grid.iter() {
            if cell.kind.is_stair() && !links[fi].contains_key(&pos) {
                errors.push(format!("unmatched stair: {:?} at floor {fi} {pos} has no partner", cell.kind));
            }
        }
        floor.stair_links = std::mem::take(&mut links[fi]);
    }
}
