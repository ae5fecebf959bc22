//! Post-exploration review: re-check stored keypoint views for the target,
//! then look for a staircase to another floor.

use crate::mapping::{FloorMaps, FrontierKind};
use crate::grid::CellPos;
use crate::reasoner::{map_sketch, Candidate, KeyPointSummary, QueryKind, Reasoner, ReasonerQuery};
use crate::state_machine::AgentState;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReminiscingError {
    #[error("no staircase candidate on floor {floor}")]
    NotFound { floor: usize },
}

/// Summaries of the keypoints that pass `keep`, indexed into the floor's
/// keypoint list.
fn summaries(maps: &FloorMaps, keep: impl Fn(usize) -> bool) -> Vec<KeyPointSummary> {
    maps.keypoints
        .iter()
        .enumerate()
        .filter(|(i, _)| keep(*i))
        .map(|(i, k)| KeyPointSummary::of(i, k))
        .collect()
}

fn keypoint_query(kind: QueryKind, maps: &FloorMaps, list: Vec<KeyPointSummary>, target: &str) -> ReasonerQuery {
    let center = list.first().map_or(CellPos::new(0, 0), |k| k.pos);
    ReasonerQuery {
        kind,
        target: target.to_string(),
        scene: None,
        candidates: list.into_iter().map(Candidate::KeyPoint).collect(),
        fine: None,
        map_sketch: map_sketch(
            &maps.visibility,
            center,
            maps.visibility.width().max(maps.visibility.height()) as i32,
            None,
        ),
    }
}

/// Keypoints worth revisiting for the target, in the order the reasoner
/// ranked them. Consumed keypoints are not offered again; with none left
/// the result is empty and no query is made.
pub fn verify_targets(maps: &FloorMaps, target: &str, reasoner: &dyn Reasoner) -> Vec<usize> {
    let list = summaries(maps, |i| !maps.keypoints[i].consumed);
    if list.is_empty() {
        return Vec::new();
    }
    let q = keypoint_query(QueryKind::KeypointTargetReview, maps, list, target);
    let d = reasoner.decide(&q);
    let mut seen = BTreeSet::new();
    d.chosen
        .iter()
        .filter_map(|&i| match q.candidates.get(i) {
            Some(Candidate::KeyPoint(k)) => Some(k.index),
            _ => None,
        })
        .filter(|i| seen.insert(*i))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StairTarget {
    /// A stair cell already on the map.
    Frontier(CellPos),
    /// A keypoint whose stored view may show a staircase, with the stair cell
    /// of that view nearest the keypoint if it shows one.
    KeyPoint {
        index: usize,
        pos: CellPos,
        stair_cell: Option<CellPos>,
    },
}

/// A known stair frontier wins without asking the reasoner (nearest first).
/// Otherwise the reasoner reviews the keypoints not yet `tried`.
pub fn find_staircase(
    maps: &FloorMaps,
    tried: &BTreeSet<usize>,
    target: &str,
    reasoner: &dyn Reasoner,
) -> Result<StairTarget, ReminiscingError> {
    let known = maps
        .frontiers
        .iter()
        .filter(|f| f.kind == FrontierKind::Stair)
        .min_by(|a, b| a.distance_m.total_cmp(&b.distance_m).then(a.cell.cmp(&b.cell)));
    if let Some(f) = known {
        return Ok(StairTarget::Frontier(f.cell));
    }
    let list = summaries(maps, |i| !tried.contains(&i));
    if list.is_empty() {
        return Err(ReminiscingError::NotFound { floor: maps.floor });
    }
    let q = keypoint_query(QueryKind::KeypointStairReview, maps, list, target);
    let d = reasoner.decide(&q);
    match d.first().and_then(|i| q.candidates.get(i)) {
        Some(Candidate::KeyPoint(k)) => Ok(StairTarget::KeyPoint {
            index: k.index,
            pos: k.pos,
            stair_cell: k
                .stair_cells
                .iter()
                .min_by(|a, b| a.metric_distance(k.pos).total_cmp(&b.metric_distance(k.pos)).then(a.cmp(b)))
                .copied(),
        }),
        _ => Err(ReminiscingError::NotFound { floor: maps.floor }),
    }
}

/// Makes sure the new floor has maps (earlier floors keep theirs) and
/// resets the controller to fast exploration.
pub fn on_floor_change(maps: &mut BTreeMap<usize, FloorMaps>, floor: usize, width: usize, height: usize) -> AgentState {
    maps.entry(floor).or_insert_with(|| FloorMaps::new(floor, width, height));
    AgentState::EXP_FAST
}
