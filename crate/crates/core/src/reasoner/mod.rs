//! The slow decision-maker behind one interface: region choice at doorways,
//! fine-grained actions during recovery and keypoint review while
//! reminiscing. Two implementations: a deterministic scripted reasoner and a
//! chat-completion client.

mod prompt;
mod remote;
mod scripted;

pub use prompt::{render_prompt, PromptTemplates};
pub use remote::{RemoteError, RemoteReasoner};
pub use scripted::ScriptedReasoner;

use crate::grid::CellPos;
use crate::mapping::{KeyPoint, KeyPointKind, VisibilityMap};
use crate::world::{Action, CellKind, Observation, Pose};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoomEntry {
    pub room_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub room_id: Option<u32>,
    pub object_categories: Vec<String>,
    /// Door the region is seen through; `None` for the agent's own region.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub via_door: Option<CellPos>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDescription {
    pub rooms: Vec<RoomEntry>,
    pub current_pose: Pose,
    pub target_category: String,
}

/// Splits the observation by the door each cell is seen through and reports
/// the dominant room type and the visible categories of every part.
pub fn build_scene_description(obs: &Observation, target: &str) -> SceneDescription {
    let mut parts: BTreeMap<Option<CellPos>, Vec<usize>> = BTreeMap::new();
    for (i, c) in obs.visible_cells.iter().enumerate() {
        if c.kind == CellKind::Door {
            continue;
        }
        parts.entry(c.via_door).or_default().push(i);
    }
    let rooms = parts
        .into_iter()
        .map(|(via_door, idx)| {
            let mut votes: BTreeMap<(&str, Option<u32>), usize> = BTreeMap::new();
            let mut cats = BTreeSet::new();
            for &i in &idx {
                let label = &obs.visible_cells[i].label;
                if let Some(t) = label.room_type.as_deref() {
                    *votes.entry((t, label.room_id)).or_default() += 1;
                }
                if let Some(c) = &label.category {
                    cats.insert(c.clone());
                }
            }
            let top = votes.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(k, _)| *k);
            RoomEntry {
                room_type: top.map_or("unknown", |t| t.0).to_string(),
                room_id: top.and_then(|t| t.1),
                object_categories: cats.into_iter().collect(),
                via_door,
            }
        })
        .collect();
    SceneDescription {
        rooms,
        current_pose: obs.agent_pose,
        target_category: target.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QueryKind {
    FrontierChoice,
    FineAction,
    KeypointTargetReview,
    KeypointStairReview,
}

impl QueryKind {
    pub fn name(self) -> &'static str {
        match self {
            QueryKind::FrontierChoice => "frontier_choice",
            QueryKind::FineAction => "fine_action",
            QueryKind::KeypointTargetReview => "keypoint_target_review",
            QueryKind::KeypointStairReview => "keypoint_stair_review",
        }
    }

    /// Review of targets may legitimately select nothing or several.
    pub fn allows_many(self) -> bool {
        self == QueryKind::KeypointTargetReview
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyPointSummary {
    /// Index into the floor's keypoint list.
    pub index: usize,
    pub floor: usize,
    pub pos: CellPos,
    pub kind: KeyPointKind,
    pub open_area_m2: f64,
    pub categories: Vec<String>,
    pub stair_cells: Vec<CellPos>,
    pub visited_step: usize,
}

impl KeyPointSummary {
    pub fn of(index: usize, k: &KeyPoint) -> Self {
        let categories: BTreeSet<String> = k.snapshot.categories().map(str::to_string).collect();
        Self {
            index,
            floor: k.floor,
            pos: k.pos,
            kind: k.kind,
            open_area_m2: k.open_area_m2,
            categories: categories.into_iter().collect(),
            stair_cells: k
                .snapshot
                .visible_cells
                .iter()
                .filter(|c| c.kind.is_stair())
                .map(|c| c.pos)
                .collect(),
            visited_step: k.visited_step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Candidate {
    Region {
        room_type: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        room_id: Option<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        via_door: Option<CellPos>,
        frontier: CellPos,
    },
    Action {
        action: Action,
    },
    KeyPoint(KeyPointSummary),
}

/// Local context for fine-grained motion.
#[derive(Debug, Clone, PartialEq)]
pub struct FineContext {
    pub pose: Pose,
    pub goal: CellPos,
    pub map: VisibilityMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReasonerQuery {
    pub kind: QueryKind,
    pub target: String,
    pub scene: Option<SceneDescription>,
    pub candidates: Vec<Candidate>,
    pub fine: Option<FineContext>,
    /// Text sketch of the known map around the agent.
    pub map_sketch: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReasonerDecision {
    /// Candidate indices, best first. Exactly one except for target review.
    pub chosen: Vec<usize>,
    pub confidence: f64,
    pub rationale: String,
    /// Set when a remote decision fell back to the scripted rules.
    #[serde(default)]
    pub fallback: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ReasonerDecision {
    pub fn first(&self) -> Option<usize> {
        self.chosen.first().copied()
    }
}

pub trait Reasoner: Send + Sync {
    fn decide(&self, query: &ReasonerQuery) -> ReasonerDecision;
}

impl<R: Reasoner + ?Sized> Reasoner for Box<R> {
    fn decide(&self, query: &ReasonerQuery) -> ReasonerDecision {
        (**self).decide(query)
    }
}

impl<R: Reasoner + ?Sized> Reasoner for std::sync::Arc<R> {
    fn decide(&self, query: &ReasonerQuery) -> ReasonerDecision {
        (**self).decide(query)
    }
}

/// Known map around `center` as text, with `@` for the agent and `G` for the
/// goal when given.
pub fn map_sketch(map: &VisibilityMap, center: CellPos, radius: i32, goal: Option<CellPos>) -> String {
    let mut s = String::new();
    for y in (center.y - radius)..=(center.y + radius) {
        for x in (center.x - radius)..=(center.x + radius) {
            let c = CellPos::new(x, y);
            let ch = if c == center {
                '@'
            } else if Some(c) == goal {
                'G'
            } else {
                map.state(c).map_or(' ', |v| v.legend())
            };
            s.push(ch);
        }
        s.push('\n');
    }
    s
}

/// Builds a fine-action query over the five motion actions.
pub fn fine_action_query(obs: &Observation, map: &VisibilityMap, goal: CellPos, target: &str) -> ReasonerQuery {
    ReasonerQuery {
        kind: QueryKind::FineAction,
        target: target.to_string(),
        scene: Some(build_scene_description(obs, target)),
        candidates: Action::MOTION.iter().map(|&action| Candidate::Action { action }).collect(),
        fine: Some(FineContext {
            pose: obs.agent_pose,
            goal,
            map: map.clone(),
        }),
        map_sketch: map_sketch(map, obs.agent_pose.cell(), 8, Some(goal)),
    }
}
