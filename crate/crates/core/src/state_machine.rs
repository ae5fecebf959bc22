//! The exploration / recovery / reminiscing controller states, trigger
//! detection and the transition relation.

use crate::config::StuckConfig;
use crate::grid::CellPos;
use crate::world::Pose;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExplorationMode {
    Fast,
    Slow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RecoveryMode {
    FarFrontier,
    NearFrontier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ReminiscingStage {
    TargetVerify,
    StaircaseSearch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum AgentState {
    Exploration { mode: ExplorationMode },
    Recovery { mode: RecoveryMode, frontier: CellPos },
    Reminiscing { stage: ReminiscingStage },
}

impl Default for AgentState {
    fn default() -> Self {
        AgentState::Exploration {
            mode: ExplorationMode::Fast,
        }
    }
}

impl AgentState {
    pub const EXP_FAST: AgentState = AgentState::Exploration {
        mode: ExplorationMode::Fast,
    };
    pub const EXP_SLOW: AgentState = AgentState::Exploration {
        mode: ExplorationMode::Slow,
    };
    pub const REM_VERIFY: AgentState = AgentState::Reminiscing {
        stage: ReminiscingStage::TargetVerify,
    };
    pub const REM_STAIRS: AgentState = AgentState::Reminiscing {
        stage: ReminiscingStage::StaircaseSearch,
    };

    pub fn label(&self) -> &'static str {
        match self {
            AgentState::Exploration { mode: ExplorationMode::Fast } => "exploration/fast",
            AgentState::Exploration { mode: ExplorationMode::Slow } => "exploration/slow",
            AgentState::Recovery { mode: RecoveryMode::FarFrontier, .. } => "recovery/far",
            AgentState::Recovery { mode: RecoveryMode::NearFrontier, .. } => "recovery/near",
            AgentState::Reminiscing { stage: ReminiscingStage::TargetVerify } => "reminiscing/verify",
            AgentState::Reminiscing { stage: ReminiscingStage::StaircaseSearch } => "reminiscing/staircase",
        }
    }

    pub fn is_exploration(&self) -> bool {
        matches!(self, AgentState::Exploration { .. })
    }

    pub fn is_recovery(&self) -> bool {
        matches!(self, AgentState::Recovery { .. })
    }

    pub fn is_reminiscing(&self) -> bool {
        matches!(self, AgentState::Reminiscing { .. })
    }
}

impl fmt::Display for AgentState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triggers {
    pub stuck: bool,
    pub exhausted: bool,
    pub recovery_done: bool,
    pub reminisce_done: bool,
    pub door_seen: bool,
    pub slow_decision_done: bool,
    pub floor_changed: bool,
}

impl Triggers {
    pub const COUNT: usize = 7;

    /// The `i`-th of the 128 flag combinations.
    pub fn from_bits(bits: u8) -> Self {
        let b = |i: u8| bits & (1 << i) != 0;
        Self {
            stuck: b(0),
            exhausted: b(1),
            recovery_done: b(2),
            reminisce_done: b(3),
            door_seen: b(4),
            slow_decision_done: b(5),
            floor_changed: b(6),
        }
    }

    pub fn any(&self) -> bool {
        *self != Self::default()
    }
}

/// The frontier the agent is pursuing, with its geodesic distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierContext {
    pub cell: CellPos,
    pub distance_m: f64,
}

/// The transition relation. Priority: floor change, stuck (exploration only,
/// needs a frontier), exhaustion, recovery done, reminiscing stage done, door
/// sighting, slow decision done.
pub fn transition(state: AgentState, t: &Triggers, frontier: Option<FrontierContext>, d_split_m: f64) -> AgentState {
    use AgentState::*;
    if t.floor_changed {
        return AgentState::EXP_FAST;
    }
    if t.stuck && state.is_exploration() {
        if let Some(f) = frontier {
            let mode = if f.distance_m > d_split_m {
                RecoveryMode::FarFrontier
            } else {
                RecoveryMode::NearFrontier
            };
            return Recovery { mode, frontier: f.cell };
        }
    }
    if t.exhausted && !state.is_reminiscing() {
        return AgentState::REM_VERIFY;
    }
    match state {
        Recovery { .. } if t.recovery_done => AgentState::EXP_FAST,
        Reminiscing {
            stage: ReminiscingStage::TargetVerify,
        } if t.reminisce_done => AgentState::REM_STAIRS,
        Exploration {
            mode: ExplorationMode::Fast,
        } if t.door_seen => AgentState::EXP_SLOW,
        Exploration {
            mode: ExplorationMode::Slow,
        } if t.slow_decision_done => AgentState::EXP_FAST,
        s => s,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StuckError {
    #[error("pose history holds {have} poses, needs {need}")]
    InsufficientHistory { have: usize, need: usize },
}

/// Ring buffer of the last `n_rec + 1` positions.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseHistory {
    capacity: usize,
    positions: VecDeque<(f64, f64)>,
}

impl PoseHistory {
    pub fn new(n_rec: usize) -> Self {
        Self {
            capacity: n_rec + 1,
            positions: VecDeque::with_capacity(n_rec + 1),
        }
    }

    pub fn push(&mut self, pose: &Pose) {
        self.push_xy(pose.x, pose.y);
    }

    pub fn push_xy(&mut self, x: f64, y: f64) {
        if self.positions.len() == self.capacity {
            self.positions.pop_front();
        }
        self.positions.push_back((x, y));
    }

    pub fn clear(&mut self) {
        self.positions.clear();
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.positions.len() == self.capacity
    }
}

/// Stuck when the mean of the window lies within `d_rec` of the position
/// `n_rec` steps ago. The mean runs over the whole window, start included.
pub fn detect_stuck(history: &PoseHistory, cfg: &StuckConfig) -> Result<bool, StuckError> {
    let need = cfg.n_rec + 1;
    if history.len() < need {
        return Err(StuckError::InsufficientHistory {
            have: history.len(),
            need,
        });
    }
    let window: Vec<(f64, f64)> = history.positions.iter().rev().take(need).copied().collect();
    let n = window.len() as f64;
    let mx = window.iter().map(|p| p.0).sum::<f64>() / n;
    let my = window.iter().map(|p| p.1).sum::<f64>() / n;
    let (sx, sy) = window[window.len() - 1];
    Ok((mx - sx).hypot(my - sy) < cfg.d_rec_m)
}

/// One line of the per-step state log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogLine {
    pub step: usize,
    pub state: AgentState,
    pub triggers: Triggers,
    pub pose: Pose,
    pub action: crate::world::Action,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frontier: Option<CellPos>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frontier_distance_m: Option<f64>,
    #[serde(default)]
    pub approaching: bool,
    /// Keypoints recorded this step.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub keypoints: Vec<CellPos>,
}

impl LogLine {
    pub fn frontier_context(&self) -> Option<FrontierContext> {
        match (self.frontier, self.frontier_distance_m) {
            (Some(cell), Some(distance_m)) => Some(FrontierContext { cell, distance_m }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("step {step}: {from} with triggers {triggers:?} must become {expected}, log says {found}")]
pub struct ReplayViolation {
    pub step: usize,
    pub from: AgentState,
    pub triggers: Triggers,
    pub expected: AgentState,
    pub found: AgentState,
}

/// Replays a log from the initial state and reports every line whose state
/// does not follow from the previous state and its triggers.
pub fn validate_log(lines: &[LogLine], d_split_m: f64) -> Vec<ReplayViolation> {
    let mut prev = AgentState::default();
    let mut out = Vec::new();
    for line in lines {
        let expected = transition(prev, &line.triggers, line.frontier_context(), d_split_m);
        if expected != line.state {
            out.push(ReplayViolation {
                step: line.step,
                from: prev,
                triggers: line.triggers,
                expected,
                found: line.state,
            });
        }
        prev = line.state;
    }
    out
}
