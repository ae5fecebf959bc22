//! The transition table written out independently, and a log that visits
//! every state.

use aerr_nav::grid::CellPos;
use aerr_nav::state_machine::{transition, AgentState, FrontierContext, LogLine, RecoveryMode, Triggers};
use aerr_nav::world::{Action, Heading, Pose};

pub fn all_states() -> Vec<AgentState> {
    let f = CellPos::new(2, 2);
    vec![
        AgentState::EXP_FAST,
        AgentState::EXP_SLOW,
        AgentState::Recovery {
            mode: RecoveryMode::FarFrontier,
            frontier: f,
        },
        AgentState::Recovery {
            mode: RecoveryMode::NearFrontier,
            frontier: f,
        },
        AgentState::REM_VERIFY,
        AgentState::REM_STAIRS,
    ]
}

/// The transition table as an ordered rule list.
pub fn table(s: AgentState, t: Triggers, f: Option<FrontierContext>) -> AgentState {
    let exp = matches!(s, AgentState::Exploration { .. });
    let rec = matches!(s, AgentState::Recovery { .. });
    let rem = matches!(s, AgentState::Reminiscing { .. });
    let rules: [(bool, Box<dyn Fn() -> AgentState>); 7] = [
        (t.floor_changed, Box::new(|| AgentState::EXP_FAST)),
        (
            t.stuck && exp && f.is_some(),
            Box::new(move || {
                let f = f.unwrap();
                AgentState::Recovery {
                    mode: if f.distance_m > 3.0 { RecoveryMode::FarFrontier } else { RecoveryMode::NearFrontier },
                    frontier: f.cell,
                }
            }),
        ),
        (t.exhausted && !rem, Box::new(|| AgentState::REM_VERIFY)),
        (t.recovery_done && rec, Box::new(|| AgentState::EXP_FAST)),
        (t.reminisce_done && s == AgentState::REM_VERIFY, Box::new(|| AgentState::REM_STAIRS)),
        (t.door_seen && s == AgentState::EXP_FAST, Box::new(|| AgentState::EXP_SLOW)),
        (t.slow_decision_done && s == AgentState::EXP_SLOW, Box::new(|| AgentState::EXP_FAST)),
    ];
    rules.iter().find(|(fire, _)| *fire).map_or(s, |(_, next)| next())
}

pub fn contexts() -> Vec<Option<FrontierContext>> {
    vec![
        None,
        Some(FrontierContext { cell: CellPos::new(7, 1), distance_m: 1.0 }),
        Some(FrontierContext { cell: CellPos::new(7, 1), distance_m: 3.0 }),
        Some(FrontierContext { cell: CellPos::new(9, 9), distance_m: 6.0 }),
    ]
}

pub fn line(step: usize, state: AgentState, triggers: Triggers, f: Option<FrontierContext>) -> LogLine {
    LogLine {
        step,
        state,
        triggers,
        pose: Pose { floor: 0, x: 0.125, y: 0.125, heading: Heading::default() },
        action: Action::TurnLeft,
        frontier: f.map(|f| f.cell),
        frontier_distance_m: f.map(|f| f.distance_m),
        approaching: false,
        keypoints: vec![],
    }
}

/// A log visiting every state.
pub fn valid_log() -> Vec<LogLine> {
    let far = contexts()[3];
    let near = contexts()[1];
    let seq: Vec<(Triggers, Option<FrontierContext>)> = vec![
        (Triggers::default(), far),
        (Triggers { door_seen: true, ..Default::default() }, far),
        (Triggers { slow_decision_done: true, ..Default::default() }, far),
        (Triggers { stuck: true, ..Default::default() }, far),
        (Triggers::default(), far),
        (Triggers { recovery_done: true, ..Default::default() }, far),
        (Triggers { stuck: true, ..Default::default() }, near),
        (Triggers { recovery_done: true, ..Default::default() }, near),
        (Triggers { exhausted: true, ..Default::default() }, None),
        (Triggers::default(), None),
        (Triggers { reminisce_done: true, ..Default::default() }, None),
        (Triggers::default(), None),
        (Triggers { floor_changed: true, ..Default::default() }, None),
        (Triggers::default(), near),
    ];
    let mut s = AgentState::default();
    seq.into_iter()
        .enumerate()
        .map(|(i, (t, f))| {
            s = transition(s, &t, f, 3.0);
            line(i, s, t, f)
        })
        .collect()
}
