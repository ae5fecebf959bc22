mod common;

use aerr_nav::config::StuckConfig;
use aerr_nav::state_machine::{detect_stuck, transition, validate_log, AgentState, PoseHistory, Triggers};
use common::sm::{all_states, contexts, table, valid_log};
use std::collections::{BTreeSet, VecDeque};

#[test]
fn transition_matches_table_exhaustively() {
    let mut n = 0;
    for s in all_states() {
        for bits in 0..(1u8 << Triggers::COUNT) {
            let t = Triggers::from_bits(bits);
            for f in contexts() {
                assert_eq!(transition(s, &t, f, 3.0), table(s, t, f), "{s} {t:?} {f:?}");
                assert_eq!(transition(s, &t, f, 3.0), transition(s, &t, f, 3.0));
                n += 1;
            }
        }
    }
    assert_eq!(n, 6 * 128 * 4);
}

#[test]
fn recovery_never_reenters_itself_from_stuck() {
    for s in all_states().into_iter().filter(|s| s.is_recovery()) {
        let t = Triggers { stuck: true, ..Default::default() };
        assert_eq!(transition(s, &t, contexts()[3], 3.0), s);
    }
}

#[test]
fn every_state_can_return_to_fast_exploration() {
    let mut states: BTreeSet<AgentState> = all_states().into_iter().collect();
    // close the state set under all triggers and contexts
    let mut queue: VecDeque<AgentState> = states.iter().copied().collect();
    while let Some(s) = queue.pop_front() {
        for bits in 0..(1u8 << Triggers::COUNT) {
            for f in contexts() {
                let n = transition(s, &Triggers::from_bits(bits), f, 3.0);
                if states.insert(n) {
                    queue.push_back(n);
                }
            }
        }
    }
    for &s in &states {
        let mut seen = BTreeSet::from([s]);
        let mut queue = VecDeque::from([s]);
        let mut found = false;
        while let Some(c) = queue.pop_front() {
            if c == AgentState::EXP_FAST {
                found = true;
                break;
            }
            for bits in 0..(1u8 << Triggers::COUNT) {
                for f in contexts() {
                    let n = transition(c, &Triggers::from_bits(bits), f, 3.0);
                    if seen.insert(n) {
                        queue.push_back(n);
                    }
                }
            }
        }
        assert!(found, "{s} cannot return to fast exploration");
    }
}

#[test]
fn replay_accepts_valid_and_rejects_every_single_edge_mutation() {
    let log = valid_log();
    assert!(validate_log(&log, 3.0).is_empty());
    let visited: BTreeSet<AgentState> = log.iter().map(|l| l.state).collect();
    assert_eq!(visited.len(), 6);
    let mut mutations = 0;
    for i in 0..log.len() {
        for s in all_states() {
            if s == log[i].state {
                continue;
            }
            let mut bad = log.clone();
            bad[i].state = s;
            assert!(!validate_log(&bad, 3.0).is_empty(), "mutation at {i} to {s} accepted");
            mutations += 1;
        }
    }
    assert!(mutations >= log.len() * 5);
}

#[test]
fn recovery_to_reminiscing_needs_its_trigger() {
    let mut log = valid_log();
    // step 4 sits in recovery; claim it jumped straight to reminiscing
    assert!(log[4].state.is_recovery());
    log[5].state = AgentState::REM_VERIFY;
    let v = validate_log(&log, 3.0);
    assert_eq!(v[0].step, 5);
}

fn run_detector(xs: impl Iterator<Item = (f64, f64)>) -> Option<usize> {
    let cfg = StuckConfig::default();
    let mut h = PoseHistory::new(cfg.n_rec);
    for (i, (x, y)) in xs.enumerate() {
        h.push_xy(x, y);
        if let Ok(true) = detect_stuck(&h, &cfg) {
            return Some(i);
        }
    }
    None
}

#[test]
fn stuck_detector_examples() {
    // stationary: fires as soon as the window is full (after 20 steps)
    assert_eq!(run_detector((0..100).map(|_| (1.0, 1.0))), Some(20));
    // two-cell oscillation
    assert_eq!(run_detector((0..100).map(|i| (0.125 + 0.25 * f64::from(i % 2), 0.125))), Some(20));
    // straight line at 0.25 m/step never fires
    assert_eq!(run_detector((0..400).map(|i| (0.25 * f64::from(i), 0.0))), None);
}

#[test]
fn straight_line_window_mean_is_two_and_a_half_metres() {
    let cfg = StuckConfig::default();
    let mut h = PoseHistory::new(cfg.n_rec);
    for i in 0..=20 {
        h.push_xy(0.25 * f64::from(i), 0.0);
    }
    // mean of 0, 0.25, ..., 5.0 is 2.5; well above 0.5
    let mean: f64 = (0..=20).map(|i| 0.25 * f64::from(i)).sum::<f64>() / 21.0;
    assert!((mean - 2.5).abs() < 1e-12);
    assert!(!detect_stuck(&h, &cfg).unwrap());
}
