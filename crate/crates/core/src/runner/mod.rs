//! Episode loop, metrics and batch evaluation.

mod agent;
mod batch;

pub use batch::{
    aggregate, config_digest, discover_scenarios, run_batch, Aggregate, BatchReport, EpisodeRecord, ScenarioFailure,
};

use crate::config::{EpisodeConfig, ReasonerKind};
use crate::grid::CELL_SIZE;
use crate::mapping::FloorMaps;
use crate::priors::{PriorError, PriorTable};
use crate::reasoner::{PromptTemplates, Reasoner, ReasonerDecision, ReasonerQuery, RemoteError, RemoteReasoner, ScriptedReasoner};
use crate::state_machine::LogLine;
use crate::world::{Action, MultiFloorWorld, Pose};
use agent::Agent;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Prior(#[from] PriorError),
    #[error(transparent)]
    Remote(#[from] RemoteError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub scenario: String,
    pub tags: Vec<String>,
    pub success: bool,
    pub stop_issued: bool,
    pub steps: usize,
    /// Distance actually travelled.
    pub path_length_m: f64,
    pub optimal_length_m: Option<f64>,
    pub spl_term: f64,
    pub final_floor: usize,
    pub floors_visited: Vec<usize>,
    pub reasoner_calls: usize,
    pub reasoner_fallbacks: usize,
    pub trajectory: Vec<Pose>,
    pub log: Vec<LogLine>,
}

/// Final belief of an episode, for rendering.
#[derive(Debug, Clone)]
pub struct EpisodeTrace {
    pub result: EpisodeResult,
    pub maps: BTreeMap<usize, FloorMaps>,
}

/// `success · L* / max(L, L*)`; zero without a positive optimum.
pub fn spl_term(success: bool, path_length_m: f64, optimal_length_m: Option<f64>) -> f64 {
    match optimal_length_m {
        Some(opt) if success && opt > 0.0 => opt / path_length_m.max(opt),
        _ => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("episode {0} has no positive optimal path length")]
    MissingOptimal(String),
    #[error("no episodes")]
    Empty,
}

/// Success rate and SPL over the results.
pub fn compute_spl(results: &[EpisodeResult]) -> Result<(f64, f64), MetricError> {
    if results.is_empty() {
        return Err(MetricError::Empty);
    }
    let mut sr = 0.0;
    let mut spl = 0.0;
    for r in results {
        let opt = match r.optimal_length_m {
            Some(o) if o > 0.0 => o,
            _ => return Err(MetricError::MissingOptimal(r.scenario.clone())),
        };
        if r.success {
            sr += 1.0;
            spl += opt / r.path_length_m.max(opt);
        }
    }
    let n = results.len() as f64;
    Ok((sr / n, spl / n))
}

/// Counts decisions and fallbacks passing through.
struct Counting<'a> {
    inner: &'a dyn Reasoner,
    calls: AtomicUsize,
    fallbacks: AtomicUsize,
}

impl Reasoner for Counting<'_> {
    fn decide(&self, query: &ReasonerQuery) -> ReasonerDecision {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let d = self.inner.decide(query);
        if d.fallback {
            self.fallbacks.fetch_add(1, Ordering::Relaxed);
        }
        d
    }
}

/// Builds the reasoner the config selects. The remote endpoint may be
/// overridden with `AERR_REASONER_URL`.
pub fn make_reasoner(cfg: &EpisodeConfig, priors: &PriorTable) -> Result<Box<dyn Reasoner>, RunError> {
    let scripted = ScriptedReasoner::new(priors.clone(), cfg.reasoner.review_threshold);
    Ok(match cfg.reasoner.kind {
        ReasonerKind::Scripted => Box::new(scripted),
        ReasonerKind::Remote => {
            let mut remote = cfg.reasoner.remote.clone();
            if let Ok(url) = std::env::var("AERR_REASONER_URL") {
                if !url.is_empty() {
                    remote.url = url;
                }
            }
            Box::new(RemoteReasoner::new(&remote, PromptTemplates::default(), scripted)?)
        }
    })
}

fn name_seed(name: &str) -> u64 {
    // FNV-1a keeps the per-scenario stream independent of run order
    name.bytes()
        .fold(0xcbf2_9ce4_8422_2325_u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

/// Runs one episode and keeps the final maps.
pub fn run_episode_traced(
    world: &MultiFloorWorld,
    cfg: &EpisodeConfig,
    priors: &PriorTable,
    reasoner: &dyn Reasoner,
) -> Result<EpisodeTrace, RunError> {
    let has_target = world
        .floors
        .iter()
        .any(|f| f.grid.values().any(|c| c.label.category.as_deref() == Some(world.target_category.as_str())));
    let target = priors.resolve(&world.target_category, has_target)?;
    let counting = Counting {
        inner: reasoner,
        calls: AtomicUsize::new(0),
        fallbacks: AtomicUsize::new(0),
    };
    let rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ name_seed(&world.name));
    let mut agent = Agent::new(world, cfg, &target, &counting, rng);
    let mut trajectory = vec![agent.pose];
    let mut path_length_m = 0.0;
    let mut stop_issued = false;
    let mut steps = 0;
    while steps < cfg.max_steps {
        let before = agent.pose;
        let out = agent.step(steps);
        steps += 1;
        if out.action == Action::MoveForward && agent.pose != before {
            path_length_m += CELL_SIZE;
        }
        trajectory.push(agent.pose);
        if out.action == Action::Stop {
            stop_issued = true;
            break;
        }
    }
    let success = world.is_success(&agent.pose, &world.target_category, cfg.success_radius_m, stop_issued);
    let optimal_length_m = world.optimal_path_length_m.or_else(|| world.optimal_path_length());
    let result = EpisodeResult {
        scenario: world.name.clone(),
        tags: world.tags.clone(),
        success,
        stop_issued,
        steps,
        path_length_m,
        optimal_length_m,
        spl_term: spl_term(success, path_length_m, optimal_length_m),
        final_floor: agent.pose.floor,
        floors_visited: agent.maps.keys().copied().collect(),
        reasoner_calls: counting.calls.load(Ordering::Relaxed),
        reasoner_fallbacks: counting.fallbacks.load(Ordering::Relaxed),
        trajectory,
        log: std::mem::take(&mut agent.log),
    };
    Ok(EpisodeTrace {
        result,
        maps: std::mem::take(&mut agent.maps),
    })
}

/// Runs one episode: sense, short-circuit onto a seen target, otherwise
/// update the maps, switch state and act, until Stop or the step budget.
pub fn run_episode(
    world: &MultiFloorWorld,
    cfg: &EpisodeConfig,
    priors: &PriorTable,
    reasoner: &dyn Reasoner,
) -> Result<EpisodeResult, RunError> {
    run_episode_traced(world, cfg, priors, reasoner).map(|t| t.result)
}
