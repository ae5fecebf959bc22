use super::{run_episode, EpisodeResult};
use crate::config::EpisodeConfig;
use crate::priors::PriorTable;
use crate::reasoner::Reasoner;
use crate::world::load_scenario;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Per-episode numbers of a batch, without trajectory and log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub scenario: String,
    pub tags: Vec<String>,
    pub success: bool,
    pub steps: usize,
    pub path_length_m: f64,
    pub optimal_length_m: Option<f64>,
    pub spl_term: f64,
    pub floors_visited: Vec<usize>,
    pub reasoner_calls: usize,
    pub reasoner_fallbacks: usize,
}

impl From<&EpisodeResult> for EpisodeRecord {
    fn from(r: &EpisodeResult) -> Self {
        Self {
            scenario: r.scenario.clone(),
            tags: r.tags.clone(),
            success: r.success,
            steps: r.steps,
            path_length_m: r.path_length_m,
            optimal_length_m: r.optimal_length_m,
            spl_term: r.spl_term,
            floors_visited: r.floors_visited.clone(),
            reasoner_calls: r.reasoner_calls,
            reasoner_fallbacks: r.reasoner_fallbacks,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub episodes: usize,
    pub successes: usize,
    pub sr: f64,
    pub spl: f64,
    pub mean_steps: f64,
    /// Mean steps over successful episodes only.
    pub mean_steps_success: Option<f64>,
}

pub fn aggregate<'a>(records: impl IntoIterator<Item = &'a EpisodeRecord>) -> Aggregate {
    let (mut n, mut ok, mut spl, mut steps, mut ok_steps) = (0usize, 0usize, 0.0, 0usize, 0usize);
    for r in records {
        n += 1;
        steps += r.steps;
        spl += r.spl_term;
        if r.success {
            ok += 1;
            ok_steps += r.steps;
        }
    }
    let nf = n.max(1) as f64;
    Aggregate {
        episodes: n,
        successes: ok,
        sr: ok as f64 / nf,
        spl: spl / nf,
        mean_steps: steps as f64 / nf,
        mean_steps_success: (ok > 0).then(|| ok_steps as f64 / ok as f64),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFailure {
    pub scenario: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub config_digest: String,
    pub label: String,
    pub episodes: Vec<EpisodeRecord>,
    pub failures: Vec<ScenarioFailure>,
    pub overall: Aggregate,
    pub tags: BTreeMap<String, Aggregate>,
}

/// SHA-256 of the config's canonical JSON.
pub fn config_digest(cfg: &EpisodeConfig) -> String {
    let json = serde_json::to_string(cfg).expect("config serializes");
    hex::encode(Sha256::digest(json.as_bytes()))
}

/// `*.json` files of a directory, sorted by name.
pub fn discover_scenarios(dir: impl AsRef<Path>) -> std::io::Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    out.sort();
    Ok(out)
}

/// Runs every scenario on a pool of `jobs` threads. A scenario that fails to
/// load or run is reported and the rest continue. Results keep the input
/// order, so the report does not depend on `jobs`.
pub fn run_batch(
    scenarios: &[PathBuf],
    cfg: &EpisodeConfig,
    priors: &PriorTable,
    reasoner: &dyn Reasoner,
    jobs: usize,
) -> BatchReport {
    let run_one = |p: &PathBuf| -> Result<EpisodeResult, ScenarioFailure> {
        let fail = |e: String| ScenarioFailure {
            scenario: p.display().to_string(),
            error: e,
        };
        let world = load_scenario(p).map_err(|e| fail(e.to_string()))?;
        run_episode(&world, cfg, priors, reasoner).map_err(|e| fail(e.to_string()))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool");
    let outcomes: Vec<Result<EpisodeResult, ScenarioFailure>> = pool.install(|| scenarios.par_iter().map(run_one).collect());

    let mut episodes = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => episodes.push(EpisodeRecord::from(&r)),
            Err(f) => {
                log::warn!("{}: {}", f.scenario, f.error);
                failures.push(f);
            }
        }
    }
    let mut by_tag: BTreeMap<String, Vec<&EpisodeRecord>> = BTreeMap::new();
    for e in &episodes {
        for t in &e.tags {
            by_tag.entry(t.clone()).or_default().push(e);
        }
    }
    let tags = by_tag.into_iter().map(|(t, rs)| (t, aggregate(rs))).collect();
    BatchReport {
        config_digest: config_digest(cfg),
        label: cfg.ablation.label(),
        overall: aggregate(&episodes),
        tags,
        episodes,
        failures,
    }
}
