//! Closed-form frontier selection: objective J = αV + βI, expected
//! uncertainty reduction I, the exploration reward and its weight schedule.

use crate::grid::{CellPos, CELL_AREA};
use crate::mapping::{Frontier, FrontierKind, VisState, VisibilityMap};
use crate::raycast::{cast_fan, RayHit};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FastThinkingError {
    #[error("no intra-floor frontier to select")]
    NoFrontiers,
}

/// Currently-Unknown cells that a 360° view from `f` could reveal: rays pass
/// through Unknown and stop at known Occupied cells; only cells whose
/// centre lies within `range_m` count.
pub fn coverage_area(vis: &VisibilityMap, f: CellPos, fov_deg: f64, range_m: f64) -> BTreeSet<CellPos> {
    let (ox, oy) = f.center();
    cast_fan((ox, oy), 0.0, fov_deg, range_m, |p| match vis.state(p) {
        None => RayHit::OutOfBounds,
        Some(VisState::Occupied) => RayHit::Opaque,
        Some(_) => RayHit::Transparent,
    })
    .into_keys()
    .filter(|&p| {
        let (cx, cy) = p.center();
        vis.state(p) == Some(VisState::Unknown) && (cx - ox).hypot(cy - oy) <= range_m + 1e-9
    })
    .collect()
}

/// Gaussian kernel density over scored boundary cells, truncated at 4σ.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyField {
    pub sigma_g: f64,
    sources: Vec<(CellPos, f64)>,
}

impl UncertaintyField {
    pub fn new(sigma_g: f64) -> Self {
        Self {
            sigma_g,
            sources: Vec::new(),
        }
    }

    /// Negative scores are clamped to zero so the density stays nonnegative.
    pub fn add(&mut self, cell: CellPos, score: f64) {
        self.sources.push((cell, score.max(0.0)));
    }

    /// Every member of every intra-floor frontier contributes
    /// `base + (1 - base) * s_sem` of its cluster.
    pub fn from_frontiers(frontiers: &[Frontier], sigma_g: f64, base: f64) -> Self {
        let mut field = Self::new(sigma_g);
        for f in frontiers.iter().filter(|f| f.kind == FrontierKind::IntraFloor) {
            let c = base + (1.0 - base) * f.s_sem;
            for &m in &f.members {
                field.add(m, c);
            }
        }
        field
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut sources = self.sources.clone();
        sources.extend_from_slice(&other.sources);
        Self {
            sigma_g: self.sigma_g,
            sources,
        }
    }

    pub fn density(&self, p: CellPos) -> f64 {
        let cutoff = 4.0 * self.sigma_g;
        let two_s2 = 2.0 * self.sigma_g * self.sigma_g;
        self.sources
            .iter()
            .map(|&(c, s)| {
                let r = c.metric_distance(p);
                if r <= cutoff {
                    s * (-r * r / two_s2).exp()
                } else {
                    0.0
                }
            })
            .sum()
    }
}

/// I(f|F): density integrated over the coverage of `f`, plus `lambda` times
/// the area shared with every other frontier's coverage.
pub fn info_gain(
    coverage: &BTreeSet<CellPos>,
    others: &[&BTreeSet<CellPos>],
    density: &mut impl FnMut(CellPos) -> f64,
    lambda_overlap: f64,
) -> f64 {
    let mass: f64 = coverage.iter().map(|&p| density(p) * CELL_AREA).sum();
    let overlap: f64 = others
        .iter()
        .map(|o| coverage.intersection(o).count() as f64 * CELL_AREA)
        .sum();
    mass + lambda_overlap * overlap
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErConfig {
    pub sigma: [f64; 3],
    pub k_max: u32,
    pub alpha_min: f64,
    pub beta_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErState {
    pub k: u32,
    pub unexplored_ratio: f64,
    pub frontier_density: f64,
    pub er: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl ErState {
    /// `n_total` is the running maximum of the frontier count.
    pub fn compute(k: u32, unknown: usize, cells: usize, n_frontier: usize, n_total: usize, cfg: &ErConfig) -> Self {
        let unexplored_ratio = if cells == 0 { 0.0 } else { unknown as f64 / cells as f64 };
        let frontier_density = if n_total == 0 { 0.0 } else { n_frontier as f64 / n_total as f64 };
        let er = exploration_reward(unexplored_ratio, frontier_density, k, cfg);
        let (alpha, beta) = update_weights(er, cfg);
        Self {
            k,
            unexplored_ratio,
            frontier_density,
            er,
            alpha,
            beta,
        }
    }
}

pub fn exploration_reward(unexplored_ratio: f64, frontier_density: f64, k: u32, cfg: &ErConfig) -> f64 {
    let [s1, s2, s3] = cfg.sigma;
    let time = (f64::from(k) / f64::from(cfg.k_max)).clamp(0.0, 1.0);
    s1 * unexplored_ratio.clamp(0.0, 1.0) + s2 * frontier_density.clamp(0.0, 1.0) + s3 * (1.0 - time)
}

pub fn update_weights(er: f64, cfg: &ErConfig) -> (f64, f64) {
    (cfg.alpha_min * (1.0 - er), cfg.beta_max * er)
}

pub fn objective(value: f64, info: f64, alpha: f64, beta: f64) -> f64 {
    alpha * value + beta * info
}

/// Gains mapped onto [0, 1]: divided by the largest when none is negative,
/// otherwise shifted by the smallest first. All zero when the gains are equal
/// and not positive.
pub fn normalize_gains(gains: &[f64]) -> Vec<f64> {
    let lo = gains.iter().copied().fold(0.0, f64::min);
    let hi = gains.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    gains
        .iter()
        .map(|&g| if hi > lo { (g - lo) / (hi - lo) } else { 0.0 })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub cell: CellPos,
    pub value: f64,
    pub info_gain: f64,
    pub info_norm: f64,
    pub objective: f64,
    pub distance_m: f64,
}

/// Index of the highest objective; ties go to the shorter distance, then the
/// smaller cell.
pub fn argmax_objective(scores: &[CandidateScore]) -> Option<usize> {
    (0..scores.len()).min_by(|&i, &j| {
        let (a, b) = (&scores[i], &scores[j]);
        b.objective
            .total_cmp(&a.objective)
            .then(a.distance_m.total_cmp(&b.distance_m))
            .then(a.cell.cmp(&b.cell))
    })
}

/// Scores every candidate from its value and (normalized) info gain.
pub fn score_candidates(values: &[f64], gains: &[f64], distances: &[f64], cells: &[CellPos], alpha: f64, beta: f64) -> Vec<CandidateScore> {
    let norm = normalize_gains(gains);
    (0..values.len())
        .map(|i| CandidateScore {
            cell: cells[i],
            value: values[i],
            info_gain: gains[i],
            info_norm: norm[i],
            objective: objective(values[i], norm[i], alpha, beta),
            distance_m: distances[i],
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub frontier: Frontier,
    pub scores: Vec<CandidateScore>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectParams {
    pub alpha: f64,
    pub beta: f64,
    pub fov_deg: f64,
    pub range_m: f64,
    pub lambda_overlap: f64,
}

/// Picks the intra-floor frontier maximising J. Frontiers must already carry
/// their value and distance.
pub fn select_frontier(
    vis: &VisibilityMap,
    frontiers: &[Frontier],
    field: &UncertaintyField,
    params: &SelectParams,
) -> Result<Selection, FastThinkingError> {
    let cands: Vec<&Frontier> = frontiers.iter().filter(|f| f.kind == FrontierKind::IntraFloor).collect();
    if cands.is_empty() {
        return Err(FastThinkingError::NoFrontiers);
    }
    let covers: Vec<BTreeSet<CellPos>> = cands
        .iter()
        .map(|f| coverage_area(vis, f.cell, params.fov_deg, params.range_m))
        .collect();
    let mut cache: HashMap<CellPos, f64> = HashMap::new();
    let mut density = |p: CellPos| *cache.entry(p).or_insert_with(|| field.density(p));
    let gains: Vec<f64> = (0..cands.len())
        .map(|i| {
            let others: Vec<&BTreeSet<CellPos>> = (0..cands.len()).filter(|&j| j != i).map(|j| &covers[j]).collect();
            info_gain(&covers[i], &others, &mut density, params.lambda_overlap)
        })
        .collect();
    let values: Vec<f64> = cands.iter().map(|f| f.value).collect();
    let distances: Vec<f64> = cands.iter().map(|f| f.distance_m).collect();
    let cells: Vec<CellPos> = cands.iter().map(|f| f.cell).collect();
    let scores = score_candidates(&values, &gains, &distances, &cells, params.alpha, params.beta);
    let best = argmax_objective(&scores).expect("nonempty");
    Ok(Selection {
        frontier: cands[best].clone(),
        scores,
    })
}
