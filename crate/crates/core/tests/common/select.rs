//! Brute-force frontier scan and exhaustive objective argmax.

use super::random_map;
use aerr_nav::fast_thinking::coverage_area;
use aerr_nav::grid::CellPos;
use aerr_nav::mapping::{cluster_frontier_cells, Frontier, FrontierKind, VisState, VisibilityMap};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

/// Free or Door cells with an in-bounds Unknown 4-neighbour.
pub fn scan_frontier(map: &VisibilityMap) -> BTreeSet<CellPos> {
    let (w, h) = (map.width() as i32, map.height() as i32);
    let mut out = BTreeSet::new();
    for y in 0..h {
        for x in 0..w {
            if !matches!(map.state(CellPos::new(x, y)), Some(VisState::Free | VisState::Door)) {
                continue;
            }
            let unknown_next = [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|(dx, dy)| {
                let (nx, ny) = (x + dx, y + dy);
                nx >= 0 && ny >= 0 && nx < w && ny < h && map.state(CellPos::new(nx, ny)) == Some(VisState::Unknown)
            });
            if unknown_next {
                out.insert(CellPos::new(x, y));
            }
        }
    }
    out
}

pub fn oracle_density(sources: &[(CellPos, f64)], sigma: f64, p: CellPos) -> f64 {
    let mut d = 0.0;
    for &(c, s) in sources {
        let dx = f64::from(c.x - p.x) * 0.25;
        let dy = f64::from(c.y - p.y) * 0.25;
        let r = (dx * dx + dy * dy).sqrt();
        if r <= 4.0 * sigma {
            d += s * (-(r * r) / (2.0 * sigma * sigma)).exp();
        }
    }
    d
}

/// Up to 15 scored frontiers on a random 40×40 map.
pub fn random_frontiers(rng: &mut ChaCha8Rng, p_unknown: f64) -> (VisibilityMap, Vec<Frontier>) {
    let map = random_map(rng, 40, 40, p_unknown, 0.12);
    let mut clusters = cluster_frontier_cells(&map.frontier_cells(), 3);
    clusters.shuffle(rng);
    clusters.truncate(15);
    let frontiers = clusters
        .into_iter()
        .map(|(cell, members)| Frontier {
            floor: 0,
            cell,
            kind: FrontierKind::IntraFloor,
            members,
            s_sem: rng.gen_range(0.0..1.0),
            s_dist: 0.0,
            value: rng.gen_range(0.0..1.0),
            distance_m: rng.gen_range(0.0..10.0),
        })
        .collect();
    (map, frontiers)
}

/// Argmax of α·V + β·I_norm with a 360° 3 m coverage, a density seeded at
/// every member with weight 0.25 + 0.75·s_sem (σ 1 m) and an overlap
/// penalty of one. Ties go to the nearer, then the smaller cell.
pub fn exhaustive_argmax(map: &VisibilityMap, frontiers: &[Frontier], alpha: f64, beta: f64) -> CellPos {
    let sources: Vec<(CellPos, f64)> = frontiers
        .iter()
        .flat_map(|f| f.members.iter().map(move |&m| (m, 0.25 + 0.75 * f.s_sem)))
        .collect();
    let covers: Vec<BTreeSet<CellPos>> = frontiers.iter().map(|f| coverage_area(map, f.cell, 360.0, 3.0)).collect();
    let gains: Vec<f64> = (0..frontiers.len())
        .map(|i| {
            let mass: f64 = covers[i].iter().map(|&p| oracle_density(&sources, 1.0, p) * 0.0625).sum();
            let overlap: usize = (0..frontiers.len())
                .filter(|&j| j != i)
                .map(|j| covers[i].intersection(&covers[j]).count())
                .sum();
            mass - overlap as f64 * 0.0625
        })
        .collect();
    let lo = gains.iter().cloned().fold(0.0, f64::min);
    let hi = gains.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut best: Option<(f64, f64, CellPos)> = None;
    for (i, f) in frontiers.iter().enumerate() {
        let inorm = if hi > lo { (gains[i] - lo) / (hi - lo) } else { 0.0 };
        let j = alpha * f.value + beta * inorm;
        let key = (j, f.distance_m, f.cell);
        best = match best {
            None => Some(key),
            Some(b) if key.0 > b.0 || (key.0 == b.0 && (key.1 < b.1 || (key.1 == b.1 && key.2 < b.2))) => Some(key),
            keep => keep,
        };
    }
    best.expect("nonempty").2
}
