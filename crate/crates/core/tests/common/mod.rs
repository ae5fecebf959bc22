//! Independent oracles shared by the integration tests. Nothing here calls
//! into the planner or sensor internals it is used to check.
#![allow(dead_code)]

pub mod mock;
pub mod paths;
pub mod select;
pub mod sm;

use aerr_nav::grid::{CellPos, CELL_SIZE};
use aerr_nav::mapping::VisibilityMap;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

/// Exact slab test: cells a ray passes through with positive length, sorted
/// by entry distance, truncated after the first opaque cell.
pub fn ray_cells_bruteforce(
    width: i32,
    height: i32,
    origin: (f64, f64),
    angle_deg: f64,
    range: f64,
    opaque: &dyn Fn(CellPos) -> bool,
) -> Vec<CellPos> {
    let rad = angle_deg.to_radians();
    let (dx, dy) = (rad.cos(), rad.sin());
    let mut hits: Vec<(f64, CellPos)> = Vec::new();
    for y in 0..height {
        for x in 0..width {
            let x0 = f64::from(x) * CELL_SIZE;
            let y0 = f64::from(y) * CELL_SIZE;
            let (x1, y1) = (x0 + CELL_SIZE, y0 + CELL_SIZE);
            let (mut t_in, mut t_out) = (f64::NEG_INFINITY, f64::INFINITY);
            for (o, d, lo, hi) in [(origin.0, dx, x0, x1), (origin.1, dy, y0, y1)] {
                if d.abs() < 1e-15 {
                    if o < lo || o >= hi {
                        t_in = f64::INFINITY;
                    }
                } else {
                    let a = (lo - o) / d;
                    let b = (hi - o) / d;
                    t_in = t_in.max(a.min(b));
                    t_out = t_out.min(a.max(b));
                }
            }
            let entry = t_in.max(0.0);
            if t_out > entry && entry <= range {
                hits.push((entry, CellPos::new(x, y)));
            }
        }
    }
    hits.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::new();
    for (_, c) in hits {
        out.push(c);
        if opaque(c) {
            break;
        }
    }
    out
}

pub fn fan_bruteforce(
    width: i32,
    height: i32,
    origin: (f64, f64),
    angles: &[f64],
    range: f64,
    opaque: &dyn Fn(CellPos) -> bool,
) -> BTreeSet<CellPos> {
    let mut seen = BTreeSet::new();
    seen.insert(CellPos::containing(origin.0, origin.1));
    for &a in angles {
        seen.extend(ray_cells_bruteforce(width, height, origin, a, range, opaque));
    }
    seen
}

/// Plain O(V²) Dijkstra over an explicit adjacency, no heap.
pub fn dense_dijkstra(nodes: usize, edges: &BTreeMap<usize, Vec<(usize, f64)>>, source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; nodes];
    let mut done = vec![false; nodes];
    dist[source] = 0.0;
    for _ in 0..nodes {
        let mut best = None;
        for v in 0..nodes {
            if !done[v] && dist[v].is_finite() && best.is_none_or(|b: usize| dist[v] < dist[b]) {
                best = Some(v);
            }
        }
        let Some(u) = best else { break };
        done[u] = true;
        if let Some(adj) = edges.get(&u) {
            for &(v, w) in adj {
                if dist[u] + w < dist[v] {
                    dist[v] = dist[u] + w;
                }
            }
        }
    }
    dist
}

/// 8-connected lattice adjacency without corner cutting.
pub fn lattice_edges(width: i32, height: i32, open: &dyn Fn(CellPos) -> bool) -> BTreeMap<usize, Vec<(usize, f64)>> {
    let idx = |c: CellPos| (c.y * width + c.x) as usize;
    let inside = |c: CellPos| c.x >= 0 && c.y >= 0 && c.x < width && c.y < height;
    let mut edges = BTreeMap::new();
    for y in 0..height {
        for x in 0..width {
            let c = CellPos::new(x, y);
            if !open(c) {
                continue;
            }
            let mut adj = Vec::new();
            for dy in -1..=1 {
                for dx in -1..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let n = CellPos::new(x + dx, y + dy);
                    if !inside(n) || !open(n) {
                        continue;
                    }
                    if dx != 0 && dy != 0 {
                        let a = CellPos::new(x + dx, y);
                        let b = CellPos::new(x, y + dy);
                        if !(inside(a) && open(a) && inside(b) && open(b)) {
                            continue;
                        }
                        adj.push((idx(n), CELL_SIZE * 2f64.sqrt()));
                    } else {
                        adj.push((idx(n), CELL_SIZE));
                    }
                }
            }
            edges.insert(idx(c), adj);
        }
    }
    edges
}

/// Random visibility map: Unknown, Occupied, a few doors and up-stairs, rest Free.
pub fn random_map(rng: &mut ChaCha8Rng, w: usize, h: usize, p_unknown: f64, p_wall: f64) -> VisibilityMap {
    let rows: Vec<String> = (0..h)
        .map(|_| {
            (0..w)
                .map(|_| {
                    let r: f64 = rng.gen();
                    if r < p_unknown {
                        '?'
                    } else if r < p_unknown + p_wall {
                        '#'
                    } else if r < p_unknown + p_wall + 0.02 {
                        'D'
                    } else if r < p_unknown + p_wall + 0.03 {
                        'U'
                    } else {
                        '.'
                    }
                })
                .collect()
        })
        .collect();
    let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
    VisibilityMap::from_text(&refs).unwrap()
}

/// Wraps a reasoner and records the kind of every query.
pub struct Recording<R> {
    pub inner: R,
    pub kinds: std::sync::Mutex<Vec<aerr_nav::reasoner::QueryKind>>,
}

impl<R> Recording<R> {
    pub fn new(inner: R) -> Self {
        Self { inner, kinds: Default::default() }
    }

    pub fn count(&self) -> usize {
        self.kinds.lock().unwrap().len()
    }
}

impl<R: aerr_nav::reasoner::Reasoner> aerr_nav::reasoner::Reasoner for Recording<R> {
    fn decide(&self, q: &aerr_nav::reasoner::ReasonerQuery) -> aerr_nav::reasoner::ReasonerDecision {
        self.kinds.lock().unwrap().push(q.kind);
        self.inner.decide(q)
    }
}

/// The scripted reasoner over the bundled priors.
pub fn scripted() -> aerr_nav::reasoner::ScriptedReasoner {
    aerr_nav::reasoner::ScriptedReasoner::new(aerr_nav::priors::default_priors(), 0.7)
}

/// The bundled scenario directory.
pub fn scenario_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../assets/scenarios")
}
