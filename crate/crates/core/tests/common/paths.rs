//! A* against plain Dijkstra on random grids.

use super::{dense_dijkstra, lattice_edges, random_map};
use aerr_nav::grid::CellPos;
use aerr_nav::mapping::{StairDir, VisState, VisibilityMap};
use aerr_nav::recovery::{astar, path_length};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Checks one path: endpoints, unit 8-steps over open cells, no corner
/// cutting.
pub fn check_path(path: &[CellPos], a: CellPos, b: CellPos, open: &dyn Fn(CellPos) -> bool) -> Result<(), String> {
    if path.first() != Some(&a) || path.last() != Some(&b) {
        return Err(format!("path does not run {a:?} -> {b:?}"));
    }
    for w in path.windows(2) {
        let (p, q) = (w[0], w[1]);
        if p.chebyshev(q) != 1 || !open(q) {
            return Err(format!("bad step {p:?} -> {q:?}"));
        }
        if p.x != q.x && p.y != q.y && !(open(CellPos::new(q.x, p.y)) && open(CellPos::new(p.x, q.y))) {
            return Err(format!("corner cut {p:?} -> {q:?}"));
        }
    }
    Ok(())
}

/// One 30×30 grid, several random queries. Returns (queries, reachable).
pub fn astar_matches_dijkstra(seed: u64) -> Result<(usize, usize), String> {
    let (w, h) = (30i32, 30i32);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let map: VisibilityMap = random_map(&mut rng, w as usize, h as usize, 0.0, 0.3);
    let free: Vec<CellPos> = (0..h)
        .flat_map(|y| (0..w).map(move |x| CellPos::new(x, y)))
        .filter(|&c| map.state(c) == Some(VisState::Free))
        .collect();
    let mut reachable = 0;
    let queries = 5;
    for _ in 0..queries {
        let a = free[rng.gen_range(0..free.len())];
        let b = CellPos::new(rng.gen_range(0..w), rng.gen_range(0..h));
        let open = |c: CellPos| match map.state(c) {
            Some(VisState::Free | VisState::Door) => true,
            Some(VisState::Stair(StairDir::Up | StairDir::Down)) => c == a || c == b,
            _ => false,
        };
        let edges = lattice_edges(w, h, &open);
        let dist = dense_dijkstra((w * h) as usize, &edges, (a.y * w + a.x) as usize);
        let expected = if open(b) { dist[(b.y * w + b.x) as usize] } else { f64::INFINITY };
        match astar(&map, a, b) {
            Ok(path) => {
                check_path(&path, a, b, &open).map_err(|e| format!("seed {seed}: {e}"))?;
                let cost = path_length(&path);
                if (cost - expected).abs() > 1e-9 {
                    return Err(format!("seed {seed} {a:?}->{b:?}: astar {cost} vs oracle {expected}"));
                }
                reachable += 1;
            }
            Err(_) if expected.is_infinite() => {}
            Err(e) => return Err(format!("seed {seed}: {e} but oracle has {expected}")),
        }
    }
    Ok((queries, reachable))
}
