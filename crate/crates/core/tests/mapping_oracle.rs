mod common;

use aerr_nav::grid::CellPos;
use aerr_nav::mapping::{cluster_frontier_cells, geodesic_distance, StairDir, VisState};
use common::select::scan_frontier;
use common::{dense_dijkstra, lattice_edges, random_map};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

#[test]
fn frontier_cells_match_predicate_scan() {
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let map = random_map(&mut rng, 20, 20, 0.4, 0.15);
        let expected = scan_frontier(&map);
        let got: BTreeSet<CellPos> = map.frontier_cells().into_iter().collect();
        assert_eq!(got, expected, "seed {seed}");

        let clusters = cluster_frontier_cells(&map.frontier_cells(), 3);
        let mut union = BTreeSet::new();
        for (rep, members) in &clusters {
            assert!(members.contains(rep));
            for m in members {
                assert!(union.insert(*m), "cell {m:?} in two clusters");
                assert!(m.chebyshev(members[0]) <= 3);
            }
        }
        assert_eq!(union, expected);
    }
}

#[test]
fn geodesic_matches_dense_dijkstra() {
    let (w, h) = (30i32, 30i32);
    let mut checked = 0;
    let mut reachable = 0;
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let map = random_map(&mut rng, w as usize, h as usize, 0.15, 0.25);
        let free: Vec<CellPos> = (0..h)
            .flat_map(|y| (0..w).map(move |x| CellPos::new(x, y)))
            .filter(|&c| map.state(c) == Some(VisState::Free))
            .collect();
        let frontier = scan_frontier(&map);
        for _ in 0..6 {
            let a = free[rng.gen_range(0..free.len())];
            let b = CellPos::new(rng.gen_range(0..w), rng.gen_range(0..h));
            let via_unknown = frontier.contains(&b);
            let open = |c: CellPos| match map.state(c) {
                Some(VisState::Free | VisState::Door) => true,
                Some(VisState::Stair(StairDir::Up | StairDir::Down)) => c == a || c == b,
                Some(VisState::Unknown) => via_unknown,
                _ => false,
            };
            let edges = lattice_edges(w, h, &open);
            let dist = dense_dijkstra((w * h) as usize, &edges, (a.y * w + a.x) as usize);
            let expected = if open(b) { dist[(b.y * w + b.x) as usize] } else { f64::INFINITY };
            match geodesic_distance(&map, a, b) {
                Ok(d) => {
                    assert!((d - expected).abs() < 1e-9, "seed {seed}: {d} vs {expected}");
                    reachable += 1;
                }
                Err(_) => assert!(expected.is_infinite() && a != b, "seed {seed}: unreachable vs {expected}"),
            }
            checked += 1;
        }
    }
    assert_eq!(checked, 300);
    assert!(reachable > 100, "only {reachable} reachable pairs");
}
