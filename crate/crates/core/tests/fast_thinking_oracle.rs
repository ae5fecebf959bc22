mod common;

use aerr_nav::fast_thinking::{
    argmax_objective, coverage_area, info_gain, normalize_gains, score_candidates, select_frontier, update_weights,
    CandidateScore, ErConfig, SelectParams, UncertaintyField,
};
use aerr_nav::grid::{CellPos, CELL_AREA};
use aerr_nav::mapping::{Frontier, FrontierKind, VisState, VisibilityMap};
use aerr_nav::raycast::ray_angles;
use common::fan_bruteforce;
use common::select::{exhaustive_argmax, random_frontiers};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

fn map_with(w: usize, h: usize, f: impl Fn(i32, i32) -> char) -> VisibilityMap {
    let rows: Vec<String> = (0..h as i32).map(|y| (0..w as i32).map(|x| f(x, y)).collect()).collect();
    let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
    VisibilityMap::from_text(&refs).unwrap()
}

fn disc_raster(center: CellPos, range: f64, keep: impl Fn(CellPos) -> bool) -> BTreeSet<CellPos> {
    let (ox, oy) = center.center();
    let r = (range / 0.25).ceil() as i32 + 1;
    let mut out = BTreeSet::new();
    for dy in -r..=r {
        for dx in -r..=r {
            let c = center.offset(dx, dy);
            let (cx, cy) = c.center();
            if (cx - ox).hypot(cy - oy) <= range && keep(c) {
                out.insert(c);
            }
        }
    }
    out
}

#[test]
fn open_plain_coverage_is_the_full_disc() {
    let map = map_with(40, 40, |x, y| if (x, y) == (20, 20) { '.' } else { '?' });
    let f = CellPos::new(20, 20);
    let cover = coverage_area(&map, f, 360.0, 4.0);
    let expected = disc_raster(f, 4.0, |c| c != f);
    assert_eq!(expected.len(), 796);
    assert_eq!(cover, expected);
}

#[test]
fn known_wall_casts_a_shadow() {
    // wall segment x=24, y=16..=24, frontier at (20,20), everything else unknown
    let wall = |x: i32, y: i32| x == 24 && (16..=24).contains(&y);
    let map = map_with(40, 40, |x, y| {
        if (x, y) == (20, 20) {
            '.'
        } else if wall(x, y) {
            '#'
        } else {
            '?'
        }
    });
    let f = CellPos::new(20, 20);
    let cover = coverage_area(&map, f, 360.0, 4.0);
    let seen = fan_bruteforce(40, 40, f.center(), &ray_angles(0.0, 360.0), 4.0, &|c| wall(c.x, c.y));
    let expected: BTreeSet<CellPos> = disc_raster(f, 4.0, |c| seen.contains(&c) && map.state(c) == Some(VisState::Unknown));
    assert_eq!(cover, expected);
    assert!(!cover.contains(&CellPos::new(26, 20)));
    assert!(!cover.iter().any(|c| wall(c.x, c.y)));
    assert!(cover.contains(&CellPos::new(16, 20)));
}

#[test]
fn identical_discs_pay_the_full_overlap() {
    let map = map_with(40, 40, |x, y| if (x, y) == (20, 20) { '.' } else { '?' });
    let f = CellPos::new(20, 20);
    let a = coverage_area(&map, f, 360.0, 2.0);
    let b = a.clone();
    let area = a.len() as f64 * CELL_AREA;
    let gain = info_gain(&a, &[&b], &mut |_| 0.5, -1.0);
    assert!((gain - (0.5 * area - area)).abs() < 1e-12);
}

#[test]
fn selection_matches_exhaustive_argmax() {
    let mut checked = 0;
    for seed in 0..25u64 {
        for &p_unknown in &[0.2, 0.35, 0.5, 0.65] {
            let mut rng = ChaCha8Rng::seed_from_u64(seed * 31 + (p_unknown * 100.0) as u64);
            let (map, frontiers) = random_frontiers(&mut rng, p_unknown);
            if frontiers.is_empty() {
                continue;
            }
            let field = UncertaintyField::from_frontiers(&frontiers, 1.0, 0.25);
            let er: f64 = rng.gen_range(0.0..1.0);
            let (alpha, beta) = update_weights(
                er,
                &ErConfig {
                    sigma: [1.0 / 3.0; 3],
                    k_max: 500,
                    alpha_min: 1.0,
                    beta_max: 1.0,
                },
            );
            let params = SelectParams {
                alpha,
                beta,
                fov_deg: 360.0,
                range_m: 3.0,
                lambda_overlap: -1.0,
            };
            let got = select_frontier(&map, &frontiers, &field, &params).unwrap();
            assert_eq!(got.frontier.cell, exhaustive_argmax(&map, &frontiers, alpha, beta), "seed {seed} density {p_unknown}");
            checked += 1;
        }
    }
    assert!(checked >= 90, "only {checked} maps had frontiers");
}

#[test]
fn fixed_example_one_and_two_frontiers() {
    let map = map_with(10, 3, |x, _| if x < 5 { '.' } else { '?' });
    let mk = |cell: CellPos, value: f64| Frontier {
        floor: 0,
        cell,
        kind: FrontierKind::IntraFloor,
        members: vec![cell],
        s_sem: 0.0,
        s_dist: 0.0,
        value,
        distance_m: 1.0,
    };
    let params = SelectParams {
        alpha: 0.5,
        beta: 0.5,
        fov_deg: 360.0,
        range_m: 3.0,
        lambda_overlap: -1.0,
    };
    let field = UncertaintyField::new(1.0);
    let one = [mk(CellPos::new(4, 0), 0.1)];
    assert_eq!(select_frontier(&map, &one, &field, &params).unwrap().frontier.cell, CellPos::new(4, 0));
    // symmetric rows give identical gains; the higher value wins
    let two = [mk(CellPos::new(4, 0), 0.1), mk(CellPos::new(4, 2), 0.9)];
    assert_eq!(select_frontier(&map, &two, &field, &params).unwrap().frontier.cell, CellPos::new(4, 2));
    assert!(select_frontier(&map, &[], &field, &params).is_err());
}

fn scores_from(j: &[f64], d: &[f64]) -> Vec<CandidateScore> {
    j.iter()
        .zip(d)
        .enumerate()
        .map(|(i, (&j, &d))| CandidateScore {
            cell: CellPos::new(i as i32 % 3, i as i32 / 3),
            value: 0.0,
            info_gain: 0.0,
            info_norm: 0.0,
            objective: j,
            distance_m: d,
        })
        .collect()
}

proptest! {
    #[test]
    fn argmax_is_scale_invariant(
        j in prop::collection::vec(prop_oneof![Just(0.5f64), Just(1.0), 0.0f64..2.0], 1..12),
        dseed in any::<u64>(),
        pow in -8i32..8,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(dseed);
        let d: Vec<f64> = j.iter().map(|_| f64::from(rng.gen_range(0..4u8))).collect();
        let c = 2f64.powi(pow);
        let scaled: Vec<f64> = j.iter().map(|x| x * c).collect();
        prop_assert_eq!(argmax_objective(&scores_from(&j, &d)), argmax_objective(&scores_from(&scaled, &d)));
    }

    #[test]
    fn field_superposition(
        a in prop::collection::vec((0i32..30, 0i32..30, 0.0f64..1.0), 0..20),
        b in prop::collection::vec((0i32..30, 0i32..30, 0.0f64..1.0), 0..20),
        px in 0i32..30, py in 0i32..30,
    ) {
        let mut fa = UncertaintyField::new(1.0);
        let mut fb = UncertaintyField::new(1.0);
        for &(x, y, s) in &a { fa.add(CellPos::new(x, y), s); }
        for &(x, y, s) in &b { fb.add(CellPos::new(x, y), s); }
        let p = CellPos::new(px, py);
        let both = fa.union(&fb).density(p);
        prop_assert!((both - fa.density(p) - fb.density(p)).abs() < 1e-9);
        prop_assert!(both >= 0.0);
    }

    #[test]
    fn normalized_gains_are_unit_bounded(g in prop::collection::vec(-5.0f64..5.0, 1..10)) {
        let n = normalize_gains(&g);
        prop_assert!(n.iter().all(|&x| (0.0..=1.0).contains(&x)));
        let hi = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if g.iter().any(|&x| x != hi) || hi > 0.0 {
            prop_assert!(n.contains(&1.0));
        }
        if g.iter().all(|&x| x >= 0.0) && hi > 0.0 {
            for (a, b) in g.iter().zip(&n) {
                prop_assert!((a / hi - b).abs() < 1e-12);
            }
        }
        for i in 0..g.len() {
            for j in 0..g.len() {
                if g[i] < g[j] { prop_assert!(n[i] < n[j]); }
            }
        }
    }

    #[test]
    fn er_extremes_swap_the_argmax(
        n in 2usize..8,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..0.8)).collect();
        let mut g: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..0.8)).collect();
        let a = rng.gen_range(0..n);
        let b = (a + 1 + rng.gen_range(0..n - 1)) % n;
        g[a] = 1.0;
        v[b] = 0.9;
        let cells: Vec<CellPos> = (0..n).map(|i| CellPos::new(i as i32, 0)).collect();
        let d: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..5.0)).collect();
        let cfg = ErConfig { sigma: [1.0 / 3.0; 3], k_max: 500, alpha_min: 1.0, beta_max: 1.0 };
        let (al, be) = update_weights(1.0, &cfg);
        prop_assert_eq!(argmax_objective(&score_candidates(&v, &g, &d, &cells, al, be)), Some(a));
        let (al, be) = update_weights(0.0, &cfg);
        prop_assert_eq!(argmax_objective(&score_candidates(&v, &g, &d, &cells, al, be)), Some(b));
    }
}
