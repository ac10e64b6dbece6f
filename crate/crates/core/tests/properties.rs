//! Property tests for geometric, preference, operator and certificate
//! invariants.

mod common;

use std::sync::LazyLock;

use common::{load, FIXTURES};
use gnep_core::config::SolverConfig;
use gnep_core::game::GameInstance;
use gnep_core::geometry::{
    polar_membership, projection_vi_residual, seeded_rng, separate, ConvexSet, Halfspace,
};
use gnep_core::normal_op::NormalOperator;
use gnep_core::poly::Polynomial;
use gnep_core::preferences::PreferenceMap;
use gnep_core::problem::parse_problem;
use gnep_core::vecops::{dist, dot, sub};
use proptest::prelude::*;
use rand::Rng;

static GAMES: LazyLock<Vec<GameInstance>> =
    LazyLock::new(|| FIXTURES.iter().map(|n| load(n).game).collect());

fn game(name: &str) -> &'static GameInstance {
    &GAMES[FIXTURES.iter().position(|n| *n == name).unwrap()]
}

fn point(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-4.0..4.0f64, dim)
}

/// Boxes, balls and cut boxes in dimensions 1 to 3, with a query point.
fn set_and_points() -> impl Strategy<Value = (ConvexSet, Vec<f64>, Vec<f64>)> {
    (1..=3usize, 0..3u8, any::<u64>()).prop_flat_map(|(d, kind, seed)| {
        let mut rng = seeded_rng(seed, 0);
        let center: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let half: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.5)).collect();
        let set = match kind {
            0 => ConvexSet::boxed(
                center.iter().zip(&half).map(|(c, w)| c - w).collect(),
                center.iter().zip(&half).map(|(c, w)| c + w).collect(),
            )
            .unwrap(),
            1 => ConvexSet::ball(center.clone(), half[0]).unwrap(),
            _ => {
                let mut rows = Vec::new();
                for k in 0..d {
                    for s in [1.0, -1.0] {
                        let mut n = vec![0.0; d];
                        n[k] = s;
                        rows.push(Halfspace::new(n, s * center[k] + 0.1 + half[k]));
                    }
                }
                for _ in 0..3 {
                    let n: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                    if n.iter().any(|v| v.abs() > 1e-3) {
                        rows.push(Halfspace::new(n.clone(), dot(&n, &center) + rng.random_range(0.05..1.0)));
                    }
                }
                ConvexSet::polytope(rows).unwrap()
            }
        };
        (Just(set), point(d), point(d))
    })
}

proptest! {
    #[test]
    fn projection_is_idempotent_nonexpansive_variational((s, a, b) in set_and_points()) {
        let pa = s.project(&a).unwrap();
        prop_assert!(s.contains(&pa, 1e-9));
        prop_assert!(dist(&s.project(&pa).unwrap(), &pa) <= 1e-9);
        let pb = s.project(&b).unwrap();
        prop_assert!(dist(&pa, &pb) <= dist(&a, &b) + 1e-9);
        prop_assert!(projection_vi_residual(&s, &a, &pa, 200, 1).unwrap() >= -1e-9);
    }

    #[test]
    fn polar_membership_is_homogeneous(
        pts in prop::collection::vec(point(2), 1..6),
        x_star in point(2),
    ) {
        if polar_membership(&pts, &x_star, 0.0).unwrap() {
            for l in [0.5, 2.0] {
                let scaled: Vec<f64> = x_star.iter().map(|v| v * l).collect();
                prop_assert!(polar_membership(&pts, &scaled, 0.0).unwrap());
            }
        }
    }

    #[test]
    fn separator_is_polar(
        dim in 1..=3usize,
        seed in any::<u64>(),
        n in 1..6usize,
    ) {
        let mut rng = seeded_rng(seed, 0);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        if let Some(d) = separate(&pts, &x, 720).unwrap() {
            let shifted: Vec<Vec<f64>> = pts.iter().map(|p| sub(p, &x)).collect();
            prop_assert!(polar_membership(&shifted, &d, 1e-9).unwrap());
        }
    }

    #[test]
    fn graph_distance_is_lipschitz_and_positive_on_preferences(
        f in 0..FIXTURES.len(),
        i in 0..2usize,
        s in prop::collection::vec(0.0..1.0f64, 6),
    ) {
        let g = &GAMES[f];
        let cfg = SolverConfig::default();
        let ctx = g.graph_context(i, &cfg).unwrap();
        let map = |t: &[f64]| -> Vec<f64> {
            ctx.lower().iter().zip(ctx.upper()).zip(t).map(|((l, u), v)| l + (u - l) * v).collect()
        };
        let (a, b) = (map(&s[..3]), map(&s[3..]));
        let p = g.preference(i);
        let ga = p.graph_distance(&ctx, &a[..2], &a[2..]).unwrap();
        let gb = p.graph_distance(&ctx, &b[..2], &b[2..]).unwrap();
        prop_assert!((ga - gb).abs() <= dist(&a, &b) + 1e-9);
        prop_assert_eq!(ga > 0.0, p.preferred(&a[..2], &a[2..]).unwrap());
    }

    #[test]
    fn halfspace_preferences_are_convex(
        f in prop::sample::select(vec!["expand", "drift", "spin"]),
        i in 0..2usize,
        x in prop::collection::vec(0.0..1.0f64, 2),
        a in -1.0..3.0f64,
        b in -1.0..3.0f64,
    ) {
        let p = game(f).preference(i);
        if p.preferred(&x, &[a]).unwrap() && p.preferred(&x, &[b]).unwrap() {
            prop_assert!(p.preferred(&x, &[0.5 * (a + b)]).unwrap());
        }
    }

    #[test]
    fn own_choice_is_never_in_preference_hull(
        f in 0..FIXTURES.len(),
        x in prop::collection::vec(0.0..1.0f64, 2),
    ) {
        let g = &GAMES[f];
        let region = ConvexSet::boxed(vec![-1.0], vec![3.0]).unwrap();
        for i in 0..2 {
            let xi = g.preference(i).own(&x).to_vec();
            prop_assert!(!g.preference(i).hull_preferred(&x, &xi, &region, 128, 0).unwrap());
        }
    }

    #[test]
    fn utilities_never_prefer_the_current_choice(
        coeffs in prop::collection::vec(-3.0..3.0f64, 6),
        x in prop::collection::vec(-2.0..2.0f64, 2),
    ) {
        let v = |k| Polynomial::var(2, k);
        let u = Polynomial::constant(2, coeffs[0])
            .add(&v(0).scale(coeffs[1]))
            .add(&v(1).scale(coeffs[2]))
            .add(&v(0).mul(&v(0)).scale(coeffs[3]))
            .add(&v(0).mul(&v(1)).scale(coeffs[4]))
            .add(&v(0).mul(&v(0)).mul(&v(0)).scale(coeffs[5]));
        let p = PreferenceMap::utility(&[1, 1], 0, u, 0.0).unwrap();
        prop_assert!(!p.preferred(&x, &x[..1]).unwrap());
    }

    #[test]
    fn witnesses_survive_refinement(
        f in 0..FIXTURES.len(),
        i in 0..2usize,
        x in prop::collection::vec(0.0..1.0f64, 2),
        y in prop::collection::vec(0.0..1.0f64, 2),
    ) {
        let g = &GAMES[f];
        let coarse = SolverConfig { random_budget: 0, ..SolverConfig::default().with_h(0.1) };
        let fine = SolverConfig { random_budget: 0, ..SolverConfig::default().with_h(0.05) };
        let k = g.constraint_set(i, &x).unwrap();
        if g.find_witness(i, &k, &y, &coarse).unwrap().is_some() {
            prop_assert!(g.find_witness(i, &k, &y, &fine).unwrap().is_some());
        }
    }

    #[test]
    fn normal_directions_ignore_utility_rescaling(x in prop::collection::vec(0.0..1.0f64, 2)) {
        let text = std::fs::read_to_string(common::fixture_path("selfmap")).unwrap();
        let scaled = text
            .replace("utility -(x1 - 0.5)^2", "utility -2*(x1 - 0.5)^2 + 3")
            .replace("utility -(x2 - 0.5)^2", "utility -2*(x2 - 0.5)^2 + 3");
        let h = parse_problem(&scaled).unwrap().game;
        let cfg = SolverConfig::default();
        let a = NormalOperator::new(game("selfmap"), &cfg).unwrap();
        let b = NormalOperator::new(&h, &cfg).unwrap();
        for i in 0..2 {
            let (ca, cb) = (a.eval(i, &x).unwrap(), b.eval(i, &x).unwrap());
            prop_assert_eq!(ca.is_full_space(), cb.is_full_space());
            prop_assert_eq!(ca.directions().len(), cb.directions().len());
            for (u, v) in ca.directions().iter().zip(cb.directions()) {
                prop_assert!(dist(u, v) <= 1e-9);
            }
        }
    }
}

#[test]
fn t_map_is_nonempty_on_fixture_grids() {
    let cfg = SolverConfig::default();
    for g in GAMES.iter() {
        let nop = NormalOperator::new(g, &cfg).unwrap();
        for x in g.x_set().grid(0.05) {
            let t = nop.t_map(&x).unwrap();
            for i in 0..g.n_players() {
                assert!(!t.candidates(i).is_empty(), "empty factor at {x:?}");
            }
        }
    }
}
