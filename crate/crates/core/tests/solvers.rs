mod common;

use common::{close, load, FIXTURES};
use gnep_core::config::SolverConfig;
use gnep_core::game::Verdict;
use gnep_core::solvers::{brute_force_oracle, solve_fixed_point, solve_qvi, solve_qvi_points};
use gnep_core::vecops::{dist, dot, sub};

fn coarse() -> SolverConfig {
    SolverConfig::default().with_h(0.05)
}

#[test]
fn qvi_expand_single_cell() {
    let g = load("expand").game;
    let (out, points) = solve_qvi_points(&g, &coarse()).unwrap();
    assert_eq!(out.clusters.len(), 1);
    let r = &out.clusters[0].representative;
    assert_eq!((r.x_tilde.as_slice(), r.y_tilde.as_slice()), (&[1.0, 1.0][..], &[2.0, 2.0][..]));
    assert!(points.iter().any(|p| p.x == [1.0, 1.0] && p.y == [2.0, 2.0]));
    // With the tolerance at one cell the survivor is a single pair.
    let (out, points) = solve_qvi_points(&g, &coarse().with_eps(0.05)).unwrap();
    assert_eq!(out.clusters.len(), 1);
    assert_eq!(points.len(), 1);
    assert_eq!((points[0].x.as_slice(), points[0].y.as_slice()), (&[1.0, 1.0][..], &[2.0, 2.0][..]));
}

#[test]
fn qvi_selfmap_accepts_zero_selection() {
    let g = load("selfmap").game;
    let (_, points) = solve_qvi_points(&g, &coarse()).unwrap();
    let center = points
        .iter()
        .find(|p| p.x == [0.5, 0.5] && p.y == [0.5, 0.5])
        .expect("center survives");
    assert_eq!(center.y_star, vec![0.0, 0.0]);
    assert!(center.residual <= 0.0);
}

#[test]
fn spin_candidate_verifies() {
    let g = load("spin").game;
    let c = g
        .check_projected_solution(&[1.0, 0.5], &[1.1, 0.5], &SolverConfig::default())
        .unwrap();
    assert_eq!(c.verdict, Verdict::Pass);
}

#[test]
fn self_map_certificates_collapse() {
    let g = load("selfmap").game;
    let cfg = coarse();
    for out in [
        brute_force_oracle(&g, &cfg).unwrap(),
        solve_fixed_point(&g, &cfg).unwrap(),
        solve_qvi(&g, &cfg).unwrap(),
    ] {
        for c in out.certificates() {
            assert!(dist(&c.x_tilde, &c.y_tilde) <= 2.0 * cfg.h);
        }
    }
}

#[test]
fn oracle_subsumes_other_solvers() {
    let cfg = coarse();
    let tol = 2.0 * cfg.h + 1e-9;
    for name in FIXTURES {
        let g = load(name).game;
        let oracle = brute_force_oracle(&g, &cfg).unwrap();
        for out in [solve_fixed_point(&g, &cfg).unwrap(), solve_qvi(&g, &cfg).unwrap()] {
            for c in out.certificates() {
                let covered = oracle.clusters.iter().any(|cl| {
                    c.x_tilde
                        .iter()
                        .enumerate()
                        .all(|(k, v)| *v >= cl.x_lower[k] - tol && *v <= cl.x_upper[k] + tol)
                });
                assert!(covered, "{name}: {:?} outside every oracle cluster", c.x_tilde);
            }
        }
    }
}

#[test]
fn qvi_zeros_are_projections() {
    let cfg = coarse();
    let eps = cfg.grid_eps();
    for name in FIXTURES {
        let g = load(name).game;
        let (_, points) = solve_qvi_points(&g, &cfg).unwrap();
        for p in &points {
            let w = sub(&p.x, &p.y);
            for eta in g.x_set().grid(cfg.h) {
                assert!(dot(&w, &sub(&eta, &p.x)) >= -eps, "{name}: {:?} {:?}", p.x, p.y);
            }
        }
    }
}

#[test]
fn fixed_point_reports_honest_failure() {
    let g = load("expand").game;
    let cfg = SolverConfig {
        max_iter: 1,
        multistart: 1,
        ..coarse()
    };
    let out = solve_fixed_point(&g, &cfg).unwrap();
    assert!(out.clusters.is_empty());
    assert!(!out.runs[0].converged);
    assert!(out.advisory.is_some());
}

#[test]
fn known_solutions() {
    let cfg = coarse();
    for (name, x, y) in [
        ("drift", [0.0, 0.5], [-0.5, 0.5]),
        ("track", [1.0, 0.8], [1.0, 0.8]),
    ] {
        let out = brute_force_oracle(&load(name).game, &cfg).unwrap();
        assert_eq!(out.clusters.len(), 1, "{name}");
        let r = &out.clusters[0].representative;
        assert!(close(&r.x_tilde, &x, 1e-9) && close(&r.y_tilde, &y, 1e-9), "{name}: {r:?}");
    }
}
