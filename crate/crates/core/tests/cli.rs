mod common;

use common::{fixture_path, load, FIXTURES};
use gnep_core::cli::{run, Invocation};
use gnep_core::problem::parse_problem;

fn gnep(args: &[&str]) -> Invocation {
    run(std::iter::once("gnep").chain(args.iter().copied()))
}

fn first_x(report: &str) -> Vec<f64> {
    report
        .lines()
        .find_map(|l| l.strip_prefix("certificate[0].x = "))
        .expect("certificate present")
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect()
}

#[test]
fn exit_codes_on_fixtures() {
    for name in FIXTURES {
        let path = fixture_path(name);
        for cmd in ["solve-fp", "solve-qvi", "oracle"] {
            let out = gnep(&[cmd, &path, "--h", "0.05"]);
            assert_eq!(out.code, 0, "{cmd} {name}: {}", out.stderr);
            assert!(out.stdout.contains(&format!("solver = {cmd}")));
            assert!(out.stdout.contains("certificate[0].verdict = pass\n"));
        }
        let bad = gnep(&["verify", &path, "--x", "0.5,0.5", "--y", "5,5"]);
        assert_eq!(bad.code, 1, "{name}: {}", bad.stderr);
    }
}

/// Values of `certificate[k].<field>` for every k.
fn field(report: &str, name: &str) -> Vec<Vec<f64>> {
    report
        .lines()
        .filter_map(|l| l.split_once(" = "))
        .filter(|(k, _)| k.starts_with("certificate[") && k.ends_with(&format!("].{name}")))
        .map(|(_, v)| v.split(',').map(|t| t.parse().unwrap()).collect())
        .collect()
}

#[test]
fn solvers_agree_in_reports() {
    let tol = 0.1 + 1e-9;
    for name in FIXTURES {
        let path = fixture_path(name);
        let reports: Vec<String> = ["solve-fp", "solve-qvi", "oracle"]
            .iter()
            .map(|c| gnep(&[c, &path, "--h", "0.05"]).stdout)
            .collect();
        for a in &reports {
            for x in field(a, "x") {
                for b in &reports {
                    let (lo, hi) = (field(b, "cluster.x_lower"), field(b, "cluster.x_upper"));
                    let inside = lo.iter().zip(&hi).any(|(l, h)| {
                        x.iter().enumerate().all(|(k, v)| *v >= l[k] - tol && *v <= h[k] + tol)
                    });
                    assert!(inside, "{name}: {x:?} has no counterpart");
                }
            }
        }
    }
}

#[test]
fn examples() {
    let expand = fixture_path("expand");
    let out = gnep(&["oracle", &expand, "--h", "0.01"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("certificates = 1\n"));
    assert_eq!(first_x(&out.stdout), vec![1.0, 1.0]);

    let out = gnep(&["verify", &expand, "--x", "1,1", "--y", "2,2"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("certificate[0].verdict = pass\n"));

    let out = gnep(&["verify", &expand, "--x", "0.5,0.5", "--y", "1.5,1.5"]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("certificate[0].verdict = fail: projection\n"));
}

#[test]
fn input_errors_exit_two() {
    let expand = fixture_path("expand");
    for args in [
        vec!["bogus", expand.as_str()],
        vec!["oracle", expand.as_str(), "--nope"],
        vec!["oracle", "/does/not/exist.gnep"],
        vec!["oracle", expand.as_str(), "--h", "-1"],
        vec!["verify", expand.as_str(), "--x", "1", "--y", "2,2"],
        vec![],
    ] {
        let out = gnep(&args);
        assert_eq!(out.code, 2, "{args:?}");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
    let usage = gnep(&["bogus"]);
    assert!(usage.stderr.contains("Usage"));

    let dir = std::env::temp_dir().join(format!("gnep-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.gnep");
    let text = std::fs::read_to_string(&expand).unwrap().replace("kbox [0] [1 + x2]", "kbox [x2] [0.5]");
    std::fs::write(&bad, text).unwrap();
    let out = gnep(&["oracle", bad.to_str().unwrap()]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("probe"), "{}", out.stderr);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn no_certificate_exits_one() {
    let expand = fixture_path("expand");
    let out = gnep(&["solve-fp", &expand, "--max-iter", "1", "--multistart", "1", "--h", "0.05"]);
    assert_eq!(out.code, 1);
    assert!(out.stdout.contains("certificates = 0\n"));
    assert!(out.stdout.contains("advisory = "));
}

#[test]
fn settings_precedence() {
    let dir = std::env::temp_dir().join(format!("gnep-prec-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("p.gnep");
    let text = std::fs::read_to_string(fixture_path("expand")).unwrap() + "solver h 0.05\nsolver seed 9\n";
    std::fs::write(&file, text).unwrap();
    let f = file.to_str().unwrap();
    let out = gnep(&["solve-fp", f]);
    assert!(out.stdout.contains("config.h = 5.0000000000000003e-2\n"));
    assert!(out.stdout.contains("config.seed = 9\n"));
    let out = gnep(&["solve-fp", f, "--h", "0.1"]);
    assert!(out.stdout.contains("config.h = 1.0000000000000001e-1\n"));
    assert!(out.stdout.contains("config.seed = 9\n"));
    let out = gnep(&["solve-fp", &fixture_path("expand")]);
    assert!(out.stdout.contains("config.h = 1.0000000000000000e-2\n"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn timing_is_opt_in() {
    let expand = fixture_path("expand");
    assert!(!gnep(&["solve-fp", &expand]).stdout.contains("timing"));
    assert!(gnep(&["solve-fp", &expand, "--timing"]).stdout.contains("timing.seconds = "));
}

#[test]
fn fixtures_round_trip() {
    for name in FIXTURES {
        let p = load(name);
        let text = p.canonical_text().unwrap();
        let q = parse_problem(&text).unwrap();
        assert_eq!(p.digest().unwrap(), q.digest().unwrap(), "{name}");
        assert_eq!(q.canonical_text().unwrap(), text);
    }
    assert!(load("expand").game.is_utility_reducible());
    assert!(!load("spin").game.is_utility_reducible());
}
