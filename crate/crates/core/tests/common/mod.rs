#![allow(dead_code)]

use gnep_core::problem::{parse_problem, Problem};

pub const FIXTURES: [&str; 6] = ["expand", "selfmap", "spin", "flat", "drift", "track"];

/// Fixtures whose preferences all come from utilities.
pub const UTILITY_FIXTURES: [&str; 5] = ["expand", "selfmap", "flat", "drift", "track"];

pub fn fixture_path(name: &str) -> String {
    format!("{}/fixtures/{name}.gnep", env!("CARGO_MANIFEST_DIR"))
}

pub fn load(name: &str) -> Problem {
    let text = std::fs::read_to_string(fixture_path(name)).expect("fixture exists");
    parse_problem(&text).expect("fixture parses")
}

pub fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(u, v)| (u - v).abs() <= tol)
}
