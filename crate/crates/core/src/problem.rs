//! Problem files: a line-oriented description of a game plus optional
//! solver settings. See `docs/grammar.md` for the full grammar.
//!
//! ```text
//! players 2 dims 1 1
//! player 1
//!   box 0 1
//!   kbox [0] [1 + x2]
//!   utility x1
//! player 2
//!   box 0 1
//!   kbox [0] [1 + x1]
//!   direction [0.5 - x1] offset 0
//! solver h 0.05
//! ```

use std::fmt::Write;

use sha2::{Digest, Sha256};

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::game::{ConstraintKind, ConstraintMap, GameInstance};
use crate::geometry::{ConvexSet, Shape};
use crate::poly::{AffineMap, Polynomial};
use crate::preferences::{PreferenceKind, PreferenceMap, SampledTable};

/// Solver keys accepted in `solver` lines, in canonical order.
pub const SOLVER_KEYS: [&str; 11] = [
    "h",
    "eps",
    "lambda",
    "budget",
    "seed",
    "max-iter",
    "multistart",
    "h-g",
    "strictness",
    "rho",
    "angular",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub game: GameInstance,
    /// `solver` settings as `(key, value)`, in canonical key order.
    pub overrides: Vec<(String, String)>,
}

impl Problem {
    /// Canonical text; parsing it yields the same instance.
    pub fn canonical_text(&self) -> Result<String> {
        serialize(&self.game, &self.overrides)
    }

    /// Hex SHA-256 of the canonical text.
    pub fn digest(&self) -> Result<String> {
        let text = self.canonical_text()?;
        Ok(hex::encode(Sha256::digest(text.as_bytes())))
    }

    /// `base` with this file's solver settings applied.
    pub fn config(&self, base: SolverConfig) -> Result<SolverConfig> {
        let mut cfg = base;
        for (k, v) in &self.overrides {
            apply_setting(&mut cfg, k, v)?;
        }
        Ok(cfg)
    }
}

/// Sets one solver key from its textual value.
pub fn apply_setting(cfg: &mut SolverConfig, key: &str, value: &str) -> Result<()> {
    let real = || {
        value
            .parse::<f64>()
            .map_err(|_| Error::Input(format!("{key}: '{value}' is not a number")))
    };
    let int = || {
        value
            .parse::<u64>()
            .map_err(|_| Error::Input(format!("{key}: '{value}' is not a nonnegative integer")))
    };
    match key {
        "h" => cfg.h = real()?,
        "eps" => cfg.eps = Some(real()?),
        "lambda" => cfg.lambda = real()?,
        "budget" => cfg.random_budget = int()? as usize,
        "seed" => cfg.seed = int()?,
        "max-iter" => cfg.max_iter = int()? as usize,
        "multistart" => cfg.multistart = int()? as usize,
        "h-g" => cfg.h_g = Some(real()?),
        "strictness" => cfg.strictness = real()?,
        "rho" => cfg.rho = real()?,
        "angular" => cfg.angular_resolution = int()? as usize,
        _ => return Err(Error::Input(format!("unknown solver key '{key}'"))),
    }
    Ok(())
}

/// One significant line with its 1-based number and the byte offset of its
/// first non-blank character.
#[derive(Debug, Clone)]
struct Line<'a> {
    number: usize,
    indent: usize,
    text: &'a str,
}

impl Line<'_> {
    fn err(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.number,
            column: self.indent + offset + 1,
            message: message.into(),
        }
    }

    /// Whitespace-separated words with their offsets.
    fn words(&self) -> Vec<(usize, &str)> {
        let mut out = Vec::new();
        let mut start = None;
        for (i, c) in self.text.char_indices() {
            match (c.is_whitespace(), start) {
                (false, None) => start = Some(i),
                (true, Some(s)) => {
                    out.push((s, &self.text[s..i]));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push((s, &self.text[s..]));
        }
        out
    }
}

fn significant_lines(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .filter_map(|(k, raw)| {
            let body = raw.split('#').next().unwrap_or("");
            let trimmed = body.trim_start();
            let indent = body.len() - trimmed.len();
            let t = trimmed.trim_end();
            (!t.is_empty()).then_some(Line {
                number: k + 1,
                indent,
                text: t,
            })
        })
        .collect()
}

fn parse_real(line: &Line<'_>, at: usize, word: &str) -> Result<f64> {
    word.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| line.err(at, format!("expected a number, found '{word}'")))
}

fn parse_count(line: &Line<'_>, at: usize, word: &str) -> Result<usize> {
    word.parse::<usize>()
        .ok()
        .filter(|v| *v > 0)
        .ok_or_else(|| line.err(at, format!("expected a positive integer, found '{word}'")))
}

/// Parses `[e1, e2, ...]` starting at byte `at` of the line; returns the
/// components and the offset just past `]`.
fn parse_affine_vec(line: &Line<'_>, at: usize, nvars: usize) -> Result<(Vec<Polynomial>, usize)> {
    let rest = &line.text[at..];
    let open = rest
        .find(|c: char| !c.is_whitespace())
        .filter(|&k| rest[k..].starts_with('['))
        .ok_or_else(|| line.err(at, "expected '['"))?;
    let inner_start = at + open + 1;
    let close = line.text[inner_start..]
        .find(']')
        .ok_or_else(|| line.err(at + open, "unclosed '['"))?;
    let inner = &line.text[inner_start..inner_start + close];
    let mut comps = Vec::new();
    let mut offset = inner_start;
    for part in inner.split(',') {
        let p = Polynomial::parse_at(part, nvars, line.number, line.indent + offset + 1)?;
        if !p.is_affine() {
            return Err(line.err(offset, format!("'{}' is not affine", part.trim())));
        }
        comps.push(p);
        offset += part.len() + 1;
    }
    Ok((comps, inner_start + close + 1))
}

fn expect_end(line: &Line<'_>, at: usize) -> Result<()> {
    match line.text[at..].find(|c: char| !c.is_whitespace()) {
        None => Ok(()),
        Some(k) => Err(line.err(at + k, "unexpected trailing input")),
    }
}

struct PlayerDraft {
    choice: Option<ConvexSet>,
    constraint: Option<ConstraintMap>,
    preference: Option<PreferenceMap>,
}

/// Parses and validates a problem file, running the load-time hypothesis
/// checks.
pub fn parse_problem(text: &str) -> Result<Problem> {
    let lines = significant_lines(text);
    let Some(header) = lines.first() else {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "empty problem file".into(),
        });
    };
    let words = header.words();
    if words.len() < 4 || words[0].1 != "players" || words[2].1 != "dims" {
        return Err(header.err(0, "expected 'players N dims n1 ... nN'"));
    }
    let n_players = parse_count(header, words[1].0, words[1].1)?;
    if words.len() != 3 + n_players {
        return Err(header.err(words[2].0, format!("expected {n_players} dimensions")));
    }
    let dims = words[3..]
        .iter()
        .map(|(at, w)| parse_count(header, *at, w))
        .collect::<Result<Vec<_>>>()?;
    let nvars: usize = dims.iter().sum();

    let mut drafts: Vec<PlayerDraft> = (0..n_players)
        .map(|_| PlayerDraft {
            choice: None,
            constraint: None,
            preference: None,
        })
        .collect();
    let mut overrides: Vec<(String, String)> = Vec::new();
    let mut current: Option<usize> = None;
    let mut k = 1;
    while k < lines.len() {
        let line = &lines[k];
        let words = line.words();
        let (at0, head) = words[0];
        match head {
            "player" => {
                if words.len() != 2 {
                    return Err(line.err(at0, "expected 'player INDEX'"));
                }
                let idx = parse_count(line, words[1].0, words[1].1)?;
                let expected = current.map_or(1, |c| c + 2);
                if idx != expected {
                    return Err(line.err(words[1].0, format!("expected player {expected}")));
                }
                current = Some(idx - 1);
            }
            "solver" => {
                if words.len() != 3 {
                    return Err(line.err(at0, "expected 'solver KEY VALUE'"));
                }
                let (kat, key) = words[1];
                if !SOLVER_KEYS.contains(&key) {
                    return Err(line.err(kat, format!("unknown solver key '{key}'")));
                }
                apply_setting(&mut SolverConfig::default(), key, words[2].1)
                    .map_err(|e| line.err(words[2].0, e.to_string()))?;
                if overrides.iter().any(|(k, _)| k == key) {
                    return Err(line.err(kat, format!("solver key '{key}' set twice")));
                }
                overrides.push((key.to_string(), words[2].1.to_string()));
            }
            "box" | "ball" | "kbox" | "utility" | "direction" | "sampled" => {
                let Some(i) = current else {
                    return Err(line.err(at0, format!("'{head}' outside a player block")));
                };
                let m = dims[i];
                let d = &mut drafts[i];
                match head {
                    "box" | "ball" => {
                        if d.choice.is_some() {
                            return Err(line.err(at0, "choice set declared twice"));
                        }
                        let nums = words[1..]
                            .iter()
                            .map(|(at, w)| parse_real(line, *at, w))
                            .collect::<Result<Vec<_>>>()?;
                        let set = if head == "box" {
                            if nums.len() != 2 * m {
                                return Err(line.err(at0, format!("box needs {} numbers", 2 * m)));
                            }
                            ConvexSet::boxed(nums[..m].to_vec(), nums[m..].to_vec())
                        } else {
                            if nums.len() != m + 1 {
                                return Err(line.err(at0, format!("ball needs {} numbers", m + 1)));
                            }
                            ConvexSet::ball(nums[..m].to_vec(), nums[m])
                        };
                        d.choice = Some(set.map_err(|e| line.err(at0, e.to_string()))?);
                    }
                    "kbox" => {
                        if d.constraint.is_some() {
                            return Err(line.err(at0, "constraint map declared twice"));
                        }
                        let (lo, next) = parse_affine_vec(line, at0 + 4, nvars)?;
                        let (hi, end) = parse_affine_vec(line, next, nvars)?;
                        expect_end(line, end)?;
                        if lo.len() != m || hi.len() != m {
                            return Err(line.err(at0, format!("kbox bounds need {m} components")));
                        }
                        d.constraint = Some(ConstraintMap::moving_box(
                            i,
                            AffineMap::new(lo)?,
                            AffineMap::new(hi)?,
                        )?);
                    }
                    _ => {
                        if d.preference.is_some() {
                            return Err(line.err(at0, "preference declared twice"));
                        }
                        let pref = match head {
                            "utility" => {
                                let body = &line.text[at0 + 7..];
                                let (expr, margin) = match body.find("margin") {
                                    Some(p) => {
                                        let mw = body[p + 6..].trim();
                                        (&body[..p], parse_real(line, at0 + 7 + p + 6, mw)?)
                                    }
                                    None => (body, 0.0),
                                };
                                let u = Polynomial::parse_at(
                                    expr,
                                    nvars,
                                    line.number,
                                    line.indent + at0 + 8,
                                )?;
                                PreferenceMap::utility(&dims, i, u, margin)
                                    .map_err(|e| line.err(at0, e.to_string()))?
                            }
                            "direction" => {
                                let (c, next) = parse_affine_vec(line, at0 + 9, nvars)?;
                                if c.len() != m {
                                    return Err(line.err(at0, format!("direction needs {m} components")));
                                }
                                let rest: Vec<&str> = line.text[next..].split_whitespace().collect();
                                if rest.len() != 2 || rest[0] != "offset" {
                                    return Err(line.err(next, "expected 'offset REAL'"));
                                }
                                let off_at = next + line.text[next..].rfind(rest[1]).unwrap_or(0);
                                let delta = parse_real(line, off_at, rest[1])?;
                                PreferenceMap::direction(&dims, i, AffineMap::new(c)?, delta)
                                    .map_err(|e| line.err(at0, e.to_string()))?
                            }
                            _ => {
                                if words.len() != 2 {
                                    return Err(line.err(at0, "expected 'sampled SPACING'"));
                                }
                                let spacing = parse_real(line, words[1].0, words[1].1)?;
                                let (rows, next) = parse_table(&lines, k + 1, nvars, m)?;
                                k = next;
                                let table = SampledTable::new(spacing, rows, nvars, m)
                                    .map_err(|e| line.err(at0, e.to_string()))?;
                                PreferenceMap::sampled(&dims, i, table)?
                            }
                        };
                        d.preference = Some(pref);
                    }
                }
            }
            _ => return Err(line.err(at0, format!("unknown keyword '{head}'"))),
        }
        k += 1;
    }

    let last = lines.last().map_or(1, |l| l.number);
    let missing = |what: &str, i: usize| Error::Parse {
        line: last,
        column: 1,
        message: format!("player {} has no {what}", i + 1),
    };
    let mut choice = Vec::new();
    let mut cons = Vec::new();
    let mut prefs = Vec::new();
    for (i, d) in drafts.into_iter().enumerate() {
        choice.push(d.choice.ok_or_else(|| missing("choice set", i))?);
        cons.push(d.constraint.ok_or_else(|| missing("constraint map", i))?);
        prefs.push(d.preference.ok_or_else(|| missing("preference", i))?);
    }
    overrides.sort_by_key(|(k, _)| SOLVER_KEYS.iter().position(|s| s == k));
    let game = GameInstance::new(dims, choice, cons, prefs)?;
    Ok(Problem { game, overrides })
}

/// Rows `at x.. : z.. | z..` up to `end`; returns the rows and the index of
/// the `end` line.
type TableRows = Vec<(Vec<f64>, Vec<Vec<f64>>)>;

fn parse_table(lines: &[Line<'_>], from: usize, nvars: usize, m: usize) -> Result<(TableRows, usize)> {
    let mut rows = Vec::new();
    let mut k = from;
    loop {
        let Some(line) = lines.get(k) else {
            let last = lines.last().map_or(1, |l| l.number);
            return Err(Error::Parse {
                line: last,
                column: 1,
                message: "sampled table is missing 'end'".into(),
            });
        };
        let words = line.words();
        match words[0].1 {
            "end" => {
                if words.len() != 1 {
                    return Err(line.err(words[1].0, "unexpected trailing input"));
                }
                return Ok((rows, k));
            }
            "at" => {
                let colon = words
                    .iter()
                    .position(|w| w.1 == ":")
                    .ok_or_else(|| line.err(words[0].0, "expected ':' after the point"))?;
                let x = words[1..colon]
                    .iter()
                    .map(|(at, w)| parse_real(line, *at, w))
                    .collect::<Result<Vec<_>>>()?;
                if x.len() != nvars {
                    return Err(line.err(words[0].0, format!("point needs {nvars} coordinates")));
                }
                let mut zs = Vec::new();
                let mut cur = Vec::new();
                for (at, w) in &words[colon + 1..] {
                    if *w == "|" {
                        zs.push(std::mem::take(&mut cur));
                    } else {
                        cur.push(parse_real(line, *at, w)?);
                    }
                }
                if !cur.is_empty() || !zs.is_empty() {
                    zs.push(cur);
                }
                if let Some(bad) = zs.iter().find(|z| z.len() != m) {
                    return Err(line.err(
                        words[colon].0,
                        format!("preferred points need {m} coordinates, got {}", bad.len()),
                    ));
                }
                rows.push((x, zs));
            }
            w => return Err(line.err(words[0].0, format!("expected 'at' or 'end', found '{w}'"))),
        }
        k += 1;
    }
}

fn nums(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ")
}

fn affine_vec(rows: &[Polynomial]) -> String {
    format!(
        "[{}]",
        rows.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", ")
    )
}

/// Canonical problem text for an instance.
pub fn serialize(game: &GameInstance, overrides: &[(String, String)]) -> Result<String> {
    let mut s = String::new();
    let dims: Vec<String> = game.dims().iter().map(|d| d.to_string()).collect();
    let _ = writeln!(s, "players {} dims {}", game.n_players(), dims.join(" "));
    for i in 0..game.n_players() {
        let _ = writeln!(s, "player {}", i + 1);
        match game.choice_set(i).shape() {
            Shape::Box { lower, upper } => {
                let _ = writeln!(s, "  box {} {}", nums(lower), nums(upper));
            }
            Shape::Ball { center, radius } => {
                let _ = writeln!(s, "  ball {} {radius:?}", nums(center));
            }
            Shape::Polytope(_) => {
                return Err(Error::Input("polytope choice sets have no file syntax".into()))
            }
        }
        match game.constraint_map(i).kind() {
            ConstraintKind::MovingBox { lower, upper } => {
                let _ = writeln!(s, "  kbox {} {}", affine_vec(lower.rows()), affine_vec(upper.rows()));
            }
            ConstraintKind::MovingPolytope { .. } => {
                return Err(Error::Input("polytope constraint maps have no file syntax".into()))
            }
        }
        match game.preference(i).kind() {
            PreferenceKind::Utility { u, margin } => {
                if *margin == 0.0 {
                    let _ = writeln!(s, "  utility {u}");
                } else {
                    let _ = writeln!(s, "  utility {u} margin {margin:?}");
                }
            }
            PreferenceKind::Direction { c, offset } => {
                let _ = writeln!(s, "  direction {} offset {offset:?}", affine_vec(c.rows()));
            }
            PreferenceKind::Sampled(t) => {
                let _ = writeln!(s, "  sampled {:?}", t.spacing());
                for (x, zs) in t.rows() {
                    let zs: Vec<String> = zs.iter().map(|z| nums(z)).collect();
                    let _ = writeln!(s, "    at {} : {}", nums(x), zs.join(" | "));
                }
                let _ = writeln!(s, "  end");
            }
        }
    }
    for (k, v) in overrides {
        let _ = writeln!(s, "solver {k} {v}");
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXPAND: &str = "\
# two players pushing outward
players 2 dims 1 1
player 1
  box 0 1
  kbox [0] [1 + x2]
  utility x1
player 2
  box 0 1
  kbox [0] [1 + x1]
  utility x2
solver h 0.05
";

    #[test]
    fn parses_expand() {
        let p = parse_problem(EXPAND).unwrap();
        assert_eq!(p.game.n_players(), 2);
        assert!(p.game.is_utility_reducible());
        assert_eq!(p.config(SolverConfig::default()).unwrap().h, 0.05);
    }

    #[test]
    fn round_trip_digest() {
        let p = parse_problem(EXPAND).unwrap();
        let text = p.canonical_text().unwrap();
        let q = parse_problem(&text).unwrap();
        assert_eq!(p.digest().unwrap(), q.digest().unwrap());
        assert_eq!(p.game, q.game);
    }

    #[test]
    fn grammar_errors_have_positions() {
        let bad = EXPAND.replace("kbox [0] [1 + x2]", "kbox [0] [1 + x7]");
        match parse_problem(&bad) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (5, 17)),
            other => panic!("{other:?}"),
        }
        let bad = EXPAND.replace("utility x1", "utility x1^5");
        assert!(matches!(parse_problem(&bad), Err(Error::Parse { line: 6, .. })));
        let bad = EXPAND.replace("solver h 0.05", "solver hh 0.05");
        assert!(matches!(parse_problem(&bad), Err(Error::Parse { line: 11, .. })));
        let bad = EXPAND.replace("  utility x2\n", "");
        assert!(matches!(parse_problem(&bad), Err(Error::Parse { .. })));
    }

    #[test]
    fn empty_constraint_names_probe() {
        let bad = EXPAND.replace("kbox [0] [1 + x2]", "kbox [x2] [0.5]");
        match parse_problem(&bad) {
            Err(Error::Hypothesis { witness, .. }) => assert!(witness[1] > 0.5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn direction_and_sampled_blocks() {
        let text = "\
players 2 dims 1 1
player 1
  ball 0.5 0.5
  kbox [0.5*x2] [0.5*x2 + 1]
  direction [x2 - 0.5] offset 0
player 2
  box 0 1
  kbox [0] [1]
  sampled 0.5
    at 0 0 : 1 | 0.5
    at 0.5 0 :
  end
";
        let p = parse_problem(text).unwrap();
        assert!(!p.game.is_utility_reducible());
        let q = parse_problem(&p.canonical_text().unwrap()).unwrap();
        assert_eq!(p.game, q.game);
    }

    #[test]
    fn utility_margin() {
        let t = EXPAND.replace("utility x1", "utility x1 margin 0.25");
        let p = parse_problem(&t).unwrap();
        assert!(!p.game.preference(0).preferred(&[0.0, 0.0], &[0.2]).unwrap());
        assert!(p.game.preference(0).preferred(&[0.0, 0.0], &[0.3]).unwrap());
        let q = parse_problem(&p.canonical_text().unwrap()).unwrap();
        assert_eq!(p.game, q.game);
    }
}
