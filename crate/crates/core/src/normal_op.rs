//! The normal operator `N_i(x) = (co P_i(x) - x_i)°` and the map
//! `T(x) = ∏ co(N_i(x) ∩ S_i)`.
//!
//! Each factor is stored as unit generators of a hull, or flagged as the whole
//! space when no preferred point exists at the sampling resolution.

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::game::GameInstance;
use crate::geometry::{separating_directions, ConeSample, ConvexSet};
use crate::poly::Polynomial;
use crate::preferences::PreferenceKind;
use crate::vecops::{dot, norm, normalized, sub};

/// Upper bound on stored generators per factor.
pub const MAX_GENERATORS: usize = 64;
/// Polar tolerance for validating directions against samples.
pub const POLAR_TOL: f64 = 1e-9;

fn sample_seed(cfg: &SolverConfig, i: usize) -> u64 {
    cfg.seed ^ (0x6e6f_726d_0000 + i as u64)
}

/// Per-instance data reused across many evaluations of the normal operator:
/// own-space probe sets and utility gradients.
#[derive(Debug, Clone)]
pub struct NormalOperator<'a> {
    game: &'a GameInstance,
    cfg: SolverConfig,
    regions: Vec<ConvexSet>,
    probes: Vec<Vec<Vec<f64>>>,
    gradients: Vec<Option<Vec<Polynomial>>>,
}

impl<'a> NormalOperator<'a> {
    pub fn new(game: &'a GameInstance, cfg: &SolverConfig) -> Result<Self> {
        let mut regions = Vec::new();
        let mut probes = Vec::new();
        let mut gradients = Vec::new();
        for i in 0..game.n_players() {
            let p = game.preference(i);
            let region = game.graph_context(i, cfg)?.own_region(p.own_dim());
            probes.push(match p.kind() {
                PreferenceKind::Sampled(_) => Vec::new(),
                _ => region.probe_points(cfg.random_budget, sample_seed(cfg, i)),
            });
            regions.push(region);
            gradients.push(match p.kind() {
                PreferenceKind::Utility { u, .. } => {
                    Some(game.block(i).map(|k| u.derivative(k)).collect())
                }
                _ => None,
            });
        }
        Ok(Self {
            game,
            cfg: cfg.clone(),
            regions,
            probes,
            gradients,
        })
    }

    /// Preferred own-space points of player `i` at `x`, drawn from the
    /// graph-distance region.
    pub fn preferred_samples(&self, i: usize, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let p = self.game.preference(i);
        match p.kind() {
            PreferenceKind::Sampled(_) => {
                p.sample_preferred(x, &self.regions[i], self.cfg.random_budget, 0)
            }
            _ => p.filter_preferred(x, self.probes[i].clone()),
        }
    }

    /// Unit elements of `N_i(x)`. Analytic shortcuts (direction fields,
    /// utility gradients) are validated against sampled preferred points;
    /// otherwise the cone comes from a sphere scan. An empty, non-full result
    /// flags a point where the construction found no normal direction.
    pub fn eval(&self, i: usize, x: &[f64]) -> Result<ConeSample> {
        crate::error::check_dim(self.game.nvars(), x.len())?;
        let p = self.game.preference(i);
        let m = p.own_dim();
        let xi = p.own(x).to_vec();
        if let PreferenceKind::Direction { c, .. } = p.kind() {
            // c(x) = 0 means P_i(x) = ∅; otherwise P_i(x) is a nonempty open
            // half-space with inward normal c(x).
            return Ok(match normalized(&c.eval(x)) {
                None => ConeSample::full_space(m),
                Some(u) => ConeSample::from_directions(m, vec![u.iter().map(|v| -v).collect()])?,
            });
        }
        let samples = self.preferred_samples(i, x)?;
        if samples.is_empty() {
            return Ok(ConeSample::full_space(m));
        }
        if let Some(grad) = &self.gradients[i] {
            let grad: Vec<f64> = grad.iter().map(|d| d.eval(x)).collect();
            if let Some(d) = normalized(&grad) {
                let d: Vec<f64> = d.iter().map(|v| -v).collect();
                if samples.iter().all(|z| dot(&d, &sub(z, &xi)) <= POLAR_TOL) {
                    return ConeSample::from_directions(m, vec![d]);
                }
            }
        }
        if m > 3 {
            return Err(Error::Input(format!(
                "sphere scan needs own dimension at most 3, player {} has {m}",
                i + 1
            )));
        }
        let found = separating_directions(&samples, &xi, scan_resolution(m, &self.cfg))?;
        let dirs = decimate(found.into_iter().map(|(d, _)| d).collect(), m);
        ConeSample::from_directions(m, dirs)
    }

    /// `T(x)` factor by factor.
    pub fn t_map(&self, x: &[f64]) -> Result<TValue> {
        crate::error::check_dim(self.game.nvars(), x.len())?;
        let factors = (0..self.game.n_players())
            .map(|i| self.eval(i, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(TValue {
            x: x.to_vec(),
            factors,
        })
    }
}

/// Preferred own-space samples of player `i` at `x`.
pub fn preferred_samples(g: &GameInstance, i: usize, x: &[f64], cfg: &SolverConfig) -> Result<Vec<Vec<f64>>> {
    NormalOperator::new(g, cfg)?.preferred_samples(i, x)
}

/// One-off evaluation of `N_i(x)`; see [`NormalOperator::eval`].
pub fn normal_operator(g: &GameInstance, i: usize, x: &[f64], cfg: &SolverConfig) -> Result<ConeSample> {
    NormalOperator::new(g, cfg)?.eval(i, x)
}

fn scan_resolution(m: usize, cfg: &SolverConfig) -> usize {
    // A polar grid in 3D has about res^2 / 2 points.
    if m == 3 {
        cfg.angular_resolution.min(360)
    } else {
        cfg.angular_resolution
    }
}

/// Keeps at most [`MAX_GENERATORS`] directions, evenly spaced along the
/// scan. In 2D the list is first rotated so a wrapped arc is contiguous.
fn decimate(mut dirs: Vec<Vec<f64>>, m: usize) -> Vec<Vec<f64>> {
    if dirs.len() <= MAX_GENERATORS {
        return dirs;
    }
    if m == 2 {
        let ang = |d: &Vec<f64>| d[1].atan2(d[0]).rem_euclid(std::f64::consts::TAU);
        let mut best = (0, f64::NEG_INFINITY);
        for k in 0..dirs.len() {
            let next = (k + 1) % dirs.len();
            let gap = (ang(&dirs[next]) - ang(&dirs[k])).rem_euclid(std::f64::consts::TAU);
            if gap > best.1 {
                best = (next, gap);
            }
        }
        dirs.rotate_left(best.0);
    }
    let last = dirs.len() - 1;
    (0..MAX_GENERATORS)
        .map(|k| dirs[(k * last + (MAX_GENERATORS - 1) / 2) / (MAX_GENERATORS - 1)].clone())
        .collect()
}

/// `T(x)` factor by factor.
#[derive(Debug, Clone, PartialEq)]
pub struct TValue {
    pub x: Vec<f64>,
    pub factors: Vec<ConeSample>,
}

impl TValue {
    /// Players whose factor came out empty without being the full space.
    pub fn flagged(&self) -> Vec<usize> {
        self.factors
            .iter()
            .enumerate()
            .filter(|(_, f)| f.is_empty())
            .map(|(i, _)| i)
            .collect()
    }

    /// `y*` lies factor-wise in the hulls.
    pub fn contains(&self, g: &GameInstance, y_star: &[f64], tol: f64) -> bool {
        y_star.len() == g.nvars()
            && self
                .factors
                .iter()
                .enumerate()
                .all(|(i, f)| f.hull_contains(&y_star[g.block(i)], tol))
    }

    /// Candidate selections for player `i`: the stored generators, plus zero
    /// for a full-space factor.
    pub fn candidates(&self, i: usize) -> Vec<Vec<f64>> {
        let f = &self.factors[i];
        if f.is_full_space() {
            let mut v = vec![vec![0.0; f.ambient_dim()]];
            v.extend(f.directions().iter().cloned());
            v
        } else {
            f.directions().to_vec()
        }
    }
}

pub fn t_map(g: &GameInstance, x: &[f64], cfg: &SolverConfig) -> Result<TValue> {
    NormalOperator::new(g, cfg)?.t_map(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarDiagnostic {
    pub samples: usize,
    /// Sampled preferred `z` with `<x*, z - x_i> >= 0`.
    pub violations: Vec<Vec<f64>>,
}

impl PolarDiagnostic {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Self-test for a claimed unit normal `x*`: under open-valued preferences
/// no preferred point may satisfy `<x*, z - x_i> >= 0`.
pub fn polar_diagnostic(
    g: &GameInstance,
    i: usize,
    x: &[f64],
    x_star: &[f64],
    cfg: &SolverConfig,
) -> Result<PolarDiagnostic> {
    crate::error::check_dim(g.dims()[i], x_star.len())?;
    if (norm(x_star) - 1.0).abs() > 1e-9 {
        return Err(Error::Input("diagnostic direction must be a unit vector".into()));
    }
    let xi = g.preference(i).own(x).to_vec();
    let samples = preferred_samples(g, i, x, cfg)?;
    let violations = samples
        .iter()
        .filter(|z| dot(x_star, &sub(z, &xi)) >= 0.0)
        .cloned()
        .collect();
    Ok(PolarDiagnostic {
        samples: samples.len(),
        violations,
    })
}
