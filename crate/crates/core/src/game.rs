//! Game instances `(X_i, K_i, P_i)` and projected-solution certificates.
//!
//! A pair `(x̃, ỹ)` is a projected solution when `x̃` is the projection of
//! `ỹ` onto `X` and every `ỹ_i` is feasible for `K_i(x̃)` with no strictly
//! preferred point left in it. Emptiness is checked on a lattice plus seeded
//! samples; certificates carry that resolution.

use crate::config::SolverConfig;
use crate::error::{check_dim, Error, Result};
use crate::geometry::{seeded_rng, ConvexSet, Halfspace, ProductSet};
use crate::grid::{uniform_axis, ProductGrid};
use crate::poly::{AffineMap, Polynomial};
use crate::preferences::{GraphDistanceContext, PreferenceKind, PreferenceMap, PreparedPreference};
use crate::vecops::dist;

/// Probes per axis for load-time hypothesis checks.
pub const LOAD_PROBES_PER_AXIS: usize = 11;
/// Own-space samples per probe when testing `x_i ∉ co P_i(x)`.
pub const SELF_EXCLUSION_BUDGET: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintKind {
    MovingBox { lower: AffineMap, upper: AffineMap },
    /// Rows `normal . z <= offset(x)`.
    MovingPolytope { rows: Vec<(Vec<f64>, Polynomial)> },
}

/// Convex-valued feasible-set map `K_i(x)`, not necessarily into `X_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintMap {
    player: usize,
    kind: ConstraintKind,
}

impl ConstraintMap {
    pub fn moving_box(player: usize, lower: AffineMap, upper: AffineMap) -> Result<Self> {
        check_dim(lower.out_dim(), upper.out_dim())?;
        Ok(Self {
            player,
            kind: ConstraintKind::MovingBox { lower, upper },
        })
    }

    pub fn moving_polytope(player: usize, rows: Vec<(Vec<f64>, Polynomial)>) -> Result<Self> {
        if let Some(r) = rows.iter().find(|r| !r.1.is_affine()) {
            return Err(Error::Input(format!("offset '{}' is not affine", r.1)));
        }
        Ok(Self {
            player,
            kind: ConstraintKind::MovingPolytope { rows },
        })
    }

    pub fn player(&self) -> usize {
        self.player
    }

    pub fn kind(&self) -> &ConstraintKind {
        &self.kind
    }

    pub fn out_dim(&self) -> usize {
        match &self.kind {
            ConstraintKind::MovingBox { lower, .. } => lower.out_dim(),
            ConstraintKind::MovingPolytope { rows } => rows.first().map_or(0, |r| r.0.len()),
        }
    }

    /// `K_i(x)`; fails when the value is empty.
    pub fn eval(&self, x: &[f64]) -> Result<ConvexSet> {
        match &self.kind {
            ConstraintKind::MovingBox { lower, upper } => {
                ConvexSet::boxed(lower.eval(x), upper.eval(x))
            }
            ConstraintKind::MovingPolytope { rows } => ConvexSet::polytope(
                rows.iter()
                    .map(|(a, b)| Halfspace::new(a.clone(), b.eval(x)))
                    .collect(),
            ),
        }
    }

    /// Box containing `K_i(x)` for every `x` in `[lower, upper]`.
    pub fn enclosure(&self, lower: &[f64], upper: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        match &self.kind {
            ConstraintKind::MovingBox { lower: lo, upper: up } => {
                Ok((lo.interval(lower, upper).0, up.interval(lower, upper).1))
            }
            ConstraintKind::MovingPolytope { rows } => {
                let relaxed = ConvexSet::polytope(
                    rows.iter()
                        .map(|(a, b)| Halfspace::new(a.clone(), b.interval(lower, upper).1))
                        .collect(),
                )?;
                Ok(relaxed.bounding_box())
            }
        }
    }

    /// Interval-arithmetic proof that `lower(x) <= upper(x)` on the box.
    fn provably_nonempty(&self, lower: &[f64], upper: &[f64]) -> bool {
        match &self.kind {
            ConstraintKind::MovingBox { lower: lo, upper: up } => lo
                .rows()
                .iter()
                .zip(up.rows())
                .all(|(l, u)| u.sub(l).interval(lower, upper).0 >= 0.0),
            ConstraintKind::MovingPolytope { .. } => false,
        }
    }
}

/// Outcome of the load-time hypothesis checks.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisSummary {
    pub nonempty_k_probes: usize,
    pub nonempty_k_by_interval: bool,
    pub self_exclusion_probes: usize,
    pub self_exclusion_budget: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameInstance {
    dims: Vec<usize>,
    x_set: ProductSet,
    constraints: Vec<ConstraintMap>,
    preferences: Vec<PreferenceMap>,
    q_lower: Vec<f64>,
    q_upper: Vec<f64>,
    utility_reducible: bool,
    hypotheses: HypothesisSummary,
}

impl GameInstance {
    /// Validates dimensions, computes the enclosure `Q` of `K(X)` and runs
    /// the nonemptiness and self-exclusion checks on probes.
    pub fn new(
        dims: Vec<usize>,
        choice_sets: Vec<ConvexSet>,
        constraints: Vec<ConstraintMap>,
        preferences: Vec<PreferenceMap>,
    ) -> Result<Self> {
        let n_players = dims.len();
        if n_players == 0 || dims.contains(&0) {
            return Err(Error::Input("need at least one player, each with positive dimension".into()));
        }
        for (what, len) in [
            ("choice sets", choice_sets.len()),
            ("constraint maps", constraints.len()),
            ("preference maps", preferences.len()),
        ] {
            if len != n_players {
                return Err(Error::Input(format!("expected {n_players} {what}, got {len}")));
            }
        }
        let n: usize = dims.iter().sum();
        for i in 0..n_players {
            check_dim(dims[i], choice_sets[i].dim())?;
            check_dim(dims[i], constraints[i].out_dim())?;
            check_dim(dims[i], preferences[i].own_dim())?;
            check_dim(n, preferences[i].nvars())?;
            if constraints[i].player() != i || preferences[i].player() != i {
                return Err(Error::Input(format!("maps for player {} are out of order", i + 1)));
            }
        }
        let x_set = ProductSet::new(choice_sets)?;
        let (xl, xu) = x_set.bounding_box();

        // Nonempty K values: interval proof, then probes for reporting and
        // for maps the interval test cannot decide.
        let by_interval = constraints.iter().all(|k| k.provably_nonempty(&xl, &xu));
        let probes = load_probes(&xl, &xu, |p| x_set.contains(p, 1e-12));
        for p in &probes {
            for k in &constraints {
                if k.eval(p).is_err() {
                    return Err(Error::Hypothesis {
                        message: format!("K_{}(x) is empty", k.player() + 1),
                        witness: p.clone(),
                    });
                }
            }
        }
        let mut q_lower = Vec::with_capacity(n);
        let mut q_upper = Vec::with_capacity(n);
        for k in &constraints {
            let (l, u) = k.enclosure(&xl, &xu)?;
            q_lower.extend(l);
            q_upper.extend(u);
        }

        let mut game = Self {
            utility_reducible: preferences
                .iter()
                .all(|p| matches!(p.kind(), PreferenceKind::Utility { margin, .. } if *margin == 0.0)),
            dims,
            x_set,
            constraints,
            preferences,
            q_lower,
            q_upper,
            hypotheses: HypothesisSummary {
                nonempty_k_probes: probes.len(),
                nonempty_k_by_interval: by_interval,
                self_exclusion_probes: 0,
                self_exclusion_budget: SELF_EXCLUSION_BUDGET,
            },
        };
        game.hypotheses.self_exclusion_probes = game.check_self_exclusion()?;
        Ok(game)
    }

    /// Instance whose preferences are induced by one polynomial utility per
    /// player.
    pub fn from_utilities(
        dims: Vec<usize>,
        choice_sets: Vec<ConvexSet>,
        constraints: Vec<ConstraintMap>,
        utilities: Vec<Polynomial>,
    ) -> Result<Self> {
        let prefs = utilities
            .into_iter()
            .enumerate()
            .map(|(i, u)| PreferenceMap::utility(&dims, i, u, 0.0))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dims, choice_sets, constraints, prefs)
    }

    fn check_self_exclusion(&self) -> Result<usize> {
        let n = self.nvars();
        let (xl, xu) = self.x_set.bounding_box();
        let (yl, yu) = self.y_bounds();
        let mut count = 0;
        for (i, p) in self.preferences.iter().enumerate() {
            let region = self.graph_context(i, &SolverConfig::default())?.own_region(p.own_dim());
            let probes: Vec<Vec<f64>> = match p.kind() {
                PreferenceKind::Sampled(t) => t.rows().iter().map(|r| r.0.clone()).collect(),
                _ => {
                    let mut v = load_probes(&xl, &xu, |q| self.x_set.contains(q, 1e-12));
                    v.extend(load_probes(&yl, &yu, |_| true));
                    v
                }
            };
            for (k, x) in probes.iter().enumerate() {
                debug_assert_eq!(x.len(), n);
                let own = p.own(x).to_vec();
                if p.hull_preferred(x, &own, &region, SELF_EXCLUSION_BUDGET, k as u64)? {
                    return Err(Error::Hypothesis {
                        message: format!("player {} has x_i in co P_i(x)", i + 1),
                        witness: x.clone(),
                    });
                }
            }
            count += probes.len();
        }
        Ok(count)
    }

    pub fn n_players(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn nvars(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Joint index range of player `i`.
    pub fn block(&self, i: usize) -> std::ops::Range<usize> {
        let s: usize = self.dims[..i].iter().sum();
        s..s + self.dims[i]
    }

    pub fn x_set(&self) -> &ProductSet {
        &self.x_set
    }

    pub fn choice_set(&self, i: usize) -> &ConvexSet {
        &self.x_set.blocks()[i]
    }

    pub fn constraint_map(&self, i: usize) -> &ConstraintMap {
        &self.constraints[i]
    }

    pub fn preference(&self, i: usize) -> &PreferenceMap {
        &self.preferences[i]
    }

    pub fn preferences(&self) -> &[PreferenceMap] {
        &self.preferences
    }

    pub fn constraints(&self) -> &[ConstraintMap] {
        &self.constraints
    }

    pub fn is_utility_reducible(&self) -> bool {
        self.utility_reducible
    }

    pub fn hypotheses(&self) -> &HypothesisSummary {
        &self.hypotheses
    }

    /// Box enclosure `Q` of `∏ co K_i(X)`.
    pub fn q_bounds(&self) -> (&[f64], &[f64]) {
        (&self.q_lower, &self.q_upper)
    }

    /// Box containing both `X` and `Q`: where iterates `y` can live.
    pub fn y_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let (xl, xu) = self.x_set.bounding_box();
        (
            xl.iter().zip(&self.q_lower).map(|(a, b)| a.min(*b)).collect(),
            xu.iter().zip(&self.q_upper).map(|(a, b)| a.max(*b)).collect(),
        )
    }

    /// Graph-distance region for player `i`: `(y, z_i)` with both parts in
    /// the box hull of `X ∪ Q`, inflated by `cfg.rho`.
    pub fn graph_context(&self, i: usize, cfg: &SolverConfig) -> Result<GraphDistanceContext> {
        let (yl, yu) = self.y_bounds();
        let b = self.block(i);
        GraphDistanceContext::new(
            (&yl, &yu),
            (&yl[b.clone()], &yu[b]),
            cfg.rho,
            cfg.graph_spacing(),
        )
    }

    /// `K_i(x)` for `x ∈ X`.
    pub fn constraint_set(&self, i: usize, x: &[f64]) -> Result<ConvexSet> {
        check_dim(self.nvars(), x.len())?;
        if i >= self.n_players() {
            return Err(Error::Input(format!("player index {i} out of range")));
        }
        if !self.x_set.contains(x, 1e-9) {
            return Err(Error::Input(format!("{x:?} lies outside X")));
        }
        self.constraints[i].eval(x)
    }

    /// Per-player feasibility of `y_i` in `K_i(x_fix)` and search for a point
    /// of `P_i(y) ∩ K_i(x_fix)`.
    pub fn check_nep(&self, x_fix: &[f64], y: &[f64], cfg: &SolverConfig) -> Result<Vec<PlayerRecord>> {
        check_dim(self.nvars(), y.len())?;
        (0..self.n_players())
            .map(|i| {
                let k = self.constraint_set(i, x_fix)?;
                let yi = &y[self.block(i)];
                let membership_residual = k.distance(yi)?;
                let witness = self.find_witness(i, &k, y, cfg)?;
                Ok(PlayerRecord {
                    membership_residual,
                    witness,
                    emptiness_resolution: cfg.h,
                })
            })
            .collect()
    }

    /// Points scanned for preference witnesses in `K`: the lattice at
    /// `cfg.h`, then `cfg.random_budget` samples seeded by player.
    pub fn witness_probes(&self, i: usize, k: &ConvexSet, cfg: &SolverConfig) -> Vec<Vec<f64>> {
        let mut pts = k.grid(cfg.h);
        let mut rng = seeded_rng(cfg.seed, i as u64);
        pts.extend((0..cfg.random_budget).map(|_| k.sample(&mut rng)));
        pts
    }

    /// First probe of `K` strictly preferred at `y` by more than the
    /// configured strictness. Tables are checked exactly on their entries.
    pub fn find_witness(
        &self,
        i: usize,
        k: &ConvexSet,
        y: &[f64],
        cfg: &SolverConfig,
    ) -> Result<Option<Vec<f64>>> {
        let p = &self.preferences[i];
        if let PreferenceKind::Sampled(_) = p.kind() {
            let listed = p.sample_preferred(y, k, usize::MAX, 0)?;
            return Ok(listed.into_iter().next());
        }
        first_witness(&p.at(y)?, &self.witness_probes(i, k, cfg), cfg.strictness)
            .map(|w| w.cloned())
    }

    /// Certificate for `(x̃, ỹ)` at tolerance `cfg.analytic_eps()`; solvers
    /// pass an explicit grid tolerance through `cfg.eps`.
    pub fn check_projected_solution(
        &self,
        x_tilde: &[f64],
        y_tilde: &[f64],
        cfg: &SolverConfig,
    ) -> Result<Certificate> {
        check_dim(self.nvars(), x_tilde.len())?;
        check_dim(self.nvars(), y_tilde.len())?;
        let eps = cfg.analytic_eps();
        let projection_residual = dist(&self.x_set.project(y_tilde)?, x_tilde);
        let resolution = Resolution {
            h: cfg.h,
            budget: cfg.random_budget,
            seed: cfg.seed,
        };
        // Condition (b) needs K(x̃), which is only defined on X.
        if !self.x_set.contains(x_tilde, 1e-9) {
            return Ok(Certificate {
                x_tilde: x_tilde.to_vec(),
                y_tilde: y_tilde.to_vec(),
                players: Vec::new(),
                projection_residual,
                eps,
                resolution,
                verdict: Verdict::Fail("projection".into()),
            });
        }
        let players = self.check_nep(x_tilde, y_tilde, cfg)?;
        let verdict = if projection_residual > eps {
            Verdict::Fail("projection".into())
        } else if let Some(i) = players.iter().position(|r| r.membership_residual > eps) {
            Verdict::Fail(format!("membership(player {})", i + 1))
        } else if let Some(i) = players.iter().position(|r| r.witness.is_some()) {
            Verdict::Fail(format!("witness(player {})", i + 1))
        } else {
            Verdict::Pass
        };
        Ok(Certificate {
            x_tilde: x_tilde.to_vec(),
            y_tilde: y_tilde.to_vec(),
            players,
            projection_residual,
            eps,
            resolution,
            verdict,
        })
    }
}

/// First probe whose excess exceeds `strictness`.
pub fn first_witness<'a>(
    at: &PreparedPreference<'_>,
    probes: &'a [Vec<f64>],
    strictness: f64,
) -> Result<Option<&'a Vec<f64>>> {
    for z in probes {
        if at.excess(z)? > strictness {
            return Ok(Some(z));
        }
    }
    Ok(None)
}

/// Joint points of a uniform probe grid over a box, filtered.
fn load_probes(lower: &[f64], upper: &[f64], keep: impl Fn(&[f64]) -> bool) -> Vec<Vec<f64>> {
    ProductGrid::new(
        lower
            .iter()
            .zip(upper)
            .map(|(&l, &u)| uniform_axis(l, u, LOAD_PROBES_PER_AXIS))
            .collect(),
    )
    .iter()
    .filter(|p| keep(p))
    .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlayerRecord {
    /// `d(ỹ_i, K_i(x̃))`.
    pub membership_residual: f64,
    /// A point of `P_i(ỹ) ∩ K_i(x̃)`, if one was found.
    pub witness: Option<Vec<f64>>,
    /// Lattice spacing at which emptiness was checked.
    pub emptiness_resolution: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resolution {
    pub h: f64,
    pub budget: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass,
    Fail(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub x_tilde: Vec<f64>,
    pub y_tilde: Vec<f64>,
    pub players: Vec<PlayerRecord>,
    /// `‖Pr_X(ỹ) − x̃‖`.
    pub projection_residual: f64,
    pub eps: f64,
    pub resolution: Resolution,
    pub verdict: Verdict,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Ranking used to pick cluster representatives.
    pub fn score(&self) -> f64 {
        self.players
            .iter()
            .map(|r| r.membership_residual)
            .fold(self.projection_residual, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn affine(s: &str) -> Polynomial {
        Polynomial::parse(s, 2).unwrap()
    }

    fn kbox(i: usize, lo: &str, hi: &str) -> ConstraintMap {
        ConstraintMap::moving_box(
            i,
            AffineMap::new(vec![affine(lo)]).unwrap(),
            AffineMap::new(vec![affine(hi)]).unwrap(),
        )
        .unwrap()
    }

    fn unit() -> ConvexSet {
        ConvexSet::boxed(vec![0.0], vec![1.0]).unwrap()
    }

    fn expand() -> GameInstance {
        GameInstance::from_utilities(
            vec![1, 1],
            vec![unit(), unit()],
            vec![kbox(0, "0", "1 + x2"), kbox(1, "0", "1 + x1")],
            vec![affine("x1"), affine("x2")],
        )
        .unwrap()
    }

    #[test]
    fn constraint_sets_follow_formula() {
        let g = expand();
        assert_eq!(g.constraint_set(0, &[0.0, 0.0]).unwrap().bounding_box(), (vec![0.0], vec![1.0]));
        assert_eq!(g.constraint_set(0, &[1.0, 1.0]).unwrap().bounding_box(), (vec![0.0], vec![2.0]));
        assert!(g.constraint_set(0, &[2.0, 0.0]).is_err());
    }

    #[test]
    fn enclosure_and_flags() {
        let g = expand();
        assert_eq!(g.q_bounds(), (&[0.0, 0.0][..], &[2.0, 2.0][..]));
        assert!(g.is_utility_reducible());
        assert!(g.hypotheses().nonempty_k_by_interval);
    }

    #[test]
    fn check_nep_expand() {
        let g = expand();
        let cfg = SolverConfig::default();
        let r = g.check_nep(&[1.0, 1.0], &[2.0, 2.0], &cfg).unwrap();
        assert!(r.iter().all(|p| p.membership_residual == 0.0 && p.witness.is_none()));
        let r = g.check_nep(&[1.0, 1.0], &[1.0, 1.0], &cfg).unwrap();
        for p in &r {
            let w = p.witness.as_ref().unwrap();
            assert!(w[0] > 1.0 && w[0] <= 2.0);
        }
        let r = g.check_nep(&[1.0, 1.0], &[3.0, 2.0], &cfg).unwrap();
        assert_eq!(r[0].membership_residual, 1.0);
    }

    #[test]
    fn certificate_verdicts() {
        let g = expand();
        let cfg = SolverConfig::default();
        assert!(g.check_projected_solution(&[1.0, 1.0], &[2.0, 2.0], &cfg).unwrap().passed());
        let c = g.check_projected_solution(&[0.5, 0.5], &[1.5, 1.5], &cfg).unwrap();
        assert_eq!(c.verdict, Verdict::Fail("projection".into()));
        let c = g.check_projected_solution(&[1.0, 1.0], &[1.0, 1.0], &cfg).unwrap();
        assert_eq!(c.verdict, Verdict::Fail("witness(player 1)".into()));
    }

    #[test]
    fn empty_constraint_value_is_rejected_at_load() {
        let err = GameInstance::from_utilities(
            vec![1, 1],
            vec![unit(), unit()],
            vec![kbox(0, "x2", "0.5"), kbox(1, "0", "1")],
            vec![affine("x1"), affine("x2")],
        )
        .unwrap_err();
        match err {
            Error::Hypothesis { witness, .. } => assert!(witness[1] > 0.5),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn self_exclusion_violation_is_rejected() {
        // At x1 = 0.5 the preferred set is {|z| < 0.5} ∪ {|z| > 0.866}, whose
        // hull contains 0.5.
        let dims = vec![1, 1];
        let nonconvex = PreferenceMap::utility(&dims, 0, affine("x1^4 - x1^2"), 0.0).unwrap();
        let flat = PreferenceMap::utility(&dims, 1, affine("0"), 0.0).unwrap();
        let err = GameInstance::new(
            dims,
            vec![unit(), unit()],
            vec![kbox(0, "0", "1"), kbox(1, "0", "1")],
            vec![nonconvex, flat],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Hypothesis { .. }), "{err:?}");
    }
}
