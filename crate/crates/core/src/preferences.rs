//! Strict-preference maps `P_i(x)` over a player's own strategy block.
//!
//! Three variants: utility-induced (`u(x_-i, z) > u(x) + δ`), direction
//! fields (`<c(x), z - x_i> > δ`, empty where `c(x) = 0`) and finite tables on
//! a lattice. The graph distance `g_i(y, z) = d((y, z), G_i^c)` is computed
//! exactly whenever the complement of the graph is a finite union of
//! polyhedra, and by a lattice search otherwise.

use std::collections::HashMap;

use crate::error::{check_dim, Error, Result};
use crate::geometry::ConvexSet;
use crate::poly::{AffineMap, Polynomial};
use crate::simplex::in_convex_hull;
use crate::vecops::{dist, dot, norm, project_affine, subsets};

/// Lattice tolerance, relative to the spacing.
const LATTICE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum PreferenceKind {
    Utility { u: Polynomial, margin: f64 },
    Direction { c: AffineMap, offset: f64 },
    Sampled(SampledTable),
}

/// Finite preference relation on the lattice `spacing * Z^n`: for each listed
/// joint point, the own-strategy lattice points strictly preferred to it.
/// Lattice points without a row have an empty preference set.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTable {
    spacing: f64,
    rows: Vec<(Vec<f64>, Vec<Vec<f64>>)>,
    index: HashMap<Vec<i64>, Vec<Vec<i64>>>,
}

impl SampledTable {
    pub fn new(spacing: f64, rows: Vec<(Vec<f64>, Vec<Vec<f64>>)>, nvars: usize, own_dim: usize) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::Input(format!("sampled spacing must be positive, got {spacing}")));
        }
        let mut index = HashMap::new();
        for (x, zs) in &rows {
            check_dim(nvars, x.len())?;
            let key = lattice_index(spacing, x)?;
            let mut cells = Vec::with_capacity(zs.len());
            for z in zs {
                check_dim(own_dim, z.len())?;
                cells.push(lattice_index(spacing, z)?);
            }
            if index.insert(key, cells).is_some() {
                return Err(Error::Input(format!("sampled table lists {x:?} twice")));
            }
        }
        Ok(Self { spacing, rows, index })
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn rows(&self) -> &[(Vec<f64>, Vec<Vec<f64>>)] {
        &self.rows
    }

    fn preferred_at(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let key = lattice_index(self.spacing, x)?;
        Ok(self
            .index
            .get(&key)
            .map(|cells| {
                cells
                    .iter()
                    .map(|c| c.iter().map(|k| *k as f64 * self.spacing).collect())
                    .collect()
            })
            .unwrap_or_default())
    }
}

fn lattice_index(spacing: f64, v: &[f64]) -> Result<Vec<i64>> {
    v.iter()
        .map(|&t| {
            let k = (t / spacing).round();
            if (t - k * spacing).abs() <= LATTICE_TOL * spacing {
                Ok(k as i64)
            } else {
                Err(Error::Input(format!(
                    "{v:?} is not on the sampled lattice with spacing {spacing}"
                )))
            }
        })
        .collect()
}

/// Affine form `coef . w + c0` on graph space `w = (x, z)`.
#[derive(Debug, Clone, PartialEq)]
struct Linear {
    coef: Vec<f64>,
    c0: f64,
}

impl Linear {
    fn eval(&self, w: &[f64]) -> f64 {
        dot(&self.coef, w) + self.c0
    }
}

/// Polyhedral description of the graph complement, when one exists.
#[derive(Debug, Clone, PartialEq)]
enum Complement {
    /// `G^c = {excess <= 0}` with `excess` affine in `w`.
    Halfspace(Linear),
    /// `excess = l1 * l2`, so `G^c = {l1 >= 0, l2 <= 0} ∪ {l1 <= 0, l2 >= 0}`.
    Product(Linear, Linear),
    Unstructured,
}

/// Strict-preference map of one player.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceMap {
    player: usize,
    own_start: usize,
    own_dim: usize,
    nvars: usize,
    kind: PreferenceKind,
    complement: Complement,
    convex_valued: bool,
}

impl PreferenceMap {
    pub fn utility(dims: &[usize], player: usize, u: Polynomial, margin: f64) -> Result<Self> {
        let nvars: usize = dims.iter().sum();
        check_dim(nvars, u.nvars())?;
        if !(margin >= 0.0) {
            return Err(Error::Input(format!("strictness margin must be nonnegative, got {margin}")));
        }
        Self::build(dims, player, PreferenceKind::Utility { u, margin })
    }

    pub fn direction(dims: &[usize], player: usize, c: AffineMap, offset: f64) -> Result<Self> {
        let nvars: usize = dims.iter().sum();
        check_dim(dims.get(player).copied().unwrap_or(0), c.out_dim())?;
        if let Some(r) = c.rows().first() {
            check_dim(nvars, r.nvars())?;
        }
        if !(offset >= 0.0) {
            return Err(Error::Input(format!("direction offset must be nonnegative, got {offset}")));
        }
        Self::build(dims, player, PreferenceKind::Direction { c, offset })
    }

    pub fn sampled(dims: &[usize], player: usize, table: SampledTable) -> Result<Self> {
        Self::build(dims, player, PreferenceKind::Sampled(table))
    }

    fn build(dims: &[usize], player: usize, kind: PreferenceKind) -> Result<Self> {
        if player >= dims.len() {
            return Err(Error::Input(format!("player index {player} out of range")));
        }
        let own_start = dims[..player].iter().sum();
        let own_dim = dims[player];
        let nvars = dims.iter().sum();
        let mut p = Self {
            player,
            own_start,
            own_dim,
            nvars,
            kind,
            complement: Complement::Unstructured,
            convex_valued: false,
        };
        p.complement = p.analyze_complement();
        p.convex_valued = p.analyze_convexity();
        Ok(p)
    }

    pub fn player(&self) -> usize {
        self.player
    }

    pub fn own_dim(&self) -> usize {
        self.own_dim
    }

    pub fn own_start(&self) -> usize {
        self.own_start
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn kind(&self) -> &PreferenceKind {
        &self.kind
    }

    /// Every value `P_i(x)` is convex (so `co P_i = P_i`).
    pub fn is_convex_valued(&self) -> bool {
        self.convex_valued
    }

    /// The graph complement has an exact polyhedral form, so
    /// [`graph_distance`](Self::graph_distance) is exact.
    pub fn has_exact_graph_distance(&self) -> bool {
        !matches!(self.complement, Complement::Unstructured)
    }

    pub fn own<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[self.own_start..self.own_start + self.own_dim]
    }

    fn with_own(&self, x: &[f64], z: &[f64]) -> Vec<f64> {
        let mut v = x.to_vec();
        v[self.own_start..self.own_start + self.own_dim].copy_from_slice(z);
        v
    }

    fn check(&self, x: &[f64], z: &[f64]) -> Result<()> {
        check_dim(self.nvars, x.len())?;
        check_dim(self.own_dim, z.len())
    }

    /// `P_i(x)` specialized to a fixed `x`, for evaluating many `z`.
    pub fn at(&self, x: &[f64]) -> Result<PreparedPreference<'_>> {
        check_dim(self.nvars, x.len())?;
        let own = self.own(x).to_vec();
        let form = match (&self.kind, &self.complement) {
            (PreferenceKind::Direction { c, offset }, _) => Form::Linear {
                c: c.eval(x),
                center: own,
                offset: *offset,
            },
            (PreferenceKind::Utility { margin, .. }, Complement::Halfspace(l)) => Form::Linear {
                c: l.coef[self.nvars..].to_vec(),
                center: own,
                offset: *margin,
            },
            (PreferenceKind::Utility { .. }, Complement::Product(_, l2)) => {
                let a = l2.coef[self.nvars];
                Form::Product {
                    center: own[0],
                    a,
                    b: dot(&l2.coef[..self.nvars], x) + l2.c0,
                }
            }
            (PreferenceKind::Utility { u, margin }, _) => Form::Poly {
                u,
                x: x.to_vec(),
                base: u.eval(x) + margin,
            },
            (PreferenceKind::Sampled(t), _) => Form::Sampled {
                table: t,
                key: lattice_index(t.spacing, x)?,
            },
        };
        Ok(PreparedPreference { map: self, form })
    }

    /// Signed preference margin: positive exactly when `z ∈ P_i(x)`. For the
    /// sampled variant the value is `±1`.
    pub fn excess(&self, x: &[f64], z: &[f64]) -> Result<f64> {
        self.at(x)?.excess(z)
    }

    /// `z ∈ P_i(x)`.
    pub fn preferred(&self, x: &[f64], z: &[f64]) -> Result<bool> {
        Ok(self.excess(x, z)? > 0.0)
    }

    /// `z ∈ co P_i(x)`. Exact for convex-valued maps; otherwise tested against
    /// the hull of preferred samples drawn from `region` (own space).
    pub fn hull_preferred(
        &self,
        x: &[f64],
        z: &[f64],
        region: &ConvexSet,
        sample_budget: usize,
        seed: u64,
    ) -> Result<bool> {
        if self.preferred(x, z)? {
            return Ok(true);
        }
        if self.convex_valued {
            return Ok(false);
        }
        let pts = self.sample_preferred(x, region, sample_budget, seed)?;
        Ok(!pts.is_empty() && in_convex_hull(&pts, z, 1e-12))
    }

    /// Preferred points of `region` found on its probe set (or the listed
    /// points, for tables), at most `budget`. Empty means none found at this
    /// resolution.
    pub fn sample_preferred(
        &self,
        x: &[f64],
        region: &ConvexSet,
        budget: usize,
        seed: u64,
    ) -> Result<Vec<Vec<f64>>> {
        check_dim(self.nvars, x.len())?;
        check_dim(self.own_dim, region.dim())?;
        if let PreferenceKind::Sampled(t) = &self.kind {
            let mut pts = t.preferred_at(x)?;
            pts.retain(|z| region.contains(z, 1e-12));
            pts.truncate(budget);
            return Ok(pts);
        }
        self.filter_preferred(x, region.probe_points(budget, seed))
    }

    /// The members of `candidates` lying in `P_i(x)`.
    pub fn filter_preferred(&self, x: &[f64], candidates: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>> {
        let at = self.at(x)?;
        let mut out = Vec::new();
        for z in candidates {
            if at.preferred(&z)? {
                out.push(z);
            }
        }
        Ok(out)
    }

    /// `g_i(y, z)`: distance from `(y, z)` to the complement of the graph of
    /// `P_i`. Zero whenever `z ∉ P_i(y)`.
    pub fn graph_distance(&self, ctx: &GraphDistanceContext, y: &[f64], z: &[f64]) -> Result<f64> {
        let w = self.checked_graph_point(ctx, y, z)?;
        if !self.preferred(y, z)? {
            return Ok(0.0);
        }
        match &self.complement {
            Complement::Halfspace(l) => {
                let n = norm(&l.coef);
                // Constant excess: positive everywhere means G^c = ∅ and the
                // region exterior is the nearest complement.
                if n == 0.0 {
                    return Ok(ctx.exterior_distance(&w));
                }
                Ok(l.eval(&w).max(0.0) / n)
            }
            Complement::Product(l1, l2) => {
                let pieces = [
                    polyhedron_distance(&w, &[ge(l1), le(l2)]),
                    polyhedron_distance(&w, &[le(l1), ge(l2)]),
                ];
                Ok(pieces
                    .into_iter()
                    .flatten()
                    .fold(ctx.exterior_distance(&w), f64::min))
            }
            Complement::Unstructured => self.lattice_distance(ctx, &w),
        }
    }

    /// Lattice approximation of `g_i`: distance to the nearest lattice point
    /// of the region outside the graph, or to the region boundary. Zero
    /// whenever `z ∉ P_i(y)`.
    pub fn graph_distance_grid(&self, ctx: &GraphDistanceContext, y: &[f64], z: &[f64]) -> Result<f64> {
        let w = self.checked_graph_point(ctx, y, z)?;
        if !self.preferred(y, z)? {
            return Ok(0.0);
        }
        self.lattice_distance(ctx, &w)
    }

    fn checked_graph_point(&self, ctx: &GraphDistanceContext, y: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        self.check(y, z)?;
        check_dim(self.nvars + self.own_dim, ctx.lower.len())?;
        let w: Vec<f64> = y.iter().chain(z).copied().collect();
        if !ctx.contains(&w) {
            return Err(Error::Input(format!(
                "graph point {w:?} lies outside the distance region"
            )));
        }
        Ok(w)
    }

    fn lattice_distance(&self, ctx: &GraphDistanceContext, w: &[f64]) -> Result<f64> {
        let h = match &self.kind {
            PreferenceKind::Sampled(t) => t.spacing,
            _ => ctx.h_g,
        };
        let d = w.len();
        let n = self.nvars;
        let base: Vec<i64> = w.iter().map(|v| (v / h).round() as i64).collect();
        let mut best = ctx.exterior_distance(w);
        let mut offset = vec![0i64; d];
        let mut r: i64 = 0;
        // Every point of shell r is at least (r - 1) h away in sup norm.
        while ((r - 1).max(0) as f64) * h < best {
            for_each_shell(r, &mut offset, 0, false, &mut |off| {
                let p: Vec<f64> = base
                    .iter()
                    .zip(off)
                    .map(|(b, o)| (b + o) as f64 * h)
                    .collect();
                if !ctx.contains(&p) {
                    return Ok(());
                }
                let dp = dist(w, &p);
                if dp < best && !self.preferred(&p[..n], &p[n..])? {
                    best = dp;
                }
                Ok(())
            })?;
            r += 1;
        }
        Ok(best)
    }

    fn analyze_complement(&self) -> Complement {
        let n = self.nvars;
        let m = self.own_dim;
        let s = self.own_start;
        match &self.kind {
            PreferenceKind::Direction { c, offset } => {
                if c.is_constant() {
                    let cv = c.eval(&vec![0.0; n]);
                    let mut coef = vec![0.0; n + m];
                    for k in 0..m {
                        coef[s + k] = -cv[k];
                        coef[n + k] = cv[k];
                    }
                    return Complement::Halfspace(Linear { coef, c0: -offset });
                }
                if m == 1 && *offset == 0.0 {
                    return Complement::Product(self.own_gap(), embed(&c.rows()[0], m));
                }
                Complement::Unstructured
            }
            PreferenceKind::Utility { u, margin } => {
                let own: Vec<Vec<Polynomial>> = (0..m).map(|k| u.coefficients_in(s + k)).collect();
                let linear_const = own
                    .iter()
                    .all(|cs| cs.len() <= 2 && cs.get(1).is_none_or(Polynomial::is_constant));
                if linear_const {
                    let mut coef = vec![0.0; n + m];
                    for (k, cs) in own.iter().enumerate() {
                        let a = cs.get(1).map(Polynomial::constant_term).unwrap_or(0.0);
                        coef[s + k] = -a;
                        coef[n + k] = a;
                    }
                    return Complement::Halfspace(Linear { coef, c0: -margin });
                }
                if m == 1 && *margin == 0.0 {
                    let cs = &own[0];
                    let a2 = cs.get(2).cloned().unwrap_or_else(|| Polynomial::zero(n));
                    let a1 = cs.get(1).cloned().unwrap_or_else(|| Polynomial::zero(n));
                    if cs.len() <= 3 && a2.is_constant() && a1.is_affine() {
                        // u(z) - u(x_k) = (z - x_k) (a2 (z + x_k) + a1)
                        let a = a2.constant_term();
                        let mut l2 = embed(&a1, m);
                        l2.coef[s] += a;
                        l2.coef[n] += a;
                        return Complement::Product(self.own_gap(), l2);
                    }
                }
                Complement::Unstructured
            }
            PreferenceKind::Sampled(_) => Complement::Unstructured,
        }
    }

    /// `z - x_k` for a one-dimensional own block.
    fn own_gap(&self) -> Linear {
        let mut coef = vec![0.0; self.nvars + 1];
        coef[self.own_start] = -1.0;
        coef[self.nvars] = 1.0;
        Linear { coef, c0: 0.0 }
    }

    fn analyze_convexity(&self) -> bool {
        match (&self.kind, &self.complement) {
            (PreferenceKind::Direction { .. }, _) => true,
            (PreferenceKind::Utility { .. }, Complement::Halfspace(_)) => true,
            (PreferenceKind::Utility { u, .. }, Complement::Product(..)) => {
                // Quadratic in own variable with nonpositive leading term.
                let cs = u.coefficients_in(self.own_start);
                cs.get(2).is_none_or(|a| a.constant_term() <= 0.0)
            }
            _ => false,
        }
    }
}

#[derive(Debug, Clone)]
enum Form<'a> {
    /// `<c, z - center> - offset`; exactly zero at `z = center`.
    Linear { c: Vec<f64>, center: Vec<f64>, offset: f64 },
    /// `(z - center) (a z + b)`, the factored utility difference.
    Product { center: f64, a: f64, b: f64 },
    Poly { u: &'a Polynomial, x: Vec<f64>, base: f64 },
    Sampled { table: &'a SampledTable, key: Vec<i64> },
}

/// A preference map evaluated at a fixed joint point.
#[derive(Debug, Clone)]
pub struct PreparedPreference<'a> {
    map: &'a PreferenceMap,
    form: Form<'a>,
}

impl PreparedPreference<'_> {
    pub fn excess(&self, z: &[f64]) -> Result<f64> {
        check_dim(self.map.own_dim, z.len())?;
        Ok(match &self.form {
            Form::Linear { c, center, offset } => {
                c.iter().zip(z.iter().zip(center)).map(|(c, (a, b))| c * (a - b)).sum::<f64>() - offset
            }
            Form::Product { center, a, b } => (z[0] - center) * (a * z[0] + b),
            Form::Poly { u, x, base } => u.eval(&self.map.with_own(x, z)) - base,
            Form::Sampled { table, key } => {
                let cell = lattice_index(table.spacing, z)?;
                if table.index.get(key).is_some_and(|cells| cells.contains(&cell)) {
                    1.0
                } else {
                    -1.0
                }
            }
        })
    }

    pub fn preferred(&self, z: &[f64]) -> Result<bool> {
        Ok(self.excess(z)? > 0.0)
    }
}

fn embed(p: &Polynomial, own_dim: usize) -> Linear {
    let n = p.nvars();
    let mut coef: Vec<f64> = (0..n).map(|k| p.linear_coeff(k)).collect();
    coef.extend(std::iter::repeat_n(0.0, own_dim));
    Linear {
        coef,
        c0: p.constant_term(),
    }
}

/// Row `l >= 0` as `normal . w <= offset`.
fn ge(l: &Linear) -> (Vec<f64>, f64) {
    (l.coef.iter().map(|c| -c).collect(), l.c0)
}

/// Row `l <= 0` as `normal . w <= offset`.
fn le(l: &Linear) -> (Vec<f64>, f64) {
    (l.coef.clone(), -l.c0)
}

/// Euclidean distance from `w` to `{v : normal_j . v <= offset_j}` by
/// enumerating active sets; `None` when the polyhedron is empty. Intended for
/// a handful of rows.
fn polyhedron_distance(w: &[f64], rows: &[(Vec<f64>, f64)]) -> Option<f64> {
    let mut live = Vec::new();
    for (a, b) in rows {
        if norm(a) == 0.0 {
            if *b < 0.0 {
                return None;
            }
        } else {
            live.push((a.clone(), *b));
        }
    }
    let feasible = |v: &[f64]| {
        live.iter()
            .all(|(a, b)| dot(a, v) - b <= 1e-10 * (1.0 + b.abs()) * norm(a))
    };
    let mut best: Option<f64> = None;
    for k in 0..=live.len().min(w.len()) {
        for s in subsets(live.len(), k) {
            let normals: Vec<&[f64]> = s.iter().map(|&j| live[j].0.as_slice()).collect();
            let offsets: Vec<f64> = s.iter().map(|&j| live[j].1).collect();
            let Some(p) = project_affine(w, &normals, &offsets) else {
                continue;
            };
            if feasible(&p) {
                let d = dist(w, &p);
                best = Some(best.map_or(d, |b: f64| b.min(d)));
            }
        }
    }
    best
}

/// Visits every integer offset with sup norm exactly `r`.
fn for_each_shell<F>(r: i64, off: &mut [i64], k: usize, on_shell: bool, f: &mut F) -> Result<()>
where
    F: FnMut(&[i64]) -> Result<()>,
{
    if k == off.len() {
        return if on_shell || r == 0 { f(off) } else { Ok(()) };
    }
    for v in -r..=r {
        off[k] = v;
        for_each_shell(r, off, k + 1, on_shell || v.abs() == r, f)?;
    }
    Ok(())
}

/// Box region of graph space `(y, z)` on which graph distances are evaluated,
/// with the lattice spacing used by the grid variant.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphDistanceContext {
    lower: Vec<f64>,
    upper: Vec<f64>,
    h_g: f64,
}

impl GraphDistanceContext {
    /// Region `[y_lower, y_upper] x [z_lower, z_upper]` inflated by `rho`.
    pub fn new(
        y_bounds: (&[f64], &[f64]),
        z_bounds: (&[f64], &[f64]),
        rho: f64,
        h_g: f64,
    ) -> Result<Self> {
        if !(h_g > 0.0) {
            return Err(Error::Input(format!("graph grid spacing must be positive, got {h_g}")));
        }
        if !(rho >= 0.0) {
            return Err(Error::Input(format!("region margin must be nonnegative, got {rho}")));
        }
        check_dim(y_bounds.0.len(), y_bounds.1.len())?;
        check_dim(z_bounds.0.len(), z_bounds.1.len())?;
        let lower = y_bounds.0.iter().chain(z_bounds.0).map(|v| v - rho).collect();
        let upper = y_bounds.1.iter().chain(z_bounds.1).map(|v| v + rho).collect();
        Ok(Self { lower, upper, h_g })
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn h_g(&self) -> f64 {
        self.h_g
    }

    pub fn with_spacing(&self, h_g: f64) -> Self {
        Self { h_g, ..self.clone() }
    }

    pub fn contains(&self, w: &[f64]) -> bool {
        w.len() == self.lower.len()
            && w.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *v >= l - 1e-9 && *v <= u + 1e-9)
    }

    fn exterior_distance(&self, w: &[f64]) -> f64 {
        w.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (l, u))| (v - l).min(u - v).max(0.0))
            .fold(f64::INFINITY, f64::min)
    }

    /// The own-strategy part of the region as a box, of dimension `own_dim`
    /// (the trailing coordinates).
    pub fn own_region(&self, own_dim: usize) -> ConvexSet {
        let d = self.lower.len();
        ConvexSet::boxed(self.lower[d - own_dim..].to_vec(), self.upper[d - own_dim..].to_vec())
            .expect("region bounds are ordered")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(s: &str, n: usize) -> Polynomial {
        Polynomial::parse(s, n).unwrap()
    }

    fn ctx1() -> GraphDistanceContext {
        GraphDistanceContext::new((&[0.0], &[1.0]), (&[0.0], &[1.0]), 1.0, 0.01).unwrap()
    }

    #[test]
    fn utility_strictness() {
        let p = PreferenceMap::utility(&[1, 1], 0, poly("x1", 2), 0.0).unwrap();
        assert!(p.preferred(&[0.0, 0.0], &[0.5]).unwrap());
        assert!(!p.preferred(&[0.0, 0.0], &[0.0]).unwrap());
    }

    #[test]
    fn vanishing_direction_is_empty() {
        let c = AffineMap::new(vec![poly("x2 - 0.5", 2)]).unwrap();
        let p = PreferenceMap::direction(&[1, 1], 0, c, 0.0).unwrap();
        for z in [-3.0, 0.0, 0.2, 7.0] {
            assert!(!p.preferred(&[0.2, 0.5], &[z]).unwrap());
        }
    }

    #[test]
    fn concave_utility_interval() {
        let p = PreferenceMap::utility(&[1, 1], 0, poly("-(x1 - 0.5)^2", 2), 0.0).unwrap();
        assert!(p.is_convex_valued());
        assert!(p.preferred(&[0.0, 0.0], &[0.9]).unwrap());
        assert!(!p.preferred(&[0.0, 0.0], &[1.0]).unwrap());
        assert!(!p.preferred(&[0.0, 0.0], &[0.0]).unwrap());
    }

    #[test]
    fn constant_utility_never_prefers() {
        let p = PreferenceMap::utility(&[1, 1], 1, poly("3", 2), 0.0).unwrap();
        assert!(!p.preferred(&[0.1, 0.4], &[0.9]).unwrap());
    }

    #[test]
    fn half_plane_distance() {
        // One player, graph {(x, z) : z > x}.
        let p = PreferenceMap::utility(&[1], 0, poly("x1", 1), 0.0).unwrap();
        assert!(p.has_exact_graph_distance());
        let g = p.graph_distance(&ctx1(), &[0.0], &[1.0]).unwrap();
        assert!((g - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(p.graph_distance(&ctx1(), &[0.5], &[0.2]).unwrap(), 0.0);
    }

    #[test]
    fn grid_variant_tracks_exact() {
        let p = PreferenceMap::utility(&[1], 0, poly("x1", 1), 0.0).unwrap();
        let ctx = ctx1().with_spacing(0.05);
        for (y, z) in [(0.0, 1.0), (0.3, 0.35), (0.9, 1.4), (-0.2, 0.5)] {
            let a = p.graph_distance(&ctx, &[y], &[z]).unwrap();
            let b = p.graph_distance_grid(&ctx, &[y], &[z]).unwrap();
            assert!((a - b).abs() <= 0.05 * 2f64.sqrt(), "{y} {z}: {a} vs {b}");
        }
    }

    #[test]
    fn product_form_distance() {
        // <c(x), z - x1> with c = x2 - 0.5: graph is {(z - x1)(x2 - 0.5) > 0}.
        let c = AffineMap::new(vec![poly("x2 - 0.5", 2)]).unwrap();
        let p = PreferenceMap::direction(&[1, 1], 0, c, 0.0).unwrap();
        let ctx = GraphDistanceContext::new((&[0.0, 0.0], &[1.0, 1.0]), (&[0.0], &[1.0]), 1.0, 0.01)
            .unwrap();
        // w = (x1, x2, z) = (0.2, 0.9, 0.5): distances 0.4 to x2 = 0.5 and
        // 0.3/sqrt2 to z = x1.
        let g = p.graph_distance(&ctx, &[0.2, 0.9], &[0.5]).unwrap();
        assert!((g - 0.3 / 2f64.sqrt()).abs() < 1e-12);
        let g = p.graph_distance(&ctx, &[0.2, 0.6], &[0.9]).unwrap();
        assert!((g - 0.1).abs() < 1e-12);
    }

    #[test]
    fn quadratic_product_form_distance_matches_grid() {
        let p = PreferenceMap::utility(&[1, 1], 0, poly("-(x1 - x2)^2", 2), 0.0).unwrap();
        assert!(p.has_exact_graph_distance());
        let ctx = GraphDistanceContext::new((&[0.0, 0.0], &[1.0, 1.0]), (&[0.0], &[1.0]), 1.0, 0.02)
            .unwrap();
        for (y, z) in [([0.1, 0.6], 0.4), ([0.9, 0.3], 0.5), ([0.5, 0.5], 0.5)] {
            let a = p.graph_distance(&ctx, &y, &[z]).unwrap();
            let b = p.graph_distance_grid(&ctx, &y, &[z]).unwrap();
            assert!((a - b).abs() <= 0.02 * 3f64.sqrt(), "{y:?} {z}: {a} vs {b}");
        }
    }

    #[test]
    fn outside_region_is_rejected() {
        let p = PreferenceMap::utility(&[1], 0, poly("x1", 1), 0.0).unwrap();
        assert!(p.graph_distance(&ctx1(), &[5.0], &[0.0]).is_err());
    }

    #[test]
    fn polyhedron_distance_cases() {
        let rows = vec![(vec![1.0, 0.0], 0.0), (vec![0.0, 1.0], 0.0)];
        assert_eq!(polyhedron_distance(&[3.0, 4.0], &rows), Some(5.0));
        assert_eq!(polyhedron_distance(&[-1.0, 4.0], &rows), Some(4.0));
        assert_eq!(polyhedron_distance(&[-1.0, -1.0], &rows), Some(0.0));
        assert_eq!(polyhedron_distance(&[0.0, 0.0], &[(vec![0.0, 0.0], -1.0)]), None);
    }

    fn table() -> PreferenceMap {
        let t = SampledTable::new(0.5, vec![(vec![0.0], vec![vec![0.0 + 1.0], vec![0.0 - 0.5]])], 1, 1);
        PreferenceMap::sampled(&[1], 0, t.unwrap()).unwrap()
    }

    #[test]
    fn sampled_lookup_and_hull() {
        let p = table();
        let region = ConvexSet::boxed(vec![-2.0], vec![2.0]).unwrap();
        assert!(p.preferred(&[0.0], &[1.0]).unwrap());
        assert!(!p.preferred(&[0.0], &[0.5]).unwrap());
        assert!(!p.preferred(&[0.5], &[1.0]).unwrap());
        assert!(p.hull_preferred(&[0.0], &[0.5], &region, 10, 0).unwrap());
        assert!(!p.hull_preferred(&[0.0], &[1.5], &region, 10, 0).unwrap());
        assert!(p.preferred(&[0.3], &[1.0]).is_err());
        assert!(p.preferred(&[0.0], &[0.1]).is_err());
    }

    #[test]
    fn sampled_grid_distance() {
        let p = table();
        let ctx = GraphDistanceContext::new((&[0.0], &[0.0]), (&[0.0], &[1.0]), 1.0, 0.01).unwrap();
        // (0, 1) is in the graph; (0, 0.5) is not.
        assert_eq!(p.graph_distance(&ctx, &[0.0], &[1.0]).unwrap(), 0.5);
    }

    #[test]
    fn sample_preferred_cases() {
        let p = PreferenceMap::utility(&[1, 1], 0, poly("x1", 2), 0.0).unwrap();
        let r = ConvexSet::boxed(vec![0.0], vec![1.0]).unwrap();
        let s = p.sample_preferred(&[0.0, 0.0], &r, 100, 0).unwrap();
        assert!(!s.is_empty() && s.iter().all(|z| z[0] > 0.0));
        let s = p.sample_preferred(&[1.0, 0.0], &r, 100, 0).unwrap();
        assert!(s.is_empty());
    }
}
