//! Closed convex sets in low-dimensional Euclidean space.
//!
//! Sets support exact projection (boxes, balls) or Dykstra's cyclic
//! half-space scheme (bounded polytopes), membership, support points, lattice
//! grids and seeded sampling. The cone helpers implement polar-cone and
//! normal-cone membership against finite samples, plus a sphere-scan
//! separator for ambient dimension at most three.
//!
//! Claims about continuous sets made from probes (grid plus seeded samples)
//! hold only up to the probing resolution.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::grid::{uniform_axis, ProductGrid};
use crate::simplex::{in_cone, in_convex_hull};
use crate::vecops::{axpy, dist, dot, norm, normalized, project_affine, scale, sub, subsets};

/// Movement threshold for the polytope projection.
pub const PROJECTION_TOL: f64 = 1e-10;
/// Cycle cap for the polytope projection.
pub const PROJECTION_MAX_CYCLES: usize = 10_000;
/// Unit-norm tolerance for cone directions.
pub const UNIT_TOL: f64 = 1e-12;
/// Above this many candidate active sets, polytope projection falls back to
/// Dykstra's method.
pub const ACTIVE_SET_LIMIT: usize = 20_000;

/// Closed half-space `normal . x <= offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vec<f64>, offset: f64) -> Self {
        Self { normal, offset }
    }

    #[inline]
    pub fn violation(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.offset
    }

    #[inline]
    pub fn project(&self, z: &[f64]) -> Vec<f64> {
        let v = self.violation(z);
        if v <= 0.0 {
            z.to_vec()
        } else {
            axpy(z, -v / dot(&self.normal, &self.normal), &self.normal)
        }
    }
}

/// Bounded, nonempty intersection of half-spaces. Vertices are enumerated at
/// construction; they double as the feasibility certificate and give the
/// bounding box and exact support points.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    rows: Vec<Halfspace>,
    vertices: Vec<Vec<f64>>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Polytope {
    pub fn rows(&self) -> &[Halfspace] {
        &self.rows
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Polytope(Polytope),
}

/// A nonempty closed convex set. Construct through [`ConvexSet::boxed`],
/// [`ConvexSet::ball`] or [`ConvexSet::polytope`], which enforce the shape
/// invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexSet {
    shape: Shape,
}

impl ConvexSet {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::Input("box must have positive dimension".into()));
        }
        if let Some(k) = (0..lower.len()).find(|&k| !(lower[k] <= upper[k])) {
            return Err(Error::Input(format!(
                "box lower bound exceeds upper bound in coordinate {k} ({} > {})",
                lower[k], upper[k]
            )));
        }
        if lower.iter().chain(&upper).any(|v| !v.is_finite()) {
            return Err(Error::Input("box bounds must be finite".into()));
        }
        Ok(Self {
            shape: Shape::Box { lower, upper },
        })
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::Input("ball must have positive dimension".into()));
        }
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::Input(format!("ball radius must be nonnegative, got {radius}")));
        }
        Ok(Self {
            shape: Shape::Ball { center, radius },
        })
    }

    pub fn polytope(rows: Vec<Halfspace>) -> Result<Self> {
        let d = rows
            .first()
            .map(|r| r.normal.len())
            .ok_or_else(|| Error::Input("polytope needs at least one row".into()))?;
        if d == 0 {
            return Err(Error::Input("polytope must have positive dimension".into()));
        }
        for r in &rows {
            check_dim(d, r.normal.len())?;
            if norm(&r.normal) == 0.0 {
                return Err(Error::Input("polytope row has a zero normal".into()));
            }
        }
        let normals: Vec<Vec<f64>> = rows.iter().map(|r| r.normal.clone()).collect();
        for k in 0..d {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; d];
                e[k] = s;
                if !in_cone(&normals, &e, 1e-9) {
                    return Err(Error::Input("polytope is unbounded".into()));
                }
            }
        }
        let vertices = enumerate_vertices(&rows, d);
        if vertices.is_empty() {
            return Err(Error::Input("polytope is empty".into()));
        }
        let mut lower = vec![f64::INFINITY; d];
        let mut upper = vec![f64::NEG_INFINITY; d];
        for v in &vertices {
            for k in 0..d {
                lower[k] = lower[k].min(v[k]);
                upper[k] = upper[k].max(v[k]);
            }
        }
        Ok(Self {
            shape: Shape::Polytope(Polytope {
                rows,
                vertices,
                lower,
                upper,
            }),
        })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Box { lower, .. } => lower.len(),
            Shape::Ball { center, .. } => center.len(),
            Shape::Polytope(p) => p.lower.len(),
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match &self.shape {
            Shape::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol),
            Shape::Ball { center, radius } => dist(x, center) <= radius + tol,
            Shape::Polytope(p) => p
                .rows
                .iter()
                .all(|r| r.violation(x) <= tol * norm(&r.normal)),
        }
    }

    /// Axis-aligned bounding box `(lower, upper)`.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.shape {
            Shape::Box { lower, upper } => (lower.clone(), upper.clone()),
            Shape::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            Shape::Polytope(p) => (p.lower.clone(), p.upper.clone()),
        }
    }

    /// Maximizer of `<direction, x>` over the set and the attained value.
    pub fn support(&self, direction: &[f64]) -> (f64, Vec<f64>) {
        let point = match &self.shape {
            Shape::Box { lower, upper } => direction
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(d, (l, u))| if *d > 0.0 { *u } else { *l })
                .collect(),
            Shape::Ball { center, radius } => match normalized(direction) {
                Some(u) => axpy(center, *radius, &u),
                None => center.clone(),
            },
            Shape::Polytope(p) => p
                .vertices
                .iter()
                .max_by(|a, b| dot(direction, a).total_cmp(&dot(direction, b)))
                .cloned()
                .expect("polytope has vertices"),
        };
        (dot(direction, &point), point)
    }

    /// Nearest point of the set to `y`.
    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), y.len())?;
        match &self.shape {
            Shape::Box { lower, upper } => Ok(y
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(v, (l, u))| v.clamp(*l, *u))
                .collect()),
            Shape::Ball { center, radius } => {
                let off = sub(y, center);
                let r = norm(&off);
                if r <= *radius {
                    Ok(y.to_vec())
                } else {
                    Ok(axpy(center, radius / r, &off))
                }
            }
            Shape::Polytope(p) => match exact_projection(&p.rows, y) {
                Some(q) => Ok(q),
                None => dykstra(&p.rows, y),
            },
        }
    }

    /// Euclidean distance from `y` to the set.
    pub fn distance(&self, y: &[f64]) -> Result<f64> {
        Ok(dist(y, &self.project(y)?))
    }

    /// Lattice grid points of the set at resolution `h`.
    pub fn grid(&self, h: f64) -> Vec<Vec<f64>> {
        let (lo, hi) = self.bounding_box();
        let g = ProductGrid::lattice(&lo, &hi, h);
        match &self.shape {
            Shape::Box { .. } => g.points(),
            _ => g.iter().filter(|p| self.contains(p, 1e-12)).collect(),
        }
    }

    /// Number of lattice points in the bounding-box grid at resolution `h`.
    pub fn grid_size_bound(&self, h: f64) -> usize {
        let (lo, hi) = self.bounding_box();
        ProductGrid::lattice(&lo, &hi, h).len()
    }

    /// One seeded uniform-ish sample of the set.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match &self.shape {
            Shape::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| if u > l { rng.random_range(*l..=*u) } else { *l })
                .collect(),
            Shape::Ball { center, radius } => {
                let d = center.len();
                let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
                let dir = normalized(&g).unwrap_or_else(|| {
                    let mut e = vec![0.0; d];
                    e[0] = 1.0;
                    e
                });
                let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
                axpy(center, r, &dir)
            }
            Shape::Polytope(p) => {
                for _ in 0..1000 {
                    let x: Vec<f64> = p
                        .lower
                        .iter()
                        .zip(&p.upper)
                        .map(|(l, u)| if u > l { rng.random_range(*l..=*u) } else { *l })
                        .collect();
                    if self.contains(&x, 0.0) {
                        return x;
                    }
                }
                // Thin polytope: fall back to a random vertex combination.
                let w: Vec<f64> = p
                    .vertices
                    .iter()
                    .map(|_| -rng.random::<f64>().max(1e-300).ln())
                    .collect();
                let total: f64 = w.iter().sum();
                let mut x = vec![0.0; p.lower.len()];
                for (v, wi) in p.vertices.iter().zip(&w) {
                    for (xk, vk) in x.iter_mut().zip(v) {
                        *xk += vk * wi / total;
                    }
                }
                x
            }
        }
    }

    /// Deterministic grid plus seeded samples, at most `budget` points, all
    /// inside the set.
    pub fn probe_points(&self, budget: usize, seed: u64) -> Vec<Vec<f64>> {
        let d = self.dim();
        let (lo, hi) = self.bounding_box();
        let per_axis = ((budget / 2) as f64).powf(1.0 / d as f64).floor() as usize;
        let mut pts: Vec<Vec<f64>> = if per_axis >= 1 {
            let g = ProductGrid::new(
                lo.iter()
                    .zip(&hi)
                    .map(|(&l, &u)| uniform_axis(l, u, per_axis))
                    .collect(),
            );
            g.iter().filter(|p| self.contains(p, 1e-12)).collect()
        } else {
            Vec::new()
        };
        pts.truncate(budget);
        let mut rng = seeded_rng(seed, 0x5eed_9e0b);
        while pts.len() < budget {
            pts.push(self.sample(&mut rng));
        }
        pts
    }
}

/// Cartesian product of per-player sets, acting on the joint vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSet {
    blocks: Vec<ConvexSet>,
}

impl ProductSet {
    pub fn new(blocks: Vec<ConvexSet>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Input("product needs at least one factor".into()));
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[ConvexSet] {
        &self.blocks
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(ConvexSet::dim).sum()
    }

    fn split<'a>(&self, x: &'a [f64]) -> Vec<&'a [f64]> {
        let mut out = Vec::with_capacity(self.blocks.len());
        let mut at = 0;
        for b in &self.blocks {
            out.push(&x[at..at + b.dim()]);
            at += b.dim();
        }
        out
    }

    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), y.len())?;
        let mut out = Vec::with_capacity(y.len());
        for (b, part) in self.blocks.iter().zip(self.split(y)) {
            out.extend(b.project(part)?);
        }
        Ok(out)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim()
            && self
                .blocks
                .iter()
                .zip(self.split(x))
                .all(|(b, part)| b.contains(part, tol))
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for b in &self.blocks {
            let (l, u) = b.bounding_box();
            lo.extend(l);
            hi.extend(u);
        }
        (lo, hi)
    }

    /// Product of the factor grids in lexicographic order.
    pub fn grid(&self, h: f64) -> Vec<Vec<f64>> {
        let grids: Vec<Vec<Vec<f64>>> = self.blocks.iter().map(|b| b.grid(h)).collect();
        let mut out: Vec<Vec<f64>> = vec![Vec::new()];
        for g in &grids {
            let mut next = Vec::with_capacity(out.len() * g.len());
            for prefix in &out {
                for p in g {
                    let mut v = prefix.clone();
                    v.extend_from_slice(p);
                    next.push(v);
                }
            }
            out = next;
        }
        out
    }

    pub fn grid_size_bound(&self, h: f64) -> usize {
        self.blocks
            .iter()
            .map(|b| b.grid_size_bound(h))
            .fold(1usize, usize::saturating_mul)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.blocks.iter().flat_map(|b| b.sample(rng)).collect()
    }
}

/// Seeded generator for probing; `stream` separates independent uses of the
/// same seed.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(splitmix(seed ^ splitmix(stream)))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn enumerate_vertices(rows: &[Halfspace], d: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for s in subsets(rows.len(), d) {
        let normals: Vec<&[f64]> = s.iter().map(|&j| rows[j].normal.as_slice()).collect();
        let m: Vec<Vec<f64>> = normals.iter().map(|n| n.to_vec()).collect();
        let rhs: Vec<f64> = s.iter().map(|&j| rows[j].offset).collect();
        let Some(v) = crate::vecops::solve(&m, &rhs) else {
            continue;
        };
        let feasible = rows
            .iter()
            .all(|r| r.violation(&v) <= 1e-9 * (1.0 + r.offset.abs()) * norm(&r.normal));
        if feasible && !out.iter().any(|w| dist(w, &v) <= 1e-12) {
            out.push(v);
        }
    }
    out
}

/// Nearest point of a polytope by enumerating active sets of at most `d`
/// rows: the projection onto the affine hull of some independent active set,
/// and the closest feasible such point. `None` when there are too many sets.
fn exact_projection(rows: &[Halfspace], y: &[f64]) -> Option<Vec<f64>> {
    let feasible = |q: &[f64]| {
        rows.iter()
            .all(|r| r.violation(q) <= 1e-12 * (1.0 + r.offset.abs()) * norm(&r.normal))
    };
    if feasible(y) {
        return Some(y.to_vec());
    }
    let d = y.len();
    let count: usize = (1..=d.min(rows.len()))
        .map(|k| subsets(rows.len(), k).len())
        .sum();
    if count > ACTIVE_SET_LIMIT {
        return None;
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for k in 1..=d.min(rows.len()) {
        for s in subsets(rows.len(), k) {
            let normals: Vec<&[f64]> = s.iter().map(|&j| rows[j].normal.as_slice()).collect();
            let offsets: Vec<f64> = s.iter().map(|&j| rows[j].offset).collect();
            let Some(q) = project_affine(y, &normals, &offsets) else {
                continue;
            };
            let dq = dist(y, &q);
            if best.as_ref().is_none_or(|(bd, _)| dq < *bd) && feasible(&q) {
                best = Some((dq, q));
            }
        }
    }
    best.map(|(_, q)| q)
}

/// Dykstra's cyclic projection onto an intersection of half-spaces. The
/// correction terms make the limit the nearest point, not just a feasible one.
fn dykstra(rows: &[Halfspace], y: &[f64]) -> Result<Vec<f64>> {
    if rows.iter().all(|r| r.violation(y) <= 0.0) {
        return Ok(y.to_vec());
    }
    let mut x = y.to_vec();
    let mut corr = vec![vec![0.0; y.len()]; rows.len()];
    let mut movement = f64::INFINITY;
    for _ in 0..PROJECTION_MAX_CYCLES {
        let start = x.clone();
        let mut shift = 0.0_f64;
        for (r, p) in rows.iter().zip(corr.iter_mut()) {
            let z: Vec<f64> = x.iter().zip(p.iter()).map(|(a, b)| a + b).collect();
            let nx = r.project(&z);
            let np = sub(&z, &nx);
            shift = shift.max(dist(&np, p));
            *p = np;
            x = nx;
        }
        // x can return to its starting point while the corrections are
        // still moving, so both must settle.
        movement = dist(&start, &x).max(shift);
        if movement < PROJECTION_TOL {
            return Ok(polish(rows, y, x));
        }
    }
    Err(Error::NonConvergence {
        iterations: PROJECTION_MAX_CYCLES,
        movement,
        last: x,
    })
}

/// Snaps the Dykstra limit onto the affine hull of its active rows when the
/// resulting point is feasible and satisfies the KKT sign conditions.
fn polish(rows: &[Halfspace], y: &[f64], x: Vec<f64>) -> Vec<f64> {
    let active: Vec<&Halfspace> = rows
        .iter()
        .filter(|r| r.violation(&x).abs() <= 1e-8 * norm(&r.normal))
        .collect();
    if active.is_empty() || active.len() > y.len() {
        return x;
    }
    let normals: Vec<&[f64]> = active.iter().map(|r| r.normal.as_slice()).collect();
    let offsets: Vec<f64> = active.iter().map(|r| r.offset).collect();
    let Some(q) = project_affine(y, &normals, &offsets) else {
        return x;
    };
    let feasible = rows
        .iter()
        .all(|r| r.violation(&q) <= 1e-12 * norm(&r.normal));
    // y - q must lie in the cone of active normals.
    let cols: Vec<Vec<f64>> = active.iter().map(|r| r.normal.clone()).collect();
    if feasible && dist(&q, &x) <= 1e-6 && in_cone(&cols, &sub(y, &q), 1e-9) {
        q
    } else {
        x
    }
}

/// `min_η <x - y, η - x>` over probe points of `set` (grid, seeded samples,
/// the support point in direction `y - x`, and `x` itself). A nonnegative
/// value (up to rounding) certifies `x` as the projection of `y`.
pub fn projection_vi_residual(
    set: &ConvexSet,
    y: &[f64],
    x: &[f64],
    probe_budget: usize,
    seed: u64,
) -> Result<f64> {
    check_dim(set.dim(), y.len())?;
    check_dim(set.dim(), x.len())?;
    if probe_budget == 0 {
        return Err(Error::Input("probe budget must be positive".into()));
    }
    if !set.contains(x, 1e-9) {
        return Err(Error::Input("candidate projection is outside the set".into()));
    }
    let w = sub(x, y);
    let mut best = 0.0_f64; // η = x
    let (_, support) = set.support(&scale(&w, -1.0));
    best = best.min(dot(&w, &sub(&support, x)));
    for eta in set.probe_points(probe_budget.saturating_sub(2), seed) {
        best = best.min(dot(&w, &sub(&eta, x)));
    }
    Ok(best)
}

/// `x*` lies in the polar cone of the finite set `points`. The polar of the
/// empty set is the whole space.
pub fn polar_membership(points: &[Vec<f64>], x_star: &[f64], tol: f64) -> Result<bool> {
    for c in points {
        check_dim(x_star.len(), c.len())?;
    }
    Ok(points.iter().all(|c| dot(x_star, c) <= tol))
}

/// Source of points for normal-cone queries.
#[derive(Debug, Clone, Copy)]
pub enum PointSource<'a> {
    Set(&'a ConvexSet),
    Points(&'a [Vec<f64>]),
}

/// `x*` lies in the normal cone of the source at `x`, checked exhaustively
/// for finite lists and on probes (plus the exact support point) for sets.
pub fn normal_cone_membership(
    source: PointSource<'_>,
    x: &[f64],
    x_star: &[f64],
    tol: f64,
    probe_budget: usize,
    seed: u64,
) -> Result<bool> {
    check_dim(x.len(), x_star.len())?;
    match source {
        PointSource::Points(points) => {
            for p in points {
                check_dim(x.len(), p.len())?;
            }
            Ok(points.iter().all(|p| dot(x_star, &sub(p, x)) <= tol))
        }
        PointSource::Set(set) => {
            check_dim(set.dim(), x.len())?;
            let (_, s) = set.support(x_star);
            if dot(x_star, &sub(&s, x)) > tol {
                return Ok(false);
            }
            Ok(set
                .probe_points(probe_budget, seed)
                .iter()
                .all(|p| dot(x_star, &sub(p, x)) <= tol))
        }
    }
}

/// Finite discretization of the unit sphere in dimension 1, 2 or 3.
/// `resolution` is the number of points per angle.
pub fn sphere_directions(dim: usize, resolution: usize) -> Result<Vec<Vec<f64>>> {
    let res = resolution.max(1);
    match dim {
        1 => Ok(vec![vec![1.0], vec![-1.0]]),
        2 => Ok((0..res)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / res as f64;
                vec![t.cos(), t.sin()]
            })
            .collect()),
        3 => {
            let rings = (res / 2).max(1);
            let mut out = vec![vec![0.0, 0.0, 1.0]];
            for j in 1..rings {
                let phi = std::f64::consts::PI * j as f64 / rings as f64;
                for k in 0..res {
                    let t = std::f64::consts::TAU * k as f64 / res as f64;
                    out.push(vec![phi.sin() * t.cos(), phi.sin() * t.sin(), phi.cos()]);
                }
            }
            out.push(vec![0.0, 0.0, -1.0]);
            Ok(out)
        }
        _ => Err(Error::Input(format!(
            "sphere scan supports dimensions 1 to 3, got {dim}"
        ))),
    }
}

/// Scanned directions `d` with `max_z <d, z - x> <= 1e-9`, paired with that
/// margin, in scan order.
pub fn separating_directions(
    points: &[Vec<f64>],
    x: &[f64],
    angular_resolution: usize,
) -> Result<Vec<(Vec<f64>, f64)>> {
    if points.is_empty() {
        return Err(Error::Input("separation needs at least one point".into()));
    }
    for p in points {
        check_dim(x.len(), p.len())?;
    }
    let offsets: Vec<Vec<f64>> = points.iter().map(|p| sub(p, x)).collect();
    Ok(sphere_directions(x.len(), angular_resolution)?
        .into_iter()
        .filter_map(|d| {
            let margin = offsets
                .iter()
                .map(|o| dot(&d, o))
                .fold(f64::NEG_INFINITY, f64::max);
            (margin <= 1e-9).then_some((d, margin))
        })
        .collect())
}

/// Unit vector separating `x` from the hull of `points`, chosen as the scanned
/// direction with the most negative margin (first scanned on ties). Zero
/// margin separators are returned when `x` sits on the hull boundary.
pub fn separate(
    points: &[Vec<f64>],
    x: &[f64],
    angular_resolution: usize,
) -> Result<Option<Vec<f64>>> {
    let found = separating_directions(points, x, angular_resolution)?;
    let mut best: Option<(Vec<f64>, f64)> = None;
    for (d, m) in found {
        if best.as_ref().is_none_or(|(_, bm)| m < *bm) {
            best = Some((d, m));
        }
    }
    Ok(best.map(|(d, _)| d))
}

/// Finite sample of `N ∩ S[0,1]` for a cone `N`, or the whole space.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeSample {
    directions: Vec<Vec<f64>>,
    ambient_dim: usize,
    is_full_space: bool,
}

impl ConeSample {
    /// Whole space: the stored directions are a fixed coarse sphere
    /// discretization and the hull is the closed unit ball.
    pub fn full_space(ambient_dim: usize) -> Self {
        let directions = match ambient_dim {
            1..=3 => sphere_directions(ambient_dim, 8).expect("supported dimension"),
            _ => (0..ambient_dim)
                .flat_map(|k| {
                    [1.0, -1.0].into_iter().map(move |s| {
                        let mut e = vec![0.0; ambient_dim];
                        e[k] = s;
                        e
                    })
                })
                .collect(),
        };
        Self {
            directions,
            ambient_dim,
            is_full_space: true,
        }
    }

    pub fn from_directions(ambient_dim: usize, directions: Vec<Vec<f64>>) -> Result<Self> {
        for d in &directions {
            check_dim(ambient_dim, d.len())?;
            if (norm(d) - 1.0).abs() > UNIT_TOL {
                return Err(Error::Input(format!(
                    "cone direction {d:?} is not a unit vector"
                )));
            }
        }
        Ok(Self {
            directions,
            ambient_dim,
            is_full_space: false,
        })
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn is_full_space(&self) -> bool {
        self.is_full_space
    }

    pub fn is_empty(&self) -> bool {
        !self.is_full_space && self.directions.is_empty()
    }

    /// `v` lies in the convex hull of the sample (the unit ball for the
    /// full space).
    pub fn hull_contains(&self, v: &[f64], tol: f64) -> bool {
        if v.len() != self.ambient_dim {
            return false;
        }
        if self.is_full_space {
            norm(v) <= 1.0 + tol
        } else {
            in_convex_hull(&self.directions, v, tol)
        }
    }
}
