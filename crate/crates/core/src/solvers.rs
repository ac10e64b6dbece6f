//! Three routes to projected solutions.
//!
//! * A damped fixed-point iteration `y <- (1-λ) y + λ M'(x, y)`,
//!   `x <- Pr_X(y)`, where `M'` selects from the maximizers of the graph
//!   distance `g_i(y, ·)` over `K_i(x)`.
//! * A grid scan for zeros of the QVI residual
//!   `max_{η ∈ X, z ∈ K(x)} -[<x - y, η - x> + <y*, z - y>]`, `y* ∈ T(y)`.
//! * A brute-force oracle that certifies every candidate grid pair.
//!
//! All candidates are passed through the projected-solution certificate;
//! only passing ones are returned.

use std::collections::HashMap;

use crate::config::SolverConfig;
use crate::error::{check_dim, Error, Result};
use crate::game::{first_witness, Certificate, GameInstance, Verdict};
use crate::geometry::{seeded_rng, ConvexSet};
use crate::normal_op::{NormalOperator, TValue};
use crate::preferences::{GraphDistanceContext, PreferenceKind};
use crate::vecops::{centroid, dist, dot, lex_cmp, scale, sub};

/// Tolerance for ties among graph-distance maximizers.
pub const TIE_TOL: f64 = 1e-9;
/// Cap on `|X grid| * sum_i |Q_i grid|` for grid scans.
pub const GRID_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse {
    /// Lattice points of `K_i(x)` attaining the maximum of `g_i(y, ·)`.
    pub maximizers: Vec<Vec<f64>>,
    pub max_g: f64,
    /// Centroid of the maximizers, or `Pr_{K_i(x)}(y_i)` when the maximum is 0.
    pub selected: Vec<f64>,
}

/// Grid maximization of `g_i(y, ·)` over `K_i(x)`.
pub fn best_response_distance(
    g: &GameInstance,
    i: usize,
    x: &[f64],
    y: &[f64],
    cfg: &SolverConfig,
) -> Result<BestResponse> {
    best_response_with(g, &g.graph_context(i, cfg)?, i, x, y, cfg)
}

fn best_response_with(
    g: &GameInstance,
    ctx: &GraphDistanceContext,
    i: usize,
    x: &[f64],
    y: &[f64],
    cfg: &SolverConfig,
) -> Result<BestResponse> {
    let k = g.constraint_set(i, x)?;
    let p = g.preference(i);
    let mut scored = Vec::new();
    let mut max_g = 0.0_f64;
    for z in k.grid(cfg.h) {
        let v = p.graph_distance(ctx, y, &z)?;
        max_g = max_g.max(v);
        scored.push((v, z));
    }
    let maximizers: Vec<Vec<f64>> = scored
        .into_iter()
        .filter(|(v, _)| *v >= max_g - TIE_TOL)
        .map(|(_, z)| z)
        .collect();
    let selected = if max_g <= 0.0 {
        k.project(&y[g.block(i)])?
    } else {
        centroid(&maximizers).expect("nonempty maximizer list")
    };
    Ok(BestResponse {
        maximizers,
        max_g,
        selected,
    })
}

/// Starting points: corners of the bounding box of `X` in lexicographic
/// order, its center, then seeded samples, each snapped to the `h`-lattice
/// and projected onto `X`.
pub fn multistart_points(g: &GameInstance, cfg: &SolverConfig) -> Result<Vec<Vec<f64>>> {
    let x_set = g.x_set();
    let (lo, hi) = x_set.bounding_box();
    let n = lo.len();
    let mut raw: Vec<Vec<f64>> = Vec::new();
    if n < 16 {
        for mask in 0..(1usize << n) {
            raw.push(
                (0..n)
                    .map(|k| if mask >> (n - 1 - k) & 1 == 1 { hi[k] } else { lo[k] })
                    .collect(),
            );
        }
    }
    raw.push(lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect());
    let mut out: Vec<Vec<f64>> = Vec::new();
    let push = |p: Vec<f64>, out: &mut Vec<Vec<f64>>| -> Result<()> {
        let p = x_set.project(&p)?;
        if !out.contains(&p) {
            out.push(p);
        }
        Ok(())
    };
    for p in raw {
        if out.len() >= cfg.multistart {
            break;
        }
        push(p, &mut out)?;
    }
    let mut rng = seeded_rng(cfg.seed, 0x5747);
    let mut attempts = 0;
    while out.len() < cfg.multistart && attempts < 100 * cfg.multistart {
        attempts += 1;
        let s = x_set.sample(&mut rng);
        let snapped: Vec<f64> = s.iter().map(|v| (v / cfg.h).round() * cfg.h).collect();
        push(snapped, &mut out)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointRun {
    pub start: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Last step length `‖(x', y') - (x, y)‖`.
    pub movement: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub verdict: Verdict,
}

/// Certified points grouped by single linkage on `x̃`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Lowest-score member; lexicographically first among equals.
    pub representative: Certificate,
    pub members: usize,
    pub x_lower: Vec<f64>,
    pub x_upper: Vec<f64>,
    pub y_lower: Vec<f64>,
    pub y_upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub clusters: Vec<Cluster>,
    /// Fixed-point runs, one per start; empty for scans.
    pub runs: Vec<FixedPointRun>,
    /// Candidate pairs examined by scans.
    pub scanned: usize,
    pub advisory: Option<String>,
}

impl SolveOutcome {
    pub fn certificates(&self) -> Vec<&Certificate> {
        self.clusters.iter().map(|c| &c.representative).collect()
    }
}

fn grid_cfg(cfg: &SolverConfig) -> SolverConfig {
    cfg.clone().with_eps(cfg.grid_eps())
}

/// Damped fixed-point iteration from every multistart point. Limits are
/// certified at tolerance `cfg.grid_eps()`; iteration stops when a step is
/// shorter than `cfg.analytic_eps()`.
pub fn solve_fixed_point(g: &GameInstance, cfg: &SolverConfig) -> Result<SolveOutcome> {
    cfg.validate()?;
    let ctxs = (0..g.n_players())
        .map(|i| g.graph_context(i, cfg))
        .collect::<Result<Vec<_>>>()?;
    let stop = cfg.analytic_eps();
    let certify = grid_cfg(cfg);
    let mut runs = Vec::new();
    let mut passed = Vec::new();
    for start in multistart_points(g, cfg)? {
        let mut x = start.clone();
        let mut y = start.clone();
        let mut iterations = 0;
        let mut movement = f64::INFINITY;
        let mut converged = false;
        while iterations < cfg.max_iter {
            let mut target = Vec::with_capacity(y.len());
            for (i, ctx) in ctxs.iter().enumerate() {
                target.extend(best_response_with(g, ctx, i, &x, &y, cfg)?.selected);
            }
            let ny: Vec<f64> = y
                .iter()
                .zip(&target)
                .map(|(a, b)| (1.0 - cfg.lambda) * a + cfg.lambda * b)
                .collect();
            let nx = g.x_set().project(&ny)?;
            movement = (dist(&nx, &x).powi(2) + dist(&ny, &y).powi(2)).sqrt();
            x = nx;
            y = ny;
            iterations += 1;
            if movement <= stop {
                converged = true;
                break;
            }
        }
        let cert = g.check_projected_solution(&x, &y, &certify)?;
        runs.push(FixedPointRun {
            start,
            iterations,
            converged,
            movement,
            x,
            y,
            verdict: cert.verdict.clone(),
        });
        if cert.passed() {
            passed.push(cert);
        }
    }
    let clusters = cluster(passed, 2.0 * cfg.h);
    let advisory = clusters.is_empty().then(|| {
        let n_conv = runs.iter().filter(|r| r.converged).count();
        format!(
            "no certified limit ({n_conv} of {} starts converged); run the oracle for ground truth",
            runs.len()
        )
    });
    Ok(SolveOutcome {
        clusters,
        runs,
        scanned: 0,
        advisory,
    })
}

/// Residual of the QVI at `(x, y)` for the selection `y*`, with the pair
/// `(η, z)` attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct QVIPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub y_star: Vec<f64>,
    pub residual: f64,
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
}

/// `max_η -<x - y, η - x>` over `X` with its maximizer. Exact via support
/// points; never negative since `η = x` is allowed.
fn projection_term(g: &GameInstance, x: &[f64], y: &[f64]) -> (f64, Vec<f64>) {
    let w = sub(x, y);
    let mut eta = Vec::with_capacity(x.len());
    for (i, b) in g.x_set().blocks().iter().enumerate() {
        let r = g.block(i);
        eta.extend(b.support(&scale(&w[r], -1.0)).1);
    }
    let v = -dot(&w, &sub(&eta, x));
    if v > 0.0 {
        (v, eta)
    } else {
        (0.0, x.to_vec())
    }
}

/// `max_{z ∈ K} -<y*, z - y_i>` with its maximizer.
fn player_term(k: &ConvexSet, yi: &[f64], ys: &[f64]) -> (f64, Vec<f64>) {
    let (_, z) = k.support(&scale(ys, -1.0));
    let v = -dot(ys, &sub(&z, yi));
    if v > 0.0 {
        (v, z)
    } else {
        (0.0, yi.to_vec())
    }
}

/// QVI residual at `(x, y)` for `y*`; `y` must lie in `K(x)` within
/// `cfg.grid_eps()`. The maximization over `X × K(x)` separates by block and
/// is evaluated exactly with support points.
pub fn qvi_residual(
    g: &GameInstance,
    x: &[f64],
    y: &[f64],
    y_star: &[f64],
    cfg: &SolverConfig,
) -> Result<QVIPoint> {
    check_dim(g.nvars(), x.len())?;
    check_dim(g.nvars(), y.len())?;
    check_dim(g.nvars(), y_star.len())?;
    let (mut residual, eta) = projection_term(g, x, y);
    let mut z = Vec::with_capacity(y.len());
    for i in 0..g.n_players() {
        let k = g.constraint_set(i, x)?;
        let r = g.block(i);
        if k.distance(&y[r.clone()])? > cfg.grid_eps() {
            return Err(Error::Input(format!(
                "y is not feasible for player {} at x",
                i + 1
            )));
        }
        let (v, zi) = player_term(&k, &y[r.clone()], &y_star[r]);
        residual += v;
        z.extend(zi);
    }
    Ok(QVIPoint {
        x: x.to_vec(),
        y: y.to_vec(),
        y_star: y_star.to_vec(),
        residual,
        witness: Some((eta, z)),
    })
}

/// Minimum QVI residual over the selections offered by `T(y)`, choosing per
/// player (the residual is separable).
fn best_qvi_point(
    g: &GameInstance,
    x: &[f64],
    y: &[f64],
    k_sets: &[ConvexSet],
    t: &TValue,
) -> QVIPoint {
    let (mut residual, eta) = projection_term(g, x, y);
    let mut z = Vec::with_capacity(y.len());
    let mut y_star = Vec::with_capacity(y.len());
    for (i, k) in k_sets.iter().enumerate() {
        let r = g.block(i);
        let yi = &y[r];
        let best = t
            .candidates(i)
            .into_iter()
            .map(|c| {
                let (v, zi) = player_term(k, yi, &c);
                (v, c, zi)
            })
            .fold(None::<(f64, Vec<f64>, Vec<f64>)>, |acc, cur| match acc {
                Some(a) if a.0 <= cur.0 => Some(a),
                _ => Some(cur),
            });
        match best {
            Some((v, c, zi)) => {
                residual += v;
                y_star.extend(c);
                z.extend(zi);
            }
            None => {
                // No normal direction at this point: the QVI has no admissible
                // selection here.
                residual = f64::INFINITY;
                y_star.extend(std::iter::repeat_n(f64::NAN, yi.len()));
                z.extend_from_slice(yi);
            }
        }
    }
    QVIPoint {
        x: x.to_vec(),
        y: y.to_vec(),
        y_star,
        residual,
        witness: Some((eta, z)),
    }
}

/// Candidate pairs sharing one `x`: every `y` on the `K(x)` lattice with
/// `‖Pr_X(y) - x‖ <= eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateBatch {
    pub x: Vec<f64>,
    pub k_sets: Vec<ConvexSet>,
    pub ys: Vec<Vec<f64>>,
}

/// Enumerates candidate batches in lexicographic order of `x`, then `y`.
pub fn for_each_candidate_batch<F>(g: &GameInstance, cfg: &SolverConfig, eps: f64, mut f: F) -> Result<usize>
where
    F: FnMut(&CandidateBatch) -> Result<()>,
{
    let x_cells = g.x_set().grid_size_bound(cfg.h) as u128;
    let (ql, qu) = g.q_bounds();
    let q_cells: u128 = (0..g.n_players())
        .map(|i| {
            let r = g.block(i);
            crate::grid::ProductGrid::lattice(&ql[r.clone()], &qu[r], cfg.h).len() as u128
        })
        .sum();
    if x_cells.saturating_mul(q_cells) > GRID_LIMIT {
        return Err(Error::Input(format!(
            "grid scan would visit {} cells (limit {GRID_LIMIT}); use a coarser h",
            x_cells * q_cells
        )));
    }
    let mut scanned = 0;
    for x in g.x_set().grid(cfg.h) {
        let mut k_sets = Vec::with_capacity(g.n_players());
        let mut per_player: Vec<Vec<Vec<f64>>> = Vec::with_capacity(g.n_players());
        for i in 0..g.n_players() {
            let k = g.constraint_set(i, &x)?;
            let xi = &x[g.block(i)];
            let xs = g.choice_set(i);
            let mut keep = Vec::new();
            for yi in k.grid(cfg.h) {
                if dist(&xs.project(&yi)?, xi) <= eps {
                    keep.push(yi);
                }
            }
            per_player.push(keep);
            k_sets.push(k);
        }
        let mut ys: Vec<Vec<f64>> = vec![Vec::new()];
        for opts in &per_player {
            let mut next = Vec::with_capacity(ys.len() * opts.len());
            for prefix in &ys {
                for o in opts {
                    let mut v = prefix.clone();
                    v.extend_from_slice(o);
                    next.push(v);
                }
            }
            ys = next;
        }
        let mut filtered = Vec::with_capacity(ys.len());
        for y in ys {
            if dist(&g.x_set().project(&y)?, &x) <= eps {
                filtered.push(y);
            }
        }
        scanned += filtered.len();
        if !filtered.is_empty() {
            f(&CandidateBatch {
                x,
                k_sets,
                ys: filtered,
            })?;
        }
    }
    Ok(scanned)
}

fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|t| t.to_bits()).collect()
}

/// Per-pair outcome of the joint scan used to compare the two solution
/// notions.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRecord {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub qvi: QVIPoint,
    pub certificate: Certificate,
}

/// Evaluates both the QVI residual and the projected-solution certificate
/// on every candidate pair, at tolerance `cfg.grid_eps()`.
pub fn scan_pairs(g: &GameInstance, cfg: &SolverConfig) -> Result<Vec<PairRecord>> {
    cfg.validate()?;
    let certify = grid_cfg(cfg);
    let nop = NormalOperator::new(g, cfg)?;
    let mut cache: HashMap<Vec<u64>, TValue> = HashMap::new();
    let mut out = Vec::new();
    for_each_candidate_batch(g, cfg, cfg.grid_eps(), |b| {
        for y in &b.ys {
            let key = bits(y);
            if !cache.contains_key(&key) {
                cache.insert(key.clone(), nop.t_map(y)?);
            }
            let qvi = best_qvi_point(g, &b.x, y, &b.k_sets, &cache[&key]);
            let certificate = g.check_projected_solution(&b.x, y, &certify)?;
            out.push(PairRecord {
                x: b.x.clone(),
                y: y.clone(),
                qvi,
                certificate,
            });
        }
        Ok(())
    })?;
    Ok(out)
}

/// Grid scan for QVI solutions: pairs with minimal residual at most
/// `cfg.grid_eps()` over the selections of `T(y)`, then certified.
pub fn solve_qvi(g: &GameInstance, cfg: &SolverConfig) -> Result<SolveOutcome> {
    Ok(solve_qvi_points(g, cfg)?.0)
}

/// As [`solve_qvi`], also returning every pair whose residual passed.
pub fn solve_qvi_points(g: &GameInstance, cfg: &SolverConfig) -> Result<(SolveOutcome, Vec<QVIPoint>)> {
    cfg.validate()?;
    let eps = cfg.grid_eps();
    let certify = grid_cfg(cfg);
    let nop = NormalOperator::new(g, cfg)?;
    let mut cache: HashMap<Vec<u64>, TValue> = HashMap::new();
    let mut points = Vec::new();
    let mut passed = Vec::new();
    let scanned = for_each_candidate_batch(g, cfg, eps, |b| {
        for y in &b.ys {
            let key = bits(y);
            if !cache.contains_key(&key) {
                cache.insert(key.clone(), nop.t_map(y)?);
            }
            let q = best_qvi_point(g, &b.x, y, &b.k_sets, &cache[&key]);
            if q.residual <= eps {
                let cert = g.check_projected_solution(&b.x, y, &certify)?;
                if cert.passed() {
                    passed.push(cert);
                }
                points.push(q);
            }
        }
        Ok(())
    })?;
    let clusters = cluster(passed, 2.0 * cfg.h);
    Ok((
        SolveOutcome {
            clusters,
            runs: Vec::new(),
            scanned,
            advisory: None,
        },
        points,
    ))
}

/// Certifies every candidate pair at tolerance `2h` (or `cfg.eps`) and
/// clusters the passing ones.
pub fn brute_force_oracle(g: &GameInstance, cfg: &SolverConfig) -> Result<SolveOutcome> {
    cfg.validate()?;
    let certify = grid_cfg(cfg);
    let mut passed = Vec::new();
    let scanned = for_each_candidate_batch(g, cfg, cfg.grid_eps(), |b| {
        // Witness probes depend only on x; reuse them across the batch.
        let probes: Vec<Option<Vec<Vec<f64>>>> = (0..g.n_players())
            .map(|i| match g.preference(i).kind() {
                PreferenceKind::Sampled(_) => None,
                _ => Some(g.witness_probes(i, &b.k_sets[i], cfg)),
            })
            .collect();
        for y in &b.ys {
            let mut clean = true;
            for (i, pr) in probes.iter().enumerate() {
                let hit = match pr {
                    Some(pts) => first_witness(&g.preference(i).at(y)?, pts, cfg.strictness)?.is_some(),
                    None => g.find_witness(i, &b.k_sets[i], y, cfg)?.is_some(),
                };
                if hit {
                    clean = false;
                    break;
                }
            }
            if clean {
                let cert = g.check_projected_solution(&b.x, y, &certify)?;
                if cert.passed() {
                    passed.push(cert);
                }
            }
        }
        Ok(())
    })?;
    Ok(SolveOutcome {
        clusters: cluster(passed, 2.0 * cfg.h),
        runs: Vec::new(),
        scanned,
        advisory: None,
    })
}

/// Single-linkage clustering on `x̃` with linkage radius `radius`. Clusters
/// are ordered by their representative's `x̃`.
pub fn cluster(certs: Vec<Certificate>, radius: f64) -> Vec<Cluster> {
    let n = certs.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut a: usize) -> usize {
        while p[a] != a {
            p[a] = p[p[a]];
            a = p[a];
        }
        a
    }
    // Bucket by cells of side `radius` so only neighbouring cells are compared.
    let cell = |x: &[f64]| -> Vec<i64> { x.iter().map(|v| (v / radius).floor() as i64).collect() };
    let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (k, c) in certs.iter().enumerate() {
        buckets.entry(cell(&c.x_tilde)).or_default().push(k);
    }
    for (k, c) in certs.iter().enumerate() {
        let base = cell(&c.x_tilde);
        let d = base.len();
        let mut off = vec![-1i64; d];
        loop {
            let key: Vec<i64> = base.iter().zip(&off).map(|(a, b)| a + b).collect();
            if let Some(list) = buckets.get(&key) {
                for &j in list {
                    if j > k && dist(&c.x_tilde, &certs[j].x_tilde) <= radius * (1.0 + 1e-9) {
                        let (a, b) = (find(&mut parent, k), find(&mut parent, j));
                        if a != b {
                            parent[a.max(b)] = a.min(b);
                        }
                    }
                }
            }
            let mut t = 0;
            while t < d && off[t] == 1 {
                off[t] = -1;
                t += 1;
            }
            if t == d {
                break;
            }
            off[t] += 1;
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for k in 0..n {
        let r = find(&mut parent, k);
        groups.entry(r).or_default().push(k);
    }
    let mut out: Vec<Cluster> = groups
        .into_values()
        .map(|members| {
            let rep = *members
                .iter()
                .min_by(|&&a, &&b| {
                    certs[a]
                        .score()
                        .total_cmp(&certs[b].score())
                        .then_with(|| lex_cmp(&certs[a].x_tilde, &certs[b].x_tilde))
                        .then_with(|| lex_cmp(&certs[a].y_tilde, &certs[b].y_tilde))
                })
                .expect("nonempty group");
            let bound = |sel: fn(&Certificate) -> &Vec<f64>, f: fn(f64, f64) -> f64| -> Vec<f64> {
                let first = sel(&certs[members[0]]).clone();
                members.iter().fold(first, |acc, &m| {
                    acc.iter().zip(sel(&certs[m])).map(|(a, b)| f(*a, *b)).collect()
                })
            };
            Cluster {
                x_lower: bound(|c| &c.x_tilde, f64::min),
                x_upper: bound(|c| &c.x_tilde, f64::max),
                y_lower: bound(|c| &c.y_tilde, f64::min),
                y_upper: bound(|c| &c.y_tilde, f64::max),
                members: members.len(),
                representative: certs[rep].clone(),
            }
        })
        .collect();
    out.sort_by(|a, b| lex_cmp(&a.representative.x_tilde, &b.representative.x_tilde));
    out
}
