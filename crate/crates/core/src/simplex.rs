//! Phase-one simplex for small feasibility problems `A λ = b, λ ≥ 0`.
//!
//! Used for convex-hull membership (with a sum-to-one row) and cone
//! membership. Rows are at most `dim + 1 ≤ 5`, columns can run into the
//! thousands; Bland's rule keeps the pivoting finite.

use crate::vecops::dot;

const PIVOT_EPS: f64 = 1e-12;

/// Returns a nonnegative `λ` with `A λ = b` (residual within `tol`), if one
/// exists. `columns[j]` is the j-th column of `A`.
pub fn feasible_combination(columns: &[Vec<f64>], b: &[f64], tol: f64) -> Option<Vec<f64>> {
    let m = b.len();
    let n = columns.len();
    if m == 0 {
        return Some(vec![0.0; n]);
    }
    if n == 0 {
        return if b.iter().all(|v| v.abs() <= tol) {
            Some(Vec::new())
        } else {
            None
        };
    }
    let width = n + m + 1;
    let rhs = width - 1;
    let mut t = vec![vec![0.0; width]; m];
    for r in 0..m {
        let sign = if b[r] < 0.0 { -1.0 } else { 1.0 };
        for (j, col) in columns.iter().enumerate() {
            t[r][j] = sign * col[r];
        }
        t[r][n + r] = 1.0;
        t[r][rhs] = sign * b[r];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut obj = vec![0.0; width];
    for j in (0..n).chain(std::iter::once(rhs)) {
        obj[j] = -(0..m).map(|r| t[r][j]).sum::<f64>();
    }

    let max_pivots = 50 * (n + m);
    for _ in 0..max_pivots {
        let Some(enter) = (0..n + m).find(|&j| obj[j] < -PIVOT_EPS) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for r in 0..m {
            if t[r][enter] > PIVOT_EPS {
                let ratio = t[r][rhs] / t[r][enter];
                let better = match leave {
                    None => true,
                    Some(l) => {
                        ratio < best - 1e-15 || (ratio <= best + 1e-15 && basis[r] < basis[l])
                    }
                };
                if better {
                    best = ratio;
                    leave = Some(r);
                }
            }
        }
        let Some(l) = leave else {
            // Unbounded direction cannot occur in phase one; bail out safely.
            break;
        };
        pivot(&mut t, &mut obj, l, enter);
        basis[l] = enter;
    }

    let mut lambda = vec![0.0; n];
    for (r, &bv) in basis.iter().enumerate() {
        if bv < n {
            lambda[bv] = t[r][rhs].max(0.0);
        }
    }
    let residual: f64 = (0..m)
        .map(|r| {
            let row: Vec<f64> = columns.iter().map(|c| c[r]).collect();
            (dot(&row, &lambda) - b[r]).abs()
        })
        .fold(0.0, f64::max);
    (residual <= tol).then_some(lambda)
}

fn pivot(t: &mut [Vec<f64>], obj: &mut [f64], row: usize, col: usize) {
    let p = t[row][col];
    for v in t[row].iter_mut() {
        *v /= p;
    }
    let pivot_row = t[row].clone();
    for (r, tr) in t.iter_mut().enumerate() {
        if r != row {
            let f = tr[col];
            if f != 0.0 {
                for (v, pv) in tr.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    let f = obj[col];
    if f != 0.0 {
        for (v, pv) in obj.iter_mut().zip(&pivot_row) {
            *v -= f * pv;
        }
    }
}

/// `z ∈ co(points)` within `tol`.
pub fn in_convex_hull(points: &[Vec<f64>], z: &[f64], tol: f64) -> bool {
    convex_weights(points, z, tol).is_some()
}

/// Convex weights expressing `z` as a combination of `points`.
pub fn convex_weights(points: &[Vec<f64>], z: &[f64], tol: f64) -> Option<Vec<f64>> {
    if points.is_empty() {
        return None;
    }
    let columns: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            let mut c = p.clone();
            c.push(1.0);
            c
        })
        .collect();
    let mut b = z.to_vec();
    b.push(1.0);
    feasible_combination(&columns, &b, tol)
}

/// `v` lies in the cone generated by `generators`.
pub fn in_cone(generators: &[Vec<f64>], v: &[f64], tol: f64) -> bool {
    feasible_combination(generators, v, tol).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Vec<f64>> {
        vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
        ]
    }

    #[test]
    fn hull_membership_square() {
        let pts = square();
        assert!(in_convex_hull(&pts, &[0.5, 0.5], 1e-9));
        assert!(in_convex_hull(&pts, &[1.0, 0.0], 1e-9));
        assert!(in_convex_hull(&pts, &[0.3, 1.0], 1e-9));
        assert!(!in_convex_hull(&pts, &[1.2, 0.5], 1e-9));
        assert!(!in_convex_hull(&pts, &[-1e-6, 0.5], 1e-9));
    }

    #[test]
    fn weights_reconstruct_point() {
        let pts = square();
        let w = convex_weights(&pts, &[0.25, 0.75], 1e-9).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let x: f64 = pts.iter().zip(&w).map(|(p, l)| p[0] * l).sum();
        assert!((x - 0.25).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_hull() {
        let pts = vec![vec![0.0], vec![1.0]];
        assert!(in_convex_hull(&pts, &[0.5], 1e-12));
        assert!(!in_convex_hull(&pts, &[1.5], 1e-12));
    }

    #[test]
    fn cone_membership() {
        let gens = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(in_cone(&gens, &[2.0, 3.0], 1e-9));
        assert!(!in_cone(&gens, &[-1.0, 3.0], 1e-9));
    }

    #[test]
    fn degenerate_hull_of_collinear_points() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]];
        assert!(in_convex_hull(&pts, &[1.5, 1.5], 1e-9));
        assert!(!in_convex_hull(&pts, &[1.5, 1.4], 1e-9));
    }
}
