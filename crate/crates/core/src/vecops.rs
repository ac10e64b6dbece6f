//! Dense helpers on `f64` slices. Dimensions here are tiny (usually 1 to 4),
//! so plain slices beat pulling a matrix type through every signature.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[inline]
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[inline]
pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Chebyshev distance, used for "within one grid cell" comparisons.
#[inline]
pub fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `a + s * b`
#[inline]
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    if n > 0.0 && n.is_finite() {
        Some(scale(a, 1.0 / n))
    } else {
        None
    }
}

pub fn centroid(points: &[Vec<f64>]) -> Option<Vec<f64>> {
    let first = points.first()?;
    let mut c = vec![0.0; first.len()];
    for p in points {
        for (ci, pi) in c.iter_mut().zip(p) {
            *ci += pi;
        }
    }
    let k = points.len() as f64;
    Some(c.into_iter().map(|v| v / k).collect())
}

/// Lexicographic comparison with `total_cmp`, giving a deterministic order on
/// candidate points.
pub fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Solves the square system `m x = rhs` (row-major `m`). Returns `None` when
/// the matrix is numerically singular.
pub fn solve(m: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let k = rhs.len();
    if k == 0 {
        return Some(Vec::new());
    }
    let mat = nalgebra::DMatrix::from_fn(k, k, |r, c| m[r][c]);
    let scale = mat.amax().max(1.0);
    let lu = mat.lu();
    let u = lu.u();
    let min_pivot = (0..k).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    if min_pivot <= 1e-12 * scale {
        return None;
    }
    lu.solve(&nalgebra::DVector::from_column_slice(rhs))
        .map(|v| v.iter().copied().collect())
}

/// Projection of `p` onto the affine set `{w : a_j . w = b_j}`. `None` when
/// the normals are linearly dependent.
pub fn project_affine(p: &[f64], normals: &[&[f64]], offsets: &[f64]) -> Option<Vec<f64>> {
    let k = normals.len();
    let gram: Vec<Vec<f64>> = (0..k)
        .map(|r| (0..k).map(|c| dot(normals[r], normals[c])).collect())
        .collect();
    let rhs: Vec<f64> = (0..k).map(|r| dot(normals[r], p) - offsets[r]).collect();
    let lambda = solve(&gram, &rhs)?;
    let mut q = p.to_vec();
    for (a, l) in normals.iter().zip(&lambda) {
        for (qi, ai) in q.iter_mut().zip(a.iter()) {
            *qi -= l * ai;
        }
    }
    Some(q)
}

/// All `k`-element index subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_projection_onto_line() {
        let q = project_affine(&[1.0, 1.0], &[&[1.0, 1.0]], &[0.0]).unwrap();
        assert!(dist(&q, &[0.0, 0.0]) < 1e-15);
    }

    #[test]
    fn dependent_normals_rejected() {
        assert!(project_affine(&[0.0, 0.0], &[&[1.0, 0.0], &[2.0, 0.0]], &[1.0, 2.0]).is_none());
    }

    #[test]
    fn subsets_count() {
        assert_eq!(subsets(5, 2).len(), 10);
        assert_eq!(subsets(3, 0), vec![Vec::<usize>::new()]);
        assert!(subsets(2, 3).is_empty());
    }
}
