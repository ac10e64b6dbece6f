//! Lattice-aligned grids.
//!
//! Every grid at resolution `h` uses the global lattice `{k h}` clipped to the
//! interval, plus both interval endpoints. Halving `h` therefore always
//! produces a superset of the coarser grid, and grids over different sets
//! share coordinates.

/// Value of the `k`-th lattice point. When `1/h` is an integer the value is
/// computed as `k / (1/h)`, which is the correctly rounded rational `k h`.
#[inline]
pub fn lattice_value(k: i64, h: f64) -> f64 {
    let inv = 1.0 / h;
    let r = inv.round();
    if r >= 1.0 && (inv - r).abs() <= 1e-9 * inv {
        k as f64 / r
    } else {
        k as f64 * h
    }
}

/// Grid points of `[lower, upper]` at resolution `h`, ascending.
pub fn axis(lower: f64, upper: f64, h: f64) -> Vec<f64> {
    debug_assert!(h > 0.0);
    if upper <= lower {
        return vec![lower];
    }
    let tol = 1e-9 * h;
    let kmin = ((lower - tol) / h).ceil() as i64;
    let kmax = ((upper + tol) / h).floor() as i64;
    let mut out = Vec::with_capacity((kmax - kmin + 3).max(2) as usize);
    out.push(lower);
    for k in kmin..=kmax {
        let v = lattice_value(k, h);
        if v > lower + tol && v < upper - tol {
            out.push(v);
        }
    }
    out.push(upper);
    out
}

/// `m` evenly spaced points across `[lower, upper]` including both ends.
pub fn uniform_axis(lower: f64, upper: f64, m: usize) -> Vec<f64> {
    match m {
        0 => Vec::new(),
        1 => vec![0.5 * (lower + upper)],
        _ => (0..m)
            .map(|k| {
                if k + 1 == m {
                    upper
                } else {
                    lower + (upper - lower) * k as f64 / (m - 1) as f64
                }
            })
            .collect(),
    }
}

/// Cartesian product of per-axis coordinates in lexicographic order (first
/// axis varies slowest).
#[derive(Debug, Clone)]
pub struct ProductGrid {
    axes: Vec<Vec<f64>>,
}

impl ProductGrid {
    pub fn new(axes: Vec<Vec<f64>>) -> Self {
        Self { axes }
    }

    /// Lattice grid of the box `[lower, upper]`.
    pub fn lattice(lower: &[f64], upper: &[f64], h: f64) -> Self {
        Self::new(
            lower
                .iter()
                .zip(upper)
                .map(|(&l, &u)| axis(l, u, h))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        if self.axes.is_empty() {
            return 0;
        }
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn iter(&self) -> ProductIter<'_> {
        ProductIter {
            axes: &self.axes,
            idx: vec![0; self.axes.len()],
            done: self.is_empty(),
        }
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        self.iter().collect()
    }
}

pub struct ProductIter<'a> {
    axes: &'a [Vec<f64>],
    idx: Vec<usize>,
    done: bool,
}

impl Iterator for ProductIter<'_> {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        if self.done {
            return None;
        }
        let p = self
            .idx
            .iter()
            .zip(self.axes)
            .map(|(&i, a)| a[i])
            .collect();
        let mut d = self.axes.len();
        loop {
            if d == 0 {
                self.done = true;
                break;
            }
            d -= 1;
            self.idx[d] += 1;
            if self.idx[d] < self.axes[d].len() {
                break;
            }
            self.idx[d] = 0;
        }
        Some(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_interval_has_101_points() {
        let a = axis(0.0, 1.0, 0.01);
        assert_eq!(a.len(), 101);
        assert_eq!(a[50], 0.5);
        assert_eq!(a[100], 1.0);
    }

    #[test]
    fn off_lattice_endpoints_are_kept() {
        let a = axis(0.185, 1.185, 0.01);
        assert_eq!(a.first(), Some(&0.185));
        assert_eq!(a.last(), Some(&1.185));
        assert_eq!(a[1], 0.19);
        assert_eq!(a.len(), 102);
    }

    #[test]
    fn halving_nests() {
        for (l, u) in [(0.0, 1.0), (0.13, 0.91), (-0.37, 2.0)] {
            let coarse = axis(l, u, 0.05);
            let fine = axis(l, u, 0.025);
            for c in &coarse {
                assert!(fine.contains(c), "{c} missing for [{l},{u}]");
            }
        }
    }

    #[test]
    fn degenerate_interval() {
        assert_eq!(axis(0.3, 0.3, 0.1), vec![0.3]);
    }

    #[test]
    fn product_order_is_lexicographic() {
        let g = ProductGrid::new(vec![vec![0.0, 1.0], vec![5.0, 6.0]]);
        let pts = g.points();
        assert_eq!(
            pts,
            vec![
                vec![0.0, 5.0],
                vec![0.0, 6.0],
                vec![1.0, 5.0],
                vec![1.0, 6.0]
            ]
        );
        assert_eq!(g.len(), 4);
    }
}
