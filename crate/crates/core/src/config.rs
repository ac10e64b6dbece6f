//! Solver and certificate settings shared by every entry point.

use crate::error::{Error, Result};

/// Residual tolerance used for analytic candidates when none is given.
pub const ANALYTIC_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Grid resolution for scans and emptiness checks.
    pub h: f64,
    /// Residual tolerance. `None` means `2h` for grid-derived candidates and
    /// [`ANALYTIC_EPS`] for user-supplied ones.
    pub eps: Option<f64>,
    pub max_iter: usize,
    /// Damping of the fixed-point update, in `(0, 1]`.
    pub lambda: f64,
    pub multistart: usize,
    /// Seeded random probes added to every grid scan.
    pub random_budget: usize,
    pub seed: u64,
    /// A point counts as a preference witness only if its excess exceeds
    /// this; absorbs rounding in the utility difference.
    pub strictness: f64,
    /// Lattice spacing for graph distances; `None` means `h`.
    pub h_g: Option<f64>,
    /// Margin by which the search domain is inflated for graph distances.
    pub rho: f64,
    /// Points per angle in sphere scans.
    pub angular_resolution: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            h: 0.01,
            eps: None,
            max_iter: 500,
            lambda: 1.0,
            multistart: 8,
            random_budget: 512,
            seed: 0,
            strictness: 1e-12,
            h_g: None,
            rho: 1.0,
            angular_resolution: 6284,
        }
    }
}

impl SolverConfig {
    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = Some(eps);
        self
    }

    pub fn grid_eps(&self) -> f64 {
        self.eps.unwrap_or(2.0 * self.h)
    }

    pub fn analytic_eps(&self) -> f64 {
        self.eps.unwrap_or(ANALYTIC_EPS)
    }

    pub fn graph_spacing(&self) -> f64 {
        self.h_g.unwrap_or(self.h)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Input(m));
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad(format!("h must be positive, got {}", self.h));
        }
        if let Some(e) = self.eps {
            if !(e > 0.0) {
                return bad(format!("eps must be positive, got {e}"));
            }
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return bad(format!("lambda must lie in (0, 1], got {}", self.lambda));
        }
        if let Some(g) = self.h_g {
            if !(g > 0.0) {
                return bad(format!("h_g must be positive, got {g}"));
            }
        }
        if !(self.strictness >= 0.0) {
            return bad(format!("strictness must be nonnegative, got {}", self.strictness));
        }
        if !(self.rho >= 0.0) {
            return bad(format!("rho must be nonnegative, got {}", self.rho));
        }
        if self.multistart == 0 {
            return bad("multistart must be at least 1".into());
        }
        if self.angular_resolution == 0 {
            return bad("angular resolution must be at least 1".into());
        }
        Ok(())
    }
}
