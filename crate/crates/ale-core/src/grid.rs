//! Radial sample grids. Geometric (log-uniform) spacing is the default so
//! that decay fits and weighted norms resolve several decades of radius.

use crate::error::{AleError, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Spacing {
    /// Constant ratio between consecutive nodes.
    Geometric,
    /// Anything else (e.g. a pulled-back grid); stencils stay valid, the
    /// descriptor only records provenance.
    General,
}

/// Strictly increasing radii `r_0 < … < r_M` with an inner cap radius
/// (0 for a cone tip, positive for a bolt).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialGrid {
    pub nodes: Vec<f64>,
    pub spacing: Spacing,
    pub cap_radius: f64,
}

impl RadialGrid {
    /// Geometric grid with `n` nodes on `[r0, rmax]`.
    pub fn geometric(r0: f64, rmax: f64, n: usize) -> Result<Self> {
        if !(r0 > 0.0 && rmax > r0) {
            return Err(AleError::InvalidGrid(format!(
                "need 0 < r0 < rmax, got [{r0}, {rmax}]"
            )));
        }
        if n < 64 {
            return Err(AleError::InvalidGrid(format!(
                "need at least 64 nodes, got {n}"
            )));
        }
        if rmax / r0 < 100.0 {
            return Err(AleError::InvalidGrid(format!(
                "need rmax/r0 >= 100 for asymptotic extraction, got {}",
                rmax / r0
            )));
        }
        let q = (rmax / r0).powf(1.0 / (n - 1) as f64);
        let nodes = (0..n).map(|i| r0 * q.powi(i as i32)).collect();
        Ok(RadialGrid {
            nodes,
            spacing: Spacing::Geometric,
            cap_radius: 0.0,
        })
    }

    pub fn with_cap(mut self, cap: f64) -> Self {
        self.cap_radius = cap;
        self
    }

    pub fn from_nodes(nodes: Vec<f64>, cap_radius: f64) -> Result<Self> {
        if nodes.len() < 64 {
            return Err(AleError::InvalidGrid("need at least 64 nodes".into()));
        }
        if !nodes.windows(2).all(|w| w[1] > w[0]) {
            return Err(AleError::InvalidGrid("nodes must strictly increase".into()));
        }
        Ok(RadialGrid {
            nodes,
            spacing: Spacing::General,
            cap_radius,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r0(&self) -> f64 {
        self.nodes[0]
    }

    pub fn rmax(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Remove every other node (keeping both endpoints when the count is
    /// odd); used for Richardson checks under one grid refinement.
    pub fn coarsen(&self) -> RadialGrid {
        let nodes: Vec<f64> = self.nodes.iter().copied().step_by(2).collect();
        RadialGrid {
            nodes,
            spacing: self.spacing,
            cap_radius: self.cap_radius,
        }
    }

    /// Indices of the outer fraction of the grid in log radius.
    pub fn outer_indices(&self, fraction: f64) -> std::ops::Range<usize> {
        let lo = self.r0().ln();
        let hi = self.rmax().ln();
        let cut = hi - fraction * (hi - lo);
        let start = self.nodes.partition_point(|r| r.ln() < cut);
        start.min(self.len() - 2)..self.len()
    }

    /// Uniform scaling of every node (and the cap) by `c > 0`.
    pub fn scaled(&self, c: f64) -> RadialGrid {
        RadialGrid {
            nodes: self.nodes.iter().map(|r| c * r).collect(),
            spacing: self.spacing,
            cap_radius: c * self.cap_radius,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_grid_has_constant_ratio() {
        let g = RadialGrid::geometric(1.0, 1e4, 257).unwrap();
        let q0 = g.nodes[1] / g.nodes[0];
        for w in g.nodes.windows(2) {
            assert!(((w[1] / w[0]) / q0 - 1.0).abs() < 1e-12);
        }
        assert_eq!(g.len(), 257);
        assert!((g.rmax() - 1e4).abs() < 1e-9);
    }

    #[test]
    fn rejects_inadequate_grids() {
        assert!(RadialGrid::geometric(1.0, 50.0, 128).is_err());
        assert!(RadialGrid::geometric(1.0, 1e3, 32).is_err());
    }

    #[test]
    fn coarsen_keeps_endpoints_for_odd_counts() {
        let g = RadialGrid::geometric(1.0, 1e3, 129).unwrap();
        let c = g.coarsen();
        assert_eq!(c.len(), 65);
        assert_eq!(c.r0(), g.r0());
        assert_eq!(c.rmax(), g.rmax());
    }
}
