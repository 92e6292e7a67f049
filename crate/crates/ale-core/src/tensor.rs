//! Radially symmetric symmetric 2-tensors in component form.
//!
//! Components are stored relative to the flat-cone reference frame: a tensor
//! is `rr(r)·dr² + ss(r)·r²·g_S` with `g_S` the unit link metric, i.e. `rr`
//! and `ss` are the orthonormal-frame components against the flat cone. The
//! conformal mode `φ·g_e` has `rr = ss = φ`; the spec's diagonal mode
//! `u₁ dr² + u₂ b² g_S` has `rr = u₁`, `ss = u₂ b²/r²`.

use crate::calculus::{deriv1, integrate};
use crate::error::{AleError, Result};
use crate::grid::RadialGrid;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TensorMode {
    /// `h = φ(r) · g`
    Conformal,
    /// `h = u₁(r) dr² + u₂(r) b² g_S`
    Diagonal,
    /// Scalar-derived tensor built from the link eigenfunction of index `j`;
    /// carried for bookkeeping, grid operators reject it.
    LinkMode(usize),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialTwoTensor {
    pub mode: TensorMode,
    pub rr: Vec<f64>,
    pub ss: Vec<f64>,
    pub decay_order: f64,
}

impl RadialTwoTensor {
    pub fn conformal(phi: &[f64], decay_order: f64) -> Self {
        RadialTwoTensor {
            mode: TensorMode::Conformal,
            rr: phi.to_vec(),
            ss: phi.to_vec(),
            decay_order,
        }
    }

    pub fn diagonal(rr: Vec<f64>, ss: Vec<f64>, decay_order: f64) -> Self {
        assert_eq!(rr.len(), ss.len());
        RadialTwoTensor {
            mode: TensorMode::Diagonal,
            rr,
            ss,
            decay_order,
        }
    }

    pub fn zero(n: usize) -> Self {
        RadialTwoTensor::diagonal(vec![0.0; n], vec![0.0; n], f64::INFINITY)
    }

    pub fn len(&self) -> usize {
        self.rr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rr.is_empty()
    }

    pub fn is_link_mode(&self) -> bool {
        matches!(self.mode, TensorMode::LinkMode(_))
    }

    pub fn require_radial(&self, what: &str) -> Result<()> {
        if self.is_link_mode() {
            Err(AleError::UnsupportedMode(format!(
                "{what} is defined for conformal/diagonal radial modes only"
            )))
        } else {
            Ok(())
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        RadialTwoTensor {
            mode: self.mode,
            rr: self.rr.iter().map(|v| c * v).collect(),
            ss: self.ss.iter().map(|v| c * v).collect(),
            decay_order: self.decay_order,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len());
        RadialTwoTensor {
            mode: if self.mode == other.mode {
                self.mode
            } else {
                TensorMode::Diagonal
            },
            rr: self.rr.iter().zip(&other.rr).map(|(a, b)| a + b).collect(),
            ss: self.ss.iter().zip(&other.ss).map(|(a, b)| a + b).collect(),
            decay_order: self.decay_order.min(other.decay_order),
        }
    }

    /// Lie derivative of the flat cone metric along `X = ψ(r) ∂_r`.
    pub fn lie_flat(grid: &RadialGrid, psi: &[f64], decay_order: f64) -> Self {
        let dpsi = deriv1(&grid.nodes, psi);
        let rr: Vec<f64> = dpsi.iter().map(|d| 2.0 * d).collect();
        let ss: Vec<f64> = grid
            .nodes
            .iter()
            .zip(psi)
            .map(|(r, p)| 2.0 * p / r)
            .collect();
        RadialTwoTensor::diagonal(rr, ss, decay_order)
    }

    /// Divergence-free diagonal tensor on the flat cone with prescribed
    /// sphere component: `rr` is recovered from
    /// `(r^{n-1} rr)' = (n-1) r^{n-2} ss`.
    pub fn divergence_free_flat(grid: &RadialGrid, n: usize, ss: &[f64], decay_order: f64) -> Self {
        let r = &grid.nodes;
        let m = r.len();
        let nf = n as f64;
        // cumulative integral of (n-1) s^{n-2} ss from r_0
        let integrand: Vec<f64> = r
            .iter()
            .zip(ss)
            .map(|(s, q)| (nf - 1.0) * s.powi(n as i32 - 2) * q)
            .collect();
        let cum = crate::calculus::cumulative_integral(r, &integrand);
        let rr: Vec<f64> = (0..m)
            .map(|i| cum[i] / r[i].powi(n as i32 - 1))
            .collect();
        RadialTwoTensor::diagonal(rr, ss.to_vec(), decay_order)
    }

    /// Pointwise norm against the flat cone metric.
    pub fn flat_norm_pointwise(&self, n: usize) -> Vec<f64> {
        let m = (n - 1) as f64;
        self.rr
            .iter()
            .zip(&self.ss)
            .map(|(p, q)| (p * p + m * q * q).sqrt())
            .collect()
    }

    /// Flat L² inner product `∫ <h, k> dμ_e` with the given link volume.
    pub fn flat_l2_inner(&self, other: &Self, grid: &RadialGrid, n: usize, link_volume: f64) -> f64 {
        let m = (n - 1) as f64;
        let integrand: Vec<f64> = (0..self.len())
            .map(|i| {
                (self.rr[i] * other.rr[i] + m * self.ss[i] * other.ss[i])
                    * grid.nodes[i].powi(n as i32 - 1)
            })
            .collect();
        link_volume * integrate(&grid.nodes, &integrand)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::deriv1;

    #[test]
    fn divergence_free_construction_annihilates_divergence() {
        let grid = RadialGrid::geometric(1.0, 1e3, 2049).unwrap();
        let n = 4;
        let ss: Vec<f64> = grid.nodes.iter().map(|r| r.powf(-2.5)).collect();
        let h = RadialTwoTensor::divergence_free_flat(&grid, n, &ss, 2.5);
        // (div h)_r = rr' + (n-1)(rr - ss)/r on the flat cone
        let drr = deriv1(&grid.nodes, &h.rr);
        let mut max_rel = 0.0f64;
        for i in 2..grid.len() - 2 {
            let div = drr[i] + 3.0 * (h.rr[i] - h.ss[i]) / grid.nodes[i];
            let scale = (h.rr[i].abs() + h.ss[i].abs()) / grid.nodes[i];
            max_rel = max_rel.max(div.abs() / scale.max(1e-300));
        }
        assert!(max_rel < 1e-4, "relative divergence {max_rel}");
    }

    #[test]
    fn link_modes_are_rejected_by_grid_operators() {
        let t = RadialTwoTensor {
            mode: TensorMode::LinkMode(2),
            rr: vec![0.0; 8],
            ss: vec![0.0; 8],
            decay_order: 1.0,
        };
        assert!(t.require_radial("test op").is_err());
    }
}
