//! Cross-section data for cones `R^n / Γ`: dimension, quotient order, link
//! volume and the Hodge-Laplacian spectra used by the indicial calculus.
//!
//! Spectra are supplied analytically. On the round sphere the scalar
//! eigenvalues are `j(j+n-2)` and the coclosed one-form eigenvalues are
//! `j(j+n-2) + (n-3)`. A nontrivial free quotient admits no invariant linear
//! functions or constant vector fields, so the `j = 1` modes are deleted.

use crate::error::{AleError, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkGeometry {
    /// Ambient dimension `n >= 3`.
    pub n: usize,
    /// Order of the quotient group.
    pub gamma_order: usize,
    /// `Vol(S^{n-1}) / |Γ|`.
    pub link_volume: f64,
    /// `(j, λ_j)` of the Hodge Laplacian on functions, increasing in `λ`.
    pub scalar_eigenvalues: Vec<(usize, f64)>,
    /// `(j, μ_j)` on coclosed one-forms, increasing in `μ`.
    pub coexact_one_form_eigenvalues: Vec<(usize, f64)>,
}

/// Volume of the round unit sphere `S^{m}`.
pub fn sphere_volume(m: usize) -> f64 {
    // 2 π^{(m+1)/2} / Γ((m+1)/2)
    let k = m + 1;
    let gamma_half = if k % 2 == 0 {
        // Γ(k/2) with k/2 a positive integer
        (1..k / 2).map(|i| i as f64).product::<f64>().max(1.0)
    } else {
        // Γ(j + 1/2) = (2j)! √π / (4^j j!)
        let j = k / 2;
        let mut v = std::f64::consts::PI.sqrt();
        for i in 0..j {
            v *= i as f64 + 0.5;
        }
        v
    };
    2.0 * std::f64::consts::PI.powf(k as f64 / 2.0) / gamma_half
}

impl LinkGeometry {
    /// Round sphere or its free quotient; `j_max` bounds the tabulated
    /// eigenvalue index.
    pub fn sphere_quotient(n: usize, gamma_order: usize, j_max: usize) -> Result<Self> {
        if n < 3 {
            return Err(AleError::InvalidArgument(format!("need n >= 3, got {n}")));
        }
        if gamma_order == 0 {
            return Err(AleError::InvalidArgument("gamma order must be >= 1".into()));
        }
        let nf = n as f64;
        let keep = |j: usize| gamma_order == 1 || j != 1;
        let scalar_eigenvalues = (0..=j_max)
            .filter(|&j| keep(j))
            .map(|j| (j, j as f64 * (j as f64 + nf - 2.0)))
            .collect();
        let coexact_one_form_eigenvalues = (1..=j_max)
            .filter(|&j| keep(j))
            .map(|j| (j, j as f64 * (j as f64 + nf - 2.0) + nf - 3.0))
            .collect();
        Ok(LinkGeometry {
            n,
            gamma_order,
            link_volume: sphere_volume(n - 1) / gamma_order as f64,
            scalar_eigenvalues,
            coexact_one_form_eigenvalues,
        })
    }

    pub fn round_sphere(n: usize) -> Result<Self> {
        Self::sphere_quotient(n, 1, 8)
    }

    pub fn is_quotient(&self) -> bool {
        self.gamma_order > 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_volumes() {
        assert!((sphere_volume(1) - 2.0 * PI).abs() < 1e-12);
        assert!((sphere_volume(2) - 4.0 * PI).abs() < 1e-12);
        assert!((sphere_volume(3) - 2.0 * PI * PI).abs() < 1e-12);
        assert!((sphere_volume(4) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
        assert!((sphere_volume(5) - PI * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn spectra_invariants() {
        let l = LinkGeometry::round_sphere(4).unwrap();
        assert_eq!(l.scalar_eigenvalues[0], (0, 0.0));
        assert!(l
            .scalar_eigenvalues
            .windows(2)
            .all(|w| w[1].1 > w[0].1));
        assert!(l
            .coexact_one_form_eigenvalues
            .windows(2)
            .all(|w| w[1].1 > w[0].1));
        // S^3 coclosed 1-form spectrum: (j+1)^2 for j >= 1
        for &(j, mu) in &l.coexact_one_form_eigenvalues {
            assert!((mu - ((j + 1) * (j + 1)) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn quotient_drops_linear_modes() {
        let l = LinkGeometry::sphere_quotient(4, 2, 5).unwrap();
        assert!((l.link_volume - PI * PI).abs() < 1e-12);
        assert!(l.scalar_eigenvalues.iter().all(|&(j, _)| j != 1));
        assert!(l
            .coexact_one_form_eigenvalues
            .iter()
            .all(|&(j, _)| j != 1));
    }
}
