//! Cohomogeneity-one ALE metric profiles and their pointwise geometry.
//!
//! Two internal representations cover every family:
//!
//! * single-warped, `g = a(r)² dr² + b(r)² g_S` over the unit link
//!   (flat cones, conformal deformations, generic warped profiles);
//! * Berger-warped in dimension four, `g = a² dr² + A₁²(σ₁²+σ₂²) + A₃² σ₃²`
//!   over `S³/Z₂` (the Eguchi–Hanson instanton and its deformations).
//!
//! Profile derivatives are sampled analytically whenever a closed form is
//! available (flat, the conformal mass family, Eguchi–Hanson) and by
//! second-order finite differences otherwise.

use crate::calculus::{deriv1, deriv2, smoothstep5, smoothstep5_d1, smoothstep5_d2};
use crate::error::{AleError, Result};
use crate::grid::RadialGrid;
use crate::link::LinkGeometry;
use crate::tensor::RadialTwoTensor;
use serde::{Deserialize, Serialize};

/// A profile function with its first two radial derivatives.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Samples {
    pub v: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl Samples {
    /// Derivatives by centered second-order finite differences.
    pub fn from_values(grid: &RadialGrid, v: Vec<f64>) -> Self {
        let d1 = deriv1(&grid.nodes, &v);
        let d2 = deriv2(&grid.nodes, &v);
        Samples { v, d1, d2 }
    }

    /// Analytic sampling of `(f, f', f'')`.
    pub fn from_fn(grid: &RadialGrid, f: impl Fn(f64) -> (f64, f64, f64)) -> Self {
        let mut v = Vec::with_capacity(grid.len());
        let mut d1 = Vec::with_capacity(grid.len());
        let mut d2 = Vec::with_capacity(grid.len());
        for &r in &grid.nodes {
            let (a, b, c) = f(r);
            v.push(a);
            d1.push(b);
            d2.push(c);
        }
        Samples { v, d1, d2 }
    }

    pub fn constant(grid: &RadialGrid, c: f64) -> Self {
        let n = grid.len();
        Samples {
            v: vec![c; n],
            d1: vec![0.0; n],
            d2: vec![0.0; n],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Flat,
    Conformal,
    Warped,
    EguchiHanson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Repr {
    Single { a: Samples, b: Samples },
    Berger { a: Samples, a1: Samples, a3: Samples },
}

/// Orthonormal-frame deviation of the metric from its flat cone, per link
/// direction class: `(multiplicity, values, radial derivative)`.
pub struct FrameDeviation {
    pub h00: Vec<f64>,
    pub h00_d1: Vec<f64>,
    pub classes: Vec<(usize, Vec<f64>, Vec<f64>)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricProfile {
    pub family: Family,
    pub link: LinkGeometry,
    pub grid: RadialGrid,
    pub decay_order: f64,
    pub repr: Repr,
    /// Conformal potential `u` with `g = u^{4/(n-2)} g_e`, when applicable.
    pub conformal_u: Option<Samples>,
}

impl MetricProfile {
    pub fn n(&self) -> usize {
        self.link.n
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn is_single(&self) -> bool {
        matches!(self.repr, Repr::Single { .. })
    }

    pub fn single(&self) -> Result<(&Samples, &Samples)> {
        match &self.repr {
            Repr::Single { a, b } => Ok((a, b)),
            Repr::Berger { .. } => Err(AleError::UnsupportedMode(
                "operation needs a single-warped profile".into(),
            )),
        }
    }

    // ---------------------------------------------------------------- zoo

    /// The flat cone `R^n / Γ`.
    pub fn flat(link: LinkGeometry, grid: RadialGrid) -> Self {
        let a = Samples::constant(&grid, 1.0);
        let b = Samples::from_fn(&grid, |r| (r, 1.0, 0.0));
        let u = Samples::constant(&grid, 1.0);
        MetricProfile {
            family: Family::Flat,
            link,
            grid,
            decay_order: f64::INFINITY,
            repr: Repr::Single { a, b },
            conformal_u: Some(u),
        }
    }

    /// Conformal mass family `g = (1 + χ_A m r^{2-n})^{4/(n-2)} g_e` with a
    /// quintic-smoothstep cutoff on `[A, 2A]`. Scalar-flat beyond `2A`.
    pub fn build_conformal_family(
        link: LinkGeometry,
        grid: RadialGrid,
        m: f64,
        cutoff_a: f64,
    ) -> Result<Self> {
        if cutoff_a < 2.0 * grid.r0() {
            return Err(AleError::InvalidArgument(format!(
                "cutoff A = {cutoff_a} must be at least 2 r0 = {}",
                2.0 * grid.r0()
            )));
        }
        if 2.0 * cutoff_a >= grid.rmax() {
            return Err(AleError::InvalidArgument(
                "cutoff region [A, 2A] must lie inside the grid".into(),
            ));
        }
        let n = link.n as f64;
        let u = Samples::from_fn(&grid, |r| {
            let x = (r - cutoff_a) / cutoff_a;
            let chi = smoothstep5(x);
            let dchi = smoothstep5_d1(x) / cutoff_a;
            let ddchi = smoothstep5_d2(x) / (cutoff_a * cutoff_a);
            let p = r.powf(2.0 - n);
            let dp = (2.0 - n) * r.powf(1.0 - n);
            let ddp = (2.0 - n) * (1.0 - n) * r.powf(-n);
            (
                1.0 + m * chi * p,
                m * (dchi * p + chi * dp),
                m * (ddchi * p + 2.0 * dchi * dp + chi * ddp),
            )
        });
        if u.v.iter().any(|&x| x <= 0.0) {
            return Err(AleError::NonMetricProfile(format!(
                "conformal factor vanishes (m = {m} too negative)"
            )));
        }
        Self::from_conformal_samples(link, grid, u, n - 2.0)
    }

    /// Conformal profile from a sampled potential `u > 0`.
    pub fn conformal_from_values(
        link: LinkGeometry,
        grid: RadialGrid,
        u: Vec<f64>,
        decay_order: f64,
    ) -> Result<Self> {
        let u = Samples::from_values(&grid, u);
        Self::from_conformal_samples(link, grid, u, decay_order)
    }

    pub fn from_conformal_samples(
        link: LinkGeometry,
        grid: RadialGrid,
        u: Samples,
        decay_order: f64,
    ) -> Result<Self> {
        if u.v.iter().any(|&x| x <= 0.0) {
            return Err(AleError::NonMetricProfile("conformal factor must be positive".into()));
        }
        let n = link.n as f64;
        let c = 2.0 / (n - 2.0); // a = u^c
        let mut a = Samples {
            v: Vec::new(),
            d1: Vec::new(),
            d2: Vec::new(),
        };
        let mut b = a.clone();
        for (i, &r) in grid.nodes.iter().enumerate() {
            let (uv, u1, u2) = (u.v[i], u.d1[i], u.d2[i]);
            let av = uv.powf(c);
            let a1 = c * uv.powf(c - 1.0) * u1;
            let a2 = c * (c - 1.0) * uv.powf(c - 2.0) * u1 * u1 + c * uv.powf(c - 1.0) * u2;
            a.v.push(av);
            a.d1.push(a1);
            a.d2.push(a2);
            b.v.push(av * r);
            b.d1.push(a1 * r + av);
            b.d2.push(a2 * r + 2.0 * a1);
        }
        let family = if u.v.iter().all(|&x| (x - 1.0).abs() < 1e-15) {
            Family::Flat
        } else {
            Family::Conformal
        };
        Ok(MetricProfile {
            family,
            link,
            grid,
            decay_order,
            repr: Repr::Single { a, b },
            conformal_u: Some(u),
        })
    }

    /// Generic warped profile from sampled `a, b > 0`.
    pub fn warped_from_values(
        link: LinkGeometry,
        grid: RadialGrid,
        a: Vec<f64>,
        b: Vec<f64>,
        decay_order: f64,
    ) -> Result<Self> {
        if a.iter().any(|&x| x <= 0.0) || b.iter().any(|&x| x <= 0.0) {
            return Err(AleError::NonMetricProfile("warped profile must be positive".into()));
        }
        let a = Samples::from_values(&grid, a);
        let b = Samples::from_values(&grid, b);
        Ok(MetricProfile {
            family: Family::Warped,
            link,
            grid,
            decay_order,
            repr: Repr::Single { a, b },
            conformal_u: None,
        })
    }

    pub fn warped_from_samples(
        link: LinkGeometry,
        grid: RadialGrid,
        a: Samples,
        b: Samples,
        decay_order: f64,
    ) -> Self {
        MetricProfile {
            family: Family::Warped,
            link,
            grid,
            decay_order,
            repr: Repr::Single { a, b },
            conformal_u: None,
        }
    }

    /// Eguchi–Hanson metric with bolt parameter `a_eh`; requires a grid with
    /// `r0 > a_eh`, dimension 4 and quotient order 2. Profile derivatives are
    /// analytic, so the metric serves as a machine-precision Ricci-flat
    /// reference.
    pub fn build_eguchi_hanson(grid: RadialGrid, a_eh: f64) -> Result<Self> {
        if a_eh <= 0.0 {
            return Err(AleError::InvalidArgument("bolt parameter must be positive".into()));
        }
        if grid.r0() <= a_eh {
            return Err(AleError::InvalidGrid(format!(
                "grid must start above the bolt radius {a_eh}, got r0 = {}",
                grid.r0()
            )));
        }
        let link = LinkGeometry::sphere_quotient(4, 2, 8)?;
        let k4 = a_eh.powi(4);
        let vfun = |r: f64| {
            let v = 1.0 - k4 / r.powi(4);
            let dv = 4.0 * k4 / r.powi(5);
            let ddv = -20.0 * k4 / r.powi(6);
            (v, dv, ddv)
        };
        let a = Samples::from_fn(&grid, |r| {
            let (v, dv, ddv) = vfun(r);
            let av = v.powf(-0.5);
            let a1 = -0.5 * dv * v.powf(-1.5);
            let a2 = -0.5 * ddv * v.powf(-1.5) + 0.75 * dv * dv * v.powf(-2.5);
            (av, a1, a2)
        });
        let a1s = Samples::from_fn(&grid, |r| (r, 1.0, 0.0));
        let a3s = Samples::from_fn(&grid, |r| {
            let (v, dv, ddv) = vfun(r);
            let sv = v.sqrt();
            let d = sv + r * dv / (2.0 * sv);
            let dd = dv / sv + r * ddv / (2.0 * sv) - r * dv * dv / (4.0 * v * sv);
            (r * sv, d, dd)
        });
        let grid = grid.with_cap(a_eh);
        Ok(MetricProfile {
            family: Family::EguchiHanson,
            link,
            grid,
            // Ricci-flat ALE metrics are ALE of order n.
            decay_order: 4.0,
            repr: Repr::Berger { a, a1: a1s, a3: a3s },
            conformal_u: None,
        })
    }

    // ------------------------------------------------------- curvature

    /// Sampled scalar curvature.
    pub fn scalar_curvature(&self) -> Vec<f64> {
        match (&self.family, &self.repr) {
            (Family::Flat, _) => vec![0.0; self.len()],
            (Family::Conformal, _) => {
                // conformal transformation law on a scalar-flat background
                let n = self.n() as f64;
                let u = self.conformal_u.as_ref().unwrap();
                let c = 4.0 * (n - 1.0) / (n - 2.0);
                self.grid
                    .nodes
                    .iter()
                    .enumerate()
                    .map(|(i, &r)| {
                        let lap = u.d2[i] + (n - 1.0) / r * u.d1[i];
                        -c * u.v[i].powf(-(n + 2.0) / (n - 2.0)) * lap
                    })
                    .collect()
            }
            (_, Repr::Single { .. }) => {
                let (p, q) = self.single_ricci_coeffs();
                let (a, b) = self.single().unwrap();
                let n = self.n() as f64;
                (0..self.len())
                    .map(|i| p[i] / (a.v[i] * a.v[i]) + (n - 1.0) * q[i] / (b.v[i] * b.v[i]))
                    .collect()
            }
            (_, Repr::Berger { .. }) => {
                let on = self.berger_ricci_on();
                (0..self.len())
                    .map(|i| on.r00[i] + 2.0 * on.r11[i] + on.r33[i])
                    .collect()
            }
        }
    }

    /// Coefficients `(p, q)` of `Ric = p dr² + q g_S` for a single-warped
    /// profile over an Einstein link with `Ric_S = (n-2) g_S`.
    fn single_ricci_coeffs(&self) -> (Vec<f64>, Vec<f64>) {
        let (a, b) = self.single().unwrap();
        let n = self.n() as f64;
        let m = self.len();
        let mut p = Vec::with_capacity(m);
        let mut q = Vec::with_capacity(m);
        for i in 0..m {
            let (av, a1) = (a.v[i], a.d1[i]);
            let (bv, b1, b2) = (b.v[i], b.d1[i], b.d2[i]);
            let bdot = b1 / av;
            let bddot = b2 / (av * av) - b1 * a1 / (av * av * av);
            p.push(-(n - 1.0) * bddot / bv * av * av);
            q.push(-bddot * bv - (n - 2.0) * bdot * bdot + (n - 2.0));
        }
        (p, q)
    }

    /// Ricci tensor in diagonal component form.
    pub fn ricci_tensor(&self) -> RadialTwoTensor {
        match &self.repr {
            Repr::Single { .. } => {
                if self.family == Family::Flat {
                    return RadialTwoTensor::zero(self.len());
                }
                if self.family == Family::Conformal {
                    // conformal route: g = e^{2ψ} g_e with ψ = (2/(n-2)) ln u
                    let n = self.n() as f64;
                    let u = self.conformal_u.as_ref().unwrap();
                    let mut rr = Vec::with_capacity(self.len());
                    let mut ss = Vec::with_capacity(self.len());
                    for (i, &r) in self.grid.nodes.iter().enumerate() {
                        let lu = u.d1[i] / u.v[i];
                        let psi1 = 2.0 / (n - 2.0) * lu;
                        let psi2 = 2.0 / (n - 2.0) * (u.d2[i] / u.v[i] - lu * lu);
                        rr.push(-(n - 1.0) * (psi2 + psi1 / r));
                        ss.push(-psi2 - (2.0 * n - 3.0) * psi1 / r - (n - 2.0) * psi1 * psi1);
                    }
                    return RadialTwoTensor::diagonal(rr, ss, self.decay_order + 2.0);
                }
                let (p, q) = self.single_ricci_coeffs();
                let ss = q
                    .iter()
                    .zip(&self.grid.nodes)
                    .map(|(v, r)| v / (r * r))
                    .collect();
                RadialTwoTensor::diagonal(p, ss, self.decay_order + 2.0)
            }
            Repr::Berger { a1, a3, .. } => {
                // project the (vanishing for Eguchi–Hanson) anisotropic sphere
                // block onto the isotropic slot
                let on = self.berger_ricci_on();
                let (a, _) = match &self.repr {
                    Repr::Berger { a, a1, .. } => (a, a1),
                    _ => unreachable!(),
                };
                let rr: Vec<f64> = (0..self.len())
                    .map(|i| on.r00[i] * a.v[i] * a.v[i])
                    .collect();
                let ss: Vec<f64> = (0..self.len())
                    .map(|i| {
                        let s = 2.0 * on.r11[i] * a1.v[i] * a1.v[i]
                            + on.r33[i] * a3.v[i] * a3.v[i];
                        s / (3.0 * self.grid.nodes[i] * self.grid.nodes[i])
                    })
                    .collect();
                RadialTwoTensor::diagonal(rr, ss, self.decay_order + 2.0)
            }
        }
    }

    /// Orthonormal Ricci components of a Berger profile.
    pub fn berger_ricci_on(&self) -> BergerRicci {
        let (a, a1s, a3s) = match &self.repr {
            Repr::Berger { a, a1, a3 } => (a, a1, a3),
            _ => panic!("berger_ricci_on on a single-warped profile"),
        };
        let m = self.len();
        let mut out = BergerRicci {
            r00: Vec::with_capacity(m),
            r11: Vec::with_capacity(m),
            r33: Vec::with_capacity(m),
        };
        for i in 0..m {
            let av = a.v[i];
            let ad = a.d1[i];
            let arc1 = |s: &Samples| s.d1[i] / av; // d/ds
            let arc2 =
                |s: &Samples| s.d2[i] / (av * av) - s.d1[i] * ad / (av * av * av);
            let (v1, v3) = (a1s.v[i], a3s.v[i]);
            let f1 = arc1(a1s) / v1;
            let f3 = arc1(a3s) / v3;
            let dd1 = arc2(a1s) / v1;
            let dd3 = arc2(a3s) / v3;
            // structure coefficients for dσ_i = -2 σ_j ∧ σ_k
            let c1 = -v3 / (v1 * v1);
            let c3 = (v3 * v3 - 2.0 * v1 * v1) / (v1 * v1 * v3);
            out.r00.push(-(2.0 * dd1 + dd3));
            out.r11.push(-dd1 - f1 * (f1 + f3) + 2.0 * c1 * c3);
            out.r33.push(-dd3 - 2.0 * f3 * f1 + 2.0 * c1 * c1);
        }
        out
    }

    // ------------------------------------------------------ measure, ops

    /// Density `ω(r)` with `∫ F dμ_g = ∫ F(r) ω(r) dr` for radial `F`;
    /// includes the link volume.
    pub fn volume_density(&self) -> Vec<f64> {
        let vl = self.link.link_volume;
        match &self.repr {
            Repr::Single { a, b } => {
                let n = self.n() as i32;
                (0..self.len())
                    .map(|i| vl * a.v[i] * b.v[i].powi(n - 1))
                    .collect()
            }
            Repr::Berger { a, a1, a3 } => (0..self.len())
                .map(|i| vl * a.v[i] * a1.v[i] * a1.v[i] * a3.v[i])
                .collect(),
        }
    }

    /// Metric area of the level set `{r = r_i}`.
    pub fn level_area(&self) -> Vec<f64> {
        let vl = self.link.link_volume;
        match &self.repr {
            Repr::Single { b, .. } => {
                let n = self.n() as i32;
                b.v.iter().map(|bv| vl * bv.powi(n - 1)).collect()
            }
            Repr::Berger { a1, a3, .. } => (0..self.len())
                .map(|i| vl * a1.v[i] * a1.v[i] * a3.v[i])
                .collect(),
        }
    }

    /// Coefficients of the radial Laplace–Beltrami operator
    /// `Δ_g u = c2 u'' + c1 u'`.
    pub fn laplacian_coeffs(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.repr {
            Repr::Single { a, b } => {
                let n = self.n() as f64;
                let c2: Vec<f64> = a.v.iter().map(|av| 1.0 / (av * av)).collect();
                let c1: Vec<f64> = (0..self.len())
                    .map(|i| {
                        ((n - 1.0) * b.d1[i] / b.v[i] - a.d1[i] / a.v[i]) / (a.v[i] * a.v[i])
                    })
                    .collect();
                (c2, c1)
            }
            Repr::Berger { a, a1, a3 } => {
                let c2: Vec<f64> = a.v.iter().map(|av| 1.0 / (av * av)).collect();
                let c1: Vec<f64> = (0..self.len())
                    .map(|i| {
                        (2.0 * a1.d1[i] / a1.v[i] + a3.d1[i] / a3.v[i] - a.d1[i] / a.v[i])
                            / (a.v[i] * a.v[i])
                    })
                    .collect();
                (c2, c1)
            }
        }
    }

    pub fn laplacian_apply(&self, u: &[f64]) -> Vec<f64> {
        let (c2, c1) = self.laplacian_coeffs();
        let d1 = deriv1(&self.grid.nodes, u);
        let d2 = deriv2(&self.grid.nodes, u);
        (0..self.len()).map(|i| c2[i] * d2[i] + c1[i] * d1[i]).collect()
    }

    /// `|∇u|²_g` of a radial scalar.
    pub fn grad_norm_sq(&self, du: &[f64]) -> Vec<f64> {
        let a = match &self.repr {
            Repr::Single { a, .. } => a,
            Repr::Berger { a, .. } => a,
        };
        du.iter()
            .zip(&a.v)
            .map(|(d, av)| (d / av) * (d / av))
            .collect()
    }

    /// Hessian of a radial scalar as a diagonal tensor (single-warped only).
    pub fn hessian_scalar(&self, u: &[f64]) -> Result<RadialTwoTensor> {
        let (a, b) = self.single()?;
        let d1 = deriv1(&self.grid.nodes, u);
        let d2 = deriv2(&self.grid.nodes, u);
        let rr: Vec<f64> = (0..self.len())
            .map(|i| d2[i] - a.d1[i] / a.v[i] * d1[i])
            .collect();
        let ss: Vec<f64> = (0..self.len())
            .map(|i| {
                let r = self.grid.nodes[i];
                b.v[i] * b.d1[i] / (a.v[i] * a.v[i]) * d1[i] / (r * r)
            })
            .collect();
        Ok(RadialTwoTensor::diagonal(rr, ss, f64::INFINITY))
    }

    /// Pointwise trace `tr_g T`.
    pub fn trace(&self, t: &RadialTwoTensor) -> Vec<f64> {
        match &self.repr {
            Repr::Single { a, b } => {
                let n = self.n() as f64;
                (0..self.len())
                    .map(|i| {
                        let r = self.grid.nodes[i];
                        t.rr[i] / (a.v[i] * a.v[i])
                            + (n - 1.0) * t.ss[i] * r * r / (b.v[i] * b.v[i])
                    })
                    .collect()
            }
            Repr::Berger { a, a1, a3 } => (0..self.len())
                .map(|i| {
                    let r = self.grid.nodes[i];
                    t.rr[i] / (a.v[i] * a.v[i])
                        + t.ss[i]
                            * r
                            * r
                            * (2.0 / (a1.v[i] * a1.v[i]) + 1.0 / (a3.v[i] * a3.v[i]))
                })
                .collect(),
        }
    }

    /// Pointwise inner product `⟨T, U⟩_g`.
    pub fn inner(&self, t: &RadialTwoTensor, u: &RadialTwoTensor) -> Vec<f64> {
        match &self.repr {
            Repr::Single { a, b } => {
                let n = self.n() as f64;
                (0..self.len())
                    .map(|i| {
                        let r = self.grid.nodes[i];
                        let a4 = (a.v[i] * a.v[i]).powi(2);
                        let scale = (r * r / (b.v[i] * b.v[i])).powi(2);
                        t.rr[i] * u.rr[i] / a4 + (n - 1.0) * scale * t.ss[i] * u.ss[i]
                    })
                    .collect()
            }
            Repr::Berger { a, a1, a3 } => (0..self.len())
                .map(|i| {
                    let r = self.grid.nodes[i];
                    let a4 = (a.v[i] * a.v[i]).powi(2);
                    let r4 = (r * r) * (r * r);
                    t.rr[i] * u.rr[i] / a4
                        + t.ss[i] * u.ss[i] * r4
                            * (2.0 / a1.v[i].powi(4) + 1.0 / a3.v[i].powi(4))
                })
                .collect(),
        }
    }

    pub fn norm_pointwise(&self, t: &RadialTwoTensor) -> Vec<f64> {
        self.inner(t, t).into_iter().map(f64::sqrt).collect()
    }

    /// Radial component of `div_g T` (single-warped only).
    pub fn divergence(&self, t: &RadialTwoTensor) -> Result<Vec<f64>> {
        t.require_radial("divergence")?;
        let (a, b) = self.single()?;
        let n = self.n() as f64;
        let r = &self.grid.nodes;
        let drr = deriv1(r, &t.rr);
        // Q = ss·r² is the g_S coefficient
        let q: Vec<f64> = t.ss.iter().zip(r).map(|(s, ri)| s * ri * ri).collect();
        Ok((0..self.len())
            .map(|i| {
                let a2 = a.v[i] * a.v[i];
                (drr[i] - 2.0 * a.d1[i] / a.v[i] * t.rr[i]) / a2
                    + (n - 1.0)
                        * (b.d1[i] / (a2 * b.v[i]) * t.rr[i]
                            - b.d1[i] / b.v[i].powi(3) * q[i])
            })
            .collect())
    }

    /// Lie derivative of the metric along `X = ψ(r) ∂_r`.
    pub fn lie_derivative(&self, psi: &[f64]) -> Result<RadialTwoTensor> {
        let (a, b) = self.single()?;
        let dpsi = deriv1(&self.grid.nodes, psi);
        let rr: Vec<f64> = (0..self.len())
            .map(|i| 2.0 * a.v[i] * a.v[i] * dpsi[i] + 2.0 * a.v[i] * a.d1[i] * psi[i])
            .collect();
        let ss: Vec<f64> = (0..self.len())
            .map(|i| {
                let r = self.grid.nodes[i];
                2.0 * b.v[i] * b.d1[i] * psi[i] / (r * r)
            })
            .collect();
        Ok(RadialTwoTensor::diagonal(rr, ss, f64::INFINITY))
    }

    /// Flat-frame components `(rr, ss)` of the metric itself.
    pub fn metric_components(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.repr {
            Repr::Single { a, b } => {
                let rr = a.v.iter().map(|av| av * av).collect();
                let ss = (0..self.len())
                    .map(|i| {
                        let r = self.grid.nodes[i];
                        b.v[i] * b.v[i] / (r * r)
                    })
                    .collect();
                (rr, ss)
            }
            Repr::Berger { .. } => panic!("metric_components on a Berger profile"),
        }
    }

    /// Orthonormal-frame deviation from the flat cone, for mass integrals.
    pub fn frame_deviation(&self) -> FrameDeviation {
        let r = &self.grid.nodes;
        match &self.repr {
            Repr::Single { a, b } => {
                let n = self.n();
                let h00: Vec<f64> = a.v.iter().map(|av| av * av - 1.0).collect();
                let h00_d1: Vec<f64> =
                    (0..self.len()).map(|i| 2.0 * a.v[i] * a.d1[i]).collect();
                let k: Vec<f64> = (0..self.len())
                    .map(|i| (b.v[i] * b.v[i] - r[i] * r[i]) / (r[i] * r[i]))
                    .collect();
                let kd: Vec<f64> = (0..self.len())
                    .map(|i| {
                        let ri = r[i];
                        (2.0 * b.v[i] * b.d1[i] - 2.0 * ri) / (ri * ri)
                            - 2.0 * (b.v[i] * b.v[i] - ri * ri) / (ri * ri * ri)
                    })
                    .collect();
                FrameDeviation {
                    h00,
                    h00_d1,
                    classes: vec![(n - 1, k, kd)],
                }
            }
            Repr::Berger { a, a1, a3 } => {
                let h00: Vec<f64> = a.v.iter().map(|av| av * av - 1.0).collect();
                let h00_d1: Vec<f64> =
                    (0..self.len()).map(|i| 2.0 * a.v[i] * a.d1[i]).collect();
                let class = |s: &Samples| {
                    let k: Vec<f64> = (0..self.len())
                        .map(|i| (s.v[i] * s.v[i] - r[i] * r[i]) / (r[i] * r[i]))
                        .collect();
                    let kd: Vec<f64> = (0..self.len())
                        .map(|i| {
                            let ri = r[i];
                            (2.0 * s.v[i] * s.d1[i] - 2.0 * ri) / (ri * ri)
                                - 2.0 * (s.v[i] * s.v[i] - ri * ri) / (ri * ri * ri)
                        })
                        .collect();
                    (k, kd)
                };
                let (k1, kd1) = class(a1);
                let (k3, kd3) = class(a3);
                FrameDeviation {
                    h00,
                    h00_d1,
                    classes: vec![(2, k1, kd1), (1, k3, kd3)],
                }
            }
        }
    }

    // ------------------------------------------------- transformations

    /// Homothety `g ↦ s·g`, realized on the rescaled radial coordinate so
    /// the result is again asymptotic to a unit flat cone.
    pub fn scaled_metric(&self, s: f64) -> Result<MetricProfile> {
        if s <= 0.0 {
            return Err(AleError::InvalidArgument("scale must be positive".into()));
        }
        let c = s.sqrt();
        let grid = self.grid.scaled(c);
        let rescale = |p: &Samples| Samples {
            v: p.v.clone(),
            d1: p.d1.iter().map(|d| d / c).collect(),
            d2: p.d2.iter().map(|d| d / (c * c)).collect(),
        };
        match &self.repr {
            Repr::Single { a, b } => {
                let a2 = rescale(a);
                let b2 = Samples {
                    v: b.v.iter().map(|v| c * v).collect(),
                    d1: b.d1.clone(),
                    d2: b.d2.iter().map(|d| d / c).collect(),
                };
                let u2 = self.conformal_u.as_ref().map(rescale);
                Ok(MetricProfile {
                    family: self.family,
                    link: self.link.clone(),
                    grid,
                    decay_order: self.decay_order,
                    repr: Repr::Single { a: a2, b: b2 },
                    conformal_u: u2,
                })
            }
            Repr::Berger { a, a1, a3 } => {
                let stretch = |p: &Samples| Samples {
                    v: p.v.iter().map(|v| c * v).collect(),
                    d1: p.d1.clone(),
                    d2: p.d2.iter().map(|d| d / c).collect(),
                };
                Ok(MetricProfile {
                    family: self.family,
                    link: self.link.clone(),
                    grid,
                    decay_order: self.decay_order,
                    repr: Repr::Berger {
                        a: rescale(a),
                        a1: stretch(a1),
                        a3: stretch(a3),
                    },
                    conformal_u: None,
                })
            }
        }
    }

    /// Pullback by the radial diffeomorphism `φ(r) = r + ψ(r)`, resampled
    /// onto the original grid. Fails if `φ` is not strictly increasing.
    pub fn pullback_radial_diffeo(&self, psi: &[f64]) -> Result<MetricProfile> {
        let (a, b) = self.single()?;
        let r = &self.grid.nodes;
        assert_eq!(psi.len(), r.len());
        let phi: Vec<f64> = r.iter().zip(psi).map(|(ri, p)| ri + p).collect();
        if !phi.windows(2).all(|w| w[1] > w[0]) {
            return Err(AleError::NonMonotoneMap(
                "r + ψ(r) must be strictly increasing".into(),
            ));
        }
        let dphi = deriv1(r, &phi);
        if dphi.iter().any(|&d| d <= 0.0) {
            return Err(AleError::NonMonotoneMap("φ' must stay positive".into()));
        }
        let a_pull = crate::calculus::resample(r, &a.v, &phi);
        let b_pull = crate::calculus::resample(r, &b.v, &phi);
        let new_a: Vec<f64> = a_pull.iter().zip(&dphi).map(|(av, d)| av * d).collect();
        MetricProfile::warped_from_values(
            self.link.clone(),
            self.grid.clone(),
            new_a,
            b_pull,
            self.decay_order,
        )
    }

    /// Cutoff blending `χ_s g + (1 - χ_s) g_flat`, equal to `g` inside
    /// `{r < s}` and to the flat cone outside `{r > 2s}`.
    pub fn blend_with_flat(&self, s: f64) -> Result<MetricProfile> {
        let (rr, ss) = self.metric_components();
        let r = &self.grid.nodes;
        if s >= self.grid.rmax() {
            return Ok(self.clone());
        }
        let chi: Vec<f64> = r.iter().map(|&ri| 1.0 - smoothstep5((ri - s) / s)).collect();
        let mut a = Vec::with_capacity(self.len());
        let mut b = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let rr_b = chi[i] * rr[i] + (1.0 - chi[i]);
            let ss_b = chi[i] * ss[i] + (1.0 - chi[i]);
            if rr_b <= 0.0 || ss_b <= 0.0 {
                return Err(AleError::NonMetricProfile("blend left the metric cone".into()));
            }
            a.push(rr_b.sqrt());
            b.push(ss_b.sqrt() * r[i]);
        }
        MetricProfile::warped_from_values(
            self.link.clone(),
            self.grid.clone(),
            a,
            b,
            self.decay_order,
        )
    }

    /// The deformed metric `g + t·h` as a warped profile (single-warped).
    pub fn perturbed(&self, h: &RadialTwoTensor, t: f64) -> Result<MetricProfile> {
        h.require_radial("metric deformation")?;
        let (rr, ss) = self.metric_components();
        let r = &self.grid.nodes;
        let mut a = Vec::with_capacity(self.len());
        let mut b = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let prr = rr[i] + t * h.rr[i];
            let pss = ss[i] + t * h.ss[i];
            if prr <= 0.0 || pss <= 0.0 {
                return Err(AleError::NonMetricProfile(format!(
                    "g + t h leaves the metric cone at r = {}",
                    r[i]
                )));
            }
            a.push(prr.sqrt());
            b.push(pss.sqrt() * r[i]);
        }
        MetricProfile::warped_from_values(self.link.clone(), self.grid.clone(), a, b, self.decay_order)
    }
}

pub struct BergerRicci {
    pub r00: Vec<f64>,
    pub r11: Vec<f64>,
    pub r33: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::fit_line;

    fn grid(n: usize) -> RadialGrid {
        RadialGrid::geometric(1.0, 1e3, n).unwrap()
    }

    #[test]
    fn flat_cone_curvature_vanishes_exactly() {
        let g = MetricProfile::flat(LinkGeometry::round_sphere(4).unwrap(), grid(257));
        assert!(g.scalar_curvature().iter().all(|&v| v == 0.0));
        let ric = g.ricci_tensor();
        assert!(ric.rr.iter().all(|&v| v == 0.0));
        assert!(ric.ss.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn warped_route_reproduces_space_forms() {
        // dr² + sin²r g_S has R = n(n-1), Ric = (n-1) g; sinh gives -n(n-1).
        for n in [4usize, 5, 6] {
            let link = LinkGeometry::round_sphere(n).unwrap();
            let gr = RadialGrid::from_nodes(
                (0..200).map(|i| 0.2 + 1.0e-2 * i as f64).collect(),
                0.0,
            )
            .unwrap();
            let a = Samples::constant(&gr, 1.0);
            let b = Samples::from_fn(&gr, |r| (r.sin(), r.cos(), -r.sin()));
            let g = MetricProfile::warped_from_samples(link.clone(), gr.clone(), a.clone(), b, 1.0);
            let want = (n * (n - 1)) as f64;
            for (&r, &v) in g.grid.nodes.iter().zip(&g.scalar_curvature()) {
                assert!((v - want).abs() < 1e-9, "sphere R at {r}: {v}");
            }
            let ric = g.ricci_tensor();
            let (rr_g, ss_g) = g.metric_components();
            for i in 0..g.len() {
                assert!((ric.rr[i] - (n as f64 - 1.0) * rr_g[i]).abs() < 1e-9);
                assert!((ric.ss[i] - (n as f64 - 1.0) * ss_g[i]).abs() < 1e-9);
            }
            let b = Samples::from_fn(&gr, |r| (r.sinh(), r.cosh(), r.sinh()));
            let g = MetricProfile::warped_from_samples(link, gr, a, b, 1.0);
            for &v in &g.scalar_curvature() {
                assert!((v + want).abs() < 1e-9, "hyperbolic R: {v}");
            }
        }
    }

    #[test]
    fn conformal_and_warped_routes_agree() {
        // Same metric through two independent curvature derivations.
        let link = LinkGeometry::round_sphere(4).unwrap();
        let gr = grid(513);
        let u = Samples::from_fn(&gr, |r| {
            let e = (-0.3 * r).exp();
            (1.0 + 0.2 * e, -0.06 * e, 0.018 * e)
        });
        let g = MetricProfile::from_conformal_samples(link.clone(), gr.clone(), u.clone(), 1.0).unwrap();
        let r_conf = g.scalar_curvature();
        let ric_conf = g.ricci_tensor();
        // strip the family tag: force the generic warped formulas
        let g_w = MetricProfile {
            family: Family::Warped,
            conformal_u: None,
            ..g.clone()
        };
        let r_warp = g_w.scalar_curvature();
        let ric_warp = g_w.ricci_tensor();
        for i in 0..g.len() {
            assert!(crate::rel_gap(r_conf[i], r_warp[i]) < 1e-9 || (r_conf[i].abs() < 1e-12));
            assert!((ric_conf.rr[i] - ric_warp.rr[i]).abs() < 1e-10);
            assert!((ric_conf.ss[i] - ric_warp.ss[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn finite_difference_profile_matches_analytic_profile() {
        // Second-order FD on the exact metric components vs closed-form
        // derivatives, mid-grid.
        let link = LinkGeometry::round_sphere(4).unwrap();
        let gr = RadialGrid::geometric(1.0, 1e3, 4097).unwrap();
        let uf = |r: f64| {
            let e = (-0.5 * r).exp();
            (1.0 + 0.15 * e, -0.075 * e, 0.0375 * e)
        };
        let exact = MetricProfile::from_conformal_samples(
            link.clone(),
            gr.clone(),
            Samples::from_fn(&gr, uf),
            1.0,
        )
        .unwrap();
        let vals: Vec<f64> = gr.nodes.iter().map(|&r| uf(r).0).collect();
        let fd = MetricProfile::conformal_from_values(link, gr.clone(), vals, 1.0).unwrap();
        let (re, rf) = (exact.scalar_curvature(), fd.scalar_curvature());
        let mid = gr.len() / 2;
        for i in [mid / 2, mid, 3 * mid / 2] {
            assert!(
                crate::rel_gap(re[i], rf[i]) < 1e-6,
                "at node {i}: {} vs {}",
                re[i],
                rf[i]
            );
        }
    }

    #[test]
    fn curvature_converges_at_second_order() {
        let link = LinkGeometry::round_sphere(4).unwrap();
        let mut errs = Vec::new();
        for nodes in [257usize, 513, 1025] {
            let gr = RadialGrid::geometric(1.0, 1e3, nodes).unwrap();
            let uf = |r: f64| 1.0 + 0.2 * (-0.4 * r).exp();
            let vals: Vec<f64> = gr.nodes.iter().map(|&r| uf(r)).collect();
            let fd = MetricProfile::conformal_from_values(link.clone(), gr.clone(), vals, 1.0)
                .unwrap();
            let exact = MetricProfile::from_conformal_samples(
                link.clone(),
                gr.clone(),
                Samples::from_fn(&gr, |r| {
                    let e = (-0.4 * r).exp();
                    (1.0 + 0.2 * e, -0.08 * e, 0.032 * e)
                }),
                1.0,
            )
            .unwrap();
            let (rf, re) = (fd.scalar_curvature(), exact.scalar_curvature());
            let err = (4..nodes - 4)
                .map(|i| (rf[i] - re[i]).abs())
                .fold(0.0f64, f64::max);
            errs.push(err);
        }
        assert!(errs[0] / errs[1] > 3.2, "{errs:?}");
        assert!(errs[1] / errs[2] > 3.2, "{errs:?}");
    }

    #[test]
    fn mass_family_is_scalar_flat_beyond_cutoff() {
        let link = LinkGeometry::round_sphere(4).unwrap();
        let gr = RadialGrid::geometric(1.0, 1e4, 1025).unwrap();
        let g = MetricProfile::build_conformal_family(link.clone(), gr.clone(), 1.0, 10.0).unwrap();
        let r_curv = g.scalar_curvature();
        for (i, &r) in g.grid.nodes.iter().enumerate() {
            if r > 20.0 {
                assert!(r_curv[i].abs() < 1e-10, "R({r}) = {}", r_curv[i]);
            }
        }
        // m = 0 reduces to the flat profile
        let g0 = MetricProfile::build_conformal_family(link, gr, 0.0, 10.0).unwrap();
        assert!(g0
            .conformal_u
            .as_ref()
            .unwrap()
            .v
            .iter()
            .all(|&u| u == 1.0));
        // rejects profiles pushed out of the metric cone
        let link5 = LinkGeometry::round_sphere(5).unwrap();
        let gr5 = RadialGrid::geometric(1.0, 1e4, 257).unwrap();
        assert!(
            MetricProfile::build_conformal_family(link5, gr5, -1.0e4, 10.0).is_err()
        );
    }

    #[test]
    fn trace_of_ricci_equals_scalar_curvature() {
        let link = LinkGeometry::round_sphere(4).unwrap();
        let gr = grid(513);
        let g = MetricProfile::build_conformal_family(link.clone(), gr.clone(), 0.8, 10.0).unwrap();
        let tr = g.trace(&g.ricci_tensor());
        let rc = g.scalar_curvature();
        for i in 0..g.len() {
            assert!((tr[i] - rc[i]).abs() < 1e-10 * rc[i].abs().max(1.0));
        }
        let eh_grid = RadialGrid::geometric(1.001, 1e3, 513).unwrap();
        let eh = MetricProfile::build_eguchi_hanson(eh_grid, 1.0).unwrap();
        let tr = eh.trace(&eh.ricci_tensor());
        let rc = eh.scalar_curvature();
        for i in 0..eh.len() {
            assert!((tr[i] - rc[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn eguchi_hanson_is_ricci_flat_to_machine_precision() {
        let gr = RadialGrid::geometric(1.0001, 2e3, 1025).unwrap();
        let eh = MetricProfile::build_eguchi_hanson(gr, 1.0).unwrap();
        let on = eh.berger_ricci_on();
        let max = on
            .r00
            .iter()
            .chain(&on.r11)
            .chain(&on.r33)
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max < 1e-8, "max |Ric| = {max}");
    }

    #[test]
    fn eguchi_hanson_decays_at_order_four() {
        let gr = RadialGrid::geometric(1.5, 2e3, 1025).unwrap();
        let eh = MetricProfile::build_eguchi_hanson(gr, 1.0).unwrap();
        let dev = eh.frame_deviation();
        let idx = eh.grid.outer_indices(0.5);
        let xs: Vec<f64> = idx.clone().map(|i| eh.grid.nodes[i].ln()).collect();
        let ys: Vec<f64> = idx
            .map(|i| {
                let k3 = &dev.classes[1].1;
                (dev.h00[i].abs() + k3[i].abs()).ln()
            })
            .collect();
        let fit = fit_line(&xs, &ys);
        assert!((fit.slope + 4.0).abs() < 0.05, "slope {}", fit.slope);
    }

    #[test]
    fn eguchi_hanson_flat_limit() {
        // bolt parameter -> 0 degenerates to the cone over S³/Z₂
        let gr = RadialGrid::geometric(1.0, 1e3, 257).unwrap();
        let eh = MetricProfile::build_eguchi_hanson(gr.clone(), 1e-4).unwrap();
        let dev = eh.frame_deviation();
        let max = dev.h00.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max < 1e-10, "deviation {max}");
        assert!((eh.link.link_volume - std::f64::consts::PI.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn berger_formulas_reproduce_product_and_flat_checks() {
        // A₁ = A₂ = A₃ = const c is the cylinder over S³(c): Ric_S = 2/c².
        let gr = RadialGrid::geometric(1.0, 1e3, 257).unwrap();
        let c = 1.7;
        let mk = |v: f64| Samples::constant(&gr, v);
        let link = LinkGeometry::sphere_quotient(4, 2, 4).unwrap();
        let g = MetricProfile {
            family: Family::Warped,
            link,
            grid: gr.clone(),
            decay_order: 1.0,
            repr: Repr::Berger {
                a: mk(1.0),
                a1: mk(c),
                a3: mk(c),
            },
            conformal_u: None,
        };
        let on = g.berger_ricci_on();
        for i in 0..g.len() {
            assert!(on.r00[i].abs() < 1e-12);
            assert!((on.r11[i] - 2.0 / (c * c)).abs() < 1e-12);
            assert!((on.r33[i] - 2.0 / (c * c)).abs() < 1e-12);
        }
    }

    #[test]
    fn volume_density_examples() {
        use std::f64::consts::PI;
        let gr = grid(257);
        let g = MetricProfile::flat(LinkGeometry::round_sphere(4).unwrap(), gr.clone());
        for (i, &r) in gr.nodes.iter().enumerate() {
            assert!((g.volume_density()[i] - 2.0 * PI * PI * r.powi(3)).abs() < 1e-9 * r.powi(3));
        }
        let g2 = MetricProfile::flat(
            LinkGeometry::sphere_quotient(4, 2, 4).unwrap(),
            gr.clone(),
        );
        for (i, &r) in gr.nodes.iter().enumerate() {
            assert!((g2.volume_density()[i] - PI * PI * r.powi(3)).abs() < 1e-9 * r.powi(3));
        }
        // conformal law against the determinant route
        let link = LinkGeometry::round_sphere(5).unwrap();
        let gc = MetricProfile::build_conformal_family(link.clone(), gr.clone(), 0.5, 5.0).unwrap();
        let u = gc.conformal_u.as_ref().unwrap();
        let n = 5.0;
        for (i, &r) in gr.nodes.iter().enumerate() {
            let oracle =
                u.v[i].powf(2.0 * n / (n - 2.0)) * r.powf(n - 1.0) * link.link_volume;
            assert!(crate::rel_gap(gc.volume_density()[i], oracle) < 1e-12);
        }
    }

    #[test]
    fn scaling_acts_exactly_on_curvature() {
        let link = LinkGeometry::round_sphere(4).unwrap();
        let gr = RadialGrid::geometric(1.0, 1e4, 513).unwrap();
        let g = MetricProfile::build_conformal_family(link, gr, 0.7, 10.0).unwrap();
        let s = 2.0;
        let gs = g.scaled_metric(s).unwrap();
        let (r1, r2) = (g.scalar_curvature(), gs.scalar_curvature());
        for i in 0..g.len() {
            assert!((r2[i] - r1[i] / s).abs() < 1e-14 * r1[i].abs().max(1e-30) / s + 1e-300);
        }
    }

    #[test]
    fn blend_identities() {
        let link = LinkGeometry::round_sphere(4).unwrap();
        let gr = RadialGrid::geometric(1.0, 1e4, 513).unwrap();
        let g = MetricProfile::build_conformal_family(link, gr, 0.7, 10.0).unwrap();
        // beyond the grid: unchanged
        let same = g.blend_with_flat(2e4).unwrap();
        assert_eq!(same.family, g.family);
        // blend is flat outside {r > 2s}
        let b = g.blend_with_flat(50.0).unwrap();
        let rc = b.scalar_curvature();
        for (i, &r) in b.grid.nodes.iter().enumerate() {
            if r > 101.0 {
                assert!(rc[i].abs() < 1e-9, "R({r}) = {}", rc[i]);
            }
        }
    }

    #[test]
    fn pullback_identity_and_monotonicity_guard() {
        let link = LinkGeometry::round_sphere(4).unwrap();
        let gr = RadialGrid::geometric(1.0, 1e4, 513).unwrap();
        let g = MetricProfile::build_conformal_family(link, gr.clone(), 0.5, 10.0).unwrap();
        let zero = vec![0.0; gr.len()];
        let same = g.pullback_radial_diffeo(&zero).unwrap();
        let (r1, r2) = (g.scalar_curvature(), same.scalar_curvature());
        for i in 4..g.len() - 4 {
            assert!((r1[i] - r2[i]).abs() < 1e-7 * r1[i].abs().max(1e-8));
        }
        let bad: Vec<f64> = gr.nodes.iter().map(|r| -0.9 * r).collect();
        assert!(g.pullback_radial_diffeo(&bad).is_err());
    }
}
