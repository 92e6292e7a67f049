//! One-dimensional numerical kernels shared by every module: finite
//! differences on (possibly non-uniform) radial grids, quadrature weights,
//! banded linear solves, tail extrapolation and resampling.
//!
//! Derivatives are centered second-order stencils with one-sided stencils at
//! the boundary. Quadrature integrates the local quadratic interpolant
//! (non-uniform Simpson), so smooth integrands converge at fourth order while
//! the differentiation order stays at two.

use crate::error::{AleError, Result};

/// Fornberg's algorithm: weights of the `m`-th derivative at `x0` from the
/// nodes `xs`. Exact for polynomials of degree `xs.len() - 1`.
pub fn fd_weights(x0: f64, xs: &[f64], m: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Sparse one-dimensional differential operator: for each row, a contiguous
/// stencil `(start, weights)` acting on nodal values.
#[derive(Debug, Clone)]
pub struct StencilOp {
    pub n: usize,
    pub rows: Vec<(usize, Vec<f64>)>,
}

impl StencilOp {
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.n);
        self.rows
            .iter()
            .map(|(s, w)| w.iter().zip(&f[*s..]).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Maximal stencil half-width, used to size banded assemblies.
    pub fn bandwidth(&self) -> usize {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, (s, w))| {
                let lo = i.saturating_sub(*s);
                let hi = (s + w.len() - 1).saturating_sub(i);
                lo.max(hi)
            })
            .max()
            .unwrap_or(0)
    }
}

/// First-derivative operator: centered 3-point stencils inside, one-sided
/// 3-point at the ends.
pub fn deriv1_op(x: &[f64]) -> StencilOp {
    stencil_op(x, 1, 3)
}

/// Second-derivative operator: centered 3-point stencils inside, one-sided
/// 4-point at the ends (the extra node keeps the boundary error at the same
/// order as the interior).
pub fn deriv2_op(x: &[f64]) -> StencilOp {
    stencil_op(x, 2, 4)
}

fn stencil_op(x: &[f64], m: usize, edge_pts: usize) -> StencilOp {
    let n = x.len();
    assert!(n >= edge_pts);
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let (start, len) = if i == 0 {
            (0, edge_pts)
        } else if i == n - 1 {
            (n - edge_pts, edge_pts)
        } else {
            (i - 1, 3)
        };
        rows.push((start, fd_weights(x[i], &x[start..start + len], m)));
    }
    StencilOp { n, rows }
}

pub fn deriv1(x: &[f64], f: &[f64]) -> Vec<f64> {
    deriv1_op(x).apply(f)
}

pub fn deriv2(x: &[f64], f: &[f64]) -> Vec<f64> {
    deriv2_op(x).apply(f)
}

fn lagrange_quad_integral(a: f64, b: f64, xs: [f64; 3]) -> [f64; 3] {
    // Integral over [a, b] of the Lagrange basis through xs.
    let mut w = [0.0; 3];
    for k in 0..3 {
        let (xj, xl) = match k {
            0 => (xs[1], xs[2]),
            1 => (xs[0], xs[2]),
            _ => (xs[0], xs[1]),
        };
        let denom = (xs[k] - xj) * (xs[k] - xl);
        // ∫ (x - xj)(x - xl) dx = x³/3 − (xj+xl)x²/2 + xj·xl·x
        let prim = |x: f64| x * x * x / 3.0 - (xj + xl) * x * x / 2.0 + xj * xl * x;
        w[k] = (prim(b) - prim(a)) / denom;
    }
    w
}

/// Quadrature weights integrating the piecewise quadratic interpolant over
/// the whole grid. All weights are strictly positive on geometric grids.
pub fn quad_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    assert!(n >= 3, "quadrature needs at least three nodes");
    let mut w = vec![0.0; n];
    let mut i = 0;
    while i + 2 < n {
        let xs = [x[i], x[i + 1], x[i + 2]];
        let ws = lagrange_quad_integral(x[i], x[i + 2], xs);
        for k in 0..3 {
            w[i + k] += ws[k];
        }
        i += 2;
    }
    if i + 1 < n {
        // Odd panel left over: integrate the quadratic through the last
        // three nodes over the final panel only.
        let xs = [x[n - 3], x[n - 2], x[n - 1]];
        let ws = lagrange_quad_integral(x[n - 2], x[n - 1], xs);
        for k in 0..3 {
            w[n - 3 + k] += ws[k];
        }
    }
    w
}

pub fn integrate(x: &[f64], f: &[f64]) -> f64 {
    quad_weights(x)
        .iter()
        .zip(f)
        .map(|(w, v)| w * v)
        .sum()
}

/// Cumulative integral from `x[0]`, panel by panel through the local
/// quadratic interpolant; `out[i] = ∫_{x0}^{xi} f`.
pub fn cumulative_integral(x: &[f64], f: &[f64]) -> Vec<f64> {
    let n = x.len();
    assert!(n >= 3);
    let mut out = vec![0.0; n];
    for i in 1..n {
        let c = if i == 1 { 1 } else { (i - 1).min(n - 2) };
        let xs = [x[c - 1], x[c], x[c + 1]];
        let ws = lagrange_quad_integral(x[i - 1], x[i], xs);
        out[i] = out[i - 1] + ws[0] * f[c - 1] + ws[1] * f[c] + ws[2] * f[c + 1];
    }
    out
}

/// Banded matrix stored by diagonals; `kl` sub- and `ku` superdiagonals plus
/// `kl` extra superdiagonals of workspace for pivoting fill-in.
#[derive(Debug, Clone)]
pub struct Banded {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl Banded {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Banded {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> Option<usize> {
        let off = j as isize - i as isize + self.kl as isize;
        if off < 0 || off >= self.width as isize {
            None
        } else {
            Some(i * self.width + off as usize)
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.idx(i, j).map(|k| self.data[k]).unwrap_or(0.0)
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .idx(i, j)
            .unwrap_or_else(|| panic!("entry ({i},{j}) outside band"));
        self.data[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self
            .idx(i, j)
            .unwrap_or_else(|| panic!("entry ({i},{j}) outside band"));
        self.data[k] += v;
    }

    /// Assemble from a stencil operator scaled row-wise by `diag` plus a
    /// diagonal term `shift`.
    pub fn from_stencils(ops: &[(&StencilOp, &[f64])], shift: &[f64]) -> Self {
        let n = ops[0].0.n;
        let kl = ops.iter().map(|(op, _)| op.bandwidth()).max().unwrap();
        let mut m = Banded::zeros(n, kl, kl);
        for (op, scale) in ops {
            for (i, (s, ws)) in op.rows.iter().enumerate() {
                for (k, w) in ws.iter().enumerate() {
                    m.add(i, s + k, scale[i] * w);
                }
            }
        }
        for i in 0..n {
            m.add(i, i, shift[i]);
        }
        m
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            let jlo = i.saturating_sub(self.kl);
            let jhi = (i + self.ku + self.kl).min(self.n - 1);
            let mut acc = 0.0;
            for j in jlo..=jhi {
                acc += self.get(i, j) * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Solve `A x = b` by banded LU with partial pivoting. Consumes a copy
    /// of the band; each call refactors (solves here are O(n·bw²)).
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(b.len(), self.n);
        let mut a = self.clone();
        let mut rhs = b.to_vec();
        let n = self.n;
        let kl = self.kl;
        let reach = self.ku + self.kl; // widest column reach after pivoting
        for k in 0..n {
            // partial pivot among the kl rows below
            let mut piv = k;
            let mut pmax = a.get(k, k).abs();
            for r in k + 1..(k + kl + 1).min(n) {
                let v = a.get(r, k).abs();
                if v > pmax {
                    pmax = v;
                    piv = r;
                }
            }
            if pmax == 0.0 || !pmax.is_finite() {
                return Err(AleError::NumericalDivergence(format!(
                    "singular banded system at row {k} (pivot {pmax})"
                )));
            }
            if piv != k {
                let jhi = (k + reach).min(n - 1);
                for j in k..=jhi {
                    let t = a.get(k, j);
                    let u = a.get(piv, j);
                    a.set(k, j, u);
                    a.set(piv, j, t);
                }
                rhs.swap(k, piv);
            }
            let diag = a.get(k, k);
            for r in k + 1..(k + kl + 1).min(n) {
                let f = a.get(r, k) / diag;
                if f == 0.0 {
                    continue;
                }
                let jhi = (k + reach).min(n - 1);
                for j in k..=jhi {
                    let v = a.get(r, j) - f * a.get(k, j);
                    a.set(r, j, v);
                }
                rhs[r] -= f * rhs[k];
            }
        }
        // back substitution
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let jhi = (i + reach).min(n - 1);
            let mut acc = rhs[i];
            for j in i + 1..=jhi {
                acc -= a.get(i, j) * x[j];
            }
            x[i] = acc / a.get(i, i);
        }
        Ok(x)
    }

    /// Product of two banded operators (used to compose stencil matrices).
    pub fn compose(&self, other: &Banded) -> Banded {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let kl = self.kl + other.kl;
        let mut out = Banded::zeros(n, kl, kl);
        for i in 0..n {
            let klo = i.saturating_sub(self.kl);
            let khi = (i + self.ku + self.kl).min(n - 1);
            for k in klo..=khi {
                let aik = self.get(i, k);
                if aik == 0.0 {
                    continue;
                }
                let jlo = k.saturating_sub(other.kl);
                let jhi = (k + other.ku + other.kl).min(n - 1);
                for j in jlo..=jhi {
                    let v = other.get(k, j);
                    if v != 0.0 {
                        out.add(i, j, aik * v);
                    }
                }
            }
        }
        out
    }

    pub fn from_stencil(op: &StencilOp) -> Banded {
        let kl = op.bandwidth();
        let mut m = Banded::zeros(op.n, kl, kl);
        for (i, (s, ws)) in op.rows.iter().enumerate() {
            for (k, w) in ws.iter().enumerate() {
                m.add(i, s + k, *w);
            }
        }
        m
    }

    pub fn scale_rows(&mut self, d: &[f64]) {
        for i in 0..self.n {
            for off in 0..self.width {
                self.data[i * self.width + off] *= d[i];
            }
        }
    }
}

/// Result of fitting `F(R) = limit + coeff · R^{-kappa}` on a tail sequence.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TailFit {
    pub limit: f64,
    pub coeff: f64,
    pub kappa: f64,
    pub residual: f64,
    pub converged: bool,
}

/// Extrapolate a sequence sampled at geometrically spaced radii to its limit.
/// Sign-alternating increments are reported as non-convergent.
pub fn extrapolate_power_tail(radii: &[f64], values: &[f64]) -> TailFit {
    assert_eq!(radii.len(), values.len());
    let n = values.len();
    assert!(n >= 3);
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    // Already converged: increments at rounding level.
    if diffs.iter().all(|d| d.abs() < 1e-13 * scale) {
        return TailFit {
            limit: values[n - 1],
            coeff: 0.0,
            kappa: f64::INFINITY,
            residual: 0.0,
            converged: true,
        };
    }
    let mut kappas = Vec::new();
    let mut oscillating = false;
    for j in 0..diffs.len() - 1 {
        if diffs[j] * diffs[j + 1] < 0.0 {
            oscillating = true;
        }
        let ratio = diffs[j + 1] / diffs[j];
        if ratio > 0.0 && ratio < 1.0 {
            let q = radii[j + 1] / radii[j];
            kappas.push(-ratio.ln() / q.ln());
        }
    }
    if kappas.is_empty() {
        // No decaying geometric structure; fall back to the last value.
        return TailFit {
            limit: values[n - 1],
            coeff: 0.0,
            kappa: 0.0,
            residual: diffs.last().unwrap().abs(),
            converged: !oscillating && diffs.last().unwrap().abs() < 1e-8 * scale,
        };
    }
    kappas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let kappa = kappas[kappas.len() / 2];
    // Linear least squares for (limit, coeff) with the fitted kappa.
    let mut s_ww = 0.0;
    let mut s_w = 0.0;
    let mut s_fw = 0.0;
    let mut s_f = 0.0;
    for (r, f) in radii.iter().zip(values) {
        let w = r.powf(-kappa);
        s_ww += w * w;
        s_w += w;
        s_fw += f * w;
        s_f += f;
    }
    let m = n as f64;
    let det = m * s_ww - s_w * s_w;
    let (limit, coeff) = if det.abs() < 1e-300 {
        (values[n - 1], 0.0)
    } else {
        ((s_f * s_ww - s_w * s_fw) / det, (m * s_fw - s_w * s_f) / det)
    };
    let residual = radii
        .iter()
        .zip(values)
        .map(|(r, f)| (f - limit - coeff * r.powf(-kappa)).abs())
        .fold(0.0f64, f64::max);
    TailFit {
        limit,
        coeff,
        kappa,
        residual,
        converged: !oscillating,
    }
}

/// Ordinary least squares line fit `y = intercept + slope·x`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_stderr: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - intercept - slope * a;
            e * e
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    let dof = (x.len().max(3) - 2) as f64;
    let slope_stderr = (ss_res / dof / sxx).sqrt();
    LineFit {
        slope,
        intercept,
        r_squared,
        slope_stderr,
    }
}

/// Resampling by local degree-5 Lagrange interpolation (six nearest nodes);
/// linear extension outside the sampled range. Smooth profiles on geometric
/// grids resample far below solver accuracy.
pub fn resample(x: &[f64], f: &[f64], targets: &[f64]) -> Vec<f64> {
    let n = x.len();
    assert!(n >= 6);
    let end_slope_lo = (f[1] - f[0]) / (x[1] - x[0]);
    let end_slope_hi = (f[n - 1] - f[n - 2]) / (x[n - 1] - x[n - 2]);
    targets
        .iter()
        .map(|&t| {
            if t <= x[0] {
                return f[0] + end_slope_lo * (t - x[0]);
            }
            if t >= x[n - 1] {
                return f[n - 1] + end_slope_hi * (t - x[n - 1]);
            }
            let hi = x.partition_point(|&v| v <= t); // x[hi-1] <= t < x[hi]
            let start = hi.saturating_sub(3).min(n - 6);
            let xs = &x[start..start + 6];
            let fs = &f[start..start + 6];
            let mut acc = 0.0;
            for k in 0..6 {
                let mut l = fs[k];
                for j in 0..6 {
                    if j != k {
                        l *= (t - xs[j]) / (xs[k] - xs[j]);
                    }
                }
                acc += l;
            }
            acc
        })
        .collect()
}

/// Quintic smoothstep: 0 for `x ≤ 0`, 1 for `x ≥ 1`, C² across the joints.
pub fn smoothstep5(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
    }
}

pub fn smoothstep5_d1(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        x * x * (30.0 - 60.0 * x + 30.0 * x * x)
    }
}

pub fn smoothstep5_d2(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        x * (60.0 - 180.0 * x + 120.0 * x * x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric(a: f64, b: f64, n: usize) -> Vec<f64> {
        let q = (b / a).powf(1.0 / (n - 1) as f64);
        (0..n).map(|i| a * q.powi(i as i32)).collect()
    }

    #[test]
    fn derivative_stencils_are_second_order() {
        // Oracle: exact derivatives of exp(-x) on refining geometric grids.
        let mut errs = Vec::new();
        for &m in &[129usize, 257, 513] {
            let x = geometric(1.0, 20.0, m);
            let f: Vec<f64> = x.iter().map(|r| (-r).exp()).collect();
            let d1 = deriv1(&x, &f);
            let d2 = deriv2(&x, &f);
            let e1 = x
                .iter()
                .zip(&d1)
                .map(|(r, d)| (d + (-r).exp()).abs())
                .fold(0.0f64, f64::max);
            let e2 = x
                .iter()
                .zip(&d2)
                .map(|(r, d)| (d - (-r).exp()).abs())
                .fold(0.0f64, f64::max);
            errs.push((e1, e2));
        }
        // halving spacing divides the error by ≈ 4
        assert!(errs[0].0 / errs[1].0 > 3.0);
        assert!(errs[1].0 / errs[2].0 > 3.0);
        assert!(errs[0].1 / errs[1].1 > 3.0);
        assert!(errs[1].1 / errs[2].1 > 3.0);
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        let x = geometric(1e-3, 30.0, 2049);
        let f: Vec<f64> = x.iter().map(|r| r * r * r * (-2.0 * r * r).exp()).collect();
        // ∫_0^∞ r³ exp(-2r²) dr = 1/8; the missing [0, 1e-3) piece is ~1e-13.
        let v = integrate(&x, &f);
        assert!((v - 0.125).abs() < 1e-9, "got {v}");
    }

    #[test]
    fn banded_solver_roundtrip() {
        let n = 200;
        let mut a = Banded::zeros(n, 2, 2);
        for i in 0..n {
            a.set(i, i, 4.0 + (i as f64 * 0.37).sin());
            if i + 1 < n {
                a.set(i, i + 1, -1.3);
                a.set(i + 1, i, 0.7);
            }
            if i + 2 < n {
                a.set(i, i + 2, 0.31);
                a.set(i + 2, i, -0.11);
            }
        }
        let xtrue: Vec<f64> = (0..n).map(|i| ((i * i) as f64 * 0.01).cos()).collect();
        let b = a.matvec(&xtrue);
        let x = a.solve(&b).unwrap();
        let err = x
            .iter()
            .zip(&xtrue)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0f64, f64::max);
        assert!(err < 1e-11, "err {err}");
    }

    #[test]
    fn banded_compose_matches_dense_product() {
        let op = deriv1_op(&geometric(1.0, 10.0, 40));
        let d = Banded::from_stencil(&op);
        let dd = d.compose(&d);
        let v: Vec<f64> = (0..40).map(|i| (i as f64 / 7.0).sin()).collect();
        let lhs = dd.matvec(&v);
        let rhs = d.matvec(&d.matvec(&v));
        for (a, b) in lhs.iter().zip(&rhs) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn tail_extrapolation_recovers_limit() {
        let radii: Vec<f64> = (0..10).map(|k| 50.0 * 1.5f64.powi(k)).collect();
        let vals: Vec<f64> = radii.iter().map(|r| 3.25 + 7.0 * r.powf(-1.7)).collect();
        let fit = extrapolate_power_tail(&radii, &vals);
        assert!(fit.converged);
        assert!((fit.limit - 3.25).abs() < 1e-8);
        assert!((fit.kappa - 1.7).abs() < 1e-6);
    }

    #[test]
    fn tail_extrapolation_flags_oscillation() {
        let radii: Vec<f64> = (0..8).map(|k| 10.0 * 2.0f64.powi(k)).collect();
        let vals: Vec<f64> = (0..8).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let fit = extrapolate_power_tail(&radii, &vals);
        assert!(!fit.converged);
    }

    #[test]
    fn resample_is_high_order() {
        let x = geometric(1.0, 100.0, 513);
        let f: Vec<f64> = x.iter().map(|r| 1.0 + r.powf(-2.0)).collect();
        let t: Vec<f64> = x.iter().map(|r| (r * 1.013).min(100.0)).collect();
        let g = resample(&x, &f, &t);
        for (ti, gi) in t.iter().zip(&g) {
            assert!((gi - (1.0 + ti.powf(-2.0))).abs() < 1e-10);
        }
    }

    #[test]
    fn cumulative_integral_matches_primitive() {
        let x = geometric(1.0, 1e3, 1025);
        let f: Vec<f64> = x.iter().map(|r| r.powf(-1.5)).collect();
        let cum = cumulative_integral(&x, &f);
        for (i, &xi) in x.iter().enumerate() {
            let exact = 2.0 * (1.0 - xi.powf(-0.5));
            assert!((cum[i] - exact).abs() < 1e-8, "at {xi}: {} vs {exact}", cum[i]);
        }
    }
}
