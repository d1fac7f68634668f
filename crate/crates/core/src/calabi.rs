//! The U(n)-invariant Ricci-flat Kähler ALE metric on the total space of
//! O(-n) -> P^{n-1}, written on C^n \ {0} with Kähler potential F(|z|^2).
//!
//! Real coordinates on C^n are ordered (x1, y1, x2, y2, ...). The standard
//! complex structure J sends d/dx_a to d/dy_a; with u = |x|^2 the Cartesian
//! metric is
//!
//! g = F'(u) g_euc + F''(u) (x x^T + Jx Jx^T).
//!
//! In radial form g = A^2 dr^2 + B g_FS + C^2 theta^2, where theta is the
//! Hopf connection form (Jx . dx) / r^2 and g_FS the pulled-back Fubini–Study
//! metric (g_euc - dr^2 - r^2 theta^2) / r^2.

use std::sync::Arc;

use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::fit::{loglog_fit, FitOutcome};
use crate::tensor_core::{curvature, ChartMetric, Domain, Tensor, TensorField, Valence};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalabiParams {
    pub n: usize,
    pub a: f64,
}

impl CalabiParams {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_a(n, 1.0)
    }

    pub fn with_a(n: usize, a: f64) -> Result<Self> {
        if n < 2 {
            return Err(GeomError::BadComplexDimension(n));
        }
        if !(a > 0.0) {
            return Err(GeomError::InvalidConfig(format!("a must be positive, got {a}")));
        }
        Ok(CalabiParams { n, a })
    }

    pub fn real_dim(&self) -> usize {
        2 * self.n
    }
}

/// (F'(u), F''(u)).
pub fn potential_derivs(u: f64, params: &CalabiParams) -> Result<(f64, f64)> {
    if !(u > 0.0) {
        return Err(GeomError::NonPositiveU(u));
    }
    let n = params.n as f64;
    let s = params.a.powf(n) + u.powf(n);
    let root = s.powf(1.0 / n);
    let f1 = root / u;
    let f2 = -params.a.powf(n) * root / (s * u * u);
    Ok((f1, f2))
}

/// F' + uF'' = u^{n−1}(a^n + u^n)^{(1−n)/n}, the eigenvalue of g on span{x, Jx}.
pub fn radial_eigenvalue(u: f64, params: &CalabiParams) -> Result<f64> {
    if !(u > 0.0) {
        return Err(GeomError::NonPositiveU(u));
    }
    let n = params.n as f64;
    let s = params.a.powf(n) + u.powf(n);
    Ok(u.powf(n - 1.0) * s.powf((1.0 - n) / n))
}

/// |(F')^{n-1}(F' + u F'') - 1| with F' + uF'' taken from
/// [`radial_eigenvalue`]. Summing F' and uF'' directly loses about
/// log10((a^n + u^n)/u^n) digits to cancellation for small u.
pub fn monge_ampere_residual(u: f64, params: &CalabiParams) -> Result<f64> {
    let (f1, _) = potential_derivs(u, params)?;
    Ok((f1.powi(params.n as i32 - 1) * radial_eigenvalue(u, params)? - 1.0).abs())
}

/// The same residual with F' + uF'' summed directly.
pub fn monge_ampere_residual_naive(u: f64, params: &CalabiParams) -> Result<f64> {
    let (f1, f2) = potential_derivs(u, params)?;
    Ok((f1.powi(params.n as i32 - 1) * (f1 + u * f2) - 1.0).abs())
}

/// Hermitian matrix G with g(X, Y) = Re sum_ij G_ij conj(X_i) Y_j,
/// G_ij = F' δ_ij + F'' z_i conj(z_j).
pub fn calabi_complex_components(z: &[Complex<f64>], params: &CalabiParams) -> Result<DMatrix<Complex<f64>>> {
    if z.len() != params.n {
        return Err(GeomError::DimensionMismatch { expected: params.n, found: z.len() });
    }
    let u: f64 = z.iter().map(|c| c.norm_sqr()).sum();
    if u == 0.0 {
        return Err(GeomError::ZeroPoint);
    }
    let (f1, f2) = potential_derivs(u, params)?;
    Ok(DMatrix::from_fn(params.n, params.n, |i, j| {
        let d = if i == j { f1 } else { 0.0 };
        Complex::new(d, 0.0) + z[i] * z[j].conj() * f2
    }))
}

/// The simplified display ((a^n+u^n)^{1/n}/u)(δ_ij - z_i conj(z_j) / (u(1 + u^n))),
/// valid for a = 1.
pub fn calabi_complex_components_simplified(z: &[Complex<f64>], n: usize) -> DMatrix<Complex<f64>> {
    let u: f64 = z.iter().map(|c| c.norm_sqr()).sum();
    let nf = n as f64;
    let pre = (1.0 + u.powf(nf)).powf(1.0 / nf) / u;
    let corr = 1.0 / (u * (1.0 + u.powf(nf)));
    DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j { 1.0 } else { 0.0 };
        (Complex::new(d, 0.0) - z[i] * z[j].conj() * corr) * pre
    })
}

/// Real 2n x 2n matrix of the quadratic form Re conj(X)^T G Y.
pub fn complex_to_real(gc: &DMatrix<Complex<f64>>) -> DMatrix<f64> {
    let n = gc.nrows();
    let basis = |p: usize| -> (usize, Complex<f64>) {
        if p.is_multiple_of(2) {
            (p / 2, Complex::new(1.0, 0.0))
        } else {
            (p / 2, Complex::new(0.0, 1.0))
        }
    };
    DMatrix::from_fn(2 * n, 2 * n, |p, q| {
        let (i, xi) = basis(p);
        let (j, yj) = basis(q);
        (xi.conj() * gc[(i, j)] * yj).re
    })
}

/// Real coordinates (x1, y1, ...) to complex coordinates.
pub fn real_to_complex(x: &[f64]) -> Vec<Complex<f64>> {
    x.chunks(2).map(|c| Complex::new(c[0], c[1])).collect()
}

/// Standard complex structure: J d/dx_a = d/dy_a.
pub fn complex_structure(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for a in 0..n {
        j[(2 * a + 1, 2 * a)] = 1.0;
        j[(2 * a, 2 * a + 1)] = -1.0;
    }
    j
}

/// Jx for the standard complex structure.
pub fn apply_j(x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for a in 0..x.len() / 2 {
        out[2 * a] = -x[2 * a + 1];
        out[2 * a + 1] = x[2 * a];
    }
    out
}

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Cartesian components of the Calabi metric.
pub fn cartesian_metric(x: &[f64], params: &CalabiParams) -> Result<DMatrix<f64>> {
    let u = norm_sq(x);
    let (f1, _) = potential_derivs(u, params)?;
    let lr = radial_eigenvalue(u, params)?;
    let jx = apply_j(x);
    let m = x.len();
    // f1 on the complement of span{x, Jx}, lr on it; avoids cancellation near the zero section.
    Ok(DMatrix::from_fn(m, m, |i, j| {
        let d = if i == j { f1 } else { 0.0 };
        d + (lr - f1) * (x[i] * x[j] + jx[i] * jx[j]) / u
    }))
}

/// The Calabi metric on the shell r_min <= |x| <= r_max of R^{2n}.
pub fn calabi_cartesian_chart(params: &CalabiParams, r_min: f64, r_max: f64) -> Result<ChartMetric> {
    if !(r_min > 0.0) {
        return Err(GeomError::TouchesZeroSection(r_min));
    }
    let p = *params;
    Ok(ChartMetric::new(
        format!("calabi-cartesian-n{}", p.n),
        p.real_dim(),
        Domain::Shell { r_min, r_max },
        r_min.min(1.0),
        move |x| cartesian_metric(x, &p).expect("chart domain excludes the origin"),
    ))
}

/// Frame coefficients of the radial form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrameQuantities {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

pub fn frame_quantities(r: f64, n: usize) -> Result<FrameQuantities> {
    if !(r > 0.0) {
        return Err(GeomError::NonPositiveRadius(r));
    }
    let nf = n as f64;
    let s = 1.0 + r.powf(2.0 * nf);
    Ok(FrameQuantities {
        a: r.powf(nf - 1.0) * s.powf(-(nf - 1.0) / (2.0 * nf)),
        b: s.powf(1.0 / nf),
        c: r.powf(nf) * s.powf((1.0 - nf) / (2.0 * nf)),
    })
}

/// Metric in Hopf coordinates (r, psi, w), w in C^{n-1} stored as real pairs,
/// with z = r e^{i psi} (1, w) / sqrt(1 + |w|^2).
pub fn radial_metric(q: &[f64], n: usize) -> Result<DMatrix<f64>> {
    let r = q[0];
    if !(r > 0.0) {
        return Err(GeomError::TouchesZeroSection(r));
    }
    let fq = frame_quantities(r, n)?;
    let w = &q[2..];
    let k = w.len();
    let s = 1.0 + norm_sq(w);
    let jw = apply_j(w);
    let dim = 2 * n;
    let mut g = DMatrix::zeros(dim, dim);
    g[(0, 0)] = fq.a * fq.a;
    let c2 = fq.c * fq.c;
    g[(1, 1)] = c2;
    for i in 0..k {
        g[(1, 2 + i)] = c2 * jw[i] / s;
        g[(2 + i, 1)] = c2 * jw[i] / s;
        for j in 0..k {
            let d = if i == j { s } else { 0.0 };
            let fs = (d - w[i] * w[j] - jw[i] * jw[j]) / (s * s);
            g[(2 + i, 2 + j)] = c2 * jw[i] * jw[j] / (s * s) + fq.b * fs;
        }
    }
    Ok(g)
}

/// The radial-form chart on r in [r_min, r_max], |psi| <= pi, |w_i| <= w_max.
pub fn calabi_radial_chart(params: &CalabiParams, r_min: f64, r_max: f64, w_max: f64) -> Result<ChartMetric> {
    if !(r_min > 0.0) {
        return Err(GeomError::TouchesZeroSection(r_min));
    }
    let n = params.n;
    let dim = 2 * n;
    let mut lo = vec![r_min, -std::f64::consts::PI];
    let mut hi = vec![r_max, std::f64::consts::PI];
    lo.extend(std::iter::repeat_n(-w_max, dim - 2));
    hi.extend(std::iter::repeat_n(w_max, dim - 2));
    Ok(ChartMetric::new(format!("calabi-radial-n{n}"), dim, Domain::Box { lo, hi }, r_min.min(1.0), move |q| {
        radial_metric(q, n).expect("chart domain excludes r <= 0")
    }))
}

/// Chart adapted to radius r. Below r = 1 it is the Hopf chart with
/// regularity scale (0.9r)^n/4, since the fibre circle has length ∝ r^n
/// there; from r = 1 on it is a Cartesian shell whose features scale with r.
pub fn adapted_chart(params: &CalabiParams, r: f64) -> Result<ChartMetric> {
    if !(r > 0.0) {
        return Err(GeomError::NonPositiveRadius(r));
    }
    if r < 1.0 {
        let mut c = calabi_radial_chart(params, 0.9 * r, 1.2, 2.0)?;
        c.regularity_scale = (0.9 * r).powi(params.n as i32) / 4.0;
        Ok(c)
    } else {
        let mut c = calabi_cartesian_chart(params, 0.9 * r, 1.1 * r)?;
        c.regularity_scale = 0.9 * r;
        Ok(c)
    }
}

/// |Ric|/|Rm| at radius r in [`adapted_chart`] with its default step. `dir`
/// holds 2n values in [−1, 1) that fix the angular position.
pub fn ricci_flatness_ratio(params: &CalabiParams, r: f64, dir: &[f64]) -> Result<f64> {
    let m = params.real_dim();
    if dir.len() != m {
        return Err(GeomError::DimensionMismatch { expected: m, found: dir.len() });
    }
    let chart = adapted_chart(params, r)?;
    let p: Vec<f64> = if r < 1.0 {
        let mut q = vec![r, 3.0 * dir[0]];
        q.extend_from_slice(&dir[1..m - 1]);
        q
    } else {
        let s = norm_sq(dir).sqrt();
        if s == 0.0 {
            return Err(GeomError::ZeroPoint);
        }
        dir.iter().map(|c| c * r / s).collect()
    };
    let cb = curvature(&chart, &p, chart.default_step())?;
    Ok(cb.ricci_norm() / cb.riemann_norm())
}

/// Hopf parametrization (r, psi, w) -> x in R^{2n}.
pub fn hopf_point(q: &[f64]) -> Vec<f64> {
    let r = q[0];
    let psi = q[1];
    let w = &q[2..];
    let s = (1.0 + norm_sq(w)).sqrt();
    let phase = Complex::new(psi.cos(), psi.sin()) * (r / s);
    let mut out = Vec::with_capacity(w.len() + 2);
    out.push(phase.re);
    out.push(phase.im);
    for pair in w.chunks(2) {
        let v = phase * Complex::new(pair[0], pair[1]);
        out.push(v.re);
        out.push(v.im);
    }
    out
}

/// Max relative discrepancy between the radial chart and the pullback of
/// the complex-potential form along the Hopf parametrization at `q`.
pub fn radial_vs_complex_residual(params: &CalabiParams, q: &[f64]) -> Result<f64> {
    let dim = params.real_dim();
    let h = 1e-5;
    let mut jac = DMatrix::zeros(dim, dim);
    let mut qq = q.to_vec();
    for b in 0..dim {
        qq[b] = q[b] + h;
        let xp = hopf_point(&qq);
        qq[b] = q[b] - h;
        let xm = hopf_point(&qq);
        qq[b] = q[b];
        for a in 0..dim {
            jac[(a, b)] = (xp[a] - xm[a]) / (2.0 * h);
        }
    }
    let x = hopf_point(q);
    let gc = complex_to_real(&calabi_complex_components(&real_to_complex(&x), params)?);
    let pulled = jac.transpose() * gc * jac;
    let radial = radial_metric(q, params.n)?;
    Ok((&pulled - &radial).abs().max() / radial.abs().max())
}

/// Sample directions on S^{m-1}: coordinate axes, diagonals and a few fixed
/// generic vectors.
pub fn probe_directions(m: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..m {
        let mut e = vec![0.0; m];
        e[i] = 1.0;
        out.push(e);
    }
    out.push(vec![1.0 / (m as f64).sqrt(); m]);
    for k in 1..=4 {
        let v: Vec<f64> = (0..m).map(|i| ((i + 1) as f64 * 0.731 * k as f64 + 0.2).sin()).collect();
        let s = norm_sq(&v).sqrt();
        out.push(v.into_iter().map(|c| c / s).collect());
    }
    out
}

/// sup over probe directions of max |g_ij - δ_ij| at radius r.
pub fn sup_deviation_from_euclidean(chart: &ChartMetric, r: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for d in probe_directions(chart.dim) {
        let p: Vec<f64> = d.iter().map(|c| c * r).collect();
        let g = chart.metric(&p)?;
        let dev = (g - DMatrix::<f64>::identity(chart.dim, chart.dim)).abs().max();
        worst = worst.max(dev);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AleFit {
    pub radii: Vec<f64>,
    pub deviations: Vec<f64>,
    pub outcome: FitOutcome,
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.len() < 8 {
        return Err(GeomError::InsufficientRadii(format!("need >= 8 radii, got {}", radii.len())));
    }
    if radii.iter().any(|r| *r < 2.0) {
        return Err(GeomError::InsufficientRadii("every radius must be >= 2".into()));
    }
    let lo = radii.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = radii.iter().cloned().fold(0.0, f64::max);
    if hi < 10.0 * lo {
        return Err(GeomError::InsufficientRadii("radii must span at least a decade".into()));
    }
    Ok(())
}

/// Log–log slope of sup|g - g_euc| against r for an arbitrary Cartesian chart.
pub fn ale_decay_fit_chart(chart: &ChartMetric, radii: &[f64]) -> Result<AleFit> {
    check_radii(radii)?;
    let deviations = radii.iter().map(|r| sup_deviation_from_euclidean(chart, *r)).collect::<Result<Vec<_>>>()?;
    let outcome = loglog_fit(radii, &deviations);
    Ok(AleFit { radii: radii.to_vec(), deviations, outcome })
}

pub fn ale_decay_fit(params: &CalabiParams, radii: &[f64]) -> Result<AleFit> {
    check_radii(radii)?;
    let hi = radii.iter().cloned().fold(0.0, f64::max);
    let chart = calabi_cartesian_chart(params, 1.0, 2.0 * hi)?;
    ale_decay_fit_chart(&chart, radii)
}

// Frame one-forms and 2-forms on the Cartesian chart.

/// dr = x . dx / r.
pub fn dr_form(x: &[f64]) -> Vec<f64> {
    let r = norm_sq(x).sqrt();
    x.iter().map(|v| v / r).collect()
}

/// theta = Jx . dx / r^2.
pub fn theta_form(x: &[f64]) -> Vec<f64> {
    let u = norm_sq(x);
    apply_j(x).into_iter().map(|v| v / u).collect()
}

fn wedge(a: &[f64], b: &[f64]) -> Tensor {
    let m = a.len();
    let mut t = Tensor::zeros(m, Valence::COVARIANT2);
    for i in 0..m {
        for j in 0..m {
            t.set(&[i, j], a[i] * b[j] - a[j] * b[i]);
        }
    }
    t
}

fn outer(a: &[f64], b: &[f64]) -> Tensor {
    let m = a.len();
    let mut t = Tensor::zeros(m, Valence::COVARIANT2);
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            t.set(&[i, j], ai * bj);
        }
    }
    t
}

/// dr∧theta as a 2-form (α∧β = α⊗β − β⊗α).
pub fn dr_wedge_theta(x: &[f64]) -> Tensor {
    wedge(&dr_form(x), &theta_form(x))
}

/// ω = ½ dθ = −J_ab / r^2 − (1/r) dr∧θ, the pulled-back Fubini–Study form.
pub fn omega_fs(x: &[f64]) -> Tensor {
    let m = x.len();
    let u = norm_sq(x);
    let r = u.sqrt();
    let j = complex_structure(m / 2);
    let drt = dr_wedge_theta(x);
    let mut t = Tensor::zeros(m, Valence::COVARIANT2);
    for a in 0..m {
        for b in 0..m {
            t.set(&[a, b], -j[(a, b)] / u - drt.get(&[a, b]) / r);
        }
    }
    t
}

/// Pulled-back Fubini–Study metric (g_euc − dr² − r²θ²)/r².
pub fn g_fs(x: &[f64]) -> Tensor {
    let m = x.len();
    let u = norm_sq(x);
    let dr = dr_form(x);
    let th = theta_form(x);
    let mut t = Tensor::zeros(m, Valence::COVARIANT2);
    for a in 0..m {
        for b in 0..m {
            let d = if a == b { 1.0 } else { 0.0 };
            t.set(&[a, b], (d - dr[a] * dr[b] - u * th[a] * th[b]) / u);
        }
    }
    t
}

/// Barred frame objects dr̄ = A dr, θ̄ = C θ, ω̄ = B ω, ḡ_FS = B g_FS.
#[derive(Debug, Clone)]
pub struct BarredFrame {
    pub dr_bar: Vec<f64>,
    pub theta_bar: Vec<f64>,
    pub omega_bar: Tensor,
    pub g_fs_bar: Tensor,
}

pub fn barred_frame(x: &[f64], n: usize) -> Result<BarredFrame> {
    let r = norm_sq(x).sqrt();
    let fq = frame_quantities(r, n)?;
    Ok(BarredFrame {
        dr_bar: dr_form(x).into_iter().map(|v| v * fq.a).collect(),
        theta_bar: theta_form(x).into_iter().map(|v| v * fq.c).collect(),
        omega_bar: omega_fs(x).scaled(fq.b),
        g_fs_bar: g_fs(x).scaled(fq.b),
    })
}

pub fn outer_product(a: &[f64], b: &[f64]) -> Tensor {
    outer(a, b)
}

pub fn wedge_product(a: &[f64], b: &[f64]) -> Tensor {
    wedge(a, b)
}

/// dr̄ as a one-form field on a Cartesian Calabi chart.
pub fn dr_bar_field(chart: Arc<ChartMetric>, n: usize) -> TensorField {
    TensorField::new_fallible(chart, Valence::ONE_FORM, move |x| Ok(Tensor::one_form(&barred_frame(x, n)?.dr_bar)))
}
