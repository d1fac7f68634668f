//! Natural operators on symmetric 2-tensors and forms, and the decaying
//! Einstein deformation o of the Calabi metric together with the harmonic
//! (1,1)-form Ω it comes from.
//!
//! Conventions:
//! - δh_i = −g^{jk} ∇_j h_ki, δω = −g^{ij} ∇_i ω_j
//! - δ*ω_ij = ½(∇_i ω_j + ∇_j ω_i)
//! - K(ω) = δ*ω + (1/m) δω g
//! - B(h) = δh + ½ d tr h
//! - ∇*∇ = −g^{ab} ∇_a ∇_b, P(h) = ½ ∇*∇ h − ring-R(h)
//! - Δ_H f = ∇*∇ f on functions, P₀ f = Δ_H f − 2Λ f

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::calabi::{self, barred_frame, complex_structure, frame_quantities, CalabiParams};
use crate::error::Result;
use crate::fit::{loglog_fit, FitOutcome};
use crate::tensor_core::{
    covariant_derivative, curvature, inner, nabla, norm, partial_derivative, ChartMetric, Tensor, TensorField, Valence,
};

fn metric_pair(chart: &ChartMetric, p: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let g = chart.metric(p)?;
    let ginv = chart.inverse_metric(p)?;
    Ok((g, ginv))
}

/// g^{ij} T_ij for a covariant 2-tensor.
fn trace_with(ginv: &DMatrix<f64>, t: &Tensor) -> f64 {
    let m = t.dim();
    let mut acc = 0.0;
    for i in 0..m {
        for j in 0..m {
            acc += ginv[(i, j)] * t.get(&[i, j]);
        }
    }
    acc
}

pub fn trace(chart: &ChartMetric, p: &[f64], h: &Tensor) -> Result<f64> {
    Ok(trace_with(&chart.inverse_metric(p)?, h))
}

/// tr_g h as a scalar field.
pub fn trace_field(h: &TensorField) -> Result<TensorField> {
    h.expect_valence(Valence::COVARIANT2)?;
    let f = h.clone();
    let m = h.chart.dim;
    Ok(TensorField::new_fallible(h.chart.clone(), Valence::SCALAR, move |p| {
        Ok(Tensor::scalar(m, trace(&f.chart, p, &f.eval(p)?)?))
    }))
}

/// (δh)_i = −g^{jk} ∇_j h_ki.
pub fn divergence(h: &TensorField, p: &[f64], step: f64) -> Result<Tensor> {
    h.expect_valence(Valence::COVARIANT2)?;
    let d = covariant_derivative(h, p, step)?;
    let ginv = h.chart.inverse_metric(p)?;
    let m = h.chart.dim;
    let mut out = vec![0.0; m];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for j in 0..m {
            for k in 0..m {
                acc += ginv[(j, k)] * d.get(&[j, k, i]);
            }
        }
        *o = -acc;
    }
    Ok(Tensor::one_form(&out))
}

pub fn divergence_field(h: &TensorField, step: f64) -> Result<TensorField> {
    h.expect_valence(Valence::COVARIANT2)?;
    let f = h.clone();
    Ok(TensorField::new_fallible(h.chart.clone(), Valence::ONE_FORM, move |p| divergence(&f, p, step)))
}

/// δω = −g^{ij} ∇_i ω_j.
pub fn codifferential_one_form(w: &TensorField, p: &[f64], step: f64) -> Result<f64> {
    w.expect_valence(Valence::ONE_FORM)?;
    let d = covariant_derivative(w, p, step)?;
    Ok(-trace_with(&w.chart.inverse_metric(p)?, &d))
}

/// δ*ω_ij = ½(∇_i ω_j + ∇_j ω_i).
pub fn delta_star(w: &TensorField, p: &[f64], step: f64) -> Result<Tensor> {
    w.expect_valence(Valence::ONE_FORM)?;
    let d = covariant_derivative(w, p, step)?;
    Ok(symmetrize(&d))
}

fn symmetrize(d: &Tensor) -> Tensor {
    let m = d.dim();
    let mut out = Tensor::zeros(m, Valence::COVARIANT2);
    for i in 0..m {
        for j in 0..m {
            out.set(&[i, j], 0.5 * (d.get(&[i, j]) + d.get(&[j, i])));
        }
    }
    out
}

pub fn delta_star_field(w: &TensorField, step: f64) -> Result<TensorField> {
    w.expect_valence(Valence::ONE_FORM)?;
    let f = w.clone();
    Ok(TensorField::new_fallible(w.chart.clone(), Valence::COVARIANT2, move |p| delta_star(&f, p, step)))
}

/// K(ω) = δ*ω + (1/m) δω g, the conformal Killing operator.
pub fn conformal_killing_k(w: &TensorField, p: &[f64], step: f64) -> Result<Tensor> {
    w.expect_valence(Valence::ONE_FORM)?;
    let d = covariant_derivative(w, p, step)?;
    let (g, ginv) = metric_pair(&w.chart, p)?;
    let m = w.chart.dim;
    let div = -trace_with(&ginv, &d);
    symmetrize(&d).axpy(div / m as f64, &Tensor::from_matrix(&g))
}

/// B(h) = δh + ½ d(tr h).
pub fn bianchi_b(h: &TensorField, p: &[f64], step: f64) -> Result<Tensor> {
    let div = divergence(h, p, step)?;
    let tr = trace_field(h)?;
    let dtr = partial_derivative(&tr, p, step)?;
    div.axpy(0.5, &dtr)
}

pub fn bianchi_field(h: &TensorField, step: f64) -> Result<TensorField> {
    h.expect_valence(Valence::COVARIANT2)?;
    let f = h.clone();
    Ok(TensorField::new_fallible(h.chart.clone(), Valence::ONE_FORM, move |p| bianchi_b(&f, p, step)))
}

/// ∇*∇T = −g^{ab} ∇_a ∇_b T for a covariant tensor field.
pub fn rough_laplacian(t: &TensorField, p: &[f64], step: f64) -> Result<Tensor> {
    let v = t.valence;
    let dd = covariant_derivative(&nabla(t, step), p, step)?;
    let ginv = t.chart.inverse_metric(p)?;
    let m = t.chart.dim;
    let inner_len = m.pow(v.lower as u32);
    let mut out = Tensor::zeros(m, v);
    for k in 0..inner_len {
        let mut acc = 0.0;
        for a in 0..m {
            for b in 0..m {
                acc += ginv[(a, b)] * dd.data()[(a * m + b) * inner_len + k];
            }
        }
        out.data_mut()[k] = -acc;
    }
    Ok(out)
}

/// ring-R(h)_ij = R_ikjl h^{kl}.
pub fn ring_r(h: &TensorField, p: &[f64], step: f64) -> Result<Tensor> {
    h.expect_valence(Valence::COVARIANT2)?;
    let cb = curvature(&h.chart, p, step)?;
    Ok(Tensor::from_matrix(&cb.ring_r(&h.eval(p)?.to_matrix()?)))
}

/// The two pieces ½∇*∇h and ring-R(h) of P(h).
pub fn lichnerowicz_parts(h: &TensorField, p: &[f64], step: f64) -> Result<(Tensor, Tensor)> {
    h.expect_valence(Valence::COVARIANT2)?;
    let lap = rough_laplacian(h, p, step)?.scaled(0.5);
    let rr = ring_r(h, p, step)?;
    Ok((lap, rr))
}

/// P(h) = ½∇*∇h − ring-R(h).
pub fn lichnerowicz_p(h: &TensorField, p: &[f64], step: f64) -> Result<Tensor> {
    let (lap, rr) = lichnerowicz_parts(h, p, step)?;
    lap.sub(&rr)
}

/// P₀ f = Δ_H f − 2Λ f.
pub fn p0_function(f: &TensorField, lambda: f64, p: &[f64], step: f64) -> Result<f64> {
    f.expect_valence(Valence::SCALAR)?;
    Ok(rough_laplacian(f, p, step)?.value() - 2.0 * lambda * f.eval(p)?.value())
}

/// (dΩ)_abc = ∂_a Ω_bc + ∂_b Ω_ca + ∂_c Ω_ab.
pub fn exterior_derivative_2form(w: &TensorField, p: &[f64], step: f64) -> Result<Tensor> {
    w.expect_valence(Valence::COVARIANT2)?;
    w.chart.check_point(p, step)?;
    let d = partial_derivative(w, p, step)?;
    let m = w.chart.dim;
    let mut out = Tensor::zeros(m, Valence::covariant(3));
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                out.set(&[a, b, c], d.get(&[a, b, c]) + d.get(&[b, c, a]) + d.get(&[c, a, b]));
            }
        }
    }
    Ok(out)
}

/// (δΩ)_b = −g^{ac} ∇_a Ω_cb.
pub fn codifferential_2form(w: &TensorField, p: &[f64], step: f64) -> Result<Tensor> {
    divergence(w, p, step)
}

// Closed-form deformation objects on the Cartesian Calabi chart.

fn one_plus(x: &[f64], n: usize) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    1.0 + r2.powi(n as i32)
}

/// o = (1/(1+r^{2n}))(−ḡ_FS + (n−1) dr̄⊗dr̄ + (n−1) θ̄⊗θ̄).
pub fn deformation_tensor(x: &[f64], n: usize) -> Result<Tensor> {
    let f = barred_frame(x, n)?;
    let k = n as f64 - 1.0;
    let t = f
        .g_fs_bar
        .scaled(-1.0)
        .axpy(k, &calabi::outer_product(&f.dr_bar, &f.dr_bar))?
        .axpy(k, &calabi::outer_product(&f.theta_bar, &f.theta_bar))?;
    Ok(t.scaled(1.0 / one_plus(x, n)))
}

/// The rewrite (1/(1+r^{2n}))(−g_cal + n dr̄⊗dr̄ + n θ̄⊗θ̄).
pub fn deformation_tensor_rewrite(x: &[f64], params: &CalabiParams) -> Result<Tensor> {
    let n = params.n;
    let f = barred_frame(x, n)?;
    let g = Tensor::from_matrix(&calabi::cartesian_metric(x, params)?);
    let t = g
        .scaled(-1.0)
        .axpy(n as f64, &calabi::outer_product(&f.dr_bar, &f.dr_bar))?
        .axpy(n as f64, &calabi::outer_product(&f.theta_bar, &f.theta_bar))?;
    Ok(t.scaled(1.0 / one_plus(x, n)))
}

/// Ω = ((1−n)/(1+r^{2n})) dr̄∧θ̄ + ω̄/(1+r^{2n}); `coefficient` replaces 1−n.
pub fn harmonic_form_with(x: &[f64], n: usize, coefficient: f64) -> Result<Tensor> {
    let f = barred_frame(x, n)?;
    let s = 1.0 / one_plus(x, n);
    calabi::wedge_product(&f.dr_bar, &f.theta_bar).scaled(coefficient * s).axpy(s, &f.omega_bar)
}

pub fn harmonic_form(x: &[f64], n: usize) -> Result<Tensor> {
    harmonic_form_with(x, n, 1.0 - n as f64)
}

/// o(X, Y) = Ω(IX, Y) with I the standard complex structure.
pub fn o_from_omega(params: &CalabiParams, x: &[f64]) -> Result<Tensor> {
    let omega = harmonic_form(x, params.n)?;
    let j = complex_structure(params.n);
    let m = params.real_dim();
    let mut out = Tensor::zeros(m, Valence::COVARIANT2);
    for a in 0..m {
        for b in 0..m {
            let v: f64 = (0..m).map(|c| j[(c, a)] * omega.get(&[c, b])).sum();
            out.set(&[a, b], v);
        }
    }
    Ok(out)
}

/// Euclidean limit o_euc = r^{−2n}(−g_euc + n dr⊗dr + n r² θ⊗θ).
pub fn o_euc(x: &[f64], n: usize) -> Tensor {
    let m = x.len();
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let jx = calabi::apply_j(x);
    let mut t = Tensor::zeros(m, Valence::COVARIANT2);
    let s = r2.powi(-(n as i32));
    for a in 0..m {
        for b in 0..m {
            let d = if a == b { 1.0 } else { 0.0 };
            let v = -d + n as f64 * (x[a] * x[b] + jx[a] * jx[b]) / r2;
            t.set(&[a, b], s * v);
        }
    }
    t
}

pub fn o_field(chart: Arc<ChartMetric>, n: usize) -> TensorField {
    TensorField::new_fallible(chart, Valence::COVARIANT2, move |x| deformation_tensor(x, n))
}

pub fn omega_field(chart: Arc<ChartMetric>, n: usize, coefficient: f64) -> TensorField {
    TensorField::new_fallible(chart, Valence::COVARIANT2, move |x| harmonic_form_with(x, n, coefficient))
}

/// Deterministic sample of points with radii in [r_lo, r_hi].
pub fn sample_points(m: usize, count: usize, r_lo: f64, r_hi: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let r = if count == 1 { r_lo } else { r_lo * (r_hi / r_lo).powf(i as f64 / (count - 1) as f64) };
            let v: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            let s = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            v.into_iter().map(|c| c * r / s).collect()
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct OmegaHarmonicReport {
    pub max_d_relative: f64,
    pub max_delta_relative: f64,
    pub decay: FitOutcome,
}

/// Closedness, co-closedness and decay of Ω (with a chosen dr̄∧θ̄ coefficient).
pub fn verify_omega_harmonic_with(
    params: &CalabiParams,
    points: &[Vec<f64>],
    coefficient: f64,
) -> Result<OmegaHarmonicReport> {
    let n = params.n;
    let r_max = points.iter().map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt()).fold(1.0, f64::max);
    let chart = Arc::new(calabi::calabi_cartesian_chart(params, 0.1, 2.0 * r_max + 70.0)?);
    let w = omega_field(chart.clone(), n, coefficient);
    let mut max_d: f64 = 0.0;
    let mut max_delta: f64 = 0.0;
    for p in points {
        let r = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        // The truncation constant grows like r^{−7} near the zero section.
        let step = 3e-5 * r.min(1.0).powi(3);
        let dw = exterior_derivative_2form(&w, p, step)?;
        let scale_d = partial_derivative(&w, p, step)?.max_abs();
        max_d = max_d.max(dw.max_abs() / scale_d);
        let nab = covariant_derivative(&w, p, step)?;
        let del = codifferential_2form(&w, p, step)?;
        max_delta = max_delta.max(del.max_abs() / nab.max_abs());
    }
    let radii = crate::fit::logspace(2.0, 64.0, 10);
    let dir = &calabi::probe_directions(2 * n)[2 * n];
    let norms = radii
        .iter()
        .map(|r| {
            let x: Vec<f64> = dir.iter().map(|c| c * r).collect();
            norm(&chart, &x, &harmonic_form_with(&x, n, coefficient)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OmegaHarmonicReport { max_d_relative: max_d, max_delta_relative: max_delta, decay: loglog_fit(&radii, &norms) })
}

pub fn verify_omega_harmonic(params: &CalabiParams, points: &[Vec<f64>]) -> Result<OmegaHarmonicReport> {
    verify_omega_harmonic_with(params, points, 1.0 - params.n as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct DeformationReport {
    pub max_trace: f64,
    pub max_divergence_relative: f64,
    pub max_p_relative: f64,
    pub max_from_omega_error: f64,
}

/// Trace, divergence, P-harmonicity of o and agreement with Ω(I·,·).
pub fn verify_deformation(params: &CalabiParams, points: &[Vec<f64>]) -> Result<DeformationReport> {
    let n = params.n;
    let chart = Arc::new(calabi::calabi_cartesian_chart(params, 0.1, 100.0)?);
    let o = o_field(chart.clone(), n);
    let mut rep = DeformationReport {
        max_trace: 0.0,
        max_divergence_relative: 0.0,
        max_p_relative: 0.0,
        max_from_omega_error: 0.0,
    };
    for p in points {
        let r = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ov = o.eval(p)?;
        let onorm = norm(&chart, p, &ov)?;
        rep.max_trace = rep.max_trace.max(trace(&chart, p, &ov)?.abs() / onorm);
        let step1 = 1e-4 * r.min(1.0).powi(3);
        let div = divergence(&o, p, step1)?;
        let nab = covariant_derivative(&o, p, step1)?;
        rep.max_divergence_relative = rep.max_divergence_relative.max(div.max_abs() / nab.max_abs());
        let step2 = 1e-4 * r.min(1.0);
        let (lap, rr) = lichnerowicz_parts(&o, p, step2)?;
        let pv = lap.sub(&rr)?;
        // The flat Laplacian of o cancels at leading order for large r, so the
        // scale also includes the full second covariant derivative.
        let hess = covariant_derivative(&nabla(&o, step2), p, step2)?;
        let scale = lap.max_abs().max(rr.max_abs()).max(hess.max_abs());
        rep.max_p_relative = rep.max_p_relative.max(pv.max_abs() / scale);
        let oo = o_from_omega(params, p)?;
        rep.max_from_omega_error = rep.max_from_omega_error.max(oo.sub(&ov)?.max_abs() / ov.max_abs());
    }
    Ok(rep)
}

/// |o|²_g dV integrated over the Calabi space (Γ_n quotient), by radial
/// quadrature along one ray using U(n)-invariance.
pub fn o_l2_norm_sq(params: &CalabiParams) -> Result<f64> {
    let n = params.n;
    let m = 2 * n;
    let omega = crate::obstruction::sphere::sphere_volume(m)?;
    let integrand = |r: f64| -> Result<f64> {
        let mut x = vec![0.0; m];
        x[0] = r;
        let u = r * r;
        let (f1, _) = calabi::potential_derivs(u, params)?;
        let lr = calabi::radial_eigenvalue(u, params)?;
        let det = f1.powi(m as i32 - 2) * lr * lr;
        // Inverse metric: 1/f1 off span{x, Jx}, 1/lr on it.
        let mut ginv = DMatrix::identity(m, m) / f1;
        ginv[(0, 0)] = 1.0 / lr;
        ginv[(1, 1)] = 1.0 / lr;
        let o = deformation_tensor(&x, n)?;
        let up = o.transform_slot(0, &ginv).transform_slot(1, &ginv);
        let o2 = up.dot(&o)?;
        Ok(o2 * det.sqrt() * r.powi(m as i32 - 1))
    };
    // Near the zero section the Cartesian frame loses about ε r^{−2n} in |o|,
    // so the ball r < r_c is dropped; its mass is at most 2n(n−1) r_c^{2n}/(2n) ≲ 1e-9.
    let r_c = 1e-20f64.powf(1.0 / (4.0 * n as f64));
    let s_c = r_c / (1.0 + r_c);
    // r = s/(1−s) maps [s_c, 1) onto [r_c, ∞); composite Simpson in s.
    let panels = 4000;
    let h = (1.0 - s_c) / panels as f64;
    let mut acc = 0.0;
    for i in 0..panels {
        let s = s_c + i as f64 * h;
        let r = s / (1.0 - s);
        let jac = 1.0 / (1.0 - s).powi(2);
        let w = if i == 0 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * integrand(r)? * jac;
    }
    // The endpoint s = 1 contributes zero (the integrand decays like r^{−2n−1}).
    Ok(acc * h / 3.0 * omega / n as f64)
}

/// Random smooth one-form with polynomial and trigonometric coefficients.
pub fn random_one_form(chart: Arc<ChartMetric>, seed: u64) -> TensorField {
    let m = chart.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lin: Vec<f64> = (0..m * m).map(|_| rng.random_range(-1.0..1.0)).collect();
    let amp: Vec<f64> = (0..m * m).map(|_| rng.random_range(-1.0..1.0)).collect();
    let freq: Vec<f64> = (0..m * m).map(|_| rng.random_range(0.2..0.8)).collect();
    let phase: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..6.0)).collect();
    TensorField::new(chart, Valence::ONE_FORM, move |x| {
        let comps: Vec<f64> = (0..m)
            .map(|a| {
                (0..m).map(|b| lin[a * m + b] * x[b] + amp[a * m + b] * (freq[a * m + b] * x[b] + phase[a]).sin()).sum()
            })
            .collect();
        Tensor::one_form(&comps)
    })
}

/// Relative residual of P δ*ω = δ* B δ*ω at `p`.
pub fn p_delta_star_identity(w: &TensorField, p: &[f64], step: f64) -> Result<f64> {
    let h = delta_star_field(w, step)?;
    let (lap, rr) = lichnerowicz_parts(&h, p, step)?;
    let lhs = lap.sub(&rr)?;
    let b = bianchi_field(&h, step)?;
    let rhs = delta_star(&b, p, step)?;
    let scale = lap.max_abs().max(rr.max_abs()).max(rhs.max_abs());
    Ok(lhs.sub(&rhs)?.max_abs() / scale)
}

/// Pointwise inner product helper used by reports.
pub fn metric_inner(chart: &ChartMetric, p: &[f64], a: &Tensor, b: &Tensor) -> Result<f64> {
    inner(chart, p, a, b)
}

/// Frame norms at radius r (for documentation and tests).
pub fn frame_at(r: f64, n: usize) -> Result<calabi::FrameQuantities> {
    frame_quantities(r, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_core::{euclidean, form_inner};

    fn flat(m: usize) -> Arc<ChartMetric> {
        Arc::new(euclidean(m, 10.0))
    }

    fn calabi_chart(n: usize) -> Arc<ChartMetric> {
        Arc::new(calabi::calabi_cartesian_chart(&CalabiParams::new(n).unwrap(), 0.2, 20.0).unwrap())
    }

    const X3: [f64; 6] = [0.3, -0.7, 1.1, 0.2, -0.4, 0.5];

    #[test]
    fn divergence_of_metric_vanishes() {
        let c = calabi_chart(3);
        let g = TensorField::metric(c);
        assert!(divergence(&g, &X3, 1e-4).unwrap().max_abs() < 1e-8);
    }

    #[test]
    fn divergence_hand_example() {
        let e = flat(3);
        let h = TensorField::new(e, Valence::COVARIANT2, |x| {
            let mut t = Tensor::zeros(3, Valence::COVARIANT2);
            t.set(&[0, 0], x[0]);
            t
        });
        let d = divergence(&h, &[0.2, 0.1, -0.3], 1e-3).unwrap();
        assert!((d.get(&[0]) + 1.0).abs() < 1e-12);
        assert!(d.get(&[1]).abs() < 1e-12 && d.get(&[2]).abs() < 1e-12);
    }

    #[test]
    fn delta_star_examples() {
        let e = flat(3);
        let dx = TensorField::new(e.clone(), Valence::ONE_FORM, |_| Tensor::one_form(&[1.0, 0.0, 0.0]));
        assert_eq!(delta_star(&dx, &[0.1, 0.2, 0.3], 1e-3).unwrap().max_abs(), 0.0);
        let rot = TensorField::new(e.clone(), Valence::ONE_FORM, |x| Tensor::one_form(&[-x[1], x[0], 0.0]));
        assert!(delta_star(&rot, &[0.1, 0.2, 0.3], 1e-3).unwrap().max_abs() < 1e-12);
        let xdx = TensorField::new(e, Valence::ONE_FORM, |x| Tensor::one_form(&[x[0], 0.0, 0.0]));
        let t = delta_star(&xdx, &[0.1, 0.2, 0.3], 1e-3).unwrap();
        assert!((t.get(&[0, 0]) - 1.0).abs() < 1e-12);
        assert!(
            t.sub(&Tensor::from_matrix(&DMatrix::from_fn(3, 3, |i, j| if i + j == 0 { 1.0 } else { 0.0 })))
                .unwrap()
                .max_abs()
                < 1e-12
        );
    }

    #[test]
    fn delta_star_of_cubic_radial_field() {
        let e = flat(4);
        let w = TensorField::new(e, Valence::ONE_FORM, |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            Tensor::one_form(&x.iter().map(|v| r2 * v).collect::<Vec<_>>())
        });
        let z = [0.3, -0.2, 0.5, 0.1];
        let t = delta_star(&w, &z, 1e-3).unwrap();
        let r2: f64 = z.iter().map(|v| v * v).sum();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { r2 } else { 0.0 } + 2.0 * z[i] * z[j];
                assert!((t.get(&[i, j]) - want).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn conformal_killing_is_trace_free() {
        let c = calabi_chart(2);
        let w = random_one_form(c.clone(), 4);
        let p = [0.4, 0.9, -0.3, 0.6];
        let k = conformal_killing_k(&w, &p, 1e-4).unwrap();
        assert!(trace(&c, &p, &k).unwrap().abs() <= 1e-10 * k.max_abs());
    }

    #[test]
    fn bianchi_of_metric_and_o_vanish() {
        let c = calabi_chart(3);
        let g = TensorField::metric(c.clone());
        assert!(bianchi_b(&g, &X3, 1e-4).unwrap().max_abs() < 1e-8);
        let o = o_field(c, 3);
        let b = bianchi_b(&o, &X3, 1e-4).unwrap();
        assert!(b.max_abs() < 1e-5, "{}", b.max_abs());
    }

    #[test]
    fn p_of_metric_vanishes_on_ricci_flat_chart() {
        let c = calabi_chart(3);
        let g = TensorField::metric(c);
        let (lap, rr) = lichnerowicz_parts(&g, &X3, 1e-3).unwrap();
        assert!(lap.max_abs() < 1e-6);
        assert!(rr.max_abs() < 1e-5);
    }

    #[test]
    fn p_of_o_vanishes() {
        let c = calabi_chart(3);
        let o = o_field(c, 3);
        let (lap, rr) = lichnerowicz_parts(&o, &X3, 1e-3).unwrap();
        let rel = lap.sub(&rr).unwrap().max_abs() / lap.max_abs().max(rr.max_abs());
        assert!(rel < 1e-4, "{rel}");
    }

    #[test]
    fn o_from_omega_matches_closed_forms() {
        let p = CalabiParams::new(3).unwrap();
        let a = o_from_omega(&p, &X3).unwrap();
        let b = deformation_tensor(&X3, 3).unwrap();
        let c = deformation_tensor_rewrite(&X3, &p).unwrap();
        assert!(a.sub(&b).unwrap().max_abs() < 1e-12);
        assert!(c.sub(&b).unwrap().max_abs() < 1e-12);
        assert!(a.asymmetry() < 1e-14);
    }

    #[test]
    fn o_on_fibre_direction() {
        let n = 3;
        let c = calabi_chart(n);
        let x = X3;
        let f = barred_frame(&x, n).unwrap();
        // dual vector of θ̄ has o-value (n−1)/(1+r^{2n})
        let ginv = c.inverse_metric(&x).unwrap();
        let v: Vec<f64> = (0..6).map(|i| (0..6).map(|j| ginv[(i, j)] * f.theta_bar[j]).sum()).collect();
        let o = deformation_tensor(&x, n).unwrap();
        let val: f64 =
            (0..6).flat_map(|i| (0..6).map(move |j| (i, j))).map(|(i, j)| o.get(&[i, j]) * v[i] * v[j]).sum();
        assert!((val - (n as f64 - 1.0) / one_plus(&x, n)).abs() < 1e-12);
        assert!(trace(&c, &x, &o).unwrap().abs() < 1e-13);
    }

    #[test]
    fn o_squared_norm_closed_form() {
        for n in [2usize, 3, 4] {
            let c = calabi_chart(n);
            let x: Vec<f64> = calabi::probe_directions(2 * n)[2 * n + 1].iter().map(|v| v * 1.4).collect();
            let o = deformation_tensor(&x, n).unwrap();
            let nf = n as f64;
            let want = 2.0 * nf * (nf - 1.0) / one_plus(&x, n).powi(2);
            assert!((inner(&c, &x, &o, &o).unwrap() - want).abs() < 1e-12 * want.max(1.0));
            let w = harmonic_form(&x, n).unwrap();
            assert!(form_inner(&c, &x, &w, &w).unwrap() > 0.0);
        }
    }

    #[test]
    fn l2_norm_matches_hand_integral() {
        // ∫ 2n(n−1)/(1+r^{2n})² dV_euc over C^n/Γ_n = (n−1) ω_{2n−1}/n.
        for n in [2usize, 3, 4] {
            let p = CalabiParams::new(n).unwrap();
            let q = o_l2_norm_sq(&p).unwrap();
            let w = crate::obstruction::sphere::sphere_volume(2 * n).unwrap();
            let want = (n as f64 - 1.0) * w / n as f64;
            assert!((q - want).abs() < 1e-8 * want, "n = {n}: {q} vs {want}");
        }
    }

    #[test]
    fn o_minus_o_euc_decays_fast() {
        let n = 3;
        let dir = &calabi::probe_directions(6)[7];
        let radii = crate::fit::logspace(2.0, 8.0, 8);
        let diffs: Vec<f64> = radii
            .iter()
            .map(|r| {
                let x: Vec<f64> = dir.iter().map(|c| c * r).collect();
                deformation_tensor(&x, n).unwrap().sub(&o_euc(&x, n)).unwrap().max_abs()
            })
            .collect();
        let slope = loglog_fit(&radii, &diffs).slope().unwrap();
        assert!(slope <= -(2.0 * n as f64 + 1.0) + 0.3, "slope {slope}");
    }

    #[test]
    fn p_delta_star_identity_on_sample() {
        let c = calabi_chart(2);
        let w = random_one_form(c, 11);
        let res = p_delta_star_identity(&w, &[0.8, -0.5, 0.6, 0.9], 1e-3).unwrap();
        assert!(res < 1e-4, "{res}");
    }

    #[test]
    fn p_on_function_multiple_of_metric() {
        let h = Arc::new(crate::tensor_core::hyperbolic_polar(4, 6.0));
        let f = TensorField::new(h.clone(), Valence::SCALAR, |x| {
            Tensor::scalar(4, (0.7 * x[0]).sin() * x[1].cos() + 0.3 * x[2])
        });
        let ff = f.clone();
        let hc = h.clone();
        let fg = TensorField::new_fallible(h.clone(), Valence::COVARIANT2, move |x| {
            Ok(Tensor::from_matrix(&hc.eval_unchecked(x)).scaled(ff.eval(x)?.value()))
        });
        let p = [1.1, 1.2, 0.9, 0.4];
        let lhs = lichnerowicz_p(&fg, &p, 1e-3).unwrap();
        let p0 = p0_function(&f, -3.0, &p, 1e-3).unwrap();
        let rhs = Tensor::from_matrix(&h.metric(&p).unwrap()).scaled(0.5 * p0);
        assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-5 * rhs.max_abs().max(1.0));
    }

    #[test]
    fn omega_is_closed_and_coclosed() {
        let p = CalabiParams::new(2).unwrap();
        let pts = sample_points(4, 5, 0.3, 5.0, 1);
        let rep = verify_omega_harmonic(&p, &pts).unwrap();
        assert!(rep.max_d_relative < 1e-6 && rep.max_delta_relative < 1e-6, "{rep:?}");
        let bad = verify_omega_harmonic_with(&p, &pts, 2.0).unwrap();
        assert!(bad.max_d_relative > 1e-2);
    }
}
