//! The gauge-corrected quadratic tensor H, the contraction ledger, the
//! closed-form obstruction λ with its surface-integral oracle, and the wall
//! classifier.

use nalgebra::DMatrix;
use serde::Serialize;

use super::data::CurvatureData;
use super::quadratic::QuadraticTensor;
use super::sphere::{gauss_hermite_sphere_quartic, mc_sphere_integrals, sphere_volume, Estimate, MIN_NODES};
use crate::calabi::{apply_j, CalabiParams};
use crate::deform_ops::{o_euc, o_l2_norm_sq};
use crate::error::{GeomError, Result};

fn kd(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Unsymmetrised gauge array
/// H_ijkl = −⅓ R_ikjl − Λ/(3(n+1)) (δ_ij δ_kl + 2 δ_ik δ_jl).
pub fn gauge_tensor_raw(data: &CurvatureData) -> Vec<f64> {
    let m = data.m();
    let c = data.lambda / (3.0 * (data.n as f64 + 1.0));
    let mut h = vec![0.0; m.pow(4)];
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    h[((i * m + j) * m + k) * m + l] =
                        -data.r(i, k, j, l) / 3.0 - c * (kd(i, j) * kd(k, l) + 2.0 * kd(i, k) * kd(j, l));
                }
            }
        }
    }
    h
}

/// The quadratic part H of the orbifold metric in normal coordinates,
/// corrected into Bianchi gauge.
pub fn gauge_tensor_h(data: &CurvatureData) -> QuadraticTensor {
    let m = data.m();
    let raw = gauge_tensor_raw(data);
    QuadraticTensor::from_fn(m, |i, j, k, l| raw[((i * m + j) * m + k) * m + l])
}

/// Six scalar contractions of the raw gauge array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionLedger {
    /// H_kkll
    pub h_kkll: f64,
    /// H_ikik
    pub h_ikik: f64,
    /// H_ikki
    pub h_ikki: f64,
    /// J^p_k J^p_l H_iikl
    pub jj_h_iikl: f64,
    /// J^p_k J^q_l H_pqkl
    pub jj_h_pqkl: f64,
    /// J^p_k J^q_l H_qpkl
    pub jj_h_qpkl: f64,
}

impl ContractionLedger {
    pub fn as_array(&self) -> [f64; 6] {
        [self.h_kkll, self.h_ikik, self.h_ikki, self.jj_h_iikl, self.jj_h_pqkl, self.jj_h_qpkl]
    }

    pub const NAMES: [&'static str; 6] = ["H_kkll", "H_ikik", "H_ikki", "JJ H_iikl", "JJ H_pqkl", "JJ H_qpkl"];
}

pub fn contraction_ledger(data: &CurvatureData) -> ContractionLedger {
    let m = data.m();
    let h = gauge_tensor_raw(data);
    let g = |i: usize, j: usize, k: usize, l: usize| h[((i * m + j) * m + k) * m + l];
    let j = &data.j;
    let mut out =
        ContractionLedger { h_kkll: 0.0, h_ikik: 0.0, h_ikki: 0.0, jj_h_iikl: 0.0, jj_h_pqkl: 0.0, jj_h_qpkl: 0.0 };
    for a in 0..m {
        for b in 0..m {
            out.h_kkll += g(a, a, b, b);
            out.h_ikik += g(a, b, a, b);
            out.h_ikki += g(a, b, b, a);
        }
    }
    for p in 0..m {
        for q in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let w = j[(p, k)] * j[(q, l)];
                    if w == 0.0 {
                        continue;
                    }
                    out.jj_h_pqkl += w * g(p, q, k, l);
                    out.jj_h_qpkl += w * g(q, p, k, l);
                }
            }
        }
        for k in 0..m {
            for l in 0..m {
                let w = j[(p, k)] * j[(p, l)];
                if w != 0.0 {
                    out.jj_h_iikl += w * (0..m).map(|i| g(i, i, k, l)).sum::<f64>();
                }
            }
        }
    }
    out
}

/// A scalar a·Λ + b·⟨R(ω),ω⟩ with coefficients depending on n only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearForm {
    pub lambda_coeff: f64,
    pub rww_coeff: f64,
}

impl LinearForm {
    pub fn eval(&self, lambda: f64, rww: f64) -> f64 {
        self.lambda_coeff * lambda + self.rww_coeff * rww
    }
}

/// Closed forms of the six ledger scalars as linear forms in (Λ, ⟨R(ω),ω⟩).
pub fn ledger_closed_forms(n: usize) -> [LinearForm; 6] {
    let nf = n as f64;
    let lf = |a: f64, b: f64| LinearForm { lambda_coeff: a, rww_coeff: b };
    [
        lf(-2.0 * nf, 0.0),
        lf(-(2.0 * nf + 8.0 * nf * nf) / (3.0 * (nf + 1.0)), 0.0),
        lf(2.0 * nf / 3.0 - 2.0 * nf / (nf + 1.0), 0.0),
        lf(-2.0 * nf, 0.0),
        lf(-2.0 * nf / (3.0 * (nf + 1.0)), -1.0 / 3.0),
        lf(2.0 * nf / (3.0 * (nf + 1.0)), -1.0 / 6.0),
    ]
}

/// Full-sphere assembly of the surface integral from the ledger, in units of
/// ω_{2n−1}: −(n+1)/(2n) L1 + ¼(L1 + L2 + L3) + ¼(L4 + L5 + L6).
pub fn assemble_from_ledger(n: usize, ledger: &[f64; 6]) -> f64 {
    let nf = n as f64;
    -(nf + 1.0) / (2.0 * nf) * ledger[0]
        + 0.25 * (ledger[0] + ledger[1] + ledger[2])
        + 0.25 * (ledger[3] + ledger[4] + ledger[5])
}

/// The bracket (2−n)/2 Λ − ⅛⟨R(ω),ω⟩.
pub fn closed_bracket(n: usize, lambda: f64, rww: f64) -> f64 {
    (2.0 - n as f64) / 2.0 * lambda - rww / 8.0
}

/// Residual of J^p_k J^q_l R_qkpl = ½⟨R(ω),ω⟩.
pub fn bianchi_cyclic_j_identity(data: &CurvatureData) -> f64 {
    let m = data.m();
    let j = &data.j;
    let mut acc = 0.0;
    for p in 0..m {
        for q in 0..m {
            for k in 0..m {
                for l in 0..m {
                    acc += j[(p, k)] * j[(q, l)] * data.r(q, k, p, l);
                }
            }
        }
    }
    (acc - 0.5 * data.r_omega_omega()).abs()
}

/// Closed-form obstruction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedObstruction {
    /// (ω_{2n−1}/n)·bracket
    pub value: f64,
    /// (2−n)/2 Λ − ⅛⟨R(ω),ω⟩
    pub bracket: f64,
    /// ‖o‖²_{L²} on the Calabi metric
    pub norm_sq_o: f64,
    /// value/‖o‖
    pub lambda_normalized: f64,
    /// Coefficient of o in the linearised equation: −value/‖o‖².
    pub lambda_pde: f64,
}

pub fn obstruction_lambda_closed(data: &CurvatureData) -> Result<ClosedObstruction> {
    let n = data.n;
    let bracket = closed_bracket(n, data.lambda, data.r_omega_omega());
    let value = sphere_volume(2 * n)? / n as f64 * bracket;
    let norm_sq_o = o_l2_norm_sq(&CalabiParams::new(n)?)?;
    Ok(ClosedObstruction {
        value,
        bracket,
        norm_sq_o,
        lambda_normalized: value / norm_sq_o.sqrt(),
        lambda_pde: -value / norm_sq_o,
    })
}

/// How the surface integral is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Quadrature {
    /// Exact product Gauss–Hermite rule (the integrand is a quartic on the sphere).
    GaussHermite,
    /// Seeded Monte Carlo with the given number of nodes.
    MonteCarlo { nodes: usize, seed: u64 },
}

/// Pointwise integrand (n+1)/r ⟨T(x), o_euc(x)⟩ at a point x.
pub fn surface_integrand(t: &QuadraticTensor, x: &[f64], n: usize) -> f64 {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let h = t.field_at(x);
    let o = o_euc(x, n);
    let m = x.len();
    let mut acc = 0.0;
    for a in 0..m {
        for b in 0..m {
            acc += h[(a, b)] * o.get(&[a, b]);
        }
    }
    (n as f64 + 1.0) / r * acc
}

/// Same integrand on the unit sphere via H(x)_kl as a matrix M:
/// (n+1)(−tr M + n xᵀMx + n (Jx)ᵀM(Jx)).
fn fast_unit_integrand(hmat: &DMatrix<f64>, m: usize, n: usize, x: &[f64], xx: &mut [f64]) -> f64 {
    for i in 0..m {
        for j in 0..m {
            xx[i * m + j] = x[i] * x[j];
        }
    }
    let jx = apply_j(x);
    let nf = n as f64;
    let mut tr = 0.0;
    let mut q1 = 0.0;
    let mut q2 = 0.0;
    for k in 0..m {
        for l in 0..m {
            let col = k * m + l;
            let mut mkl = 0.0;
            for (ij, v) in xx.iter().enumerate() {
                mkl += hmat[(ij, col)] * v;
            }
            if k == l {
                tr += mkl;
            }
            q1 += mkl * x[k] * x[l];
            q2 += mkl * jx[k] * jx[l];
        }
    }
    (nf + 1.0) * (-tr + nf * q1 + nf * q2)
}

/// Result of the surface-integral evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BruteForce {
    pub value: f64,
    /// Zero for the Gauss–Hermite rule.
    pub std_error: f64,
    /// Monte Carlo estimate of (1/n)∫|integrand| dS, the size of the
    /// integrand the estimate cancels down from. `None` for Gauss–Hermite.
    pub magnitude: Option<f64>,
    pub radius: f64,
}

/// (1/n) ∫_{S_{r₀}} (n+1)/r₀ ⟨H, o_euc⟩ dS: the quotient-sphere integral
/// whose large-radius limit defines the obstruction.
pub fn obstruction_lambda_bruteforce(data: &CurvatureData, r0: f64, quad: Quadrature) -> Result<BruteForce> {
    if !(r0 >= 1.0) || !r0.is_finite() {
        return Err(GeomError::InvalidConfig(format!("quadrature radius must be >= 1, got {r0}")));
    }
    let n = data.n;
    let m = data.m();
    let h = gauge_tensor_h(data);
    let jac = r0.powi(m as i32 - 1);
    let quotient = 1.0 / n as f64;
    match quad {
        Quadrature::GaussHermite => {
            let v = gauss_hermite_sphere_quartic(m, |u| {
                let x: Vec<f64> = u.iter().map(|c| c * r0).collect();
                surface_integrand(&h, &x, n)
            })?;
            Ok(BruteForce { value: quotient * jac * v, std_error: 0.0, magnitude: None, radius: r0 })
        }
        Quadrature::MonteCarlo { nodes, seed } => {
            if nodes < MIN_NODES {
                return Err(GeomError::QuadratureBudget(format!(
                    "{nodes} Monte Carlo nodes, need at least {MIN_NODES}"
                )));
            }
            let hmat = DMatrix::from_fn(m * m, m * m, |ij, kl| h.coefficients()[ij * m * m + kl]);
            // On S_{r₀}: H scales as r₀², o_euc as r₀^{−2n}, (n+1)/r as r₀^{−1}.
            let radial = r0 * r0 * r0.powi(-(2 * n as i32)) / r0;
            let est: Vec<Estimate> = mc_sphere_integrals(m, nodes, seed, 2, |u, out| {
                let mut xx = vec![0.0; m * m];
                out[0] = fast_unit_integrand(&hmat, m, n, u, &mut xx);
                out[1] = out[0].abs();
            })?;
            let s = quotient * jac * radial;
            Ok(BruteForce {
                value: s * est[0].value,
                std_error: s * est[0].std_error,
                magnitude: Some(s.abs() * est[1].value),
                radius: r0,
            })
        }
    }
}

/// Scale used for relative comparisons: (ω_{2n−1}/n)(|(2−n)/2 Λ| + |⟨R(ω),ω⟩|/8).
pub fn obstruction_scale(data: &CurvatureData) -> Result<f64> {
    let n = data.n;
    Ok(sphere_volume(2 * n)? / n as f64
        * ((2.0 - n as f64).abs() / 2.0 * data.lambda.abs() + data.r_omega_omega().abs() / 8.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Obstructed,
    Unobstructed,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::Obstructed => "obstructed",
            Classification::Unobstructed => "unobstructed",
        })
    }
}

/// The wall quantity n⟨R(ω),ω⟩ + 2(n−2)R and its classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WallVerdict {
    pub value: f64,
    pub tolerance: f64,
    pub classification: Classification,
}

/// Ratio closed-value / wall-value, a negative constant depending on n only.
pub fn wall_to_lambda_constant(n: usize) -> Result<f64> {
    Ok(-sphere_volume(2 * n)? / (8.0 * (n * n) as f64))
}

pub fn classify_wall(data: &CurvatureData) -> WallVerdict {
    let n = data.n as f64;
    let a = n * data.r_omega_omega();
    let b = 2.0 * (n - 2.0) * data.scalar();
    let value = a + b;
    let tolerance = 1e-9 * (a.abs() + b.abs() + f64::EPSILON);
    let classification =
        if value.abs() <= tolerance { Classification::Unobstructed } else { Classification::Obstructed };
    WallVerdict { value, tolerance, classification }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obstruction::quadratic::sigma2_tensor;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, seed: u64) -> CurvatureData {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CurvatureData::random_einstein(n, 1.3 - 0.4 * n as f64, 2.0, &mut rng).unwrap()
    }

    #[test]
    fn gauge_tensor_is_bianchi_free_with_trace_minus_lambda() {
        let d = CurvatureData::football(3).unwrap();
        let h = gauge_tensor_h(&d);
        assert!(h.bianchi_euc().abs().max() < 1e-14);
        let t = h.position_trace();
        assert!((t - DMatrix::identity(6, 6) * -5.0).abs().max() < 1e-14);
        for seed in 0..4 {
            let d = random(2 + seed as usize % 3, seed);
            let h = gauge_tensor_h(&d);
            let tol = 1e-13 * d.riemann().iter().fold(1.0f64, |a, v| a.max(v.abs()));
            assert!(h.bianchi_euc().abs().max() < tol);
            assert!(h.symmetry_defect() == 0.0);
        }
    }

    #[test]
    fn flat_data_gives_zero() {
        let d = CurvatureData::flat(3).unwrap();
        assert_eq!(gauge_tensor_h(&d).max_abs(), 0.0);
        assert_eq!(obstruction_lambda_closed(&d).unwrap().value, 0.0);
        assert_eq!(classify_wall(&d).classification, Classification::Unobstructed);
        let b = obstruction_lambda_bruteforce(&d, 1.0, Quadrature::MonteCarlo { nodes: 20_000, seed: 1 }).unwrap();
        assert_eq!(b.value, 0.0);
    }

    #[test]
    fn ledger_matches_closed_forms() {
        for seed in 0..6 {
            let d = random(2 + seed as usize % 3, 100 + seed);
            let l = contraction_ledger(&d).as_array();
            let rww = d.r_omega_omega();
            for (v, f) in l.iter().zip(ledger_closed_forms(d.n)) {
                let e = f.eval(d.lambda, rww);
                assert!((v - e).abs() < 1e-10 * (1.0 + e.abs()), "{v} vs {e}");
            }
            let assembled = assemble_from_ledger(d.n, &l);
            assert!((assembled - closed_bracket(d.n, d.lambda, rww)).abs() < 1e-10);
            assert!(bianchi_cyclic_j_identity(&d) < 1e-10);
        }
    }

    #[test]
    fn gauss_hermite_matches_closed_form() {
        for seed in 0..6 {
            let d = random(2 + seed as usize % 3, 200 + seed);
            let c = obstruction_lambda_closed(&d).unwrap();
            let b = obstruction_lambda_bruteforce(&d, 1.0, Quadrature::GaussHermite).unwrap();
            assert!((b.value - c.value).abs() < 1e-10 * obstruction_scale(&d).unwrap());
        }
    }

    #[test]
    fn radius_invariance() {
        let d = random(2, 7);
        let a = obstruction_lambda_bruteforce(&d, 1.0, Quadrature::GaussHermite).unwrap().value;
        let b = obstruction_lambda_bruteforce(&d, 3.5, Quadrature::GaussHermite).unwrap().value;
        assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
        let mc1 = obstruction_lambda_bruteforce(&d, 1.0, Quadrature::MonteCarlo { nodes: 20_000, seed: 4 }).unwrap();
        let mc2 = obstruction_lambda_bruteforce(&d, 3.5, Quadrature::MonteCarlo { nodes: 20_000, seed: 4 }).unwrap();
        assert!((mc1.value - mc2.value).abs() < 1e-10 * mc1.value.abs().max(1.0));
    }

    #[test]
    fn fast_integrand_matches_tensor_path() {
        let d = random(3, 9);
        let h = gauge_tensor_h(&d);
        let m = 6;
        let hmat = DMatrix::from_fn(m * m, m * m, |ij, kl| h.coefficients()[ij * m * m + kl]);
        let mut xx = vec![0.0; m * m];
        for p in crate::deform_ops::sample_points(m, 5, 1.0, 1.0, 3) {
            let a = fast_unit_integrand(&hmat, m, 3, &p, &mut xx);
            let b = surface_integrand(&h, &p, 3);
            assert!((a - b).abs() < 1e-11 * a.abs().max(1.0));
        }
    }

    #[test]
    fn budget_rejected() {
        let d = CurvatureData::football(2).unwrap();
        let e = obstruction_lambda_bruteforce(&d, 1.0, Quadrature::MonteCarlo { nodes: 100, seed: 0 });
        assert!(matches!(e, Err(GeomError::QuadratureBudget(_))));
        assert!(obstruction_lambda_bruteforce(&d, 0.5, Quadrature::GaussHermite).is_err());
    }

    #[test]
    fn examples_classify() {
        for n in 2..5 {
            let f = classify_wall(&CurvatureData::football(n).unwrap());
            assert_eq!(f.classification, Classification::Obstructed);
            assert!(f.value > 0.0);
            let h = classify_wall(&CurvatureData::hyperbolic(n).unwrap());
            assert_eq!(h.classification, Classification::Obstructed);
            let ke = CurvatureData::kahler_einstein(5.0, n).unwrap();
            let w = classify_wall(&ke);
            assert!((w.value - 4.0 * (n as f64 - 1.0) * 5.0).abs() < 1e-10);
        }
    }

    #[test]
    fn wall_proportional_to_closed_value() {
        for seed in 0..8 {
            let d = random(2 + seed as usize % 3, 300 + seed);
            let w = classify_wall(&d).value;
            let c = obstruction_lambda_closed(&d).unwrap().value;
            let k = wall_to_lambda_constant(d.n).unwrap();
            assert!((c - k * w).abs() < 1e-10 * obstruction_scale(&d).unwrap().max(1.0));
        }
    }

    #[test]
    fn sigma2_integrand() {
        let n = 3;
        let s = sigma2_tensor(n);
        for p in crate::deform_ops::sample_points(6, 4, 0.7, 3.0, 5) {
            let r: f64 = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            let v = surface_integrand(&s, &p, n);
            let e = 2.0 * n as f64 * (1.0 - (n * n) as f64) * r.powi(1 - 6);
            assert!((v - e).abs() < 1e-12 * e.abs());
        }
    }
}
