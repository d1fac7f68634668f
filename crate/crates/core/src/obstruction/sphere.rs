//! Unit-sphere volumes, second and fourth moments, and two quadratures over
//! S^{m-1}: seeded Monte Carlo with a standard error, and an exact product
//! Gauss–Hermite rule for homogeneous polynomials of degree <= 5.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GeomError, Result};

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn require_even(m: usize) -> Result<()> {
    if m == 0 || m % 2 == 1 {
        return Err(GeomError::OddDimension(m));
    }
    Ok(())
}

/// ω_{m−1} = 2π^{m/2}/Γ(m/2) for even m.
pub fn sphere_volume(m: usize) -> Result<f64> {
    require_even(m)?;
    let n = m / 2;
    Ok(2.0 * std::f64::consts::PI.powi(n as i32) / factorial(n - 1))
}

/// ∫ x_i x_j dS = sphere_moment2(m) δ_ij.
pub fn sphere_moment2(m: usize) -> Result<f64> {
    Ok(sphere_volume(m)? / m as f64)
}

fn kd(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// ∫ x_i x_j x_k x_l dS (0-based indices).
pub fn sphere_moment4(m: usize, i: usize, j: usize, k: usize, l: usize) -> Result<f64> {
    let c = sphere_volume(m)? / (m * (m + 2)) as f64;
    Ok(c * (kd(k, l) * kd(i, j) + kd(k, i) * kd(l, j) + kd(k, j) * kd(i, l)))
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

const CHUNK: usize = 1 << 15;

/// Smallest Monte Carlo budget accepted by the obstruction oracle.
pub const MIN_NODES: usize = 10_000;

/// Uniform point on S^{m-1}.
pub fn sample_sphere(rng: &mut ChaCha8Rng, m: usize, out: &mut [f64]) {
    loop {
        let mut s = 0.0;
        for v in out.iter_mut().take(m) {
            *v = StandardNormal.sample(rng);
            s += *v * *v;
        }
        if s > 0.0 {
            let inv = 1.0 / s.sqrt();
            out.iter_mut().take(m).for_each(|v| *v *= inv);
            return;
        }
    }
}

/// Monte Carlo estimates of ∫_{S^{m−1}} f_q dS for a vector-valued integrand.
///
/// Nodes are split into fixed-size chunks, each with its own ChaCha stream,
/// and partial sums are combined in chunk order, so the result depends only
/// on (seed, nodes) and not on the thread count.
pub fn mc_sphere_integrals<F>(m: usize, nodes: usize, seed: u64, outputs: usize, f: F) -> Result<Vec<Estimate>>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    require_even(m)?;
    if nodes < 2 {
        return Err(GeomError::QuadratureBudget(format!("{nodes} nodes")));
    }
    let chunks = nodes.div_ceil(CHUNK);
    let partial: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(nodes - c * CHUNK);
            let mut x = vec![0.0; m];
            let mut val = vec![0.0; outputs];
            let mut s1 = vec![0.0; outputs];
            let mut s2 = vec![0.0; outputs];
            for _ in 0..count {
                sample_sphere(&mut rng, m, &mut x);
                f(&x, &mut val);
                for q in 0..outputs {
                    s1[q] += val[q];
                    s2[q] += val[q] * val[q];
                }
            }
            (s1, s2)
        })
        .collect();
    let mut s1 = vec![0.0; outputs];
    let mut s2 = vec![0.0; outputs];
    for (a, b) in &partial {
        for q in 0..outputs {
            s1[q] += a[q];
            s2[q] += b[q];
        }
    }
    let area = sphere_volume(m)?;
    let nf = nodes as f64;
    Ok((0..outputs)
        .map(|q| {
            let mean = s1[q] / nf;
            let var = (s2[q] / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
            Estimate { value: area * mean, std_error: area * (var / nf).sqrt() }
        })
        .collect())
}

/// One index pattern for a fourth moment: a set partition of four slots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentCheck {
    pub label: String,
    pub indices: Vec<usize>,
    pub closed: f64,
    pub estimate: Estimate,
}

impl MomentCheck {
    pub fn sigmas(&self) -> f64 {
        if self.estimate.std_error == 0.0 {
            return if self.estimate.value == self.closed { 0.0 } else { f64::INFINITY };
        }
        (self.estimate.value - self.closed).abs() / self.estimate.std_error
    }
}

/// Every set partition of {0,1,2,3}, realised with distinct coordinate
/// indices per block.
fn four_index_patterns() -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for code in 0..256usize {
        let p = [code & 3, (code >> 2) & 3, (code >> 4) & 3, (code >> 6) & 3];
        // restricted growth: each entry at most one more than the running max
        let mut mx = 0;
        let ok = p.iter().enumerate().all(|(k, &v)| {
            let good = if k == 0 { v == 0 } else { v <= mx + 1 };
            mx = mx.max(v);
            good
        });
        if ok {
            out.push(p);
        }
    }
    out
}

/// Monte Carlo check of the second and fourth moments over every index
/// pattern (2 patterns for second moments, 15 for fourth moments).
pub fn moment_checks(m: usize, nodes: usize, seed: u64) -> Result<Vec<MomentCheck>> {
    require_even(m)?;
    if m < 4 {
        return Err(GeomError::InvalidConfig("moment patterns need m >= 4".into()));
    }
    let mut patterns: Vec<Vec<usize>> = vec![vec![0, 0], vec![0, 1]];
    patterns.extend(four_index_patterns().into_iter().map(|p| p.to_vec()));
    let pats = patterns.clone();
    let est = mc_sphere_integrals(m, nodes, seed, patterns.len(), move |x, out| {
        for (q, p) in pats.iter().enumerate() {
            out[q] = p.iter().map(|&i| x[i]).product();
        }
    })?;
    patterns
        .into_iter()
        .zip(est)
        .map(|(p, e)| {
            let closed = if p.len() == 2 {
                sphere_moment2(m)? * kd(p[0], p[1])
            } else {
                sphere_moment4(m, p[0], p[1], p[2], p[3])?
            };
            let label = p.iter().map(|i| (b'a' + *i as u8) as char).collect();
            Ok(MomentCheck { label, indices: p, closed, estimate: e })
        })
        .collect()
}

/// ∫_{S^{m−1}} f dS for f whose degree-4 homogenisation |x|^4 f(x/|x|) is a
/// polynomial, via the 3-point Gauss–Hermite product rule on R^m:
/// ∫_{R^m} p e^{−|x|²} = ½ Γ(m/2 + 2) ∫_{S^{m−1}} p for p homogeneous of degree 4.
pub fn gauss_hermite_sphere_quartic<F>(m: usize, f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    require_even(m)?;
    let sp = std::f64::consts::PI.sqrt();
    let nodes = [0.0, (1.5f64).sqrt(), -(1.5f64).sqrt()];
    let weights = [2.0 * sp / 3.0, sp / 6.0, sp / 6.0];
    let total = 3usize.pow(m as u32);
    let sum: f64 = (0..total)
        .into_par_iter()
        .with_min_len(256)
        .map(|mut code| {
            let mut x = vec![0.0; m];
            let mut w = 1.0;
            for v in x.iter_mut() {
                let d = code % 3;
                code /= 3;
                *v = nodes[d];
                w *= weights[d];
            }
            let r2: f64 = x.iter().map(|v| v * v).sum();
            if r2 == 0.0 {
                return 0.0;
            }
            let r = r2.sqrt();
            let u: Vec<f64> = x.iter().map(|v| v / r).collect();
            w * r2 * r2 * f(&u)
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(sum / (0.5 * factorial(m / 2 + 1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn volumes() {
        assert!((sphere_volume(2).unwrap() - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_volume(4).unwrap() - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_volume(6).unwrap() - PI.powi(3)).abs() < 1e-12);
        assert!(sphere_volume(5).is_err());
    }

    #[test]
    fn closed_moments() {
        assert!((sphere_moment2(4).unwrap() - PI * PI / 2.0).abs() < 1e-13);
        assert!((sphere_moment2(6).unwrap() - PI.powi(3) / 6.0).abs() < 1e-13);
        assert!((sphere_moment4(4, 0, 0, 0, 0).unwrap() - PI * PI / 4.0).abs() < 1e-13);
        assert!((sphere_moment4(4, 0, 0, 1, 1).unwrap() - PI * PI / 12.0).abs() < 1e-13);
        assert_eq!(sphere_moment4(4, 0, 1, 2, 3).unwrap(), 0.0);
    }

    #[test]
    fn fifteen_partitions() {
        assert_eq!(four_index_patterns().len(), 15);
    }

    #[test]
    fn gauss_hermite_reproduces_moments() {
        for m in [4usize, 6, 8] {
            let got = gauss_hermite_sphere_quartic(m, |u| u[0].powi(4)).unwrap();
            let want = sphere_moment4(m, 0, 0, 0, 0).unwrap();
            assert!((got - want).abs() < 1e-12 * want);
            let got = gauss_hermite_sphere_quartic(m, |u| u[0] * u[0]).unwrap();
            assert!((got - sphere_moment2(m).unwrap()).abs() < 1e-12 * got);
        }
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let a = mc_sphere_integrals(4, 50_000, 7, 1, |x, o| o[0] = x[0] * x[0]).unwrap();
        let b = mc_sphere_integrals(4, 50_000, 7, 1, |x, o| o[0] = x[0] * x[0]).unwrap();
        assert_eq!(a, b);
        let want = sphere_moment2(4).unwrap();
        assert!((a[0].value - want).abs() < 4.0 * a[0].std_error);
    }
}
