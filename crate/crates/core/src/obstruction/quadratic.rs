//! Quadratic symmetric 2-tensors T_ijkl x^i x^j dx^k dx^l on R^m.
//!
//! The first index pair is the position pair and the second the form pair.
//! Coefficients are symmetrised over both pairs on construction, which
//! leaves the tensor field unchanged.

use nalgebra::DMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticTensor {
    m: usize,
    c: Vec<f64>,
}

impl QuadraticTensor {
    pub fn zeros(m: usize) -> Self {
        QuadraticTensor { m, c: vec![0.0; m * m * m * m] }
    }

    fn at(m: usize, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * m + j) * m + k) * m + l
    }

    /// Build from an arbitrary coefficient function, symmetrising in (ij) and (kl).
    pub fn from_fn(m: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut c = vec![0.0; m * m * m * m];
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        c[Self::at(m, i, j, k, l)] =
                            0.25 * ((f(i, j, k, l) + f(j, i, k, l)) + (f(i, j, l, k) + f(j, i, l, k)));
                    }
                }
            }
        }
        QuadraticTensor { m, c }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.c[Self::at(self.m, i, j, k, l)]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    /// The matrix of the field at x: H(x)_kl = T_ijkl x^i x^j.
    pub fn field_at(&self, x: &[f64]) -> DMatrix<f64> {
        let m = self.m;
        DMatrix::from_fn(m, m, |k, l| {
            let mut acc = 0.0;
            for i in 0..m {
                for j in 0..m {
                    acc += self.get(i, j, k, l) * x[i] * x[j];
                }
            }
            acc
        })
    }

    /// B_euc(T) = C_jl x^j dx^l with C_jl = −2 T_kjkl + T_jlkk.
    pub fn bianchi_euc(&self) -> DMatrix<f64> {
        let m = self.m;
        DMatrix::from_fn(m, m, |j, l| {
            let mut acc = 0.0;
            for k in 0..m {
                acc += -2.0 * self.get(k, j, k, l) + self.get(j, l, k, k);
            }
            acc
        })
    }

    /// tr_euc T = M_ij x^i x^j with M_ij = T_ijkk.
    pub fn trace_euc(&self) -> DMatrix<f64> {
        let m = self.m;
        DMatrix::from_fn(m, m, |i, j| (0..m).map(|k| self.get(i, j, k, k)).sum())
    }

    /// The position trace T_iikl (the constant tensor ½ Δ_euc T).
    pub fn position_trace(&self) -> DMatrix<f64> {
        let m = self.m;
        DMatrix::from_fn(m, m, |k, l| (0..m).map(|i| self.get(i, i, k, l)).sum())
    }

    /// Full contraction ⟨T, S⟩ = T_ijkl S_ijkl.
    pub fn contract(&self, other: &QuadraticTensor) -> f64 {
        assert_eq!(self.m, other.m);
        self.c.iter().zip(&other.c).map(|(a, b)| a * b).sum()
    }

    /// T_klij.
    pub fn pair_swapped(&self) -> QuadraticTensor {
        let m = self.m;
        QuadraticTensor::from_fn(m, |i, j, k, l| self.get(k, l, i, j))
    }

    pub fn scaled(&self, s: f64) -> QuadraticTensor {
        QuadraticTensor { m: self.m, c: self.c.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, other: &QuadraticTensor) -> QuadraticTensor {
        QuadraticTensor { m: self.m, c: self.c.iter().zip(&other.c).map(|(a, b)| a + b).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest |T_ijkl − T_klij|.
    pub fn pair_asymmetry(&self) -> f64 {
        let s = self.pair_swapped();
        self.c.iter().zip(&s.c).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Largest violation of the (ij) and (kl) symmetries.
    pub fn symmetry_defect(&self) -> f64 {
        let m = self.m;
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let v = self.get(i, j, k, l);
                        worst = worst.max((v - self.get(j, i, k, l)).abs()).max((v - self.get(i, j, l, k)).abs());
                    }
                }
            }
        }
        worst
    }
}

fn kd(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// P = r² g_euc, Q = r² dr⊗dr, A = r⁴ θ⊗θ for the complex structure `j`.
pub fn ledger_tensors(j: &DMatrix<f64>) -> (QuadraticTensor, QuadraticTensor, QuadraticTensor) {
    let m = j.nrows();
    let p = QuadraticTensor::from_fn(m, |i, jj, k, l| kd(i, jj) * kd(k, l));
    let q = QuadraticTensor::from_fn(m, |i, jj, k, l| 0.5 * (kd(i, k) * kd(jj, l) + kd(i, l) * kd(jj, k)));
    let a = QuadraticTensor::from_fn(m, |i, jj, k, l| 0.5 * (j[(i, k)] * j[(jj, l)] + j[(i, l)] * j[(jj, k)]));
    (p, q, a)
}

/// σ₂ = r²(−dr⊗dr − (2n−1) r² θ⊗θ + g_euc) = −Q − (2n−1)A + P.
pub fn sigma2_tensor(n: usize) -> QuadraticTensor {
    let j = crate::calabi::complex_structure(n);
    let (p, q, a) = ledger_tensors(&j);
    q.scaled(-1.0).add(&a.scaled(-(2.0 * n as f64 - 1.0))).add(&p)
}

/// Coefficients K_ijkl (form pair first, position pair last) with
/// K_euc(α)_ij = |z|^{−m−2} K_ijkl z^k z^l for α = a_pj z^p dz^j / |z|^m.
pub fn conformal_killing_coefficients(a: &DMatrix<f64>) -> Vec<f64> {
    let m = a.nrows();
    let tr = a.trace();
    let mf = m as f64;
    let mut out = vec![0.0; m * m * m * m];
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let v = 0.5
                        * ((a[(i, j)] + a[(j, i)]) * kd(k, l)
                            - 0.5 * mf * (kd(i, k) * a[(l, j)] + kd(i, l) * a[(k, j)])
                            - 0.5 * mf * (kd(k, j) * a[(l, i)] + kd(l, j) * a[(k, i)]))
                        - tr * kd(k, l) * kd(i, j) / mf
                        + 0.5 * kd(i, j) * (a[(l, k)] + a[(k, l)]);
                    out[((i * m + j) * m + k) * m + l] = v;
                }
            }
        }
    }
    out
}

/// K(a) as a quadratic tensor (position pair first): T_klij = K_ijkl.
pub fn conformal_killing_quadratic(a: &DMatrix<f64>) -> QuadraticTensor {
    let m = a.nrows();
    let k = conformal_killing_coefficients(a);
    QuadraticTensor::from_fn(m, |p, q, r, s| k[((r * m + s) * m + p) * m + q])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calabi::complex_structure;
    use proptest::prelude::*;

    fn mat(m: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(m, m, |i, j| v[i * m + j])
    }

    #[test]
    fn q_evaluates_to_r2_dr_dr() {
        let (_, q, _) = ledger_tensors(&complex_structure(2));
        let x = [0.6, -0.3, 0.2, 0.714];
        let f = q.field_at(&x);
        for k in 0..4 {
            for l in 0..4 {
                assert!((f[(k, l)] - x[k] * x[l]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn bianchi_of_ledger_tensors() {
        for n in 2..6 {
            let (p, q, a) = ledger_tensors(&complex_structure(n));
            let id = DMatrix::<f64>::identity(2 * n, 2 * n);
            let nf = n as f64;
            assert!((q.bianchi_euc() - &id * (-2.0 * nf)).abs().max() < 1e-13);
            assert!((a.bianchi_euc() - &id * 2.0).abs().max() < 1e-13);
            assert!((p.bianchi_euc() - &id * (2.0 * (nf - 1.0))).abs().max() < 1e-13);
        }
    }

    #[test]
    fn sigma2_vanishing_properties() {
        for n in 2..6 {
            let s = sigma2_tensor(n);
            assert!(s.bianchi_euc().abs().max() < 1e-13);
            assert!(s.trace_euc().abs().max() < 1e-13);
            assert!(s.position_trace().abs().max() < 1e-13);
            assert!(s.pair_asymmetry() < 1e-15);
        }
    }

    #[test]
    fn identity_matrix_contractions_m6() {
        let n = 3;
        let (p, q, a) = ledger_tensors(&complex_structure(n));
        let k = conformal_killing_quadratic(&DMatrix::identity(6, 6));
        assert!((q.contract(&k) + 120.0).abs() < 1e-12);
        assert!((a.contract(&k) - 24.0).abs() < 1e-12);
        assert!(p.contract(&k).abs() < 1e-12);
        assert!(sigma2_tensor(n).contract(&k).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_gives_zero_k() {
        assert_eq!(conformal_killing_quadratic(&DMatrix::zeros(4, 4)).max_abs(), 0.0);
    }

    proptest! {
        #[test]
        fn construction_enforces_symmetry(v in proptest::collection::vec(-1.0f64..1.0, 256)) {
            let t = QuadraticTensor::from_fn(4, |i, j, k, l| v[((i * 4 + j) * 4 + k) * 4 + l]);
            prop_assert!(t.symmetry_defect() == 0.0);
        }

        #[test]
        fn k_contractions(v in proptest::collection::vec(-1.0f64..1.0, 36)) {
            let a = mat(6, &v);
            let (p, q, aa) = ledger_tensors(&complex_structure(3));
            let k = conformal_killing_quadratic(&a);
            let tr = a.trace();
            prop_assert!((q.contract(&k) - (2.0 - 36.0 - 6.0) / 2.0 * tr).abs() < 1e-10);
            prop_assert!((aa.contract(&k) - 4.0 * tr).abs() < 1e-10);
            prop_assert!(p.contract(&k).abs() < 1e-10);
            prop_assert!(sigma2_tensor(3).contract(&k).abs() < 1e-10);
        }
    }
}
