//! Pointwise curvature data (R_ijkl, Λ, J) at an orbifold point, in an
//! orthonormal frame, with validation, builtin models, random generation
//! and a TOML ingestion format.

use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::calabi::complex_structure;
use crate::error::{GeomError, Result};

/// Curvature at the orbifold point, components in an orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureData {
    pub n: usize,
    pub lambda: f64,
    riemann: Vec<f64>,
    pub j: DMatrix<f64>,
}

fn idx(m: usize, i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * m + j) * m + k) * m + l
}

fn kd(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Kulkarni–Nomizu product (A ⊙ B)_ijkl = A_ik B_jl + A_jl B_ik − A_il B_jk − A_jk B_il.
pub fn kulkarni_nomizu(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<f64> {
    let m = a.nrows();
    let mut out = vec![0.0; m * m * m * m];
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    out[idx(m, i, j, k, l)] =
                        a[(i, k)] * b[(j, l)] + a[(j, l)] * b[(i, k)] - a[(i, l)] * b[(j, k)] - a[(j, k)] * b[(i, l)];
                }
            }
        }
    }
    out
}

/// Tolerance used by validation, relative to the largest component.
pub const VALIDATION_TOL: f64 = 1e-10;

/// Summary of the identities checked on ingestion.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationSummary {
    pub first_pair_antisymmetry: f64,
    pub second_pair_antisymmetry: f64,
    pub pair_symmetry: f64,
    pub first_bianchi: f64,
    pub einstein: f64,
    pub j_square: f64,
    pub j_orthogonal: f64,
    pub j_commutes_with_model: f64,
}

impl CurvatureData {
    /// Validated constructor.
    pub fn new(n: usize, lambda: f64, riemann: Vec<f64>, j: Option<DMatrix<f64>>) -> Result<Self> {
        let d = Self::new_unchecked(n, lambda, riemann, j)?;
        d.validate()?;
        Ok(d)
    }

    /// Constructor without the curvature identities check (shape only).
    pub fn new_unchecked(n: usize, lambda: f64, riemann: Vec<f64>, j: Option<DMatrix<f64>>) -> Result<Self> {
        if n < 2 {
            return Err(GeomError::BadComplexDimension(n));
        }
        let m = 2 * n;
        if riemann.len() != m.pow(4) {
            return Err(GeomError::InvalidCurvatureData(format!(
                "riemann needs {} components, got {}",
                m.pow(4),
                riemann.len()
            )));
        }
        let j = j.unwrap_or_else(|| complex_structure(n));
        if j.nrows() != m || j.ncols() != m {
            return Err(GeomError::InvalidCurvatureData(format!("J must be {m}x{m}")));
        }
        Ok(CurvatureData { n, lambda, riemann, j })
    }

    pub fn m(&self) -> usize {
        2 * self.n
    }

    pub fn r(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.riemann[idx(self.m(), i, j, k, l)]
    }

    pub fn riemann(&self) -> &[f64] {
        &self.riemann
    }

    fn scale(&self) -> f64 {
        let r = self.riemann.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        r.max(self.lambda.abs()).max(1.0)
    }

    pub fn summary(&self) -> ValidationSummary {
        let m = self.m();
        let mut s = ValidationSummary {
            first_pair_antisymmetry: 0.0,
            second_pair_antisymmetry: 0.0,
            pair_symmetry: 0.0,
            first_bianchi: 0.0,
            einstein: 0.0,
            j_square: 0.0,
            j_orthogonal: 0.0,
            j_commutes_with_model: 0.0,
        };
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let v = self.r(i, j, k, l);
                        s.first_pair_antisymmetry = s.first_pair_antisymmetry.max((v + self.r(j, i, k, l)).abs());
                        s.second_pair_antisymmetry = s.second_pair_antisymmetry.max((v + self.r(i, j, l, k)).abs());
                        s.pair_symmetry = s.pair_symmetry.max((v - self.r(k, l, i, j)).abs());
                        let b = v + self.r(j, k, i, l) + self.r(k, i, j, l);
                        s.first_bianchi = s.first_bianchi.max(b.abs());
                    }
                }
            }
        }
        let ric = self.ricci();
        s.einstein = (ric - DMatrix::identity(m, m) * self.lambda).abs().max();
        let id = DMatrix::<f64>::identity(m, m);
        s.j_square = (&self.j * &self.j + &id).abs().max();
        s.j_orthogonal = (self.j.transpose() * &self.j - &id).abs().max();
        let j0 = complex_structure(self.n);
        s.j_commutes_with_model = (&self.j * &j0 - &j0 * &self.j).abs().max();
        s
    }

    /// Check every identity, reporting the first one that fails.
    pub fn validate(&self) -> Result<()> {
        let s = self.summary();
        let tol = VALIDATION_TOL * self.scale();
        let checks = [
            ("antisymmetry in the first index pair (R_ijkl = -R_jikl)", s.first_pair_antisymmetry),
            ("antisymmetry in the second index pair (R_ijkl = -R_ijlk)", s.second_pair_antisymmetry),
            ("pair symmetry (R_ijkl = R_klij)", s.pair_symmetry),
            ("first Bianchi identity (R_ijkl + R_jkil + R_kijl = 0)", s.first_bianchi),
            ("Einstein condition (Ric = lambda g)", s.einstein),
            ("J^2 = -I", s.j_square),
            ("J orthogonal", s.j_orthogonal),
            ("J commuting with the standard complex structure", s.j_commutes_with_model),
        ];
        for (name, v) in checks {
            if v > tol {
                return Err(GeomError::InvalidCurvatureData(format!("{name} violated (residual {v:.3e})")));
            }
        }
        Ok(())
    }

    /// Ric_ik = R_ijkj.
    pub fn ricci(&self) -> DMatrix<f64> {
        let m = self.m();
        DMatrix::from_fn(m, m, |i, k| (0..m).map(|j| self.r(i, j, k, j)).sum())
    }

    pub fn scalar(&self) -> f64 {
        self.ricci().trace()
    }

    /// ⟨R(ω), ω⟩ = R_ijkl ω_ij ω_kl with ω_ij = J_ij.
    pub fn r_omega_omega(&self) -> f64 {
        let m = self.m();
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        acc += self.r(i, j, k, l) * self.j[(i, j)] * self.j[(k, l)];
                    }
                }
            }
        }
        acc
    }

    pub fn flat(n: usize) -> Result<Self> {
        let m = 2 * n;
        Self::new(n, 0.0, vec![0.0; m.pow(4)], None)
    }

    /// Constant sectional curvature c: R = c(δ_ik δ_jl − δ_il δ_jk), Λ = c(m−1).
    pub fn constant_curvature(c: f64, n: usize) -> Result<Self> {
        let m = 2 * n;
        let g = DMatrix::<f64>::identity(m, m);
        let r: Vec<f64> = kulkarni_nomizu(&g, &g).into_iter().map(|v| 0.5 * c * v).collect();
        Self::new(n, c * (m as f64 - 1.0), r, None)
    }

    pub fn football(n: usize) -> Result<Self> {
        Self::constant_curvature(1.0, n)
    }

    pub fn hyperbolic(n: usize) -> Result<Self> {
        Self::constant_curvature(-1.0, n)
    }

    /// Complex space form with scalar curvature `scalar`:
    /// R = (h/4)(δ_ikδ_jl − δ_ilδ_jk + J_ikJ_jl − J_ilJ_jk + 2J_ijJ_kl),
    /// h = scalar/(n(n+1)). Satisfies ⟨R(ω),ω⟩ = 2·scalar.
    pub fn kahler_einstein(scalar: f64, n: usize) -> Result<Self> {
        let m = 2 * n;
        let j = complex_structure(n);
        let h = scalar / (n * (n + 1)) as f64;
        let mut r = vec![0.0; m.pow(4)];
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    for d in 0..m {
                        r[idx(m, a, b, c, d)] = 0.25
                            * h
                            * (kd(a, c) * kd(b, d) - kd(a, d) * kd(b, c) + j[(a, c)] * j[(b, d)]
                                - j[(a, d)] * j[(b, c)]
                                + 2.0 * j[(a, b)] * j[(c, d)]);
                    }
                }
            }
        }
        Self::new(n, scalar / m as f64, r, Some(j))
    }

    /// Random Einstein data: symmetrise a Gaussian array to the pair
    /// (anti)symmetries, project out the totally antisymmetric part (first
    /// Bianchi), then replace the Ricci part by Λ/(2(m−1)) g⊙g. The Weyl part
    /// is rescaled to have largest component `weyl_scale`.
    pub fn random_einstein<R: Rng>(n: usize, lambda: f64, weyl_scale: f64, rng: &mut R) -> Result<Self> {
        let m = 2 * n;
        let raw: Vec<f64> = (0..m.pow(4)).map(|_| rng.sample(StandardNormal)).collect();
        let t = |i, j, k, l| raw[idx(m, i, j, k, l)];
        let mut a = vec![0.0; m.pow(4)];
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let anti = |i, j, k, l| t(i, j, k, l) - t(j, i, k, l) - t(i, j, l, k) + t(j, i, l, k);
                        a[idx(m, i, j, k, l)] = 0.125 * (anti(i, j, k, l) + anti(k, l, i, j));
                    }
                }
            }
        }
        let mut r = vec![0.0; m.pow(4)];
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let b = (a[idx(m, i, j, k, l)] + a[idx(m, j, k, i, l)] + a[idx(m, k, i, j, l)]) / 3.0;
                        r[idx(m, i, j, k, l)] = a[idx(m, i, j, k, l)] - b;
                    }
                }
            }
        }
        let g = DMatrix::<f64>::identity(m, m);
        let ric = DMatrix::from_fn(m, m, |i, k| (0..m).map(|j| r[idx(m, i, j, k, j)]).sum::<f64>());
        let s = ric.trace();
        let e = &ric - &g * (s / m as f64);
        let ke = kulkarni_nomizu(&e, &g);
        let kg = kulkarni_nomizu(&g, &g);
        let mf = m as f64;
        let w: Vec<f64> =
            (0..r.len()).map(|q| r[q] - ke[q] / (mf - 2.0) - s / (2.0 * mf * (mf - 1.0)) * kg[q]).collect();
        let wmax = w.iter().fold(0.0f64, |x, v| x.max(v.abs())).max(f64::MIN_POSITIVE);
        let out: Vec<f64> =
            (0..r.len()).map(|q| w[q] * weyl_scale / wmax + lambda / (2.0 * (mf - 1.0)) * kg[q]).collect();
        Self::new(n, lambda, out, None)
    }

    /// Parse the TOML ingestion format.
    ///
    /// ```toml
    /// n = 2
    /// lambda = 3.0
    /// riemann = [[1, 2, 1, 2, 1.0], [1, 3, 1, 3, 1.0]]   # 1-based [i, j, k, l, value]
    /// # J = [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]]
    /// ```
    ///
    /// Components not listed are filled from the pair (anti)symmetries; any
    /// remaining component is zero.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| GeomError::Parse(e.to_string()))?;
        let num = |v: &toml::Value, what: &str| -> Result<f64> {
            match v {
                toml::Value::Integer(i) => Ok(*i as f64),
                toml::Value::Float(f) => Ok(*f),
                _ => Err(GeomError::Parse(format!("{what} must be a number"))),
            }
        };
        let n = match doc.get("n") {
            Some(toml::Value::Integer(i)) if *i >= 0 => *i as usize,
            _ => return Err(GeomError::Parse("missing or invalid integer field `n`".into())),
        };
        if n < 2 {
            return Err(GeomError::BadComplexDimension(n));
        }
        let lambda =
            num(doc.get("lambda").ok_or_else(|| GeomError::Parse("missing field `lambda`".into()))?, "lambda")?;
        let m = 2 * n;
        let entries = doc
            .get("riemann")
            .and_then(|v| v.as_array())
            .ok_or_else(|| GeomError::Parse("missing array field `riemann`".into()))?;
        let mut r = vec![0.0; m.pow(4)];
        let mut set = vec![false; m.pow(4)];
        for (row_no, e) in entries.iter().enumerate() {
            let row = e
                .as_array()
                .filter(|a| a.len() == 5)
                .ok_or_else(|| GeomError::Parse(format!("riemann entry {} must be [i, j, k, l, value]", row_no + 1)))?;
            let mut ix = [0usize; 4];
            for (slot, v) in row[..4].iter().enumerate() {
                let i = v.as_integer().ok_or_else(|| {
                    GeomError::Parse(format!("riemann entry {}: indices must be integers", row_no + 1))
                })?;
                if i < 1 || i as usize > m {
                    return Err(GeomError::Parse(format!("riemann entry {}: index {i} outside 1..={m}", row_no + 1)));
                }
                ix[slot] = i as usize - 1;
            }
            let val = num(&row[4], "riemann value")?;
            let [i, j, k, l] = ix;
            let images = [
                ((i, j, k, l), 1.0),
                ((j, i, k, l), -1.0),
                ((i, j, l, k), -1.0),
                ((j, i, l, k), 1.0),
                ((k, l, i, j), 1.0),
                ((l, k, i, j), -1.0),
                ((k, l, j, i), -1.0),
                ((l, k, j, i), 1.0),
            ];
            for ((a, b, c, d), sign) in images {
                let q = idx(m, a, b, c, d);
                let v = sign * val;
                if set[q] && (r[q] - v).abs() > VALIDATION_TOL * val.abs().max(1.0) {
                    return Err(GeomError::InvalidCurvatureData(format!(
                        "entry {} conflicts with the index symmetries at ({}, {}, {}, {}): {} vs {}",
                        row_no + 1,
                        a + 1,
                        b + 1,
                        c + 1,
                        d + 1,
                        r[q],
                        v
                    )));
                }
                r[q] = v;
                set[q] = true;
            }
        }
        let j = match doc.get("J") {
            None => None,
            Some(v) => {
                let rows = v.as_array().ok_or_else(|| GeomError::Parse("J must be an array of rows".into()))?;
                if rows.len() != m {
                    return Err(GeomError::Parse(format!("J must have {m} rows")));
                }
                let mut jm = DMatrix::zeros(m, m);
                for (a, row) in rows.iter().enumerate() {
                    let row = row
                        .as_array()
                        .filter(|r| r.len() == m)
                        .ok_or_else(|| GeomError::Parse(format!("J row {} must have {m} entries", a + 1)))?;
                    for (b, v) in row.iter().enumerate() {
                        jm[(a, b)] = num(v, "J entry")?;
                    }
                }
                Some(jm)
            }
        };
        Self::new(n, lambda, r, j)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| GeomError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Serialise to the TOML ingestion format (independent components only).
    pub fn to_toml_string(&self) -> String {
        let m = self.m();
        let mut s = format!("n = {}\nlambda = {:?}\nriemann = [\n", self.n, self.lambda);
        for i in 0..m {
            for j in (i + 1)..m {
                for k in 0..m {
                    for l in (k + 1)..m {
                        if (i, j) <= (k, l) {
                            let v = self.r(i, j, k, l);
                            if v != 0.0 {
                                s.push_str(&format!("  [{}, {}, {}, {}, {:?}],\n", i + 1, j + 1, k + 1, l + 1, v));
                            }
                        }
                    }
                }
            }
        }
        s.push_str("]\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn builtins_validate() {
        for n in 2..5 {
            CurvatureData::flat(n).unwrap();
            CurvatureData::football(n).unwrap();
            CurvatureData::hyperbolic(n).unwrap();
            let ke = CurvatureData::kahler_einstein(7.0, n).unwrap();
            assert!((ke.r_omega_omega() - 2.0 * ke.scalar()).abs() < 1e-12);
            assert!((ke.scalar() - 7.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_has_expected_contractions() {
        let d = CurvatureData::football(3).unwrap();
        assert!((d.scalar() - 30.0).abs() < 1e-12);
        assert!((d.r_omega_omega() - 12.0).abs() < 1e-12);
        assert!((d.r(0, 1, 0, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_data_validates() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..5 {
            let d = CurvatureData::random_einstein(n, 1.7, 1.0, &mut rng).unwrap();
            assert!((d.scalar() - 1.7 * 2.0 * n as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn toml_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let d = CurvatureData::random_einstein(2, -0.4, 1.0, &mut rng).unwrap();
        let back = CurvatureData::from_toml_str(&d.to_toml_string()).unwrap();
        let diff = d.riemann().iter().zip(back.riemann()).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        assert!(diff < 1e-14);
    }

    #[test]
    fn broken_bianchi_is_named() {
        // R_1234 alone (with its symmetry images) violates the first Bianchi identity.
        let text = "n = 2\nlambda = 0.0\nriemann = [[1, 2, 3, 4, 1.0]]\n";
        let err = CurvatureData::from_toml_str(text).unwrap_err().to_string();
        assert!(err.contains("first Bianchi"), "{err}");
    }

    #[test]
    fn conflicting_entries_rejected() {
        let text = "n = 2\nlambda = 0.0\nriemann = [[1, 1, 2, 3, 1.0]]\n";
        let err = CurvatureData::from_toml_str(text).unwrap_err().to_string();
        assert!(err.contains("conflicts"), "{err}");
    }

    #[test]
    fn sphere_from_toml() {
        let mut rows = String::new();
        for (i, j) in [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)] {
            rows.push_str(&format!("[{i}, {j}, {i}, {j}, 1.0],"));
        }
        let text = format!("n = 2\nlambda = 3\nriemann = [{rows}]\n");
        let d = CurvatureData::from_toml_str(&text).unwrap();
        assert_eq!(d, CurvatureData::football(2).unwrap());
    }

    #[test]
    fn wrong_lambda_rejected() {
        let mut rows = String::new();
        for (i, j) in [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)] {
            rows.push_str(&format!("[{i}, {j}, {i}, {j}, 1.0],"));
        }
        let text = format!("n = 2\nlambda = 2.0\nriemann = [{rows}]\n");
        let err = CurvatureData::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("Einstein"), "{err}");
    }
}
