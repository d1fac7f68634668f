//! Christoffel symbols and curvature from central differences of the metric.
//!
//! Sign convention: R_{ijkl} is normalised so that R_{ijij} is the sectional
//! curvature of the (i, j) coordinate plane for orthonormal coordinates, the
//! unit sphere S^m has R_{ijkl} = g_ik g_jl - g_il g_jk and scalar curvature
//! m(m-1). Ricci is Ric_ik = g^{jl} R_{ijkl} and ring-R(h)_ij = R_{ikjl} h^{kl},
//! so ring-R(g) = Ric.

use nalgebra::DMatrix;

use super::chart::{invert_metric, ChartMetric};
use super::tensor::{Tensor, Valence};
use crate::error::Result;

/// Γ^k_ij stored as `data[(k * m + i) * m + j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Christoffel {
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.dim + i) * self.dim + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Metric value and its first (and optionally second) partial derivatives.
pub(crate) struct MetricJet {
    pub m: usize,
    pub g: DMatrix<f64>,
    pub ginv: DMatrix<f64>,
    /// d_c g_ab at `[(c * m + a) * m + b]`.
    pub dg: Vec<f64>,
    /// d_c d_d g_ab at `[((c * m + d) * m + a) * m + b]`.
    pub ddg: Vec<f64>,
}

impl MetricJet {
    fn dg(&self, c: usize, a: usize, b: usize) -> f64 {
        self.dg[(c * self.m + a) * self.m + b]
    }

    fn ddg(&self, c: usize, d: usize, a: usize, b: usize) -> f64 {
        self.ddg[((c * self.m + d) * self.m + a) * self.m + b]
    }

    pub fn compute(chart: &ChartMetric, p: &[f64], h: f64, second: bool) -> Result<Self> {
        let margin = if second { 4.0 * h } else { 2.0 * h };
        chart.check_point(p, margin)?;
        let m = chart.dim;
        let g = chart.eval_unchecked(p);
        let ginv = invert_metric(&g, p)?;
        let mut dg = vec![0.0; m * m * m];
        let mut ddg = if second { vec![0.0; m * m * m * m] } else { Vec::new() };
        let mut q = p.to_vec();
        let mut plus = Vec::with_capacity(m);
        let mut minus = Vec::with_capacity(m);
        for c in 0..m {
            q[c] = p[c] + h;
            let gp = chart.eval_unchecked(&q);
            q[c] = p[c] - h;
            let gm = chart.eval_unchecked(&q);
            q[c] = p[c];
            for a in 0..m {
                for b in 0..m {
                    dg[(c * m + a) * m + b] = (gp[(a, b)] - gm[(a, b)]) / (2.0 * h);
                    if second {
                        ddg[((c * m + c) * m + a) * m + b] = (gp[(a, b)] - 2.0 * g[(a, b)] + gm[(a, b)]) / (h * h);
                    }
                }
            }
            plus.push(gp);
            minus.push(gm);
        }
        if second {
            for c in 0..m {
                for d in 0..c {
                    let mut corner = |sc: f64, sd: f64| {
                        q[c] = p[c] + sc * h;
                        q[d] = p[d] + sd * h;
                        let v = chart.eval_unchecked(&q);
                        q[c] = p[c];
                        q[d] = p[d];
                        v
                    };
                    let gpp = corner(1.0, 1.0);
                    let gpm = corner(1.0, -1.0);
                    let gmp = corner(-1.0, 1.0);
                    let gmm = corner(-1.0, -1.0);
                    for a in 0..m {
                        for b in 0..m {
                            let v = (gpp[(a, b)] - gpm[(a, b)] - gmp[(a, b)] + gmm[(a, b)]) / (4.0 * h * h);
                            ddg[((c * m + d) * m + a) * m + b] = v;
                            ddg[((d * m + c) * m + a) * m + b] = v;
                        }
                    }
                }
            }
        }
        Ok(MetricJet { m, g, ginv, dg, ddg })
    }

    pub fn christoffel(&self) -> Christoffel {
        let m = self.m;
        // first kind: Γ_{l,ij} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
        let mut first = vec![0.0; m * m * m];
        for l in 0..m {
            for i in 0..m {
                for j in 0..m {
                    first[(l * m + i) * m + j] = 0.5 * (self.dg(i, j, l) + self.dg(j, i, l) - self.dg(l, i, j));
                }
            }
        }
        let mut data = vec![0.0; m * m * m];
        for k in 0..m {
            for i in 0..m {
                for j in 0..m {
                    let mut acc = 0.0;
                    for l in 0..m {
                        acc += self.ginv[(k, l)] * first[(l * m + i) * m + j];
                    }
                    data[(k * m + i) * m + j] = acc;
                }
            }
        }
        Christoffel { dim: m, data }
    }
}

/// Christoffel symbols of the second kind at `p`.
pub fn christoffel(chart: &ChartMetric, p: &[f64], step: f64) -> Result<Christoffel> {
    Ok(MetricJet::compute(chart, p, step, false)?.christoffel())
}

/// Curvature quantities at one point.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    pub dim: usize,
    pub metric: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    pub gamma: Christoffel,
    pub riemann: Tensor,
    pub ricci: DMatrix<f64>,
    pub scalar: f64,
}

/// Curvature at `p` computed from second-order central differences of g.
pub fn curvature(chart: &ChartMetric, p: &[f64], step: f64) -> Result<CurvatureBundle> {
    let jet = MetricJet::compute(chart, p, step, true)?;
    let gamma = jet.christoffel();
    let m = jet.m;
    let mut riemann = Tensor::zeros(m, Valence::covariant(4));
    // lowered Γ_{p,ij} = g_pq Γ^q_ij
    let mut low = vec![0.0; m * m * m];
    for pp in 0..m {
        for i in 0..m {
            for j in 0..m {
                let mut acc = 0.0;
                for q in 0..m {
                    acc += jet.g[(pp, q)] * gamma.get(q, i, j);
                }
                low[(pp * m + i) * m + j] = acc;
            }
        }
    }
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for d in 0..m {
                    let second =
                        0.5 * (jet.ddg(b, c, a, d) + jet.ddg(a, d, b, c) - jet.ddg(a, c, b, d) - jet.ddg(b, d, a, c));
                    let mut quad = 0.0;
                    for pp in 0..m {
                        quad += gamma.get(pp, b, c) * low[(pp * m + a) * m + d]
                            - gamma.get(pp, b, d) * low[(pp * m + a) * m + c];
                    }
                    riemann.set(&[a, b, c, d], second + quad);
                }
            }
        }
    }
    let ricci = contract_ricci(&riemann, &jet.ginv);
    let scalar = (0..m).flat_map(|i| (0..m).map(move |k| (i, k))).map(|(i, k)| jet.ginv[(i, k)] * ricci[(i, k)]).sum();
    Ok(CurvatureBundle { dim: m, metric: jet.g, inverse: jet.ginv, gamma, riemann, ricci, scalar })
}

fn contract_ricci(riemann: &Tensor, ginv: &DMatrix<f64>) -> DMatrix<f64> {
    let m = riemann.dim();
    DMatrix::from_fn(m, m, |i, k| {
        let mut acc = 0.0;
        for j in 0..m {
            for l in 0..m {
                acc += ginv[(j, l)] * riemann.get(&[i, j, k, l]);
            }
        }
        acc
    })
}

impl CurvatureBundle {
    pub fn max_riemann(&self) -> f64 {
        self.riemann.max_abs()
    }

    /// Largest violation of the pair antisymmetries and pair symmetry.
    pub fn symmetry_residual(&self) -> f64 {
        let m = self.dim;
        let r = &self.riemann;
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let v = r.get(&[i, j, k, l]);
                        worst = worst
                            .max((v + r.get(&[j, i, k, l])).abs())
                            .max((v + r.get(&[i, j, l, k])).abs())
                            .max((v - r.get(&[k, l, i, j])).abs());
                    }
                }
            }
        }
        worst
    }

    pub fn bianchi_residual(&self) -> f64 {
        let m = self.dim;
        let r = &self.riemann;
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let s = r.get(&[i, j, k, l]) + r.get(&[j, k, i, l]) + r.get(&[k, i, j, l]);
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// |ricci - g^{jl} R_ijkl|, recomputed independently.
    pub fn ricci_consistency(&self) -> f64 {
        let again = contract_ricci(&self.riemann, &self.inverse);
        (&again - &self.ricci).abs().max()
    }

    /// ring-R(h)_ij = g^{kp} g^{lq} R_ikjl h_pq for a covariant symmetric h.
    pub fn ring_r(&self, h: &DMatrix<f64>) -> DMatrix<f64> {
        let m = self.dim;
        let hup = &self.inverse * h * &self.inverse;
        DMatrix::from_fn(m, m, |i, j| {
            let mut acc = 0.0;
            for k in 0..m {
                for l in 0..m {
                    acc += self.riemann.get(&[i, k, j, l]) * hup[(k, l)];
                }
            }
            acc
        })
    }

    /// Norm |Ric|_g.
    pub fn ricci_norm(&self) -> f64 {
        let up = &self.inverse * &self.ricci * &self.inverse;
        self.ricci.component_mul(&up).sum().max(0.0).sqrt()
    }

    /// Norm |Rm|_g.
    pub fn riemann_norm(&self) -> f64 {
        let mut t = self.riemann.clone();
        for slot in 0..4 {
            t = t.transform_slot(slot, &self.inverse);
        }
        t.dot(&self.riemann).unwrap_or(0.0).max(0.0).sqrt()
    }
}
