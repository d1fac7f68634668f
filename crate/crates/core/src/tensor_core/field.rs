//! Tensor fields on a chart, covariant derivatives and metric contractions.

use std::sync::Arc;

use nalgebra::DMatrix;

use super::chart::ChartMetric;
use super::curvature::{christoffel, Christoffel};
use super::tensor::{Tensor, Valence};
use crate::error::{GeomError, Result};

pub type ComponentFn = Arc<dyn Fn(&[f64]) -> Result<Tensor> + Send + Sync>;

/// A tensor field given by a component formula on a chart.
#[derive(Clone)]
pub struct TensorField {
    pub valence: Valence,
    pub chart: Arc<ChartMetric>,
    components: ComponentFn,
}

impl std::fmt::Debug for TensorField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TensorField").field("valence", &self.valence).field("chart", &self.chart.name).finish()
    }
}

impl TensorField {
    pub fn new(
        chart: Arc<ChartMetric>,
        valence: Valence,
        f: impl Fn(&[f64]) -> Tensor + Send + Sync + 'static,
    ) -> Self {
        TensorField { valence, chart, components: Arc::new(move |p| Ok(f(p))) }
    }

    pub fn new_fallible(
        chart: Arc<ChartMetric>,
        valence: Valence,
        f: impl Fn(&[f64]) -> Result<Tensor> + Send + Sync + 'static,
    ) -> Self {
        TensorField { valence, chart, components: Arc::new(f) }
    }

    /// The metric itself as a covariant 2-tensor field.
    pub fn metric(chart: Arc<ChartMetric>) -> Self {
        let c = chart.clone();
        TensorField::new(chart, Valence::COVARIANT2, move |p| Tensor::from_matrix(&c.eval_unchecked(p)))
    }

    pub fn eval(&self, p: &[f64]) -> Result<Tensor> {
        let t = (self.components)(p)?;
        if t.valence() != self.valence {
            return Err(GeomError::ValenceMismatch {
                expected: self.valence.to_string(),
                found: t.valence().to_string(),
            });
        }
        Ok(t)
    }

    pub fn expect_valence(&self, v: Valence) -> Result<()> {
        if self.valence != v {
            return Err(GeomError::ValenceMismatch { expected: v.to_string(), found: self.valence.to_string() });
        }
        Ok(())
    }

    /// Pointwise linear combination `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &TensorField, b: f64) -> Result<TensorField> {
        if self.valence != other.valence {
            return Err(GeomError::ValenceMismatch {
                expected: self.valence.to_string(),
                found: other.valence.to_string(),
            });
        }
        let (f, g) = (self.clone(), other.clone());
        Ok(TensorField::new_fallible(self.chart.clone(), self.valence, move |p| {
            f.eval(p)?.scaled(a).axpy(b, &g.eval(p)?)
        }))
    }
}

/// Partial derivatives d_a T at `p`, with the new index placed first among
/// the lower indices.
pub fn partial_derivative(field: &TensorField, p: &[f64], step: f64) -> Result<Tensor> {
    let m = field.chart.dim;
    let v = field.valence;
    let out_val = Valence { upper: v.upper, lower: v.lower + 1 };
    let mut out = Tensor::zeros(m, out_val);
    let mut q = p.to_vec();
    let inner_len = m.pow(v.lower as u32);
    let outer_len = m.pow(v.upper as u32);
    for a in 0..m {
        q[a] = p[a] + step;
        let tp = field.eval(&q)?;
        q[a] = p[a] - step;
        let tm = field.eval(&q)?;
        q[a] = p[a];
        for u in 0..outer_len {
            for l in 0..inner_len {
                let src = u * inner_len + l;
                let dst = (u * m + a) * inner_len + l;
                out.data_mut()[dst] = (tp.data()[src] - tm.data()[src]) / (2.0 * step);
            }
        }
    }
    Ok(out)
}

fn apply_connection(t: &Tensor, d: &mut Tensor, gamma: &Christoffel) {
    let m = t.dim();
    let v = t.valence();
    let rank_out = v.rank() + 1;
    let len = d.data().len();
    for off in 0..len {
        let idx = d.multi_index(off);
        let a = idx[v.upper];
        let mut src: Vec<usize> = idx[..v.upper].to_vec();
        src.extend_from_slice(&idx[v.upper + 1..]);
        let mut corr = 0.0;
        for slot in 0..v.rank() {
            let orig = src[slot];
            for c in 0..m {
                src[slot] = c;
                let tv = t.get(&src);
                if slot < v.upper {
                    corr += gamma.get(orig, a, c) * tv;
                } else {
                    corr -= gamma.get(c, a, orig) * tv;
                }
            }
            src[slot] = orig;
        }
        debug_assert_eq!(idx.len(), rank_out);
        d.data_mut()[off] += corr;
    }
}

/// Covariant derivative ∇T at `p` (derivative index first among lower slots).
pub fn covariant_derivative(field: &TensorField, p: &[f64], step: f64) -> Result<Tensor> {
    field.chart.check_point(p, 2.0 * step)?;
    let mut d = partial_derivative(field, p, step)?;
    let gamma = christoffel(&field.chart, p, step)?;
    if gamma.max_abs() != 0.0 {
        let t = field.eval(p)?;
        apply_connection(&t, &mut d, &gamma);
    }
    Ok(d)
}

/// The field ∇T, evaluated lazily by nested finite differences.
pub fn nabla(field: &TensorField, step: f64) -> TensorField {
    let f = field.clone();
    let v = field.valence;
    TensorField::new_fallible(field.chart.clone(), Valence { upper: v.upper, lower: v.lower + 1 }, move |p| {
        covariant_derivative(&f, p, step)
    })
}

/// Raise every lower index and lower every upper index of `t` with g.
fn dualize(t: &Tensor, g: &DMatrix<f64>, ginv: &DMatrix<f64>) -> Tensor {
    let v = t.valence();
    let mut out = t.clone();
    for slot in 0..v.rank() {
        out = if slot < v.upper { out.transform_slot(slot, g) } else { out.transform_slot(slot, ginv) };
    }
    out
}

/// Full metric contraction ⟨T1, T2⟩_g at `p`.
pub fn inner(chart: &ChartMetric, p: &[f64], t1: &Tensor, t2: &Tensor) -> Result<f64> {
    t1.check_same_shape(t2)?;
    let g = chart.metric(p)?;
    let ginv = super::chart::invert_metric(&g, p)?;
    dualize(t2, &g, &ginv).dot(t1)
}

/// Inner product of k-forms, (1/k!) times the full contraction.
pub fn form_inner(chart: &ChartMetric, p: &[f64], t1: &Tensor, t2: &Tensor) -> Result<f64> {
    let k = t1.valence().lower;
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    Ok(inner(chart, p, t1, t2)? / fact)
}

/// Pointwise metric norm.
pub fn norm(chart: &ChartMetric, p: &[f64], t: &Tensor) -> Result<f64> {
    Ok(inner(chart, p, t, t)?.max(0.0).sqrt())
}
