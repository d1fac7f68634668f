//! Coordinate charts carrying a metric.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{GeomError, Result};

pub type MetricFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;

/// Region of R^m on which a chart is defined.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    /// Axis-aligned box `lo <= x <= hi`.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Spherical shell `r_min <= |x| <= r_max` about the origin.
    Shell { r_min: f64, r_max: f64 },
}

impl Domain {
    pub fn contains(&self, p: &[f64], margin: f64) -> bool {
        match self {
            Domain::Box { lo, hi } => {
                p.iter().zip(lo.iter().zip(hi)).all(|(x, (l, h))| *x >= l + margin && *x <= h - margin)
            }
            Domain::Shell { r_min, r_max } => {
                let r = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                r >= r_min + margin && r <= r_max - margin
            }
        }
    }
}

/// A single chart with metric components g_ij(x).
#[derive(Clone)]
pub struct ChartMetric {
    pub name: String,
    pub dim: usize,
    pub domain: Domain,
    pub regularity_scale: f64,
    components: MetricFn,
}

impl std::fmt::Debug for ChartMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChartMetric")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .field("regularity_scale", &self.regularity_scale)
            .finish()
    }
}

impl ChartMetric {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        domain: Domain,
        regularity_scale: f64,
        components: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        ChartMetric { name: name.into(), dim, domain, regularity_scale, components: Arc::new(components) }
    }

    /// Finite-difference step used when none is given explicitly.
    pub fn default_step(&self) -> f64 {
        self.regularity_scale * 1e-3
    }

    pub fn check_point(&self, p: &[f64], margin: f64) -> Result<()> {
        if p.len() != self.dim {
            return Err(GeomError::DimensionMismatch { expected: self.dim, found: p.len() });
        }
        if !self.domain.contains(p, margin) {
            return Err(GeomError::PointOutsideDomain { point: p.to_vec(), margin });
        }
        Ok(())
    }

    /// Metric components at `p` without a domain check (used inside stencils).
    pub fn eval_unchecked(&self, p: &[f64]) -> DMatrix<f64> {
        (self.components)(p)
    }

    pub fn metric(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(p, 0.0)?;
        Ok(self.eval_unchecked(p))
    }

    pub fn inverse_metric(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let g = self.metric(p)?;
        invert_metric(&g, p)
    }

    /// Smallest eigenvalue of g at `p`.
    pub fn min_eigenvalue(&self, p: &[f64]) -> Result<f64> {
        let g = self.metric(p)?;
        Ok(g.symmetric_eigenvalues().min())
    }

    pub fn is_positive_definite(&self, p: &[f64]) -> Result<bool> {
        Ok(self.min_eigenvalue(p)? > 0.0)
    }
}

pub(crate) fn invert_metric(g: &DMatrix<f64>, p: &[f64]) -> Result<DMatrix<f64>> {
    g.clone().cholesky().map(|c| c.inverse()).ok_or_else(|| GeomError::SingularMetric { point: p.to_vec() })
}

/// Flat metric on the box [-half_width, half_width]^m.
pub fn euclidean(dim: usize, half_width: f64) -> ChartMetric {
    ChartMetric::new(
        format!("euclidean-{dim}"),
        dim,
        Domain::Box { lo: vec![-half_width; dim], hi: vec![half_width; dim] },
        1.0,
        move |_| DMatrix::identity(dim, dim),
    )
}

/// Diagonal entries of the round metric on S^k in hyperspherical angles
/// (phi_1, ..., phi_k): g = dphi_1^2 + sin^2 phi_1 dphi_2^2 + ...
fn sphere_diagonal(angles: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(angles.len());
    let mut w = 1.0;
    for a in angles {
        out.push(w);
        w *= a.sin().powi(2);
    }
    out
}

fn angle_box(k: usize) -> (Vec<f64>, Vec<f64>) {
    let lo = (0..k).map(|i| if i + 1 < k { 0.0 } else { -std::f64::consts::PI }).collect();
    let hi = vec![std::f64::consts::PI; k];
    (lo, hi)
}

/// Unit round sphere S^m in hyperspherical coordinates.
pub fn round_sphere(m: usize) -> ChartMetric {
    let (lo, hi) = angle_box(m);
    ChartMetric::new(format!("round-sphere-{m}"), m, Domain::Box { lo, hi }, 1.0, move |p| {
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(sphere_diagonal(p)))
    })
}

/// Hyperbolic space as dr^2 + sinh^2(r) g_{S^{m-1}} with coordinates
/// (r, phi_1, ..., phi_{m-1}).
pub fn hyperbolic_polar(m: usize, r_max: f64) -> ChartMetric {
    let (mut lo, mut hi) = angle_box(m - 1);
    lo.insert(0, 0.0);
    hi.insert(0, r_max);
    ChartMetric::new(format!("hyperbolic-polar-{m}"), m, Domain::Box { lo, hi }, 1.0, move |p| {
        let s2 = p[0].sinh().powi(2);
        let mut d = vec![1.0];
        d.extend(sphere_diagonal(&p[1..]).into_iter().map(|v| v * s2));
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d))
    })
}
