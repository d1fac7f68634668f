//! Approximate Einstein metrics on the gluing neck and their residuals.
//!
//! Work in the inner coordinate x of the Calabi space; the orbifold normal
//! coordinate is z = √t x. The orbifold metric is represented by its
//! quadratic jet g_0(z) = g_euc + H(z), so φ_t^*g_0 = t(g_euc + tH(x)).
//! The glued metric on the annulus ¼t^{−1/4} < r < 4t^{−1/4} is
//!
//! g_t = t [ g_euc + tH(x) + χ_t(r)(g_cal(x) − g_euc) ],
//!
//! equal to t·(g_cal + tH) where χ_t = 1 and to φ_t^*g_0 where χ_t = 0.
//! Ricci is scale invariant, so residuals are computed for ĝ = g_t/t with
//! Einstein constant tΛ.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::calabi::{cartesian_metric, probe_directions, CalabiParams};
use crate::deform_ops::deformation_tensor;
use crate::error::{GeomError, Result};
use crate::fit::{loglog_fit, FitOutcome};
use crate::obstruction::{gauge_tensor_h, obstruction_lambda_closed, CurvatureData, QuadraticTensor};
use crate::tensor_core::{curvature, ChartMetric, Domain};

/// Quintic smoothstep on [0, 1], clamped.
pub fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
}

/// χ(s) = 1 for s ≤ ½, 0 for s ≥ 2, quintic in between.
pub fn cutoff_chi(s: f64) -> f64 {
    1.0 - smoothstep((s - 0.5) / 1.5)
}

/// χ_t(r) = χ(t^{1/4} r).
pub fn cutoff_chi_t(r: f64, t: f64) -> f64 {
    cutoff_chi(t.powf(0.25) * r)
}

/// ρ = 1 for r ≤ 1, r for r ≥ 2, smooth and monotone in between.
pub fn rho(r: f64) -> f64 {
    let s = smoothstep(r - 1.0);
    (1.0 - s) + s * r
}

/// Where the weight function is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Location {
    /// Inner coordinate radius r = |x| on the neck.
    Neck(f64),
    /// Orbifold normal-coordinate radius |z|.
    Orbifold(f64),
}

/// Weight function: t^{1/2}ρ(r) on the neck; on the orbifold side |z| up to
/// half the injectivity radius, blended to 1 at the injectivity radius.
pub fn weight_w(loc: Location, t: f64, injectivity_radius: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(GeomError::InvalidConfig(format!("t must be positive, got {t}")));
    }
    if !(injectivity_radius > 0.0 && injectivity_radius <= 1.0) {
        return Err(GeomError::InvalidConfig(format!(
            "injectivity radius must lie in (0, 1], got {injectivity_radius}"
        )));
    }
    match loc {
        Location::Neck(r) => {
            if r < 0.0 {
                return Err(GeomError::NonPositiveRadius(r));
            }
            Ok(t.sqrt() * rho(r))
        }
        Location::Orbifold(z) => {
            if z < 0.0 {
                return Err(GeomError::NonPositiveRadius(z));
            }
            let i = injectivity_radius;
            let s = smoothstep((z - 0.5 * i) / (0.5 * i));
            Ok((1.0 - s) * z + s)
        }
    }
}

/// Parameters of one glued metric.
#[derive(Debug, Clone)]
pub struct GlueConfig {
    pub data: CurvatureData,
    pub t: f64,
    /// Include the −tλχ_t o counterterm in the residual.
    pub counterterm: bool,
}

/// Derived quantities shared by all evaluations at one t.
#[derive(Clone)]
pub struct GluedMetric {
    pub n: usize,
    pub t: f64,
    pub lambda_orbifold: f64,
    /// Coefficient of o in the residual.
    pub lambda_o: f64,
    pub h: Arc<QuadraticTensor>,
    pub chart: Arc<ChartMetric>,
    params: CalabiParams,
}

/// Annulus radii ¼t^{−1/4} and 4t^{−1/4}.
pub fn annulus(t: f64) -> (f64, f64) {
    let s = t.powf(-0.25);
    (0.25 * s, 4.0 * s)
}

fn glued_components(x: &[f64], t: f64, h: &QuadraticTensor, params: &CalabiParams) -> Result<DMatrix<f64>> {
    let m = x.len();
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let chi = cutoff_chi_t(r, t);
    let mut g = DMatrix::identity(m, m) + h.field_at(x) * t;
    if chi > 0.0 {
        let gc = cartesian_metric(x, params)?;
        g += (gc - DMatrix::identity(m, m)) * chi;
    }
    Ok(g)
}

/// The rescaled glued metric ĝ = g_t/t on the annulus, with a positivity
/// scan over radial shells and probe directions.
pub fn refined_neck_metric(config: &GlueConfig) -> Result<GluedMetric> {
    let t = config.t;
    if !(t > 0.0 && t < 1.0) {
        return Err(GeomError::InvalidConfig(format!("t must lie in (0, 1), got {t}")));
    }
    let n = config.data.n;
    let m = 2 * n;
    let params = CalabiParams::new(n)?;
    let h = Arc::new(gauge_tensor_h(&config.data));
    let (r_lo, r_hi) = annulus(t);
    let lambda_o = if config.counterterm { obstruction_lambda_closed(&config.data)?.lambda_pde } else { 0.0 };
    for k in 0..=32 {
        let r = r_lo * (r_hi / r_lo).powf(k as f64 / 32.0);
        for d in probe_directions(m) {
            let x: Vec<f64> = d.iter().map(|c| c * r).collect();
            let g = glued_components(&x, t, &h, &params)?;
            let ok = g.clone().symmetric_eigenvalues().iter().all(|e| *e > 0.0);
            if !ok {
                return Err(GeomError::TTooLarge { t, point: x });
            }
        }
    }
    let hc = h.clone();
    let chart =
        ChartMetric::new(format!("glued-n{n}-t{t:e}"), m, Domain::Shell { r_min: r_lo, r_max: r_hi }, r_lo, move |x| {
            glued_components(x, t, &hc, &params).unwrap_or_else(|_| DMatrix::from_element(m, m, f64::NAN))
        });
    Ok(GluedMetric { n, t, lambda_orbifold: config.data.lambda, lambda_o, h, chart: Arc::new(chart), params })
}

impl GluedMetric {
    /// |Ric(ĝ) − tΛ ĝ − tλ χ_t o|_{g_cal} at x.
    pub fn einstein_residual(&self, x: &[f64]) -> Result<f64> {
        let step = self.chart.default_step();
        let cb = curvature(&self.chart, x, step)?;
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let chi = cutoff_chi_t(r, self.t);
        let mut e = &cb.ricci - &cb.metric * (self.t * self.lambda_orbifold);
        if self.lambda_o != 0.0 && chi > 0.0 {
            let o = deformation_tensor(x, self.n)?.to_matrix()?;
            e -= o * (self.t * self.lambda_o * chi);
        }
        let gc = cartesian_metric(x, &self.params)?;
        let ginv = gc.cholesky().ok_or_else(|| GeomError::SingularMetric { point: x.to_vec() })?.inverse();
        let up = &ginv * &e * &ginv;
        Ok(up.component_mul(&e).sum().max(0.0).sqrt())
    }

    /// Largest |Ric(g_cal)|_{g_cal} over the probe directions at radius r, with
    /// the same chart step as the glued metric: the finite-difference floor.
    pub fn noise_floor_at(&self, r: f64) -> Result<f64> {
        let m = 2 * self.n;
        let params = self.params;
        let cal =
            ChartMetric::new("calabi-floor", m, self.chart.domain.clone(), self.chart.regularity_scale, move |x| {
                cartesian_metric(x, &params).unwrap_or_else(|_| DMatrix::from_element(m, m, f64::NAN))
            });
        let step = cal.default_step();
        let mut worst: f64 = 0.0;
        for d in probe_directions(m) {
            let x: Vec<f64> = d.iter().map(|c| c * r).collect();
            let cb = curvature(&cal, &x, step)?;
            let up = &cb.inverse * &cb.ricci * &cb.inverse;
            worst = worst.max(up.component_mul(&cb.ricci).sum().max(0.0).sqrt());
        }
        Ok(worst)
    }

    /// Largest residual over the probe directions at radius r.
    pub fn sup_residual_at(&self, r: f64) -> Result<f64> {
        let m = 2 * self.n;
        let vals = probe_directions(m)
            .into_iter()
            .map(|d| {
                let x: Vec<f64> = d.iter().map(|c| c * r).collect();
                self.einstein_residual(&x)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(vals.into_iter().fold(0.0, f64::max))
    }
}

pub fn einstein_residual(config: &GlueConfig, x: &[f64]) -> Result<f64> {
    refined_neck_metric(config)?.einstein_residual(x)
}

/// One row of a residual sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub t: f64,
    /// Inner radius r = s·t^{−1/4} at which the residual is taken.
    pub r: f64,
    pub rho: f64,
    pub sup_residual: f64,
    /// |Ric(g_cal)| at the same radius and step.
    pub noise_floor: f64,
    /// Residual in the combined units t²ρ².
    pub normalised: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub n: usize,
    /// Fixed damage-zone position s = r·t^{1/4}.
    pub position: f64,
    pub counterterm: bool,
    pub rows: Vec<SweepRow>,
    /// Predicted exponent of t at fixed s: t²ρ² with ρ ∝ t^{−1/4}.
    pub predicted_slope: f64,
    pub fit: FitOutcome,
    /// Set when the model has H = 0 and Λ = 0, so the predicted term vanishes.
    pub flat_model: bool,
}

impl SweepReport {
    pub fn slope_error(&self) -> Option<f64> {
        self.fit.slope().map(|s| (s - self.predicted_slope).abs())
    }
}

pub const PREDICTED_SLOPE: f64 = 1.5;

/// Check the t-grid: at least 5 values spanning at least 1.5 decades.
pub fn check_t_values(ts: &[f64]) -> Result<()> {
    if ts.len() < 5 {
        return Err(GeomError::InsufficientTRange(format!("{} values of t, need at least 5", ts.len())));
    }
    if ts.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
        return Err(GeomError::InsufficientTRange("every t must lie in (0, 1)".into()));
    }
    let lo = ts.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ts.iter().cloned().fold(0.0, f64::max);
    let decades = (hi / lo).log10();
    if decades < 1.5 - 1e-12 {
        return Err(GeomError::InsufficientTRange(format!("t spans {decades:.3} decades, need at least 1.5")));
    }
    Ok(())
}

/// Sup-residual at r = s·t^{−1/4} for each t, with a log–log fit against t.
pub fn residual_sweep(data: &CurvatureData, ts: &[f64], position: f64, counterterm: bool) -> Result<SweepReport> {
    check_t_values(ts)?;
    if !(position > 0.25 && position < 4.0) {
        return Err(GeomError::InvalidConfig(format!("position {position} is outside the annulus (1/4, 4)")));
    }
    let rows = ts
        .par_iter()
        .map(|&t| {
            let g = refined_neck_metric(&GlueConfig { data: data.clone(), t, counterterm })?;
            let r = position * t.powf(-0.25);
            let sup = g.sup_residual_at(r)?;
            let noise_floor = g.noise_floor_at(r)?;
            let rh = rho(r);
            Ok(SweepRow { t, r, rho: rh, sup_residual: sup, noise_floor, normalised: sup / (t * t * rh * rh) })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.sup_residual).collect();
    let flat_model = data.lambda == 0.0 && data.riemann().iter().all(|v| *v == 0.0);
    Ok(SweepReport {
        n: data.n,
        position,
        counterterm,
        rows,
        predicted_slope: PREDICTED_SLOPE,
        fit: loglog_fit(&xs, &ys),
        flat_model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_core::curvature;

    #[test]
    fn cutoff_profile() {
        let t: f64 = 1e-4;
        assert_eq!(cutoff_chi_t(0.5 * t.powf(-0.25), t), 1.0);
        assert_eq!(cutoff_chi_t(2.0 * t.powf(-0.25), t), 0.0);
        let mid = cutoff_chi_t(t.powf(-0.25), t);
        assert!(mid > 0.0 && mid < 1.0);
        let mut prev = 1.0;
        for k in 0..200 {
            let v = cutoff_chi(0.4 + k as f64 * 0.01);
            assert!(v <= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn rho_and_weight() {
        assert_eq!(rho(0.5), 1.0);
        assert_eq!(rho(3.0), 3.0);
        let t = 1e-4;
        assert!((weight_w(Location::Neck(1.0), t, 1.0).unwrap() - t.sqrt()).abs() < 1e-15);
        assert_eq!(weight_w(Location::Orbifold(1.5), t, 1.0).unwrap(), 1.0);
        let r = t.powf(-0.25);
        let a = weight_w(Location::Neck(r), t, 1.0).unwrap();
        let b = weight_w(Location::Orbifold(r * t.sqrt()), t, 1.0).unwrap();
        assert!((a - t.powf(0.25)).abs() < 1e-14 && (a - b).abs() < 1e-14);
        let mut prev = 0.0;
        for k in 1..400 {
            let z = k as f64 * 0.003;
            let w = weight_w(Location::Orbifold(z), t, 0.8).unwrap();
            assert!(w >= prev - 1e-15);
            prev = w;
        }
    }

    #[test]
    fn branches_agree_exactly() {
        let data = CurvatureData::football(3).unwrap();
        let t = 1e-4;
        let g = refined_neck_metric(&GlueConfig { data, t, counterterm: true }).unwrap();
        let (lo, hi) = annulus(t);
        let params = CalabiParams::new(3).unwrap();
        let inner = [lo * 1.2, 0.0, 0.0, 0.0, 0.0, 0.0];
        let want = cartesian_metric(&inner, &params).unwrap() + g.h.field_at(&inner) * t;
        assert_eq!(g.chart.metric(&inner).unwrap(), want);
        let outer = [0.0, 0.0, hi * 0.9, 0.0, 0.0, 0.0];
        let want = DMatrix::identity(6, 6) + g.h.field_at(&outer) * t;
        assert_eq!(g.chart.metric(&outer).unwrap(), want);
    }

    #[test]
    fn ricci_is_scale_invariant() {
        let data = CurvatureData::football(2).unwrap();
        let g = refined_neck_metric(&GlueConfig { data, t: 1e-3, counterterm: true }).unwrap();
        let c = g.chart.clone();
        let scaled =
            ChartMetric::new("scaled", 4, c.domain.clone(), c.regularity_scale, move |x| c.eval_unchecked(x) * 7.0);
        let x = [5.0, 1.0, -2.0, 0.5];
        let a = curvature(&g.chart, &x, 1e-3).unwrap().ricci;
        let b = curvature(&scaled, &x, 1e-3).unwrap().ricci;
        assert!((a - b).abs().max() < 1e-9);
    }

    #[test]
    fn large_t_rejected() {
        let data = CurvatureData::constant_curvature(40.0, 3).unwrap();
        let e = refined_neck_metric(&GlueConfig { data, t: 0.5, counterterm: true });
        assert!(matches!(e, Err(GeomError::TTooLarge { .. })));
    }

    #[test]
    fn t_grid_checked() {
        assert!(check_t_values(&[1e-4, 1e-3, 1e-2]).is_err());
        assert!(check_t_values(&[1e-3, 2e-3, 3e-3, 4e-3, 5e-3]).is_err());
        assert!(check_t_values(&crate::fit::logspace(1e-4, 10f64.powf(-2.5), 5)).is_ok());
    }
}
