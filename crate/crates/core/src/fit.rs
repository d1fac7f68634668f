//! Least-squares power-law fits on log–log data.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FitOutcome {
    Fitted(LogLogFit),
    /// Data with a zero or non-finite ordinate cannot be fitted.
    Degenerate(String),
}

impl FitOutcome {
    pub fn slope(&self) -> Option<f64> {
        match self {
            FitOutcome::Fitted(f) => Some(f.slope),
            FitOutcome::Degenerate(_) => None,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, FitOutcome::Degenerate(_))
    }
}

/// Fit log y = slope * log x + intercept.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> FitOutcome {
    assert_eq!(xs.len(), ys.len());
    if xs.len() < 2 {
        return FitOutcome::Degenerate("fewer than two points".into());
    }
    if let Some(y) = ys.iter().find(|y| !(y.is_finite() && **y > 0.0)) {
        return FitOutcome::Degenerate(format!("ordinate {y} is not positive"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return FitOutcome::Degenerate("abscissae coincide".into());
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    FitOutcome::Fitted(LogLogFit { slope, intercept, r_squared })
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_data_is_degenerate() {
        assert!(loglog_fit(&[1.0, 2.0], &[0.0, 0.0]).is_degenerate());
    }

    proptest! {
        #[test]
        fn exact_power_laws_are_recovered(p in -8.0f64..8.0, c in 0.1f64..10.0) {
            let xs = logspace(1.0, 100.0, 9);
            let ys: Vec<f64> = xs.iter().map(|x| c * x.powf(p)).collect();
            match loglog_fit(&xs, &ys) {
                FitOutcome::Fitted(f) => {
                    prop_assert!((f.slope - p).abs() < 1e-9);
                    prop_assert!((f.intercept - c.ln()).abs() < 1e-8);
                }
                FitOutcome::Degenerate(_) => prop_assert!(false),
            }
        }
    }
}
