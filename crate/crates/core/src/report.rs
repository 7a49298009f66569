//! Lagged scatter data and theory-versus-sample CCF tables.

use crate::error::{Error, Result};
use crate::estimators::sample_ccf;
use crate::models::{ccf_truncation_bound, theoretical_ccf, BivariateSeries, ModelSpec};

/// Points emitted per lag when writing scatter data.
pub const SCATTER_POINT_CAP: usize = 5_000;

/// Aligned pairs `(x_{t+lag}, y_t)` with the least-squares line of the
/// first coordinate on the second.
#[derive(Debug, Clone, PartialEq)]
pub struct LagScatter {
    pub lag: i64,
    pub pairs: Vec<(f64, f64)>,
    pub ls_slope: f64,
    pub ls_intercept: f64,
    pub slope_stderr: f64,
}

impl LagScatter {
    /// Deterministic stride subsample of at most `cap` pairs.
    pub fn thinned(&self, cap: usize) -> Vec<(f64, f64)> {
        if self.pairs.len() <= cap || cap == 0 {
            return self.pairs.clone();
        }
        let stride = self.pairs.len().div_ceil(cap);
        self.pairs.iter().step_by(stride).copied().collect()
    }
}

/// Pairs `x[t+lag]` with `y[t]` for `lag ≥ 0`, `x[t]` with `y[t+|lag|]`
/// otherwise, and regresses the `x` values on the `y` values.
pub fn lag_scatter(series: &BivariateSeries, lag: i64) -> Result<LagScatter> {
    let n = series.len();
    let k = lag.unsigned_abs() as usize;
    if k >= n {
        return Err(Error::InvalidParameter(format!(
            "|lag| = {k} must be below the series length {n}"
        )));
    }
    let m = n - k;
    let pairs: Vec<(f64, f64)> = if lag >= 0 {
        (0..m).map(|t| (series.x[t + k], series.y[t])).collect()
    } else {
        (0..m).map(|t| (series.x[t], series.y[t + k])).collect()
    };
    let mf = m as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / mf;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / mf;
    let syy: f64 = pairs.iter().map(|p| (p.1 - my).powi(2)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if syy == 0.0 {
        return Err(Error::DegenerateSeries);
    }
    let slope = sxy / syy;
    let intercept = mx - slope * my;
    let slope_stderr = if m > 2 {
        let ssr: f64 = pairs
            .iter()
            .map(|p| (p.0 - intercept - slope * p.1).powi(2))
            .sum();
        (ssr / (mf - 2.0) / syy).sqrt()
    } else {
        f64::NAN
    };
    Ok(LagScatter {
        lag,
        pairs,
        ls_slope: slope,
        ls_intercept: intercept,
        slope_stderr,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcfRow {
    pub lag: i64,
    pub sample: f64,
    pub theory: f64,
    pub abs_diff: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcfComparison {
    pub rows: Vec<CcfRow>,
    /// `3/√T + truncation bound`; rows beyond it are flagged.
    pub threshold: f64,
}

impl CcfComparison {
    pub fn row(&self, lag: i64) -> Option<&CcfRow> {
        self.rows.iter().find(|r| r.lag == lag)
    }
}

/// Joins a realization's sample CCF with the model's theoretical CCF.
pub fn ccf_comparison(
    model: &ModelSpec,
    series: &BivariateSeries,
    max_lag: usize,
    truncation: usize,
) -> Result<CcfComparison> {
    let sample = sample_ccf(&series.x, &series.y, max_lag)?;
    let theory = theoretical_ccf(model, max_lag, truncation)?;
    let threshold =
        3.0 / (series.len() as f64).sqrt() + ccf_truncation_bound(model, truncation)?;
    Ok(join(&sample.lags, &sample.values, &theory.values, threshold))
}

/// Same join for a pre-averaged sample CCF (e.g. the mean over replications).
pub fn join(lags: &[i64], sample: &[f64], theory: &[f64], threshold: f64) -> CcfComparison {
    let rows = lags
        .iter()
        .zip(sample.iter().zip(theory))
        .map(|(&lag, (&s, &t))| {
            let abs_diff = (s - t).abs();
            CcfRow {
                lag,
                sample: s,
                theory: t,
                abs_diff,
                flagged: abs_diff > threshold,
            }
        })
        .collect();
    CcfComparison { rows, threshold }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::simulate;

    #[test]
    fn identical_series_regress_to_identity() {
        let x: Vec<f64> = (0..50).map(|t| (t as f64 * 0.37).sin()).collect();
        let s = BivariateSeries::new(x.clone(), x, 0).unwrap();
        let sc = lag_scatter(&s, 0).unwrap();
        assert!((sc.ls_slope - 1.0).abs() < 1e-12);
        assert!(sc.ls_intercept.abs() < 1e-12);
        assert_eq!(sc.pairs.len(), 50);
        assert_eq!(lag_scatter(&s, -7).unwrap().pairs.len(), 43);
        assert!(lag_scatter(&s, 50).is_err());
    }

    #[test]
    fn thinning_caps_points() {
        let x: Vec<f64> = (0..12_001).map(|t| t as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| v.sqrt()).collect();
        let s = BivariateSeries::new(x, y, 0).unwrap();
        let sc = lag_scatter(&s, 1).unwrap();
        let thin = sc.thinned(SCATTER_POINT_CAP);
        assert!(thin.len() <= SCATTER_POINT_CAP);
        assert_eq!(thin[0], sc.pairs[0]);
        assert_eq!(thin, sc.thinned(SCATTER_POINT_CAP));
    }

    #[test]
    fn slope_consistent_with_segment_correlation() {
        let s = simulate(&ModelSpec::model1(), 3000, 12, 3000).unwrap();
        for lag in [0i64, 1, 5, -5, 20] {
            let sc = lag_scatter(&s, lag).unwrap();
            let m = sc.pairs.len() as f64;
            let mx = sc.pairs.iter().map(|p| p.0).sum::<f64>() / m;
            let my = sc.pairs.iter().map(|p| p.1).sum::<f64>() / m;
            let vy = sc.pairs.iter().map(|p| (p.1 - my).powi(2)).sum::<f64>() / m;
            let vx = sc.pairs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>() / m;
            let cov = sc.pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / m;
            // slope · var(y-segment) / (s_x s_y) is the segment correlation
            let r = cov / (vx * vy).sqrt();
            assert!((sc.ls_slope * vy / (vx * vy).sqrt() - r).abs() < 1e-8);
            // and it tracks the global-normalisation CCF estimate
            let ccf = crate::estimators::sample_ccf(&s.x, &s.y, 20).unwrap();
            assert!((r - ccf.at(lag).unwrap()).abs() < 0.1);
        }
    }

    #[test]
    fn model3_theory_column_is_zero_off_lag_zero() {
        let m = ModelSpec::model3();
        let s = simulate(&m, 2000, 3, 2000).unwrap();
        let table = ccf_comparison(&m, &s, 10, 2000).unwrap();
        for row in &table.rows {
            if row.lag != 0 {
                assert_eq!(row.theory, 0.0);
            }
        }
        assert!(table.row(0).unwrap().theory > 0.25);
    }

    #[test]
    fn model2_tail_is_small() {
        let m = ModelSpec::model2();
        let s = simulate(&m, 10_000, 8, 10_000).unwrap();
        let table = ccf_comparison(&m, &s, 60, 10_000).unwrap();
        for row in table.rows.iter().filter(|r| r.lag.abs() > 30) {
            assert!(row.theory.abs() < 0.02);
        }
    }
}
