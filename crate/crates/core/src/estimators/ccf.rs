use rayon::prelude::*;

use crate::error::{Error, Result};

/// Sample cross-correlations at lags `-L..=L`.
#[derive(Debug, Clone, PartialEq)]
pub struct CcfSeries {
    pub lags: Vec<i64>,
    pub values: Vec<f64>,
    /// Sample size the estimates came from.
    pub len: usize,
}

impl CcfSeries {
    pub fn max_lag(&self) -> usize {
        self.lags.last().map_or(0, |l| *l as usize)
    }

    pub fn at(&self, lag: i64) -> Option<f64> {
        let max = self.max_lag() as i64;
        (lag.abs() <= max).then(|| self.values[(lag + max) as usize])
    }
}

fn mean_and_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// `ρ̂(k) = Σ_t (x_{t+k} - x̄)(y_t - ȳ) / ((T - k) s_x s_y)` for `k ≥ 0`;
/// negative lags shift `y` instead. `s_x`, `s_y` are the global standard
/// deviations with divisor `T`.
pub fn sample_ccf(x: &[f64], y: &[f64], max_lag: usize) -> Result<CcfSeries> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n <= 2 * max_lag {
        return Err(Error::InsufficientData(format!(
            "need more than {} observations for max lag {max_lag}, got {n}",
            2 * max_lag
        )));
    }
    let (mx, sx) = mean_and_sd(x);
    let (my, sy) = mean_and_sd(y);
    if !(sx > 0.0 && sy > 0.0) {
        return Err(Error::DegenerateSeries);
    }
    let xc: Vec<f64> = x.iter().map(|v| v - mx).collect();
    let yc: Vec<f64> = y.iter().map(|v| v - my).collect();
    let norm = sx * sy;
    let lags: Vec<i64> = (-(max_lag as i64)..=max_lag as i64).collect();
    let values = lags
        .par_iter()
        .map(|&lag| {
            let k = lag.unsigned_abs() as usize;
            let (lead, trail) = if lag >= 0 { (&xc, &yc) } else { (&yc, &xc) };
            let s: f64 = lead[k..].iter().zip(&trail[..n - k]).map(|(a, b)| a * b).sum();
            s / ((n - k) as f64 * norm)
        })
        .collect();
    Ok(CcfSeries {
        lags,
        values,
        len: n,
    })
}
