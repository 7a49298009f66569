//! Closed-form and truncated-sum properties of MC-ARFIMA models.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{ComponentKind, ModelSpec};
use crate::error::{Error, Result};
use crate::fir::WeightVector;

/// Truncation of the theoretical cross-correlation sums.
pub const DEFAULT_CCF_TRUNCATION: usize = 100_000;

const X_SLOTS: [usize; 2] = [0, 1];
const Y_SLOTS: [usize; 2] = [2, 3];

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentReport {
    pub h_x: f64,
    pub h_y: f64,
    pub h_xy: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    /// 1-based innovation slots of the cross pair that sets `h_xy`; `None`
    /// when the series are at most short-range cross-correlated.
    pub dominating_pair: Option<(usize, usize)>,
}

fn weight_table(model: &ModelSpec, truncation: usize) -> Result<[WeightVector; 4]> {
    let comps = model.components();
    let mut out = Vec::with_capacity(4);
    for c in comps {
        out.push(c.kind.weights(truncation)?);
    }
    Ok(out.try_into().expect("four components"))
}

/// `Σ_k a_{k+lag} b_k` over the stored weights.
fn lagged_dot(a: &[f64], b: &[f64], lag: usize) -> f64 {
    if lag >= a.len() {
        return 0.0;
    }
    a[lag..].iter().zip(b).map(|(p, q)| p * q).sum()
}

fn series_variance(model: &ModelSpec, weights: &[WeightVector; 4], slots: [usize; 2]) -> f64 {
    let comps = model.components();
    let mut var = 0.0;
    for &i in &slots {
        for &j in &slots {
            let coef = comps[i].weight * comps[j].weight * model.covariance.covariance(i, j);
            if coef != 0.0 {
                var += coef * lagged_dot(weights[i].weights(), weights[j].weights(), 0);
            }
        }
    }
    var
}

/// Asymptotic Hurst exponents plus the process standard deviations under
/// truncation `M`.
///
/// A cross pair contributes only when `w_i w_j σ_ij ≠ 0`; `H_xy` is the
/// largest `(H_i + H_j) / 2` over contributing pairs and 0.5 when none
/// carries long memory.
pub fn theoretical_exponents(model: &ModelSpec, truncation: usize) -> Result<ExponentReport> {
    model.validate()?;
    let comps = model.components();
    let series_h = |slots: [usize; 2]| {
        slots
            .iter()
            .filter(|&&i| comps[i].weight != 0.0)
            .map(|&i| comps[i].kind.hurst())
            .fold(0.5, f64::max)
    };
    let h_x = series_h(X_SLOTS);
    let h_y = series_h(Y_SLOTS);

    let mut h_xy = 0.5;
    let mut dominating_pair = None;
    for &i in &X_SLOTS {
        for &j in &Y_SLOTS {
            let coef = comps[i].weight * comps[j].weight * model.covariance.covariance(i, j);
            if coef == 0.0 {
                continue;
            }
            let h = 0.5 * (comps[i].kind.hurst() + comps[j].kind.hurst());
            if h > h_xy {
                h_xy = h;
                dominating_pair = Some((i + 1, j + 1));
            }
        }
    }

    let weights = weight_table(model, truncation)?;
    Ok(ExponentReport {
        h_x,
        h_y,
        h_xy,
        sigma_x: series_variance(model, &weights, X_SLOTS).sqrt(),
        sigma_y: series_variance(model, &weights, Y_SLOTS).sqrt(),
        dominating_pair,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoreticalCcf {
    pub lags: Vec<i64>,
    pub values: Vec<f64>,
}

impl TheoreticalCcf {
    pub fn at(&self, lag: i64) -> Option<f64> {
        let max = *self.lags.last()?;
        (lag.abs() <= max).then(|| self.values[(lag + max) as usize])
    }
}

/// `ρ_xy(i)` for `i = -L..=L` from the MA weights truncated at `K`.
///
/// Positive lags shift the `x` weights (`Σ_k a_{k+i} b_k`, the correlation
/// of `x_{t+i}` with `y_t`); negative lags shift the `y` weights. The
/// values are the exact cross-correlations of the process whose filters
/// stop at index `K`, so they stay within `[-1, 1]`.
pub fn theoretical_ccf(model: &ModelSpec, max_lag: usize, truncation: usize) -> Result<TheoreticalCcf> {
    model.validate()?;
    if truncation < max_lag + 100 {
        return Err(Error::InvalidParameter(format!(
            "truncation {truncation} must be at least max_lag + 100 = {}",
            max_lag + 100
        )));
    }
    let weights = weight_table(model, truncation)?;
    let sx2 = series_variance(model, &weights, X_SLOTS);
    let sy2 = series_variance(model, &weights, Y_SLOTS);
    if sx2 <= 0.0 || sy2 <= 0.0 {
        return Err(Error::DegenerateSeries);
    }
    let norm = (sx2 * sy2).sqrt();

    let comps = model.components();
    let mut pairs = Vec::new();
    for &i in &X_SLOTS {
        for &j in &Y_SLOTS {
            let coef = comps[i].weight * comps[j].weight * model.covariance.covariance(i, j);
            if coef != 0.0 {
                pairs.push((coef / norm, i, j));
            }
        }
    }

    let lags: Vec<i64> = (-(max_lag as i64)..=max_lag as i64).collect();
    let values = lags
        .par_iter()
        .map(|&lag| {
            pairs
                .iter()
                .map(|&(c, i, j)| {
                    let (a, b) = (weights[i].weights(), weights[j].weights());
                    let s = if lag >= 0 {
                        lagged_dot(a, b, lag as usize)
                    } else {
                        lagged_dot(b, a, lag.unsigned_abs() as usize)
                    };
                    c * s
                })
                .sum()
        })
        .collect();
    Ok(TheoreticalCcf { lags, values })
}

/// Rough size of the correlation mass dropped by truncating the sums at
/// `K`: `Σ_{k>K} a_k b_k ≈ K a_K b_K / (1 - d_i - d_j)` per cross pair.
pub fn ccf_truncation_bound(model: &ModelSpec, truncation: usize) -> Result<f64> {
    let report = theoretical_exponents(model, truncation)?;
    let norm = report.sigma_x * report.sigma_y;
    if norm <= 0.0 {
        return Err(Error::DegenerateSeries);
    }
    let comps = model.components();
    let mut bound = 0.0;
    for &i in &X_SLOTS {
        for &j in &Y_SLOTS {
            let coef = comps[i].weight * comps[j].weight * model.covariance.covariance(i, j);
            if coef == 0.0 {
                continue;
            }
            let wi = comps[i].kind.weights(truncation)?.get(truncation);
            let wj = comps[j].kind.weights(truncation)?.get(truncation);
            let expo = 1.0 - comps[i].kind.memory() - comps[j].kind.memory();
            bound += (coef / norm).abs() * truncation as f64 * (wi * wj).abs() / expo;
        }
    }
    Ok(bound)
}

/// `(1 - e^{iλ})^{-d}`; the principal branch is continuous on `(0, π]`.
fn frac_transfer(d: f64, lambda: f64) -> Complex64 {
    let z = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, lambda);
    (-d * z.ln()).exp()
}

/// Cross-power spectrum `f_xy(λ)` of a four-ARFIMA model.
pub fn cross_spectrum(model: &ModelSpec, lambda: f64) -> Result<Complex64> {
    model.validate()?;
    if !lambda.is_finite() || lambda <= 0.0 || lambda > std::f64::consts::PI {
        return Err(Error::InvalidParameter(format!(
            "frequency must lie in (0, pi], got {lambda}"
        )));
    }
    let comps = model.components();
    let mut total = Complex64::new(0.0, 0.0);
    for c in comps {
        if !matches!(c.kind, ComponentKind::Fractional(_)) {
            return Err(Error::UnsupportedComponent(
                "cross spectrum has a closed form only for four fractional components".into(),
            ));
        }
    }
    for &i in &X_SLOTS {
        for &j in &Y_SLOTS {
            let coef = comps[i].weight * comps[j].weight * model.covariance.covariance(i, j);
            if coef == 0.0 {
                continue;
            }
            let term = frac_transfer(comps[i].kind.memory(), lambda)
                * frac_transfer(comps[j].kind.memory(), -lambda);
            total += term * coef;
        }
    }
    Ok(total / (2.0 * std::f64::consts::PI))
}
