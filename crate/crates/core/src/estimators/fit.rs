use serde::Serialize;

use crate::error::{Error, Result};

pub const MIN_FIT_POINTS: usize = 4;

/// Ordinary least squares of `ln(value)` on `ln(scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub n_points: usize,
    pub range: (f64, f64),
}

pub fn powerlaw_fit(scales: &[f64], values: &[f64]) -> Result<ScalingFit> {
    if scales.len() != values.len() {
        return Err(Error::InvalidParameter(format!(
            "{} scales but {} values",
            scales.len(),
            values.len()
        )));
    }
    let n = scales.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "power-law fit needs at least {MIN_FIT_POINTS} points, got {n}"
        )));
    }
    for (&s, &v) in scales.iter().zip(values) {
        if s <= 0.0 || !s.is_finite() {
            return Err(Error::InvalidParameter(format!("scale {s} must be positive")));
        }
        if v <= 0.0 || !v.is_finite() {
            return Err(Error::NonPositiveValue { scale: s, value: v });
        }
    }
    let lx: Vec<f64> = scales.iter().map(|s| s.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let nf = n as f64;
    let mx = lx.iter().sum::<f64>() / nf;
    let my = ly.iter().sum::<f64>() / nf;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all scales are equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = (ssr / (nf - 2.0) / sxx).sqrt();
    let lo = scales.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scales.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(ScalingFit {
        exponent: slope,
        intercept,
        stderr,
        n_points: n,
        range: (lo, hi),
    })
}
