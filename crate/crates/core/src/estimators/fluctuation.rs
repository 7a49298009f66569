//! Profile-based fluctuation functions: DFA, DCCA and height
//! cross-correlation analysis (HXA) at moment order 2.
//!
//! DFA and DCCA share one code path. Boxes are non-overlapping and laid
//! from the start of the profile; a trailing partial box is dropped. The
//! in-box trend is removed by projecting onto an orthonormal polynomial
//! basis built once per scale.

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use super::fit::{powerlaw_fit, ScalingFit, MIN_FIT_POINTS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dfa,
    Dcca,
    Hxa,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Dfa => "dfa",
            Method::Dcca => "dcca",
            Method::Hxa => "hxa",
        }
    }
}

/// Inclusive arithmetic progression of box sizes (or τ values).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct ScaleRange {
    pub min: usize,
    pub max: usize,
    pub step: usize,
}

impl ScaleRange {
    pub fn new(min: usize, max: usize, step: usize) -> Self {
        Self { min, max, step }
    }

    pub fn scales(&self) -> Vec<usize> {
        if self.step == 0 || self.min > self.max {
            return Vec::new();
        }
        (self.min..=self.max).step_by(self.step).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.step == 0 {
            return Err(Error::InvalidParameter("scale step must be positive".into()));
        }
        if self.min > self.max {
            return Err(Error::InvalidParameter(format!(
                "scale range is empty: {} > {}",
                self.min, self.max
            )));
        }
        Ok(())
    }
}

/// `F²(s)` for DFA/DCCA or `K_xy(τ)` for HXA, one value per scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluctuationSeries {
    pub method: Method,
    pub scales: Vec<usize>,
    pub values: Vec<f64>,
}

impl FluctuationSeries {
    /// Log-log fit over the positive values, reported as a Hurst exponent.
    ///
    /// Every stored quantity is second order (`F² ∝ s^{2H}`,
    /// `K ∝ τ^{2H}`), so exponent and stderr are half the fitted slope and
    /// its standard error; the intercept stays on the log-value scale.
    /// Non-positive values are skipped with a warning, never rectified.
    pub fn hurst(&self) -> Result<ScalingFit> {
        let mut scales = Vec::with_capacity(self.scales.len());
        let mut values = Vec::with_capacity(self.values.len());
        for (&s, &v) in self.scales.iter().zip(&self.values) {
            if v > 0.0 && v.is_finite() {
                scales.push(s as f64);
                values.push(v);
            } else {
                warn!("{}: skipping scale {s} with non-positive value {v}", self.method.name());
            }
        }
        if scales.len() < MIN_FIT_POINTS {
            return Err(Error::InsufficientData(format!(
                "{}: only {} usable scales",
                self.method.name(),
                scales.len()
            )));
        }
        let fit = powerlaw_fit(&scales, &values)?;
        Ok(ScalingFit {
            exponent: fit.exponent / 2.0,
            stderr: fit.stderr / 2.0,
            ..fit
        })
    }
}

/// Cumulative sum of the demeaned series.
pub fn profile(x: &[f64]) -> Vec<f64> {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter()
        .scan(0.0, |acc, v| {
            *acc += v - mean;
            Some(*acc)
        })
        .collect()
}

/// Orthonormal basis of polynomials of degree `0..=order` sampled on
/// `0..len`, by modified Gram-Schmidt on centred, scaled monomials.
fn poly_basis(len: usize, order: usize) -> Vec<Vec<f64>> {
    let centre = (len as f64 - 1.0) / 2.0;
    let scale = len as f64;
    let u: Vec<f64> = (0..len).map(|t| (t as f64 - centre) / scale).collect();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(order + 1);
    for deg in 0..=order {
        let mut v: Vec<f64> = u.iter().map(|x| x.powi(deg as i32)).collect();
        for q in &basis {
            let c: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        basis.push(v);
    }
    basis
}

fn detrend_into(segment: &[f64], basis: &[Vec<f64>], out: &mut [f64]) {
    out.copy_from_slice(segment);
    for q in basis {
        let c: f64 = q.iter().zip(segment).map(|(a, b)| a * b).sum();
        out.iter_mut().zip(q).for_each(|(r, b)| *r -= c * b);
    }
}

fn check_box_params(len: usize, range: &ScaleRange, order: usize) -> Result<()> {
    range.validate()?;
    if range.min < order + 2 {
        return Err(Error::InvalidParameter(format!(
            "smallest scale {} must be at least detrending order + 2 = {}",
            range.min,
            order + 2
        )));
    }
    if range.max > len / 2 {
        return Err(Error::InvalidParameter(format!(
            "largest scale {} exceeds half the series length ({})",
            range.max,
            len / 2
        )));
    }
    Ok(())
}

/// Mean in-box product of detrended profiles at each scale.
fn detrended_covariance(
    px: &[f64],
    py: &[f64],
    range: &ScaleRange,
    order: usize,
    method: Method,
) -> Result<FluctuationSeries> {
    let len = px.len();
    let results: Vec<Option<(usize, f64)>> = range
        .scales()
        .par_iter()
        .map(|&s| {
            let boxes = len / s;
            if boxes == 0 {
                warn!("{}: no complete box at scale {s}, skipped", method.name());
                return None;
            }
            let basis = poly_basis(s, order);
            let mut rx = vec![0.0; s];
            let mut ry = vec![0.0; s];
            let mut total = 0.0;
            for b in 0..boxes {
                let span = b * s..(b + 1) * s;
                detrend_into(&px[span.clone()], &basis, &mut rx);
                detrend_into(&py[span], &basis, &mut ry);
                total += rx.iter().zip(&ry).map(|(a, c)| a * c).sum::<f64>();
            }
            Some((s, total / (boxes * s) as f64))
        })
        .collect();
    let (scales, values): (Vec<usize>, Vec<f64>) = results.into_iter().flatten().unzip();
    if scales.is_empty() {
        return Err(Error::InsufficientData(format!(
            "{}: no scale had a complete box",
            method.name()
        )));
    }
    Ok(FluctuationSeries {
        method,
        scales,
        values,
    })
}

/// Detrended cross-correlation analysis: `F²_DCCA(s)`, possibly negative.
pub fn dcca(x: &[f64], y: &[f64], range: &ScaleRange, order: usize) -> Result<FluctuationSeries> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    check_box_params(x.len(), range, order)?;
    detrended_covariance(&profile(x), &profile(y), range, order, Method::Dcca)
}

/// Detrended fluctuation analysis: `F²_DFA(s) ≥ 0`.
pub fn dfa(x: &[f64], range: &ScaleRange, order: usize) -> Result<FluctuationSeries> {
    check_box_params(x.len(), range, order)?;
    let p = profile(x);
    detrended_covariance(&p, &p, range, order, Method::Dfa)
}

/// Height cross-correlation analysis at `q = 2`:
/// `K_xy(τ) = Σ_t (X_{t+τ} - X_t)(Y_{t+τ} - Y_t) / (T - τ)` on the profiles.
pub fn hxa(x: &[f64], y: &[f64], tau_min: usize, tau_max: usize) -> Result<FluctuationSeries> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let len = x.len();
    if tau_min < 1 || tau_min >= tau_max || tau_max > len / 10 {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= tau_min < tau_max <= T/10 = {}, got [{tau_min}, {tau_max}]",
            len / 10
        )));
    }
    let px = profile(x);
    let py = profile(y);
    let scales: Vec<usize> = (tau_min..=tau_max).collect();
    let values = scales
        .par_iter()
        .map(|&tau| {
            let n = len - tau;
            let s: f64 = (0..n)
                .map(|t| (px[t + tau] - px[t]) * (py[t + tau] - py[t]))
                .sum();
            s / n as f64
        })
        .collect();
    Ok(FluctuationSeries {
        method: Method::Hxa,
        scales,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    /// Per-box least squares through the 2x2 (or 3x3) normal equations.
    fn naive_box_residuals(seg: &[f64], order: usize) -> Vec<f64> {
        let n = seg.len();
        let p = order + 1;
        let mut ata = vec![vec![0.0; p]; p];
        let mut atb = vec![0.0; p];
        for (t, &v) in seg.iter().enumerate() {
            let tf = t as f64;
            for i in 0..p {
                atb[i] += tf.powi(i as i32) * v;
                for j in 0..p {
                    ata[i][j] += tf.powi((i + j) as i32);
                }
            }
        }
        // Gaussian elimination
        for c in 0..p {
            for r in (c + 1)..p {
                let f = ata[r][c] / ata[c][c];
                for k in c..p {
                    ata[r][k] -= f * ata[c][k];
                }
                atb[r] -= f * atb[c];
            }
        }
        let mut coef = vec![0.0; p];
        for c in (0..p).rev() {
            let s: f64 = ((c + 1)..p).map(|k| ata[c][k] * coef[k]).sum();
            coef[c] = (atb[c] - s) / ata[c][c];
        }
        (0..n)
            .map(|t| seg[t] - (0..p).map(|i| coef[i] * (t as f64).powi(i as i32)).sum::<f64>())
            .collect()
    }

    #[test]
    fn dcca_matches_naive_boxes() {
        let x: Vec<f64> = (0..60).map(|t| ((t * 7 % 11) as f64) - 0.3 * t as f64).collect();
        let y: Vec<f64> = (0..60).map(|t| ((t * 5 % 13) as f64).sqrt() + (t as f64).sin()).collect();
        for order in [1, 2] {
            let f = dcca(&x, &y, &ScaleRange::new(10, 10, 1), order).unwrap();
            let (px, py) = (profile(&x), profile(&y));
            let mut total = 0.0;
            for b in 0..6 {
                let rx = naive_box_residuals(&px[b * 10..(b + 1) * 10], order);
                let ry = naive_box_residuals(&py[b * 10..(b + 1) * 10], order);
                total += rx.iter().zip(&ry).map(|(a, c)| a * c).sum::<f64>();
            }
            let expected = total / 60.0;
            assert!((f.values[0] - expected).abs() < 1e-9 * expected.abs().max(1.0), "order {order}");
        }
    }

    #[test]
    fn dcca_of_self_equals_dfa() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let n = rng.random_range(100..600);
            let z = noise(rng.random(), n);
            let r = ScaleRange::new(4, n / 2, 3);
            let a = dcca(&z, &z, &r, 1).unwrap();
            let b = dfa(&z, &r, 1).unwrap();
            assert_eq!(a.values, b.values);
            assert!(b.values.iter().all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn anti_correlated_input_is_refused() {
        let z = noise(3, 2000);
        let neg: Vec<f64> = z.iter().map(|v| -v).collect();
        let r = ScaleRange::new(10, 200, 10);
        let a = dcca(&z, &neg, &r, 1).unwrap();
        let b = dfa(&z, &r, 1).unwrap();
        for (p, q) in a.values.iter().zip(&b.values) {
            assert!((p + q).abs() < 1e-9 * q);
        }
        assert!(matches!(a.hurst(), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn white_noise_dfa_is_half() {
        // single-run spread is about 0.04 at these scales, so check the
        // replication mean
        let r = ScaleRange::new(10, 2000, 10);
        let mean = (0..100)
            .map(|seed| dfa(&noise(1000 + seed, 10_000), &r, 1).unwrap().hurst().unwrap().exponent)
            .sum::<f64>()
            / 100.0;
        assert!((0.45..=0.55).contains(&mean), "mean H = {mean}");
    }

    #[test]
    fn random_walk_increments_hxa_is_half() {
        let mean = (0..100)
            .map(|seed| {
                let z = noise(5000 + seed, 10_000);
                hxa(&z, &z, 1, 100).unwrap().hurst().unwrap().exponent
            })
            .sum::<f64>()
            / 100.0;
        assert!((0.45..=0.55).contains(&mean), "mean H = {mean}");
    }

    #[test]
    fn hxa_of_self_is_mean_squared_increment() {
        let z = noise(4, 1000);
        let f = hxa(&z, &z, 1, 100).unwrap();
        let p = profile(&z);
        for (&tau, &k) in f.scales.iter().zip(&f.values) {
            assert!(k >= 0.0);
            let n = 1000 - tau;
            let m: f64 = (0..n).map(|t| (p[t + tau] - p[t]).powi(2)).sum::<f64>() / n as f64;
            assert!((k - m).abs() < 1e-12 * m);
        }
    }

    #[test]
    fn parameter_validation() {
        let z = noise(1, 100);
        assert!(dfa(&z, &ScaleRange::new(2, 20, 1), 1).is_err());
        assert!(dfa(&z, &ScaleRange::new(10, 60, 1), 1).is_err());
        assert!(dfa(&z, &ScaleRange::new(10, 20, 0), 1).is_err());
        assert!(dcca(&z, &z[..99], &ScaleRange::new(10, 20, 1), 1).is_err());
        assert!(hxa(&z, &z, 0, 5).is_err());
        assert!(hxa(&z, &z, 1, 11).is_err());
        assert!(hxa(&z, &z, 5, 5).is_err());
    }

    #[test]
    fn profile_is_demeaned_cumsum() {
        let p = profile(&[1.0, 2.0, 3.0, 6.0]);
        assert_eq!(p, vec![-2.0, -3.0, -3.0, 0.0]);
    }
}
