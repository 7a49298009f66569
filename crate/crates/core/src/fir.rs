//! Moving-average weight generation and causal FIR filtering.
//!
//! Every component of an MC-ARFIMA series is an innovation stream passed
//! through a truncated MA(∞) filter: fractional weights
//! `a_n(d) = Γ(n+d) / (Γ(n+1) Γ(d))`, geometric AR(1) weights `θ^n`, or the
//! single-tap white-noise filter. Filtering is available as a direct
//! double loop and as an FFT convolution; [`causal_filter`] picks one by
//! problem size.

use std::sync::Arc;

use rustfft::{num_complex::Complex, Fft, FftPlanner};

use crate::error::{Error, Result};

/// Above this many multiply-adds (`T * M`) the FFT path is used.
pub const FFT_CROSSOVER: usize = 10_000_000;

/// Default truncation horizon of the MA(∞) sums.
pub const DEFAULT_TRUNCATION: usize = 10_000;

/// `max(T, 10 000)`.
pub fn default_truncation(len: usize) -> usize {
    len.max(DEFAULT_TRUNCATION)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterKind {
    Fractional { d: f64 },
    Ar1 { theta: f64 },
    White,
}

/// Truncated MA coefficients `a_0..a_M`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    kind: FilterKind,
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Truncation horizon `M` (index of the last weight).
    pub fn truncation(&self) -> usize {
        self.weights.len() - 1
    }

    /// Weight at lag `n`, zero beyond the truncation horizon.
    pub fn get(&self, n: usize) -> f64 {
        self.weights.get(n).copied().unwrap_or(0.0)
    }

    /// Single-tap identity filter.
    pub fn white() -> Self {
        Self {
            kind: FilterKind::White,
            weights: vec![1.0],
        }
    }
}

/// Fractional-integration weights via `a_n = a_{n-1} (n - 1 + d) / n`.
///
/// `d = 0` gives the identity filter `[1, 0, 0, ...]`.
pub fn ma_weights(d: f64, truncation: usize) -> Result<WeightVector> {
    if !d.is_finite() || !(0.0..0.5).contains(&d) {
        return Err(Error::InvalidParameter(format!(
            "memory parameter d must lie in [0, 0.5), got {d}"
        )));
    }
    let mut weights = Vec::with_capacity(truncation + 1);
    weights.push(1.0);
    let mut prev = 1.0;
    for n in 1..=truncation {
        let nf = n as f64;
        prev *= (nf - 1.0 + d) / nf;
        weights.push(prev);
    }
    Ok(WeightVector {
        kind: FilterKind::Fractional { d },
        weights,
    })
}

/// AR(1) weights `θ^n`.
pub fn ar1_weights(theta: f64, truncation: usize) -> Result<WeightVector> {
    if !theta.is_finite() || theta.abs() >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "AR(1) coefficient must satisfy |theta| < 1, got {theta}"
        )));
    }
    let mut weights = Vec::with_capacity(truncation + 1);
    let mut w = 1.0;
    for _ in 0..=truncation {
        weights.push(w);
        w *= theta;
    }
    Ok(WeightVector {
        kind: FilterKind::Ar1 { theta },
        weights,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvolutionMethod {
    #[default]
    Auto,
    Direct,
    Fft,
}

fn check_len(innovations: &[f64], weights: &WeightVector, len: usize) -> Result<()> {
    let needed = len + weights.truncation();
    if innovations.len() < needed {
        return Err(Error::LengthMismatch {
            needed,
            got: innovations.len(),
        });
    }
    Ok(())
}

/// `out[t] = Σ_{n=0..M} w[n] * u[t + M - n]` for `t = 0..len`.
///
/// The first `M` innovations act as burn-in; only the first `len + M`
/// innovations are read.
pub fn causal_filter(innovations: &[f64], weights: &WeightVector, len: usize) -> Result<Vec<f64>> {
    causal_filter_with(innovations, weights, len, ConvolutionMethod::Auto)
}

pub fn causal_filter_with(
    innovations: &[f64],
    weights: &WeightVector,
    len: usize,
    method: ConvolutionMethod,
) -> Result<Vec<f64>> {
    check_len(innovations, weights, len)?;
    let use_fft = match method {
        ConvolutionMethod::Direct => false,
        ConvolutionMethod::Fft => true,
        ConvolutionMethod::Auto => len.saturating_mul(weights.truncation()) > FFT_CROSSOVER,
    };
    if use_fft {
        Ok(FftFilter::new(weights, len).apply_unchecked(innovations))
    } else {
        Ok(direct(innovations, weights.weights(), len))
    }
}

fn direct(innovations: &[f64], w: &[f64], len: usize) -> Vec<f64> {
    let m = w.len() - 1;
    (0..len)
        .map(|t| {
            // innovations[t..=t+m] reversed against w
            let window = &innovations[t..=t + m];
            w.iter()
                .zip(window.iter().rev())
                .map(|(a, u)| a * u)
                .sum()
        })
        .collect()
}

/// FFT convolution with the weight spectrum computed once, for repeated
/// filtering of equally sized innovation blocks.
///
/// A circular convolution of size `N >= len + M` is exact on output
/// indices `M..M+len`; wrap-around only touches the discarded burn-in.
#[derive(Clone)]
pub struct FftFilter {
    truncation: usize,
    len: usize,
    size: usize,
    spectrum: Vec<Complex<f64>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftFilter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftFilter")
            .field("truncation", &self.truncation)
            .field("len", &self.len)
            .field("size", &self.size)
            .finish()
    }
}

impl FftFilter {
    pub fn new(weights: &WeightVector, len: usize) -> Self {
        let truncation = weights.truncation();
        let size = (len + truncation).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let mut spectrum = vec![Complex::new(0.0, 0.0); size];
        for (slot, &w) in spectrum.iter_mut().zip(weights.weights()) {
            slot.re = w;
        }
        forward.process(&mut spectrum);
        Self {
            truncation,
            len,
            size,
            spectrum,
            forward,
            inverse,
        }
    }

    pub fn output_len(&self) -> usize {
        self.len
    }

    pub fn apply(&self, innovations: &[f64]) -> Result<Vec<f64>> {
        let needed = self.len + self.truncation;
        if innovations.len() < needed {
            return Err(Error::LengthMismatch {
                needed,
                got: innovations.len(),
            });
        }
        Ok(self.apply_unchecked(innovations))
    }

    fn apply_unchecked(&self, innovations: &[f64]) -> Vec<f64> {
        let needed = self.len + self.truncation;
        let mut buf = vec![Complex::new(0.0, 0.0); self.size];
        for (slot, &u) in buf.iter_mut().zip(&innovations[..needed]) {
            slot.re = u;
        }
        self.forward.process(&mut buf);
        for (b, h) in buf.iter_mut().zip(&self.spectrum) {
            *b *= h;
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.size as f64;
        buf[self.truncation..needed]
            .iter()
            .map(|c| c.re * scale)
            .collect()
    }
}
