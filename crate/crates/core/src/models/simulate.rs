use std::sync::Arc;

use super::ModelSpec;
use crate::error::{Error, Result};
use crate::fir::{causal_filter_with, ConvolutionMethod, FftFilter, WeightVector, FFT_CROSSOVER};
use crate::innovations::{sample_with_factor, CholeskyFactor};

#[derive(Debug, Clone, PartialEq)]
pub struct BivariateSeries {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub seed: u64,
}

impl BivariateSeries {
    pub fn new(x: Vec<f64>, y: Vec<f64>, seed: u64) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidParameter(format!(
                "series lengths differ: {} vs {}",
                x.len(),
                y.len()
            )));
        }
        Ok(Self { x, y, seed })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

#[derive(Debug, Clone)]
enum Path {
    Direct,
    Fft(FftFilter),
}

#[derive(Debug, Clone)]
struct ComponentFilter {
    scale: f64,
    weights: Arc<WeightVector>,
    path: Path,
}

/// Reusable simulator: weights and FFT plans are built once per
/// `(model, T, M)` and shared by every replication.
#[derive(Debug, Clone)]
pub struct Simulator {
    len: usize,
    truncation: usize,
    factor: CholeskyFactor,
    filters: [ComponentFilter; 4],
}

impl Simulator {
    pub fn new(model: &ModelSpec, len: usize, truncation: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidParameter("series length must be positive".into()));
        }
        model.validate()?;
        let factor = model.covariance.validate()?;
        let comps = model.components();
        let mut filters = Vec::with_capacity(4);
        for c in comps {
            let weights = Arc::new(c.kind.weights(truncation)?);
            let path = if len.saturating_mul(weights.truncation()) > FFT_CROSSOVER {
                Path::Fft(FftFilter::new(&weights, len))
            } else {
                Path::Direct
            };
            filters.push(ComponentFilter {
                scale: c.weight,
                weights,
                path,
            });
        }
        Ok(Self {
            len,
            truncation,
            factor,
            filters: filters.try_into().expect("four components"),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// One realization. Innovations cover `T + M` steps; the first `M`
    /// filter outputs are the discarded burn-in.
    pub fn simulate(&self, seed: u64) -> Result<BivariateSeries> {
        let block = sample_with_factor(&self.factor, self.len + self.truncation, seed);
        let mut parts: Vec<Vec<f64>> = Vec::with_capacity(4);
        for (filter, stream) in self.filters.iter().zip(&block.streams) {
            if filter.scale == 0.0 {
                parts.push(vec![0.0; self.len]);
                continue;
            }
            // shorter filters (white noise) start later so all outputs align in time
            let offset = self.truncation - filter.weights.truncation();
            let input = &stream[offset..];
            let mut out = match &filter.path {
                Path::Fft(f) => f.apply(input)?,
                Path::Direct => {
                    causal_filter_with(input, &filter.weights, self.len, ConvolutionMethod::Direct)?
                }
            };
            out.iter_mut().for_each(|v| *v *= filter.scale);
            parts.push(out);
        }
        let sum = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p + q).collect::<Vec<_>>();
        let x = sum(&parts[0], &parts[1]);
        let y = sum(&parts[2], &parts[3]);
        Ok(BivariateSeries { x, y, seed })
    }
}

/// Convenience wrapper building a one-off [`Simulator`].
pub fn simulate(model: &ModelSpec, len: usize, seed: u64, truncation: usize) -> Result<BivariateSeries> {
    Simulator::new(model, len, truncation)?.simulate(seed)
}
