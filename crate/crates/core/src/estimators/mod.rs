//! Scaling-exponent estimators: sample cross-correlation, DFA, DCCA, HXA
//! and the log-log least-squares fit they share.

mod ccf;
mod fit;
mod fluctuation;

pub use ccf::{sample_ccf, CcfSeries};
pub use fit::{powerlaw_fit, ScalingFit, MIN_FIT_POINTS};
pub use fluctuation::{
    dcca, dfa, hxa, profile, FluctuationSeries, Method, ScaleRange,
};
