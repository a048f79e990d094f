//! Multiresolution local-polynomial lifting for multi-channel EMG denoising,
//! with the evaluation pipeline around it: threshold estimators, wavelet
//! baselines, windowed features, classifiers, cross-validation and metrics.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod denoise;
pub mod error;
pub mod features;
pub mod grid;
pub mod io;
pub mod learn;
pub mod lifting;
pub mod metrics;
pub mod registry;
pub mod report;
pub mod signal;
pub mod threshold;
pub mod wavelet;

pub use error::{Error, Result};
