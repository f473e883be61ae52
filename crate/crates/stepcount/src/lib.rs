//! Audio-based running step-count estimation.
//!
//! The pipeline: mono WAV ingestion at a canonical 16 kHz rate, windowing of
//! recordings into labeled segments (fixed-length or step-aligned), log-mel
//! featurization (64 bins, 10 ms hop), a small convolutional regressor
//! trained from scratch with Adam and a plateau scheduler, a classical
//! peak-picking reference counter, training-time augmentations, and a
//! runner-independent 5-fold cross-validation harness with MAE/cMAE/PCC
//! reporting. A synthetic running-audio generator with exact ground-truth
//! step timings makes the whole thing verifiable end to end.

pub mod audio_io;
pub mod augment;
pub mod dsp;
pub mod error;
pub mod estimators;
pub mod manifest;
pub mod metrics;
pub mod nn;
pub mod synth;
pub mod windowing;

pub use error::{Error, Result};
