//! Ear-canal area functions from input-impedance spectra.
//!
//! The crate reconstructs the cross-sectional area of a duct from its
//! band-limited input impedance by layer peeling of the entrance
//! time-domain reflectance, and predicts the transfer impedance to the
//! terminating end with a lossless one-dimensional two-port model.
//!
//! ```
//! use webster_core::{horns, pipeline, PipelineConfig};
//!
//! let spec = horns::HornSpec::Uniform { area: 70e-6, length: 25e-3 };
//! let report = pipeline::roundtrip(&spec, horns::measurement_grid(100.0, 20_000.0), &PipelineConfig::default())?;
//! assert!(report.errors_at_lme.l_rmse < 1.0);
//! # Ok::<(), webster_core::Error>(())
//! ```

// `!(x > 0.0)` is how the validity checks let NaN fail.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod area;
pub mod calibration;
pub mod config;
pub mod error;
pub mod horns;
pub mod inverse;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod reflectance;
pub mod signal;
pub mod transmission;

pub use area::AreaFunction;
pub use config::{FcutSetting, IntervalPreset, PipelineConfig, TerminationRule};
pub use error::{Error, Result};
pub use signal::{FrequencyGrid, ImpedanceSpectrum, PhysicalConstants, RealSignal};
pub use transmission::{LoadModel, TwoPortChain};
