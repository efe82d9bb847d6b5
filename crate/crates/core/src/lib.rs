//! Matched-illumination waveform design for point-target detection in known
//! noise and clutter, with constant-modulus MTSFM synthesis of the optimal
//! spectrum and LFM comparators.
//!
//! The pipeline runs [`design`] (water-filling ESD) → [`fitting`] (OFDM
//! target and multistart MTSFM fit) → [`lfm`] (RMS-bandwidth-matched chirp) →
//! [`detection`] (d², analytic and Monte Carlo ROC). [`experiment`] ties the
//! stages together for config-driven runs.

pub mod design;
pub mod detection;
pub mod error;
pub mod experiment;
pub mod fitting;
pub mod lfm;
pub mod mtsfm;
pub mod optimize;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use spectral::{FrequencyGrid, PsdKind, Scenario, SpectralDensity};
