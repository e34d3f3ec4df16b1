//! Multicarrier and DFT-spread waveform workbench: modulators, receivers,
//! impairment channel, metrics and a scenario harness.

pub mod channel;
pub mod error;
pub mod filtered;
pub mod gridding;
pub mod harness;
pub mod metrics;
pub mod numerics;
pub mod singlecarrier;
pub mod windowed;

pub use error::{Error, Result};
pub use gridding::{Constellation, OqamGrid, ResourceGrid};
pub use num_complex::Complex64;
pub use numerics::IqVec;
pub use windowed::Numerology;
