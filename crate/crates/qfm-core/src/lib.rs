//! Simulation and analysis toolkit for quantum Fourier models: gate- and
//! pulse-level circuit simulation, Fourier coefficient analysis,
//! expressibility and entanglement metrics, and pulse-level gate calibration.

pub mod ansatz;
pub mod draw;
pub mod error;
pub mod fourier;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod pulse;
pub mod qoc;
pub mod quantum;
pub mod report;
pub mod rng;

pub use error::{QfmError, Result};
