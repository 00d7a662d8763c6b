//! Static system description for pulse-level simulation.

use serde::{Deserialize, Serialize};

use crate::error::{QfmError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// Full lab-frame dynamics including the qubit drift and carrier.
    Lab,
    /// Rotating frame at the carrier; counter-rotating terms dropped.
    Rwa,
}

/// System parameters: qubit drift (omega_q/2) Z per qubit, and a ZZ coupling
/// of strength J that is active only while a two-qubit gate window runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub omega_q: f64,
    #[serde(rename = "J")]
    pub j: f64,
    pub frame: Frame,
}

impl HamiltonianSpec {
    /// Defaults used throughout: omega_q = 10 pi, J = pi, rotating frame.
    pub fn default_rwa() -> Self {
        Self {
            omega_q: 10.0 * std::f64::consts::PI,
            j: std::f64::consts::PI,
            frame: Frame::Rwa,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega_q <= 0.0 {
            return Err(QfmError::InvalidParameter(format!(
                "omega_q must be positive, got {}",
                self.omega_q
            )));
        }
        Ok(())
    }
}
