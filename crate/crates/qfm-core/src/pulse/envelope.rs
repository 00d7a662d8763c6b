//! Pulse envelope shapes and carriers.

use serde::{Deserialize, Serialize};

use crate::error::{QfmError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeKind {
    Gaussian,
    Rectangle,
    RaisedCosine,
    Drag,
    HyperbolicSecant,
}

impl EnvelopeKind {
    pub const ALL: [EnvelopeKind; 5] = [
        EnvelopeKind::Gaussian,
        EnvelopeKind::Rectangle,
        EnvelopeKind::RaisedCosine,
        EnvelopeKind::Drag,
        EnvelopeKind::HyperbolicSecant,
    ];

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "gaussian" => Ok(Self::Gaussian),
            "rectangle" => Ok(Self::Rectangle),
            "raised_cosine" => Ok(Self::RaisedCosine),
            "drag" => Ok(Self::Drag),
            "hyperbolic_secant" => Ok(Self::HyperbolicSecant),
            other => Err(QfmError::InvalidParameter(format!(
                "unknown envelope '{other}'"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Rectangle => "rectangle",
            Self::RaisedCosine => "raised_cosine",
            Self::Drag => "drag",
            Self::HyperbolicSecant => "hyperbolic_secant",
        }
    }
}

/// One pulse envelope E(t). Amplitude in angular-frequency units, width and
/// center in time units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub kind: EnvelopeKind,
    pub amplitude: f64,
    pub sigma: f64,
    pub t_center: f64,
    /// DRAG scale; only used by the drag kind.
    #[serde(default)]
    pub beta: f64,
    /// DRAG derivative factor; fixed to 1 by default.
    #[serde(default = "default_nu")]
    pub nu: f64,
}

fn default_nu() -> f64 {
    1.0
}

impl Envelope {
    pub fn new(kind: EnvelopeKind, amplitude: f64, sigma: f64, t_center: f64) -> Result<Self> {
        if sigma <= 0.0 {
            return Err(QfmError::InvalidParameter(format!(
                "envelope width must be positive, got {sigma}"
            )));
        }
        Ok(Self {
            kind,
            amplitude,
            sigma,
            t_center,
            beta: 0.0,
            nu: 1.0,
        })
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn value(&self, t: f64) -> f64 {
        let d = t - self.t_center;
        let a = self.amplitude;
        let s = self.sigma;
        match self.kind {
            EnvelopeKind::Gaussian => a * (-0.5 * (d / s) * (d / s)).exp(),
            EnvelopeKind::Rectangle => {
                if d.abs() <= s / 2.0 {
                    a
                } else {
                    0.0
                }
            }
            EnvelopeKind::RaisedCosine => {
                if d.abs() <= s / 2.0 {
                    a * (std::f64::consts::PI * d / s).cos()
                } else {
                    0.0
                }
            }
            EnvelopeKind::Drag => {
                a * (-0.5 * (d / s) * (d / s)).exp() * (1.0 - self.nu * self.beta * d / (s * s))
            }
            EnvelopeKind::HyperbolicSecant => a / (d / s).cosh(),
        }
    }

    /// Pulse area over [t0, t1]: exact for the rectangle (Simpson degrades at
    /// its jumps), composite Simpson for the smooth shapes.
    pub fn area(&self, t0: f64, t1: f64, n_intervals: usize) -> f64 {
        if self.kind == EnvelopeKind::Rectangle {
            let lo = t0.max(self.t_center - self.sigma / 2.0);
            let hi = t1.min(self.t_center + self.sigma / 2.0);
            return self.amplitude * (hi - lo).max(0.0);
        }
        let n = if n_intervals % 2 == 0 {
            n_intervals
        } else {
            n_intervals + 1
        };
        let h = (t1 - t0) / n as f64;
        let mut acc = self.value(t0) + self.value(t1);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * self.value(t0 + i as f64 * h);
        }
        acc * h / 3.0
    }
}

/// Drive carrier: frequency and phase of cos(omega_c t + phi_c).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Carrier {
    pub omega: f64,
    pub phi: f64,
}
