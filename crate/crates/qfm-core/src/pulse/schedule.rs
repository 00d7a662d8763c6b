//! Time-ordered pulse schedules and their JSON export form.

use serde::{Deserialize, Serialize};

use crate::error::{QfmError, Result};

use super::envelope::{Carrier, Envelope};

/// What a segment drives: a single-qubit drive line or a two-qubit coupler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Channel {
    Drive { qubit: usize },
    Coupling { qubits: (usize, usize), j: f64 },
}

impl Channel {
    pub fn wires(&self) -> Vec<usize> {
        match self {
            Channel::Drive { qubit } => vec![*qubit],
            Channel::Coupling { qubits, .. } => vec![qubits.0, qubits.1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub channel: Channel,
    /// Envelope with absolute center time; None for pure coupling windows.
    pub envelope: Option<Envelope>,
    pub carrier: Option<Carrier>,
    pub t_start: f64,
    pub t_end: f64,
}

/// An instantaneous frame-tracked RZ(phase) on one qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseEvent {
    pub time: f64,
    pub qubit: usize,
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub n_qubits: usize,
    pub duration: f64,
    pub segments: Vec<Segment>,
    pub virtual_phases: Vec<PhaseEvent>,
    /// Phase factor e^{i global_phase} applied to the final state, tracking
    /// the decomposition phases of composed gates.
    pub global_phase: f64,
}

impl Schedule {
    pub fn empty(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            duration: 0.0,
            segments: Vec::new(),
            virtual_phases: Vec::new(),
            global_phase: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for seg in &self.segments {
            if seg.t_end < seg.t_start {
                return Err(QfmError::InvalidConfig(format!(
                    "segment ends before it starts: [{}, {}]",
                    seg.t_start, seg.t_end
                )));
            }
            for w in seg.channel.wires() {
                if w >= self.n_qubits {
                    return Err(QfmError::WireOutOfRange {
                        wire: w,
                        n_qubits: self.n_qubits,
                    });
                }
            }
        }
        // Segments of the same channel kind must not overlap on a shared
        // wire; a drive pulse during a coupling window is allowed.
        for (i, a) in self.segments.iter().enumerate() {
            for b in self.segments.iter().skip(i + 1) {
                let same_kind = matches!(
                    (&a.channel, &b.channel),
                    (Channel::Drive { .. }, Channel::Drive { .. })
                        | (Channel::Coupling { .. }, Channel::Coupling { .. })
                );
                let shared = a
                    .channel
                    .wires()
                    .iter()
                    .any(|w| b.channel.wires().contains(w));
                if same_kind && shared && a.t_start < b.t_end - 1e-12 && b.t_start < a.t_end - 1e-12 {
                    return Err(QfmError::InvalidConfig(format!(
                        "overlapping segments on a shared wire: [{}, {}] vs [{}, {}]",
                        a.t_start, a.t_end, b.t_start, b.t_end
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serialization")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let schedule: Schedule = serde_json::from_str(json)
            .map_err(|e| QfmError::InvalidConfig(format!("schedule JSON: {e}")))?;
        schedule.validate()?;
        Ok(schedule)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::envelope::EnvelopeKind;

    #[test]
    fn empty_schedule() {
        let s = Schedule::empty(2);
        assert_eq!(s.duration, 0.0);
        s.validate().unwrap();
    }

    #[test]
    fn overlap_detection() {
        let env = Envelope::new(EnvelopeKind::Gaussian, 1.0, 0.1, 0.5).unwrap();
        let carrier = Carrier {
            omega: 10.0 * std::f64::consts::PI,
            phi: 0.0,
        };
        let mut s = Schedule::empty(2);
        s.segments.push(Segment {
            channel: Channel::Drive { qubit: 0 },
            envelope: Some(env),
            carrier: Some(carrier),
            t_start: 0.0,
            t_end: 1.0,
        });
        s.segments.push(Segment {
            channel: Channel::Drive { qubit: 1 },
            envelope: Some(env),
            carrier: Some(carrier),
            t_start: 0.5,
            t_end: 1.5,
        });
        s.duration = 1.5;
        s.validate().unwrap(); // distinct wires may overlap

        s.segments.push(Segment {
            channel: Channel::Drive { qubit: 0 },
            envelope: Some(env),
            carrier: Some(carrier),
            t_start: 0.5,
            t_end: 1.5,
        });
        assert!(s.validate().is_err());
    }

    #[test]
    fn json_roundtrip() {
        let env = Envelope::new(EnvelopeKind::RaisedCosine, 0.5, 0.2, 0.1).unwrap();
        let mut s = Schedule::empty(1);
        s.segments.push(Segment {
            channel: Channel::Drive { qubit: 0 },
            envelope: Some(env),
            carrier: Some(Carrier {
                omega: 31.4,
                phi: -1.57,
            }),
            t_start: 0.0,
            t_end: 0.2,
        });
        s.duration = 0.2;
        s.virtual_phases.push(PhaseEvent {
            time: 0.2,
            qubit: 0,
            phase: 0.5,
        });
        let json = s.to_json();
        let back = Schedule::from_json(&json).unwrap();
        assert_eq!(s, back);
    }
}
