// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! Frames: the stateful carrier abstraction.
//!
//! A frame combines a carrier frequency, a phase offset, and a per-frame
//! logical clock (elapsed samples), bound to one port. It supplies the
//! timing, frequency, and phase context in which waveforms are played, and
//! makes virtual phase rotations possible: a Z rotation is a frame phase
//! shift, never a physical pulse.

use std::f64::consts::TAU;
use std::fmt;

use thiserror::Error;

use super::port::PortId;

/// Device-unique identifier of a frame.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FrameId(String);

impl FrameId {
    pub fn new(token: impl Into<String>) -> Result<Self, FrameError> {
        let token = token.into();
        if token.is_empty() {
            return Err(FrameError::EmptyFrameId);
        }
        Ok(FrameId(token))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for FrameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for FrameId {
    type Error = FrameError;
    fn try_from(s: String) -> Result<Self, FrameError> {
        FrameId::new(s)
    }
}

impl From<FrameId> for String {
    fn from(id: FrameId) -> String {
        id.0
    }
}

/// Carrier state bound to a port.
///
/// `phase_rad` is stored normalized to `[0, 2*pi)`. `elapsed_samples` is the
/// frame's logical clock; schedule interpretation only ever advances it.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub id: FrameId,
    pub port: PortId,
    pub frequency_hz: f64,
    pub phase_rad: f64,
    pub elapsed_samples: u64,
}

impl Frame {
    pub fn new(
        id: FrameId,
        port: PortId,
        frequency_hz: f64,
        phase_rad: f64,
    ) -> Result<Self, FrameError> {
        if !frequency_hz.is_finite() {
            return Err(FrameError::NonFinite("frequency_hz"));
        }
        Ok(Frame {
            id,
            port,
            frequency_hz,
            phase_rad: normalize_phase(phase_rad)?,
            elapsed_samples: 0,
        })
    }

    /// Shift the carrier phase; the stored phase stays normalized.
    pub fn shift_phase(&mut self, delta_rad: f64) -> Result<(), FrameError> {
        self.phase_rad = normalize_phase(self.phase_rad + delta_rad)?;
        Ok(())
    }

    pub fn set_phase(&mut self, phase_rad: f64) -> Result<(), FrameError> {
        self.phase_rad = normalize_phase(phase_rad)?;
        Ok(())
    }

    pub fn shift_frequency(&mut self, delta_hz: f64) -> Result<(), FrameError> {
        self.set_frequency(self.frequency_hz + delta_hz)
    }

    pub fn set_frequency(&mut self, frequency_hz: f64) -> Result<(), FrameError> {
        if !frequency_hz.is_finite() {
            return Err(FrameError::NonFinite("frequency_hz"));
        }
        self.frequency_hz = frequency_hz;
        Ok(())
    }
}

/// Reduce a phase to the canonical interval `[0, 2*pi)`.
pub fn normalize_phase(phi_rad: f64) -> Result<f64, FrameError> {
    if !phi_rad.is_finite() {
        return Err(FrameError::NonFinite("phase"));
    }
    let mut reduced = phi_rad.rem_euclid(TAU);
    // rem_euclid of a tiny negative value can round up to exactly 2*pi.
    if reduced >= TAU {
        reduced -= TAU;
    }
    Ok(reduced)
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FrameError {
    #[error("frame identifier must be non-empty")]
    EmptyFrameId,
    #[error("{0} must be finite")]
    NonFinite(&'static str),
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn normalize_known_values() {
        assert_eq!(normalize_phase(TAU).unwrap(), 0.0);
        assert!((normalize_phase(-PI / 2.0).unwrap() - 3.0 * PI / 2.0).abs() < 1e-12);
        assert!((normalize_phase(5.0 * PI).unwrap() - PI).abs() < 1e-12);
    }

    #[test]
    fn normalize_rejects_non_finite() {
        assert!(normalize_phase(f64::NAN).is_err());
        assert!(normalize_phase(f64::INFINITY).is_err());
    }

    #[test]
    fn normalize_is_idempotent() {
        for phi in [-7.3, -0.1, 0.0, 1.0, 9.99, 1e6] {
            let once = normalize_phase(phi).unwrap();
            assert_eq!(normalize_phase(once).unwrap(), once);
            assert!((0.0..TAU).contains(&once));
        }
    }

    #[test]
    fn frame_stores_normalized_phase() {
        let f = Frame::new(
            FrameId::new("f0").unwrap(),
            crate::ir::port::PortId::new("drive0").unwrap(),
            5.0e9,
            -PI / 2.0,
        )
        .unwrap();
        assert!((f.phase_rad - 3.0 * PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn empty_frame_id_rejected() {
        assert!(FrameId::new("").is_err());
    }
}
