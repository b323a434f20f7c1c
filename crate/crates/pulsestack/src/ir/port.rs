// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! Ports: software handles for the hardware channels that actuate or read
//! out qubit sites, together with the per-channel constraints a device
//! publishes (sample period, duration granularity, amplitude and frequency
//! limits).

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a physical or logical qubit location on a device.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct SiteId(pub u32);

impl SiteId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for SiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for SiteId {
    fn from(v: u32) -> Self {
        SiteId(v)
    }
}

/// Device-unique identifier of a hardware channel.
///
/// Tokens are lowercase identifiers matching `[a-z][a-z0-9_]*`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PortId(String);

impl PortId {
    pub fn new(token: impl Into<String>) -> Result<Self, PortError> {
        let token = token.into();
        let mut chars = token.chars();
        let head_ok = matches!(chars.next(), Some(c) if c.is_ascii_lowercase());
        let tail_ok = chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_');
        if head_ok && tail_ok {
            Ok(PortId(token))
        } else {
            Err(PortError::InvalidPortId(token))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PortId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for PortId {
    type Error = PortError;
    fn try_from(s: String) -> Result<Self, PortError> {
        PortId::new(s)
    }
}

impl From<PortId> for String {
    fn from(id: PortId) -> String {
        id.0
    }
}

/// What a channel does: drive and readout channels carry stimulus pulses,
/// acquire channels digitize the response, coupler channels actuate
/// two-site interactions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PortKind {
    Drive,
    Readout,
    Acquire,
    Coupler,
}

impl fmt::Display for PortKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PortKind::Drive => "drive",
            PortKind::Readout => "readout",
            PortKind::Acquire => "acquire",
            PortKind::Coupler => "coupler",
        };
        f.write_str(s)
    }
}

/// Hardware limits a device publishes for one port.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortConstraints {
    /// Seconds per sample (dt).
    pub sample_period_s: f64,
    /// Waveform durations must be a multiple of this many samples.
    pub granularity_samples: u64,
    /// Shortest playable waveform, in samples.
    pub min_duration_samples: u64,
    /// Largest representable envelope magnitude on this port, in (0, 1].
    pub max_amplitude: f64,
    /// Closed interval `[lo, hi]` of carrier frequencies the port accepts.
    pub frequency_range_hz: (f64, f64),
}

impl PortConstraints {
    pub fn validate(&self) -> Result<(), PortError> {
        if !(self.sample_period_s > 0.0 && self.sample_period_s.is_finite()) {
            return Err(PortError::InvalidConstraint("sample_period_s must be > 0"));
        }
        if self.granularity_samples == 0 {
            return Err(PortError::InvalidConstraint(
                "granularity_samples must be positive",
            ));
        }
        if self.min_duration_samples == 0 {
            return Err(PortError::InvalidConstraint(
                "min_duration_samples must be positive",
            ));
        }
        if !self
            .min_duration_samples
            .is_multiple_of(self.granularity_samples)
        {
            return Err(PortError::InvalidConstraint(
                "min_duration_samples must be a multiple of granularity_samples",
            ));
        }
        if !(self.max_amplitude > 0.0 && self.max_amplitude <= 1.0) {
            return Err(PortError::InvalidConstraint(
                "max_amplitude must lie in (0, 1]",
            ));
        }
        let (lo, hi) = self.frequency_range_hz;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(PortError::InvalidConstraint(
                "frequency_range_hz must be a finite interval with lo <= hi",
            ));
        }
        Ok(())
    }

    /// True when `frequency_hz` lies inside the closed frequency interval.
    pub fn frequency_in_range(&self, frequency_hz: f64) -> bool {
        let (lo, hi) = self.frequency_range_hz;
        frequency_hz >= lo && frequency_hz <= hi
    }
}

/// One hardware channel: identifier, role, the sites it touches, and its
/// published constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Port {
    pub id: PortId,
    pub kind: PortKind,
    pub sites: Vec<SiteId>,
    pub constraints: PortConstraints,
}

impl Port {
    pub fn validate(&self) -> Result<(), PortError> {
        match self.kind {
            PortKind::Coupler => {
                if self.sites.len() != 2 {
                    return Err(PortError::BadSiteArity {
                        port: self.id.clone(),
                        kind: self.kind,
                        got: self.sites.len(),
                    });
                }
            }
            _ => {
                if self.sites.is_empty() {
                    return Err(PortError::BadSiteArity {
                        port: self.id.clone(),
                        kind: self.kind,
                        got: 0,
                    });
                }
            }
        }
        self.constraints.validate()
    }

    pub fn covers_site(&self, site: SiteId) -> bool {
        self.sites.contains(&site)
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PortError {
    #[error("invalid port identifier {0:?}: expected [a-z][a-z0-9_]*")]
    InvalidPortId(String),
    #[error("invalid port constraint: {0}")]
    InvalidConstraint(&'static str),
    #[error("port {port} of kind {kind} references {got} sites")]
    BadSiteArity {
        port: PortId,
        kind: PortKind,
        got: usize,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constraints() -> PortConstraints {
        PortConstraints {
            sample_period_s: 1e-9,
            granularity_samples: 8,
            min_duration_samples: 16,
            max_amplitude: 1.0,
            frequency_range_hz: (4.0e9, 6.0e9),
        }
    }

    #[test]
    fn port_id_pattern() {
        assert!(PortId::new("drive0").is_ok());
        assert!(PortId::new("d_0_x").is_ok());
        assert!(PortId::new("").is_err());
        assert!(PortId::new("0drive").is_err());
        assert!(PortId::new("Drive").is_err());
        assert!(PortId::new("drive-0").is_err());
    }

    #[test]
    fn coupler_needs_two_sites() {
        let port = Port {
            id: PortId::new("coupler01").unwrap(),
            kind: PortKind::Coupler,
            sites: vec![SiteId(0)],
            constraints: constraints(),
        };
        assert!(matches!(
            port.validate(),
            Err(PortError::BadSiteArity { .. })
        ));
    }

    #[test]
    fn min_duration_must_align_to_granularity() {
        let mut c = constraints();
        c.min_duration_samples = 12;
        assert!(c.validate().is_err());
        c.min_duration_samples = 24;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn frequency_interval_is_closed() {
        let c = constraints();
        assert!(c.frequency_in_range(4.0e9));
        assert!(c.frequency_in_range(6.0e9));
        assert!(!c.frequency_in_range(6.0e9 + 1.0));
    }
}
