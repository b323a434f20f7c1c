// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! Capability queries: a closed key enumeration over four scopes.
//!
//! Unknown or inapplicable keys answer `NotSupported`; scopes that do not
//! resolve (a site index out of range, a port query against a device
//! without port-level pulse access) answer `InvalidScope`. Queries never
//! mutate driver state.

use std::fmt;

use crate::calibration::CalibrationRegistry;
use crate::ir::{PortId, PortKind, SiteId};

use super::descriptor::{DeviceDescriptor, JobFormat, PulseSupport};
use super::DriverError;

/// What a query addresses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryScope {
    Device,
    Site(SiteId),
    Port(PortId),
    Operation(String),
}

impl std::str::FromStr for QueryScope {
    type Err = String;

    /// `device`, `site:N`, `port:ID`, or `operation:NAME`.
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "device" {
            return Ok(QueryScope::Device);
        }
        if let Some(site) = s.strip_prefix("site:") {
            let index: u32 = site
                .parse()
                .map_err(|_| format!("invalid site index {site:?}"))?;
            return Ok(QueryScope::Site(SiteId(index)));
        }
        if let Some(port) = s.strip_prefix("port:") {
            return Ok(QueryScope::Port(
                PortId::new(port).map_err(|e| e.to_string())?,
            ));
        }
        if let Some(operation) = s.strip_prefix("operation:") {
            return Ok(QueryScope::Operation(operation.to_string()));
        }
        Err(format!(
            "invalid scope {s:?}: expected device, site:N, port:ID, or operation:NAME"
        ))
    }
}

/// Closed enumeration of queryable properties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropertyKey {
    // device
    Name,
    NumSites,
    PulseSupport,
    SupportedFormats,
    // site
    T1S,
    T2S,
    DrivePort,
    ReadoutPort,
    // port
    Kind,
    SamplePeriodS,
    GranularitySamples,
    MinDurationSamples,
    MaxAmplitude,
    FrequencyRangeHz,
    // operation
    HasDefaultCalibration,
    DurationSamples,
}

impl PropertyKey {
    pub const ALL: [PropertyKey; 16] = [
        PropertyKey::Name,
        PropertyKey::NumSites,
        PropertyKey::PulseSupport,
        PropertyKey::SupportedFormats,
        PropertyKey::T1S,
        PropertyKey::T2S,
        PropertyKey::DrivePort,
        PropertyKey::ReadoutPort,
        PropertyKey::Kind,
        PropertyKey::SamplePeriodS,
        PropertyKey::GranularitySamples,
        PropertyKey::MinDurationSamples,
        PropertyKey::MaxAmplitude,
        PropertyKey::FrequencyRangeHz,
        PropertyKey::HasDefaultCalibration,
        PropertyKey::DurationSamples,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PropertyKey::Name => "name",
            PropertyKey::NumSites => "num_sites",
            PropertyKey::PulseSupport => "pulse_support",
            PropertyKey::SupportedFormats => "supported_formats",
            PropertyKey::T1S => "t1_s",
            PropertyKey::T2S => "t2_s",
            PropertyKey::DrivePort => "drive_port",
            PropertyKey::ReadoutPort => "readout_port",
            PropertyKey::Kind => "kind",
            PropertyKey::SamplePeriodS => "sample_period_s",
            PropertyKey::GranularitySamples => "granularity_samples",
            PropertyKey::MinDurationSamples => "min_duration_samples",
            PropertyKey::MaxAmplitude => "max_amplitude",
            PropertyKey::FrequencyRangeHz => "frequency_range_hz",
            PropertyKey::HasDefaultCalibration => "has_default_calibration",
            PropertyKey::DurationSamples => "duration_samples",
        }
    }

    /// The keys meaningful for a scope, used by `query --all`.
    pub fn keys_for(scope: &QueryScope) -> &'static [PropertyKey] {
        match scope {
            QueryScope::Device => &[
                PropertyKey::Name,
                PropertyKey::NumSites,
                PropertyKey::PulseSupport,
                PropertyKey::SupportedFormats,
            ],
            QueryScope::Site(_) => &[
                PropertyKey::T1S,
                PropertyKey::T2S,
                PropertyKey::DrivePort,
                PropertyKey::ReadoutPort,
            ],
            QueryScope::Port(_) => &[
                PropertyKey::Kind,
                PropertyKey::SamplePeriodS,
                PropertyKey::GranularitySamples,
                PropertyKey::MinDurationSamples,
                PropertyKey::MaxAmplitude,
                PropertyKey::FrequencyRangeHz,
            ],
            QueryScope::Operation(_) => &[
                PropertyKey::HasDefaultCalibration,
                PropertyKey::DurationSamples,
            ],
        }
    }
}

impl std::str::FromStr for PropertyKey {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        PropertyKey::ALL
            .iter()
            .find(|k| k.name() == s)
            .copied()
            .ok_or_else(|| format!("unknown property key {s:?}"))
    }
}

impl fmt::Display for PropertyKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A typed query answer.
#[derive(Debug, Clone, PartialEq)]
pub enum PropertyValue {
    Str(String),
    U64(u64),
    F64(f64),
    Bool(bool),
    PulseSupport(PulseSupport),
    PortKind(PortKind),
    Formats(Vec<JobFormat>),
    FrequencyRange(f64, f64),
    Port(PortId),
}

impl fmt::Display for PropertyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyValue::Str(s) => f.write_str(s),
            PropertyValue::U64(v) => write!(f, "{v}"),
            PropertyValue::F64(v) => write!(f, "{v}"),
            PropertyValue::Bool(v) => write!(f, "{v}"),
            PropertyValue::PulseSupport(v) => write!(f, "{v}"),
            PropertyValue::PortKind(v) => write!(f, "{v}"),
            PropertyValue::Formats(formats) => {
                let rendered: Vec<String> = formats.iter().map(|x| x.to_string()).collect();
                f.write_str(&rendered.join(","))
            }
            PropertyValue::FrequencyRange(lo, hi) => write!(f, "[{lo}, {hi}]"),
            PropertyValue::Port(id) => write!(f, "{id}"),
        }
    }
}

pub(super) fn query(
    descriptor: &DeviceDescriptor,
    calibrations: &CalibrationRegistry,
    scope: &QueryScope,
    key: PropertyKey,
) -> Result<PropertyValue, DriverError> {
    match scope {
        QueryScope::Device => match key {
            PropertyKey::Name => Ok(PropertyValue::Str(descriptor.name.clone())),
            PropertyKey::NumSites => Ok(PropertyValue::U64(descriptor.num_sites as u64)),
            PropertyKey::PulseSupport => Ok(PropertyValue::PulseSupport(descriptor.pulse_support)),
            PropertyKey::SupportedFormats => {
                Ok(PropertyValue::Formats(descriptor.supported_formats.clone()))
            }
            _ => Err(DriverError::NotSupported),
        },
        QueryScope::Site(site) => {
            if site.0 >= descriptor.num_sites {
                return Err(DriverError::InvalidScope(format!(
                    "site {site} outside 0..{}",
                    descriptor.num_sites
                )));
            }
            match key {
                PropertyKey::T1S => descriptor
                    .site_info(*site)
                    .and_then(|info| info.t1_s)
                    .map(PropertyValue::F64)
                    .ok_or(DriverError::NotSupported),
                PropertyKey::T2S => descriptor
                    .site_info(*site)
                    .and_then(|info| info.t2_s)
                    .map(PropertyValue::F64)
                    .ok_or(DriverError::NotSupported),
                PropertyKey::DrivePort => descriptor
                    .port_of_kind(PortKind::Drive, *site)
                    .map(|p| PropertyValue::Port(p.id.clone()))
                    .ok_or(DriverError::NotSupported),
                PropertyKey::ReadoutPort => descriptor
                    .port_of_kind(PortKind::Readout, *site)
                    .map(|p| PropertyValue::Port(p.id.clone()))
                    .ok_or(DriverError::NotSupported),
                _ => Err(DriverError::NotSupported),
            }
        }
        QueryScope::Port(port_id) => {
            if descriptor.pulse_support != PulseSupport::PortLevel {
                return Err(DriverError::InvalidScope(format!(
                    "device {} does not expose port-level pulse access",
                    descriptor.name
                )));
            }
            let port = descriptor
                .port(port_id)
                .ok_or_else(|| DriverError::InvalidScope(format!("no port {port_id} on device")))?;
            let constraints = &port.constraints;
            match key {
                PropertyKey::Kind => Ok(PropertyValue::PortKind(port.kind)),
                PropertyKey::SamplePeriodS => Ok(PropertyValue::F64(constraints.sample_period_s)),
                PropertyKey::GranularitySamples => {
                    Ok(PropertyValue::U64(constraints.granularity_samples))
                }
                PropertyKey::MinDurationSamples => {
                    Ok(PropertyValue::U64(constraints.min_duration_samples))
                }
                PropertyKey::MaxAmplitude => Ok(PropertyValue::F64(constraints.max_amplitude)),
                PropertyKey::FrequencyRangeHz => {
                    let (lo, hi) = constraints.frequency_range_hz;
                    Ok(PropertyValue::FrequencyRange(lo, hi))
                }
                _ => Err(DriverError::NotSupported),
            }
        }
        QueryScope::Operation(name) => {
            if !descriptor.operations.iter().any(|op| op == name) {
                return Err(DriverError::InvalidScope(format!(
                    "device does not support operation {name:?}"
                )));
            }
            let entry = calibrations.entries().iter().find(|e| &e.gate_name == name);
            match key {
                PropertyKey::HasDefaultCalibration => Ok(PropertyValue::Bool(entry.is_some())),
                PropertyKey::DurationSamples => entry
                    .map(|e| PropertyValue::U64(e.duration_samples()))
                    .ok_or(DriverError::NotSupported),
                _ => Err(DriverError::NotSupported),
            }
        }
    }
}
