// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! Device descriptors: everything a driver knows about one device.
//!
//! Descriptors are loaded from JSON files at driver start (see
//! [`crate::driver::Driver::from_env`]); the file mirrors
//! [`DeviceDescriptor`] field for field. Simulated devices carry their
//! qubit models under the `"simulation"` key.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibration::CalibrationRegistry;
use crate::ir::{Port, PortError, PortId, PortKind, SiteId};
use crate::sim::QubitModel;

/// Level of pulse access a device offers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseSupport {
    None,
    SiteLevel,
    PortLevel,
}

impl std::fmt::Display for PulseSupport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PulseSupport::None => "none",
            PulseSupport::SiteLevel => "site_level",
            PulseSupport::PortLevel => "port_level",
        };
        f.write_str(s)
    }
}

/// Payload formats a device can accept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobFormat {
    PqirPulse,
}

impl std::fmt::Display for JobFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            JobFormat::PqirPulse => f.write_str("pqir_pulse"),
        }
    }
}

impl std::str::FromStr for JobFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pqir_pulse" => Ok(JobFormat::PqirPulse),
            other => Err(format!("unknown job format {other:?}")),
        }
    }
}

/// Optional per-site metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteInfo {
    pub site: SiteId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2_s: Option<f64>,
    /// Calibrated carrier frequency for the site's drive frame.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive_frequency_hz: Option<f64>,
}

/// Qubit models backing a simulated device.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationInfo {
    pub models: Vec<QubitModel>,
}

/// Static description of one device: sites, ports, operations, pulse
/// support level, and constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceDescriptor {
    pub name: String,
    pub num_sites: u32,
    pub pulse_support: PulseSupport,
    #[serde(default)]
    pub ports: Vec<Port>,
    /// Gate names the device supports at the gate level.
    #[serde(default)]
    pub operations: Vec<String>,
    #[serde(default)]
    pub supported_formats: Vec<JobFormat>,
    #[serde(default)]
    pub sites: Vec<SiteInfo>,
    #[serde(default)]
    pub default_calibrations: CalibrationRegistry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationInfo>,
}

impl DeviceDescriptor {
    pub fn from_json(text: &str) -> Result<Self, DescriptorError> {
        let descriptor: DeviceDescriptor = serde_json::from_str(text)?;
        descriptor.validate()?;
        Ok(descriptor)
    }

    pub fn validate(&self) -> Result<(), DescriptorError> {
        if self.name.is_empty() {
            return Err(DescriptorError::Invalid("device name must be non-empty"));
        }
        if self.num_sites == 0 {
            return Err(DescriptorError::Invalid("num_sites must be positive"));
        }
        if self.pulse_support == PulseSupport::PortLevel && self.ports.is_empty() {
            return Err(DescriptorError::Invalid(
                "port_level pulse support requires at least one port",
            ));
        }
        let mut ids = std::collections::BTreeSet::new();
        for port in &self.ports {
            port.validate()?;
            if !ids.insert(&port.id) {
                return Err(DescriptorError::DuplicatePort(port.id.clone()));
            }
            for site in &port.sites {
                if site.0 >= self.num_sites {
                    return Err(DescriptorError::PortSiteOutOfRange {
                        port: port.id.clone(),
                        site: *site,
                    });
                }
            }
        }
        for info in &self.sites {
            if info.site.0 >= self.num_sites {
                return Err(DescriptorError::Invalid("site metadata out of range"));
            }
        }
        if let Some(sim) = &self.simulation {
            let mut seen = std::collections::BTreeSet::new();
            for model in &sim.models {
                if model.site.0 >= self.num_sites {
                    return Err(DescriptorError::Invalid("qubit model site out of range"));
                }
                if !seen.insert(model.site) {
                    return Err(DescriptorError::Invalid("duplicate qubit model site"));
                }
                model.validate().map_err(DescriptorError::Invalid)?;
            }
        }
        Ok(())
    }

    pub fn port(&self, id: &PortId) -> Option<&Port> {
        self.ports.iter().find(|p| &p.id == id)
    }

    /// First port of `kind` that touches `site`, in declaration order.
    pub fn port_of_kind(&self, kind: PortKind, site: SiteId) -> Option<&Port> {
        self.ports
            .iter()
            .find(|p| p.kind == kind && p.covers_site(site))
    }

    pub fn ports_of_kind(&self, kind: PortKind) -> impl Iterator<Item = &Port> {
        self.ports.iter().filter(move |p| p.kind == kind)
    }

    pub fn has_port_kind(&self, kind: PortKind) -> bool {
        self.ports.iter().any(|p| p.kind == kind)
    }

    pub fn site_info(&self, site: SiteId) -> Option<&SiteInfo> {
        self.sites.iter().find(|s| s.site == site)
    }

    pub fn supports_format(&self, format: JobFormat) -> bool {
        self.supported_formats.contains(&format)
    }

    pub fn is_simulated(&self) -> bool {
        self.simulation.is_some()
    }
}

#[derive(Debug, Error)]
pub enum DescriptorError {
    #[error("invalid device descriptor: {0}")]
    Invalid(&'static str),
    #[error("duplicate port id {0}")]
    DuplicatePort(PortId),
    #[error("port {port} references site {site} outside the device")]
    PortSiteOutOfRange { port: PortId, site: SiteId },
    #[error(transparent)]
    Port(#[from] PortError),
    #[error("malformed descriptor JSON: {0}")]
    Json(#[from] serde_json::Error),
}
