// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! Minimal gate-level circuit representation.
//!
//! Circuits exist here only as lowering input: single-site X/SX/RZ gates
//! and site measurements. The on-disk form is a JSON list of gate objects,
//! e.g. `[{"gate":"x","site":0},{"gate":"rz","site":0,"theta":1.5708},
//! {"gate":"measure","site":0,"result":0}]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::{ResultId, SiteId};

/// One gate-level operation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "lowercase")]
pub enum Gate {
    X {
        site: SiteId,
    },
    Sx {
        site: SiteId,
    },
    Rz {
        site: SiteId,
        #[serde(rename = "theta")]
        theta_rad: f64,
    },
    Measure {
        site: SiteId,
        result: ResultId,
    },
}

impl Gate {
    pub fn site(&self) -> SiteId {
        match self {
            Gate::X { site } | Gate::Sx { site } | Gate::Rz { site, .. } => *site,
            Gate::Measure { site, .. } => *site,
        }
    }

    /// Lowercase name used for calibration lookup.
    pub fn name(&self) -> &'static str {
        match self {
            Gate::X { .. } => "x",
            Gate::Sx { .. } => "sx",
            Gate::Rz { .. } => "rz",
            Gate::Measure { .. } => "measure",
        }
    }
}

/// An ordered gate list over a fixed number of sites.
#[derive(Debug, Clone, PartialEq)]
pub struct GateCircuit {
    num_sites: u32,
    gates: Vec<Gate>,
}

impl GateCircuit {
    pub fn new(num_sites: u32, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        if num_sites == 0 {
            return Err(CircuitError::NoSites);
        }
        let mut results = std::collections::BTreeSet::new();
        for (index, gate) in gates.iter().enumerate() {
            if gate.site().0 >= num_sites {
                return Err(CircuitError::SiteOutOfRange {
                    index,
                    site: gate.site(),
                    num_sites,
                });
            }
            if let Gate::Rz { theta_rad, .. } = gate {
                if !theta_rad.is_finite() {
                    return Err(CircuitError::NonFiniteAngle { index });
                }
            }
            if let Gate::Measure { result, .. } = gate {
                if !results.insert(*result) {
                    return Err(CircuitError::DuplicateResult {
                        index,
                        result: *result,
                    });
                }
            }
        }
        Ok(GateCircuit { num_sites, gates })
    }

    /// Parse the JSON gate-list form; the site count is inferred from the
    /// largest site index.
    pub fn from_json(text: &str) -> Result<Self, CircuitError> {
        let gates: Vec<Gate> = serde_json::from_str(text)?;
        let num_sites = gates
            .iter()
            .map(|g| g.site().0 + 1)
            .max()
            .ok_or(CircuitError::NoGates)?;
        GateCircuit::new(num_sites, gates)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.gates).expect("gate list serializes")
    }

    pub fn num_sites(&self) -> u32 {
        self.num_sites
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }
}

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("circuit must span at least one site")]
    NoSites,
    #[error("circuit contains no gates")]
    NoGates,
    #[error("gate {index} targets site {site} outside 0..{num_sites}")]
    SiteOutOfRange {
        index: usize,
        site: SiteId,
        num_sites: u32,
    },
    #[error("gate {index} has a non-finite rotation angle")]
    NonFiniteAngle { index: usize },
    #[error("gate {index} reuses result {result}")]
    DuplicateResult { index: usize, result: ResultId },
    #[error("malformed circuit JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_gate_list_json() {
        let text = r#"[
            {"gate": "x", "site": 0},
            {"gate": "rz", "site": 1, "theta": 1.5707963267948966},
            {"gate": "measure", "site": 0, "result": 0}
        ]"#;
        let circuit = GateCircuit::from_json(text).unwrap();
        assert_eq!(circuit.num_sites(), 2);
        assert_eq!(circuit.gates().len(), 3);
        assert_eq!(circuit.gates()[0].name(), "x");
    }

    #[test]
    fn rejects_duplicate_results() {
        let text = r#"[
            {"gate": "measure", "site": 0, "result": 0},
            {"gate": "measure", "site": 1, "result": 0}
        ]"#;
        assert!(matches!(
            GateCircuit::from_json(text),
            Err(CircuitError::DuplicateResult { .. })
        ));
    }

    #[test]
    fn rejects_out_of_range_site() {
        let gates = vec![Gate::X { site: SiteId(3) }];
        assert!(matches!(
            GateCircuit::new(2, gates),
            Err(CircuitError::SiteOutOfRange { .. })
        ));
    }
}
