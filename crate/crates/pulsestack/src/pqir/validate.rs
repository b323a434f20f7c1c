// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! Profile validation: attribute counts versus actual usage.

use crate::ir::PulseInstruction;
use crate::passes::{Diagnostic, Diagnostics};

use super::{PulseModule, PULSE_PROFILE};

/// Check a module's metadata against its body. All findings are
/// diagnostics; errors mean the module must not be submitted:
///
/// - the entry function must carry `"entry_point"`;
/// - `qir_profiles` must be `"pulse"`;
/// - declared resource counts must cover actual usage;
/// - result indices must be dense from 0.
pub fn validate_profile(module: &PulseModule) -> Diagnostics {
    let mut diagnostics = Diagnostics::new();
    let attrs = &module.attributes;

    if !attrs.entry_point {
        diagnostics.push(Diagnostic::error(
            None,
            "entry function lacks the \"entry_point\" attribute",
        ));
    }
    if attrs.qir_profiles != PULSE_PROFILE {
        diagnostics.push(Diagnostic::error(
            None,
            format!(
                "qir_profiles is {:?}, expected \"pulse\"",
                attrs.qir_profiles
            ),
        ));
    }

    let ports_used = module.used_port_handles().len() as u32;
    if attrs.required_num_ports < ports_used {
        diagnostics.push(Diagnostic::error(
            None,
            format!(
                "required_num_ports={} but {ports_used} ports are used",
                attrs.required_num_ports
            ),
        ));
    }

    let qubits_used = module
        .schedule
        .instructions()
        .iter()
        .filter_map(|i| match i {
            PulseInstruction::Measure { site, .. } => Some(site.0 + 1),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    if attrs.required_num_qubits < qubits_used {
        diagnostics.push(Diagnostic::error(
            None,
            format!(
                "required_num_qubits={} but qubit {} is measured",
                attrs.required_num_qubits,
                qubits_used - 1
            ),
        ));
    }

    let results = module.schedule.result_ids();
    let results_used = results.last().map(|r| r.0 + 1).unwrap_or(0);
    if attrs.required_num_results < results_used {
        diagnostics.push(Diagnostic::error(
            None,
            format!(
                "required_num_results={} but result {} is written",
                attrs.required_num_results,
                results_used - 1
            ),
        ));
    }
    for (expected, result) in results.iter().enumerate() {
        if result.0 as usize != expected {
            diagnostics.push(Diagnostic::error(
                None,
                format!(
                    "result indices must be dense from 0; found {} where {expected} was expected",
                    result.0
                ),
            ));
            break;
        }
    }

    diagnostics
}
