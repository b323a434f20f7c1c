// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! PulseStack: a desk-scale pulse-level quantum control stack.
//!
//! The crate lowers gate-level circuits to pulse schedules over three
//! abstractions — ports, frames, and waveforms — optimizes and legalizes
//! them against device constraints, exchanges them in a textual pulse
//! profile format (`.pqir`), and executes them on a built-in two-level
//! qubit simulator behind a device-management driver.
//!
//! Module map:
//!
//! - [`ir`] — ports, frames, waveforms, pulse instructions, schedules
//! - [`circuit`] — minimal gate-level circuit representation
//! - [`calibration`] — gate-to-pulse calibration registry and file format
//! - [`lowering`] — calibration-driven lowering of circuits to schedules
//! - [`passes`] — pass manager plus timing, canonicalization, and
//!   legalization passes
//! - [`pqir`] — parser and emitter for the pulse profile exchange format
//! - [`driver`] — device management: capability queries, sessions, jobs
//! - [`sim`] — rotating-frame single-qubit physics backend
//! - [`vqe`] — closed-loop pulse-parameter optimization demo
//! - [`cli`] — the `pulsestack` command-line front end
//!
//! # Example: circuit to wire format
//!
//! ```
//! use pulsestack::circuit::GateCircuit;
//! use pulsestack::driver::DeviceDescriptor;
//! use pulsestack::lowering::{builtin_calibrations, lower};
//! use pulsestack::passes::{run_pipeline, PipelineConfig};
//! use pulsestack::pqir::{emit, PulseModule};
//!
//! let device = DeviceDescriptor::from_json(
//!     include_str!("../../../demo/devices/sim1q.json"),
//! )?;
//! let circuit = GateCircuit::from_json(
//!     r#"[{"gate": "rz", "site": 0, "theta": 1.5707963267948966},
//!         {"gate": "measure", "site": 0, "result": 0}]"#,
//! )?;
//!
//! // Built-in rules cover rz (virtual-Z) and measure (play + capture).
//! let registry = builtin_calibrations(&device);
//! let schedule = lower(&circuit, &registry, &device)?;
//! let (schedule, diagnostics) =
//!     run_pipeline(schedule, &PipelineConfig::default(), &device)?;
//! assert!(!diagnostics.has_errors());
//!
//! let module = PulseModule::from_schedule(&schedule, &device, "job", "main", "")?;
//! let text = emit(&module)?;
//! assert!(text.contains("\"qir_profiles\"=\"pulse\""));
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod calibration;
pub mod circuit;
pub mod cli;
pub mod driver;
pub mod ir;
pub mod lowering;
pub mod passes;
pub mod plot;
pub mod pqir;
pub mod sim;
#[cfg(test)]
pub(crate) mod testutil;
pub mod vqe;
