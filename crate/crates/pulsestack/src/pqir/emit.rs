// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! Deterministic text emission for pulse-profile modules.

use std::collections::BTreeSet;
use std::fmt::Write;

use thiserror::Error;

use crate::ir::{PulseInstruction, Waveform};

use super::{
    frame_handle, port_handle, site_handle, ModuleError, PulseModule, BARRIER, CAPTURE, DELAY,
    FRAME_CHANGE, MZ, SET_FREQUENCY, SET_PHASE, SHIFT_FREQUENCY, SHIFT_PHASE, WAVEFORM,
    WAVEFORM_PLAY,
};

/// Render a module as `.pqir` text. Emission is a pure function: identical
/// modules produce byte-identical output.
///
/// An adjacent `set_frequency` + `set_phase` pair on one frame is emitted
/// as a single `frame_change` call, matching how the parser expands
/// `frame_change` back into the pair.
pub fn emit(module: &PulseModule) -> Result<String, EmitError> {
    module.validate()?;
    let mut out = String::new();

    writeln!(out, "; ModuleID = '{}'", module.module_name).unwrap();
    writeln!(out, "source_filename = \"{}\"", module.module_name).unwrap();
    out.push('\n');
    for ty in ["%Qubit", "%Result", "%Port", "%Frame", "%Waveform"] {
        writeln!(out, "{ty} = type opaque").unwrap();
    }
    out.push('\n');

    // Waveform data globals: interleaved re/im doubles.
    for (name, data) in &module.waveform_globals {
        write!(out, "@{name} = constant [{} x double] [", data.len() * 2).unwrap();
        for (index, (re, im)) in data.iter().enumerate() {
            if index > 0 {
                out.push_str(", ");
            }
            write!(out, "double {}, double {}", fmt_f64(*re), fmt_f64(*im)).unwrap();
        }
        out.push_str("]\n");
    }

    // Barrier frame lists become %Frame* constant arrays, deduplicated.
    let mut barrier_globals: Vec<(String, Vec<u32>)> = Vec::new();
    let mut taken: BTreeSet<String> = module
        .waveform_globals
        .iter()
        .map(|(name, _)| name.clone())
        .collect();
    let mut next_list = 0usize;
    for instruction in module.schedule.instructions() {
        if let PulseInstruction::Barrier { frames } = instruction {
            let handles = barrier_handles(frames)?;
            if !barrier_globals.iter().any(|(_, h)| h == &handles) {
                let name = loop {
                    let candidate = format!("fl{next_list}");
                    next_list += 1;
                    if !taken.contains(&candidate) {
                        break candidate;
                    }
                };
                taken.insert(name.clone());
                barrier_globals.push((name, handles));
            }
        }
    }
    for (name, handles) in &barrier_globals {
        write!(out, "@{name} = constant [{} x %Frame*] [", handles.len()).unwrap();
        for (index, handle) in handles.iter().enumerate() {
            if index > 0 {
                out.push_str(", ");
            }
            write!(out, "%Frame* {}", handle_literal("Frame", *handle as u64)).unwrap();
        }
        out.push_str("]\n");
    }
    if !module.waveform_globals.is_empty() || !barrier_globals.is_empty() {
        out.push('\n');
    }

    writeln!(out, "define void @{}() #0 {{", module.entry_name).unwrap();
    out.push_str("entry:\n");

    let mut used: BTreeSet<&str> = BTreeSet::new();
    for (index, (name, data)) in module.waveform_globals.iter().enumerate() {
        used.insert(WAVEFORM);
        writeln!(
            out,
            "  %w{index} = call %Waveform* @{WAVEFORM}(i64 {}, double* @{name})",
            data.len()
        )
        .unwrap();
    }

    let instructions = module.schedule.instructions();
    let mut i = 0;
    while i < instructions.len() {
        // set_frequency immediately followed by set_phase on the same
        // frame collapses into frame_change.
        if let (
            PulseInstruction::SetFrequency {
                frame,
                frequency_hz,
            },
            Some(PulseInstruction::SetPhase {
                frame: phase_frame,
                phase_rad,
            }),
        ) = (&instructions[i], instructions.get(i + 1))
        {
            if frame == phase_frame {
                let port = port_arg(module, frame)?;
                used.insert(FRAME_CHANGE);
                writeln!(
                    out,
                    "  call void @{FRAME_CHANGE}({port}, double {}, double {})",
                    fmt_f64(*frequency_hz),
                    fmt_f64(*phase_rad)
                )
                .unwrap();
                i += 2;
                continue;
            }
        }

        match &instructions[i] {
            PulseInstruction::Play { frame, waveform } => {
                let Waveform::Sampled { samples } = waveform else {
                    return Err(EmitError::UnsupportedInstruction {
                        index: i,
                        reason: "play carries an unresolved waveform".to_string(),
                    });
                };
                let slot = module
                    .waveform_globals
                    .iter()
                    .position(|(_, data)| data == samples)
                    .ok_or_else(|| EmitError::UnsupportedInstruction {
                        index: i,
                        reason: "play references samples missing from the globals".to_string(),
                    })?;
                let port = port_arg(module, frame)?;
                used.insert(WAVEFORM_PLAY);
                used.insert(WAVEFORM);
                writeln!(
                    out,
                    "  call void @{WAVEFORM_PLAY}({port}, %Waveform* %w{slot})"
                )
                .unwrap();
            }
            PulseInstruction::ShiftPhase { frame, delta_rad } => {
                used.insert(SHIFT_PHASE);
                writeln!(
                    out,
                    "  call void @{SHIFT_PHASE}({}, double {})",
                    frame_arg(frame)?,
                    fmt_f64(*delta_rad)
                )
                .unwrap();
            }
            PulseInstruction::SetPhase { frame, phase_rad } => {
                used.insert(SET_PHASE);
                writeln!(
                    out,
                    "  call void @{SET_PHASE}({}, double {})",
                    frame_arg(frame)?,
                    fmt_f64(*phase_rad)
                )
                .unwrap();
            }
            PulseInstruction::ShiftFrequency { frame, delta_hz } => {
                used.insert(SHIFT_FREQUENCY);
                writeln!(
                    out,
                    "  call void @{SHIFT_FREQUENCY}({}, double {})",
                    frame_arg(frame)?,
                    fmt_f64(*delta_hz)
                )
                .unwrap();
            }
            PulseInstruction::SetFrequency {
                frame,
                frequency_hz,
            } => {
                used.insert(SET_FREQUENCY);
                writeln!(
                    out,
                    "  call void @{SET_FREQUENCY}({}, double {})",
                    frame_arg(frame)?,
                    fmt_f64(*frequency_hz)
                )
                .unwrap();
            }
            PulseInstruction::Delay {
                frame,
                duration_samples,
            } => {
                used.insert(DELAY);
                writeln!(
                    out,
                    "  call void @{DELAY}({}, i64 {duration_samples})",
                    frame_arg(frame)?
                )
                .unwrap();
            }
            PulseInstruction::Barrier { frames } => {
                let handles = barrier_handles(frames)?;
                let (name, _) = barrier_globals
                    .iter()
                    .find(|(_, h)| h == &handles)
                    .expect("barrier global was collected above");
                used.insert(BARRIER);
                writeln!(
                    out,
                    "  call void @{BARRIER}(i64 {}, %Frame** @{name})",
                    handles.len()
                )
                .unwrap();
            }
            PulseInstruction::Capture { frame, result } => {
                used.insert(CAPTURE);
                writeln!(
                    out,
                    "  call void @{CAPTURE}({}, %Result* {})",
                    frame_arg(frame)?,
                    handle_literal("Result", result.0 as u64)
                )
                .unwrap();
            }
            PulseInstruction::Measure { site, result } => {
                used.insert(MZ);
                writeln!(
                    out,
                    "  call void @{MZ}(%Qubit* {}, %Result* {})",
                    handle_literal("Qubit", site_handle(*site)),
                    handle_literal("Result", result.0 as u64)
                )
                .unwrap();
            }
        }
        i += 1;
    }

    out.push_str("  ret void\n}\n\n");

    for (name, args, returns_waveform) in super::INTRINSICS {
        if !used.contains(name) {
            continue;
        }
        let ret = if returns_waveform {
            "%Waveform*"
        } else {
            "void"
        };
        let arg_list: Vec<String> = args.iter().map(|a| a.to_string()).collect();
        writeln!(out, "declare {ret} @{name}({})", arg_list.join(", ")).unwrap();
    }
    out.push('\n');

    let attrs = &module.attributes;
    out.push_str("attributes #0 = {");
    if attrs.entry_point {
        out.push_str(" \"entry_point\"");
    }
    if attrs.output_labeling_schema.is_empty() {
        out.push_str(" \"output_labeling_schema\"");
    } else {
        write!(
            out,
            " \"output_labeling_schema\"=\"{}\"",
            attrs.output_labeling_schema
        )
        .unwrap();
    }
    write!(out, " \"qir_profiles\"=\"{}\"", attrs.qir_profiles).unwrap();
    write!(
        out,
        " \"required_num_ports\"=\"{}\"",
        attrs.required_num_ports
    )
    .unwrap();
    write!(
        out,
        " \"required_num_qubits\"=\"{}\"",
        attrs.required_num_qubits
    )
    .unwrap();
    write!(
        out,
        " \"required_num_results\"=\"{}\"",
        attrs.required_num_results
    )
    .unwrap();
    out.push_str(" }\n");

    Ok(out)
}

/// Shortest decimal representation that parses back to the same bits.
fn fmt_f64(v: f64) -> String {
    let mut s = format!("{v}");
    // Keep the token recognizably floating-point.
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

fn handle_literal(ty: &str, value: u64) -> String {
    format!("inttoptr (i64 {value} to %{ty}*)")
}

fn frame_arg(frame: &crate::ir::FrameId) -> Result<String, EmitError> {
    let handle = frame_handle(frame).ok_or_else(|| EmitError::NonCanonicalFrame {
        frame: frame.to_string(),
    })?;
    Ok(format!(
        "%Frame* {}",
        handle_literal("Frame", handle as u64)
    ))
}

fn port_arg(module: &PulseModule, frame: &crate::ir::FrameId) -> Result<String, EmitError> {
    let port = &module.schedule.frames()[frame].port;
    let handle = port_handle(port).ok_or_else(|| EmitError::NonCanonicalFrame {
        frame: frame.to_string(),
    })?;
    Ok(format!("%Port* {}", handle_literal("Port", handle as u64)))
}

fn barrier_handles(frames: &BTreeSet<crate::ir::FrameId>) -> Result<Vec<u32>, EmitError> {
    frames
        .iter()
        .map(|f| {
            frame_handle(f).ok_or_else(|| EmitError::NonCanonicalFrame {
                frame: f.to_string(),
            })
        })
        .collect()
}

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("instruction {index} has no intrinsic mapping: {reason}")]
    UnsupportedInstruction { index: usize, reason: String },
    #[error("frame {frame} does not follow the canonical naming")]
    NonCanonicalFrame { frame: String },
    #[error(transparent)]
    Module(#[from] ModuleError),
}
