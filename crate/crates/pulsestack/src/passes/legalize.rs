// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! Device legalization: check schedules against port constraints.

use num_complex::Complex64;

use crate::driver::descriptor::DeviceDescriptor;
use crate::ir::{PortKind, PulseInstruction, Schedule, AMPLITUDE_SLACK};

use super::{Diagnostic, Diagnostics};

/// How duration violations are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LegalizeMode {
    /// Every violation is an error diagnostic.
    #[default]
    Strict,
    /// Too-short or misaligned waveforms are zero-padded up to the next
    /// legal length; amplitude and frequency violations remain errors.
    Pad,
}

impl std::str::FromStr for LegalizeMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "strict" => Ok(LegalizeMode::Strict),
            "pad" => Ok(LegalizeMode::Pad),
            other => Err(format!("unknown legalization mode {other:?}")),
        }
    }
}

/// Check every instruction against the constraints of the port its frame
/// is bound to:
///
/// - play durations must be at least `min_duration_samples` and a multiple
///   of `granularity_samples` (pad mode appends zero samples up to the
///   next legal length instead of erroring);
/// - resolved envelope magnitudes must stay within `max_amplitude`;
/// - the frame frequency after every `set_frequency`/`shift_frequency`
///   must lie inside `frequency_range_hz`;
/// - captures are only legal on frames bound to readout/acquire ports.
///
/// Violations are reported as error diagnostics; padding is reported as a
/// note. If any instruction was modified the output schedule loses its
/// timing annotation.
pub fn legalize(
    schedule: &Schedule,
    device: &DeviceDescriptor,
    mode: LegalizeMode,
) -> (Schedule, Diagnostics) {
    let mut diagnostics = Diagnostics::new();
    let mut frequencies: std::collections::BTreeMap<crate::ir::FrameId, f64> = schedule
        .frames()
        .iter()
        .map(|(id, frame)| (id.clone(), frame.frequency_hz))
        .collect();
    let mut instructions = schedule.instructions().to_vec();
    let mut modified = false;

    for (index, instruction) in instructions.iter_mut().enumerate() {
        if matches!(
            instruction,
            PulseInstruction::Barrier { .. } | PulseInstruction::Measure { .. }
        ) {
            continue; // no port binding to check
        }
        let frame_id = instruction.frames()[0].clone();
        let frame = &schedule.frames()[&frame_id];
        let Some(port) = device.port(&frame.port) else {
            diagnostics.push(Diagnostic::error(
                Some(index),
                format!("frame {frame_id} is bound to unknown port {}", frame.port),
            ));
            continue;
        };
        let constraints = &port.constraints;

        match instruction {
            PulseInstruction::Play { waveform, .. } => {
                let samples = match waveform.resolve_samples() {
                    Ok(samples) => samples,
                    Err(e) => {
                        diagnostics.push(Diagnostic::error(
                            Some(index),
                            format!("waveform failed to resolve: {e}"),
                        ));
                        continue;
                    }
                };
                let peak = samples.iter().map(|c| c.norm()).fold(0.0, f64::max);
                if peak > constraints.max_amplitude + AMPLITUDE_SLACK {
                    diagnostics.push(Diagnostic::error(
                        Some(index),
                        format!(
                            "peak amplitude {peak:.6} exceeds port {} limit {}",
                            port.id, constraints.max_amplitude
                        ),
                    ));
                }
                let duration = samples.len() as u64;
                let misaligned = !duration.is_multiple_of(constraints.granularity_samples);
                let too_short = duration < constraints.min_duration_samples;
                if misaligned || too_short {
                    match mode {
                        LegalizeMode::Strict => {
                            diagnostics.push(Diagnostic::error(
                                Some(index),
                                format!(
                                    "duration {duration} violates port {} constraints \
                                     (min {}, granularity {})",
                                    port.id,
                                    constraints.min_duration_samples,
                                    constraints.granularity_samples
                                ),
                            ));
                        }
                        LegalizeMode::Pad => {
                            let target = next_legal_duration(
                                duration,
                                constraints.min_duration_samples,
                                constraints.granularity_samples,
                            );
                            let mut padded = samples;
                            padded.resize(target as usize, Complex64::new(0.0, 0.0));
                            *waveform = crate::ir::Waveform::sampled(padded)
                                .expect("zero padding preserves validity");
                            modified = true;
                            diagnostics.push(Diagnostic::note(
                                Some(index),
                                format!("padded waveform from {duration} to {target} samples"),
                            ));
                        }
                    }
                }
            }
            PulseInstruction::SetFrequency { frequency_hz, .. } => {
                frequencies.insert(frame_id, *frequency_hz);
                check_frequency(&mut diagnostics, index, *frequency_hz, port);
            }
            PulseInstruction::ShiftFrequency { delta_hz, .. } => {
                let next = frequencies[&frame_id] + *delta_hz;
                frequencies.insert(frame_id, next);
                check_frequency(&mut diagnostics, index, next, port);
            }
            PulseInstruction::Capture { .. }
                if !matches!(port.kind, PortKind::Readout | PortKind::Acquire) =>
            {
                diagnostics.push(Diagnostic::error(
                    Some(index),
                    format!("capture targets {} port {}", port.kind, port.id),
                ));
            }
            _ => {}
        }
    }

    let output = if modified {
        schedule
            .with_instructions(instructions)
            .expect("legalization preserves schedule validity")
    } else {
        schedule.clone()
    };
    (output, diagnostics)
}

fn check_frequency(
    diagnostics: &mut Diagnostics,
    index: usize,
    frequency_hz: f64,
    port: &crate::ir::Port,
) {
    if !port.constraints.frequency_in_range(frequency_hz) {
        let (lo, hi) = port.constraints.frequency_range_hz;
        diagnostics.push(Diagnostic::error(
            Some(index),
            format!(
                "frequency {frequency_hz} Hz outside port {} range [{lo}, {hi}]",
                port.id
            ),
        ));
    }
}

/// Smallest multiple of `granularity` that is >= both `duration` and
/// `min_duration`. `min_duration` is itself a multiple of the granularity
/// by construction, so the result satisfies both constraints.
fn next_legal_duration(duration: u64, min_duration: u64, granularity: u64) -> u64 {
    let aligned = duration.div_ceil(granularity) * granularity;
    aligned.max(min_duration)
}
