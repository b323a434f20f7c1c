// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! The `.pqir` pulse-profile exchange format.
//!
//! A pulse job travels as a self-contained LLVM-like textual module: opaque
//! type declarations for `%Qubit`, `%Result`, `%Port`, `%Frame`, and
//! `%Waveform`; waveform sample data as global constant arrays of
//! interleaved re/im doubles; one entry function whose single basic block
//! calls pulse intrinsics in schedule order; intrinsic declarations; and an
//! attribute group carrying the profile metadata
//! (`"qir_profiles"="pulse"`, `"entry_point"`, resource counts).
//!
//! Only a fixed subset of IR is understood — this is a wire format, not a
//! general IR parser. Ports, frames, qubits, and results are opaque handles
//! encoded as `inttoptr (i64 N to %Port*)` literals. A port handle indexes
//! the target device's port table; within one module, frame handle `k` is
//! the frame bound to port handle `k`. Modules are *canonical*: frames
//! start at frequency 0 and phase 0, and any real initial state is spelled
//! as explicit `frame_change` calls at the top of the entry block.
//! Parametric envelopes are resolved to samples when a module is built;
//! the wire carries sample data only.

mod emit;
mod parse;
mod validate;

pub use emit::{emit, EmitError};
pub use parse::{parse, ParseError, ParseErrorKind, Parsed};
pub use validate::validate_profile;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::driver::descriptor::DeviceDescriptor;
use crate::ir::{
    Frame, FrameId, PortId, PulseInstruction, Schedule, ScheduleError, SiteId, Waveform,
};

/// Required value of the `qir_profiles` attribute.
pub const PULSE_PROFILE: &str = "pulse";

/// The fixed intrinsic table: `(name, argument types, returns waveform)`.
///
/// Calls whose argument types differ from this table are rejected by the
/// parser; the emitter never produces anything outside it.
pub const INTRINSICS: [(&str, &[ArgType], bool); 11] = [
    (WAVEFORM, &[ArgType::I64, ArgType::DoublePtr], true),
    (
        WAVEFORM_PLAY,
        &[ArgType::PortPtr, ArgType::WaveformPtr],
        false,
    ),
    (
        FRAME_CHANGE,
        &[ArgType::PortPtr, ArgType::Double, ArgType::Double],
        false,
    ),
    (DELAY, &[ArgType::FramePtr, ArgType::I64], false),
    (SHIFT_PHASE, &[ArgType::FramePtr, ArgType::Double], false),
    (SET_PHASE, &[ArgType::FramePtr, ArgType::Double], false),
    (
        SHIFT_FREQUENCY,
        &[ArgType::FramePtr, ArgType::Double],
        false,
    ),
    (SET_FREQUENCY, &[ArgType::FramePtr, ArgType::Double], false),
    (BARRIER, &[ArgType::I64, ArgType::FramePtrPtr], false),
    (CAPTURE, &[ArgType::FramePtr, ArgType::ResultPtr], false),
    (MZ, &[ArgType::QubitPtr, ArgType::ResultPtr], false),
];

pub const WAVEFORM: &str = "__quantum__pulse__waveform__body";
pub const WAVEFORM_PLAY: &str = "__quantum__pulse__waveform_play__body";
pub const FRAME_CHANGE: &str = "__quantum__pulse__frame_change__body";
pub const DELAY: &str = "__quantum__pulse__delay__body";
pub const SHIFT_PHASE: &str = "__quantum__pulse__shift_phase__body";
pub const SET_PHASE: &str = "__quantum__pulse__set_phase__body";
pub const SHIFT_FREQUENCY: &str = "__quantum__pulse__shift_frequency__body";
pub const SET_FREQUENCY: &str = "__quantum__pulse__set_frequency__body";
pub const BARRIER: &str = "__quantum__pulse__barrier__body";
pub const CAPTURE: &str = "__quantum__pulse__capture__body";
pub const MZ: &str = "__quantum__qis__mz__body";

/// Argument slots an intrinsic accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgType {
    I64,
    Double,
    DoublePtr,
    WaveformPtr,
    PortPtr,
    FramePtr,
    FramePtrPtr,
    QubitPtr,
    ResultPtr,
}

impl std::fmt::Display for ArgType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ArgType::I64 => "i64",
            ArgType::Double => "double",
            ArgType::DoublePtr => "double*",
            ArgType::WaveformPtr => "%Waveform*",
            ArgType::PortPtr => "%Port*",
            ArgType::FramePtr => "%Frame*",
            ArgType::FramePtrPtr => "%Frame**",
            ArgType::QubitPtr => "%Qubit*",
            ArgType::ResultPtr => "%Result*",
        };
        f.write_str(s)
    }
}

pub fn intrinsic_signature(name: &str) -> Option<(&'static [ArgType], bool)> {
    INTRINSICS
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, args, ret)| (*args, *ret))
}

/// Module-level metadata carried in the trailing attribute group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleAttributes {
    pub entry_point: bool,
    pub output_labeling_schema: String,
    pub qir_profiles: String,
    pub required_num_ports: u32,
    pub required_num_qubits: u32,
    pub required_num_results: u32,
}

impl Default for ModuleAttributes {
    fn default() -> Self {
        ModuleAttributes {
            entry_point: true,
            output_labeling_schema: String::new(),
            qir_profiles: PULSE_PROFILE.to_string(),
            required_num_ports: 0,
            required_num_qubits: 0,
            required_num_results: 0,
        }
    }
}

/// An in-memory pulse-profile module.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseModule {
    pub module_name: String,
    pub entry_name: String,
    pub attributes: ModuleAttributes,
    pub schedule: Schedule,
    /// Waveform data globals in definition order: `(name, samples)`.
    pub waveform_globals: Vec<(String, Vec<(f64, f64)>)>,
}

impl PulseModule {
    /// Canonicalize a schedule into a module bound for `device`.
    ///
    /// Used frames are renamed to `frame{k}` where `k` is the index of
    /// their port in the device's port table; unused frames are dropped;
    /// nonzero initial frame state becomes leading
    /// `set_frequency`/`set_phase` pairs (emitted as `frame_change`);
    /// parametric envelopes are resolved; waveform data is deduplicated
    /// into globals.
    pub fn from_schedule(
        schedule: &Schedule,
        device: &DeviceDescriptor,
        module_name: impl Into<String>,
        entry_name: impl Into<String>,
        output_labeling_schema: impl Into<String>,
    ) -> Result<Self, ModuleError> {
        let module_name = validate_identifier(module_name.into())?;
        let entry_name = validate_identifier(entry_name.into())?;

        // Frames in first-use order -> device port index.
        let mut handle_of_frame: BTreeMap<FrameId, u32> = BTreeMap::new();
        let mut used_ports: BTreeMap<u32, FrameId> = BTreeMap::new();
        for instruction in schedule.instructions() {
            for frame_id in instruction.frames() {
                if handle_of_frame.contains_key(frame_id) {
                    continue;
                }
                let frame = &schedule.frames()[frame_id];
                let index = device
                    .ports
                    .iter()
                    .position(|p| p.id == frame.port)
                    .ok_or_else(|| ModuleError::UnknownPort(frame.port.clone()))?
                    as u32;
                if let Some(previous) = used_ports.insert(index, frame_id.clone()) {
                    return Err(ModuleError::SharedPort {
                        port: frame.port.clone(),
                        first: previous,
                        second: frame_id.clone(),
                    });
                }
                handle_of_frame.insert(frame_id.clone(), index);
            }
        }

        let canonical = |handle: u32| FrameId::new(format!("frame{handle}")).expect("canonical id");

        // Leading frame-state assignments, ascending by handle.
        let mut instructions: Vec<PulseInstruction> = Vec::new();
        for (&handle, frame_id) in &used_ports {
            let frame = &schedule.frames()[frame_id];
            if frame.frequency_hz != 0.0 || frame.phase_rad != 0.0 {
                instructions.push(PulseInstruction::SetFrequency {
                    frame: canonical(handle),
                    frequency_hz: frame.frequency_hz,
                });
                instructions.push(PulseInstruction::SetPhase {
                    frame: canonical(handle),
                    phase_rad: frame.phase_rad,
                });
            }
        }

        // Body with renamed frames, resolved envelopes, and deduplicated
        // waveform globals.
        let mut globals: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
        for instruction in schedule.instructions() {
            instructions.push(rewrite_instruction(
                instruction,
                &handle_of_frame,
                &canonical,
                &mut globals,
            )?);
        }

        let mut frames = BTreeMap::new();
        for &handle in used_ports.keys() {
            let id = canonical(handle);
            let port = PortId::new(format!("port{handle}")).expect("canonical port id");
            frames.insert(
                id.clone(),
                Frame::new(id, port, 0.0, 0.0).expect("zero frame"),
            );
        }
        let canonical_schedule = Schedule::new(frames, instructions)?;

        let required_num_results = canonical_schedule
            .result_ids()
            .last()
            .map(|r| r.0 + 1)
            .unwrap_or(0);
        let required_num_qubits = canonical_schedule
            .instructions()
            .iter()
            .filter_map(|i| match i {
                PulseInstruction::Measure { site, .. } => Some(site.0 + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0);

        let module = PulseModule {
            module_name,
            entry_name,
            attributes: ModuleAttributes {
                entry_point: true,
                output_labeling_schema: output_labeling_schema.into(),
                qir_profiles: PULSE_PROFILE.to_string(),
                required_num_ports: used_ports.len() as u32,
                required_num_qubits,
                required_num_results,
            },
            schedule: canonical_schedule,
            waveform_globals: globals,
        };
        module.validate()?;
        Ok(module)
    }

    /// Structural validity: canonical frame naming, profile tag, and every
    /// play backed by a waveform global.
    pub fn validate(&self) -> Result<(), ModuleError> {
        if self.attributes.qir_profiles != PULSE_PROFILE {
            return Err(ModuleError::WrongProfile(
                self.attributes.qir_profiles.clone(),
            ));
        }
        for (id, frame) in self.schedule.frames() {
            let handle = frame_handle(id)
                .ok_or_else(|| ModuleError::NonCanonicalFrame { frame: id.clone() })?;
            if port_handle(&frame.port) != Some(handle)
                || frame.frequency_hz != 0.0
                || frame.phase_rad != 0.0
                || frame.elapsed_samples != 0
            {
                return Err(ModuleError::NonCanonicalFrame { frame: id.clone() });
            }
        }
        let mut names = std::collections::BTreeSet::new();
        for (name, data) in &self.waveform_globals {
            validate_identifier(name.clone())?;
            if !names.insert(name) {
                return Err(ModuleError::DuplicateGlobal(name.clone()));
            }
            if data.is_empty() {
                return Err(ModuleError::EmptyGlobal(name.clone()));
            }
        }
        for (index, instruction) in self.schedule.instructions().iter().enumerate() {
            if let PulseInstruction::Play { waveform, .. } = instruction {
                let Waveform::Sampled { samples } = waveform else {
                    return Err(ModuleError::UnresolvedWaveform { index });
                };
                if !self
                    .waveform_globals
                    .iter()
                    .any(|(_, data)| data == samples)
                {
                    return Err(ModuleError::MissingWaveformGlobal { index });
                }
            }
        }
        Ok(())
    }

    /// Rebind the canonical schedule onto a concrete device: frame `k`
    /// attaches to the device's port at index `k`.
    pub fn bind_to_device(&self, device: &DeviceDescriptor) -> Result<Schedule, ModuleError> {
        let mut frames = BTreeMap::new();
        for (id, frame) in self.schedule.frames() {
            let handle = frame_handle(id)
                .ok_or_else(|| ModuleError::NonCanonicalFrame { frame: id.clone() })?;
            let port =
                device
                    .ports
                    .get(handle as usize)
                    .ok_or(ModuleError::PortIndexOutOfRange {
                        handle,
                        available: device.ports.len(),
                    })?;
            frames.insert(
                id.clone(),
                Frame::new(
                    id.clone(),
                    port.id.clone(),
                    frame.frequency_hz,
                    frame.phase_rad,
                )
                .expect("canonical frames are finite"),
            );
        }
        Ok(Schedule::new(
            frames,
            self.schedule.instructions().to_vec(),
        )?)
    }

    /// Distinct port handles referenced by the schedule, ascending.
    pub fn used_port_handles(&self) -> Vec<u32> {
        let mut handles: Vec<u32> = self
            .schedule
            .frames()
            .values()
            .filter_map(|f| port_handle(&f.port))
            .collect();
        handles.sort_unstable();
        handles.dedup();
        handles
    }
}

fn rewrite_instruction(
    instruction: &PulseInstruction,
    handles: &BTreeMap<FrameId, u32>,
    canonical: &impl Fn(u32) -> FrameId,
    globals: &mut Vec<(String, Vec<(f64, f64)>)>,
) -> Result<PulseInstruction, ModuleError> {
    let rename = |id: &FrameId| canonical(handles[id]);
    use PulseInstruction::*;
    Ok(match instruction {
        Play { frame, waveform } => {
            let resolved = waveform
                .resolved()
                .map_err(|e| ModuleError::Waveform(e.to_string()))?;
            let Waveform::Sampled { samples } = &resolved else {
                unreachable!("resolved() yields sampled waveforms")
            };
            if !globals.iter().any(|(_, data)| data == samples) {
                globals.push((format!("wf{}", globals.len()), samples.clone()));
            }
            Play {
                frame: rename(frame),
                waveform: resolved,
            }
        }
        ShiftPhase { frame, delta_rad } => ShiftPhase {
            frame: rename(frame),
            delta_rad: *delta_rad,
        },
        SetPhase { frame, phase_rad } => SetPhase {
            frame: rename(frame),
            phase_rad: *phase_rad,
        },
        ShiftFrequency { frame, delta_hz } => ShiftFrequency {
            frame: rename(frame),
            delta_hz: *delta_hz,
        },
        SetFrequency {
            frame,
            frequency_hz,
        } => SetFrequency {
            frame: rename(frame),
            frequency_hz: *frequency_hz,
        },
        Delay {
            frame,
            duration_samples,
        } => Delay {
            frame: rename(frame),
            duration_samples: *duration_samples,
        },
        Barrier { frames } => Barrier {
            frames: frames.iter().map(&rename).collect(),
        },
        Capture { frame, result } => Capture {
            frame: rename(frame),
            result: *result,
        },
        Measure { site, result } => Measure {
            site: *site,
            result: *result,
        },
    })
}

/// `frame{k}` -> `k`.
pub(crate) fn frame_handle(id: &FrameId) -> Option<u32> {
    id.as_str().strip_prefix("frame")?.parse().ok()
}

/// `port{k}` -> `k`.
pub(crate) fn port_handle(id: &PortId) -> Option<u32> {
    id.as_str().strip_prefix("port")?.parse().ok()
}

pub(crate) fn site_handle(site: SiteId) -> u64 {
    site.0 as u64
}

fn validate_identifier(name: String) -> Result<String, ModuleError> {
    let mut chars = name.chars();
    let head_ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_');
    let tail_ok = chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    if head_ok && tail_ok {
        Ok(name)
    } else {
        Err(ModuleError::InvalidIdentifier(name))
    }
}

#[derive(Debug, Error)]
pub enum ModuleError {
    #[error("schedule references port {0} not present on the device")]
    UnknownPort(PortId),
    #[error("frames {first} and {second} share port {port}; the exchange format binds one frame per port")]
    SharedPort {
        port: PortId,
        first: FrameId,
        second: FrameId,
    },
    #[error("frame {frame} does not follow the canonical frame{{k}}/port{{k}} naming with zero initial state")]
    NonCanonicalFrame { frame: FrameId },
    #[error("module declares profile {0:?}, expected \"pulse\"")]
    WrongProfile(String),
    #[error("invalid identifier {0:?}")]
    InvalidIdentifier(String),
    #[error("duplicate waveform global {0:?}")]
    DuplicateGlobal(String),
    #[error("waveform global {0:?} has no samples")]
    EmptyGlobal(String),
    #[error("play at instruction {index} carries an unresolved waveform")]
    UnresolvedWaveform { index: usize },
    #[error("play at instruction {index} references samples missing from the waveform globals")]
    MissingWaveformGlobal { index: usize },
    #[error("port handle {handle} exceeds the device's {available} ports")]
    PortIndexOutOfRange { handle: u32, available: usize },
    #[error("waveform failed to resolve: {0}")]
    Waveform(String),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}
