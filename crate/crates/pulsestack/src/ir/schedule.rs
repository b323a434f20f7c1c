// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! Pulse instructions and schedules.
//!
//! A [`Schedule`] carries the initial state of every frame it uses plus an
//! ordered instruction list, optionally annotated with resolved start
//! times. Instructions sequence per frame; cross-frame ordering is only
//! established by barriers (and by site-level measurements, which
//! synchronize against every frame because their port binding is unknown
//! without a device).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::frame::{Frame, FrameId};
use super::port::SiteId;
use super::waveform::Waveform;

/// Index into the classical result register.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct ResultId(pub u32);

impl ResultId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ResultId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One pulse-level operation.
#[derive(Debug, Clone, PartialEq)]
pub enum PulseInstruction {
    /// Emit a waveform in the given frame. Duration = waveform duration.
    Play { frame: FrameId, waveform: Waveform },
    /// Add `delta_rad` to the frame's carrier phase. Zero duration.
    ShiftPhase { frame: FrameId, delta_rad: f64 },
    /// Set the frame's carrier phase. Zero duration.
    SetPhase { frame: FrameId, phase_rad: f64 },
    /// Add `delta_hz` to the frame's carrier frequency. Zero duration.
    ShiftFrequency { frame: FrameId, delta_hz: f64 },
    /// Set the frame's carrier frequency. Zero duration.
    SetFrequency { frame: FrameId, frequency_hz: f64 },
    /// Advance the frame's clock without output.
    Delay {
        frame: FrameId,
        duration_samples: u64,
    },
    /// Synchronize the clocks of two or more frames to their maximum.
    Barrier { frames: BTreeSet<FrameId> },
    /// Record the acquisition on a readout/acquire frame into `result`.
    Capture { frame: FrameId, result: ResultId },
    /// Gate-level measurement of a site into `result`.
    Measure { site: SiteId, result: ResultId },
}

impl PulseInstruction {
    /// Frames this instruction references (none for `Measure`).
    pub fn frames(&self) -> Vec<&FrameId> {
        use PulseInstruction::*;
        match self {
            Play { frame, .. }
            | ShiftPhase { frame, .. }
            | SetPhase { frame, .. }
            | ShiftFrequency { frame, .. }
            | SetFrequency { frame, .. }
            | Delay { frame, .. }
            | Capture { frame, .. } => vec![frame],
            Barrier { frames } => frames.iter().collect(),
            Measure { .. } => vec![],
        }
    }

    /// How far this instruction advances its frame's clock.
    pub fn duration_samples(&self) -> u64 {
        match self {
            PulseInstruction::Play { waveform, .. } => waveform.duration_samples(),
            PulseInstruction::Delay {
                duration_samples, ..
            } => *duration_samples,
            _ => 0,
        }
    }

    /// The classical result this instruction writes, if any.
    pub fn result(&self) -> Option<ResultId> {
        match self {
            PulseInstruction::Capture { result, .. } | PulseInstruction::Measure { result, .. } => {
                Some(*result)
            }
            _ => None,
        }
    }

    pub fn op_name(&self) -> &'static str {
        use PulseInstruction::*;
        match self {
            Play { .. } => "play",
            ShiftPhase { .. } => "shift_phase",
            SetPhase { .. } => "set_phase",
            ShiftFrequency { .. } => "shift_frequency",
            SetFrequency { .. } => "set_frequency",
            Delay { .. } => "delay",
            Barrier { .. } => "barrier",
            Capture { .. } => "capture",
            Measure { .. } => "measure",
        }
    }
}

/// An ordered pulse program over a set of frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    frames: BTreeMap<FrameId, Frame>,
    instructions: Vec<PulseInstruction>,
    /// Start sample of each instruction, aligned with `instructions`.
    timing: Option<Vec<u64>>,
}

impl Schedule {
    /// Build an untimed schedule, validating its structural invariants:
    /// every referenced frame is declared, barriers span at least two
    /// frames, and result indices are unique.
    pub fn new(
        frames: BTreeMap<FrameId, Frame>,
        instructions: Vec<PulseInstruction>,
    ) -> Result<Self, ScheduleError> {
        let mut seen_results = BTreeSet::new();
        for (index, instruction) in instructions.iter().enumerate() {
            for frame in instruction.frames() {
                if !frames.contains_key(frame) {
                    return Err(ScheduleError::UnknownFrame {
                        index,
                        frame: frame.clone(),
                    });
                }
            }
            if let PulseInstruction::Barrier { frames } = instruction {
                if frames.len() < 2 {
                    return Err(ScheduleError::BarrierTooNarrow { index });
                }
            }
            if let Some(result) = instruction.result() {
                if !seen_results.insert(result) {
                    return Err(ScheduleError::DuplicateResult { index, result });
                }
            }
        }
        Ok(Schedule {
            frames,
            instructions,
            timing: None,
        })
    }

    /// An empty schedule with no frames.
    pub fn empty() -> Self {
        Schedule {
            frames: BTreeMap::new(),
            instructions: Vec::new(),
            timing: None,
        }
    }

    pub fn frames(&self) -> &BTreeMap<FrameId, Frame> {
        &self.frames
    }

    pub fn frame(&self, id: &FrameId) -> Option<&Frame> {
        self.frames.get(id)
    }

    pub fn instructions(&self) -> &[PulseInstruction] {
        &self.instructions
    }

    pub fn timing(&self) -> Option<&[u64]> {
        self.timing.as_deref()
    }

    pub fn is_timed(&self) -> bool {
        self.timing.is_some()
    }

    /// Attach resolved start times. Only timing passes should call this.
    pub(crate) fn with_timing(mut self, starts: Vec<u64>) -> Self {
        debug_assert_eq!(starts.len(), self.instructions.len());
        self.timing = Some(starts);
        self
    }

    /// Update per-frame logical clocks. Only timing passes should call
    /// this; clocks never decrease across interpretation.
    pub(crate) fn set_elapsed(&mut self, elapsed: &BTreeMap<FrameId, u64>) {
        for (id, frame) in &mut self.frames {
            if let Some(&clock) = elapsed.get(id) {
                frame.elapsed_samples = frame.elapsed_samples.max(clock);
            }
        }
    }

    /// Same frames and instructions with timing removed.
    pub fn untimed(mut self) -> Self {
        self.timing = None;
        self
    }

    /// Replace the instruction list, revalidating and dropping timing.
    pub fn with_instructions(
        &self,
        instructions: Vec<PulseInstruction>,
    ) -> Result<Self, ScheduleError> {
        Schedule::new(self.frames.clone(), instructions)
    }

    /// Result indices written by this schedule, ascending.
    pub fn result_ids(&self) -> Vec<ResultId> {
        let set: BTreeSet<ResultId> = self
            .instructions
            .iter()
            .filter_map(|i| i.result())
            .collect();
        set.into_iter().collect()
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ScheduleError {
    #[error("instruction {index} references undeclared frame {frame}")]
    UnknownFrame { index: usize, frame: FrameId },
    #[error("barrier at instruction {index} must reference at least two frames")]
    BarrierTooNarrow { index: usize },
    #[error("result {result} written more than once (instruction {index})")]
    DuplicateResult { index: usize, result: ResultId },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::port::PortId;
    use num_complex::Complex64;

    fn frame(id: &str, port: &str) -> Frame {
        Frame::new(
            FrameId::new(id).unwrap(),
            PortId::new(port).unwrap(),
            0.0,
            0.0,
        )
        .unwrap()
    }

    fn frames(ids: &[(&str, &str)]) -> BTreeMap<FrameId, Frame> {
        ids.iter()
            .map(|(id, port)| (FrameId::new(*id).unwrap(), frame(id, port)))
            .collect()
    }

    #[test]
    fn rejects_undeclared_frame() {
        let err = Schedule::new(
            frames(&[("f0", "drive0")]),
            vec![PulseInstruction::Delay {
                frame: FrameId::new("f1").unwrap(),
                duration_samples: 8,
            }],
        )
        .unwrap_err();
        assert!(matches!(err, ScheduleError::UnknownFrame { index: 0, .. }));
    }

    #[test]
    fn rejects_narrow_barrier() {
        let err = Schedule::new(
            frames(&[("f0", "drive0")]),
            vec![PulseInstruction::Barrier {
                frames: [FrameId::new("f0").unwrap()].into_iter().collect(),
            }],
        )
        .unwrap_err();
        assert!(matches!(err, ScheduleError::BarrierTooNarrow { index: 0 }));
    }

    #[test]
    fn rejects_duplicate_results() {
        let err = Schedule::new(
            frames(&[("f0", "readout0")]),
            vec![
                PulseInstruction::Capture {
                    frame: FrameId::new("f0").unwrap(),
                    result: ResultId(0),
                },
                PulseInstruction::Measure {
                    site: SiteId(0),
                    result: ResultId(0),
                },
            ],
        )
        .unwrap_err();
        assert!(matches!(err, ScheduleError::DuplicateResult { .. }));
    }

    #[test]
    fn play_duration_tracks_waveform() {
        let w = Waveform::sampled(vec![Complex64::new(0.1, 0.0); 24]).unwrap();
        let play = PulseInstruction::Play {
            frame: FrameId::new("f0").unwrap(),
            waveform: w,
        };
        assert_eq!(play.duration_samples(), 24);
    }
}
