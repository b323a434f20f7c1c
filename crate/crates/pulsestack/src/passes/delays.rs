// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! Delay canonicalization: fuse runs of delays on one frame.

use std::collections::HashMap;

use crate::ir::{FrameId, PulseInstruction, Schedule};

/// Fuse maximal runs of consecutive `delay`s on the same frame — with no
/// intervening instruction on that frame — into a single delay of the
/// summed duration. Instructions on other frames may sit between fused
/// delays; barriers touching the frame and site-level measures (which
/// synchronize against every frame) break a run. Timing of the output
/// resolves identically to the input.
pub fn merge_delays(schedule: &Schedule) -> Schedule {
    let mut output: Vec<PulseInstruction> = Vec::with_capacity(schedule.instructions().len());
    // Index in `output` of the last instruction touching each frame.
    let mut last_touch: HashMap<FrameId, usize> = HashMap::new();
    for instruction in schedule.instructions() {
        if let PulseInstruction::Delay {
            frame,
            duration_samples,
        } = instruction
        {
            if let Some(&slot) = last_touch.get(frame) {
                if let PulseInstruction::Delay {
                    duration_samples: merged,
                    ..
                } = &mut output[slot]
                {
                    *merged += duration_samples;
                    continue;
                }
            }
        }
        let index = output.len();
        if matches!(instruction, PulseInstruction::Measure { .. }) {
            // A bare measure synchronizes every frame.
            for id in schedule.frames().keys() {
                last_touch.insert(id.clone(), index);
            }
        } else {
            for frame in instruction.frames() {
                last_touch.insert(frame.clone(), index);
            }
        }
        output.push(instruction.clone());
    }
    schedule
        .with_instructions(output)
        .expect("merging delays preserves schedule validity")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{Frame, PortId, Waveform};
    use num_complex::Complex64;
    use std::collections::BTreeMap;

    fn fid(s: &str) -> FrameId {
        FrameId::new(s).unwrap()
    }

    fn frames(ids: &[&str]) -> BTreeMap<FrameId, Frame> {
        ids.iter()
            .map(|id| {
                (
                    fid(id),
                    Frame::new(fid(id), PortId::new("drive0").unwrap(), 0.0, 0.0).unwrap(),
                )
            })
            .collect()
    }

    fn delay(frame: &str, duration: u64) -> PulseInstruction {
        PulseInstruction::Delay {
            frame: fid(frame),
            duration_samples: duration,
        }
    }

    #[test]
    fn adjacent_delays_fuse() {
        let s = Schedule::new(frames(&["f0"]), vec![delay("f0", 4), delay("f0", 4)]).unwrap();
        let merged = merge_delays(&s);
        assert_eq!(merged.instructions(), &[delay("f0", 8)]);
    }

    #[test]
    fn play_breaks_the_run() {
        let w = Waveform::sampled(vec![Complex64::new(0.1, 0.0); 8]).unwrap();
        let play = PulseInstruction::Play {
            frame: fid("f0"),
            waveform: w,
        };
        let s = Schedule::new(
            frames(&["f0"]),
            vec![delay("f0", 4), play.clone(), delay("f0", 4)],
        )
        .unwrap();
        let merged = merge_delays(&s);
        assert_eq!(merged.instructions(), s.instructions());
    }

    #[test]
    fn different_frames_do_not_fuse() {
        let s = Schedule::new(frames(&["f0", "f1"]), vec![delay("f0", 4), delay("f1", 4)]).unwrap();
        let merged = merge_delays(&s);
        assert_eq!(merged.instructions(), s.instructions());
    }

    #[test]
    fn fuses_across_other_frames() {
        let s = Schedule::new(
            frames(&["f0", "f1"]),
            vec![delay("f0", 4), delay("f1", 2), delay("f0", 4)],
        )
        .unwrap();
        let merged = merge_delays(&s);
        assert_eq!(merged.instructions(), &[delay("f0", 8), delay("f1", 2)]);
    }
}
