// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! Frame-change folding: fuse adjacent phase/frequency updates.

use std::collections::HashMap;

use crate::ir::{normalize_phase, FrameId, PulseInstruction, Schedule};

/// Fold consecutive frame-state updates on one frame:
///
/// - `shift_phase + shift_phase` becomes one shift with the summed delta
///   (normalized to `[0, 2*pi)`, which is observationally identical);
/// - `set_phase + shift_phase` becomes one `set_phase`;
/// - the same two rules apply to frequency updates (без normalization).
///
/// "Consecutive" is per frame: any other instruction touching the frame —
/// a play, delay, capture, barrier, or an op of the other category —
/// breaks the run, so the observable frame state at every play and
/// capture is unchanged. Site-level measures synchronize every frame and
/// break all runs.
pub fn fold_phase(schedule: &Schedule) -> Schedule {
    let mut output: Vec<PulseInstruction> = Vec::with_capacity(schedule.instructions().len());
    // Index in `output` of the last instruction touching each frame.
    let mut last_touch: HashMap<FrameId, usize> = HashMap::new();

    for instruction in schedule.instructions() {
        if let Some(frame) = foldable_frame(instruction) {
            if let Some(&slot) = last_touch.get(frame) {
                if let Some(fused) = fuse(&output[slot], instruction) {
                    output[slot] = fused;
                    continue;
                }
            }
        }
        let index = output.len();
        if matches!(instruction, PulseInstruction::Measure { .. }) {
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
        .expect("folding frame changes preserves schedule validity")
}

fn foldable_frame(instruction: &PulseInstruction) -> Option<&FrameId> {
    use PulseInstruction::*;
    match instruction {
        ShiftPhase { frame, .. } | ShiftFrequency { frame, .. } => Some(frame),
        _ => None,
    }
}

fn fuse(previous: &PulseInstruction, current: &PulseInstruction) -> Option<PulseInstruction> {
    use PulseInstruction::*;
    match (previous, current) {
        (
            ShiftPhase {
                frame,
                delta_rad: a,
            },
            ShiftPhase { delta_rad: b, .. },
        ) => Some(ShiftPhase {
            frame: frame.clone(),
            delta_rad: normalize_phase(a + b).ok()?,
        }),
        (
            SetPhase {
                frame,
                phase_rad: a,
            },
            ShiftPhase { delta_rad: b, .. },
        ) => Some(SetPhase {
            frame: frame.clone(),
            phase_rad: normalize_phase(a + b).ok()?,
        }),
        (ShiftFrequency { frame, delta_hz: a }, ShiftFrequency { delta_hz: b, .. }) => {
            Some(ShiftFrequency {
                frame: frame.clone(),
                delta_hz: a + b,
            })
        }
        (
            SetFrequency {
                frame,
                frequency_hz: a,
            },
            ShiftFrequency { delta_hz: b, .. },
        ) => Some(SetFrequency {
            frame: frame.clone(),
            frequency_hz: a + b,
        }),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{Frame, PortId, Waveform};
    use num_complex::Complex64;
    use std::collections::BTreeMap;
    use std::f64::consts::PI;

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

    fn shift(frame: &str, delta: f64) -> PulseInstruction {
        PulseInstruction::ShiftPhase {
            frame: fid(frame),
            delta_rad: delta,
        }
    }

    #[test]
    fn consecutive_shifts_sum() {
        let s = Schedule::new(
            frames(&["f0"]),
            vec![shift("f0", PI / 2.0), shift("f0", PI / 2.0)],
        )
        .unwrap();
        let folded = fold_phase(&s);
        assert_eq!(folded.instructions(), &[shift("f0", PI)]);
    }

    #[test]
    fn set_absorbs_following_shift() {
        let s = Schedule::new(
            frames(&["f0"]),
            vec![
                PulseInstruction::SetPhase {
                    frame: fid("f0"),
                    phase_rad: 0.1,
                },
                shift("f0", 0.2),
            ],
        )
        .unwrap();
        let folded = fold_phase(&s);
        assert_eq!(folded.instructions().len(), 1);
        match &folded.instructions()[0] {
            PulseInstruction::SetPhase { phase_rad, .. } => {
                assert!((phase_rad - 0.3).abs() < 1e-15)
            }
            other => panic!("expected set_phase, got {other:?}"),
        }
    }

    #[test]
    fn play_blocks_folding() {
        let w = Waveform::sampled(vec![Complex64::new(0.1, 0.0); 8]).unwrap();
        let play = PulseInstruction::Play {
            frame: fid("f0"),
            waveform: w,
        };
        let s = Schedule::new(
            frames(&["f0"]),
            vec![shift("f0", PI), play.clone(), shift("f0", PI)],
        )
        .unwrap();
        let folded = fold_phase(&s);
        assert_eq!(folded.instructions(), s.instructions());
    }

    #[test]
    fn frequency_ops_fold_independently() {
        let s = Schedule::new(
            frames(&["f0"]),
            vec![
                PulseInstruction::SetFrequency {
                    frame: fid("f0"),
                    frequency_hz: 5.0e9,
                },
                PulseInstruction::ShiftFrequency {
                    frame: fid("f0"),
                    delta_hz: 1.0e6,
                },
            ],
        )
        .unwrap();
        let folded = fold_phase(&s);
        assert_eq!(
            folded.instructions(),
            &[PulseInstruction::SetFrequency {
                frame: fid("f0"),
                frequency_hz: 5.0e9 + 1.0e6,
            }]
        );
    }

    #[test]
    fn idempotent_on_mixed_runs() {
        let s = Schedule::new(
            frames(&["f0", "f1"]),
            vec![
                shift("f0", 0.3),
                shift("f1", 0.1),
                shift("f0", 0.4),
                shift("f1", 0.2),
            ],
        )
        .unwrap();
        let once = fold_phase(&s);
        let twice = fold_phase(&once);
        assert_eq!(once.instructions(), twice.instructions());
        assert_eq!(once.instructions().len(), 2);
    }
}
