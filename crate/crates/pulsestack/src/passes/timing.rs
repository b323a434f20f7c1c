// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! ASAP timing resolution over per-frame logical clocks.

use std::collections::BTreeMap;

use crate::ir::{FrameId, PulseInstruction, Schedule};

/// Assign a start sample to every instruction, as-soon-as-possible:
///
/// - each frame carries a clock, initially 0;
/// - `play` and `delay` start at their frame's clock and advance it by
///   their duration;
/// - phase/frequency ops and `capture` start at their frame's clock and
///   take zero time (virtual operations are free);
/// - `barrier` raises the clocks of all its frames to their maximum;
/// - a site-level `measure` synchronizes against every frame (its port
///   binding is unknown without a device): it starts at the global
///   horizon and advances nothing.
///
/// The output schedule's frames carry their final clock in
/// `elapsed_samples`.
pub fn resolve_timing(schedule: &Schedule) -> Schedule {
    let mut clocks: BTreeMap<&FrameId, u64> =
        schedule.frames().keys().map(|id| (id, 0u64)).collect();
    let mut starts = Vec::with_capacity(schedule.instructions().len());
    for instruction in schedule.instructions() {
        let start = match instruction {
            PulseInstruction::Barrier { frames } => {
                let horizon = frames.iter().map(|f| clocks[f]).max().unwrap_or(0);
                for frame in frames {
                    clocks.insert(frame, horizon);
                }
                horizon
            }
            PulseInstruction::Measure { .. } => clocks.values().copied().max().unwrap_or(0),
            other => {
                let frame = other.frames()[0];
                let start = clocks[frame];
                clocks.insert(frame, start + other.duration_samples());
                start
            }
        };
        starts.push(start);
    }
    let elapsed: BTreeMap<FrameId, u64> = clocks
        .into_iter()
        .map(|(id, clock)| (id.clone(), clock))
        .collect();
    let mut timed = schedule.clone().untimed();
    timed.set_elapsed(&elapsed);
    timed.with_timing(starts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{Frame, PortId, ResultId, SiteId, Waveform};
    use num_complex::Complex64;
    use std::collections::BTreeMap as Map;

    fn fid(s: &str) -> FrameId {
        FrameId::new(s).unwrap()
    }

    fn frames(ids: &[&str]) -> Map<FrameId, Frame> {
        ids.iter()
            .map(|id| {
                (
                    fid(id),
                    Frame::new(fid(id), PortId::new("drive0").unwrap(), 0.0, 0.0).unwrap(),
                )
            })
            .collect()
    }

    fn play(frame: &str, duration: usize) -> PulseInstruction {
        PulseInstruction::Play {
            frame: fid(frame),
            waveform: Waveform::sampled(vec![Complex64::new(0.1, 0.0); duration]).unwrap(),
        }
    }

    #[test]
    fn sequential_same_frame() {
        let s = Schedule::new(frames(&["f0"]), vec![play("f0", 16), play("f0", 8)]).unwrap();
        let timed = resolve_timing(&s);
        assert_eq!(timed.timing().unwrap(), &[0, 16]);
    }

    #[test]
    fn barrier_synchronizes_clocks() {
        let s = Schedule::new(
            frames(&["f0", "f1"]),
            vec![
                play("f0", 16),
                play("f1", 8),
                PulseInstruction::Barrier {
                    frames: [fid("f0"), fid("f1")].into_iter().collect(),
                },
                play("f1", 4),
            ],
        )
        .unwrap();
        let timed = resolve_timing(&s);
        assert_eq!(timed.timing().unwrap(), &[0, 0, 16, 16]);
    }

    #[test]
    fn zero_duration_ops_do_not_advance() {
        let s = Schedule::new(
            frames(&["f0"]),
            vec![PulseInstruction::ShiftPhase {
                frame: fid("f0"),
                delta_rad: std::f64::consts::PI,
            }],
        )
        .unwrap();
        let timed = resolve_timing(&s);
        assert_eq!(timed.timing().unwrap(), &[0]);
    }

    #[test]
    fn final_clocks_land_in_elapsed_samples() {
        let s = Schedule::new(
            frames(&["f0", "f1"]),
            vec![play("f0", 16), play("f0", 8), play("f1", 4)],
        )
        .unwrap();
        let timed = resolve_timing(&s);
        assert_eq!(timed.frames()[&fid("f0")].elapsed_samples, 24);
        assert_eq!(timed.frames()[&fid("f1")].elapsed_samples, 4);
    }

    #[test]
    fn measure_starts_at_global_horizon() {
        let s = Schedule::new(
            frames(&["f0", "f1"]),
            vec![
                play("f0", 24),
                PulseInstruction::Measure {
                    site: SiteId(0),
                    result: ResultId(0),
                },
            ],
        )
        .unwrap();
        let timed = resolve_timing(&s);
        assert_eq!(timed.timing().unwrap(), &[0, 24]);
    }
}
