// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! Shared fixtures and independent oracles for the integration suites.
//!
//! Everything here is deliberately decoupled from the library's own
//! implementation paths: the timing oracle replays the clock rules with
//! its own bookkeeping, and the physics oracle integrates the Schrödinger
//! equation with a fine-step RK4 instead of matrix exponentials.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use pulsestack::driver::DeviceDescriptor;
use pulsestack::ir::{
    Frame, FrameId, PortId, PulseInstruction, ResultId, Schedule, SiteId, Waveform,
};
use pulsestack::pqir::PulseModule;

pub fn sim1q() -> DeviceDescriptor {
    DeviceDescriptor::from_json(include_str!("../../../../demo/devices/sim1q.json")).unwrap()
}

pub fn sim2q() -> DeviceDescriptor {
    DeviceDescriptor::from_json(include_str!("../../../../demo/devices/sim2q.json")).unwrap()
}

pub fn fid(s: &str) -> FrameId {
    FrameId::new(s).unwrap()
}

pub fn pid(s: &str) -> PortId {
    PortId::new(s).unwrap()
}

/// State fidelity |<a|b>|^2 for normalized two-level states.
pub fn fidelity(a: &[Complex64; 2], b: &[Complex64; 2]) -> f64 {
    (a[0].conj() * b[0] + a[1].conj() * b[1]).norm_sqr()
}

// ---------------------------------------------------------------------------
// Random schedules
// ---------------------------------------------------------------------------

/// A random multi-frame schedule for timing and canonicalization tests.
/// Frames `f0..f{num_frames-1}` are bound to synthetic ports; instruction
/// kinds cover the full set, with unique result indices.
pub fn random_schedule(rng: &mut StdRng, max_instructions: usize, max_frames: usize) -> Schedule {
    let num_frames = rng.gen_range(1..=max_frames);
    let mut frames = BTreeMap::new();
    for index in 0..num_frames {
        let id = fid(&format!("f{index}"));
        frames.insert(
            id.clone(),
            Frame::new(id, pid(&format!("p{index}")), 0.0, 0.0).unwrap(),
        );
    }
    let frame_ids: Vec<FrameId> = frames.keys().cloned().collect();

    let count = rng.gen_range(0..=max_instructions);
    let mut instructions = Vec::with_capacity(count);
    let mut next_result = 0u32;
    for _ in 0..count {
        let frame = frame_ids[rng.gen_range(0..frame_ids.len())].clone();
        let instruction = match rng.gen_range(0..9) {
            0..=1 => PulseInstruction::Play {
                frame,
                waveform: random_waveform(rng),
            },
            2..=3 => PulseInstruction::Delay {
                frame,
                duration_samples: rng.gen_range(1..=64),
            },
            4 => PulseInstruction::ShiftPhase {
                frame,
                delta_rad: rng.gen_range(-10.0..10.0),
            },
            5 => PulseInstruction::SetPhase {
                frame,
                phase_rad: rng.gen_range(0.0..std::f64::consts::TAU),
            },
            6 => PulseInstruction::ShiftFrequency {
                frame,
                delta_hz: rng.gen_range(-1e6..1e6),
            },
            7 if frame_ids.len() >= 2 => {
                let mut set = std::collections::BTreeSet::new();
                set.insert(frame);
                while set.len() < 2 || (set.len() < frame_ids.len() && rng.gen_bool(0.3)) {
                    set.insert(frame_ids[rng.gen_range(0..frame_ids.len())].clone());
                }
                PulseInstruction::Barrier { frames: set }
            }
            7 => PulseInstruction::SetFrequency {
                frame,
                frequency_hz: rng.gen_range(0.0..1e9),
            },
            _ => {
                let result = ResultId(next_result);
                next_result += 1;
                if rng.gen_bool(0.5) {
                    PulseInstruction::Capture { frame, result }
                } else {
                    PulseInstruction::Measure {
                        site: SiteId(rng.gen_range(0..4)),
                        result,
                    }
                }
            }
        };
        instructions.push(instruction);
    }
    Schedule::new(frames, instructions).unwrap()
}

pub fn random_waveform(rng: &mut StdRng) -> Waveform {
    if rng.gen_bool(0.7) {
        let length = rng.gen_range(1..=32);
        let samples: Vec<Complex64> = (0..length)
            .map(|_| {
                let magnitude = rng.gen_range(0.0..1.0);
                let angle = rng.gen_range(0.0..std::f64::consts::TAU);
                Complex64::from_polar(magnitude, angle)
            })
            .collect();
        Waveform::sampled(samples).unwrap()
    } else {
        Waveform::constant(
            rng.gen_range(1..=48),
            rng.gen_range(0.0..1.0),
            rng.gen_range(0.0..std::f64::consts::TAU),
        )
        .unwrap()
    }
}

/// Random single-site schedule on the sim1q drive frame, suitable for
/// simulation: bounded detunings, no measurements.
pub fn random_drive_schedule(rng: &mut StdRng, max_instructions: usize) -> Schedule {
    let id = fid("f_drive0");
    let qubit = 5.0e9;
    let mut frames = BTreeMap::new();
    frames.insert(
        id.clone(),
        Frame::new(id.clone(), pid("drive0"), qubit, 0.0).unwrap(),
    );
    let count = rng.gen_range(1..=max_instructions);
    let mut instructions = Vec::with_capacity(count);
    for _ in 0..count {
        let instruction = match rng.gen_range(0..8) {
            0..=2 => PulseInstruction::Play {
                frame: id.clone(),
                waveform: Waveform::constant(
                    rng.gen_range(8..=64),
                    rng.gen_range(0.0..0.5),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                )
                .unwrap(),
            },
            3..=4 => PulseInstruction::Delay {
                frame: id.clone(),
                duration_samples: rng.gen_range(1..=96),
            },
            5 => PulseInstruction::ShiftPhase {
                frame: id.clone(),
                delta_rad: rng.gen_range(-7.0..7.0),
            },
            6 => PulseInstruction::SetPhase {
                frame: id.clone(),
                phase_rad: rng.gen_range(0.0..std::f64::consts::TAU),
            },
            _ => PulseInstruction::ShiftFrequency {
                frame: id.clone(),
                delta_hz: rng.gen_range(-2.0e7..2.0e7),
            },
        };
        instructions.push(instruction);
    }
    Schedule::new(frames, instructions).unwrap()
}

/// Random canonical modules exercising the exchange-format surface.
pub fn random_module(rng: &mut StdRng) -> PulseModule {
    let device = sim2q(); // four ports: two drive, two readout
    let port_names = ["drive0", "drive1", "readout0", "readout1"];
    let num_frames = rng.gen_range(0..=4usize);
    let mut frames = BTreeMap::new();
    let mut frame_ids = Vec::new();
    for port in port_names.iter().take(num_frames) {
        let id = fid(&format!("f_{port}"));
        let frequency = if rng.gen_bool(0.5) {
            rng.gen_range(4.5e9..5.5e9)
        } else {
            0.0
        };
        let phase = if rng.gen_bool(0.5) {
            rng.gen_range(0.0..6.0)
        } else {
            0.0
        };
        frames.insert(
            id.clone(),
            Frame::new(id.clone(), pid(port), frequency, phase).unwrap(),
        );
        frame_ids.push(id);
    }

    let mut instructions = Vec::new();
    let mut next_result = 0u32;
    if !frame_ids.is_empty() {
        for _ in 0..rng.gen_range(0..12) {
            let frame = frame_ids[rng.gen_range(0..frame_ids.len())].clone();
            let readout = frame.as_str().contains("readout");
            let instruction = match rng.gen_range(0..10) {
                0..=2 => PulseInstruction::Play {
                    frame,
                    waveform: random_waveform(rng),
                },
                3 => PulseInstruction::Delay {
                    frame,
                    duration_samples: rng.gen_range(1..=128),
                },
                4 => PulseInstruction::ShiftPhase {
                    frame,
                    delta_rad: rng.gen_range(-8.0..8.0),
                },
                5 => PulseInstruction::SetPhase {
                    frame,
                    phase_rad: rng.gen_range(0.0..std::f64::consts::TAU),
                },
                6 => PulseInstruction::SetFrequency {
                    frame,
                    frequency_hz: rng.gen_range(4.5e9..5.5e9),
                },
                7 if frame_ids.len() >= 2 => {
                    let mut set = std::collections::BTreeSet::new();
                    set.insert(frame);
                    while set.len() < 2 {
                        set.insert(frame_ids[rng.gen_range(0..frame_ids.len())].clone());
                    }
                    PulseInstruction::Barrier { frames: set }
                }
                7 => PulseInstruction::ShiftFrequency {
                    frame,
                    delta_hz: rng.gen_range(-1e6..1e6),
                },
                8 if readout => {
                    let result = ResultId(next_result);
                    next_result += 1;
                    PulseInstruction::Capture { frame, result }
                }
                _ => {
                    let result = ResultId(next_result);
                    next_result += 1;
                    PulseInstruction::Measure {
                        site: SiteId(rng.gen_range(0..2)),
                        result,
                    }
                }
            };
            instructions.push(instruction);
        }
    }
    let schedule = Schedule::new(frames, instructions).unwrap();
    PulseModule::from_schedule(
        &schedule,
        &device,
        format!("m{}", rng.gen_range(0..1_000_000u32)),
        "main",
        if rng.gen_bool(0.5) { "labels_v1" } else { "" },
    )
    .unwrap()
}

// ---------------------------------------------------------------------------
// Independent timing oracle
// ---------------------------------------------------------------------------

/// Brute-force replay of the per-frame clock rules, coded independently of
/// the pass implementation: plays and delays advance their frame's clock,
/// zero-duration frame ops read it, barriers raise their frames to the
/// common maximum, and site-level measures read the global horizon.
pub fn oracle_timing(schedule: &Schedule) -> Vec<u64> {
    let mut clocks: HashMap<String, u64> = schedule
        .frames()
        .keys()
        .map(|id| (id.to_string(), 0))
        .collect();
    let mut starts = Vec::new();
    for instruction in schedule.instructions() {
        use PulseInstruction::*;
        let start = match instruction {
            Play { frame, waveform } => {
                let t = clocks[frame.as_str()];
                *clocks.get_mut(frame.as_str()).unwrap() = t + waveform.duration_samples();
                t
            }
            Delay {
                frame,
                duration_samples,
            } => {
                let t = clocks[frame.as_str()];
                *clocks.get_mut(frame.as_str()).unwrap() = t + duration_samples;
                t
            }
            ShiftPhase { frame, .. }
            | SetPhase { frame, .. }
            | ShiftFrequency { frame, .. }
            | SetFrequency { frame, .. }
            | Capture { frame, .. } => clocks[frame.as_str()],
            Barrier { frames } => {
                let mut horizon = 0;
                for frame in frames {
                    horizon = horizon.max(clocks[frame.as_str()]);
                }
                for frame in frames {
                    *clocks.get_mut(frame.as_str()).unwrap() = horizon;
                }
                horizon
            }
            Measure { .. } => clocks.values().copied().max().unwrap_or(0),
        };
        starts.push(start);
    }
    starts
}

// ---------------------------------------------------------------------------
// Independent physics oracle: fine-step RK4 integration
// ---------------------------------------------------------------------------

/// Integrate the single-site Schrödinger equation for a resolved drive
/// under `H/hbar = pi*(delta*sz + vx*sx + vy*sy)` using RK4 with
/// `substeps` steps per hardware sample. The envelope is held constant
/// over each sample, matching the schedule semantics.
pub struct Rk4Oracle {
    pub qubit_frequency_hz: f64,
    pub rabi_rate: f64,
    pub dt_s: f64,
    pub substeps: u32,
}

impl Rk4Oracle {
    /// Evolve |0> through a sequence of (frame_frequency, frame_phase,
    /// envelope sample) triples, one per hardware sample.
    pub fn evolve(&self, drive: &[(f64, f64, Complex64)]) -> [Complex64; 2] {
        let mut state = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let h = self.dt_s / self.substeps as f64;
        for &(frequency, phase, envelope) in drive {
            let delta = frequency - self.qubit_frequency_hz;
            let d = envelope * Complex64::from_polar(1.0, phase);
            let (vx, vy) = (self.rabi_rate * d.re, self.rabi_rate * d.im);
            for _ in 0..self.substeps {
                state = rk4_step(state, delta, vx, vy, h);
            }
        }
        state
    }
}

fn schrodinger_rhs(state: [Complex64; 2], delta: f64, vx: f64, vy: f64) -> [Complex64; 2] {
    // -i * pi * (delta*sz + vx*sx + vy*sy) |psi>
    let pi = std::f64::consts::PI;
    let m_i = Complex64::new(0.0, -pi);
    [
        m_i * (Complex64::new(delta, 0.0) * state[0] + Complex64::new(vx, -vy) * state[1]),
        m_i * (Complex64::new(vx, vy) * state[0] - Complex64::new(delta, 0.0) * state[1]),
    ]
}

fn rk4_step(state: [Complex64; 2], delta: f64, vx: f64, vy: f64, h: f64) -> [Complex64; 2] {
    let add = |a: [Complex64; 2], b: [Complex64; 2], scale: f64| {
        [a[0] + b[0] * scale, a[1] + b[1] * scale]
    };
    let k1 = schrodinger_rhs(state, delta, vx, vy);
    let k2 = schrodinger_rhs(add(state, k1, h / 2.0), delta, vx, vy);
    let k3 = schrodinger_rhs(add(state, k2, h / 2.0), delta, vx, vy);
    let k4 = schrodinger_rhs(add(state, k3, h), delta, vx, vy);
    [
        state[0] + (k1[0] + k2[0] * 2.0 + k3[0] * 2.0 + k4[0]) * (h / 6.0),
        state[1] + (k1[1] + k2[1] * 2.0 + k3[1] * 2.0 + k4[1]) * (h / 6.0),
    ]
}

/// Deterministic RNG for reproducible suites.
pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}
