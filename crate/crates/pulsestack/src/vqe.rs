// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! Closed-loop pulse optimization demo.
//!
//! Instead of optimizing gate angles, the demo optimizes the raw pulse
//! parameters (amplitude, duration, phase) of a single constant drive on
//! one simulated qubit, minimizing `<sigma_z>` as reported by the
//! noiseless expectation path of the simulator. The optimizer is a
//! derivative-free coordinate descent with per-coordinate step shrinking;
//! every candidate stays inside the drive port's published constraints, so
//! the loop only ever evaluates hardware-legal pulses.
//!
//! The global optimum is the pi pulse (energy -1); the default
//! configuration reaches `<sigma_z> <= -0.99` well inside 200 iterations.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::driver::descriptor::DeviceDescriptor;
use crate::ir::{Frame, FrameId, PortKind, PulseInstruction, Schedule, SiteId, Waveform};
use crate::passes::resolve_timing;
use crate::sim::{SimBackend, SimError};

/// Variational parameters of the constant drive pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrivePulseParams {
    pub amp: f64,
    pub duration_samples: u64,
    pub phase_rad: f64,
}

#[derive(Debug, Clone)]
pub struct VqeConfig {
    pub site: SiteId,
    /// Coordinate-descent iterations (one coordinate probe per iteration).
    pub iterations: u32,
    pub seed: u64,
}

impl Default for VqeConfig {
    fn default() -> Self {
        VqeConfig {
            site: SiteId(0),
            iterations: 200,
            seed: 0,
        }
    }
}

/// Energy trace of one run. `trace[k]` is the energy after iteration
/// `k+1`; `initial_energy` corresponds to iteration 0.
#[derive(Debug, Clone)]
pub struct VqeOutcome {
    pub initial_energy: f64,
    pub trace: Vec<f64>,
    pub final_params: DrivePulseParams,
    pub final_energy: f64,
}

/// Run the demo, reporting `(iteration, energy, params)` through
/// `observer`: once with iteration 0 for the starting point, then after
/// every iteration.
pub fn run_with(
    device: &DeviceDescriptor,
    config: &VqeConfig,
    mut observer: impl FnMut(u32, f64, &DrivePulseParams),
) -> Result<VqeOutcome, VqeError> {
    let backend = SimBackend::for_device(device).map_err(|_| VqeError::NotASimulator)?;
    let site = config.site;
    let port = device
        .port_of_kind(PortKind::Drive, site)
        .ok_or(VqeError::NoDrivePort(site))?;
    let constraints = port.constraints.clone();
    let frequency = device
        .site_info(site)
        .and_then(|info| info.drive_frequency_hz)
        .or_else(|| {
            device
                .simulation
                .as_ref()
                .and_then(|sim| sim.models.iter().find(|m| m.site == site))
                .map(|m| m.qubit_frequency_hz)
        })
        .ok_or(VqeError::NoDriveFrequency(site))?;
    let site_slot = device
        .simulation
        .as_ref()
        .ok_or(VqeError::NotASimulator)?
        .models
        .iter()
        .position(|m| m.site == site)
        .ok_or(VqeError::NoModel(site))?;

    let frame_id = FrameId::new("vqe_drive").expect("static frame id");
    let energy_of = |params: &DrivePulseParams| -> Result<f64, VqeError> {
        let frame = Frame::new(frame_id.clone(), port.id.clone(), frequency, 0.0)
            .expect("finite frame state");
        let mut frames = std::collections::BTreeMap::new();
        frames.insert(frame_id.clone(), frame);
        let schedule = Schedule::new(
            frames,
            vec![PulseInstruction::Play {
                frame: frame_id.clone(),
                waveform: Waveform::constant(params.duration_samples, params.amp, params.phase_rad)
                    .map_err(|e| VqeError::Pulse(e.to_string()))?,
            }],
        )
        .expect("single-play schedule is valid");
        let timed = resolve_timing(&schedule);
        Ok(backend.expectation_z(&timed)?[site_slot])
    };

    // Deterministic seeded starting point inside the legal region.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let granularity = constraints.granularity_samples;
    let max_duration =
        (constraints.min_duration_samples.max(granularity * 512)).min(granularity * 1024);
    let mut params = DrivePulseParams {
        amp: (0.05 + 0.15 * rng.gen::<f64>()) * constraints.max_amplitude,
        duration_samples: constraints
            .min_duration_samples
            .max(granularity * (4 + rng.gen_range(0..8))),
        phase_rad: rng.gen::<f64>() * std::f64::consts::TAU,
    };
    let mut energy = energy_of(&params)?;
    let initial_energy = energy;
    observer(0, energy, &params);

    let mut amp_step = 0.08 * constraints.max_amplitude;
    let mut duration_step = 4 * granularity;
    let mut phase_step = 0.4f64;
    let mut trace = Vec::with_capacity(config.iterations as usize);

    for iteration in 1..=config.iterations {
        let coordinate = (iteration - 1) % 3;
        let mut candidates: Vec<DrivePulseParams> = Vec::with_capacity(2);
        match coordinate {
            0 => {
                for sign in [-1.0, 1.0] {
                    let amp = (params.amp + sign * amp_step).clamp(0.0, constraints.max_amplitude);
                    candidates.push(DrivePulseParams { amp, ..params });
                }
            }
            1 => {
                let down = params
                    .duration_samples
                    .saturating_sub(duration_step)
                    .max(constraints.min_duration_samples);
                let up = (params.duration_samples + duration_step).min(max_duration);
                for duration_samples in [down, up] {
                    candidates.push(DrivePulseParams {
                        duration_samples,
                        ..params
                    });
                }
            }
            _ => {
                for sign in [-1.0, 1.0] {
                    let phase_rad =
                        crate::ir::normalize_phase(params.phase_rad + sign * phase_step)
                            .expect("finite phase");
                    candidates.push(DrivePulseParams {
                        phase_rad,
                        ..params
                    });
                }
            }
        }

        let mut best = None;
        for candidate in candidates {
            if candidate == params {
                continue;
            }
            let value = energy_of(&candidate)?;
            if best
                .map(|(_, best_value): (DrivePulseParams, f64)| value < best_value)
                .unwrap_or(true)
            {
                best = Some((candidate, value));
            }
        }
        match best {
            Some((candidate, value)) if value < energy => {
                params = candidate;
                energy = value;
            }
            _ => match coordinate {
                0 => amp_step = (amp_step * 0.5).max(1e-6),
                1 => duration_step = (duration_step / 2).max(granularity),
                _ => phase_step = (phase_step * 0.5).max(0.01),
            },
        }
        observer(iteration, energy, &params);
        trace.push(energy);
    }

    Ok(VqeOutcome {
        initial_energy,
        trace,
        final_params: params,
        final_energy: energy,
    })
}

/// [`run_with`] without an observer.
pub fn run(device: &DeviceDescriptor, config: &VqeConfig) -> Result<VqeOutcome, VqeError> {
    run_with(device, config, |_, _, _| {})
}

#[derive(Debug, Error)]
pub enum VqeError {
    #[error("device is not a simulator (no simulation section)")]
    NotASimulator,
    #[error("site {0} has no drive port")]
    NoDrivePort(SiteId),
    #[error("site {0} has no drive frequency or qubit model to derive one")]
    NoDriveFrequency(SiteId),
    #[error("site {0} has no qubit model")]
    NoModel(SiteId),
    #[error("invalid pulse parameters: {0}")]
    Pulse(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}
