// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! Reference device: time-resolved pulse execution on independent
//! two-level qubits with rotating-frame dynamics.
//!
//! Each site evolves under
//!
//! ```text
//! H(t)/hbar = pi * delta(t) * sigma_z
//!           + pi * omega * (Re d(t) * sigma_x + Im d(t) * sigma_y)
//! ```
//!
//! where `delta(t)` is the site's drive-frame frequency minus the qubit
//! frequency (Hz), `omega` is the Rabi rate per unit amplitude, and
//! `d(t) = a(t) * e^{i*phi}` combines the resolved envelope sample with
//! the frame phase. Per sample the exact 2x2 matrix exponential of the
//! held-constant Hamiltonian is applied, so evolution is unitary by
//! construction. Frame operations take effect instantaneously at their
//! start time; idle stretches evolve in closed form under the detuning
//! alone.
//!
//! There is no decoherence and no inter-site coupling; `t1_s`/`t2_s` in
//! descriptors are reported metadata only. Measurement (a `capture` or a
//! gate-level `measure`) projects the site at its start time and
//! terminates that site's dynamics; instructions touching a measured site
//! afterwards are rejected, so state evolution is shot-independent. This
//! Hamiltonian is a convention chosen for testability, not a model of any
//! particular hardware platform.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::driver::descriptor::DeviceDescriptor;
use crate::driver::Histogram;
use crate::ir::{FrameId, PortKind, PulseInstruction, ResultId, Schedule, SiteId};

/// Physical parameters of one simulated qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitModel {
    pub site: SiteId,
    pub qubit_frequency_hz: f64,
    /// Rabi rate in Hz per unit envelope amplitude; must be positive.
    pub rabi_rate_hz_per_unit_amplitude: f64,
}

impl QubitModel {
    pub fn validate(&self) -> Result<(), &'static str> {
        if !self.qubit_frequency_hz.is_finite() {
            return Err("qubit_frequency_hz must be finite");
        }
        if !(self.rabi_rate_hz_per_unit_amplitude > 0.0
            && self.rabi_rate_hz_per_unit_amplitude.is_finite())
        {
            return Err("rabi_rate_hz_per_unit_amplitude must be positive");
        }
        Ok(())
    }
}

/// Simulator bound to one device descriptor.
pub struct SimBackend {
    device: DeviceDescriptor,
    models: BTreeMap<SiteId, QubitModel>,
    dt_s: f64,
}

impl SimBackend {
    /// Build from a descriptor carrying a `"simulation"` section.
    pub fn for_device(device: &DeviceDescriptor) -> Result<Self, SimError> {
        let models = device
            .simulation
            .as_ref()
            .ok_or(SimError::NotSimulated)?
            .models
            .clone();
        Self::with_models(device, models)
    }

    /// Build with explicit qubit models (testing hook).
    pub fn with_models(
        device: &DeviceDescriptor,
        models: Vec<QubitModel>,
    ) -> Result<Self, SimError> {
        let mut dt = None;
        for port in &device.ports {
            match dt {
                None => dt = Some(port.constraints.sample_period_s),
                Some(existing) if existing == port.constraints.sample_period_s => {}
                Some(_) => return Err(SimError::MixedSamplePeriods),
            }
        }
        let dt_s = dt.ok_or(SimError::NoPorts)?;
        let mut map = BTreeMap::new();
        for model in models {
            model.validate().map_err(SimError::InvalidModel)?;
            if map.insert(model.site, model).is_some() {
                return Err(SimError::InvalidModel("duplicate qubit model site"));
            }
        }
        Ok(SimBackend {
            device: device.clone(),
            models: map,
            dt_s,
        })
    }

    pub fn dt_s(&self) -> f64 {
        self.dt_s
    }

    /// Execute a timed schedule and sample measurement outcomes.
    ///
    /// Bit positions follow result indices (index 0 leftmost); result
    /// indices nobody measured read as `0`. Identical inputs and seed give
    /// identical histograms.
    pub fn execute(
        &self,
        schedule: &Schedule,
        shots: u64,
        seed: u64,
    ) -> Result<Histogram, SimError> {
        let run = self.analyze(schedule)?;
        let mut probabilities: BTreeMap<ResultId, f64> = BTreeMap::new();
        for (site, state) in self.evolve_all(schedule, &run)? {
            if let Some(&result) = run.result_of_site.get(&site) {
                probabilities.insert(result, state[1].norm_sqr());
            }
        }
        let width = run
            .result_of_site
            .values()
            .map(|r| r.index() + 1)
            .max()
            .unwrap_or(0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for _ in 0..shots {
            let mut bits = String::with_capacity(width);
            for index in 0..width {
                let bit = match probabilities.get(&ResultId(index as u32)) {
                    Some(&p1) => rng.gen::<f64>() < p1,
                    None => false,
                };
                bits.push(if bit { '1' } else { '0' });
            }
            *counts.entry(bits).or_insert(0) += 1;
        }
        Ok(Histogram::from_counts(counts))
    }

    /// Exact per-site `<sigma_z>` without sampling, ordered by site id
    /// ascending over the simulated models.
    pub fn expectation_z(&self, schedule: &Schedule) -> Result<Vec<f64>, SimError> {
        let run = self.analyze(schedule)?;
        Ok(self
            .evolve_all(schedule, &run)?
            .into_iter()
            .map(|(_, state)| state[0].norm_sqr() - state[1].norm_sqr())
            .collect())
    }

    /// Final state vector per simulated site (site id ascending), taken at
    /// the site's projection time or the end of the schedule.
    pub fn final_states(
        &self,
        schedule: &Schedule,
    ) -> Result<Vec<(SiteId, [Complex64; 2])>, SimError> {
        let run = self.analyze(schedule)?;
        self.evolve_all(schedule, &run)
    }

    fn evolve_all(
        &self,
        schedule: &Schedule,
        run: &RunPlan,
    ) -> Result<Vec<(SiteId, [Complex64; 2])>, SimError> {
        let mut states = Vec::new();
        for (&site, model) in &self.models {
            let end = run
                .end_of_site
                .get(&site)
                .copied()
                .unwrap_or(run.global_end);
            let state = self.evolve_site(schedule, run, site, model, end)?;
            states.push((site, state));
        }
        Ok(states)
    }

    /// Static analysis: drive-frame binding, measurement map, and the
    /// no-instruction-after-measurement rule.
    fn analyze(&self, schedule: &Schedule) -> Result<RunPlan, SimError> {
        let timing = schedule.timing().ok_or(SimError::UntimedSchedule)?;

        // Frames must resolve to device ports, and touched sites to models.
        let mut drive_frame_of_site: BTreeMap<SiteId, FrameId> = BTreeMap::new();
        let mut sites_of_frame: BTreeMap<FrameId, Vec<SiteId>> = BTreeMap::new();
        let mut frame_port_kind: BTreeMap<FrameId, PortKind> = BTreeMap::new();
        for (id, frame) in schedule.frames() {
            let port = self
                .device
                .port(&frame.port)
                .ok_or_else(|| SimError::UnknownPort(frame.port.clone()))?;
            frame_port_kind.insert(id.clone(), port.kind);
            sites_of_frame.insert(id.clone(), port.sites.clone());
            if port.kind == PortKind::Drive {
                for &site in &port.sites {
                    if let Some(previous) = drive_frame_of_site.insert(site, id.clone()) {
                        if &previous != id {
                            return Err(SimError::MultipleDriveFrames { site });
                        }
                    }
                }
            }
        }

        let mut measured: BTreeMap<SiteId, u64> = BTreeMap::new();
        let mut result_of_site: BTreeMap<SiteId, ResultId> = BTreeMap::new();
        let mut global_end = 0u64;
        for (index, instruction) in schedule.instructions().iter().enumerate() {
            let start = timing[index];
            global_end = global_end.max(start + instruction.duration_samples());

            let mut touched: Vec<SiteId> = Vec::new();
            for frame in instruction.frames() {
                touched.extend(sites_of_frame.get(frame).into_iter().flatten().copied());
            }
            if let PulseInstruction::Measure { site, .. } = instruction {
                touched.push(*site);
            }
            for &site in &touched {
                if !self.models.contains_key(&site) {
                    return Err(SimError::UnknownSite(site));
                }
                if measured.contains_key(&site) {
                    return Err(SimError::PostMeasurementInstruction { index, site });
                }
            }

            match instruction {
                PulseInstruction::Capture { frame, result } => {
                    let kind = frame_port_kind[frame];
                    if !matches!(kind, PortKind::Readout | PortKind::Acquire) {
                        return Err(SimError::CaptureOnWrongPort { index, kind });
                    }
                    let sites = &sites_of_frame[frame];
                    if sites.len() != 1 {
                        return Err(SimError::AmbiguousCapture { index });
                    }
                    measured.insert(sites[0], start);
                    result_of_site.insert(sites[0], *result);
                }
                PulseInstruction::Measure { site, result } => {
                    measured.insert(*site, start);
                    result_of_site.insert(*site, *result);
                }
                _ => {}
            }
        }

        Ok(RunPlan {
            drive_frame_of_site,
            end_of_site: measured,
            result_of_site,
            global_end,
        })
    }

    fn evolve_site(
        &self,
        schedule: &Schedule,
        run: &RunPlan,
        site: SiteId,
        model: &QubitModel,
        end_sample: u64,
    ) -> Result<[Complex64; 2], SimError> {
        let mut state = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        let Some(drive_id) = run.drive_frame_of_site.get(&site) else {
            return Ok(state); // no drive channel: the site never evolves
        };
        let timing = schedule.timing().expect("checked in analyze");
        let initial = &schedule.frames()[drive_id];
        let mut frequency = initial.frequency_hz;
        let mut phase = initial.phase_rad;
        let omega = model.rabi_rate_hz_per_unit_amplitude;
        let mut cursor = 0u64;

        for (index, instruction) in schedule.instructions().iter().enumerate() {
            if !instruction.frames().contains(&drive_id) {
                continue;
            }
            let start = timing[index];
            if start >= end_sample {
                break;
            }
            if start > cursor {
                idle_evolve(
                    &mut state,
                    frequency - model.qubit_frequency_hz,
                    (start - cursor) as f64 * self.dt_s,
                );
                cursor = start;
            }
            match instruction {
                PulseInstruction::ShiftPhase { delta_rad, .. } => {
                    phase = crate::ir::normalize_phase(phase + delta_rad)
                        .map_err(|_| SimError::NonFiniteFrameState { index })?;
                }
                PulseInstruction::SetPhase { phase_rad, .. } => {
                    phase = crate::ir::normalize_phase(*phase_rad)
                        .map_err(|_| SimError::NonFiniteFrameState { index })?;
                }
                PulseInstruction::ShiftFrequency { delta_hz, .. } => {
                    frequency += delta_hz;
                }
                PulseInstruction::SetFrequency { frequency_hz, .. } => {
                    frequency = *frequency_hz;
                }
                PulseInstruction::Play { waveform, .. } => {
                    let samples = waveform
                        .resolve_samples()
                        .map_err(|e| SimError::Waveform { index, source: e })?;
                    let detuning = frequency - model.qubit_frequency_hz;
                    let carrier = Complex64::from_polar(1.0, phase);
                    let budget = (end_sample - start).min(samples.len() as u64) as usize;
                    for sample in &samples[..budget] {
                        let drive = sample * carrier;
                        drive_step(
                            &mut state,
                            detuning,
                            omega * drive.re,
                            omega * drive.im,
                            self.dt_s,
                        );
                    }
                    cursor = start + budget as u64;
                }
                // Delay and barrier only shape timing; idle evolution
                // between instructions already covers them.
                _ => {}
            }
        }
        if end_sample > cursor {
            idle_evolve(
                &mut state,
                frequency - model.qubit_frequency_hz,
                (end_sample - cursor) as f64 * self.dt_s,
            );
        }
        Ok(state)
    }
}

struct RunPlan {
    drive_frame_of_site: BTreeMap<SiteId, FrameId>,
    /// Projection sample per measured site.
    end_of_site: BTreeMap<SiteId, u64>,
    result_of_site: BTreeMap<SiteId, ResultId>,
    global_end: u64,
}

/// Closed-form evolution under `H = pi * detuning * sigma_z` for `t_s`
/// seconds.
fn idle_evolve(state: &mut [Complex64; 2], detuning_hz: f64, t_s: f64) {
    let angle = std::f64::consts::PI * detuning_hz * t_s;
    state[0] *= Complex64::from_polar(1.0, -angle);
    state[1] *= Complex64::from_polar(1.0, angle);
}

/// One exact step of `exp(-i * H * dt)` with
/// `H = pi*(vz*sigma_z + vx*sigma_x + vy*sigma_y)` held constant.
fn drive_step(state: &mut [Complex64; 2], vz: f64, vx: f64, vy: f64, dt_s: f64) {
    let magnitude = (vx * vx + vy * vy + vz * vz).sqrt();
    if magnitude == 0.0 {
        return;
    }
    let angle = std::f64::consts::PI * magnitude * dt_s;
    let (sin, cos) = angle.sin_cos();
    let (nx, ny, nz) = (vx / magnitude, vy / magnitude, vz / magnitude);
    let m_i_sin = Complex64::new(0.0, -sin);
    let u00 = Complex64::new(cos, -sin * nz);
    let u01 = m_i_sin * Complex64::new(nx, -ny);
    let u10 = m_i_sin * Complex64::new(nx, ny);
    let u11 = Complex64::new(cos, sin * nz);
    let next0 = u00 * state[0] + u01 * state[1];
    let next1 = u10 * state[0] + u11 * state[1];
    state[0] = next0;
    state[1] = next1;
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("schedule has no resolved timing")]
    UntimedSchedule,
    #[error("device descriptor has no simulation section")]
    NotSimulated,
    #[error("device has no ports to derive a sample period from")]
    NoPorts,
    #[error("ports disagree on sample_period_s")]
    MixedSamplePeriods,
    #[error("invalid qubit model: {0}")]
    InvalidModel(&'static str),
    #[error("schedule references port {0} not present on the device")]
    UnknownPort(crate::ir::PortId),
    #[error("no qubit model for site {0}")]
    UnknownSite(SiteId),
    #[error("instruction {index} touches site {site} after its measurement")]
    PostMeasurementInstruction { index: usize, site: SiteId },
    #[error("site {site} is driven by more than one frame")]
    MultipleDriveFrames { site: SiteId },
    #[error("capture at instruction {index} targets a {kind} port")]
    CaptureOnWrongPort { index: usize, kind: PortKind },
    #[error("capture at instruction {index} reads a multi-site port")]
    AmbiguousCapture { index: usize },
    #[error("instruction {index} produced a non-finite frame state")]
    NonFiniteFrameState { index: usize },
    #[error("waveform at instruction {index} failed to resolve: {source}")]
    Waveform {
        index: usize,
        source: crate::ir::WaveformError,
    },
}
