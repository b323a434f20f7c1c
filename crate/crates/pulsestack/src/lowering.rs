// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! Calibration-driven lowering of gate circuits to pulse schedules.
//!
//! Every gate or measurement expands to its calibration body, with frame
//! roles bound to the device's frames and gate parameters substituted. Two
//! rules ship built in:
//!
//! - `rz(theta)` on a site becomes `shift_phase(-theta)` on the site's
//!   drive frame (the virtual-Z convention used throughout this crate);
//! - `measure` becomes a play on the site's readout frame followed by a
//!   capture (on the acquire frame when the device has one, otherwise the
//!   readout frame). Devices without readout channels measure natively.
//!
//! Lowering emits no inter-gate barriers; ordering is per frame.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::calibration::{
    BodyInstruction, BodyWaveform, CalibrationEntry, CalibrationError, CalibrationRegistry,
    FrameRole, ParamValue, SiteSelector,
};
use crate::circuit::{Gate, GateCircuit};
use crate::driver::descriptor::DeviceDescriptor;
use crate::ir::{
    Frame, FrameError, FrameId, Port, PortKind, PulseInstruction, ResultId, Schedule,
    ScheduleError, SiteId, Template,
};

/// Registry with the two built-in lowering rules: virtual-Z for `rz` and
/// play-plus-capture for `measure`, synthesized against the device's
/// readout constraints.
pub fn builtin_calibrations(device: &DeviceDescriptor) -> CalibrationRegistry {
    let mut registry = CalibrationRegistry::new();

    let rz = CalibrationEntry {
        gate_name: "rz".to_string(),
        sites: SiteSelector::Any,
        params: vec!["theta".to_string()],
        body: vec![BodyInstruction::ShiftPhase {
            frame_role: FrameRole::Drive,
            delta_rad: ParamValue::negated_param("theta"),
        }],
    };
    registry.register(rz).expect("built-in rz entry is valid");

    let measure = CalibrationEntry {
        gate_name: "measure".to_string(),
        sites: SiteSelector::Any,
        params: vec![],
        body: builtin_measure_body(device),
    };
    registry
        .register(measure)
        .expect("built-in measure entry is valid");

    registry
}

fn builtin_measure_body(device: &DeviceDescriptor) -> Vec<BodyInstruction> {
    let readout_ports: Vec<&Port> = device.ports_of_kind(PortKind::Readout).collect();
    if readout_ports.is_empty() {
        // No readout channel: the device measures at the gate level.
        return vec![BodyInstruction::Measure];
    }
    let granularity = readout_ports
        .iter()
        .map(|p| p.constraints.granularity_samples)
        .fold(1, lcm);
    let min_duration = readout_ports
        .iter()
        .map(|p| p.constraints.min_duration_samples)
        .max()
        .unwrap_or(granularity);
    let duration = round_up(min_duration, granularity);
    let amp = 0.5
        * readout_ports
            .iter()
            .map(|p| p.constraints.max_amplitude)
            .fold(1.0, f64::min);
    let capture_role = if device.has_port_kind(PortKind::Acquire) {
        FrameRole::Acquire
    } else {
        FrameRole::Readout
    };
    let mut params = BTreeMap::new();
    params.insert("amp".to_string(), ParamValue::literal(amp));
    params.insert("phase".to_string(), ParamValue::literal(0.0));
    vec![
        BodyInstruction::Play {
            frame_role: FrameRole::Readout,
            waveform: BodyWaveform::Parametric {
                template: Template::Constant,
                duration_samples: duration,
                params,
            },
        },
        BodyInstruction::Capture {
            frame_role: capture_role,
        },
    ]
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn round_up(value: u64, multiple: u64) -> u64 {
    value.div_ceil(multiple) * multiple
}

/// The frame id lowering assigns for a port (and, on shared drive ports,
/// a site).
pub fn frame_id_for(port: &Port, site: Option<SiteId>) -> FrameId {
    let token = match (port.kind, site) {
        (PortKind::Drive, Some(site)) if port.sites.len() > 1 => {
            format!("f_{}_s{}", port.id, site)
        }
        _ => format!("f_{}", port.id),
    };
    FrameId::new(token).expect("derived frame ids are non-empty")
}

/// Build the device's frame map: one drive frame per site on its drive
/// port, plus one frame per readout, acquire, and coupler port.
pub fn device_frames(device: &DeviceDescriptor) -> Result<BTreeMap<FrameId, Frame>, LowerError> {
    let mut frames = BTreeMap::new();
    for site_index in 0..device.num_sites {
        let site = SiteId(site_index);
        if let Some(port) = device.port_of_kind(PortKind::Drive, site) {
            let id = frame_id_for(port, Some(site));
            let frequency = device
                .site_info(site)
                .and_then(|info| info.drive_frequency_hz)
                .unwrap_or(0.0);
            let frame = Frame::new(id.clone(), port.id.clone(), frequency, 0.0)?;
            frames.insert(id, frame);
        }
    }
    for port in &device.ports {
        if port.kind == PortKind::Drive {
            continue;
        }
        let id = frame_id_for(port, None);
        let frame = Frame::new(id.clone(), port.id.clone(), 0.0, 0.0)?;
        frames.insert(id, frame);
    }
    Ok(frames)
}

/// Lower a gate circuit into a pulse schedule using the given calibration
/// registry against the target device.
pub fn lower(
    circuit: &GateCircuit,
    registry: &CalibrationRegistry,
    device: &DeviceDescriptor,
) -> Result<Schedule, LowerError> {
    if circuit.num_sites() > device.num_sites {
        return Err(LowerError::CircuitTooWide {
            circuit_sites: circuit.num_sites(),
            device_sites: device.num_sites,
        });
    }
    let frames = device_frames(device)?;
    let mut instructions = Vec::new();
    for gate in circuit.gates() {
        let sites = [gate.site()];
        let entry =
            registry
                .lookup(gate.name(), &sites)
                .ok_or_else(|| LowerError::MissingCalibration {
                    gate_name: gate.name().to_string(),
                    sites: sites.to_vec(),
                })?;
        instantiate_body(entry, gate, device, &frames, &mut instructions)?;
    }
    Ok(Schedule::new(frames, instructions)?)
}

fn instantiate_body(
    entry: &CalibrationEntry,
    gate: &Gate,
    device: &DeviceDescriptor,
    frames: &BTreeMap<FrameId, Frame>,
    out: &mut Vec<PulseInstruction>,
) -> Result<(), LowerError> {
    let site = gate.site();
    let bindings = gate_bindings(gate);
    let resolve = |role: FrameRole| resolve_role(role, site, device, frames);
    for instruction in &entry.body {
        let lowered = match instruction {
            BodyInstruction::Play {
                frame_role,
                waveform,
            } => PulseInstruction::Play {
                frame: resolve(*frame_role)?,
                waveform: waveform.instantiate(&bindings)?,
            },
            BodyInstruction::ShiftPhase {
                frame_role,
                delta_rad,
            } => PulseInstruction::ShiftPhase {
                frame: resolve(*frame_role)?,
                delta_rad: delta_rad.eval(&bindings)?,
            },
            BodyInstruction::SetPhase {
                frame_role,
                phase_rad,
            } => PulseInstruction::SetPhase {
                frame: resolve(*frame_role)?,
                phase_rad: phase_rad.eval(&bindings)?,
            },
            BodyInstruction::ShiftFrequency {
                frame_role,
                delta_hz,
            } => PulseInstruction::ShiftFrequency {
                frame: resolve(*frame_role)?,
                delta_hz: delta_hz.eval(&bindings)?,
            },
            BodyInstruction::SetFrequency {
                frame_role,
                frequency_hz,
            } => PulseInstruction::SetFrequency {
                frame: resolve(*frame_role)?,
                frequency_hz: frequency_hz.eval(&bindings)?,
            },
            BodyInstruction::Delay {
                frame_role,
                duration_samples,
            } => PulseInstruction::Delay {
                frame: resolve(*frame_role)?,
                duration_samples: *duration_samples,
            },
            BodyInstruction::Barrier { frame_roles } => {
                let mut resolved = std::collections::BTreeSet::new();
                for role in frame_roles {
                    resolved.insert(resolve(*role)?);
                }
                if resolved.len() < 2 {
                    return Err(LowerError::InvalidCalibrationBody(format!(
                        "barrier in calibration for {:?} resolves to fewer than two frames",
                        entry.gate_name
                    )));
                }
                PulseInstruction::Barrier { frames: resolved }
            }
            BodyInstruction::Capture { frame_role } => PulseInstruction::Capture {
                frame: resolve(*frame_role)?,
                result: gate_result(gate, entry)?,
            },
            BodyInstruction::Measure => PulseInstruction::Measure {
                site,
                result: gate_result(gate, entry)?,
            },
        };
        out.push(lowered);
    }
    Ok(())
}

fn gate_bindings(gate: &Gate) -> BTreeMap<String, f64> {
    let mut bindings = BTreeMap::new();
    if let Gate::Rz { theta_rad, .. } = gate {
        bindings.insert("theta".to_string(), *theta_rad);
    }
    bindings
}

fn gate_result(gate: &Gate, entry: &CalibrationEntry) -> Result<ResultId, LowerError> {
    match gate {
        Gate::Measure { result, .. } => Ok(*result),
        _ => Err(LowerError::InvalidCalibrationBody(format!(
            "calibration for {:?} writes a result but gate {:?} has none",
            entry.gate_name,
            gate.name()
        ))),
    }
}

fn resolve_role(
    role: FrameRole,
    site: SiteId,
    device: &DeviceDescriptor,
    frames: &BTreeMap<FrameId, Frame>,
) -> Result<FrameId, LowerError> {
    let kind = match role {
        FrameRole::Drive => PortKind::Drive,
        FrameRole::Readout => PortKind::Readout,
        FrameRole::Acquire => PortKind::Acquire,
        FrameRole::Coupler => PortKind::Coupler,
    };
    let port = device
        .port_of_kind(kind, site)
        .ok_or(LowerError::UnboundFrameRole { role, site })?;
    let id = frame_id_for(port, Some(site));
    if frames.contains_key(&id) {
        Ok(id)
    } else {
        Err(LowerError::UnboundFrameRole { role, site })
    }
}

#[derive(Debug, Error)]
pub enum LowerError {
    #[error("no calibration registered for {gate_name} on sites {sites:?}")]
    MissingCalibration {
        gate_name: String,
        sites: Vec<SiteId>,
    },
    #[error("frame role {role} cannot be resolved on site {site}")]
    UnboundFrameRole { role: FrameRole, site: SiteId },
    #[error("circuit spans {circuit_sites} sites but device has {device_sites}")]
    CircuitTooWide {
        circuit_sites: u32,
        device_sites: u32,
    },
    #[error("invalid calibration body: {0}")]
    InvalidCalibrationBody(String),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

/// Validate that every frame role used by `entry` resolves on the target
/// device for the entry's declared sites (or, for wildcards, on at least
/// one device site).
pub fn validate_entry_roles(
    entry: &CalibrationEntry,
    device: &DeviceDescriptor,
) -> Result<(), LowerError> {
    let frames = device_frames(device)?;
    let candidate_sites: Vec<SiteId> = match &entry.sites {
        SiteSelector::Sites(sites) => sites.clone(),
        SiteSelector::Any => (0..device.num_sites).map(SiteId).collect(),
    };
    for role in entry.roles() {
        let mut resolved_somewhere = false;
        for &site in &candidate_sites {
            if resolve_role(role, site, device, &frames).is_ok() {
                resolved_somewhere = true;
            } else if matches!(entry.sites, SiteSelector::Sites(_)) {
                return Err(LowerError::UnboundFrameRole { role, site });
            }
        }
        if !resolved_somewhere {
            return Err(LowerError::UnboundFrameRole {
                role,
                site: candidate_sites.first().copied().unwrap_or(SiteId(0)),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::driver::descriptor::{PulseSupport, SiteInfo};
    use crate::ir::PortConstraints;
    use std::f64::consts::PI;

    fn constraints() -> PortConstraints {
        PortConstraints {
            sample_period_s: 1e-9,
            granularity_samples: 8,
            min_duration_samples: 16,
            max_amplitude: 1.0,
            frequency_range_hz: (4.0e9, 6.0e9),
        }
    }

    fn port(id: &str, kind: PortKind, sites: &[u32]) -> Port {
        Port {
            id: crate::ir::PortId::new(id).unwrap(),
            kind,
            sites: sites.iter().copied().map(SiteId).collect(),
            constraints: constraints(),
        }
    }

    pub(crate) fn one_site_device() -> DeviceDescriptor {
        DeviceDescriptor {
            name: "dev".into(),
            num_sites: 1,
            pulse_support: PulseSupport::PortLevel,
            ports: vec![
                port("drive0", PortKind::Drive, &[0]),
                port("readout0", PortKind::Readout, &[0]),
            ],
            operations: vec!["x".into(), "rz".into(), "measure".into()],
            supported_formats: vec![],
            sites: vec![SiteInfo {
                site: SiteId(0),
                t1_s: None,
                t2_s: None,
                drive_frequency_hz: Some(5.0e9),
            }],
            default_calibrations: CalibrationRegistry::new(),
            simulation: None,
        }
    }

    fn x_calibration() -> CalibrationEntry {
        let mut params = BTreeMap::new();
        params.insert("amp".to_string(), ParamValue::literal(0.5));
        params.insert("phase".to_string(), ParamValue::literal(0.0));
        params.insert("sigma_samples".to_string(), ParamValue::literal(8.0));
        CalibrationEntry {
            gate_name: "x".to_string(),
            sites: SiteSelector::Any,
            params: vec![],
            body: vec![BodyInstruction::Play {
                frame_role: FrameRole::Drive,
                waveform: BodyWaveform::Parametric {
                    template: Template::Gaussian,
                    duration_samples: 32,
                    params,
                },
            }],
        }
    }

    #[test]
    fn builtin_registry_has_two_rules() {
        let device = one_site_device();
        let registry = builtin_calibrations(&device);
        assert_eq!(registry.len(), 2);
        assert!(registry.lookup("rz", &[SiteId(0)]).is_some());
        assert!(registry.lookup("measure", &[SiteId(0)]).is_some());
        assert!(registry.lookup("x", &[SiteId(0)]).is_none());
    }

    #[test]
    fn x_and_measure_expand_to_play_play_capture() {
        let device = one_site_device();
        let mut registry = builtin_calibrations(&device);
        registry.register(x_calibration()).unwrap();
        let circuit = GateCircuit::new(
            1,
            vec![
                Gate::X { site: SiteId(0) },
                Gate::Measure {
                    site: SiteId(0),
                    result: ResultId(0),
                },
            ],
        )
        .unwrap();
        let schedule = lower(&circuit, &registry, &device).unwrap();
        let ops: Vec<&str> = schedule
            .instructions()
            .iter()
            .map(|i| i.op_name())
            .collect();
        assert_eq!(ops, ["play", "play", "capture"]);
        // X plays on the drive frame, readout on the readout frame.
        let drive = FrameId::new("f_drive0").unwrap();
        let readout = FrameId::new("f_readout0").unwrap();
        assert_eq!(schedule.instructions()[0].frames(), vec![&drive]);
        assert_eq!(schedule.instructions()[1].frames(), vec![&readout]);
        assert_eq!(schedule.instructions()[2].frames(), vec![&readout]);
        // Drive frame is initialized at the site's calibrated frequency.
        assert_eq!(schedule.frame(&drive).unwrap().frequency_hz, 5.0e9);
    }

    #[test]
    fn rz_lowers_to_exact_negated_shift() {
        let device = one_site_device();
        let registry = builtin_calibrations(&device);
        let theta = PI / 2.0;
        let circuit = GateCircuit::new(
            1,
            vec![Gate::Rz {
                site: SiteId(0),
                theta_rad: theta,
            }],
        )
        .unwrap();
        let schedule = lower(&circuit, &registry, &device).unwrap();
        assert_eq!(schedule.instructions().len(), 1);
        match &schedule.instructions()[0] {
            PulseInstruction::ShiftPhase { delta_rad, .. } => assert_eq!(*delta_rad, -theta),
            other => panic!("expected shift_phase, got {other:?}"),
        }
    }

    #[test]
    fn missing_calibration_reported() {
        let device = one_site_device();
        let registry = builtin_calibrations(&device);
        let circuit = GateCircuit::new(1, vec![Gate::X { site: SiteId(0) }]).unwrap();
        let err = lower(&circuit, &registry, &device).unwrap_err();
        assert!(matches!(err, LowerError::MissingCalibration { .. }));
    }

    #[test]
    fn site_specific_only_calibration_misses_other_sites() {
        let mut device = one_site_device();
        device.num_sites = 2;
        device.ports.push(port("drive1", PortKind::Drive, &[1]));
        let mut registry = builtin_calibrations(&device);
        let mut entry = x_calibration();
        entry.sites = SiteSelector::Sites(vec![SiteId(0)]);
        registry.register(entry).unwrap();
        let circuit = GateCircuit::new(2, vec![Gate::X { site: SiteId(1) }]).unwrap();
        assert!(matches!(
            lower(&circuit, &registry, &device).unwrap_err(),
            LowerError::MissingCalibration { .. }
        ));
    }

    #[test]
    fn coupler_role_unresolvable_without_coupler_port() {
        let device = one_site_device();
        let entry = CalibrationEntry {
            gate_name: "x".to_string(),
            sites: SiteSelector::Sites(vec![SiteId(0)]),
            params: vec![],
            body: vec![BodyInstruction::Delay {
                frame_role: FrameRole::Coupler,
                duration_samples: 8,
            }],
        };
        assert!(matches!(
            validate_entry_roles(&entry, &device),
            Err(LowerError::UnboundFrameRole {
                role: FrameRole::Coupler,
                ..
            })
        ));
    }

    #[test]
    fn coupler_ports_are_representable() {
        // Coupler channels exist in the IR and resolve as a frame role,
        // even though the simulator has no entangling dynamics.
        let mut device = one_site_device();
        device.num_sites = 2;
        device.ports.push(port("drive1", PortKind::Drive, &[1]));
        device
            .ports
            .push(port("coupler01", PortKind::Coupler, &[0, 1]));
        device.validate().unwrap();

        let frames = device_frames(&device).unwrap();
        let coupler_frame = FrameId::new("f_coupler01").unwrap();
        assert!(frames.contains_key(&coupler_frame));

        let entry = CalibrationEntry {
            gate_name: "x".to_string(),
            sites: SiteSelector::Sites(vec![SiteId(0)]),
            params: vec![],
            body: vec![BodyInstruction::Delay {
                frame_role: FrameRole::Coupler,
                duration_samples: 16,
            }],
        };
        validate_entry_roles(&entry, &device).unwrap();

        let mut registry = builtin_calibrations(&device);
        registry.register(entry).unwrap();
        let circuit = GateCircuit::new(2, vec![Gate::X { site: SiteId(0) }]).unwrap();
        let schedule = lower(&circuit, &registry, &device).unwrap();
        assert_eq!(
            schedule.instructions(),
            &[PulseInstruction::Delay {
                frame: coupler_frame,
                duration_samples: 16,
            }]
        );
    }

    #[test]
    fn lowering_is_compositional() {
        let device = one_site_device();
        let mut registry = builtin_calibrations(&device);
        registry.register(x_calibration()).unwrap();
        let c1 = GateCircuit::new(1, vec![Gate::X { site: SiteId(0) }]).unwrap();
        let c2 = GateCircuit::new(
            1,
            vec![
                Gate::Rz {
                    site: SiteId(0),
                    theta_rad: 0.3,
                },
                Gate::Measure {
                    site: SiteId(0),
                    result: ResultId(0),
                },
            ],
        )
        .unwrap();
        let mut combined_gates = c1.gates().to_vec();
        combined_gates.extend(c2.gates().to_vec());
        let combined = GateCircuit::new(1, combined_gates).unwrap();

        let s1 = lower(&c1, &registry, &device).unwrap();
        let s2 = lower(&c2, &registry, &device).unwrap();
        let s12 = lower(&combined, &registry, &device).unwrap();
        let mut concatenated = s1.instructions().to_vec();
        concatenated.extend(s2.instructions().to_vec());
        assert_eq!(s12.instructions(), concatenated.as_slice());
    }

    #[test]
    fn lowered_frames_all_come_from_device() {
        let device = one_site_device();
        let mut registry = builtin_calibrations(&device);
        registry.register(x_calibration()).unwrap();
        let circuit = GateCircuit::new(
            1,
            vec![
                Gate::X { site: SiteId(0) },
                Gate::Measure {
                    site: SiteId(0),
                    result: ResultId(0),
                },
            ],
        )
        .unwrap();
        let schedule = lower(&circuit, &registry, &device).unwrap();
        for instruction in schedule.instructions() {
            for frame in instruction.frames() {
                assert!(schedule.frames().contains_key(frame));
            }
        }
    }
}
