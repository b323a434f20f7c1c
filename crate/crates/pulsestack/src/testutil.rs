// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! Shared fixtures for unit tests: the demo simulator devices.

use crate::driver::descriptor::DeviceDescriptor;

pub fn sim1q() -> DeviceDescriptor {
    DeviceDescriptor::from_json(include_str!("../../../demo/devices/sim1q.json"))
        .expect("demo sim1q descriptor is valid")
}

pub fn sim2q() -> DeviceDescriptor {
    DeviceDescriptor::from_json(include_str!("../../../demo/devices/sim2q.json"))
        .expect("demo sim2q descriptor is valid")
}

use crate::ir::{Frame, FrameId, PortId, PulseInstruction, ResultId, Schedule, SiteId, Waveform};
use crate::pqir::PulseModule;
use std::collections::BTreeMap;

/// A resonant constant pulse of the given rotation angle on site 0 of the
/// demo simulator, followed by a gate-level measurement, as `.pqir` text.
pub fn rotation_payload(angle_rad: f64) -> String {
    let device = sim1q();
    let id = FrameId::new("f_drive0").unwrap();
    let frame = Frame::new(id.clone(), PortId::new("drive0").unwrap(), 5.0e9, 0.0).unwrap();
    let mut frames = BTreeMap::new();
    frames.insert(id.clone(), frame);
    let duration = 64u64;
    let amp = angle_rad / (2.0 * std::f64::consts::PI * 5.0e7 * duration as f64 * 1e-9);
    let schedule = Schedule::new(
        frames,
        vec![
            PulseInstruction::Play {
                frame: id,
                waveform: Waveform::constant(duration, amp, 0.0).unwrap(),
            },
            PulseInstruction::Measure {
                site: SiteId(0),
                result: ResultId(0),
            },
        ],
    )
    .unwrap();
    let module = PulseModule::from_schedule(&schedule, &device, "job", "main", "").unwrap();
    crate::pqir::emit(&module).unwrap()
}
