// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite: one test per release criterion, each printing a
//! single pass line (run with `--nocapture` to see them). Tolerances are
//! pinned here, not configurable.

mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use common::*;
use num_complex::Complex64;
use pulsestack::calibration::CalibrationRegistry;
use pulsestack::circuit::GateCircuit;
use pulsestack::driver::{Driver, JobFormat, JobStatus};
use pulsestack::ir::{
    Frame, Port, PortConstraints, PortKind, PulseInstruction, ResultId, Schedule, SiteId, Waveform,
};
use pulsestack::lowering::{builtin_calibrations, lower};
use pulsestack::passes::{fold_phase, legalize, merge_delays, resolve_timing, LegalizeMode};
use pulsestack::pqir::{self, PulseModule};
use pulsestack::sim::SimBackend;
use pulsestack::vqe;
use rand::Rng;

fn pass(criterion: u32, details: impl std::fmt::Display) {
    println!("criterion {criterion}: PASS - {details}");
}

/// 1. Exchange round-trip: 100 randomized valid modules satisfy
///    parse(emit(m)) == m, and emission is byte-deterministic. < 5 s.
#[test]
fn criterion_1_exchange_round_trip() {
    let started = Instant::now();
    for seed in 0..100u64 {
        let module = random_module(&mut rng(seed));
        let text = pqir::emit(&module).unwrap();
        assert_eq!(
            pqir::emit(&module).unwrap(),
            text,
            "seed {seed}: emission not deterministic"
        );
        let parsed = pqir::parse(&text).unwrap();
        assert_eq!(parsed.module, module, "seed {seed}: round trip mismatch");
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    pass(1, format_args!("100 modules round-tripped in {elapsed:?}"));
}

/// 2. Wire-format conformance: compiling the shipped X+measure example
///    produces exactly the five canonical intrinsic names and the pulse
///    profile attributes, with the port count matching usage.
#[test]
fn criterion_2_conformance_of_shipped_example() {
    let device = sim1q();
    let circuit =
        GateCircuit::from_json(include_str!("../../../demo/circuits/x_measure.json")).unwrap();
    let mut registry = builtin_calibrations(&device);
    registry
        .absorb(
            CalibrationRegistry::from_json(include_str!("../../../demo/calibrations/sim1q.json"))
                .unwrap(),
        )
        .unwrap();
    let schedule = lower(&circuit, &registry, &device).unwrap();
    let (schedule, diagnostics) = legalize(&schedule, &device, LegalizeMode::Strict);
    assert!(!diagnostics.has_errors(), "{diagnostics}");
    let module = PulseModule::from_schedule(&schedule, &device, "x_measure", "main", "").unwrap();
    let text = pqir::emit(&module).unwrap();

    let all_intrinsics = [
        "__quantum__pulse__waveform__body",
        "__quantum__pulse__waveform_play__body",
        "__quantum__pulse__frame_change__body",
        "__quantum__pulse__delay__body",
        "__quantum__pulse__shift_phase__body",
        "__quantum__pulse__set_phase__body",
        "__quantum__pulse__shift_frequency__body",
        "__quantum__pulse__set_frequency__body",
        "__quantum__pulse__barrier__body",
        "__quantum__pulse__capture__body",
        "__quantum__qis__mz__body",
    ];
    let expected = [
        "__quantum__pulse__waveform__body",
        "__quantum__pulse__waveform_play__body",
        "__quantum__pulse__frame_change__body",
        "__quantum__pulse__delay__body",
        "__quantum__qis__mz__body",
    ];
    let called: Vec<&str> = all_intrinsics
        .iter()
        .copied()
        .filter(|name| {
            text.contains(&format!("call void @{name}("))
                || text.contains(&format!("call %Waveform* @{name}("))
        })
        .collect();
    assert_eq!(called, expected, "intrinsics called in the module");
    assert!(text.contains("\"qir_profiles\"=\"pulse\""));
    assert!(text.contains("\"entry_point\""));
    assert!(text.contains("\"required_num_ports\"=\"1\""));
    assert_eq!(module.used_port_handles().len(), 1);
    pass(
        2,
        "shipped X+measure module uses exactly the five canonical intrinsics",
    );
}

/// 3. Timing oracle: 500 random schedules (<= 100 instructions, <= 6
///    frames) match an independent brute-force clock replay exactly.
///    < 10 s.
#[test]
fn criterion_3_timing_oracle() {
    let started = Instant::now();
    for seed in 0..500u64 {
        let schedule = random_schedule(&mut rng(1_000 + seed), 100, 6);
        let timed = resolve_timing(&schedule);
        assert_eq!(
            timed.timing().unwrap(),
            oracle_timing(&schedule).as_slice(),
            "seed {seed}"
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    pass(
        3,
        format_args!("500 schedules matched the clock replay in {elapsed:?}"),
    );
}

/// 4. Pass soundness: merge_delays and fold_phase preserve simulated
///    final-state fidelity >= 1 - 1e-9 on 100 random single-qubit
///    schedules, and both passes are idempotent.
#[test]
fn criterion_4_pass_soundness() {
    let device = sim1q();
    let backend = SimBackend::for_device(&device).unwrap();
    for seed in 0..100u64 {
        let schedule = random_drive_schedule(&mut rng(2_000 + seed), 24);
        let reference = backend.final_states(&resolve_timing(&schedule)).unwrap()[0].1;
        for (name, transformed) in [
            ("merge_delays", merge_delays(&schedule)),
            ("fold_phase", fold_phase(&schedule)),
            ("both", fold_phase(&merge_delays(&schedule))),
        ] {
            let state = backend.final_states(&resolve_timing(&transformed)).unwrap()[0].1;
            let fidelity = fidelity(&reference, &state);
            assert!(
                fidelity >= 1.0 - 1e-9,
                "seed {seed}, pass {name}: fidelity {fidelity}"
            );
        }
        let merged = merge_delays(&schedule);
        assert_eq!(merged.instructions(), merge_delays(&merged).instructions());
        let folded = fold_phase(&schedule);
        assert_eq!(folded.instructions(), fold_phase(&folded).instructions());
    }
    pass(
        4,
        "100 schedules preserved fidelity >= 1 - 1e-9 under both passes",
    );
}

/// 5. Physics oracle: a resonant pi pulse measures 1 with frequency of
///    at least 0.999 at 1e5 shots; a pi/2 pulse gives <sigma_z> = 0
///    within 1e-6; a detuned pulse matches a 100x finer RK4 integrator
///    within 1e-6.
#[test]
fn criterion_5_physics_oracle() {
    let device = sim1q();
    let backend = SimBackend::for_device(&device).unwrap();
    let rabi = 5.0e7;
    let qubit = 5.0e9;
    let dt = 1e-9;
    let duration = 64u64;
    let amp_for = |angle: f64| angle / (2.0 * PI * rabi * duration as f64 * dt);

    let drive_schedule = |amp: f64, prelude: Vec<PulseInstruction>, measured: bool| {
        let id = fid("f_drive0");
        let mut frames = BTreeMap::new();
        frames.insert(
            id.clone(),
            Frame::new(id.clone(), pid("drive0"), qubit, 0.0).unwrap(),
        );
        let mut instructions = prelude;
        instructions.push(PulseInstruction::Play {
            frame: id.clone(),
            waveform: Waveform::constant(duration, amp, 0.0).unwrap(),
        });
        if measured {
            instructions.push(PulseInstruction::Measure {
                site: SiteId(0),
                result: ResultId(0),
            });
        }
        resolve_timing(&Schedule::new(frames, instructions).unwrap())
    };

    // Resonant pi pulse at 1e5 shots.
    let histogram = backend
        .execute(&drive_schedule(amp_for(PI), vec![], true), 100_000, 11)
        .unwrap();
    let ones = histogram.get("1") as f64 / 100_000.0;
    assert!(ones >= 0.999, "measured-1 frequency {ones}");

    // pi/2 pulse expectation.
    let z = backend
        .expectation_z(&drive_schedule(amp_for(PI / 2.0), vec![], false))
        .unwrap()[0];
    assert!(z.abs() <= 1e-6, "<sigma_z> after pi/2: {z}");

    // Detuned drive versus the fine-step integrator.
    let amp = amp_for(PI);
    let delta = rabi * amp;
    let schedule = drive_schedule(
        amp,
        vec![PulseInstruction::SetFrequency {
            frame: fid("f_drive0"),
            frequency_hz: qubit + delta,
        }],
        false,
    );
    let simulated = backend.expectation_z(&schedule).unwrap()[0];
    let oracle = Rk4Oracle {
        qubit_frequency_hz: qubit,
        rabi_rate: rabi,
        dt_s: dt,
        substeps: 100,
    };
    let drive: Vec<(f64, f64, Complex64)> = (0..duration)
        .map(|_| (qubit + delta, 0.0, Complex64::new(amp, 0.0)))
        .collect();
    let state = oracle.evolve(&drive);
    let expected = state[0].norm_sqr() - state[1].norm_sqr();
    assert!(
        (simulated - expected).abs() <= 1e-6,
        "detuned: simulated {simulated} vs integrator {expected}"
    );
    pass(
        5,
        format_args!(
            "pi pulse 1-frequency {ones}, pi/2 z {z:.2e}, detuned gap {:.2e}",
            (simulated - expected).abs()
        ),
    );
}

/// 6. Virtual-Z: shift_phase(phi) followed by an X pulse matches the 2x2
///    matrix-product oracle with fidelity >= 1 - 1e-9 for 20 random phi.
#[test]
fn criterion_6_virtual_z() {
    let device = sim1q();
    let backend = SimBackend::for_device(&device).unwrap();
    let rabi = 5.0e7;
    let qubit = 5.0e9;
    let duration = 64u64;
    let amp = PI / (2.0 * PI * rabi * duration as f64 * 1e-9);

    let mut generator = rng(42);
    for case in 0..20 {
        let phi: f64 = generator.gen_range(0.0..std::f64::consts::TAU);
        let id = fid("f_drive0");
        let mut frames = BTreeMap::new();
        frames.insert(
            id.clone(),
            Frame::new(id.clone(), pid("drive0"), qubit, 0.0).unwrap(),
        );
        let schedule = Schedule::new(
            frames,
            vec![
                PulseInstruction::ShiftPhase {
                    frame: id.clone(),
                    delta_rad: phi,
                },
                PulseInstruction::Play {
                    frame: id,
                    waveform: Waveform::constant(duration, amp, 0.0).unwrap(),
                },
            ],
        )
        .unwrap();
        let state = backend.final_states(&resolve_timing(&schedule)).unwrap()[0].1;

        // Oracle: Rz(phi) * Rx(pi) * Rz(-phi) applied to |0> as an
        // explicit complex 2x2 product.
        let rz = |angle: f64| {
            [
                [
                    Complex64::from_polar(1.0, -angle / 2.0),
                    Complex64::new(0.0, 0.0),
                ],
                [
                    Complex64::new(0.0, 0.0),
                    Complex64::from_polar(1.0, angle / 2.0),
                ],
            ]
        };
        let rx = |angle: f64| {
            let c = Complex64::new((angle / 2.0).cos(), 0.0);
            let s = Complex64::new(0.0, -(angle / 2.0).sin());
            [[c, s], [s, c]]
        };
        let product = matmul(rz(phi), matmul(rx(PI), rz(-phi)));
        let expected = [product[0][0], product[1][0]]; // first column = U|0>
        let fidelity = fidelity(&expected, &state);
        assert!(
            fidelity >= 1.0 - 1e-9,
            "case {case} (phi = {phi}): fidelity {fidelity}"
        );
    }
    pass(6, "20 random phase shifts matched the matrix oracle");
}

fn matmul(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for row in 0..2 {
        for col in 0..2 {
            out[row][col] = a[row][0] * b[0][col] + a[row][1] * b[1][col];
        }
    }
    out
}

/// 7. Legalization: pad output always passes strict mode; a 12-sample
///    waveform at granularity 8 pads to 16; amplitude and frequency
///    violations always produce error diagnostics.
#[test]
fn criterion_7_legalization() {
    // The pinned example first.
    let device = single_port_device(8, 16, 1.0, (4.5e9, 5.5e9));
    let schedule = play_schedule(12, 0.5, 5.0e9);
    let (padded, diagnostics) = legalize(&schedule, &device, LegalizeMode::Pad);
    assert!(!diagnostics.has_errors());
    assert_eq!(padded.instructions()[0].duration_samples(), 16);
    let (_, strict) = legalize(&padded, &device, LegalizeMode::Strict);
    assert!(!strict.has_errors());

    // Property over random constraints and schedules.
    let mut generator = rng(7_000);
    for case in 0..300 {
        let granularity = generator.gen_range(1..=16u64);
        let min_duration = granularity * generator.gen_range(1..=4u64);
        let max_amplitude: f64 = generator.gen_range(0.1..1.0);
        let lo = generator.gen_range(1.0e9..5.0e9);
        let hi = lo + generator.gen_range(0.0..2.0e9);
        let device = single_port_device(granularity, min_duration, max_amplitude, (lo, hi));

        let amp: f64 = generator.gen_range(0.0..1.0);
        let duration = generator.gen_range(1..=96u64);
        let frequency = generator.gen_range(1.0e9..7.0e9);
        let schedule = play_schedule_with_set_frequency(duration, amp, lo, frequency);

        let amplitude_violation = amp > max_amplitude + 1e-12;
        let frequency_violation = !(lo..=hi).contains(&frequency);

        for mode in [LegalizeMode::Strict, LegalizeMode::Pad] {
            let (output, diagnostics) = legalize(&schedule, &device, mode);
            if amplitude_violation || frequency_violation {
                assert!(
                    diagnostics.has_errors(),
                    "case {case} ({mode:?}): violation not reported"
                );
            }
            if mode == LegalizeMode::Pad && !amplitude_violation && !frequency_violation {
                let (_, strict) = legalize(&output, &device, LegalizeMode::Strict);
                assert!(
                    !strict.has_errors(),
                    "case {case}: pad output not strict-clean"
                );
                let (again, repeat) = legalize(&output, &device, LegalizeMode::Pad);
                assert_eq!(again, output, "case {case}: pad not idempotent");
                assert!(repeat.is_empty());
            }
        }
    }
    pass(
        7,
        "pad output strict-clean over 300 random constraint sets; violations always reported",
    );
}

fn single_port_device(
    granularity: u64,
    min_duration: u64,
    max_amplitude: f64,
    frequency_range_hz: (f64, f64),
) -> pulsestack::driver::DeviceDescriptor {
    let mut device = sim1q();
    device.ports = vec![Port {
        id: pid("drive0"),
        kind: PortKind::Drive,
        sites: vec![SiteId(0)],
        constraints: PortConstraints {
            sample_period_s: 1e-9,
            granularity_samples: granularity,
            min_duration_samples: min_duration,
            max_amplitude,
            frequency_range_hz,
        },
    }];
    device
}

fn play_schedule(duration: u64, amp: f64, frequency: f64) -> Schedule {
    let id = fid("f0");
    let mut frames = BTreeMap::new();
    frames.insert(
        id.clone(),
        Frame::new(id.clone(), pid("drive0"), frequency, 0.0).unwrap(),
    );
    Schedule::new(
        frames,
        vec![PulseInstruction::Play {
            frame: id,
            waveform: Waveform::constant(duration, amp, 0.0).unwrap(),
        }],
    )
    .unwrap()
}

fn play_schedule_with_set_frequency(
    duration: u64,
    amp: f64,
    initial_frequency: f64,
    set_frequency: f64,
) -> Schedule {
    let id = fid("f0");
    let mut frames = BTreeMap::new();
    frames.insert(
        id.clone(),
        Frame::new(id.clone(), pid("drive0"), initial_frequency, 0.0).unwrap(),
    );
    Schedule::new(
        frames,
        vec![
            PulseInstruction::SetFrequency {
                frame: id.clone(),
                frequency_hz: set_frequency,
            },
            PulseInstruction::Play {
                frame: id,
                waveform: Waveform::constant(duration, amp, 0.0).unwrap(),
            },
        ],
    )
    .unwrap()
}

/// 8. Driver lifecycle: per-device FIFO completion under 8 concurrent
///    submitters, histograms summing to shots, and status transitions
///    respecting the relation, over 1000 randomized jobs.
#[test]
fn criterion_8_driver_lifecycle() {
    let driver = Driver::with_devices(vec![sim1q(), sim2q()]).unwrap();
    let payload = {
        // Small pi/2 job valid on both devices (port 0 is a drive port
        // covering site 0 in each).
        let id = fid("f_drive0");
        let mut frames = BTreeMap::new();
        frames.insert(
            id.clone(),
            Frame::new(id.clone(), pid("drive0"), 5.0e9, 0.0).unwrap(),
        );
        let amp = 0.5 / (2.0 * 5.0e7 * 64.0 * 1e-9);
        let schedule = Schedule::new(
            frames,
            vec![
                PulseInstruction::Play {
                    frame: id,
                    waveform: Waveform::constant(64, amp, 0.0).unwrap(),
                },
                PulseInstruction::Measure {
                    site: SiteId(0),
                    result: ResultId(0),
                },
            ],
        )
        .unwrap();
        let module = PulseModule::from_schedule(&schedule, &sim1q(), "job", "main", "").unwrap();
        pqir::emit(&module).unwrap()
    };

    let violations = AtomicU64::new(0);
    let completed = AtomicU64::new(0);
    let all_jobs: std::sync::Mutex<Vec<pulsestack::driver::JobHandle>> =
        std::sync::Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for thread_index in 0..8u64 {
            let driver = &driver;
            let payload = &payload;
            let violations = &violations;
            let completed = &completed;
            let all_jobs = &all_jobs;
            scope.spawn(move || {
                let mut generator = rng(9_000 + thread_index);
                let session = driver.open_session();
                let devices = driver.list_devices(session).unwrap();
                for job_index in 0..125u64 {
                    let (device, _) = devices[generator.gen_range(0..devices.len())];
                    let shots = generator.gen_range(1..=64u64);
                    let job = driver
                        .submit_job(
                            session,
                            device,
                            JobFormat::PqirPulse,
                            payload,
                            shots,
                            thread_index * 1_000 + job_index,
                        )
                        .unwrap();
                    all_jobs.lock().unwrap().push(job);
                    if generator.gen_bool(0.1) {
                        driver.job_cancel(job).unwrap();
                    }
                    // Observe the status a few times; the sequence must
                    // never step backwards through the transition ranks.
                    let rank = |status: JobStatus| match status {
                        JobStatus::Queued => 0,
                        JobStatus::Running => 1,
                        JobStatus::Done | JobStatus::Failed | JobStatus::Cancelled => 2,
                    };
                    let mut previous = None;
                    for _ in 0..4 {
                        let status = driver.job_status(job).unwrap();
                        if let Some(previous) = previous {
                            if rank(status) < rank(previous)
                                || (rank(previous) == 2 && status != previous)
                            {
                                violations.fetch_add(1, Ordering::Relaxed);
                            }
                        }
                        previous = Some(status);
                    }
                    match driver.job_result(job) {
                        Ok(histogram) => {
                            if histogram.total() != shots {
                                violations.fetch_add(1, Ordering::Relaxed);
                            }
                            completed.fetch_add(1, Ordering::Relaxed);
                        }
                        Err(pulsestack::driver::DriverError::JobCancelled) => {}
                        Err(e) => panic!("unexpected job failure: {e}"),
                    }
                }
            });
        }
    });
    assert_eq!(violations.load(Ordering::Relaxed), 0);
    assert!(completed.load(Ordering::Relaxed) > 0);

    // Per-device FIFO: completed jobs finish in submission order.
    let mut by_device: BTreeMap<u64, Vec<(u64, u64)>> = BTreeMap::new();
    for job in all_jobs.lock().unwrap().iter() {
        let info = driver.job_info(*job).unwrap();
        if let Some(finish) = info.finish_seq {
            by_device
                .entry(info.device.raw())
                .or_default()
                .push((info.submit_seq, finish));
        }
    }
    for (device, mut pairs) in by_device {
        pairs.sort_unstable();
        for window in pairs.windows(2) {
            assert!(
                window[0].1 < window[1].1,
                "device {device}: completion out of submission order"
            );
        }
    }
    pass(
        8,
        format_args!(
            "1000 randomized jobs: FIFO per device, histograms sum to shots, {} completed",
            completed.load(Ordering::Relaxed)
        ),
    );
}

/// 9. Pulse-level variational demo: final <sigma_z> <= -0.99 within 200
///    iterations, deterministic per seed, < 60 s.
#[test]
fn criterion_9_vqe_demo() {
    let started = Instant::now();
    let device = sim1q();
    let config = vqe::VqeConfig::default();
    let first = vqe::run(&device, &config).unwrap();
    assert!(
        first.final_energy <= -0.99,
        "final energy {}",
        first.final_energy
    );
    assert!(first.trace.len() <= 200);
    let second = vqe::run(&device, &config).unwrap();
    assert_eq!(first.trace, second.trace, "trace not deterministic");
    assert_eq!(first.final_params, second.final_params);
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    pass(
        9,
        format_args!(
            "final energy {:.6} in {} iterations, deterministic, {elapsed:?}",
            first.final_energy,
            first.trace.len()
        ),
    );
}
