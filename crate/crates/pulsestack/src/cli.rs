// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! The `pulsestack` command-line front end.
//!
//! Subcommands: `query` (device capabilities), `compile` (circuit JSON to
//! `.pqir`), `validate` (check a `.pqir` file), `run` (submit to a device
//! and print the histogram), and `vqe-demo` (closed-loop pulse
//! optimization on the simulator).
//!
//! Devices come from `--devices` (path-separator-joined descriptor
//! files), else the `PULSESTACK_DEVICES` environment variable, else the
//! built-in `sim1q` simulator. Exit codes: 0 on success, 1 on diagnostics
//! or execution errors, 2 on usage errors.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::calibration::CalibrationRegistry;
use crate::circuit::GateCircuit;
use crate::driver::{DeviceDescriptor, DeviceHandle, Driver, JobFormat, PropertyKey, QueryScope};
use crate::lowering::lower;
use crate::passes::{resolve_timing, LegalizeMode, PipelineConfig};
use crate::pqir::{self, PulseModule};
use crate::vqe;

/// Descriptor of the built-in single-qubit simulator, registered when no
/// device files are configured.
pub const BUILTIN_SIM1Q: &str = include_str!("../../../demo/devices/sim1q.json");

#[derive(Debug, Parser)]
#[command(
    name = "pulsestack",
    version,
    about = "Pulse-level compilation and execution toolkit",
    max_term_width = 100
)]
pub struct Cli {
    /// Path-separator-joined device descriptor files (overrides the
    /// PULSESTACK_DEVICES environment variable).
    #[arg(long, global = true, value_name = "PATHS")]
    pub devices: Option<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Query device, site, port, or operation properties.
    Query(QueryArgs),
    /// Lower a circuit to pulses, run passes, and write a .pqir file.
    Compile(CompileArgs),
    /// Parse and validate a .pqir file.
    Validate(ValidateArgs),
    /// Submit a .pqir payload to a device and print the histogram.
    Run(RunArgs),
    /// Optimize a drive pulse closed-loop against the simulator.
    VqeDemo(VqeDemoArgs),
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Device name (see the device descriptor's "name" field).
    #[arg(long)]
    pub device: String,
    /// Scope: device, site:N, port:ID, or operation:NAME.
    #[arg(long, default_value = "device")]
    pub scope: String,
    /// Property key, e.g. pulse_support or granularity_samples.
    #[arg(long, conflicts_with = "all")]
    pub key: Option<String>,
    /// Print every available property of the scope.
    #[arg(long)]
    pub all: bool,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    /// Circuit file: JSON list of gate objects.
    #[arg(long)]
    pub circuit: PathBuf,
    /// Calibration file overriding the device defaults.
    #[arg(long)]
    pub calibrations: Option<PathBuf>,
    #[arg(long)]
    pub device: String,
    /// Comma-separated pass list (default:
    /// merge_delays,fold_phase,resolve_timing,legalize).
    #[arg(long)]
    pub passes: Option<String>,
    /// Legalization mode: strict or pad.
    #[arg(long, default_value = "strict")]
    pub mode: String,
    /// Output .pqir path.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Also write an SVG rendering of the compiled schedule.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Input .pqir file.
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Input .pqir file.
    pub input: PathBuf,
    #[arg(long)]
    pub device: String,
    #[arg(long, default_value_t = 1024)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct VqeDemoArgs {
    #[arg(long)]
    pub device: String,
    #[arg(long, default_value_t = 200)]
    pub iterations: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Run a parsed invocation; the error string is printed to stderr by the
/// binary, which then exits 1.
pub fn run(cli: Cli) -> Result<(), String> {
    let driver = build_driver(cli.devices.as_deref())?;
    match cli.command {
        Command::Query(args) => cmd_query(&driver, args),
        Command::Compile(args) => cmd_compile(&driver, args),
        Command::Validate(args) => cmd_validate(args),
        Command::Run(args) => cmd_run(&driver, args),
        Command::VqeDemo(args) => cmd_vqe_demo(&driver, args),
    }
}

fn build_driver(devices_flag: Option<&str>) -> Result<Driver, String> {
    if let Some(paths) = devices_flag {
        let paths: Vec<PathBuf> = std::env::split_paths(paths).collect();
        return Driver::from_descriptor_paths(paths).map_err(|e| e.to_string());
    }
    if std::env::var_os("PULSESTACK_DEVICES").is_some() {
        return Driver::from_env().map_err(|e| e.to_string());
    }
    let builtin = DeviceDescriptor::from_json(BUILTIN_SIM1Q).expect("built-in descriptor is valid");
    Driver::with_devices(vec![builtin]).map_err(|e| e.to_string())
}

fn resolve_device(driver: &Driver, name: &str) -> Result<DeviceHandle, String> {
    driver
        .device_by_name(name)
        .ok_or_else(|| format!("unknown device {name:?}"))
}

fn cmd_query(driver: &Driver, args: QueryArgs) -> Result<(), String> {
    let device = resolve_device(driver, &args.device)?;
    let scope: QueryScope = args.scope.parse()?;
    if args.all {
        for key in PropertyKey::keys_for(&scope) {
            match driver.query(device, &scope, *key) {
                Ok(value) => println!("{key} = {value}"),
                Err(crate::driver::DriverError::NotSupported) => {}
                Err(e) => return Err(e.to_string()),
            }
        }
        return Ok(());
    }
    let key: PropertyKey = args
        .key
        .as_deref()
        .ok_or("pass --key <KEY> or --all")?
        .parse()?;
    let value = driver
        .query(device, &scope, key)
        .map_err(|e| e.to_string())?;
    println!("{key} = {value}");
    Ok(())
}

fn cmd_compile(driver: &Driver, args: CompileArgs) -> Result<(), String> {
    let device = resolve_device(driver, &args.device)?;
    let descriptor = driver.descriptor(device).map_err(|e| e.to_string())?;

    let circuit_text = read(&args.circuit)?;
    let circuit = GateCircuit::from_json(&circuit_text).map_err(|e| e.to_string())?;

    // Device defaults (built-ins included), then the user's file on top.
    let mut registry = driver.calibrations(device).map_err(|e| e.to_string())?;
    if let Some(path) = &args.calibrations {
        let user = CalibrationRegistry::from_json(&read(path)?).map_err(|e| e.to_string())?;
        registry.absorb(user).map_err(|e| e.to_string())?;
    }

    let schedule = lower(&circuit, &registry, descriptor).map_err(|e| e.to_string())?;

    let mode: LegalizeMode = args.mode.parse()?;
    let config = match &args.passes {
        Some(list) => PipelineConfig::from_pass_list(list, mode).map_err(|e| e.to_string())?,
        None => PipelineConfig {
            mode,
            ..PipelineConfig::default()
        },
    };
    let (schedule, diagnostics) =
        crate::passes::run_pipeline(schedule, &config, descriptor).map_err(|e| e.to_string())?;
    for diagnostic in diagnostics.iter() {
        eprintln!("{diagnostic}");
    }
    if diagnostics.has_errors() {
        return Err("compilation failed with error diagnostics".to_string());
    }

    let module_name = args
        .output
        .file_stem()
        .and_then(|s| s.to_str())
        .map(sanitize_identifier)
        .unwrap_or_else(|| "module".to_string());
    let module = PulseModule::from_schedule(&schedule, descriptor, module_name, "main", "")
        .map_err(|e| e.to_string())?;
    let text = pqir::emit(&module).map_err(|e| e.to_string())?;
    std::fs::write(&args.output, text)
        .map_err(|e| format!("cannot write {}: {e}", args.output.display()))?;

    if let Some(path) = &args.plot {
        let timed = if schedule.is_timed() {
            schedule
        } else {
            resolve_timing(&schedule)
        };
        let svg = crate::plot::render_svg(&timed).map_err(|e| e.to_string())?;
        std::fs::write(path, svg).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<(), String> {
    let text = read(&args.input)?;
    let parsed = pqir::parse(&text).map_err(|e| e.to_string())?;
    for note in parsed.notes.iter() {
        eprintln!("{note}");
    }
    let diagnostics = pqir::validate_profile(&parsed.module);
    for diagnostic in diagnostics.iter() {
        eprintln!("{diagnostic}");
    }
    if diagnostics.has_errors() {
        return Err("profile validation failed".to_string());
    }
    println!(
        "valid: {} instructions over {} ports, {} results",
        parsed.module.schedule.instructions().len(),
        parsed.module.used_port_handles().len(),
        parsed.module.schedule.result_ids().len()
    );
    Ok(())
}

fn cmd_run(driver: &Driver, args: RunArgs) -> Result<(), String> {
    let device = resolve_device(driver, &args.device)?;
    let payload = read(&args.input)?;
    let session = driver.open_session();
    let job = driver
        .submit_job(
            session,
            device,
            JobFormat::PqirPulse,
            &payload,
            args.shots,
            args.seed,
        )
        .map_err(|e| e.to_string())?;
    let histogram = driver.job_result(job).map_err(|e| e.to_string())?;
    print!("{histogram}");
    Ok(())
}

fn cmd_vqe_demo(driver: &Driver, args: VqeDemoArgs) -> Result<(), String> {
    let device = resolve_device(driver, &args.device)?;
    let descriptor = driver.descriptor(device).map_err(|e| e.to_string())?;
    if !descriptor.is_simulated() {
        return Err(format!("device {:?} is not a simulator", args.device));
    }
    let config = vqe::VqeConfig {
        iterations: args.iterations,
        seed: args.seed,
        ..vqe::VqeConfig::default()
    };
    let outcome = vqe::run_with(descriptor, &config, |iteration, energy, _| {
        if iteration == 0 {
            println!("initial energy = {energy:.9}");
        } else {
            println!("iter {iteration}: energy = {energy:.9}");
        }
    })
    .map_err(|e| e.to_string())?;
    if args.iterations > 0 {
        println!("final energy = {:.9}", outcome.final_energy);
        println!(
            "pulse: amp = {:.9}, duration_samples = {}, phase_rad = {:.9}",
            outcome.final_params.amp,
            outcome.final_params.duration_samples,
            outcome.final_params.phase_rad
        );
    }
    Ok(())
}

fn read(path: &PathBuf) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn sanitize_identifier(stem: &str) -> String {
    let mut out = String::new();
    for c in stem.chars() {
        if c.is_ascii_alphanumeric() || c == '_' {
            out.push(c);
        } else {
            out.push('_');
        }
    }
    if out.is_empty() || out.chars().next().unwrap().is_ascii_digit() {
        out.insert(0, '_');
    }
    out
}
