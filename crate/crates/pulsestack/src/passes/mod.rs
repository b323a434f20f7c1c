// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! Pass manager and the built-in pulse passes.
//!
//! Passes are pure `Schedule x DeviceDescriptor -> Schedule + Diagnostics`
//! functions registered by name and run in a configured order. A pass that
//! emits an error diagnostic has its output discarded and aborts the rest
//! of the pipeline; later passes would be operating on invalid IR.
//!
//! Built-in passes: `merge_delays`, `fold_phase`, `resolve_timing`, and
//! `legalize` (strict or pad mode).

mod delays;
mod fold;
mod legalize;
mod timing;

pub use delays::merge_delays;
pub use fold::fold_phase;
pub use legalize::{legalize, LegalizeMode};
pub use timing::resolve_timing;

use std::fmt;

use thiserror::Error;

use crate::driver::descriptor::DeviceDescriptor;
use crate::ir::Schedule;

/// Severity of one diagnostic. Errors fail the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Note,
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Severity::Note => "note",
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        f.write_str(s)
    }
}

/// One finding attached to an optional instruction index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub instruction_index: Option<usize>,
    pub message: String,
}

impl Diagnostic {
    pub fn note(instruction_index: Option<usize>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Note,
            instruction_index,
            message: message.into(),
        }
    }

    pub fn warning(instruction_index: Option<usize>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            instruction_index,
            message: message.into(),
        }
    }

    pub fn error(instruction_index: Option<usize>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            instruction_index,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.instruction_index {
            Some(index) => write!(
                f,
                "{}: instruction {}: {}",
                self.severity, index, self.message
            ),
            None => write!(f, "{}: {}", self.severity, self.message),
        }
    }
}

/// Ordered diagnostic collection.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Diagnostics(Vec<Diagnostic>);

impl Diagnostics {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, diagnostic: Diagnostic) {
        self.0.push(diagnostic);
    }

    pub fn extend(&mut self, other: Diagnostics) {
        self.0.extend(other.0);
    }

    pub fn has_errors(&self) -> bool {
        self.0.iter().any(|d| d.severity == Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.0.iter().filter(|d| d.severity == Severity::Error)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Diagnostic> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for diagnostic in &self.0 {
            writeln!(f, "{diagnostic}")?;
        }
        Ok(())
    }
}

impl IntoIterator for Diagnostics {
    type Item = Diagnostic;
    type IntoIter = std::vec::IntoIter<Diagnostic>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

/// Whether a pass only inspects the schedule or may rewrite it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PassKind {
    Analysis,
    Transform,
}

/// A registered schedule transformation.
pub trait Pass: Send + Sync {
    fn name(&self) -> &'static str;
    fn kind(&self) -> PassKind;
    /// Apply to a schedule. On error diagnostics the returned schedule is
    /// discarded by the pipeline.
    fn apply(&self, schedule: &Schedule, device: &DeviceDescriptor) -> (Schedule, Diagnostics);
}

struct MergeDelaysPass;
impl Pass for MergeDelaysPass {
    fn name(&self) -> &'static str {
        "merge_delays"
    }
    fn kind(&self) -> PassKind {
        PassKind::Transform
    }
    fn apply(&self, schedule: &Schedule, _: &DeviceDescriptor) -> (Schedule, Diagnostics) {
        (merge_delays(schedule), Diagnostics::new())
    }
}

struct FoldPhasePass;
impl Pass for FoldPhasePass {
    fn name(&self) -> &'static str {
        "fold_phase"
    }
    fn kind(&self) -> PassKind {
        PassKind::Transform
    }
    fn apply(&self, schedule: &Schedule, _: &DeviceDescriptor) -> (Schedule, Diagnostics) {
        (fold_phase(schedule), Diagnostics::new())
    }
}

struct ResolveTimingPass;
impl Pass for ResolveTimingPass {
    fn name(&self) -> &'static str {
        "resolve_timing"
    }
    fn kind(&self) -> PassKind {
        PassKind::Analysis
    }
    fn apply(&self, schedule: &Schedule, _: &DeviceDescriptor) -> (Schedule, Diagnostics) {
        (resolve_timing(schedule), Diagnostics::new())
    }
}

struct LegalizePass(LegalizeMode);
impl Pass for LegalizePass {
    fn name(&self) -> &'static str {
        "legalize"
    }
    fn kind(&self) -> PassKind {
        PassKind::Transform
    }
    fn apply(&self, schedule: &Schedule, device: &DeviceDescriptor) -> (Schedule, Diagnostics) {
        legalize(schedule, device, self.0)
    }
}

/// Names of the built-in passes, in canonical order.
pub const BUILTIN_PASSES: [&str; 4] = ["merge_delays", "fold_phase", "resolve_timing", "legalize"];

/// Ordered pass list plus the legalization mode.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub passes: Vec<String>,
    pub mode: LegalizeMode,
}

impl PipelineConfig {
    /// Parse a comma-separated pass list, e.g.
    /// `"merge_delays,resolve_timing,legalize"`.
    pub fn from_pass_list(list: &str, mode: LegalizeMode) -> Result<Self, PipelineError> {
        let passes: Vec<String> = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        let config = PipelineConfig { passes, mode };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        for name in &self.passes {
            if !BUILTIN_PASSES.contains(&name.as_str()) {
                return Err(PipelineError::UnknownPass(name.clone()));
            }
        }
        Ok(())
    }

    fn instantiate(&self) -> Result<Vec<Box<dyn Pass>>, PipelineError> {
        self.passes
            .iter()
            .map(|name| -> Result<Box<dyn Pass>, PipelineError> {
                match name.as_str() {
                    "merge_delays" => Ok(Box::new(MergeDelaysPass)),
                    "fold_phase" => Ok(Box::new(FoldPhasePass)),
                    "resolve_timing" => Ok(Box::new(ResolveTimingPass)),
                    "legalize" => Ok(Box::new(LegalizePass(self.mode))),
                    other => Err(PipelineError::UnknownPass(other.to_string())),
                }
            })
            .collect()
    }
}

impl Default for PipelineConfig {
    /// The full canonical pipeline in strict mode.
    fn default() -> Self {
        PipelineConfig {
            passes: BUILTIN_PASSES.iter().map(|s| s.to_string()).collect(),
            mode: LegalizeMode::Strict,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PipelineError {
    #[error("unknown pass {0:?}")]
    UnknownPass(String),
}

/// Run the configured passes in order. Aborts at the first pass that emits
/// an error diagnostic, returning the schedule as of before that pass;
/// diagnostics from all executed passes are concatenated.
pub fn run_pipeline(
    schedule: Schedule,
    config: &PipelineConfig,
    device: &DeviceDescriptor,
) -> Result<(Schedule, Diagnostics), PipelineError> {
    let passes = config.instantiate()?;
    let mut current = schedule;
    let mut all = Diagnostics::new();
    for pass in passes {
        let (next, diagnostics) = pass.apply(&current, device);
        let failed = diagnostics.has_errors();
        all.extend(diagnostics);
        if failed {
            return Ok((current, all));
        }
        current = next;
    }
    Ok((current, all))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::CalibrationRegistry;
    use crate::driver::descriptor::PulseSupport;
    use crate::ir::{Frame, FrameId, PortConstraints, PortId, PulseInstruction, Waveform};
    use std::collections::BTreeMap;

    fn device() -> DeviceDescriptor {
        DeviceDescriptor {
            name: "dev".into(),
            num_sites: 1,
            pulse_support: PulseSupport::PortLevel,
            ports: vec![crate::ir::Port {
                id: PortId::new("drive0").unwrap(),
                kind: crate::ir::PortKind::Drive,
                sites: vec![crate::ir::SiteId(0)],
                constraints: PortConstraints {
                    sample_period_s: 1e-9,
                    granularity_samples: 8,
                    min_duration_samples: 16,
                    max_amplitude: 0.8,
                    frequency_range_hz: (4.5e9, 5.5e9),
                },
            }],
            operations: vec![],
            supported_formats: vec![],
            sites: vec![],
            default_calibrations: CalibrationRegistry::new(),
            simulation: None,
        }
    }

    fn schedule(instructions: Vec<PulseInstruction>) -> Schedule {
        let id = FrameId::new("f0").unwrap();
        let frame = Frame::new(id.clone(), PortId::new("drive0").unwrap(), 5.0e9, 0.0).unwrap();
        let mut frames = BTreeMap::new();
        frames.insert(id, frame);
        Schedule::new(frames, instructions).unwrap()
    }

    #[test]
    fn empty_pipeline_is_identity() {
        let s = schedule(vec![PulseInstruction::Delay {
            frame: FrameId::new("f0").unwrap(),
            duration_samples: 8,
        }]);
        let config = PipelineConfig::from_pass_list("", LegalizeMode::Strict).unwrap();
        let (out, diagnostics) = run_pipeline(s.clone(), &config, &device()).unwrap();
        assert_eq!(out, s);
        assert!(diagnostics.is_empty());
    }

    #[test]
    fn merge_then_time() {
        let s = schedule(vec![
            PulseInstruction::Delay {
                frame: FrameId::new("f0").unwrap(),
                duration_samples: 4,
            },
            PulseInstruction::Delay {
                frame: FrameId::new("f0").unwrap(),
                duration_samples: 4,
            },
        ]);
        let config =
            PipelineConfig::from_pass_list("merge_delays,resolve_timing", LegalizeMode::Strict)
                .unwrap();
        let (out, _) = run_pipeline(s, &config, &device()).unwrap();
        assert!(out.is_timed());
        assert_eq!(out.instructions().len(), 1);
        assert_eq!(out.timing().unwrap(), &[0]);
    }

    #[test]
    fn failing_legalize_returns_input() {
        let w = Waveform::sampled(vec![num_complex::Complex64::new(0.9, 0.0); 16]).unwrap();
        let s = schedule(vec![PulseInstruction::Play {
            frame: FrameId::new("f0").unwrap(),
            waveform: w,
        }]);
        let config = PipelineConfig::from_pass_list("legalize", LegalizeMode::Strict).unwrap();
        let (out, diagnostics) = run_pipeline(s.clone(), &config, &device()).unwrap();
        assert_eq!(out, s);
        assert!(diagnostics.has_errors());
    }

    #[test]
    fn unknown_pass_rejected() {
        assert_eq!(
            PipelineConfig::from_pass_list("frobnicate", LegalizeMode::Strict).unwrap_err(),
            PipelineError::UnknownPass("frobnicate".to_string())
        );
    }
}
