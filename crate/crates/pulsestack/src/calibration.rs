// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! Calibration registry: device-provided pulse implementations of gates.
//!
//! A calibration entry maps a gate name (on specific sites or as a
//! wildcard) to a pulse sub-schedule template. Templates reference frame
//! *roles* (`drive`, `readout`, `acquire`, `coupler`) instead of concrete
//! frame ids, so one entry can serve every site; roles are bound to frames
//! at lowering time. Numeric fields may name gate parameters with the
//! `"${theta}"` / `"${-theta}"` substitution form.
//!
//! The on-disk form is a JSON list of entries:
//!
//! ```json
//! [{"gate": "x", "sites": "any", "params": [],
//!   "body": [{"op": "play", "frame_role": "drive",
//!             "waveform": {"parametric": {"template": "gaussian",
//!                          "duration_samples": 64,
//!                          "params": {"amp": 0.2, "phase": 0.0,
//!                                     "sigma_samples": 12.0}}}}]}]
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::{SiteId, Template, Waveform, WaveformError};

/// Frame role a calibration body targets; resolved to a concrete frame on
/// the gate's site at lowering time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameRole {
    Drive,
    Readout,
    Acquire,
    Coupler,
}

impl fmt::Display for FrameRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FrameRole::Drive => "drive",
            FrameRole::Readout => "readout",
            FrameRole::Acquire => "acquire",
            FrameRole::Coupler => "coupler",
        };
        f.write_str(s)
    }
}

/// A numeric field in a calibration body: a literal or a (possibly
/// negated) reference to a gate parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamValueRepr", into = "ParamValueRepr")]
pub enum ParamValue {
    Literal(f64),
    Param { name: String, negate: bool },
}

impl ParamValue {
    pub fn literal(v: f64) -> Self {
        ParamValue::Literal(v)
    }

    pub fn param(name: impl Into<String>) -> Self {
        ParamValue::Param {
            name: name.into(),
            negate: false,
        }
    }

    pub fn negated_param(name: impl Into<String>) -> Self {
        ParamValue::Param {
            name: name.into(),
            negate: true,
        }
    }

    /// The parameter name this value references, if any.
    pub fn param_name(&self) -> Option<&str> {
        match self {
            ParamValue::Literal(_) => None,
            ParamValue::Param { name, .. } => Some(name),
        }
    }

    /// Evaluate against the gate's parameter bindings.
    pub fn eval(&self, bindings: &BTreeMap<String, f64>) -> Result<f64, CalibrationError> {
        match self {
            ParamValue::Literal(v) => Ok(*v),
            ParamValue::Param { name, negate } => {
                let v = bindings
                    .get(name)
                    .copied()
                    .ok_or_else(|| CalibrationError::UnboundParam(name.clone()))?;
                Ok(if *negate { -v } else { v })
            }
        }
    }
}

#[derive(Serialize, Deserialize, Clone)]
#[serde(untagged)]
enum ParamValueRepr {
    Num(f64),
    Str(String),
}

impl TryFrom<ParamValueRepr> for ParamValue {
    type Error = String;
    fn try_from(repr: ParamValueRepr) -> Result<Self, String> {
        match repr {
            ParamValueRepr::Num(v) => Ok(ParamValue::Literal(v)),
            ParamValueRepr::Str(s) => {
                let inner = s
                    .strip_prefix("${")
                    .and_then(|rest| rest.strip_suffix('}'))
                    .ok_or_else(|| format!("expected \"${{name}}\" substitution, got {s:?}"))?;
                let (negate, name) = match inner.strip_prefix('-') {
                    Some(name) => (true, name),
                    None => (false, inner),
                };
                if name.is_empty() {
                    return Err(format!("empty parameter name in {s:?}"));
                }
                Ok(ParamValue::Param {
                    name: name.to_string(),
                    negate,
                })
            }
        }
    }
}

impl From<ParamValue> for ParamValueRepr {
    fn from(v: ParamValue) -> ParamValueRepr {
        match v {
            ParamValue::Literal(x) => ParamValueRepr::Num(x),
            ParamValue::Param { name, negate } => {
                let sign = if negate { "-" } else { "" };
                ParamValueRepr::Str(format!("${{{sign}{name}}}"))
            }
        }
    }
}

/// Waveform template inside a calibration body; parametric parameter
/// values may reference gate parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyWaveform {
    Sampled {
        samples: Vec<(f64, f64)>,
    },
    Parametric {
        template: Template,
        duration_samples: u64,
        params: BTreeMap<String, ParamValue>,
    },
}

impl BodyWaveform {
    fn param_names(&self) -> Vec<&str> {
        match self {
            BodyWaveform::Sampled { .. } => vec![],
            BodyWaveform::Parametric { params, .. } => {
                params.values().filter_map(|v| v.param_name()).collect()
            }
        }
    }

    pub fn instantiate(
        &self,
        bindings: &BTreeMap<String, f64>,
    ) -> Result<Waveform, CalibrationError> {
        match self {
            BodyWaveform::Sampled { samples } => {
                let complex = samples
                    .iter()
                    .map(|&(re, im)| num_complex::Complex64::new(re, im));
                Ok(Waveform::sampled(complex)?)
            }
            BodyWaveform::Parametric {
                template,
                duration_samples,
                params,
            } => {
                let mut evaluated = BTreeMap::new();
                for (key, value) in params {
                    evaluated.insert(key.clone(), value.eval(bindings)?);
                }
                Ok(Waveform::parametric(
                    *template,
                    *duration_samples,
                    evaluated,
                )?)
            }
        }
    }
}

/// One templated instruction of a calibration body. Mirrors
/// [`crate::ir::PulseInstruction`] with frame roles in place of frame ids;
/// `capture` and `measure` take their result (and site) from the gate
/// being lowered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum BodyInstruction {
    Play {
        frame_role: FrameRole,
        waveform: BodyWaveform,
    },
    ShiftPhase {
        frame_role: FrameRole,
        delta_rad: ParamValue,
    },
    SetPhase {
        frame_role: FrameRole,
        phase_rad: ParamValue,
    },
    ShiftFrequency {
        frame_role: FrameRole,
        delta_hz: ParamValue,
    },
    SetFrequency {
        frame_role: FrameRole,
        frequency_hz: ParamValue,
    },
    Delay {
        frame_role: FrameRole,
        duration_samples: u64,
    },
    Barrier {
        frame_roles: BTreeSet<FrameRole>,
    },
    Capture {
        frame_role: FrameRole,
    },
    Measure,
}

impl BodyInstruction {
    /// Frame roles referenced by this instruction.
    pub fn roles(&self) -> Vec<FrameRole> {
        use BodyInstruction::*;
        match self {
            Play { frame_role, .. }
            | ShiftPhase { frame_role, .. }
            | SetPhase { frame_role, .. }
            | ShiftFrequency { frame_role, .. }
            | SetFrequency { frame_role, .. }
            | Delay { frame_role, .. }
            | Capture { frame_role } => vec![*frame_role],
            Barrier { frame_roles } => frame_roles.iter().copied().collect(),
            Measure => vec![],
        }
    }

    fn param_names(&self) -> Vec<&str> {
        use BodyInstruction::*;
        match self {
            Play { waveform, .. } => waveform.param_names(),
            ShiftPhase { delta_rad: v, .. }
            | SetPhase { phase_rad: v, .. }
            | ShiftFrequency { delta_hz: v, .. }
            | SetFrequency {
                frequency_hz: v, ..
            } => v.param_name().into_iter().collect(),
            Delay { .. } | Barrier { .. } | Capture { .. } | Measure => vec![],
        }
    }

    fn writes_result(&self) -> bool {
        matches!(
            self,
            BodyInstruction::Capture { .. } | BodyInstruction::Measure
        )
    }
}

/// Which sites an entry applies to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SiteSelectorRepr", into = "SiteSelectorRepr")]
pub enum SiteSelector {
    /// Applies to any site combination (fallback).
    Any,
    /// Applies exactly to these sites, in order.
    Sites(Vec<SiteId>),
}

#[derive(Serialize, Deserialize, Clone)]
#[serde(untagged)]
enum SiteSelectorRepr {
    Tag(String),
    List(Vec<SiteId>),
}

impl TryFrom<SiteSelectorRepr> for SiteSelector {
    type Error = String;
    fn try_from(repr: SiteSelectorRepr) -> Result<Self, String> {
        match repr {
            SiteSelectorRepr::Tag(s) if s == "any" => Ok(SiteSelector::Any),
            SiteSelectorRepr::Tag(s) => Err(format!("unknown site selector {s:?}")),
            SiteSelectorRepr::List(sites) => Ok(SiteSelector::Sites(sites)),
        }
    }
}

impl From<SiteSelector> for SiteSelectorRepr {
    fn from(s: SiteSelector) -> SiteSelectorRepr {
        match s {
            SiteSelector::Any => SiteSelectorRepr::Tag("any".to_string()),
            SiteSelector::Sites(sites) => SiteSelectorRepr::List(sites),
        }
    }
}

/// A pulse implementation of one gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationEntry {
    #[serde(rename = "gate")]
    pub gate_name: String,
    pub sites: SiteSelector,
    #[serde(default)]
    pub params: Vec<String>,
    pub body: Vec<BodyInstruction>,
}

impl CalibrationEntry {
    /// Structural validation: the body's free parameters must be declared,
    /// result-writing ops must be unique, and fully-literal waveforms must
    /// construct.
    pub fn validate(&self) -> Result<(), CalibrationError> {
        if self.gate_name.is_empty() {
            return Err(CalibrationError::InvalidBody(
                "gate name must be non-empty".to_string(),
            ));
        }
        for instruction in &self.body {
            for name in instruction.param_names() {
                if !self.params.iter().any(|p| p == name) {
                    return Err(CalibrationError::InvalidBody(format!(
                        "body references undeclared parameter {name:?}"
                    )));
                }
            }
            if let BodyInstruction::Play {
                waveform: w @ BodyWaveform::Parametric { .. },
                ..
            } = instruction
            {
                if w.param_names().is_empty() {
                    w.instantiate(&BTreeMap::new())?;
                }
            }
            if let BodyInstruction::Play {
                waveform: w @ BodyWaveform::Sampled { .. },
                ..
            } = instruction
            {
                w.instantiate(&BTreeMap::new())?;
            }
        }
        if self.body.iter().filter(|i| i.writes_result()).count() > 1 {
            return Err(CalibrationError::InvalidBody(
                "body may write at most one result".to_string(),
            ));
        }
        Ok(())
    }

    /// Frame roles the body references.
    pub fn roles(&self) -> BTreeSet<FrameRole> {
        self.body.iter().flat_map(|i| i.roles()).collect()
    }

    /// Body duration in samples under ASAP sequencing over frame roles
    /// (plays and delays advance a per-role clock, barriers synchronize).
    pub fn duration_samples(&self) -> u64 {
        let mut clocks: BTreeMap<FrameRole, u64> = BTreeMap::new();
        for instruction in &self.body {
            match instruction {
                BodyInstruction::Play {
                    frame_role,
                    waveform,
                } => {
                    let duration = match waveform {
                        BodyWaveform::Sampled { samples } => samples.len() as u64,
                        BodyWaveform::Parametric {
                            duration_samples, ..
                        } => *duration_samples,
                    };
                    *clocks.entry(*frame_role).or_insert(0) += duration;
                }
                BodyInstruction::Delay {
                    frame_role,
                    duration_samples,
                } => {
                    *clocks.entry(*frame_role).or_insert(0) += duration_samples;
                }
                BodyInstruction::Barrier { frame_roles } => {
                    let horizon = frame_roles
                        .iter()
                        .map(|r| clocks.get(r).copied().unwrap_or(0))
                        .max()
                        .unwrap_or(0);
                    for role in frame_roles {
                        clocks.insert(*role, horizon);
                    }
                }
                _ => {}
            }
        }
        clocks.values().copied().max().unwrap_or(0)
    }

    fn matches(&self, gate_name: &str, sites: &[SiteId]) -> Option<Precedence> {
        if self.gate_name != gate_name {
            return None;
        }
        match &self.sites {
            SiteSelector::Any => Some(Precedence::Wildcard),
            SiteSelector::Sites(s) if s.as_slice() == sites => Some(Precedence::Specific),
            SiteSelector::Sites(_) => None,
        }
    }
}

#[derive(PartialEq, Eq)]
enum Precedence {
    Specific,
    Wildcard,
}

/// Ordered collection of calibration entries with site-specific-first
/// lookup precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<CalibrationEntry>", into = "Vec<CalibrationEntry>")]
pub struct CalibrationRegistry {
    entries: Vec<CalibrationEntry>,
}

impl CalibrationRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add an entry after structural validation. An existing entry for the
    /// same `(gate, sites)` key is replaced and returned.
    pub fn register(
        &mut self,
        entry: CalibrationEntry,
    ) -> Result<Option<CalibrationEntry>, CalibrationError> {
        entry.validate()?;
        let existing = self
            .entries
            .iter()
            .position(|e| e.gate_name == entry.gate_name && e.sites == entry.sites);
        match existing {
            Some(slot) => Ok(Some(std::mem::replace(&mut self.entries[slot], entry))),
            None => {
                self.entries.push(entry);
                Ok(None)
            }
        }
    }

    /// Resolve a calibration: an exact site match wins over a wildcard.
    pub fn lookup(&self, gate_name: &str, sites: &[SiteId]) -> Option<&CalibrationEntry> {
        let mut wildcard = None;
        for entry in &self.entries {
            match entry.matches(gate_name, sites) {
                Some(Precedence::Specific) => return Some(entry),
                Some(Precedence::Wildcard) => wildcard = Some(entry),
                None => {}
            }
        }
        wildcard
    }

    /// Register every entry of `other`, replacing same-key entries.
    pub fn absorb(&mut self, other: CalibrationRegistry) -> Result<(), CalibrationError> {
        for entry in other.entries {
            self.register(entry)?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, CalibrationError> {
        let entries: Vec<CalibrationEntry> = serde_json::from_str(text)?;
        let mut registry = CalibrationRegistry::new();
        for entry in entries {
            registry.register(entry)?;
        }
        Ok(registry)
    }

    pub fn entries(&self) -> &[CalibrationEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl TryFrom<Vec<CalibrationEntry>> for CalibrationRegistry {
    type Error = CalibrationError;
    fn try_from(entries: Vec<CalibrationEntry>) -> Result<Self, CalibrationError> {
        let mut registry = CalibrationRegistry::new();
        for entry in entries {
            registry.register(entry)?;
        }
        Ok(registry)
    }
}

impl From<CalibrationRegistry> for Vec<CalibrationEntry> {
    fn from(r: CalibrationRegistry) -> Vec<CalibrationEntry> {
        r.entries
    }
}

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("invalid calibration body: {0}")]
    InvalidBody(String),
    #[error("calibration body references unbound parameter {0:?}")]
    UnboundParam(String),
    #[error(transparent)]
    Waveform(#[from] WaveformError),
    #[error("malformed calibration JSON: {0}")]
    Json(#[from] serde_json::Error),
}
