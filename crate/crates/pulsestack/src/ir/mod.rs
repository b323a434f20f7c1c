// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! The three pulse abstractions and the pulse instruction set.
//!
//! Everything pulse-level in this crate is expressed in terms of:
//!
//! - **ports** ([`Port`]) — hardware input/output channels with published
//!   constraints,
//! - **waveforms** ([`Waveform`]) — complex envelopes, explicit or
//!   parametric,
//! - **frames** ([`Frame`]) — stateful carriers (frequency, phase, logical
//!   clock) bound to a port.
//!
//! A pulse is a waveform, modulated and timed by a frame, played on a port.
//! [`Schedule`] sequences pulse instructions over a set of frames.

mod frame;
mod port;
mod schedule;
mod waveform;

pub use frame::{normalize_phase, Frame, FrameError, FrameId};
pub use port::{Port, PortConstraints, PortError, PortId, PortKind, SiteId};
pub use schedule::{PulseInstruction, ResultId, Schedule, ScheduleError};
pub use waveform::{render_signal, Template, Waveform, WaveformError, AMPLITUDE_SLACK};
