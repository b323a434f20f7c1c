// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! Schedule rendering: one SVG lane per frame with envelope outlines.
//!
//! Documentation artifact only; the output shows the timing layout (plays,
//! delays, frame changes) with the real part of each envelope drawn to
//! scale inside its play box.

use std::fmt::Write;

use thiserror::Error;

use crate::ir::{PulseInstruction, Schedule, WaveformError};

const LANE_HEIGHT: f64 = 64.0;
const LANE_GAP: f64 = 12.0;
const LEFT_MARGIN: f64 = 120.0;
const WIDTH: f64 = 960.0;

/// Render a timed schedule as an SVG document.
pub fn render_svg(schedule: &Schedule) -> Result<String, PlotError> {
    let timing = schedule.timing().ok_or(PlotError::Untimed)?;
    let total: u64 = schedule
        .instructions()
        .iter()
        .zip(timing)
        .map(|(instruction, start)| start + instruction.duration_samples())
        .max()
        .unwrap_or(0)
        .max(1);
    let scale = (WIDTH - LEFT_MARGIN - 20.0) / total as f64;

    let lanes: Vec<_> = schedule.frames().keys().cloned().collect();
    let lane_of = |frame: &crate::ir::FrameId| -> usize {
        lanes
            .iter()
            .position(|id| id == frame)
            .expect("frame is declared")
    };
    let height = LANE_GAP + lanes.len() as f64 * (LANE_HEIGHT + LANE_GAP) + 24.0;

    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{height}\" \
         viewBox=\"0 0 {WIDTH} {height}\">"
    )
    .unwrap();
    writeln!(
        svg,
        "  <rect width=\"{WIDTH}\" height=\"{height}\" fill=\"white\"/>"
    )
    .unwrap();

    for (index, frame) in lanes.iter().enumerate() {
        let y = LANE_GAP + index as f64 * (LANE_HEIGHT + LANE_GAP);
        let mid = y + LANE_HEIGHT / 2.0;
        writeln!(
            svg,
            "  <text x=\"8\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"12\">{frame}</text>",
            mid + 4.0
        )
        .unwrap();
        writeln!(
            svg,
            "  <line x1=\"{LEFT_MARGIN}\" y1=\"{mid:.1}\" x2=\"{:.1}\" y2=\"{mid:.1}\" \
             stroke=\"#ccc\" stroke-width=\"1\"/>",
            WIDTH - 10.0
        )
        .unwrap();
    }

    for (instruction, &start) in schedule.instructions().iter().zip(timing) {
        match instruction {
            PulseInstruction::Play { frame, waveform } => {
                let lane = lane_of(frame);
                let y = LANE_GAP + lane as f64 * (LANE_HEIGHT + LANE_GAP);
                let mid = y + LANE_HEIGHT / 2.0;
                let x0 = LEFT_MARGIN + start as f64 * scale;
                let samples = waveform.resolve_samples()?;
                let w = samples.len() as f64 * scale;
                writeln!(
                    svg,
                    "  <rect x=\"{x0:.2}\" y=\"{y:.1}\" width=\"{w:.2}\" height=\"{LANE_HEIGHT}\" \
                     fill=\"#dbeafe\" stroke=\"#3b82f6\" stroke-width=\"1\"/>"
                )
                .unwrap();
                let peak = samples
                    .iter()
                    .map(|c| c.norm())
                    .fold(f64::MIN_POSITIVE, f64::max);
                let mut points = String::new();
                for (n, sample) in samples.iter().enumerate() {
                    let x = x0 + (n as f64 + 0.5) * scale;
                    let yy = mid - (sample.re / peak) * (LANE_HEIGHT / 2.0 - 4.0);
                    write!(points, "{x:.2},{yy:.2} ").unwrap();
                }
                writeln!(
                    svg,
                    "  <polyline points=\"{}\" fill=\"none\" stroke=\"#1d4ed8\" stroke-width=\"1.2\"/>",
                    points.trim_end()
                )
                .unwrap();
            }
            PulseInstruction::Delay {
                frame,
                duration_samples,
            } => {
                let lane = lane_of(frame);
                let y = LANE_GAP + lane as f64 * (LANE_HEIGHT + LANE_GAP);
                let x0 = LEFT_MARGIN + start as f64 * scale;
                let w = *duration_samples as f64 * scale;
                writeln!(
                    svg,
                    "  <rect x=\"{x0:.2}\" y=\"{y:.1}\" width=\"{w:.2}\" height=\"{LANE_HEIGHT}\" \
                     fill=\"#f3f4f6\" stroke=\"#9ca3af\" stroke-width=\"1\" \
                     stroke-dasharray=\"4 3\"/>"
                )
                .unwrap();
            }
            PulseInstruction::Barrier { frames } => {
                let x = LEFT_MARGIN + start as f64 * scale;
                for frame in frames {
                    let lane = lane_of(frame);
                    let y = LANE_GAP + lane as f64 * (LANE_HEIGHT + LANE_GAP);
                    writeln!(
                        svg,
                        "  <line x1=\"{x:.2}\" y1=\"{y:.1}\" x2=\"{x:.2}\" y2=\"{:.1}\" \
                         stroke=\"#111827\" stroke-width=\"2\" stroke-dasharray=\"2 2\"/>",
                        y + LANE_HEIGHT
                    )
                    .unwrap();
                }
            }
            other => {
                // Zero-duration frame/measure ops: tick plus op name.
                let x = LEFT_MARGIN + start as f64 * scale;
                let lane = other.frames().first().map(|f| lane_of(f)).unwrap_or(0);
                let y = LANE_GAP + lane as f64 * (LANE_HEIGHT + LANE_GAP);
                let mid = y + LANE_HEIGHT / 2.0;
                writeln!(
                    svg,
                    "  <line x1=\"{x:.2}\" y1=\"{:.1}\" x2=\"{x:.2}\" y2=\"{:.1}\" \
                     stroke=\"#dc2626\" stroke-width=\"1.5\"/>",
                    mid - 14.0,
                    mid + 14.0
                )
                .unwrap();
                writeln!(
                    svg,
                    "  <text x=\"{:.2}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"9\" \
                     fill=\"#dc2626\">{}</text>",
                    x + 2.0,
                    mid - 16.0,
                    other.op_name()
                )
                .unwrap();
            }
        }
    }

    writeln!(
        svg,
        "  <text x=\"{LEFT_MARGIN}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"11\" \
         fill=\"#374151\">0 .. {total} samples</text>",
        height - 8.0
    )
    .unwrap();
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("schedule must be timed before rendering")]
    Untimed,
    #[error(transparent)]
    Waveform(#[from] WaveformError),
}
