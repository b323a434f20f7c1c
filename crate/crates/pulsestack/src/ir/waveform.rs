// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! Waveforms: the complex baseband envelope of a control signal.
//!
//! An envelope is either an explicit array of samples or a parametric
//! template (constant, gaussian, gaussian-square) that evaluates to samples
//! on demand. Envelope magnitudes are universally bounded by 1.0; tighter
//! per-port amplitude limits are a legalization concern, not enforced here.
//!
//! Durations are integer sample counts throughout. Physical time enters
//! only at the render and simulation boundaries through a port's sample
//! period `dt`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::frame::Frame;

/// Magnitudes up to `1.0 + AMPLITUDE_SLACK` are accepted so that values
/// computed as e.g. `cos^2 + sin^2` do not trip the bound.
pub const AMPLITUDE_SLACK: f64 = 1e-12;

/// Parametric envelope shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Template {
    Constant,
    Gaussian,
    GaussianSquare,
}

impl Template {
    /// The exact parameter set each template requires.
    pub fn required_params(self) -> &'static [&'static str] {
        match self {
            Template::Constant => &["amp", "phase"],
            Template::Gaussian => &["amp", "phase", "sigma_samples"],
            Template::GaussianSquare => &["amp", "phase", "sigma_samples", "width_samples"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Template::Constant => "constant",
            Template::Gaussian => "gaussian",
            Template::GaussianSquare => "gaussian_square",
        }
    }
}

/// A pulse envelope: explicit samples or a parametric template.
#[derive(Debug, Clone, PartialEq)]
pub enum Waveform {
    Sampled {
        /// Complex amplitudes as `(re, im)` pairs, every magnitude <= 1.
        samples: Vec<(f64, f64)>,
    },
    Parametric {
        template: Template,
        duration_samples: u64,
        /// Exactly the template's required keys.
        params: BTreeMap<String, f64>,
    },
}

impl Waveform {
    /// Build a sampled waveform, checking the universal amplitude bound.
    pub fn sampled(samples: impl IntoIterator<Item = Complex64>) -> Result<Self, WaveformError> {
        let samples: Vec<(f64, f64)> = samples.into_iter().map(|c| (c.re, c.im)).collect();
        if samples.is_empty() {
            return Err(WaveformError::Empty);
        }
        for (index, &(re, im)) in samples.iter().enumerate() {
            if !(re.is_finite() && im.is_finite()) {
                return Err(WaveformError::InvalidParams(format!(
                    "sample {index} is not finite"
                )));
            }
            let magnitude = (re * re + im * im).sqrt();
            if magnitude > 1.0 + AMPLITUDE_SLACK {
                return Err(WaveformError::AmplitudeOutOfRange { index, magnitude });
            }
        }
        Ok(Waveform::Sampled { samples })
    }

    /// Build a parametric waveform, checking the template's parameter set.
    pub fn parametric(
        template: Template,
        duration_samples: u64,
        params: BTreeMap<String, f64>,
    ) -> Result<Self, WaveformError> {
        if duration_samples == 0 {
            return Err(WaveformError::Empty);
        }
        let required = template.required_params();
        for key in required {
            match params.get(*key) {
                None => {
                    return Err(WaveformError::InvalidParams(format!(
                        "template {} requires parameter {key:?}",
                        template.name()
                    )))
                }
                Some(v) if !v.is_finite() => {
                    return Err(WaveformError::InvalidParams(format!(
                        "parameter {key:?} is not finite"
                    )))
                }
                Some(_) => {}
            }
        }
        if let Some(extra) = params.keys().find(|k| !required.contains(&k.as_str())) {
            return Err(WaveformError::InvalidParams(format!(
                "template {} does not accept parameter {extra:?}",
                template.name()
            )));
        }
        let amp = params["amp"];
        if !(0.0..=1.0).contains(&amp) {
            return Err(WaveformError::InvalidParams(format!(
                "amp must lie in [0, 1], got {amp}"
            )));
        }
        if let Some(&sigma) = params.get("sigma_samples") {
            if sigma <= 0.0 {
                return Err(WaveformError::InvalidParams(format!(
                    "sigma_samples must be > 0, got {sigma}"
                )));
            }
        }
        if let Some(&width) = params.get("width_samples") {
            if width < 0.0 {
                return Err(WaveformError::InvalidParams(format!(
                    "width_samples must be >= 0, got {width}"
                )));
            }
        }
        Ok(Waveform::Parametric {
            template,
            duration_samples,
            params,
        })
    }

    /// Shorthand for a constant envelope of the given amplitude and phase.
    pub fn constant(duration_samples: u64, amp: f64, phase: f64) -> Result<Self, WaveformError> {
        let mut params = BTreeMap::new();
        params.insert("amp".to_string(), amp);
        params.insert("phase".to_string(), phase);
        Waveform::parametric(Template::Constant, duration_samples, params)
    }

    /// Duration in samples.
    pub fn duration_samples(&self) -> u64 {
        match self {
            Waveform::Sampled { samples } => samples.len() as u64,
            Waveform::Parametric {
                duration_samples, ..
            } => *duration_samples,
        }
    }

    /// Evaluate to a concrete array of complex samples.
    ///
    /// Sampled waveforms come back unchanged. Parametric templates are
    /// evaluated at integer sample indices `n in [0, duration)` with center
    /// `c = (duration - 1) / 2`:
    ///
    /// - constant: `amp * e^{i*phase}`
    /// - gaussian: `amp * e^{i*phase} * exp(-(n - c)^2 / (2*sigma^2))`
    /// - gaussian_square: flat top of `width_samples` centered on `c`,
    ///   gaussian rise and fall with `sigma_samples` on each side
    ///
    /// Template edges are neither renormalized nor clipped to zero.
    pub fn resolve_samples(&self) -> Result<Vec<Complex64>, WaveformError> {
        match self {
            Waveform::Sampled { samples } => Ok(samples
                .iter()
                .map(|&(re, im)| Complex64::new(re, im))
                .collect()),
            Waveform::Parametric {
                template,
                duration_samples,
                params,
            } => {
                let duration = *duration_samples;
                let required = |key: &str| {
                    params.get(key).copied().ok_or_else(|| {
                        WaveformError::InvalidParams(format!(
                            "template {} requires parameter {key:?}",
                            template.name()
                        ))
                    })
                };
                let amp = required("amp")?;
                if !(0.0..=1.0).contains(&amp) {
                    return Err(WaveformError::InvalidParams(format!(
                        "amp must lie in [0, 1], got {amp}"
                    )));
                }
                let phase = required("phase")?;
                let carrier = Complex64::from_polar(amp, phase);
                let center = (duration as f64 - 1.0) / 2.0;
                let envelope: Vec<Complex64> = match template {
                    Template::Constant => (0..duration).map(|_| carrier).collect(),
                    Template::Gaussian => {
                        let sigma = required("sigma_samples")?;
                        (0..duration)
                            .map(|n| {
                                let x = n as f64 - center;
                                carrier * (-x * x / (2.0 * sigma * sigma)).exp()
                            })
                            .collect()
                    }
                    Template::GaussianSquare => {
                        let sigma = required("sigma_samples")?;
                        let half_width = required("width_samples")? / 2.0;
                        (0..duration)
                            .map(|n| {
                                let x = (n as f64 - center).abs() - half_width;
                                if x <= 0.0 {
                                    carrier
                                } else {
                                    carrier * (-x * x / (2.0 * sigma * sigma)).exp()
                                }
                            })
                            .collect()
                    }
                };
                Ok(envelope)
            }
        }
    }

    /// The resolved form of this waveform as a `Sampled` waveform.
    pub fn resolved(&self) -> Result<Waveform, WaveformError> {
        match self {
            Waveform::Sampled { .. } => Ok(self.clone()),
            Waveform::Parametric { .. } => {
                let samples = self.resolve_samples()?;
                Ok(Waveform::Sampled {
                    samples: samples.into_iter().map(|c| (c.re, c.im)).collect(),
                })
            }
        }
    }

    /// Largest envelope magnitude after resolution.
    pub fn peak_magnitude(&self) -> Result<f64, WaveformError> {
        Ok(self
            .resolve_samples()?
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max))
    }
}

/// Real-valued output signal of playing `waveform` in `frame`, starting at
/// absolute sample `start_sample` on a port with sample period `dt_s`:
///
/// `out[n] = Re[ a[n] * e^{i*(2*pi*f*(start_sample + n)*dt + phase)} ]`
///
/// where `f` and `phase` are the frame's carrier frequency and phase.
pub fn render_signal(
    waveform: &Waveform,
    frame: &Frame,
    start_sample: u64,
    dt_s: f64,
) -> Result<Vec<f64>, WaveformError> {
    let envelope = waveform.resolve_samples()?;
    Ok(envelope
        .iter()
        .enumerate()
        .map(|(n, a)| {
            let t = (start_sample + n as u64) as f64 * dt_s;
            let angle = TAU * frame.frequency_hz * t + frame.phase_rad;
            (a * Complex64::from_polar(1.0, angle)).re
        })
        .collect())
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum WaveformError {
    #[error("sample {index} has magnitude {magnitude} > 1")]
    AmplitudeOutOfRange { index: usize, magnitude: f64 },
    #[error("waveform must contain at least one sample")]
    Empty,
    #[error("invalid waveform parameters: {0}")]
    InvalidParams(String),
}
