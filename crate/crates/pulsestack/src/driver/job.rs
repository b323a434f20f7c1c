// Copyright 2026 PulseStack Contributors
// SPDX-License-Identifier: Apache-2.0

//! Job lifecycle types: status, results, and the measurement histogram.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Counts per classical bitstring. Bit positions follow result indices,
/// index 0 leftmost; counts always sum to the number of shots.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Histogram {
    counts: BTreeMap<String, u64>,
}

impl Histogram {
    pub fn from_counts(counts: BTreeMap<String, u64>) -> Self {
        Histogram { counts }
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn get(&self, bitstring: &str) -> u64 {
        self.counts.get(bitstring).copied().unwrap_or(0)
    }

    /// Pad every bitstring on the right with `'0'` up to `width` bits.
    /// Positions beyond the measured results read as zero.
    pub fn widened(self, width: usize) -> Histogram {
        let mut counts = BTreeMap::new();
        for (key, count) in self.counts {
            let mut padded = key;
            while padded.len() < width {
                padded.push('0');
            }
            *counts.entry(padded).or_insert(0) += count;
        }
        Histogram { counts }
    }
}

impl fmt::Display for Histogram {
    /// Machine-parsable `bitstring count` lines, sorted by bitstring.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (bitstring, count) in &self.counts {
            writeln!(f, "{bitstring} {count}")?;
        }
        Ok(())
    }
}

/// Lifecycle state of a submitted job.
///
/// Valid transitions: `Queued -> Running -> Done | Failed` and
/// `Queued -> Cancelled`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
    Cancelled,
}

impl JobStatus {
    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            JobStatus::Done | JobStatus::Failed | JobStatus::Cancelled
        )
    }

    /// Whether `self -> next` is an allowed transition.
    pub fn can_transition_to(self, next: JobStatus) -> bool {
        use JobStatus::*;
        matches!(
            (self, next),
            (Queued, Running) | (Running, Done) | (Running, Failed) | (Queued, Cancelled)
        )
    }
}

impl fmt::Display for JobStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            JobStatus::Queued => "queued",
            JobStatus::Running => "running",
            JobStatus::Done => "done",
            JobStatus::Failed => "failed",
            JobStatus::Cancelled => "cancelled",
        };
        f.write_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widening_pads_right() {
        let mut counts = BTreeMap::new();
        counts.insert("1".to_string(), 3);
        counts.insert("0".to_string(), 2);
        let widened = Histogram::from_counts(counts).widened(3);
        assert_eq!(widened.get("100"), 3);
        assert_eq!(widened.get("000"), 2);
        assert_eq!(widened.total(), 5);
    }

    #[test]
    fn transition_relation() {
        use JobStatus::*;
        assert!(Queued.can_transition_to(Running));
        assert!(Queued.can_transition_to(Cancelled));
        assert!(Running.can_transition_to(Done));
        assert!(Running.can_transition_to(Failed));
        assert!(!Running.can_transition_to(Cancelled));
        assert!(!Done.can_transition_to(Running));
        assert!(!Cancelled.can_transition_to(Running));
    }
}
