//! Canonical in-memory representation of multi-modal gesture datasets.
//!
//! A [`Dataset`] is a flat list of trials, one per repetition of one gesture
//! by one subject (optionally in one limb position), each carrying one or
//! more synchronized signal streams. Datasets are immutable after load and
//! safe to share across worker threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sensor modality of a signal stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    /// Surface electromyography (electrical muscle activity).
    Emg,
    /// Accelerometer axes; at rest these read the gravity vector.
    Acc,
}

impl Modality {
    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Emg => "emg",
            Modality::Acc => "acc",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One multi-channel recording: `samples[channel][n]`.
///
/// All channels of a stream share the same length and sample rate. EMG is in
/// millivolt-equivalent arbitrary units, ACC in g.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalStream {
    pub modality: Modality,
    pub sample_rate_hz: f64,
    pub samples: Vec<Vec<f64>>,
}

impl SignalStream {
    pub fn new(modality: Modality, sample_rate_hz: f64, samples: Vec<Vec<f64>>) -> Self {
        Self { modality, sample_rate_hz, samples }
    }

    pub fn channel_count(&self) -> usize {
        self.samples.len()
    }

    /// Samples per channel (0 for a channel-less stream).
    pub fn len(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sample_rate_hz
    }
}

/// Unique identity of a trial within a dataset.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct TrialKey {
    pub subject: u32,
    pub gesture: u32,
    /// `None` when the recording protocol did not label limb positions.
    pub position: Option<u32>,
    pub repetition: u32,
}

impl fmt::Display for TrialKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.position {
            Some(p) => write!(
                f,
                "s{:03} g{:03} p{:03} r{:03}",
                self.subject, self.gesture, p, self.repetition
            ),
            None => write!(
                f,
                "s{:03} g{:03} pnone r{:03}",
                self.subject, self.gesture, self.repetition
            ),
        }
    }
}

/// One repetition of one gesture by one subject.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub subject: u32,
    pub gesture: u32,
    pub position: Option<u32>,
    pub repetition: u32,
    pub streams: Vec<SignalStream>,
}

impl TrialRecord {
    pub fn key(&self) -> TrialKey {
        TrialKey {
            subject: self.subject,
            gesture: self.gesture,
            position: self.position,
            repetition: self.repetition,
        }
    }

    /// The single stream of the given modality.
    ///
    /// Errors when the trial has no such stream or more than one; the bundle
    /// conversion contract requires same-modality sensors to be merged into
    /// one multi-channel stream.
    pub fn stream(&self, modality: Modality) -> Result<&SignalStream> {
        let mut found = None;
        for s in &self.streams {
            if s.modality == modality {
                if found.is_some() {
                    return Err(Error::Feature(format!(
                        "trial {} has more than one {} stream; merge channels during conversion",
                        self.key(),
                        modality
                    )));
                }
                found = Some(s);
            }
        }
        found.ok_or_else(|| {
            Error::Feature(format!("trial {} has no {} stream", self.key(), modality))
        })
    }
}

/// A named multi-modal gesture dataset.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub name: String,
    pub trials: Vec<TrialRecord>,
    pub gesture_names: BTreeMap<u32, String>,
    pub position_names: BTreeMap<u32, String>,
}

/// One broken invariant found by [`Dataset::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub trial: Option<TrialKey>,
    pub reason: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.trial {
            Some(key) => write!(f, "[{key}] {}", self.reason),
            None => f.write_str(&self.reason),
        }
    }
}

impl Dataset {
    /// Sorted unique subject ids present in the trials.
    pub fn subject_ids(&self) -> Vec<u32> {
        let set: BTreeSet<u32> = self.trials.iter().map(|t| t.subject).collect();
        set.into_iter().collect()
    }

    /// Gesture ids present in the trials.
    pub fn gesture_ids(&self) -> BTreeSet<u32> {
        self.trials.iter().map(|t| t.gesture).collect()
    }

    /// Position ids present in the trials (empty when positions are absent).
    pub fn position_ids(&self) -> BTreeSet<u32> {
        self.trials.iter().filter_map(|t| t.position).collect()
    }

    /// True when every trial carries a position label.
    pub fn has_positions(&self) -> bool {
        !self.trials.is_empty() && self.trials.iter().all(|t| t.position.is_some())
    }

    /// Check every structural invariant; one entry per violation.
    ///
    /// Violations are data, not errors: an empty list means the dataset is
    /// well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen: BTreeSet<TrialKey> = BTreeSet::new();

        for trial in &self.trials {
            let key = trial.key();
            if !seen.insert(key) {
                out.push(Violation {
                    trial: Some(key),
                    reason: "duplicate (subject, gesture, position, repetition) key".into(),
                });
            }
            if trial.repetition < 1 {
                out.push(Violation {
                    trial: Some(key),
                    reason: "repetition must be >= 1".into(),
                });
            }
            if trial.streams.is_empty() {
                out.push(Violation { trial: Some(key), reason: "trial has no streams".into() });
                continue;
            }
            for (si, stream) in trial.streams.iter().enumerate() {
                if stream.sample_rate_hz <= 0.0 || !stream.sample_rate_hz.is_finite() {
                    out.push(Violation {
                        trial: Some(key),
                        reason: format!(
                            "stream {si} ({}) has non-positive sample rate",
                            stream.modality
                        ),
                    });
                }
                if stream.channel_count() == 0 {
                    out.push(Violation {
                        trial: Some(key),
                        reason: format!("stream {si} ({}) has no channels", stream.modality),
                    });
                    continue;
                }
                let n = stream.samples[0].len();
                if n == 0 {
                    out.push(Violation {
                        trial: Some(key),
                        reason: format!("stream {si} ({}) is empty", stream.modality),
                    });
                }
                if stream.samples.iter().any(|ch| ch.len() != n) {
                    out.push(Violation {
                        trial: Some(key),
                        reason: format!(
                            "stream {si} ({}) has channels of unequal length",
                            stream.modality
                        ),
                    });
                }
                if stream.samples.iter().flatten().any(|v| !v.is_finite()) {
                    out.push(Violation {
                        trial: Some(key),
                        reason: format!(
                            "stream {si} ({}) contains non-finite samples",
                            stream.modality
                        ),
                    });
                }
            }
            // All streams must span the same wall-clock duration within one
            // sample period of the slowest stream.
            let valid: Vec<&SignalStream> = trial
                .streams
                .iter()
                .filter(|s| s.sample_rate_hz > 0.0 && !s.is_empty())
                .collect();
            if valid.len() > 1 {
                let slowest = valid
                    .iter()
                    .map(|s| s.sample_rate_hz)
                    .fold(f64::INFINITY, f64::min);
                let durations: Vec<f64> = valid.iter().map(|s| s.duration_s()).collect();
                let spread = durations.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
                    - durations.iter().fold(f64::INFINITY, |a, &b| a.min(b));
                if spread > 1.0 / slowest + 1e-9 {
                    out.push(Violation {
                        trial: Some(key),
                        reason: format!(
                            "stream durations differ by {spread:.6} s, more than one sample \
                             period of the slowest stream"
                        ),
                    });
                }
            }
            if !self.gesture_names.contains_key(&trial.gesture) {
                out.push(Violation {
                    trial: Some(key),
                    reason: format!("gesture id {} has no name entry", trial.gesture),
                });
            }
            if let Some(p) = trial.position {
                if !self.position_names.contains_key(&p) {
                    out.push(Violation {
                        trial: Some(key),
                        reason: format!("position id {p} has no name entry"),
                    });
                }
            }
        }
        out
    }

    /// Restrict the dataset to the trials whose gesture is in `subset`.
    ///
    /// The gesture/position name maps are restricted to the ids still present
    /// in the filtered trials.
    pub fn filter_subset(&self, subset: &GestureSubset) -> Result<Dataset> {
        if subset.gesture_ids.is_empty() {
            return Err(Error::Bundle(format!("gesture subset '{}' is empty", subset.name)));
        }
        let present = self.gesture_ids();
        for id in &subset.gesture_ids {
            if !present.contains(id) {
                return Err(Error::Bundle(format!(
                    "gesture subset '{}' references gesture id {id} absent from dataset '{}'",
                    subset.name, self.name
                )));
            }
        }
        let trials: Vec<TrialRecord> = self
            .trials
            .iter()
            .filter(|t| subset.gesture_ids.contains(&t.gesture))
            .cloned()
            .collect();
        let gestures: BTreeSet<u32> = trials.iter().map(|t| t.gesture).collect();
        let positions: BTreeSet<u32> = trials.iter().filter_map(|t| t.position).collect();
        Ok(Dataset {
            name: self.name.clone(),
            trials,
            gesture_names: self
                .gesture_names
                .iter()
                .filter(|(id, _)| gestures.contains(id))
                .map(|(id, n)| (*id, n.clone()))
                .collect(),
            position_names: self
                .position_names
                .iter()
                .filter(|(id, _)| positions.contains(id))
                .map(|(id, n)| (*id, n.clone()))
                .collect(),
        })
    }
}

/// A named set of gesture ids used to carve evaluation subsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureSubset {
    pub name: String,
    pub gesture_ids: BTreeSet<u32>,
}

impl GestureSubset {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Bundle(format!("cannot read gesture subset {}: {e}", path.display()))
        })?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(modality: Modality, fs: f64, channels: usize, n: usize) -> SignalStream {
        SignalStream::new(modality, fs, vec![vec![0.0; n]; channels])
    }

    fn trial(subject: u32, gesture: u32, position: Option<u32>, repetition: u32) -> TrialRecord {
        TrialRecord {
            subject,
            gesture,
            position,
            repetition,
            streams: vec![stream(Modality::Emg, 1000.0, 2, 1000)],
        }
    }

    fn toy_dataset() -> Dataset {
        let mut gesture_names = BTreeMap::new();
        for g in 1..=4 {
            gesture_names.insert(g, format!("G{g:02}"));
        }
        Dataset {
            name: "toy".into(),
            trials: (1..=4).flat_map(|g| (1..=2).map(move |r| trial(1, g, None, r))).collect(),
            gesture_names,
            position_names: BTreeMap::new(),
        }
    }

    #[test]
    fn validate_accepts_well_formed() {
        assert!(toy_dataset().validate().is_empty());
    }

    #[test]
    fn validate_flags_duplicate_key() {
        let mut d = toy_dataset();
        d.trials.push(trial(1, 1, None, 1));
        let violations = d.validate();
        assert_eq!(violations.len(), 1);
        assert!(violations[0].reason.contains("duplicate"));
    }

    #[test]
    fn validate_flags_non_finite() {
        let mut d = toy_dataset();
        d.trials[0].streams[0].samples[1][3] = f64::NAN;
        let violations = d.validate();
        assert_eq!(violations.len(), 1);
        assert!(violations[0].reason.contains("non-finite"));
    }

    #[test]
    fn validate_flags_duration_mismatch() {
        let mut d = toy_dataset();
        // 1000 samples @ 1 kHz vs 80 @ 100 Hz: 0.2 s apart, slow period 10 ms.
        d.trials[0].streams.push(stream(Modality::Acc, 100.0, 3, 80));
        let violations = d.validate();
        assert_eq!(violations.len(), 1);
        assert!(violations[0].reason.contains("durations differ"));
    }

    #[test]
    fn filter_subset_restricts_trials_and_names() {
        let d = toy_dataset();
        let s = GestureSubset { name: "half".into(), gesture_ids: [1, 3].into() };
        let f = d.filter_subset(&s).unwrap();
        assert_eq!(f.trials.len(), 4);
        assert_eq!(f.gesture_ids(), [1, 3].into());
        assert_eq!(f.gesture_names.len(), 2);
        assert_eq!(f.name, d.name);
    }

    #[test]
    fn filter_subset_full_set_is_identity() {
        let d = toy_dataset();
        let s = GestureSubset { name: "all".into(), gesture_ids: d.gesture_ids() };
        assert_eq!(d.filter_subset(&s).unwrap(), d);
    }

    #[test]
    fn filter_subset_is_idempotent() {
        let d = toy_dataset();
        let s = GestureSubset { name: "half".into(), gesture_ids: [2, 4].into() };
        let once = d.filter_subset(&s).unwrap();
        let twice = once.filter_subset(&s).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn filter_subset_rejects_unknown_gesture() {
        let d = toy_dataset();
        let s = GestureSubset { name: "bad".into(), gesture_ids: [1, 99].into() };
        assert!(d.filter_subset(&s).is_err());
    }

    proptest::proptest! {
        /// Trial count after filtering equals the number of trials whose
        /// gesture is in the subset.
        #[test]
        fn filter_subset_count_law(mask in 1u8..15) {
            let d = toy_dataset();
            let ids: std::collections::BTreeSet<u32> =
                (1..=4).filter(|g| mask & (1 << (g - 1)) != 0).collect();
            let expected =
                d.trials.iter().filter(|t| ids.contains(&t.gesture)).count();
            let s = GestureSubset { name: "mask".into(), gesture_ids: ids };
            let f = d.filter_subset(&s).unwrap();
            proptest::prop_assert_eq!(f.trials.len(), expected);
        }
    }
}
