//! Segmentation of trials into overlapping analysis windows.

use serde::{Deserialize, Serialize};

use crate::dataset::{Modality, SignalStream, TrialKey, TrialRecord};
use crate::error::{Error, Result};

/// Window length and hop in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub length_ms: f64,
    pub increment_ms: f64,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self { length_ms: 200.0, increment_ms: 100.0 }
    }
}

impl WindowSpec {
    pub fn new(length_ms: f64, increment_ms: f64) -> Self {
        Self { length_ms, increment_ms }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length_ms.is_finite() && self.length_ms > 0.0) {
            return Err(Error::Window("window length must be positive".into()));
        }
        if !(self.increment_ms.is_finite() && self.increment_ms > 0.0) {
            return Err(Error::Window("window increment must be positive".into()));
        }
        if self.increment_ms > self.length_ms {
            return Err(Error::Window(format!(
                "window increment {} ms exceeds length {} ms",
                self.increment_ms, self.length_ms
            )));
        }
        Ok(())
    }

    /// Window length in samples at the given rate: `floor(ms * fs / 1000)`.
    pub fn length_samples(&self, sample_rate_hz: f64) -> usize {
        (self.length_ms / 1000.0 * sample_rate_hz).floor() as usize
    }

    /// Hop in samples at the given rate: `floor(ms * fs / 1000)`.
    pub fn increment_samples(&self, sample_rate_hz: f64) -> usize {
        (self.increment_ms / 1000.0 * sample_rate_hz).floor() as usize
    }

    /// Number of windows for a stream of `n` samples, or an error when the
    /// stream is shorter than one window.
    pub fn window_count(&self, n: usize, sample_rate_hz: f64) -> Result<usize> {
        let length = self.length_samples(sample_rate_hz);
        let increment = self.increment_samples(sample_rate_hz);
        if length < 1 {
            return Err(Error::Window(format!(
                "window length {} ms is shorter than one sample at {sample_rate_hz} Hz",
                self.length_ms
            )));
        }
        if increment < 1 {
            return Err(Error::Window(format!(
                "window increment {} ms is shorter than one sample at {sample_rate_hz} Hz",
                self.increment_ms
            )));
        }
        if n < length {
            return Err(Error::Window(format!(
                "stream of {n} samples is shorter than one {length}-sample window"
            )));
        }
        Ok((n - length) / increment + 1)
    }
}

/// One analysis window cut from one stream of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub trial: TrialKey,
    pub modality: Modality,
    /// Index within the trial; windows of different modalities pair by index.
    pub index: usize,
    pub start_time_s: f64,
    /// Channel-major slice: `samples[channel][0..length]`.
    pub samples: Vec<Vec<f64>>,
}

/// Cut one stream into overlapping windows.
///
/// Window `k` starts at sample `k * increment_samples`; the count equals
/// `floor((n - length) / increment) + 1`.
pub fn segment_stream(
    stream: &SignalStream,
    spec: &WindowSpec,
    trial: TrialKey,
) -> Result<Vec<Window>> {
    spec.validate()?;
    let fs = stream.sample_rate_hz;
    let n = stream.len();
    let count = spec.window_count(n, fs)?;
    let length = spec.length_samples(fs);
    let increment = spec.increment_samples(fs);

    let mut windows = Vec::with_capacity(count);
    for k in 0..count {
        let start = k * increment;
        let samples: Vec<Vec<f64>> =
            stream.samples.iter().map(|ch| ch[start..start + length].to_vec()).collect();
        windows.push(Window {
            trial,
            modality: stream.modality,
            index: k,
            start_time_s: start as f64 / fs,
            samples,
        });
    }
    Ok(windows)
}

/// Segment every stream of a trial; one window list per stream, in stream
/// order. Lists of different modalities pair by window index.
pub fn segment_trial(trial: &TrialRecord, spec: &WindowSpec) -> Result<Vec<Vec<Window>>> {
    trial.streams.iter().map(|s| segment_stream(s, spec, trial.key())).collect()
}
