//! Stream conditioning: notch + bandpass for EMG, lowpass for ACC.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Modality, SignalStream, TrialRecord};
use crate::error::{Error, Result};
use crate::filter::{design_filter, filter_stream, FilterSpec};

fn default_notch_hz() -> f64 {
    60.0
}
fn default_notch_q() -> f64 {
    30.0
}
fn default_bandpass_low() -> f64 {
    20.0
}
fn default_bandpass_high() -> f64 {
    450.0
}
fn default_bandpass_order() -> u32 {
    4
}
fn default_lowpass_cutoff() -> f64 {
    1.0
}
fn default_lowpass_order() -> u32 {
    2
}
fn default_zero_phase() -> bool {
    true
}

/// Filtering parameters applied by [`preprocess_trial`].
///
/// All values are echoed into downstream output headers so a report is
/// reproducible from its own metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    /// Power-line notch center: 50 or 60 Hz.
    #[serde(default = "default_notch_hz")]
    pub notch_hz: f64,
    #[serde(default = "default_notch_q")]
    pub notch_q: f64,
    #[serde(default = "default_bandpass_low")]
    pub bandpass_low_hz: f64,
    #[serde(default = "default_bandpass_high")]
    pub bandpass_high_hz: f64,
    #[serde(default = "default_bandpass_order")]
    pub bandpass_order: u32,
    #[serde(default = "default_lowpass_cutoff")]
    pub lowpass_cutoff_hz: f64,
    #[serde(default = "default_lowpass_order")]
    pub lowpass_order: u32,
    /// Forward-backward filtering (offline default); set false for a causal
    /// single pass when the pipeline feeds a streaming consumer.
    #[serde(default = "default_zero_phase")]
    pub zero_phase: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            notch_hz: default_notch_hz(),
            notch_q: default_notch_q(),
            bandpass_low_hz: default_bandpass_low(),
            bandpass_high_hz: default_bandpass_high(),
            bandpass_order: default_bandpass_order(),
            lowpass_cutoff_hz: default_lowpass_cutoff(),
            lowpass_order: default_lowpass_order(),
            zero_phase: default_zero_phase(),
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.notch_hz != 50.0 && self.notch_hz != 60.0 {
            return Err(Error::Config(format!(
                "notch frequency must be 50 or 60 Hz, got {}",
                self.notch_hz
            )));
        }
        if self.notch_q <= 0.0 {
            return Err(Error::Config("notch Q must be positive".into()));
        }
        Ok(())
    }

    /// Bandpass high corner after the Nyquist clamp: when the configured
    /// corner reaches Nyquist it is pulled down to `0.45 * fs` so arbitrary
    /// sample rates stay designable.
    pub fn effective_bandpass_high(&self, sample_rate_hz: f64) -> f64 {
        if self.bandpass_high_hz >= sample_rate_hz / 2.0 {
            0.45 * sample_rate_hz
        } else {
            self.bandpass_high_hz
        }
    }
}

/// Filter one stream according to its modality.
pub fn preprocess_stream(stream: &SignalStream, cfg: &PreprocessConfig) -> Result<SignalStream> {
    match stream.modality {
        Modality::Emg => {
            let fs = stream.sample_rate_hz;
            let notch = design_filter(&FilterSpec::notch(cfg.notch_hz, cfg.notch_q, fs))?;
            let bandpass = design_filter(&FilterSpec::bandpass(
                cfg.bandpass_low_hz,
                cfg.effective_bandpass_high(fs),
                cfg.bandpass_order,
                fs,
            ))?;
            let notched = filter_stream(&notch, stream, cfg.zero_phase)?;
            filter_stream(&bandpass, &notched, cfg.zero_phase)
        }
        Modality::Acc => {
            let lowpass = design_filter(&FilterSpec::lowpass(
                cfg.lowpass_cutoff_hz,
                cfg.lowpass_order,
                stream.sample_rate_hz,
            ))?;
            filter_stream(&lowpass, stream, cfg.zero_phase)
        }
    }
}

/// Filter every stream of a trial; labels are unchanged.
pub fn preprocess_trial(trial: &TrialRecord, cfg: &PreprocessConfig) -> Result<TrialRecord> {
    cfg.validate()?;
    let streams = trial
        .streams
        .iter()
        .map(|s| preprocess_stream(s, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialRecord {
        subject: trial.subject,
        gesture: trial.gesture,
        position: trial.position,
        repetition: trial.repetition,
        streams,
    })
}

/// Filter every trial of a dataset, in parallel; trial order is preserved
/// and the result is independent of the parallel schedule.
pub fn preprocess_dataset(dataset: &Dataset, cfg: &PreprocessConfig) -> Result<Dataset> {
    cfg.validate()?;
    let trials = dataset
        .trials
        .par_iter()
        .map(|t| preprocess_trial(t, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        name: dataset.name.clone(),
        trials,
        gesture_names: dataset.gesture_names.clone(),
        position_names: dataset.position_names.clone(),
    })
}
