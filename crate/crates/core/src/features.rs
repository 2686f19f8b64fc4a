//! Per-window feature extraction.
//!
//! Four feature sets: the classic EMG time-domain four (mean absolute
//! value, zero crossings, slope sign changes, waveform length), the EMG
//! time-domain power spectral descriptors (six moment-based descriptors
//! fused across a log-scaled copy of the window), and the per-axis ACC
//! median and RMS.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Modality;
use crate::error::{Error, Result};
use crate::window::Window;

/// Version tag for the descriptor definition below; echoed into every
/// output header so regenerated fixtures are traceable.
pub const TDPSD_DEFINITION_VERSION: &str = "tdpsd-v1";

/// Floor added inside logs and denominators so degenerate (e.g. all-zero)
/// windows still produce finite descriptors.
pub const TDPSD_EPSILON: f64 = 1e-10;

const TDPSD_LAMBDA: f64 = 0.1;

/// One of the four feature sets. TD/TDPSD expect EMG windows, MED/RMS
/// expect ACC windows (per-axis, axes counted as channels).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureSetKind {
    EmgTd,
    EmgTdpsd,
    AccMed,
    AccRms,
}

impl FeatureSetKind {
    pub const ALL: [FeatureSetKind; 4] =
        [FeatureSetKind::EmgTd, FeatureSetKind::EmgTdpsd, FeatureSetKind::AccMed, FeatureSetKind::AccRms];

    /// Modality this feature set is defined for.
    pub fn modality(self) -> Modality {
        match self {
            FeatureSetKind::EmgTd | FeatureSetKind::EmgTdpsd => Modality::Emg,
            FeatureSetKind::AccMed | FeatureSetKind::AccRms => Modality::Acc,
        }
    }

    /// Features per channel: 4 (TD), 6 (TDPSD), 1 (MED), 1 (RMS).
    pub fn per_channel_dim(self) -> usize {
        match self {
            FeatureSetKind::EmgTd => 4,
            FeatureSetKind::EmgTdpsd => 6,
            FeatureSetKind::AccMed | FeatureSetKind::AccRms => 1,
        }
    }

    pub fn feature_names(self) -> &'static [&'static str] {
        match self {
            FeatureSetKind::EmgTd => &["mav", "zc", "ssc", "wl"],
            FeatureSetKind::EmgTdpsd => {
                &["tdpsd1", "tdpsd2", "tdpsd3", "tdpsd4", "tdpsd5", "tdpsd6"]
            }
            FeatureSetKind::AccMed => &["med"],
            FeatureSetKind::AccRms => &["rms"],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSetKind::EmgTd => "emg-td",
            FeatureSetKind::EmgTdpsd => "emg-tdpsd",
            FeatureSetKind::AccMed => "acc-med",
            FeatureSetKind::AccRms => "acc-rms",
        }
    }

    /// Short label used in report tables.
    pub fn short_label(self) -> &'static str {
        match self {
            FeatureSetKind::EmgTd => "TD",
            FeatureSetKind::EmgTdpsd => "TDPSD",
            FeatureSetKind::AccMed => "MED",
            FeatureSetKind::AccRms => "RMS",
        }
    }
}

impl fmt::Display for FeatureSetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureSetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "emg-td" => Ok(FeatureSetKind::EmgTd),
            "emg-tdpsd" => Ok(FeatureSetKind::EmgTdpsd),
            "acc-med" => Ok(FeatureSetKind::AccMed),
            "acc-rms" => Ok(FeatureSetKind::AccRms),
            other => Err(Error::Config(format!(
                "unknown feature set '{other}' (expected emg-td, emg-tdpsd, acc-med, acc-rms)"
            ))),
        }
    }
}

/// Mean absolute value: `(1/N) sum |x[n]|`.
pub fn mav(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::Feature("mav of an empty window".into()));
    }
    Ok(x.iter().map(|v| v.abs()).sum::<f64>() / x.len() as f64)
}

/// Count sign changes between consecutive samples whose jump is at least
/// `epsilon`. Zero counts as its own sign, so a touch of exactly zero
/// between two positive samples registers two changes.
pub fn zero_crossings(x: &[f64], epsilon: f64) -> Result<usize> {
    if x.len() < 2 {
        return Err(Error::Feature("zero crossings need at least 2 samples".into()));
    }
    Ok(x.windows(2)
        .filter(|w| w[0].signum() != w[1].signum() && (w[0] - w[1]).abs() >= epsilon)
        .count())
}

/// Count local extrema whose smaller adjacent step reaches `epsilon`:
/// `(x[n]-x[n-1])*(x[n]-x[n+1]) > 0` with
/// `max(|x[n]-x[n-1]|, |x[n]-x[n+1]|) >= epsilon`.
pub fn slope_sign_changes(x: &[f64], epsilon: f64) -> Result<usize> {
    if x.len() < 3 {
        return Err(Error::Feature("slope sign changes need at least 3 samples".into()));
    }
    Ok((1..x.len() - 1)
        .filter(|&n| {
            let left = x[n] - x[n - 1];
            let right = x[n] - x[n + 1];
            left * right > 0.0 && left.abs().max(right.abs()) >= epsilon
        })
        .count())
}

/// Waveform length: `sum |x[n+1] - x[n]|`.
pub fn waveform_length(x: &[f64]) -> Result<f64> {
    if x.len() < 2 {
        return Err(Error::Feature("waveform length needs at least 2 samples".into()));
    }
    Ok(x.windows(2).map(|w| (w[1] - w[0]).abs()).sum())
}

/// Root moments and descriptor set for one signal; the building block of
/// [`tdpsd`].
fn tdpsd_descriptors(x: &[f64]) -> [f64; 6] {
    let eps = TDPSD_EPSILON;
    let n = x.len();
    let d1: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let d2: Vec<f64> = d1.windows(2).map(|w| w[1] - w[0]).collect();
    debug_assert!(n >= 3 && !d2.is_empty());

    let root_power = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let m0 = root_power(x);
    let m2 = root_power(&d1);
    let m4 = root_power(&d2);

    // Power normalization tempers amplitude sensitivity.
    let hat = |m: f64| m.powf(TDPSD_LAMBDA) / TDPSD_LAMBDA;
    let h0 = hat(m0);
    let h2 = hat(m2);
    let h4 = hat(m4);

    let s1: f64 = d1.iter().map(|v| v.abs()).sum();
    let s2: f64 = d2.iter().map(|v| v.abs()).sum();

    [
        (h0 + eps).ln(),
        ((h0 - h2).abs() + eps).ln(),
        ((h0 - h4).abs() + eps).ln(),
        (h0 / (((h0 - h2) * (h0 - h4)).abs() + eps).sqrt() + eps).ln(),
        (h2 / (h0 * h4 + eps).sqrt() + eps).ln(),
        ((s1 + eps) / (s2 + eps)).ln(),
    ]
}

/// Six time-domain power spectral descriptors of a window.
///
/// The descriptor set is computed on the window and on a log-scaled copy
/// `y[n] = ln(x[n]^2 + eps)`, then fused per descriptor as
/// `-2ab / (a^2 + b^2 + eps)`, which keeps every output in [-1, 1]. The
/// epsilon floor makes degenerate inputs (for example all-zero windows)
/// produce finite values.
pub fn tdpsd(x: &[f64]) -> Result<[f64; 6]> {
    if x.len() < 3 {
        return Err(Error::Feature("tdpsd needs at least 3 samples".into()));
    }
    let fx = tdpsd_descriptors(x);
    let y: Vec<f64> = x.iter().map(|v| (v * v + TDPSD_EPSILON).ln()).collect();
    let fy = tdpsd_descriptors(&y);
    let mut out = [0.0; 6];
    for i in 0..6 {
        out[i] = -2.0 * fx[i] * fy[i] / (fx[i] * fx[i] + fy[i] * fy[i] + TDPSD_EPSILON);
    }
    Ok(out)
}

/// Median (middle order statistic; mean of the two middle values for even
/// length).
pub fn acc_median(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::Feature("median of an empty window".into()));
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        Ok(sorted[n / 2])
    } else {
        Ok((sorted[n / 2 - 1] + sorted[n / 2]) / 2.0)
    }
}

/// Root mean square: `sqrt((1/N) sum x[n]^2)`.
pub fn acc_rms(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::Feature("rms of an empty window".into()));
    }
    Ok((x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt())
}

/// Label provenance of one feature row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RowLabels {
    pub subject: u32,
    pub gesture: u32,
    pub position: Option<u32>,
    pub repetition: u32,
    /// Window index within the trial; rows of different feature sets pair
    /// by (trial, window_index).
    pub window_index: usize,
    pub start_time_s: f64,
}

/// One labeled feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub labels: RowLabels,
    pub values: Vec<f64>,
}

/// A homogeneous set of labeled feature vectors.
///
/// Row order is stable and deterministic: trials in dataset order, windows
/// in index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub kind: FeatureSetKind,
    /// Column descriptors, channel-major: `ch{c}_{feature}`.
    pub columns: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

impl FeatureMatrix {
    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Sorted unique subject ids.
    pub fn subjects(&self) -> Vec<u32> {
        let mut s: Vec<u32> = self.rows.iter().map(|r| r.labels.subject).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// True when every row carries a position label.
    pub fn has_positions(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.labels.position.is_some())
    }

    pub fn column_names(kind: FeatureSetKind, channels: usize) -> Vec<String> {
        let mut columns = Vec::with_capacity(channels * kind.per_channel_dim());
        for c in 0..channels {
            for name in kind.feature_names() {
                columns.push(format!("ch{c}_{name}"));
            }
        }
        columns
    }
}

/// Extraction options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractOptions {
    /// Dead-zone threshold for zero crossings and slope sign changes.
    pub epsilon: f64,
    /// Allow extracting a feature set from the other modality.
    pub allow_modality_mismatch: bool,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self { epsilon: 0.0, allow_modality_mismatch: false }
    }
}

fn extract_channel(kind: FeatureSetKind, channel: &[f64], epsilon: f64, out: &mut Vec<f64>) -> Result<()> {
    match kind {
        FeatureSetKind::EmgTd => {
            out.push(mav(channel)?);
            out.push(zero_crossings(channel, epsilon)? as f64);
            out.push(slope_sign_changes(channel, epsilon)? as f64);
            out.push(waveform_length(channel)?);
        }
        FeatureSetKind::EmgTdpsd => out.extend_from_slice(&tdpsd(channel)?),
        FeatureSetKind::AccMed => out.push(acc_median(channel)?),
        FeatureSetKind::AccRms => out.push(acc_rms(channel)?),
    }
    Ok(())
}

/// Extract one feature vector per window, channel-major.
///
/// Windows must be homogeneous in modality and channel count, and the
/// modality must match the feature set unless
/// [`ExtractOptions::allow_modality_mismatch`] is set.
pub fn extract(windows: &[Window], kind: FeatureSetKind, opts: &ExtractOptions) -> Result<FeatureMatrix> {
    let first = windows
        .first()
        .ok_or_else(|| Error::Feature("cannot extract features from an empty window list".into()))?;
    let modality = first.modality;
    let channels = first.samples.len();

    if modality != kind.modality() && !opts.allow_modality_mismatch {
        return Err(Error::Feature(format!(
            "feature set {kind} expects {} windows but got {modality}",
            kind.modality()
        )));
    }

    let mut rows = Vec::with_capacity(windows.len());
    for w in windows {
        if w.modality != modality {
            return Err(Error::Feature("windows mix modalities".into()));
        }
        if w.samples.len() != channels {
            return Err(Error::Feature(format!(
                "heterogeneous channel counts: {} vs {channels}",
                w.samples.len()
            )));
        }
        let mut values = Vec::with_capacity(channels * kind.per_channel_dim());
        for channel in &w.samples {
            extract_channel(kind, channel, opts.epsilon, &mut values)?;
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Feature(format!(
                "non-finite feature value in trial {} window {}",
                w.trial, w.index
            )));
        }
        rows.push(FeatureRow {
            labels: RowLabels {
                subject: w.trial.subject,
                gesture: w.trial.gesture,
                position: w.trial.position,
                repetition: w.trial.repetition,
                window_index: w.index,
                start_time_s: w.start_time_s,
            },
            values,
        });
    }

    Ok(FeatureMatrix { kind, columns: FeatureMatrix::column_names(kind, channels), rows })
}

/// Extract a feature matrix for a whole dataset: for every trial, segment
/// the stream matching the feature set's modality and extract its windows.
pub fn extract_dataset(
    dataset: &crate::dataset::Dataset,
    kind: FeatureSetKind,
    window_spec: &crate::window::WindowSpec,
    opts: &ExtractOptions,
) -> Result<FeatureMatrix> {
    use rayon::prelude::*;

    let per_trial: Vec<FeatureMatrix> = dataset
        .trials
        .par_iter()
        .map(|trial| {
            let stream = trial.stream(kind.modality())?;
            let windows = crate::window::segment_stream(stream, window_spec, trial.key())?;
            extract(&windows, kind, opts)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut iter = per_trial.into_iter();
    let mut merged = iter
        .next()
        .ok_or_else(|| Error::Feature(format!("dataset '{}' has no trials", dataset.name)))?;
    for m in iter {
        if m.columns != merged.columns {
            return Err(Error::Feature(
                "trials disagree on channel count; feature columns are inconsistent".into(),
            ));
        }
        merged.rows.extend(m.rows);
    }
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::TrialKey;
    use proptest::prelude::*;

    #[test]
    fn mav_examples() {
        assert_eq!(mav(&[1.0, -1.0, 2.0, -2.0]).unwrap(), 1.5);
        assert_eq!(mav(&[0.0; 8]).unwrap(), 0.0);
        assert_eq!(mav(&[3.0, 4.0]).unwrap(), 3.5);
        assert!(mav(&[]).is_err());
    }

    #[test]
    fn zero_crossing_examples() {
        assert_eq!(zero_crossings(&[1.0, -1.0, 1.0, -1.0], 0.0).unwrap(), 3);
        assert_eq!(zero_crossings(&[1.0, 1.0, 1.0], 0.0).unwrap(), 0);
        assert_eq!(zero_crossings(&[1.0, 1.0, 1.0], 5.0).unwrap(), 0);
        assert_eq!(zero_crossings(&[0.1, -0.1, 0.1], 0.5).unwrap(), 0);
    }

    #[test]
    fn slope_sign_change_examples() {
        assert_eq!(slope_sign_changes(&[0.0, 1.0, 0.0, 1.0, 0.0], 0.0).unwrap(), 3);
        assert_eq!(slope_sign_changes(&[0.0, 1.0, 2.0, 3.0], 0.0).unwrap(), 0);
        assert_eq!(slope_sign_changes(&[0.0, 1.0, 0.0], 2.0).unwrap(), 0);
    }

    #[test]
    fn waveform_length_examples() {
        assert_eq!(waveform_length(&[0.0, 1.0, 0.0, 1.0]).unwrap(), 3.0);
        assert_eq!(waveform_length(&[2.5; 10]).unwrap(), 0.0);
        assert_eq!(waveform_length(&[0.0, -2.0, 0.0]).unwrap(), 4.0);
    }

    #[test]
    fn median_examples() {
        assert_eq!(acc_median(&[1.0, 2.0, 3.0]).unwrap(), 2.0);
        assert_eq!(acc_median(&[4.0, 1.0, 3.0, 2.0]).unwrap(), 2.5);
        assert_eq!(acc_median(&[0.981; 29]).unwrap(), 0.981);
    }

    #[test]
    fn rms_examples() {
        assert_eq!(acc_rms(&[3.0, -3.0, 3.0, -3.0]).unwrap(), 3.0);
        assert_eq!(acc_rms(&[0.0; 5]).unwrap(), 0.0);
        assert_eq!(acc_rms(&[1.0, 7.0]).unwrap(), 5.0);
    }

    #[test]
    fn tdpsd_all_zero_window_is_finite() {
        let out = tdpsd(&[0.0; 32]).unwrap();
        assert!(out.iter().all(|v| v.is_finite()), "{out:?}");
        assert!(out.iter().all(|v| (-1.0..=1.0).contains(v)), "{out:?}");
    }

    #[test]
    fn tdpsd_matches_extended_precision_fixture() {
        // Fixture values computed with a 50-digit arbitrary-precision
        // evaluation of the descriptor definition.
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/tests/data/tdpsd_fixture.json"
        ))
        .unwrap();
        let fixture: serde_json::Value = serde_json::from_str(&text).unwrap();
        let window: Vec<f64> =
            fixture["window"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        let expected: Vec<f64> =
            fixture["expected"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        let got = tdpsd(&window).unwrap();
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 1e-9, "got {g}, fixture {e}");
        }
    }

    #[test]
    fn tdpsd_outputs_bounded() {
        let mut state = 42u64;
        for _ in 0..50 {
            let w: Vec<f64> = (0..64)
                .map(|_| {
                    state = crate::seeding::splitmix64(state);
                    (state >> 11) as f64 / (1u64 << 52) as f64 - 1.0
                })
                .collect();
            for v in tdpsd(&w).unwrap() {
                assert!((-1.0..=1.0).contains(&v));
            }
        }
    }

    fn toy_windows(modality: Modality, count: usize, channels: usize) -> Vec<Window> {
        (0..count)
            .map(|k| Window {
                trial: TrialKey { subject: 1, gesture: 2, position: Some(3), repetition: 4 },
                modality,
                index: k,
                start_time_s: k as f64 * 0.1,
                samples: (0..channels)
                    .map(|c| (0..20).map(|i| ((k + c + i) as f64 * 0.73).sin()).collect())
                    .collect(),
            })
            .collect()
    }

    #[test]
    fn extract_dimension_law() {
        let opts = ExtractOptions::default();
        let m = extract(&toy_windows(Modality::Emg, 9, 8), FeatureSetKind::EmgTd, &opts).unwrap();
        assert_eq!(m.rows.len(), 9);
        assert_eq!(m.dim(), 32);
        let m =
            extract(&toy_windows(Modality::Acc, 9, 6), FeatureSetKind::AccMed, &opts).unwrap();
        assert_eq!(m.dim(), 6);
        let m =
            extract(&toy_windows(Modality::Emg, 9, 12), FeatureSetKind::EmgTdpsd, &opts).unwrap();
        assert_eq!(m.dim(), 72);
    }

    #[test]
    fn extract_rejects_modality_mismatch_unless_overridden() {
        let windows = toy_windows(Modality::Acc, 3, 2);
        assert!(extract(&windows, FeatureSetKind::EmgTd, &ExtractOptions::default()).is_err());
        let opts = ExtractOptions { allow_modality_mismatch: true, ..Default::default() };
        assert!(extract(&windows, FeatureSetKind::EmgTd, &opts).is_ok());
    }

    #[test]
    fn extract_rejects_heterogeneous_channels() {
        let mut windows = toy_windows(Modality::Emg, 3, 4);
        windows[2].samples.pop();
        assert!(extract(&windows, FeatureSetKind::EmgTd, &ExtractOptions::default()).is_err());
    }

    #[test]
    fn extract_preserves_window_order_and_labels() {
        let m = extract(&toy_windows(Modality::Emg, 5, 2), FeatureSetKind::EmgTd, &ExtractOptions::default())
            .unwrap();
        for (k, row) in m.rows.iter().enumerate() {
            assert_eq!(row.labels.window_index, k);
            assert_eq!(row.labels.gesture, 2);
            assert_eq!(row.labels.position, Some(3));
        }
        assert_eq!(m.columns[0], "ch0_mav");
        assert_eq!(m.columns[4], "ch1_mav");
    }

    proptest! {
        /// mav, waveform length and rms are absolutely homogeneous of
        /// degree 1; zc/ssc with zero threshold ignore positive scaling.
        #[test]
        fn scaling_properties(
            xs in proptest::collection::vec(-10.0f64..10.0, 8..64),
            scale in 0.01f64..100.0,
        ) {
            let scaled: Vec<f64> = xs.iter().map(|v| v * scale).collect();
            let rel = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs().max(1e-12);
            prop_assert!(rel(mav(&scaled).unwrap(), scale * mav(&xs).unwrap()));
            prop_assert!(rel(
                waveform_length(&scaled).unwrap(),
                scale * waveform_length(&xs).unwrap()
            ));
            prop_assert!(rel(acc_rms(&scaled).unwrap(), scale * acc_rms(&xs).unwrap()));
            prop_assert_eq!(
                zero_crossings(&scaled, 0.0).unwrap(),
                zero_crossings(&xs, 0.0).unwrap()
            );
            prop_assert_eq!(
                slope_sign_changes(&scaled, 0.0).unwrap(),
                slope_sign_changes(&xs, 0.0).unwrap()
            );
        }

        /// median is monotone and translation-equivariant.
        #[test]
        fn median_translation(
            xs in proptest::collection::vec(-10.0f64..10.0, 1..64),
            shift in -5.0f64..5.0,
        ) {
            let shifted: Vec<f64> = xs.iter().map(|v| v + shift).collect();
            let a = acc_median(&xs).unwrap() + shift;
            let b = acc_median(&shifted).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        /// counting features stay within their structural bounds.
        #[test]
        fn count_bounds(xs in proptest::collection::vec(-1.0f64..1.0, 3..128)) {
            let n = xs.len();
            prop_assert!(zero_crossings(&xs, 0.0).unwrap() <= n - 1);
            prop_assert!(slope_sign_changes(&xs, 0.0).unwrap() <= n - 2);
        }
    }
}
