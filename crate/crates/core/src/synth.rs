//! Deterministic synthetic dataset generators.
//!
//! The generator produces biomedical-style (multi-position, position-
//! invariant gestures) and HCI-style (unlabelled position, gesture-specific
//! orientation trajectories) multi-modal datasets with controlled gesture
//! separability.
//!
//! Gesture information enters the two modalities through disjoint paths:
//! EMG carries per-channel amplitude profiles (the activation matrix), ACC
//! carries only orientation. The positional-coupling knob blends the ACC
//! orientation between a per-position gravity vector (coupling 0) and a
//! smooth per-gesture trajectory (coupling 1), so at 0 the accelerometers
//! are informative about position only, and at 1 they separate gestures.
//!
//! Every random draw flows from the config seed through per-trial
//! counter-based streams, so generation is reproducible at any thread
//! count.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Modality, SignalStream, TrialRecord};
use crate::error::{Error, Result};
use crate::filter::{design_filter, FilterSpec};

/// Stream ids for the auxiliary tables; trial streams start above these.
const STREAM_POSITION_GAIN: u64 = 0;
const TRIAL_STREAM_BASE: u64 = 16;

fn default_trial_duration() -> f64 {
    2.0
}

fn default_ramp_fraction() -> f64 {
    0.1
}

/// Generator parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub name: String,
    pub subjects: u32,
    /// Active gestures, labelled 1..=gestures.
    pub gestures: u32,
    /// Add a "rest" class with gesture id 0 (zero activation, no motion).
    pub include_rest: bool,
    /// Limb-position grid used during generation; must be 1 when
    /// `position_labels` is false.
    pub positions: u32,
    /// Write position ids into the trials (biomedical-shaped) or leave them
    /// absent (HCI-shaped).
    pub position_labels: bool,
    pub repetitions: u32,
    #[serde(default = "default_trial_duration")]
    pub trial_duration_s: f64,
    pub emg_channels: usize,
    pub emg_sample_rate_hz: f64,
    /// Accelerometer axes; a multiple of 3 (one tri-axis sensor per triple).
    pub acc_axes: usize,
    pub acc_sample_rate_hz: f64,
    /// Gesture-to-channel activation matrix, `gestures x emg_channels`,
    /// entries in [0, 1], rows distinct.
    pub activation: Vec<Vec<f64>>,
    /// Gravity direction per position (unit vectors).
    pub orientations: Vec<[f64; 3]>,
    /// 0 = position-invariant gestures (ACC sees gravity only);
    /// 1 = fully gesture-specific orientation trajectories.
    pub positional_coupling: f64,
    /// Fraction of the trial spent reaching the gesture orientation; the
    /// rest of the trial holds the pose.
    #[serde(default = "default_ramp_fraction")]
    pub trajectory_ramp_fraction: f64,
    /// Names for the active gestures; auto-generated when empty.
    #[serde(default)]
    pub gesture_names: Vec<String>,
    pub emg_baseline_noise: f64,
    /// Per-(subject, position, channel) multiplicative EMG perturbation
    /// amplitude; models cross-position EMG variability.
    pub emg_position_gain: f64,
    /// Per-trial multiplicative EMG amplitude jitter (contraction-intensity
    /// variability).
    pub emg_trial_jitter: f64,
    pub acc_vibration_noise: f64,
    /// Per-trial orientation wobble in radians.
    pub acc_orientation_jitter_rad: f64,
    pub seed: u64,
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Synth(msg));
        if self.subjects < 1 || self.gestures < 1 || self.positions < 1 || self.repetitions < 1 {
            return fail("subjects, gestures, positions and repetitions must be >= 1".into());
        }
        if !self.position_labels && self.positions != 1 {
            return fail("unlabelled positions require a single generation position".into());
        }
        if self.emg_channels == 0 || self.acc_axes == 0 || self.acc_axes % 3 != 0 {
            return fail("emg_channels must be positive and acc_axes a positive multiple of 3".into());
        }
        if self.trial_duration_s <= 0.0
            || self.emg_sample_rate_hz <= 0.0
            || self.acc_sample_rate_hz <= 0.0
        {
            return fail("durations and sample rates must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.positional_coupling) {
            return fail(format!(
                "positional coupling {} outside [0, 1]",
                self.positional_coupling
            ));
        }
        if !(self.trajectory_ramp_fraction > 0.0 && self.trajectory_ramp_fraction <= 1.0) {
            return fail(format!(
                "trajectory ramp fraction {} outside (0, 1]",
                self.trajectory_ramp_fraction
            ));
        }
        if self.activation.len() != self.gestures as usize {
            return fail(format!(
                "activation matrix has {} rows for {} gestures",
                self.activation.len(),
                self.gestures
            ));
        }
        for (g, row) in self.activation.iter().enumerate() {
            if row.len() != self.emg_channels {
                return fail(format!("activation row {g} has {} entries", row.len()));
            }
            if row.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return fail(format!("activation row {g} has entries outside [0, 1]"));
            }
        }
        for (i, a) in self.activation.iter().enumerate() {
            for b in &self.activation[i + 1..] {
                if a == b {
                    return fail("activation rows must be distinct per gesture".into());
                }
            }
        }
        if self.orientations.len() != self.positions as usize {
            return fail(format!(
                "{} orientation vectors for {} positions",
                self.orientations.len(),
                self.positions
            ));
        }
        for v in &self.orientations {
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if (norm - 1.0).abs() > 1e-9 {
                return fail(format!("orientation {v:?} is not unit-norm"));
            }
        }
        if !self.gesture_names.is_empty() && self.gesture_names.len() != self.gestures as usize {
            return fail("gesture_names must be empty or match the gesture count".into());
        }
        Ok(())
    }

    /// Gesture ids generated, rest first when present.
    pub fn gesture_ids(&self) -> Vec<u32> {
        let mut ids = Vec::new();
        if self.include_rest {
            ids.push(0);
        }
        ids.extend(1..=self.gestures);
        ids
    }

    pub fn trial_count(&self) -> u64 {
        self.subjects as u64
            * self.gesture_ids().len() as u64
            * self.positions as u64
            * self.repetitions as u64
    }

    /// Scale subject and repetition counts (minimum 2 each).
    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Synth(format!("scale must be positive, got {scale}")));
        }
        self.subjects = ((self.subjects as f64 * scale).floor() as u32).max(2);
        self.repetitions = ((self.repetitions as f64 * scale).floor() as u32).max(2);
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Built-in generator presets.
pub fn preset(name: &str) -> Result<SyntheticConfig> {
    match name {
        "bio-like" => Ok(bio_like()),
        "hci-like" => Ok(hci_like()),
        other => Err(Error::Synth(format!(
            "unknown preset '{other}' (expected bio-like or hci-like)"
        ))),
    }
}

/// Multi-position protocol: 12 subjects, 6 gestures + rest, 5 labelled
/// positions, 10 repetitions, 8 EMG channels at 2 kHz, two tri-axis
/// accelerometers at 148 Hz, position-invariant gestures.
fn bio_like() -> SyntheticConfig {
    let gestures = 6u32;
    let channels = 8usize;
    // Overlapping per-gesture activation bumps across the electrode ring.
    let activation = (0..gestures)
        .map(|g| {
            let center = g as f64 * (channels as f64 - 1.0) / (gestures as f64 - 1.0);
            (0..channels)
                .map(|c| {
                    let d = c as f64 - center;
                    (0.15 + 0.85 * (-d * d / (2.0 * 1.1 * 1.1)).exp()).min(1.0)
                })
                .collect()
        })
        .collect();
    // Five static positions fanned through the sagittal plane.
    let orientations = (0..5)
        .map(|p| {
            let theta = p as f64 * std::f64::consts::PI / 4.0;
            [theta.sin(), 0.0, theta.cos()]
        })
        .collect();
    SyntheticConfig {
        name: "bio-like".into(),
        subjects: 12,
        gestures,
        include_rest: true,
        positions: 5,
        position_labels: true,
        repetitions: 10,
        trial_duration_s: 2.0,
        emg_channels: channels,
        emg_sample_rate_hz: 2000.0,
        acc_axes: 6,
        acc_sample_rate_hz: 148.0,
        activation,
        orientations,
        positional_coupling: 0.0,
        trajectory_ramp_fraction: default_ramp_fraction(),
        gesture_names: ["WF", "WE", "WP", "WS", "PO", "PI"]
            .into_iter()
            .map(String::from)
            .collect(),
        emg_baseline_noise: 0.05,
        emg_position_gain: 0.10,
        emg_trial_jitter: 0.20,
        acc_vibration_noise: 0.02,
        acc_orientation_jitter_rad: 0.03,
        seed: 0,
    }
}

/// Single nominal position, 20 subjects, 40 dynamic gestures, 6
/// repetitions, 12 EMG channels, 12 tri-axis accelerometers, fully
/// gesture-specific orientation trajectories.
fn hci_like() -> SyntheticConfig {
    let gestures = 40u32;
    let channels = 12usize;
    // Fixed pseudo-random activation rows in [0.2, 1.0]; the constant seed
    // makes the preset itself a constant.
    let mut rng = ChaCha8Rng::seed_from_u64(0x6863_692d_6c69_6b65);
    let activation = (0..gestures)
        .map(|_| (0..channels).map(|_| rng.random_range(0.2..1.0)).collect())
        .collect();
    SyntheticConfig {
        name: "hci-like".into(),
        subjects: 20,
        gestures,
        include_rest: false,
        positions: 1,
        position_labels: false,
        repetitions: 6,
        trial_duration_s: 2.0,
        emg_channels: channels,
        emg_sample_rate_hz: 2000.0,
        acc_axes: 36,
        acc_sample_rate_hz: 148.0,
        activation,
        orientations: vec![[0.0, 0.0, 1.0]],
        positional_coupling: 1.0,
        trajectory_ramp_fraction: default_ramp_fraction(),
        gesture_names: Vec::new(),
        emg_baseline_noise: 0.05,
        emg_position_gain: 0.10,
        emg_trial_jitter: 0.35,
        acc_vibration_noise: 0.02,
        acc_orientation_jitter_rad: 0.03,
        seed: 0,
    }
}

// --- small 3-vector helpers -------------------------------------------------

type Vec3 = [f64; 3];

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

fn normalize(a: Vec3) -> Vec3 {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Rodrigues rotation of `v` about unit `axis` by `angle`.
fn rotate_about(v: Vec3, axis: Vec3, angle: f64) -> Vec3 {
    let (s, c) = angle.sin_cos();
    let k_cross_v = cross(axis, v);
    let k_dot_v = dot(axis, v);
    [
        v[0] * c + k_cross_v[0] * s + axis[0] * k_dot_v * (1.0 - c),
        v[1] * c + k_cross_v[1] * s + axis[1] * k_dot_v * (1.0 - c),
        v[2] * c + k_cross_v[2] * s + axis[2] * k_dot_v * (1.0 - c),
    ]
}

/// Any unit vector perpendicular to `v`.
fn perpendicular(v: Vec3) -> Vec3 {
    let candidate = if v[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    normalize(cross(v, candidate))
}

/// Great-circle interpolation from `a` toward `b` by fraction `t`.
fn slerp(a: Vec3, b: Vec3, t: f64) -> Vec3 {
    let d = dot(a, b).clamp(-1.0, 1.0);
    let omega = d.acos();
    if omega < 1e-12 {
        return a;
    }
    let axis = cross(a, b);
    let axis = if norm(axis) < 1e-12 {
        // Antipodal: pick a deterministic detour plane.
        perpendicular(a)
    } else {
        normalize(axis)
    };
    rotate_about(a, axis, t * omega)
}

/// Deterministic well-spread unit vectors (Fibonacci sphere), one per
/// gesture; used as trajectory targets.
fn gesture_target(index: u32, total: u32) -> Vec3 {
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    let i = index as f64;
    let n = total.max(2) as f64;
    let z = 1.0 - 2.0 * (i + 0.5) / n;
    let r = (1.0 - z * z).sqrt();
    let phi = golden * i;
    [r * phi.cos(), r * phi.sin(), z]
}

/// Fixed mounting rotation of sensor `m`: spread sensors around the limb so
/// each reads gravity in its own frame.
fn sensor_frame(m: usize) -> [Vec3; 3] {
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    let yaw = m as f64 * golden;
    let pitch = m as f64 * 0.7;
    let x = normalize([yaw.cos(), yaw.sin(), pitch.sin() * 0.3]);
    let helper = if x[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let y = normalize(cross(helper, x));
    let z = cross(x, y);
    [x, y, z]
}

fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * (3.0 - 2.0 * u)
}

// --- generation --------------------------------------------------------------

struct TrialPlan {
    index: u64,
    subject: u32,
    gesture: u32,
    position: u32,
}

/// Generate a full dataset from `config`; the output always passes
/// [`Dataset::validate`].
pub fn generate(config: &SyntheticConfig) -> Result<Dataset> {
    config.validate()?;

    let emg_fs = config.emg_sample_rate_hz;
    let bandpass_high = if 450.0 >= emg_fs / 2.0 { 0.45 * emg_fs } else { 450.0 };
    let shaper = design_filter(&FilterSpec::bandpass(20.0, bandpass_high, 4, emg_fs))?;

    // Per-(subject, position, channel) EMG gain perturbations in [-1, 1].
    let mut gain_rng = ChaCha8Rng::seed_from_u64(config.seed);
    gain_rng.set_stream(STREAM_POSITION_GAIN);
    let subjects = config.subjects as usize;
    let positions = config.positions as usize;
    let channels = config.emg_channels;
    let mut position_gain = vec![0.0f64; subjects * positions * channels];
    for slot in position_gain.iter_mut() {
        *slot = gain_rng.random_range(-1.0..1.0);
    }
    let gain_at = |subject: u32, position: u32, channel: usize| -> f64 {
        let s = (subject - 1) as usize;
        let p = (position - 1) as usize;
        position_gain[(s * positions + p) * channels + channel]
    };

    let mut plans = Vec::with_capacity(config.trial_count() as usize);
    let mut index = 0u64;
    let mut repetitions_of = Vec::new();
    for subject in 1..=config.subjects {
        for gesture in config.gesture_ids() {
            for position in 1..=config.positions {
                for repetition in 1..=config.repetitions {
                    plans.push(TrialPlan { index, subject, gesture, position });
                    repetitions_of.push(repetition);
                    index += 1;
                }
            }
        }
    }

    let emg_n = (config.trial_duration_s * emg_fs).floor() as usize;
    let acc_n = (config.trial_duration_s * config.acc_sample_rate_hz).floor() as usize;
    let ramp_s = config.trajectory_ramp_fraction * config.trial_duration_s;

    let trials: Vec<TrialRecord> = plans
        .par_iter()
        .zip(repetitions_of.par_iter())
        .map(|(plan, &repetition)| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(TRIAL_STREAM_BASE + plan.index);

            let jitter = 1.0 + config.emg_trial_jitter * rng.random_range(-1.0..1.0);

            // EMG: per-channel amplitude-scaled bandlimited noise plus
            // bandlimited baseline noise.
            let mut emg = Vec::with_capacity(channels);
            for c in 0..channels {
                let amplitude = if plan.gesture == 0 {
                    0.0
                } else {
                    let base = config.activation[(plan.gesture - 1) as usize][c];
                    base * (1.0 + config.emg_position_gain * gain_at(plan.subject, plan.position, c))
                };
                let active: Vec<f64> =
                    (0..emg_n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let baseline: Vec<f64> =
                    (0..emg_n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                // Two passes steepen the transition bands enough to keep
                // essentially all spectral mass inside 20-450 Hz.
                let active = shaper.filter_causal(&shaper.filter_causal(&active));
                let baseline = shaper.filter_causal(&shaper.filter_causal(&baseline));
                emg.push(
                    active
                        .iter()
                        .zip(&baseline)
                        .map(|(a, b)| amplitude * jitter * a + config.emg_baseline_noise * b)
                        .collect::<Vec<f64>>(),
                );
            }

            // ACC: orientation trajectory blended between the position's
            // gravity vector and the gesture's target, in each sensor frame.
            let gravity = config.orientations[(plan.position - 1) as usize];
            let target = if plan.gesture == 0 {
                gravity
            } else {
                gesture_target(plan.gesture - 1, config.gestures)
            };
            let wobble_axis = {
                let raw: Vec3 = [
                    rng.sample::<f64, _>(StandardNormal),
                    rng.sample::<f64, _>(StandardNormal),
                    rng.sample::<f64, _>(StandardNormal),
                ];
                if norm(raw) < 1e-9 {
                    [0.0, 0.0, 1.0]
                } else {
                    normalize(raw)
                }
            };
            let wobble_angle =
                config.acc_orientation_jitter_rad * rng.sample::<f64, _>(StandardNormal);

            let sensors = config.acc_axes / 3;
            let mut acc = vec![Vec::with_capacity(acc_n); config.acc_axes];
            for i in 0..acc_n {
                let t = i as f64 / config.acc_sample_rate_hz;
                let progress = smoothstep(if ramp_s > 0.0 { t / ramp_s } else { 1.0 });
                let orient =
                    slerp(gravity, target, config.positional_coupling * progress);
                let orient = rotate_about(orient, wobble_axis, wobble_angle);
                for m in 0..sensors {
                    let frame = sensor_frame(m);
                    for (axis, basis) in frame.iter().enumerate() {
                        let vibration = config.acc_vibration_noise
                            * rng.sample::<f64, _>(StandardNormal);
                        acc[m * 3 + axis].push(dot(*basis, orient) + vibration);
                    }
                }
            }

            TrialRecord {
                subject: plan.subject,
                gesture: plan.gesture,
                position: config.position_labels.then_some(plan.position),
                repetition,
                streams: vec![
                    SignalStream::new(Modality::Emg, emg_fs, emg),
                    SignalStream::new(Modality::Acc, config.acc_sample_rate_hz, acc),
                ],
            }
        })
        .collect();

    let mut gesture_names = std::collections::BTreeMap::new();
    if config.include_rest {
        gesture_names.insert(0, "rest".to_string());
    }
    for g in 1..=config.gestures {
        let name = config
            .gesture_names
            .get((g - 1) as usize)
            .cloned()
            .unwrap_or_else(|| format!("G{g:02}"));
        gesture_names.insert(g, name);
    }
    let mut position_names = std::collections::BTreeMap::new();
    if config.position_labels {
        for p in 1..=config.positions {
            position_names.insert(p, format!("P{p}"));
        }
    }

    let dataset =
        Dataset { name: config.name.clone(), trials, gesture_names, position_names };
    debug_assert!(dataset.validate().is_empty());
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{extract, FeatureSetKind, ExtractOptions};
    use crate::window::{segment_stream, WindowSpec};

    fn tiny_bio() -> SyntheticConfig {
        let mut c = preset("bio-like").unwrap();
        c.subjects = 2;
        c.repetitions = 2;
        c.trial_duration_s = 1.0;
        c
    }

    #[test]
    fn preset_trial_counts_match_protocols() {
        assert_eq!(preset("bio-like").unwrap().trial_count(), 4200); // 12*7*5*10
        assert_eq!(preset("hci-like").unwrap().trial_count(), 4800); // 20*40*6
        assert!(preset("nope").is_err());
    }

    #[test]
    fn scaling_floors_with_minimum_two() {
        let c = preset("bio-like").unwrap().with_scale(0.25).unwrap();
        assert_eq!(c.subjects, 3);
        assert_eq!(c.repetitions, 2);
        let c = preset("hci-like").unwrap().with_scale(0.25).unwrap();
        assert_eq!(c.subjects, 5);
        assert_eq!(c.repetitions, 2);
        let c = preset("bio-like").unwrap().with_scale(0.01).unwrap();
        assert_eq!(c.subjects, 2);
        assert_eq!(c.repetitions, 2);
    }

    #[test]
    fn generated_dataset_is_valid_and_deterministic() {
        let config = tiny_bio();
        let a = generate(&config).unwrap();
        let b = generate(&config).unwrap();
        assert!(a.validate().is_empty());
        assert_eq!(a, b);
        assert_eq!(a.trials.len(), config.trial_count() as usize);
        // A different seed changes the data.
        let c = generate(&config.clone().with_seed(1)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn hci_preset_has_no_position_labels() {
        let mut config = preset("hci-like").unwrap();
        config.subjects = 2;
        config.repetitions = 2;
        config.gestures = 4;
        config.activation.truncate(4);
        config.trial_duration_s = 0.8;
        let d = generate(&config).unwrap();
        assert!(!d.has_positions());
        assert!(d.position_names.is_empty());
        assert!(d.validate().is_empty());
    }

    #[test]
    fn emg_spectral_mass_is_in_band() {
        let config = tiny_bio();
        let d = generate(&config).unwrap();
        // First non-rest trial, first channel.
        let trial = d.trials.iter().find(|t| t.gesture != 0).unwrap();
        let emg = trial.stream(Modality::Emg).unwrap();
        let raw = &emg.samples[0][..1024.min(emg.len())];
        let fs = emg.sample_rate_hz;
        let n = raw.len();
        // Hann-windowed periodogram; the rectangular window's sidelobes
        // would smear in-band power across the whole axis.
        let x: Vec<f64> = raw
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let w = 0.5
                    - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos();
                v * w
            })
            .collect();
        let mut in_band = 0.0;
        let mut total = 0.0;
        for k in 1..n / 2 {
            let f = k as f64 * fs / n as f64;
            let (mut re, mut im) = (0.0, 0.0);
            let w = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            for (i, &v) in x.iter().enumerate() {
                let (s, c) = (w * i as f64).sin_cos();
                re += v * c;
                im -= v * s;
            }
            let power = re * re + im * im;
            total += power;
            if (20.0..=450.0).contains(&f) {
                in_band += power;
            }
        }
        let out_fraction = 1.0 - in_band / total;
        assert!(out_fraction < 0.05, "out-of-band mass {out_fraction}");
    }

    #[test]
    fn zero_coupling_keeps_acc_free_of_gesture_information() {
        // Mutual information (plug-in, equal-frequency bins) between each
        // ACC MED feature and the gesture label stays near zero. One row
        // per trial: windows of a trial share its wobble draw, so counting
        // them separately would only inflate the estimator's bias.
        let mut config = tiny_bio();
        config.subjects = 2;
        config.repetitions = 10;
        let d = generate(&config).unwrap();
        let spec = WindowSpec::default();
        let mut rows: Vec<(u32, Vec<f64>)> = Vec::new();
        for trial in &d.trials {
            let acc = trial.stream(Modality::Acc).unwrap();
            let windows = segment_stream(acc, &spec, trial.key()).unwrap();
            let m = extract(&windows[..1], FeatureSetKind::AccMed, &ExtractOptions::default())
                .unwrap();
            rows.push((m.rows[0].labels.gesture, m.rows[0].values.clone()));
        }
        let n = rows.len();
        let labels: Vec<u32> = rows.iter().map(|(g, _)| *g).collect();
        let classes: std::collections::BTreeSet<u32> = labels.iter().copied().collect();
        let dim = rows[0].1.len();
        let bins = 4usize;
        let mut max_mi: f64 = 0.0;
        for col in 0..dim {
            let mut values: Vec<(f64, usize)> =
                rows.iter().enumerate().map(|(i, (_, v))| (v[col], i)).collect();
            values.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut bin_of = vec![0usize; n];
            for (rank, (_, i)) in values.iter().enumerate() {
                bin_of[*i] = rank * bins / n;
            }
            // Joint histogram bin x class.
            let class_index: std::collections::BTreeMap<u32, usize> =
                classes.iter().enumerate().map(|(i, &c)| (c, i)).collect();
            let mut joint = vec![vec![0.0f64; classes.len()]; bins];
            for i in 0..n {
                joint[bin_of[i]][class_index[&labels[i]]] += 1.0;
            }
            let mut mi = 0.0;
            for b in 0..bins {
                for c in 0..classes.len() {
                    let pxy = joint[b][c] / n as f64;
                    if pxy == 0.0 {
                        continue;
                    }
                    let px: f64 = joint[b].iter().sum::<f64>() / n as f64;
                    let py: f64 =
                        (0..bins).map(|bb| joint[bb][c]).sum::<f64>() / n as f64;
                    mi += pxy * (pxy / (px * py)).log2();
                }
            }
            max_mi = max_mi.max(mi);
        }
        assert!(max_mi < 0.05, "max per-feature MI {max_mi} bits");
    }

    #[test]
    fn distinct_positions_separate_acc_med_features() {
        // Fisher ratio (between-position over within-position scatter) on
        // ACC MED features.
        let mut config = tiny_bio();
        config.subjects = 1;
        config.repetitions = 3;
        let d = generate(&config).unwrap();
        let spec = WindowSpec::default();
        let mut by_position: std::collections::BTreeMap<u32, Vec<Vec<f64>>> = Default::default();
        for trial in &d.trials {
            let acc = trial.stream(Modality::Acc).unwrap();
            let windows = segment_stream(acc, &spec, trial.key()).unwrap();
            let m = extract(&windows, FeatureSetKind::AccMed, &ExtractOptions::default()).unwrap();
            for row in m.rows {
                by_position.entry(row.labels.position.unwrap()).or_default().push(row.values);
            }
        }
        let dim = by_position.values().next().unwrap()[0].len();
        let all: Vec<&Vec<f64>> = by_position.values().flatten().collect();
        let total = all.len() as f64;
        let grand: Vec<f64> = (0..dim)
            .map(|j| all.iter().map(|r| r[j]).sum::<f64>() / total)
            .collect();
        let mut between = 0.0;
        let mut within = 0.0;
        for rows in by_position.values() {
            let nc = rows.len() as f64;
            let mean: Vec<f64> =
                (0..dim).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / nc).collect();
            between += nc * (0..dim).map(|j| (mean[j] - grand[j]).powi(2)).sum::<f64>();
            for r in rows {
                within += (0..dim).map(|j| (r[j] - mean[j]).powi(2)).sum::<f64>();
            }
        }
        let fisher = between / within;
        assert!(fisher > 10.0, "Fisher ratio {fisher}");
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut c = tiny_bio();
        c.positional_coupling = 1.5;
        assert!(generate(&c).is_err());
        let mut c = tiny_bio();
        c.orientations[0] = [0.0, 0.0, 2.0];
        assert!(generate(&c).is_err());
        let mut c = tiny_bio();
        c.activation[1] = c.activation[0].clone();
        assert!(generate(&c).is_err());
        let mut c = tiny_bio();
        c.acc_axes = 5;
        assert!(generate(&c).is_err());
    }
}
