//! IIR filter design and zero-phase application.
//!
//! Filters are realized as cascades of second-order sections (biquads).
//! Butterworth lowpass/bandpass designs go through the standard analog
//! prototype + bilinear transform route; the notch is a single constrained
//! biquad with unity gain at DC and Nyquist and a zero pair on the unit
//! circle at the center frequency.
//!
//! `order` is the analog prototype order: a lowpass of order `n` has `n`
//! poles (`ceil(n/2)` sections); a bandpass of order `n` has `2n` poles
//! (`n` sections).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dataset::SignalStream;
use crate::error::{Error, Result};

/// Filter family plus its corner frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FilterKind {
    /// Narrow band-reject at `center_hz` with quality factor `q`
    /// (bandwidth approximately `center_hz / q`).
    Notch { center_hz: f64, q: f64 },
    Bandpass { low_hz: f64, high_hz: f64 },
    Lowpass { cutoff_hz: f64 },
}

/// A filter design request: family, prototype order and sample rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    #[serde(flatten)]
    pub kind: FilterKind,
    pub order: u32,
    pub sample_rate_hz: f64,
}

impl FilterSpec {
    pub fn notch(center_hz: f64, q: f64, sample_rate_hz: f64) -> Self {
        Self { kind: FilterKind::Notch { center_hz, q }, order: 2, sample_rate_hz }
    }

    pub fn bandpass(low_hz: f64, high_hz: f64, order: u32, sample_rate_hz: f64) -> Self {
        Self { kind: FilterKind::Bandpass { low_hz, high_hz }, order, sample_rate_hz }
    }

    pub fn lowpass(cutoff_hz: f64, order: u32, sample_rate_hz: f64) -> Self {
        Self { kind: FilterKind::Lowpass { cutoff_hz }, order, sample_rate_hz }
    }

    fn validate(&self) -> Result<()> {
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::Filter("sample rate must be positive".into()));
        }
        if self.order < 1 {
            return Err(Error::Filter("filter order must be >= 1".into()));
        }
        let nyquist = self.sample_rate_hz / 2.0;
        let corner_ok = |f: f64| f.is_finite() && f > 0.0 && f < nyquist;
        match self.kind {
            FilterKind::Notch { center_hz, q } => {
                if !corner_ok(center_hz) {
                    return Err(Error::Filter(format!(
                        "notch center {center_hz} Hz not strictly inside (0, {nyquist}) Hz"
                    )));
                }
                if !(q.is_finite() && q > 0.0) {
                    return Err(Error::Filter("notch quality factor must be positive".into()));
                }
                if self.order != 2 {
                    return Err(Error::Filter(
                        "notch is realized as a single second-order section; order must be 2"
                            .into(),
                    ));
                }
            }
            FilterKind::Bandpass { low_hz, high_hz } => {
                if !corner_ok(low_hz) || !corner_ok(high_hz) || low_hz >= high_hz {
                    return Err(Error::Filter(format!(
                        "bandpass corners ({low_hz}, {high_hz}) Hz must satisfy \
                         0 < low < high < {nyquist} Hz"
                    )));
                }
            }
            FilterKind::Lowpass { cutoff_hz } => {
                if !corner_ok(cutoff_hz) {
                    return Err(Error::Filter(format!(
                        "lowpass cutoff {cutoff_hz} Hz not strictly inside (0, {nyquist}) Hz"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One second-order section, normalized so `a0 = 1`:
/// `y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    /// Complex response at normalized angular frequency `omega` (rad/sample).
    fn response_at(&self, omega: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -omega);
        let z2 = Complex64::from_polar(1.0, -2.0 * omega);
        (self.b0 + self.b1 * z1 + self.b2 * z2) / (Complex64::new(1.0, 0.0) + self.a1 * z1 + self.a2 * z2)
    }

    /// Poles strictly inside the unit circle (Jury criterion for a quadratic).
    fn is_stable(&self) -> bool {
        self.a2.abs() < 1.0 && self.a1.abs() < 1.0 + self.a2
    }

    fn dc_gain(&self) -> f64 {
        (self.b0 + self.b1 + self.b2) / (1.0 + self.a1 + self.a2)
    }

    /// Steady-state direct-form-II-transposed state for a constant input
    /// `x0` held forever; used to start filtering without a transient.
    fn steady_state(&self, x0: f64) -> (f64, f64) {
        let y0 = self.dc_gain() * x0;
        let z1 = y0 - self.b0 * x0;
        let z2 = self.b2 * x0 - self.a2 * y0;
        (z1, z2)
    }
}

/// An ordered cascade of second-order sections realizing one filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiquadCascade {
    pub sections: Vec<Biquad>,
    pub sample_rate_hz: f64,
}

impl BiquadCascade {
    /// Total pole count (2 per section).
    pub fn total_order(&self) -> usize {
        2 * self.sections.len()
    }

    pub fn is_stable(&self) -> bool {
        self.sections.iter().all(Biquad::is_stable)
    }

    /// Magnitude response at `freq_hz`.
    pub fn magnitude_at(&self, freq_hz: f64) -> f64 {
        let omega = 2.0 * std::f64::consts::PI * freq_hz / self.sample_rate_hz;
        self.sections.iter().map(|s| s.response_at(omega).norm()).product()
    }

    /// Single forward (causal) pass from zero initial state.
    pub fn filter_causal(&self, input: &[f64]) -> Vec<f64> {
        self.run(input, false)
    }

    fn run(&self, input: &[f64], steady_start: bool) -> Vec<f64> {
        let mut data = input.to_vec();
        let mut level = if steady_start { input.first().copied().unwrap_or(0.0) } else { 0.0 };
        for section in &self.sections {
            let (mut z1, mut z2) =
                if steady_start { section.steady_state(level) } else { (0.0, 0.0) };
            for x in data.iter_mut() {
                let input_sample = *x;
                let y = section.b0 * input_sample + z1;
                z1 = section.b1 * input_sample - section.a1 * y + z2;
                z2 = section.b2 * input_sample - section.a2 * y;
                *x = y;
            }
            level *= section.dc_gain();
        }
        data
    }
}

/// Design a [`BiquadCascade`] realizing `spec`.
///
/// Lowpass designs are normalized to unity DC gain; bandpass designs to
/// unity gain at the (prewarped) geometric-mean frequency of the corners.
pub fn design_filter(spec: &FilterSpec) -> Result<BiquadCascade> {
    spec.validate()?;
    let fs = spec.sample_rate_hz;
    let cascade = match spec.kind {
        FilterKind::Notch { center_hz, q } => {
            BiquadCascade { sections: vec![design_notch(center_hz, q, fs)], sample_rate_hz: fs }
        }
        FilterKind::Lowpass { cutoff_hz } => design_butter_lowpass(cutoff_hz, spec.order, fs),
        FilterKind::Bandpass { low_hz, high_hz } => {
            design_butter_bandpass(low_hz, high_hz, spec.order, fs)
        }
    };
    if !cascade.is_stable() {
        return Err(Error::Filter(format!("designed cascade is unstable for {spec:?}")));
    }
    Ok(cascade)
}

/// Constrained second-order notch (unity gain at DC and Nyquist, zeros on
/// the unit circle at the center frequency).
fn design_notch(center_hz: f64, q: f64, fs: f64) -> Biquad {
    let w0 = 2.0 * std::f64::consts::PI * center_hz / fs;
    let alpha = w0.sin() / (2.0 * q);
    let cw = w0.cos();
    let a0 = 1.0 + alpha;
    Biquad {
        b0: 1.0 / a0,
        b1: -2.0 * cw / a0,
        b2: 1.0 / a0,
        a1: -2.0 * cw / a0,
        a2: (1.0 - alpha) / a0,
    }
}

/// Left-half-plane Butterworth prototype poles for a unit cutoff.
fn prototype_poles(order: u32) -> Vec<Complex64> {
    let n = order as f64;
    (0..order)
        .map(|k| {
            let theta = std::f64::consts::PI * (2.0 * k as f64 + n + 1.0) / (2.0 * n);
            Complex64::from_polar(1.0, theta)
        })
        .collect()
}

fn bilinear_pole(s: Complex64, fs: f64) -> Complex64 {
    let two_fs = Complex64::new(2.0 * fs, 0.0);
    (two_fs + s) / (two_fs - s)
}

fn prewarp(f_hz: f64, fs: f64) -> f64 {
    2.0 * fs * (std::f64::consts::PI * f_hz / fs).tan()
}

fn design_butter_lowpass(cutoff_hz: f64, order: u32, fs: f64) -> BiquadCascade {
    let warped = prewarp(cutoff_hz, fs);
    let z_poles: Vec<Complex64> =
        prototype_poles(order).into_iter().map(|p| bilinear_pole(p * warped, fs)).collect();

    let mut sections = Vec::new();
    // Complex poles pair with their conjugates; zeros all sit at z = -1.
    for p in z_poles.iter().filter(|p| p.im > 1e-12) {
        sections.push(Biquad { b0: 1.0, b1: 2.0, b2: 1.0, a1: -2.0 * p.re, a2: p.norm_sqr() });
    }
    for p in z_poles.iter().filter(|p| p.im.abs() <= 1e-12) {
        sections.push(Biquad { b0: 1.0, b1: 1.0, b2: 0.0, a1: -p.re, a2: 0.0 });
    }
    // Normalize each section to unity DC gain.
    for s in &mut sections {
        let g = s.dc_gain();
        s.b0 /= g;
        s.b1 /= g;
        s.b2 /= g;
    }
    BiquadCascade { sections, sample_rate_hz: fs }
}

fn design_butter_bandpass(low_hz: f64, high_hz: f64, order: u32, fs: f64) -> BiquadCascade {
    let wl = prewarp(low_hz, fs);
    let wh = prewarp(high_hz, fs);
    let bandwidth = wh - wl;
    let w0_sq = Complex64::new(wl * wh, 0.0);

    // Lowpass-to-bandpass transform: each prototype pole p yields the two
    // roots of s^2 - (p * B) s + w0^2.
    let mut analog_poles = Vec::with_capacity(2 * order as usize);
    for p in prototype_poles(order) {
        let pb = p * bandwidth;
        let disc = (pb * pb - 4.0 * w0_sq).sqrt();
        analog_poles.push((pb + disc) / 2.0);
        analog_poles.push((pb - disc) / 2.0);
    }
    let z_poles: Vec<Complex64> =
        analog_poles.into_iter().map(|s| bilinear_pole(s, fs)).collect();

    // Keep one pole per conjugate pair; each section takes one zero at z = 1
    // and one at z = -1 (the images of the n zeros at s = 0 and s = inf).
    let mut sections: Vec<Biquad> = z_poles
        .iter()
        .filter(|p| p.im > 1e-12)
        .map(|p| Biquad { b0: 1.0, b1: 0.0, b2: -1.0, a1: -2.0 * p.re, a2: p.norm_sqr() })
        .collect();
    let reals: Vec<&Complex64> = z_poles.iter().filter(|p| p.im.abs() <= 1e-12).collect();
    for pair in reals.chunks(2) {
        match pair {
            [p, q] => sections.push(Biquad {
                b0: 1.0,
                b1: 0.0,
                b2: -1.0,
                a1: -(p.re + q.re),
                a2: p.re * q.re,
            }),
            [p] => sections.push(Biquad { b0: 1.0, b1: 1.0, b2: 0.0, a1: -p.re, a2: 0.0 }),
            _ => unreachable!(),
        }
    }

    // Normalize each section at the digital image of the prewarped center.
    let center_hz = fs / std::f64::consts::PI * ((wl * wh).sqrt() / (2.0 * fs)).atan();
    let omega = 2.0 * std::f64::consts::PI * center_hz / fs;
    for s in &mut sections {
        let g = s.response_at(omega).norm();
        s.b0 /= g;
        s.b1 /= g;
        s.b2 /= g;
    }
    BiquadCascade { sections, sample_rate_hz: fs }
}

/// Required padding for zero-phase filtering: three times the total order at
/// each end.
pub fn zero_phase_pad_len(cascade: &BiquadCascade) -> usize {
    3 * cascade.total_order()
}

/// Forward-backward filtering with reflect padding.
///
/// Output has the input's length and (for in-band components) zero phase
/// lag. Each pass starts in the steady state for its first padded sample, so
/// narrow-band sections do not ring at the edges.
pub fn apply_zero_phase(cascade: &BiquadCascade, input: &[f64]) -> Result<Vec<f64>> {
    let pad = zero_phase_pad_len(cascade);
    if input.len() <= pad {
        return Err(Error::Filter(format!(
            "stream too short for zero-phase filtering: {} samples, need > {pad}",
            input.len()
        )));
    }

    // Mirror without repeating the edge sample.
    let mut padded = Vec::with_capacity(input.len() + 2 * pad);
    for i in (1..=pad).rev() {
        padded.push(input[i]);
    }
    padded.extend_from_slice(input);
    for i in (input.len() - pad - 1..input.len() - 1).rev() {
        padded.push(input[i]);
    }

    let mut data = cascade.run(&padded, true);
    data.reverse();
    let mut data = cascade.run(&data, true);
    data.reverse();
    Ok(data[pad..pad + input.len()].to_vec())
}

/// Apply a cascade to every channel of a stream.
pub fn filter_stream(
    cascade: &BiquadCascade,
    stream: &SignalStream,
    zero_phase: bool,
) -> Result<SignalStream> {
    let mut channels = Vec::with_capacity(stream.channel_count());
    for ch in &stream.samples {
        let filtered =
            if zero_phase { apply_zero_phase(cascade, ch)? } else { cascade.filter_causal(ch) };
        channels.push(filtered);
    }
    Ok(SignalStream::new(stream.modality, stream.sample_rate_hz, channels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, fs: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 / fs).sin()).collect()
    }

    /// Least-squares fit of `x[i]` to `a sin(w i) + b cos(w i)`; returns
    /// (amplitude, phase) with `x ~ A sin(w i + phase)`.
    fn fit_sinusoid(x: &[f64], freq: f64, fs: f64) -> (f64, f64) {
        let w = 2.0 * std::f64::consts::PI * freq / fs;
        let (mut ss, mut cc, mut sc) = (0.0, 0.0, 0.0);
        let (mut ps, mut pc) = (0.0, 0.0);
        for (i, &v) in x.iter().enumerate() {
            let (s, c) = (w * i as f64).sin_cos();
            ss += s * s;
            cc += c * c;
            sc += s * c;
            ps += v * s;
            pc += v * c;
        }
        let det = ss * cc - sc * sc;
        let a = (cc * ps - sc * pc) / det;
        let b = (ss * pc - sc * ps) / det;
        ((a * a + b * b).sqrt(), b.atan2(a))
    }

    #[test]
    fn lowpass_dc_gain_is_unity() {
        let c = design_filter(&FilterSpec::lowpass(1.0, 2, 148.0)).unwrap();
        assert!((c.magnitude_at(0.0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn lowpass_attenuates_20_hz_by_40_db() {
        let c = design_filter(&FilterSpec::lowpass(1.0, 2, 148.0)).unwrap();
        let db = 20.0 * c.magnitude_at(20.0).log10();
        assert!(db <= -40.0, "got {db} dB");
    }

    #[test]
    fn notch_attenuates_center_by_30_db() {
        let c = design_filter(&FilterSpec::notch(60.0, 30.0, 2000.0)).unwrap();
        assert!(c.magnitude_at(60.0) <= 10f64.powf(-30.0 / 20.0));
        // Unity response away from the notch.
        assert!((c.magnitude_at(1e-9) - 1.0).abs() < 1e-9);
        assert!((c.magnitude_at(300.0) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn bandpass_response_shape() {
        let c = design_filter(&FilterSpec::bandpass(20.0, 450.0, 4, 2000.0)).unwrap();
        let mid = c.magnitude_at(95.0);
        assert!(c.magnitude_at(10.0) < mid);
        assert!(c.magnitude_at(900.0) < mid);
        assert!((mid - 1.0).abs() < 1e-3, "|H(95)| = {mid}");
        // Corner gain is 1/sqrt(2) for a Butterworth design.
        assert!((c.magnitude_at(20.0) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-3);
        assert!((c.magnitude_at(450.0) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-3);
    }

    #[test]
    fn designed_cascades_are_stable() {
        for spec in [
            FilterSpec::lowpass(1.0, 2, 100.0),
            FilterSpec::lowpass(5.0, 5, 1000.0),
            FilterSpec::bandpass(20.0, 450.0, 4, 2000.0),
            FilterSpec::bandpass(20.0, 360.0, 4, 800.0),
            FilterSpec::notch(50.0, 30.0, 1000.0),
        ] {
            let c = design_filter(&spec).unwrap();
            assert!(c.is_stable(), "{spec:?}");
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(design_filter(&FilterSpec::lowpass(500.0, 2, 1000.0)).is_err());
        assert!(design_filter(&FilterSpec::lowpass(1.0, 0, 1000.0)).is_err());
        assert!(design_filter(&FilterSpec::bandpass(450.0, 20.0, 4, 2000.0)).is_err());
        assert!(design_filter(&FilterSpec::bandpass(20.0, 450.0, 4, 800.0)).is_err());
        assert!(design_filter(&FilterSpec::notch(60.0, 30.0, 100.0)).is_err());
    }

    #[test]
    fn zero_phase_preserves_zero_input() {
        let c = design_filter(&FilterSpec::bandpass(20.0, 450.0, 4, 2000.0)).unwrap();
        let out = apply_zero_phase(&c, &vec![0.0; 500]).unwrap();
        assert_eq!(out.len(), 500);
        assert!(out.iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn zero_phase_in_band_sinusoid_unit_gain_zero_lag() {
        let fs = 2000.0;
        let c = design_filter(&FilterSpec::bandpass(20.0, 450.0, 4, fs)).unwrap();
        let x = sine(95.0, fs, 4000);
        let y = apply_zero_phase(&c, &x).unwrap();
        // Fit the settled interior of both signals on the same index range
        // so the fitted phases are directly comparable.
        let (amp_in, phase_in) = fit_sinusoid(&x[200..3800], 95.0, fs);
        let (amp_out, phase_out) = fit_sinusoid(&y[200..3800], 95.0, fs);
        let gain = amp_out / amp_in;
        let lag = phase_out - phase_in;
        assert!(gain > 0.99 && gain < 1.01, "gain {gain}");
        assert!(lag.abs() < 1e-3, "phase lag {lag} rad");
    }

    #[test]
    fn zero_phase_removes_dc_offset() {
        let fs = 2000.0;
        let c = design_filter(&FilterSpec::bandpass(20.0, 450.0, 4, fs)).unwrap();
        let x = vec![5.0; 3000];
        let y = apply_zero_phase(&c, &x).unwrap();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        assert!(mean.abs() < 0.01, "residual mean {mean}");
    }

    #[test]
    fn zero_phase_rejects_short_streams() {
        let c = design_filter(&FilterSpec::bandpass(20.0, 450.0, 4, 2000.0)).unwrap();
        let pad = zero_phase_pad_len(&c);
        assert_eq!(pad, 24);
        assert!(apply_zero_phase(&c, &vec![1.0; pad]).is_err());
        assert!(apply_zero_phase(&c, &vec![1.0; pad + 1]).is_ok());
    }

    #[test]
    fn zero_phase_cross_correlation_peak_at_zero_lag() {
        let fs = 2000.0;
        let c = design_filter(&FilterSpec::bandpass(20.0, 450.0, 4, fs)).unwrap();
        let x = sine(150.0, fs, 2000);
        let y = apply_zero_phase(&c, &x).unwrap();
        let corr = |lag: i64| -> f64 {
            let mut s = 0.0;
            for i in 0..x.len() as i64 {
                let j = i + lag;
                if j >= 0 && (j as usize) < y.len() {
                    s += x[i as usize] * y[j as usize];
                }
            }
            s
        };
        let at_zero = corr(0);
        for lag in [-3i64, -2, -1, 1, 2, 3] {
            assert!(corr(lag) < at_zero, "lag {lag} not below zero-lag peak");
        }
    }

    #[test]
    fn notch_is_idempotent_in_band() {
        // Applying the notch twice should change broadband RMS by < 1%.
        let fs = 2000.0;
        let c = design_filter(&FilterSpec::notch(60.0, 30.0, fs)).unwrap();
        // Deterministic pseudo-noise input.
        let mut state = 0x1234_5678_u64;
        let x: Vec<f64> = (0..8000)
            .map(|_| {
                state = crate::seeding::splitmix64(state);
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        let once = apply_zero_phase(&c, &x).unwrap();
        let twice = apply_zero_phase(&c, &once).unwrap();
        let rms = |v: &[f64]| (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt();
        let r1 = rms(&once);
        let r2 = rms(&twice);
        assert!((r1 - r2).abs() / r1 < 0.01, "rms {r1} vs {r2}");
    }
}
