//! Canonical on-disk bundle format.
//!
//! A bundle is a directory containing `manifest.json` plus one file per
//! (trial, stream). Trial stream files are headerless CSV — one row per
//! sample, one column per channel — or raw little-endian 32-bit floats in
//! sample-major order when the manifest sets `encoding: "f32le"`.
//!
//! CSV values are written with the shortest decimal representation that
//! round-trips, so `save_bundle` followed by [`load_bundle`] reproduces the
//! dataset exactly; the f32le encoding round-trips up to f32 precision.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Modality, SignalStream, TrialKey, TrialRecord};
use crate::error::{Error, Result};

/// Sample encoding of the trial stream files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BundleEncoding {
    #[default]
    Csv,
    F32le,
}

impl BundleEncoding {
    fn extension(self) -> &'static str {
        match self {
            BundleEncoding::Csv => "csv",
            BundleEncoding::F32le => "f32",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StreamEntry {
    modality: Modality,
    channels: usize,
    sample_rate_hz: f64,
    file: String,
    samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TrialEntry {
    subject: u32,
    gesture: u32,
    position: Option<u32>,
    repetition: u32,
    streams: Vec<StreamEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    name: String,
    #[serde(default)]
    encoding: BundleEncoding,
    gesture_names: BTreeMap<u32, String>,
    #[serde(default)]
    position_names: BTreeMap<u32, String>,
    trials: Vec<TrialEntry>,
}

/// Load a bundle directory into a [`Dataset`].
///
/// The returned dataset matches the manifest exactly (trial count, channel
/// counts, sample counts, sample rates) and passes [`Dataset::validate`];
/// any discrepancy or invariant violation is an error.
pub fn load_bundle(dir: &Path) -> Result<Dataset> {
    let manifest_path = dir.join("manifest.json");
    if !manifest_path.is_file() {
        return Err(Error::Bundle(format!("missing manifest: {}", manifest_path.display())));
    }
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(&manifest_path)?)?;

    let mut seen: BTreeSet<TrialKey> = BTreeSet::new();
    let mut trials = Vec::with_capacity(manifest.trials.len());
    for entry in &manifest.trials {
        let key = TrialKey {
            subject: entry.subject,
            gesture: entry.gesture,
            position: entry.position,
            repetition: entry.repetition,
        };
        if !seen.insert(key) {
            return Err(Error::Bundle(format!("duplicate trial key {key}")));
        }
        let mut streams = Vec::with_capacity(entry.streams.len());
        for se in &entry.streams {
            let path = dir.join(&se.file);
            let samples = match manifest.encoding {
                BundleEncoding::Csv => read_csv_stream(&path)?,
                BundleEncoding::F32le => read_f32le_stream(&path, se.channels)?,
            };
            let channels = samples.len();
            let n = samples.first().map_or(0, Vec::len);
            if channels != se.channels {
                return Err(Error::Bundle(format!(
                    "channel mismatch in {}: manifest declares {}, file has {channels}",
                    se.file, se.channels
                )));
            }
            if n != se.samples {
                return Err(Error::Bundle(format!(
                    "sample count mismatch in {}: manifest declares {}, file has {n}",
                    se.file, se.samples
                )));
            }
            if samples.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::Bundle(format!("non-finite sample value in {}", se.file)));
            }
            streams.push(SignalStream::new(se.modality, se.sample_rate_hz, samples));
        }
        trials.push(TrialRecord {
            subject: entry.subject,
            gesture: entry.gesture,
            position: entry.position,
            repetition: entry.repetition,
            streams,
        });
    }

    let dataset = Dataset {
        name: manifest.name,
        trials,
        gesture_names: manifest.gesture_names,
        position_names: manifest.position_names,
    };
    let violations = dataset.validate();
    if !violations.is_empty() {
        return Err(Error::Bundle(format!(
            "bundle fails validation ({} violation(s)); first: {}",
            violations.len(),
            violations[0]
        )));
    }
    Ok(dataset)
}

/// Write a dataset as a bundle directory (manifest + per-stream files).
///
/// Output is byte-identical for identical inputs: trial order, map order and
/// float formatting are all deterministic.
pub fn save_bundle(dataset: &Dataset, dir: &Path, encoding: BundleEncoding) -> Result<()> {
    let trials_dir = dir.join("trials");
    fs::create_dir_all(&trials_dir)?;

    let mut entries = Vec::with_capacity(dataset.trials.len());
    for trial in &dataset.trials {
        let mut stream_entries = Vec::with_capacity(trial.streams.len());
        for stream in &trial.streams {
            let pos = match trial.position {
                Some(p) => format!("p{p:03}"),
                None => "pnone".to_string(),
            };
            let file = format!(
                "trials/s{:03}_g{:03}_{}_r{:03}_{}.{}",
                trial.subject,
                trial.gesture,
                pos,
                trial.repetition,
                stream.modality,
                encoding.extension()
            );
            let path = dir.join(&file);
            match encoding {
                BundleEncoding::Csv => write_csv_stream(&path, &stream.samples)?,
                BundleEncoding::F32le => write_f32le_stream(&path, &stream.samples)?,
            }
            stream_entries.push(StreamEntry {
                modality: stream.modality,
                channels: stream.channel_count(),
                sample_rate_hz: stream.sample_rate_hz,
                file,
                samples: stream.len(),
            });
        }
        entries.push(TrialEntry {
            subject: trial.subject,
            gesture: trial.gesture,
            position: trial.position,
            repetition: trial.repetition,
            streams: stream_entries,
        });
    }

    let manifest = Manifest {
        name: dataset.name.clone(),
        encoding,
        gesture_names: dataset.gesture_names.clone(),
        position_names: dataset.position_names.clone(),
        trials: entries,
    };
    let mut writer = BufWriter::new(fs::File::create(dir.join("manifest.json"))?);
    serde_json::to_writer_pretty(&mut writer, &manifest)?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

/// Read a headerless CSV stream file: one row per sample, one column per
/// channel. Returns channel-major data.
fn read_csv_stream(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Bundle(format!("cannot read {}: {e}", path.display())))?;
    let mut channels: Vec<Vec<f64>> = Vec::new();
    for (row_idx, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if channels.is_empty() {
            channels = vec![Vec::new(); fields.len()];
        } else if fields.len() != channels.len() {
            return Err(Error::Bundle(format!(
                "ragged row {row_idx} in {}: expected {} columns, found {}",
                path.display(),
                channels.len(),
                fields.len()
            )));
        }
        for (c, field) in fields.iter().enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| {
                Error::Bundle(format!(
                    "invalid number '{field}' at row {row_idx} in {}",
                    path.display()
                ))
            })?;
            channels[c].push(value);
        }
    }
    Ok(channels)
}

fn write_csv_stream(path: &Path, samples: &[Vec<f64>]) -> Result<()> {
    let mut writer = BufWriter::new(fs::File::create(path)?);
    let n = samples.first().map_or(0, Vec::len);
    let mut line = String::new();
    for i in 0..n {
        line.clear();
        for (c, channel) in samples.iter().enumerate() {
            if c > 0 {
                line.push(',');
            }
            // Shortest round-trip decimal form.
            line.push_str(&format!("{}", channel[i]));
        }
        line.push('\n');
        writer.write_all(line.as_bytes())?;
    }
    writer.flush()?;
    Ok(())
}

/// Read a raw little-endian f32 stream file, sample-major `sample × channel`.
fn read_f32le_stream(path: &Path, channels: usize) -> Result<Vec<Vec<f64>>> {
    if channels == 0 {
        return Err(Error::Bundle(format!("{}: declared zero channels", path.display())));
    }
    let mut bytes = Vec::new();
    fs::File::open(path)
        .map_err(|e| Error::Bundle(format!("cannot read {}: {e}", path.display())))?
        .read_to_end(&mut bytes)?;
    if bytes.len() % 4 != 0 {
        return Err(Error::Bundle(format!(
            "{}: byte length {} is not a multiple of 4",
            path.display(),
            bytes.len()
        )));
    }
    let total = bytes.len() / 4;
    if total % channels != 0 {
        return Err(Error::Bundle(format!(
            "channel mismatch in {}: {total} values do not divide into {channels} channels",
            path.display()
        )));
    }
    let n = total / channels;
    let mut out = vec![vec![0.0f64; n]; channels];
    for i in 0..n {
        for (c, channel) in out.iter_mut().enumerate() {
            let off = (i * channels + c) * 4;
            let v = f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
            channel[i] = f64::from(v);
        }
    }
    Ok(out)
}

fn write_f32le_stream(path: &Path, samples: &[Vec<f64>]) -> Result<()> {
    let mut writer = BufWriter::new(fs::File::create(path)?);
    let n = samples.first().map_or(0, Vec::len);
    for i in 0..n {
        for channel in samples {
            writer.write_all(&(channel[i] as f32).to_le_bytes())?;
        }
    }
    writer.flush()?;
    Ok(())
}
