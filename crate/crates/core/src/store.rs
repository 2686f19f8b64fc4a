//! On-disk feature store: one CSV per (subject, feature set) plus a JSON
//! sidecar describing how the features were produced.
//!
//! CSV layout: label columns `gesture,position,repetition,window_start_s`
//! followed by the feature columns (`ch{c}_{feature}`). Rows are grouped by
//! trial in dataset order with windows in index order; the `position` cell
//! is empty when the dataset has no position labels.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FeatureRow, FeatureSetKind, RowLabels};
use crate::preprocess::PreprocessConfig;
use crate::window::WindowSpec;

/// Metadata sidecar (`store.json`) written next to the CSVs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StoreMeta {
    pub dataset_name: String,
    pub subjects: Vec<u32>,
    pub kinds: Vec<FeatureSetKind>,
    pub window: WindowSpec,
    pub preprocess: PreprocessConfig,
    pub zc_ssc_epsilon: f64,
    pub tdpsd_version: String,
    #[serde(default)]
    pub gesture_names: BTreeMap<u32, String>,
    #[serde(default)]
    pub position_names: BTreeMap<u32, String>,
}

fn file_name(subject: u32, kind: FeatureSetKind) -> String {
    format!("s{subject:03}_{kind}.csv")
}

/// Write feature matrices (one per kind, spanning all subjects) to `dir`.
pub fn write_store(dir: &Path, matrices: &[FeatureMatrix], meta: &StoreMeta) -> Result<()> {
    fs::create_dir_all(dir)?;
    for matrix in matrices {
        let mut by_subject: BTreeMap<u32, Vec<&FeatureRow>> = BTreeMap::new();
        for row in &matrix.rows {
            by_subject.entry(row.labels.subject).or_default().push(row);
        }
        for (subject, rows) in by_subject {
            let path = dir.join(file_name(subject, matrix.kind));
            let mut writer = csv::Writer::from_path(&path)?;
            let mut header =
                vec!["gesture".to_string(), "position".into(), "repetition".into(), "window_start_s".into()];
            header.extend(matrix.columns.iter().cloned());
            writer.write_record(&header)?;
            for row in rows {
                let mut record = Vec::with_capacity(4 + row.values.len());
                record.push(row.labels.gesture.to_string());
                record.push(row.labels.position.map_or(String::new(), |p| p.to_string()));
                record.push(row.labels.repetition.to_string());
                record.push(format!("{}", row.labels.start_time_s));
                for v in &row.values {
                    record.push(format!("{v}"));
                }
                writer.write_record(&record)?;
            }
            writer.flush()?;
        }
    }
    let json = serde_json::to_string_pretty(meta)?;
    fs::write(dir.join("store.json"), json + "\n")?;
    Ok(())
}

/// Read the store metadata sidecar.
pub fn read_meta(dir: &Path) -> Result<StoreMeta> {
    let path = dir.join("store.json");
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::Bundle(format!("cannot read store metadata {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

/// Read one feature set across all subjects listed in the store metadata.
///
/// Window indices are reconstructed from the stable row grouping: rows of
/// one trial are consecutive, so the index restarts whenever the
/// (gesture, position, repetition) triple changes.
pub fn read_matrix(dir: &Path, kind: FeatureSetKind) -> Result<FeatureMatrix> {
    let meta = read_meta(dir)?;
    if !meta.kinds.contains(&kind) {
        return Err(Error::Bundle(format!(
            "feature store {} does not contain {kind}",
            dir.display()
        )));
    }
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for &subject in &meta.subjects {
        let path = dir.join(file_name(subject, kind));
        let mut reader = csv::Reader::from_path(&path)
            .map_err(|e| Error::Bundle(format!("cannot read {}: {e}", path.display())))?;
        let header: Vec<String> =
            reader.headers()?.iter().map(str::to_string).collect();
        if header.len() < 5 {
            return Err(Error::Bundle(format!("{}: too few columns", path.display())));
        }
        let feature_columns = header[4..].to_vec();
        match &columns {
            None => columns = Some(feature_columns),
            Some(existing) if *existing != feature_columns => {
                return Err(Error::Bundle(format!(
                    "{}: feature columns disagree with other subjects",
                    path.display()
                )));
            }
            _ => {}
        }

        let mut prev: Option<(u32, Option<u32>, u32)> = None;
        let mut window_index = 0usize;
        for record in reader.records() {
            let record = record?;
            let parse_u32 = |i: usize| -> Result<u32> {
                record[i].parse().map_err(|_| {
                    Error::Bundle(format!("{}: invalid integer '{}'", path.display(), &record[i]))
                })
            };
            let gesture = parse_u32(0)?;
            let position =
                if record[1].is_empty() { None } else { Some(parse_u32(1)?) };
            let repetition = parse_u32(2)?;
            let start_time_s: f64 = record[3].parse().map_err(|_| {
                Error::Bundle(format!("{}: invalid float '{}'", path.display(), &record[3]))
            })?;
            let key = (gesture, position, repetition);
            if prev == Some(key) {
                window_index += 1;
            } else {
                window_index = 0;
                prev = Some(key);
            }
            let mut values = Vec::with_capacity(record.len() - 4);
            for field in record.iter().skip(4) {
                values.push(field.parse().map_err(|_| {
                    Error::Bundle(format!("{}: invalid float '{field}'", path.display()))
                })?);
            }
            rows.push(FeatureRow {
                labels: RowLabels {
                    subject,
                    gesture,
                    position,
                    repetition,
                    window_index,
                    start_time_s,
                },
                values,
            });
        }
    }
    Ok(FeatureMatrix {
        kind,
        columns: columns.unwrap_or_default(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_matrix(kind: FeatureSetKind, positions: bool) -> FeatureMatrix {
        let mut rows = Vec::new();
        for subject in 1..=2u32 {
            for gesture in 1..=2u32 {
                for repetition in 1..=2u32 {
                    for window_index in 0..3usize {
                        rows.push(FeatureRow {
                            labels: RowLabels {
                                subject,
                                gesture,
                                position: positions.then_some(1),
                                repetition,
                                window_index,
                                start_time_s: window_index as f64 * 0.1,
                            },
                            values: vec![
                                subject as f64 + 0.125,
                                gesture as f64 * 1e-7,
                                window_index as f64 - 0.5,
                            ],
                        });
                    }
                }
            }
        }
        FeatureMatrix {
            kind,
            columns: vec!["ch0_med".into(), "ch1_med".into(), "ch2_med".into()],
            rows,
        }
    }

    fn toy_meta() -> StoreMeta {
        StoreMeta {
            dataset_name: "toy".into(),
            subjects: vec![1, 2],
            kinds: vec![FeatureSetKind::AccMed],
            window: WindowSpec::default(),
            preprocess: PreprocessConfig::default(),
            zc_ssc_epsilon: 0.0,
            tdpsd_version: crate::features::TDPSD_DEFINITION_VERSION.into(),
            gesture_names: BTreeMap::new(),
            position_names: BTreeMap::new(),
        }
    }

    #[test]
    fn store_round_trip_preserves_rows() {
        let dir = tempfile::tempdir().unwrap();
        let matrix = toy_matrix(FeatureSetKind::AccMed, true);
        write_store(dir.path(), std::slice::from_ref(&matrix), &toy_meta()).unwrap();
        let loaded = read_matrix(dir.path(), FeatureSetKind::AccMed).unwrap();
        assert_eq!(matrix, loaded);
    }

    #[test]
    fn store_round_trip_without_positions() {
        let dir = tempfile::tempdir().unwrap();
        let matrix = toy_matrix(FeatureSetKind::AccMed, false);
        write_store(dir.path(), std::slice::from_ref(&matrix), &toy_meta()).unwrap();
        let loaded = read_matrix(dir.path(), FeatureSetKind::AccMed).unwrap();
        assert_eq!(matrix, loaded);
        assert!(!loaded.has_positions());
    }

    #[test]
    fn missing_kind_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let matrix = toy_matrix(FeatureSetKind::AccMed, true);
        write_store(dir.path(), &[matrix], &toy_meta()).unwrap();
        assert!(read_matrix(dir.path(), FeatureSetKind::EmgTd).is_err());
    }
}
