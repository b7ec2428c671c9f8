//! CSV ingestion.
//!
//! Input contract: RFC-4180 quoting, UTF-8, header row required. One column
//! holds the label; every other column must parse as a finite real number.
//! Row numbers in errors are 1-based file lines (the header is line 1).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use super::{Dataset, Label, Sample};

/// Names the label column and the accepted label vocabulary.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CsvSchema {
    pub label_column: String,
    pub benign_values: Vec<String>,
    pub malicious_values: Vec<String>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            label_column: "label".to_string(),
            benign_values: vec!["0".to_string(), "benign".to_string()],
            malicious_values: vec!["1".to_string(), "phishing".to_string()],
        }
    }
}

impl CsvSchema {
    fn parse_label(&self, raw: &str, row: usize) -> Result<Label> {
        let v = raw.trim();
        if self.benign_values.iter().any(|b| b == v) {
            Ok(Label::Benign)
        } else if self.malicious_values.iter().any(|m| m == v) {
            Ok(Label::Malicious)
        } else {
            let mut expected = self.benign_values.clone();
            expected.extend(self.malicious_values.clone());
            Err(Error::UnknownLabel {
                row,
                value: v.to_string(),
                expected,
            })
        }
    }
}

/// Load a dataset from a CSV file. Ids are assigned in file order starting
/// at 0; class counts are computed on the fly.
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);

    let headers = reader.headers()?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h == schema.label_column)
        .ok_or_else(|| Error::Config {
            path: path.to_path_buf(),
            message: format!("label column {:?} not found in header", schema.label_column),
        })?;
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != label_idx)
        .map(|(_, h)| h.to_string())
        .collect();

    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 2; // 1-based, counting the header line
        if record.len() != headers.len() {
            return Err(Error::RaggedRow {
                row,
                expected: headers.len(),
                found: record.len(),
            });
        }
        let label = schema.parse_label(&record[label_idx], row)?;
        let mut features = Vec::with_capacity(feature_names.len());
        for (j, field) in record.iter().enumerate() {
            if j == label_idx {
                continue;
            }
            let value: f64 = field.trim().parse().map_err(|_| Error::NonNumericFeature {
                row,
                column: headers[j].to_string(),
                value: field.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::NonNumericFeature {
                    row,
                    column: headers[j].to_string(),
                    value: field.to_string(),
                });
            }
            features.push(value);
        }
        samples.push(Sample {
            id: i as u32,
            features,
            label,
        });
    }
    Dataset::new(samples, feature_names)
}

/// Write a dataset back out as CSV with the same contract `load_csv` reads.
/// Labels are written as `0`/`1`.
pub fn write_csv(path: &Path, ds: &Dataset, label_column: &str) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut writer = ::csv::Writer::from_writer(file);
    let mut header: Vec<&str> = ds.feature_names().iter().map(|s| s.as_str()).collect();
    header.push(label_column);
    writer.write_record(&header)?;
    let mut fields: Vec<String> = Vec::with_capacity(header.len());
    for s in ds.samples() {
        fields.clear();
        fields.extend(s.features.iter().map(|v| format!("{v}")));
        fields.push(s.label.index().to_string());
        writer.write_record(&fields)?;
    }
    writer.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn four_row_file_hand_check() {
        let f = write_tmp("a,b,label\n1,2,0\n3,4,0\n5,6,1\n7,8,1\n");
        let ds = load_csv(f.path(), &CsvSchema::default()).unwrap();
        assert_eq!(ds.len(), 4);
        assert_eq!(ds.class_counts(), [2, 2]);
        let ids: Vec<u32> = ds.ids().collect();
        assert_eq!(ids, vec![0, 1, 2, 3]);
        assert_eq!(ds.feature_names(), ["a", "b"]);
        assert_eq!(ds.samples()[2].features, vec![5.0, 6.0]);
        assert_eq!(ds.samples()[2].label, Label::Malicious);
    }

    #[test]
    fn header_only_file_is_empty_dataset() {
        let f = write_tmp("a,b,label\n");
        let ds = load_csv(f.path(), &CsvSchema::default()).unwrap();
        assert_eq!(ds.len(), 0);
        assert_eq!(ds.class_counts(), [0, 0]);
    }

    #[test]
    fn unknown_label_names_row() {
        let f = write_tmp("a,label\n1,0\n2,maybe\n");
        let err = load_csv(f.path(), &CsvSchema::default()).unwrap_err();
        match err {
            Error::UnknownLabel { row, value, .. } => {
                assert_eq!(row, 3);
                assert_eq!(value, "maybe");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn non_numeric_feature_names_row_and_column() {
        let f = write_tmp("a,b,label\n1,2,0\n1,oops,1\n");
        let err = load_csv(f.path(), &CsvSchema::default()).unwrap_err();
        match err {
            Error::NonNumericFeature { row, column, value } => {
                assert_eq!(row, 3);
                assert_eq!(column, "b");
                assert_eq!(value, "oops");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn ragged_row_rejected() {
        let f = write_tmp("a,b,label\n1,2,0\n1,2\n");
        let err = load_csv(f.path(), &CsvSchema::default()).unwrap_err();
        assert!(matches!(err, Error::RaggedRow { row: 3, expected: 3, found: 2 }));
    }

    #[test]
    fn phishing_vocabulary_accepted() {
        let f = write_tmp("x,label\n0.5,benign\n0.7,phishing\n");
        let ds = load_csv(f.path(), &CsvSchema::default()).unwrap();
        assert_eq!(ds.class_counts(), [1, 1]);
    }

    #[test]
    fn csv_round_trip() {
        let ds = crate::data::synthetic::toy_clusters(40, 3, 2.0, 11);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_csv(&path, &ds, "label").unwrap();
        let back = load_csv(&path, &CsvSchema::default()).unwrap();
        assert_eq!(back.len(), ds.len());
        assert_eq!(back.class_counts(), ds.class_counts());
        for (a, b) in ds.samples().iter().zip(back.samples()) {
            assert_eq!(a.label, b.label);
            for (x, y) in a.features.iter().zip(&b.features) {
                assert_eq!(x, y, "feature values must round-trip exactly");
            }
        }
    }
}
