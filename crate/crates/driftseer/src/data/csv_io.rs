//! CSV ingestion and export.
//!
//! Files are comma-separated UTF-8, row-major, with an optional header.
//! Labels map to dense class ids in first-appearance order. Exported
//! generator streams carry a trailing `concept` provenance column that the
//! loader ignores.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use super::DriftSchedule;
use crate::stream::{ClassId, DataPoint};

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("cannot read '{path}': {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv parse failure: {0}")]
    Malformed(String),
    #[error("file has no data rows")]
    Empty,
    #[error("row {row}: missing column {column}")]
    MissingColumn { row: usize, column: usize },
    #[error("row {row}: feature column {column} holds non-numeric value '{value}'")]
    NonNumeric {
        row: usize,
        column: usize,
        value: String,
    },
}

/// Which columns hold features and labels. Defaults fit the exported
/// format: a header row, the last non-`concept` column as the label, and
/// every other column as a feature.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSchema {
    /// Zero-based feature column positions; `None` selects every column
    /// except the label and a header-named `concept` column.
    pub feature_columns: Option<Vec<usize>>,
    /// Zero-based label column; `None` selects the last non-`concept`
    /// column.
    pub label_column: Option<usize>,
    pub has_header: bool,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            feature_columns: None,
            label_column: None,
            has_header: true,
        }
    }
}

/// Load a CSV file into stream order. Labels are remapped to dense ids in
/// first-appearance order; every diagnostic names the offending row.
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<Vec<DataPoint>, CsvError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(schema.has_header)
        .flexible(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => CsvError::Io {
                path: path.display().to_string(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => CsvError::Malformed(e.to_string()),
        })?;

    let mut concept_column: Option<usize> = None;
    if schema.has_header {
        let headers = reader
            .headers()
            .map_err(|e| CsvError::Malformed(e.to_string()))?;
        concept_column = headers.iter().position(|h| h.trim() == "concept");
    }

    let mut points = Vec::new();
    let mut label_ids: HashMap<String, ClassId> = HashMap::new();
    let header_rows = usize::from(schema.has_header);
    for (i, record) in reader.records().enumerate() {
        let row = i + 1 + header_rows; // 1-based file row for diagnostics
        let record = record.map_err(|e| CsvError::Malformed(format!("row {row}: {e}")))?;
        let width = record.len();

        let label_col = match schema.label_column {
            Some(c) => c,
            None => {
                let mut c = width.checked_sub(1).ok_or(CsvError::Empty)?;
                if Some(c) == concept_column {
                    c = c.checked_sub(1).ok_or(CsvError::Empty)?;
                }
                c
            }
        };
        let feature_cols: Vec<usize> = match &schema.feature_columns {
            Some(cols) => cols.clone(),
            None => (0..width)
                .filter(|&c| c != label_col && Some(c) != concept_column)
                .collect(),
        };

        let mut features = Vec::with_capacity(feature_cols.len());
        for &c in &feature_cols {
            let cell = record
                .get(c)
                .ok_or(CsvError::MissingColumn { row, column: c })?;
            let value: f64 = cell.trim().parse().map_err(|_| CsvError::NonNumeric {
                row,
                column: c,
                value: cell.to_string(),
            })?;
            features.push(value);
        }
        let label_cell = record.get(label_col).ok_or(CsvError::MissingColumn {
            row,
            column: label_col,
        })?;
        let next_id = label_ids.len() as ClassId;
        let label = *label_ids
            .entry(label_cell.trim().to_string())
            .or_insert(next_id);
        points.push(DataPoint::labeled(points.len() as u64, features, label));
    }
    if points.is_empty() {
        return Err(CsvError::Empty);
    }
    Ok(points)
}

/// Write a generated stream as CSV with feature columns `f0..fd-1`, the
/// hidden label, and the active concept for debugging.
pub fn export_csv(
    points: &[DataPoint],
    schedule: &DriftSchedule,
    out: &mut dyn Write,
) -> std::io::Result<()> {
    let dim = points.first().map_or(0, DataPoint::dim);
    let mut header: Vec<String> = (0..dim).map(|d| format!("f{d}")).collect();
    header.push("label".into());
    header.push("concept".into());
    writeln!(out, "{}", header.join(","))?;
    for p in points {
        let mut cells: Vec<String> = p.features().iter().map(|v| format!("{v}")).collect();
        cells.push(p.truth().map_or_else(String::new, |l| l.to_string()));
        cells.push(schedule.concept_at(p.index()).to_string());
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_sea;

    fn write_temp(contents: &str) -> std::path::PathBuf {
        let path = std::env::temp_dir().join(format!(
            "driftseer-csv-test-{}-{:?}",
            std::process::id(),
            std::thread::current().id()
        ));
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        path
    }

    #[test]
    fn loads_headered_file() {
        let path = write_temp("a,b,label\n1.0,2.0,up\n3.0,4.0,down\n5.5,6.5,up\n");
        let pts = load_csv(&path, &CsvSchema::default()).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(pts.len(), 3);
        assert_eq!(pts[0].dim(), 2);
        assert_eq!(pts[0].features(), &[1.0, 2.0]);
        // Labels in first-appearance order: up -> 0, down -> 1.
        assert_eq!(pts[0].truth(), Some(0));
        assert_eq!(pts[1].truth(), Some(1));
        assert_eq!(pts[2].truth(), Some(0));
    }

    #[test]
    fn non_numeric_cell_names_the_row() {
        let mut body = String::from("a,b,label\n");
        for i in 0..5 {
            body.push_str(&format!("{i}.0,1.0,x\n"));
        }
        body.push_str("oops,1.0,x\n"); // file row 7
        let path = write_temp(&body);
        let err = load_csv(&path, &CsvSchema::default()).unwrap_err();
        std::fs::remove_file(&path).ok();
        match err {
            CsvError::NonNumeric { row, .. } => assert_eq!(row, 7),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_an_error() {
        let path = write_temp("a,b,label\n");
        let err = load_csv(&path, &CsvSchema::default()).unwrap_err();
        std::fs::remove_file(&path).ok();
        assert!(matches!(err, CsvError::Empty));
    }

    #[test]
    fn export_round_trips_through_the_loader() {
        let schedule = DriftSchedule::new(vec![(5, 1)]).unwrap();
        let pts = gen_sea(10, &schedule, 4).unwrap();
        let mut buf = Vec::new();
        export_csv(&pts, &schedule, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("f0,f1,label,concept\n"));

        let path = write_temp(&text);
        let loaded = load_csv(&path, &CsvSchema::default()).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(loaded.len(), pts.len());
        for (a, b) in pts.iter().zip(loaded.iter()) {
            assert_eq!(a.dim(), b.dim());
            for (x, y) in a.features().iter().zip(b.features().iter()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        // Dense remapping preserves binary labels starting from the first
        // label seen.
        let first = pts[0].truth().unwrap();
        assert_eq!(loaded[0].truth(), Some(0));
        for (a, b) in pts.iter().zip(loaded.iter()) {
            assert_eq!(a.truth() == Some(first), b.truth() == Some(0));
        }
    }

    #[test]
    fn missing_file_reports_io_error() {
        let err = load_csv(
            Path::new("/nonexistent/driftseer.csv"),
            &CsvSchema::default(),
        )
        .unwrap_err();
        assert!(matches!(err, CsvError::Io { .. }));
    }
}
