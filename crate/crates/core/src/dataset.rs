//! CSV form of a [`FeatureDataset`]: `student_id,<features...>,label`.

use std::io::{Read, Write};

use thiserror::Error;

use crate::domain::{DatasetError, FeatureDataset, Provenance, StudentId};
use crate::psai::PSAI_FEATURES;

#[derive(Debug, Error)]
pub enum FeatureFileError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("header must start with student_id and end with label")]
    BadHeader,
    #[error("line {line}: {message}")]
    BadRow { line: usize, message: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

pub fn write_feature_csv<W: Write>(sink: W, ds: &FeatureDataset) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec!["student_id".to_string()];
    header.extend(ds.feature_names().iter().cloned());
    header.push("label".into());
    w.write_record(&header)?;
    for ((id, row), &label) in ds.student_ids().iter().zip(ds.rows()).zip(ds.labels()) {
        let mut rec = Vec::with_capacity(row.len() + 2);
        rec.push(id.to_string());
        rec.extend(row.iter().map(f64::to_string));
        rec.push(if label { "1" } else { "0" }.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a feature CSV. Provenance is `psai` when the columns are exactly
/// the PSAI ones, `naive` otherwise.
pub fn read_feature_csv<R: Read>(source: R) -> Result<FeatureDataset, FeatureFileError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.len() < 2 || header[0] != "student_id" || header[header.len() - 1] != "label" {
        return Err(FeatureFileError::BadHeader);
    }
    let names: Vec<String> = header[1..header.len() - 1].to_vec();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut ids = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let bad = |message: String| FeatureFileError::BadRow { line, message };
        ids.push(StudentId::new(&rec[0]));
        let row = (1..rec.len() - 1)
            .map(|j| rec[j].parse::<f64>().map_err(|e| bad(format!("column {}: {e}", header[j]))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
        labels.push(match &rec[rec.len() - 1] {
            "1" => true,
            "0" => false,
            other => return Err(bad(format!("label `{other}` is not 0 or 1"))),
        });
    }
    let provenance = if names == PSAI_FEATURES {
        Provenance::Psai
    } else {
        Provenance::Naive
    };
    Ok(FeatureDataset::new(names, rows, labels, ids, provenance)?)
}
