use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::FEATURE_NAMES;
use crate::matrix::Matrix;
use crate::{N_CLASSES, N_FEATURES};

/// Label spellings used in CSV files, indexed by class.
pub const CLASS_NAMES: [&str; N_CLASSES] = ["normal", "wb", "sm"];

pub fn parse_label(s: &str) -> Result<usize> {
    let t = s.trim().to_ascii_lowercase();
    CLASS_NAMES
        .iter()
        .position(|n| *n == t)
        .or_else(|| t.parse::<usize>().ok().filter(|&c| c < N_CLASSES))
        .ok_or_else(|| Error::InvalidData(format!("unknown label {s:?}")))
}

/// Labeled feature table: one row of 16 descriptors per specimen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vec<usize>,
    pub ids: Vec<String>,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vec<usize>, ids: Vec<String>) -> Result<Self> {
        if x.cols() != N_FEATURES {
            return Err(Error::DimensionMismatch {
                expected: N_FEATURES,
                actual: x.cols(),
            });
        }
        if y.len() != x.rows() || ids.len() != x.rows() {
            return Err(Error::InvalidData(format!(
                "{} rows, {} labels, {} ids",
                x.rows(),
                y.len(),
                ids.len()
            )));
        }
        if let Some(c) = y.iter().find(|&&c| c >= N_CLASSES) {
            return Err(Error::InvalidData(format!("label {c} out of range")));
        }
        if !x.all_finite() {
            return Err(Error::InvalidData("non-finite feature value".into()));
        }
        Ok(Self { x, y, ids })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        super::class_counts(&self.y, N_CLASSES)
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            x: self.x.select_rows(indices),
            y: indices.iter().map(|&i| self.y[i]).collect(),
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
        }
    }

    /// Reads `id,label,f01..f16`. A leading `path` column (as written by
    /// feature extraction) is accepted and ignored.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
        let id_col = col("id").ok_or_else(|| Error::InvalidData("missing id column".into()))?;
        let label_col = col("label").ok_or_else(|| Error::InvalidData("missing label column".into()))?;
        let feature_cols: Vec<usize> = (1..=N_FEATURES)
            .map(|j| col(&format!("f{j:02}")).ok_or_else(|| Error::InvalidData(format!("missing column f{j:02}"))))
            .collect::<Result<_>>()?;

        let (mut data, mut y, mut ids) = (Vec::new(), Vec::new(), Vec::new());
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            ids.push(rec[id_col].to_string());
            y.push(parse_label(&rec[label_col])?);
            for &c in &feature_cols {
                let v: f64 = rec[c]
                    .parse()
                    .map_err(|_| Error::InvalidData(format!("row {}: bad number {:?}", line + 1, &rec[c])))?;
                data.push(v);
            }
        }
        let n = y.len();
        Self::new(Matrix::from_vec(n, N_FEATURES, data)?, y, ids)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["id".to_string(), "label".to_string()];
        header.extend((1..=N_FEATURES).map(|j| format!("f{j:02}")));
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec = vec![self.ids[i].clone(), CLASS_NAMES[self.y[i]].to_string()];
            rec.extend(self.x.row(i).iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    /// Human-readable name of feature column `j`.
    pub fn feature_name(j: usize) -> &'static str {
        FEATURE_NAMES[j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_is_exact() {
        let ds = crate::pipeline::synthesize_dataset(4, 1.5, 3).unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let back = Dataset::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn path_column_and_case() {
        let mut s = String::from("path,id,label");
        for j in 1..=16 {
            s.push_str(&format!(",f{j:02}"));
        }
        s.push_str("\nimg/a.png,a,WB");
        for _ in 0..16 {
            s.push_str(",0.5");
        }
        s.push('\n');
        let ds = Dataset::read_csv(s.as_bytes()).unwrap();
        assert_eq!(ds.y, vec![1]);
        assert_eq!(ds.ids, vec!["a"]);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(parse_label("woody").is_err());
        let s = "id,label,f01\nx,normal,1\n";
        assert!(Dataset::read_csv(s.as_bytes()).is_err());
    }
}
