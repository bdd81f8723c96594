//! Observation matrices: named columns of discrete states, with missing
//! entries for unobserved (latent) variables. CSV is the on-disk form;
//! missing values are empty fields.

use std::io;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("row {row} has {got} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("row {row}, column `{col}`: `{text}` is not a state index")]
    BadCell { row: usize, col: String, text: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

pub const MISSING: Option<u32> = None;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    columns: Vec<String>,
    rows: Vec<Vec<Option<u32>>>,
}

impl Dataset {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<Option<u32>>>) -> Result<Self, DataError> {
        for (i, col) in columns.iter().enumerate() {
            if columns[..i].contains(col) {
                return Err(DataError::DuplicateColumn(col.clone()));
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(DataError::RaggedRow {
                    row: i,
                    expected: columns.len(),
                    got: row.len(),
                });
            }
        }
        Ok(Self { columns, rows })
    }

    pub fn empty(columns: Vec<String>) -> Self {
        Self::new(columns, Vec::new()).expect("no rows to mismatch")
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<Option<u32>>] {
        &self.rows
    }

    pub fn column_index(&self, name: &str) -> Result<usize, DataError> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| DataError::UnknownColumn(name.to_owned()))
    }

    pub fn value(&self, row: usize, col: usize) -> Option<u32> {
        self.rows[row][col]
    }

    pub fn push_row(&mut self, row: Vec<Option<u32>>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Copy with the listed columns blanked out. Row count is unchanged.
    pub fn hide_columns(&self, vars: &[&str]) -> Result<Dataset, DataError> {
        let hidden: Vec<usize> = vars
            .iter()
            .map(|v| self.column_index(v))
            .collect::<Result<_, _>>()?;
        let mut rows = self.rows.clone();
        for row in &mut rows {
            for &h in &hidden {
                row[h] = MISSING;
            }
        }
        Ok(Dataset {
            columns: self.columns.clone(),
            rows,
        })
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let mut first = true;
            for cell in row {
                if !first {
                    out.push(',');
                }
                first = false;
                if let Some(v) = cell {
                    out.push_str(&v.to_string());
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), DataError> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    pub fn from_csv_str(text: &str) -> Result<Self, DataError> {
        Self::from_csv_reader(text.as_bytes())
    }

    pub fn read_csv(path: &Path) -> Result<Self, DataError> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn from_csv_reader(reader: impl io::Read) -> Result<Self, DataError> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let columns: Vec<String> = rdr
            .headers()?
            .iter()
            .map(|h| h.trim().to_owned())
            .collect();
        let mut rows = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != columns.len() {
                return Err(DataError::RaggedRow {
                    row: i,
                    expected: columns.len(),
                    got: record.len(),
                });
            }
            let mut row = Vec::with_capacity(columns.len());
            for (j, field) in record.iter().enumerate() {
                if field.is_empty() {
                    row.push(MISSING);
                } else {
                    let v: u32 = field.parse().map_err(|_| DataError::BadCell {
                        row: i,
                        col: columns[j].clone(),
                        text: field.to_owned(),
                    })?;
                    row.push(Some(v));
                }
            }
            rows.push(row);
        }
        Self::new(columns, rows)
    }
}
