//! Observed decision-making units and dataset validation.

use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("row {row}: column `{column}` is not a finite number")]
    NonFiniteValue { row: usize, column: String },
    #[error("row {row}: column `{column}` is negative ({value})")]
    NegativeValue {
        row: usize,
        column: String,
        value: f64,
    },
    #[error("row {row}: the {side} vector is all zero")]
    ZeroVector { row: usize, side: &'static str },
    #[error("duplicate DMU name `{0}`")]
    DuplicateName(String),
    #[error("row {row}: {message}")]
    Malformed { row: usize, message: String },
    #[error("header: {0}")]
    BadHeader(String),
    #[error("io: {0}")]
    Io(String),
}

/// A decision-making unit: one observed input/output pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dmu {
    /// 1-based position in its dataset.
    pub id: usize,
    pub name: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Validated collection of DMUs sharing `m` inputs and `s` outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    input_labels: Vec<String>,
    output_labels: Vec<String>,
    dmus: Vec<Dmu>,
}

/// Positive-coordinate index sets of a point (0-based indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSets {
    pub i_plus_x: Vec<usize>,
    pub i_plus_y: Vec<usize>,
}

/// Exact sign partition; data are observations, so no tolerance applies.
pub fn index_sets(x: &[f64], y: &[f64]) -> IndexSets {
    IndexSets {
        i_plus_x: (0..x.len()).filter(|&i| x[i] > 0.0).collect(),
        i_plus_y: (0..y.len()).filter(|&r| y[r] > 0.0).collect(),
    }
}

impl Dmu {
    pub fn index_sets(&self) -> IndexSets {
        index_sets(&self.x, &self.y)
    }
}

/// A parsed but unvalidated table: header plus decimal text cells.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    pub fn from_reader<R: Read>(reader: R) -> Result<Self, DataError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| DataError::BadHeader(e.to_string()))?
            .iter()
            .map(str::to_owned)
            .collect();
        let mut rows = Vec::new();
        for (k, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| DataError::Malformed {
                row: k + 1,
                message: e.to_string(),
            })?;
            rows.push(rec.iter().map(str::to_owned).collect());
        }
        Ok(Self { header, rows })
    }

    pub fn from_path(path: &Path) -> Result<Self, DataError> {
        let file = std::fs::File::open(path)
            .map_err(|e| DataError::Io(format!("{}: {e}", path.display())))?;
        Self::from_reader(file)
    }
}

fn parse_cell(row: usize, column: &str, text: &str) -> Result<f64, DataError> {
    let value: f64 = text.parse().map_err(|_| DataError::NonFiniteValue {
        row,
        column: column.to_owned(),
    })?;
    if !value.is_finite() {
        return Err(DataError::NonFiniteValue {
            row,
            column: column.to_owned(),
        });
    }
    if value < 0.0 {
        return Err(DataError::NegativeValue {
            row,
            column: column.to_owned(),
            value,
        });
    }
    Ok(value)
}

/// Validates a `dmu,name,x_*...,y_*...` table. Inputs and outputs are the
/// header columns prefixed `x_` and `y_`, in order; ids are reassigned 1..n.
pub fn validate_dataset(raw: &RawTable) -> Result<Dataset, DataError> {
    let h = &raw.header;
    if h.len() < 4 || h[0] != "dmu" || h[1] != "name" {
        return Err(DataError::BadHeader(
            "expected `dmu,name,x_<label>...,y_<label>...`".into(),
        ));
    }
    let m = h[2..].iter().take_while(|c| c.starts_with("x_")).count();
    let s = h.len() - 2 - m;
    if m == 0 || s == 0 || !h[2 + m..].iter().all(|c| c.starts_with("y_")) {
        return Err(DataError::BadHeader(
            "inputs must be `x_` columns followed by `y_` columns, at least one of each".into(),
        ));
    }
    if raw.rows.is_empty() {
        return Err(DataError::EmptyDataset);
    }
    let mut dmus = Vec::with_capacity(raw.rows.len());
    let mut seen = HashSet::new();
    for (k, cells) in raw.rows.iter().enumerate() {
        let row = k + 1;
        if cells.len() != h.len() {
            return Err(DataError::Malformed {
                row,
                message: format!("{} cells, expected {}", cells.len(), h.len()),
            });
        }
        let name = cells[1].clone();
        if !seen.insert(name.clone()) {
            return Err(DataError::DuplicateName(name));
        }
        let x = (0..m)
            .map(|i| parse_cell(row, &h[2 + i], &cells[2 + i]))
            .collect::<Result<Vec<_>, _>>()?;
        let y = (0..s)
            .map(|r| parse_cell(row, &h[2 + m + r], &cells[2 + m + r]))
            .collect::<Result<Vec<_>, _>>()?;
        dmus.push(Dmu {
            id: row,
            name,
            x,
            y,
        });
    }
    let labels = |range: std::ops::Range<usize>| h[range].to_vec();
    Dataset::new(labels(2..2 + m), labels(2 + m..h.len()), dmus)
}

impl Dataset {
    /// Builds a dataset from already-parsed DMUs, enforcing every invariant.
    pub fn new(
        input_labels: Vec<String>,
        output_labels: Vec<String>,
        dmus: Vec<Dmu>,
    ) -> Result<Self, DataError> {
        if dmus.is_empty() {
            return Err(DataError::EmptyDataset);
        }
        let (m, s) = (input_labels.len(), output_labels.len());
        let mut names = HashSet::new();
        let mut out = Vec::with_capacity(dmus.len());
        for (k, mut d) in dmus.into_iter().enumerate() {
            let row = k + 1;
            if d.x.len() != m || d.y.len() != s {
                return Err(DataError::Malformed {
                    row,
                    message: format!(
                        "vector lengths ({}, {}) but dataset is ({m}, {s})",
                        d.x.len(),
                        d.y.len()
                    ),
                });
            }
            for (label, v) in input_labels
                .iter()
                .zip(&d.x)
                .chain(output_labels.iter().zip(&d.y))
            {
                if !v.is_finite() {
                    return Err(DataError::NonFiniteValue {
                        row,
                        column: label.clone(),
                    });
                }
                if *v < 0.0 {
                    return Err(DataError::NegativeValue {
                        row,
                        column: label.clone(),
                        value: *v,
                    });
                }
            }
            if d.x.iter().all(|v| *v == 0.0) {
                return Err(DataError::ZeroVector { row, side: "input" });
            }
            if d.y.iter().all(|v| *v == 0.0) {
                return Err(DataError::ZeroVector {
                    row,
                    side: "output",
                });
            }
            if !names.insert(d.name.clone()) {
                return Err(DataError::DuplicateName(d.name));
            }
            d.id = row;
            out.push(d);
        }
        Ok(Self {
            input_labels,
            output_labels,
            dmus: out,
        })
    }

    pub fn from_csv_path(path: &Path) -> Result<Self, DataError> {
        validate_dataset(&RawTable::from_path(path)?)
    }

    pub fn from_csv_str(text: &str) -> Result<Self, DataError> {
        validate_dataset(&RawTable::from_reader(text.as_bytes())?)
    }

    pub fn m(&self) -> usize {
        self.input_labels.len()
    }

    pub fn s(&self) -> usize {
        self.output_labels.len()
    }

    pub fn n(&self) -> usize {
        self.dmus.len()
    }

    pub fn dmus(&self) -> &[Dmu] {
        &self.dmus
    }

    /// DMU by 1-based id.
    pub fn dmu(&self, id: usize) -> Option<&Dmu> {
        id.checked_sub(1).and_then(|k| self.dmus.get(k))
    }

    pub fn input_labels(&self) -> &[String] {
        &self.input_labels
    }

    pub fn output_labels(&self) -> &[String] {
        &self.output_labels
    }

    /// Multiplies input row `i` (or output row `r`) of every DMU by `factor`.
    pub fn rescaled(&self, inputs: &[f64], outputs: &[f64]) -> Self {
        let mut out = self.clone();
        for d in &mut out.dmus {
            d.x.iter_mut().zip(inputs).for_each(|(v, c)| *v *= c);
            d.y.iter_mut().zip(outputs).for_each(|(v, c)| *v *= c);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "dmu,name,x_a,y_b\n";

    #[test]
    fn minimal_instance() {
        let ds = Dataset::from_csv_str(&format!("{HEADER}1,only,1,1\n")).unwrap();
        assert_eq!((ds.n(), ds.m(), ds.s()), (1, 1, 1));
    }

    #[test]
    fn zero_output_vector_rejected() {
        let text = "dmu,name,x_a,y_g,y_s,y_b\n1,z,3,0,0,0\n";
        assert_eq!(
            Dataset::from_csv_str(text),
            Err(DataError::ZeroVector {
                row: 1,
                side: "output"
            })
        );
    }

    #[test]
    fn bad_cells_are_typed() {
        assert!(matches!(
            Dataset::from_csv_str(&format!("{HEADER}1,a,-1,1\n")),
            Err(DataError::NegativeValue { .. })
        ));
        assert!(matches!(
            Dataset::from_csv_str(&format!("{HEADER}1,a,inf,1\n")),
            Err(DataError::NonFiniteValue { .. })
        ));
        assert!(matches!(
            Dataset::from_csv_str(&format!("{HEADER}1,a,NaN,1\n")),
            Err(DataError::NonFiniteValue { .. })
        ));
        assert!(matches!(
            Dataset::from_csv_str(&format!("{HEADER}1,a,1,1\n2,a,2,2\n")),
            Err(DataError::DuplicateName(_))
        ));
        assert_eq!(Dataset::from_csv_str(HEADER), Err(DataError::EmptyDataset));
    }

    #[test]
    fn header_must_split_inputs_then_outputs() {
        assert!(matches!(
            Dataset::from_csv_str("dmu,name,y_a,x_b\n1,a,1,1\n"),
            Err(DataError::BadHeader(_))
        ));
    }

    #[test]
    fn index_sets_use_strict_sign() {
        let sets = index_sets(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]);
        assert_eq!(sets.i_plus_x, vec![0, 1, 2]);
        assert_eq!(sets.i_plus_y, vec![0, 1, 2]);
        let sets = index_sets(&[1.0, 0.0], &[0.0, 0.0, 1.0]);
        assert_eq!(sets.i_plus_x, vec![0]);
        assert_eq!(sets.i_plus_y, vec![2]);
    }
}
