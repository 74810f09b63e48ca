//! JSON documents that carry numbers as decimal strings.

use std::path::Path;

use rgm_core::technology::{TradeoffColumn, TradeoffSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("`{0}` is not a finite decimal number")]
    BadNumber(String),
}

/// A number written either as a decimal string or as a bare JSON number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Decimal {
    Text(String),
    Number(f64),
}

impl Decimal {
    pub fn value(&self) -> Result<f64, FileError> {
        let v = match self {
            Decimal::Text(t) => t
                .trim()
                .parse::<f64>()
                .map_err(|_| FileError::BadNumber(t.clone()))?,
            Decimal::Number(v) => *v,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(FileError::BadNumber(format!("{v}")))
        }
    }

    /// Shortest text that parses back to exactly `v`.
    pub fn from_f64(v: f64) -> Self {
        Decimal::Text(format!("{v}"))
    }
}

pub fn values(list: &[Decimal]) -> Result<Vec<f64>, FileError> {
    list.iter().map(Decimal::value).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub r_minus: Vec<Decimal>,
    pub r_plus: Vec<Decimal>,
}

impl ColumnDoc {
    pub fn to_column(&self) -> Result<TradeoffColumn, FileError> {
        Ok(TradeoffColumn {
            label: self.label.clone(),
            r_minus: values(&self.r_minus)?,
            r_plus: values(&self.r_plus)?,
        })
    }

    pub fn from_column(c: &TradeoffColumn) -> Self {
        Self {
            label: c.label.clone(),
            r_minus: c.r_minus.iter().copied().map(Decimal::from_f64).collect(),
            r_plus: c.r_plus.iter().copied().map(Decimal::from_f64).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TradeoffDoc {
    pub columns: Vec<ColumnDoc>,
}

impl TradeoffDoc {
    pub fn to_spec(&self) -> Result<TradeoffSpec, FileError> {
        Ok(TradeoffSpec {
            columns: self
                .columns
                .iter()
                .map(ColumnDoc::to_column)
                .collect::<Result<_, _>>()?,
        })
    }

    pub fn from_spec(spec: &TradeoffSpec) -> Self {
        Self {
            columns: spec.columns.iter().map(ColumnDoc::from_column).collect(),
        }
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, FileError> {
    let text = std::fs::read_to_string(path).map_err(|e| FileError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| FileError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn read_tradeoffs(path: &Path) -> Result<TradeoffSpec, FileError> {
    read_json::<TradeoffDoc>(path)?.to_spec()
}
