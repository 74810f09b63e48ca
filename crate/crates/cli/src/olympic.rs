//! Case-study configuration and trade-off generation from top performers.

use std::collections::BTreeSet;
use std::path::Path;

use rgm_core::data::Dataset;
use rgm_core::diagnostics::LinearInequality;
use rgm_core::technology::{TradeoffColumn, TradeoffSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tradeoff_file::{read_json, values, ColumnDoc, Decimal, FileError};

#[derive(Debug, Error, PartialEq)]
pub enum OlympicError {
    #[error("DMU id {0} is outside 1..={1}")]
    UnknownId(usize, usize),
    #[error("hub {0} is not in the top set")]
    HubNotInTopSet(usize),
    #[error("top set is empty")]
    EmptyTopSet,
}

/// Inequality `v.a + u.b >= rhs` on consistency multipliers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InequalityDoc {
    pub v: Vec<Decimal>,
    pub u: Vec<Decimal>,
    pub rhs: Decimal,
}

impl InequalityDoc {
    pub fn to_inequality(&self) -> Result<LinearInequality, FileError> {
        Ok(LinearInequality {
            v: values(&self.v)?,
            u: values(&self.u)?,
            rhs: self.rhs.value()?,
        })
    }
}

/// Case-study sets shipped next to the dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OlympicConfig {
    /// Published strongly efficient DMUs under plain VRS.
    pub efficient_set: Vec<usize>,
    /// Top performers before exclusions.
    pub top_set: Vec<usize>,
    #[serde(default)]
    pub excluded: Vec<usize>,
    pub hub: usize,
    #[serde(default)]
    pub extra_columns: Vec<ColumnDoc>,
    #[serde(default)]
    pub consistency_extra: Vec<InequalityDoc>,
}

impl OlympicConfig {
    pub fn read(path: &Path) -> Result<Self, FileError> {
        read_json(path)
    }

    /// Top set with the exclusions removed.
    pub fn refined_top_set(&self) -> Vec<usize> {
        let excluded: BTreeSet<_> = self.excluded.iter().collect();
        self.top_set
            .iter()
            .copied()
            .filter(|id| !excluded.contains(id))
            .collect()
    }

    pub fn extra_columns(&self) -> Result<Vec<TradeoffColumn>, FileError> {
        self.extra_columns
            .iter()
            .map(ColumnDoc::to_column)
            .collect()
    }

    pub fn consistency_extra(&self) -> Result<Vec<LinearInequality>, FileError> {
        self.consistency_extra
            .iter()
            .map(InequalityDoc::to_inequality)
            .collect()
    }
}

fn difference(dataset: &Dataset, p: usize, q: usize) -> TradeoffColumn {
    let (a, b) = (&dataset.dmus()[p - 1], &dataset.dmus()[q - 1]);
    TradeoffColumn {
        label: Some(format!("({p},{q})")),
        r_minus: a.x.iter().zip(&b.x).map(|(u, v)| u - v).collect(),
        r_plus: a.y.iter().zip(&b.y).map(|(u, v)| u - v).collect(),
    }
}

/// Pairs `(p, q)` with `p` outside `top` and `q` in `top`, then every other
/// top member paired with `hub` when one is given, each ordered by `p` then `q`.
pub fn olympic_pairs(
    n: usize,
    top: &[usize],
    hub: Option<usize>,
) -> Result<Vec<(usize, usize)>, OlympicError> {
    if top.is_empty() {
        return Err(OlympicError::EmptyTopSet);
    }
    for &id in top.iter().chain(hub.iter()) {
        if id == 0 || id > n {
            return Err(OlympicError::UnknownId(id, n));
        }
    }
    let top: BTreeSet<usize> = top.iter().copied().collect();
    let mut pairs = Vec::new();
    for p in (1..=n).filter(|p| !top.contains(p)) {
        pairs.extend(top.iter().map(|&q| (p, q)));
    }
    if let Some(hub) = hub {
        if !top.contains(&hub) {
            return Err(OlympicError::HubNotInTopSet(hub));
        }
        pairs.extend(top.iter().filter(|&&p| p != hub).map(|&p| (p, hub)));
    }
    Ok(pairs)
}

/// Trade-off columns `x_p - x_q`, `y_p - y_q` over [`olympic_pairs`],
/// followed by `extra` columns.
pub fn build_olympic_tradeoffs(
    dataset: &Dataset,
    top: &[usize],
    hub: usize,
    extra: &[TradeoffColumn],
) -> Result<TradeoffSpec, OlympicError> {
    let pairs = olympic_pairs(dataset.n(), top, Some(hub))?;
    let mut columns: Vec<TradeoffColumn> = pairs
        .iter()
        .map(|&(p, q)| difference(dataset, p, q))
        .collect();
    columns.extend(extra.iter().cloned());
    Ok(TradeoffSpec { columns })
}
