//! Production technologies: a dataset, optional trade-off directions and a
//! returns-to-scale regime.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::lp::Settings;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TechError {
    #[error("trade-off column {index} has lengths ({m}, {s}), expected ({em}, {es})")]
    DimensionMismatch {
        index: usize,
        m: usize,
        s: usize,
        em: usize,
        es: usize,
    },
    #[error("trade-off column {0} has a non-finite entry")]
    NonFinite(usize),
    #[error("the CRS technology takes no trade-off columns")]
    CrsWithTradeoffs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rts {
    /// Variable returns to scale, optionally with trade-off columns.
    VrsTo,
    /// Constant returns to scale.
    Crs,
}

/// One trade-off direction `(r_minus, r_plus)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffColumn {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub r_minus: Vec<f64>,
    pub r_plus: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TradeoffSpec {
    pub columns: Vec<TradeoffColumn>,
}

impl TradeoffSpec {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn push(&mut self, label: Option<String>, r_minus: Vec<f64>, r_plus: Vec<f64>) {
        self.columns.push(TradeoffColumn {
            label,
            r_minus,
            r_plus,
        });
    }

    fn check(&self, m: usize, s: usize) -> Result<(), TechError> {
        for (index, c) in self.columns.iter().enumerate() {
            if c.r_minus.len() != m || c.r_plus.len() != s {
                return Err(TechError::DimensionMismatch {
                    index,
                    m: c.r_minus.len(),
                    s: c.r_plus.len(),
                    em: m,
                    es: s,
                });
            }
            if c.r_minus.iter().chain(&c.r_plus).any(|v| !v.is_finite()) {
                return Err(TechError::NonFinite(index));
            }
        }
        Ok(())
    }
}

/// Immutable technology shared by every model.
#[derive(Debug, Clone)]
pub struct Technology {
    dataset: Dataset,
    tradeoffs: TradeoffSpec,
    rts: Rts,
    settings: Settings,
}

impl Technology {
    /// Variable returns to scale extended by the given trade-off columns.
    pub fn vrs_to(dataset: Dataset, tradeoffs: TradeoffSpec) -> Result<Self, TechError> {
        tradeoffs.check(dataset.m(), dataset.s())?;
        Ok(Self {
            dataset,
            tradeoffs,
            rts: Rts::VrsTo,
            settings: Settings::default(),
        })
    }

    /// Plain variable returns to scale (no trade-offs).
    pub fn vrs(dataset: Dataset) -> Self {
        Self {
            dataset,
            tradeoffs: TradeoffSpec::empty(),
            rts: Rts::VrsTo,
            settings: Settings::default(),
        }
    }

    pub fn crs(dataset: Dataset) -> Self {
        Self {
            dataset,
            tradeoffs: TradeoffSpec::empty(),
            rts: Rts::Crs,
            settings: Settings::default(),
        }
    }

    pub fn new(dataset: Dataset, tradeoffs: TradeoffSpec, rts: Rts) -> Result<Self, TechError> {
        match rts {
            Rts::VrsTo => Self::vrs_to(dataset, tradeoffs),
            Rts::Crs if tradeoffs.is_empty() => Ok(Self::crs(dataset)),
            Rts::Crs => Err(TechError::CrsWithTradeoffs),
        }
    }

    pub fn with_settings(mut self, settings: Settings) -> Self {
        self.settings = settings;
        self
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn tradeoffs(&self) -> &TradeoffSpec {
        &self.tradeoffs
    }

    pub fn rts(&self) -> Rts {
        self.rts
    }

    pub fn settings(&self) -> &Settings {
        &self.settings
    }

    pub fn m(&self) -> usize {
        self.dataset.m()
    }

    pub fn s(&self) -> usize {
        self.dataset.s()
    }

    /// Number of intensity columns: DMUs followed by trade-off directions.
    pub fn columns(&self) -> usize {
        self.dataset.n() + self.tradeoffs.len()
    }

    /// Input `i` of intensity column `j` (a DMU or a trade-off direction).
    pub(crate) fn input_entry(&self, j: usize, i: usize) -> f64 {
        let n = self.dataset.n();
        if j < n {
            self.dataset.dmus()[j].x[i]
        } else {
            self.tradeoffs.columns[j - n].r_minus[i]
        }
    }

    pub(crate) fn output_entry(&self, j: usize, r: usize) -> f64 {
        let n = self.dataset.n();
        if j < n {
            self.dataset.dmus()[j].y[r]
        } else {
            self.tradeoffs.columns[j - n].r_plus[r]
        }
    }

    /// Same technology with input row `i` scaled by `inputs[i]` and output
    /// row `r` by `outputs[r]`, trade-off columns included.
    pub fn rescaled(&self, inputs: &[f64], outputs: &[f64]) -> Self {
        let mut tradeoffs = self.tradeoffs.clone();
        for c in &mut tradeoffs.columns {
            c.r_minus.iter_mut().zip(inputs).for_each(|(v, k)| *v *= k);
            c.r_plus.iter_mut().zip(outputs).for_each(|(v, k)| *v *= k);
        }
        Self {
            dataset: self.dataset.rescaled(inputs, outputs),
            tradeoffs,
            rts: self.rts,
            settings: self.settings,
        }
    }
}
