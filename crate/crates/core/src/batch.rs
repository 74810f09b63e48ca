//! Order-preserving per-DMU evaluation, parallel when the `parallel`
//! feature is enabled.

use serde::{Deserialize, Serialize};

use crate::measures::{self, FglResult, FglVariant, MaxRgmResult, MeasureError};
use crate::technology::Technology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

/// Maps `f` over `0..n`, returning results in index order. `Parallel`
/// falls back to sequential when the crate is built without rayon.
pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

pub fn max_rgm_all(tech: &Technology, exec: Execution) -> Vec<Result<MaxRgmResult, MeasureError>> {
    let dmus = tech.dataset().dmus();
    map_indexed(dmus.len(), exec, |k| {
        measures::max_rgm(tech, &dmus[k].x, &dmus[k].y)
    })
}

pub fn fgl_all(
    tech: &Technology,
    variant: FglVariant,
    exec: Execution,
) -> Vec<Result<FglResult, MeasureError>> {
    let dmus = tech.dataset().dmus();
    map_indexed(dmus.len(), exec, |k| {
        measures::fgl(tech, &dmus[k].x, &dmus[k].y, variant)
    })
}
