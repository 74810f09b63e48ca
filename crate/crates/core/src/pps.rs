//! Envelopment LPs over a technology: membership, single-coordinate
//! expansion and contraction, and the additive slack model.

use thiserror::Error;

use crate::data::index_sets;
use crate::lp::{self, LinearProgram, LpError, LpOutcome, Relation, Sense, Status};
use crate::technology::{Rts, Technology};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PpsError {
    #[error("point has lengths ({m}, {s}), technology expects ({em}, {es})")]
    DimensionMismatch {
        m: usize,
        s: usize,
        em: usize,
        es: usize,
    },
    #[error("output {0} of the assessed point is zero")]
    ZeroOutputIndex(usize),
    #[error("input {0} of the assessed point is zero")]
    ZeroInputIndex(usize),
    #[error("output {0} expands without bound; the frontier assumption fails in that direction")]
    UnboundedExpansion(usize),
    #[error("the assessed point is not in the technology")]
    NotInTechnology,
    #[error("slack model is unbounded")]
    Unbounded,
    #[error(transparent)]
    Solver(#[from] LpError),
}

/// Envelopment program skeleton. Variables are the intensity columns
/// (DMUs, then trade-off directions) followed by `extra` caller variables.
/// Rows `0..m` read `sum <= rhs`, rows `m..m+s` read `sum >= rhs`, and under
/// VRS a final row fixes the DMU weights to sum to one.
pub(crate) struct Envelope {
    pub lp: LinearProgram,
    pub cols: usize,
    m: usize,
}

impl Envelope {
    pub fn new(tech: &Technology, sense: Sense, extra: usize) -> Self {
        let (m, s, cols) = (tech.m(), tech.s(), tech.columns());
        let nv = cols + extra;
        let mut lp = LinearProgram::new(sense, vec![0.0; nv]);
        for i in 0..m {
            let mut row = vec![0.0; nv];
            for (j, v) in row.iter_mut().take(cols).enumerate() {
                *v = tech.input_entry(j, i);
            }
            lp.add_constraint(row, Relation::Le, 0.0);
        }
        for r in 0..s {
            let mut row = vec![0.0; nv];
            for (j, v) in row.iter_mut().take(cols).enumerate() {
                *v = tech.output_entry(j, r);
            }
            lp.add_constraint(row, Relation::Ge, 0.0);
        }
        if tech.rts() == Rts::VrsTo {
            let mut row = vec![0.0; nv];
            row[..tech.dataset().n()].iter_mut().for_each(|v| *v = 1.0);
            lp.add_constraint(row, Relation::Eq, 1.0);
        }
        Self { lp, cols, m }
    }

    pub fn input_row(&self, i: usize) -> usize {
        i
    }

    pub fn output_row(&self, r: usize) -> usize {
        self.m + r
    }

    pub fn var(&self, k: usize) -> usize {
        self.cols + k
    }

    pub fn set(&mut self, row: usize, var: usize, coef: f64) {
        self.lp.constraints[row].coeffs[var] = coef;
    }

    pub fn set_rhs(&mut self, row: usize, rhs: f64) {
        self.lp.constraints[row].rhs = rhs;
    }

    /// Right-hand sides `x` on input rows and `y` on output rows.
    pub fn with_point(mut self, x: &[f64], y: &[f64]) -> Self {
        for (i, v) in x.iter().enumerate() {
            self.set_rhs(self.input_row(i), *v);
        }
        for (r, v) in y.iter().enumerate() {
            self.set_rhs(self.output_row(r), *v);
        }
        self
    }

    pub fn solve(&self, tech: &Technology) -> Result<LpOutcome, LpError> {
        lp::solve(&self.lp, tech.settings())
    }
}

pub(crate) fn check_dims(tech: &Technology, x: &[f64], y: &[f64]) -> Result<(), PpsError> {
    if x.len() != tech.m() || y.len() != tech.s() {
        return Err(PpsError::DimensionMismatch {
            m: x.len(),
            s: y.len(),
            em: tech.m(),
            es: tech.s(),
        });
    }
    Ok(())
}

/// Whether `(x, y)` lies in the technology, sign conditions included.
pub fn membership(tech: &Technology, x: &[f64], y: &[f64]) -> Result<bool, PpsError> {
    check_dims(tech, x, y)?;
    let nonneg = |v: &[f64]| v.iter().all(|c| *c >= 0.0);
    let nonzero = |v: &[f64]| v.iter().any(|c| *c != 0.0);
    let signs = match tech.rts() {
        Rts::VrsTo => nonneg(x) && nonneg(y) && nonzero(y),
        Rts::Crs => nonneg(x) && nonzero(x) && nonneg(y),
    };
    if !signs {
        return Ok(false);
    }
    let env = Envelope::new(tech, Sense::Minimize, 0).with_point(x, y);
    Ok(env.solve(tech)?.status == Status::Optimal)
}

/// `max { phi | (x, y with y_r scaled by phi) in T }`.
pub fn max_output_expansion(
    tech: &Technology,
    x: &[f64],
    y: &[f64],
    r: usize,
) -> Result<f64, PpsError> {
    check_dims(tech, x, y)?;
    if r >= y.len() || y[r] <= 0.0 {
        return Err(PpsError::ZeroOutputIndex(r));
    }
    let mut env = Envelope::new(tech, Sense::Maximize, 1).with_point(x, y);
    let phi = env.var(0);
    env.lp.objective[phi] = 1.0;
    env.lp.set_bounds(phi, 1.0, f64::INFINITY);
    let row = env.output_row(r);
    env.set(row, phi, -y[r]);
    env.set_rhs(row, 0.0);
    let out = env.solve(tech)?;
    match out.status {
        Status::Optimal => Ok(out.primal[phi]),
        Status::Unbounded => Err(PpsError::UnboundedExpansion(r)),
        Status::Infeasible => Err(PpsError::NotInTechnology),
    }
}

/// `min { theta | (x with x_i scaled by theta, y) in T }`, theta in [0, 1].
pub fn min_input_contraction(
    tech: &Technology,
    x: &[f64],
    y: &[f64],
    i: usize,
) -> Result<f64, PpsError> {
    check_dims(tech, x, y)?;
    if i >= x.len() || x[i] <= 0.0 {
        return Err(PpsError::ZeroInputIndex(i));
    }
    let mut env = Envelope::new(tech, Sense::Minimize, 1).with_point(x, y);
    let theta = env.var(0);
    env.lp.objective[theta] = 1.0;
    env.lp.set_bounds(theta, 0.0, 1.0);
    let row = env.input_row(i);
    env.set(row, theta, -x[i]);
    env.set_rhs(row, 0.0);
    let out = env.solve(tech)?;
    match out.status {
        Status::Optimal => Ok(out.primal[theta].clamp(0.0, 1.0)),
        _ => Err(PpsError::NotInTechnology),
    }
}

/// Largest increment `d >= 0` of output `r` alone that stays in `T`;
/// `None` when the increment is unbounded.
pub fn max_output_increment(
    tech: &Technology,
    x: &[f64],
    y: &[f64],
    r: usize,
) -> Result<Option<f64>, PpsError> {
    check_dims(tech, x, y)?;
    let mut env = Envelope::new(tech, Sense::Maximize, 1).with_point(x, y);
    let d = env.var(0);
    env.lp.objective[d] = 1.0;
    let row = env.output_row(r);
    env.set(row, d, -1.0);
    let out = env.solve(tech)?;
    match out.status {
        Status::Optimal => Ok(Some(out.primal[d])),
        Status::Unbounded => Ok(None),
        Status::Infeasible => Err(PpsError::NotInTechnology),
    }
}

/// Additive slack model with per-coordinate weights:
/// `max wx.e_minus + wy.e_plus` over `(x - e_minus, y + e_plus) in T`,
/// with `0 <= e_minus <= x`.
pub fn weighted_additive_inefficiency(
    tech: &Technology,
    x: &[f64],
    y: &[f64],
    wx: &[f64],
    wy: &[f64],
) -> Result<f64, PpsError> {
    check_dims(tech, x, y)?;
    let (m, s) = (tech.m(), tech.s());
    let mut env = Envelope::new(tech, Sense::Maximize, m + s).with_point(x, y);
    for i in 0..m {
        let v = env.var(i);
        env.lp.objective[v] = wx[i];
        env.lp.set_bounds(v, 0.0, x[i]);
        env.set(env.input_row(i), v, 1.0);
    }
    for (r, w) in wy.iter().enumerate() {
        let v = env.var(m + r);
        env.lp.objective[v] = *w;
        env.set(env.output_row(r), v, -1.0);
    }
    let out = env.solve(tech)?;
    match out.status {
        Status::Optimal => Ok(out.value.unwrap_or(0.0).max(0.0)),
        Status::Unbounded => Err(PpsError::Unbounded),
        Status::Infeasible => Err(PpsError::NotInTechnology),
    }
}

/// Unit-weight additive slack total; zero exactly on the strong frontier.
pub fn additive_inefficiency(tech: &Technology, x: &[f64], y: &[f64]) -> Result<f64, PpsError> {
    let (wx, wy) = (vec![1.0; tech.m()], vec![1.0; tech.s()]);
    weighted_additive_inefficiency(tech, x, y, &wx, &wy)
}

/// Additive slack total with each coordinate divided by its largest
/// observed value, so the result does not depend on measurement units.
pub fn normalized_additive_inefficiency(
    tech: &Technology,
    x: &[f64],
    y: &[f64],
) -> Result<f64, PpsError> {
    let (wx, wy) = normalizing_weights(tech);
    weighted_additive_inefficiency(tech, x, y, &wx, &wy)
}

pub(crate) fn normalizing_weights(tech: &Technology) -> (Vec<f64>, Vec<f64>) {
    let ds = tech.dataset();
    let recip = |mx: f64| if mx > 0.0 { 1.0 / mx } else { 1.0 };
    let wx = (0..ds.m())
        .map(|i| recip(ds.dmus().iter().fold(0.0f64, |a, d| a.max(d.x[i]))))
        .collect();
    let wy = (0..ds.s())
        .map(|r| recip(ds.dmus().iter().fold(0.0f64, |a, d| a.max(d.y[r]))))
        .collect();
    (wx, wy)
}

/// Positive input and output coordinates of `(x, y)`.
pub fn positive_coordinates(x: &[f64], y: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let sets = index_sets(x, y);
    (sets.i_plus_x, sets.i_plus_y)
}
