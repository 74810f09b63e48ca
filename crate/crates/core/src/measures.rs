//! Efficiency measures: the extended max Russell graph measure with its
//! closest target, and the FGL family evaluated by tangent cutting planes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{LpError, Relation, Sense, Status};
use crate::pps::{self, check_dims, positive_coordinates, Envelope, PpsError};
use crate::technology::Technology;

/// Relative tolerance for ties between coordinates and sides.
pub const TIE_TOL: f64 = 1e-9;
/// Cutting planes stop once every `1/phi_r - t_r` falls below this.
pub const CUT_TOL: f64 = 1e-7;
pub const CUT_MAX_ITERATIONS: usize = 100;
/// Slack allowed when comparing the zero-input probe to the optimum.
pub const ZERO_INPUT_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("output {0} expands without bound; the frontier assumption is violated")]
    AssumptionViolated(usize),
    #[error("the assessed point is not in the technology")]
    NotInTechnology,
    #[error("no optimum exists: {0}")]
    NoOptimum(String),
    #[error("cutting planes stopped after {iterations} iterations with gap {gap:e}")]
    NotConverged { iterations: usize, gap: f64 },
    #[error("score {score} is outside ({lower}, 1]")]
    OutOfRange { score: f64, lower: f64 },
    #[error(transparent)]
    Pps(PpsError),
    #[error(transparent)]
    Solver(#[from] LpError),
}

impl From<PpsError> for MeasureError {
    fn from(e: PpsError) -> Self {
        match e {
            PpsError::UnboundedExpansion(r) => Self::AssumptionViolated(r),
            PpsError::NotInTechnology => Self::NotInTechnology,
            PpsError::Solver(e) => Self::Solver(e),
            other => Self::Pps(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Input,
    Output,
    Efficient,
}

/// One single-coordinate LP value: `theta_i^min` or `phi_r^max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoordinateValue {
    pub side: Side,
    pub index: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxRgmResult {
    pub score: f64,
    /// Largest single-input contraction factor (may be 0 on free-lunch data).
    pub theta_star: f64,
    /// Smallest single-output expansion factor.
    pub phi_star: f64,
    pub side: Side,
    pub coordinate: Option<usize>,
    pub target_x: Vec<f64>,
    pub target_y: Vec<f64>,
    /// Optimal factors of the max problem: ones except at the attaining coordinate.
    pub theta_opt: Vec<f64>,
    pub phi_opt: Vec<f64>,
    pub per_coordinate: Vec<CoordinateValue>,
}

fn closest_score(n: f64, theta_star: f64, phi_star: f64) -> f64 {
    ((n - 1.0 + theta_star) / n).max((n - 1.0 + 1.0 / phi_star) / n)
}

impl MaxRgmResult {
    /// Score rebuilt from `per_coordinate` alone.
    pub fn score_from_coordinates(&self, m: usize, s: usize) -> f64 {
        let values = |side| {
            self.per_coordinate
                .iter()
                .filter(move |c| c.side == side)
                .map(|c| c.value)
        };
        let phi_star = values(Side::Output).fold(f64::INFINITY, f64::min);
        let theta_star = if values(Side::Input).next().is_none() {
            1.0 / phi_star
        } else {
            values(Side::Input).fold(f64::NEG_INFINITY, f64::max)
        };
        closest_score((m + s) as f64, theta_star, phi_star)
    }
}

/// Index of the first value within `TIE_TOL` of the extreme picked by `better`.
fn first_extreme(values: &[(usize, f64)], better: impl Fn(f64, f64) -> bool) -> (usize, f64) {
    let mut best = values[0];
    for &v in &values[1..] {
        if better(v.1, best.1) {
            best = v;
        }
    }
    let tol = TIE_TOL * best.1.abs().max(1.0);
    *values
        .iter()
        .find(|v| (v.1 - best.1).abs() <= tol)
        .expect("the extreme is in the list")
}

/// Extended max Russell graph measure of `(x, y)` and its closest target,
/// from one LP per positive coordinate.
pub fn max_rgm(tech: &Technology, x: &[f64], y: &[f64]) -> Result<MaxRgmResult, MeasureError> {
    check_dims(tech, x, y)?;
    let (ix, iy) = positive_coordinates(x, y);
    if iy.is_empty() {
        return Err(MeasureError::NotInTechnology);
    }
    let mut per_coordinate = Vec::with_capacity(ix.len() + iy.len());
    let mut phis = Vec::with_capacity(iy.len());
    for &r in &iy {
        let v = pps::max_output_expansion(tech, x, y, r)?;
        phis.push((r, v));
        per_coordinate.push(CoordinateValue {
            side: Side::Output,
            index: r,
            value: v,
        });
    }
    let mut thetas = Vec::with_capacity(ix.len());
    for &i in &ix {
        let v = pps::min_input_contraction(tech, x, y, i)?;
        thetas.push((i, v));
        per_coordinate.push(CoordinateValue {
            side: Side::Input,
            index: i,
            value: v,
        });
    }

    let (r_best, phi_star) = first_extreme(&phis, |a, b| a < b);
    let (i_best, theta_star) = if thetas.is_empty() {
        (None, 1.0 / phi_star)
    } else {
        let (i, t) = first_extreme(&thetas, |a, b| a > b);
        (Some(i), t)
    };
    let n = (tech.m() + tech.s()) as f64;
    let score = closest_score(n, theta_star, phi_star);

    let mut theta_opt = vec![1.0; tech.m()];
    let mut phi_opt = vec![1.0; tech.s()];
    let mut target_x = x.to_vec();
    let mut target_y = y.to_vec();
    let out_factor = 1.0 / phi_star;
    let (side, coordinate) = if theta_star.max(out_factor) >= 1.0 - TIE_TOL {
        (Side::Efficient, None)
    } else if out_factor >= theta_star - TIE_TOL || i_best.is_none() {
        phi_opt[r_best] = phi_star;
        target_y[r_best] = y[r_best] * phi_star;
        (Side::Output, Some(r_best))
    } else {
        let i = i_best.expect("input side requires a positive input");
        theta_opt[i] = theta_star;
        target_x[i] = x[i] * theta_star;
        (Side::Input, Some(i))
    };

    Ok(MaxRgmResult {
        score,
        theta_star,
        phi_star,
        side,
        coordinate,
        target_x,
        target_y,
        theta_opt,
        phi_opt,
        per_coordinate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FglVariant {
    /// Weights `delta(x_i)`, `delta(y_r)`.
    Classic,
    /// Output weights `psi_r`.
    Modified,
    /// Every coordinate weighted; outputs must be positive.
    Russell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FglResult {
    pub score: f64,
    pub theta: Vec<f64>,
    /// `f64::INFINITY` marks a term whose value is an infimum, not attained.
    pub phi: Vec<f64>,
    pub target_x: Vec<f64>,
    pub target_y: Vec<f64>,
    pub psi: Option<Vec<u8>>,
    pub zero_input_target: bool,
    pub converged: bool,
    /// Objective at the returned point minus the final LP lower bound.
    pub gap: f64,
    pub iterations: usize,
    pub annotation: Option<String>,
}

/// `psi_r`: 1 when `y_r > 0` or output `r` can be raised from zero inside `T`.
pub fn psi(tech: &Technology, x: &[f64], y: &[f64], r: usize) -> Result<u8, MeasureError> {
    check_dims(tech, x, y)?;
    if y[r] > 0.0 {
        return Ok(1);
    }
    Ok(match pps::max_output_increment(tech, x, y, r)? {
        None => 1,
        Some(d) if d > tech.settings().feasibility_tol => 1,
        Some(_) => 0,
    })
}

/// Rescales a max RGM score onto (0, 1].
pub fn normalized_score(score: f64, m: usize, s: usize) -> Result<f64, MeasureError> {
    let n = (m + s) as f64;
    let lower = 1.0 - 1.0 / n;
    if !(score >= lower && score <= 1.0) {
        return Err(MeasureError::OutOfRange { score, lower });
    }
    Ok(n * score - (n - 1.0))
}

/// Role of one output term in the FGL objective.
#[derive(Debug, Clone, Copy, PartialEq)]
enum OutTerm {
    Inactive,
    Active,
    /// Weighted but `y_r = 0`: the infimum of `1/phi_r` is 0.
    Vanishing,
}

struct CutOutcome {
    value: f64,
    lower_bound: f64,
    theta: Vec<f64>,
    phi: Vec<f64>,
    iterations: usize,
}

/// Minimizes `(wx.theta + sum_active 1/phi_r) / weight` by Kelley cuts.
/// `Ok(None)` when the technology admits no feasible `(theta, phi)`.
fn cutting_plane(
    tech: &Technology,
    x: &[f64],
    y: &[f64],
    wx: &[f64],
    out: &[OutTerm],
    fixed_theta: Option<&[usize]>,
    seeds: &[Option<f64>],
) -> Result<Option<CutOutcome>, MeasureError> {
    let (m, s) = (tech.m(), tech.s());
    let weight =
        wx.iter().sum::<f64>() + out.iter().filter(|t| **t != OutTerm::Inactive).count() as f64;
    if weight == 0.0 {
        return Err(MeasureError::NoOptimum(
            "no coordinate carries weight".into(),
        ));
    }
    let mut env = Envelope::new(tech, Sense::Minimize, m + 2 * s).with_point(x, y);
    let cols = env.cols;
    let theta_var = |i: usize| cols + i;
    let phi_var = |r: usize| cols + m + r;
    let t_var = |r: usize| cols + m + s + r;
    for i in 0..m {
        let v = theta_var(i);
        let row = env.input_row(i);
        env.set(row, v, -x[i]);
        env.set_rhs(row, 0.0);
        env.lp.objective[v] = wx[i] / weight;
        if wx[i] == 0.0 {
            env.lp.set_bounds(v, 1.0, 1.0);
        } else {
            env.lp.set_bounds(v, 0.0, 1.0);
        }
    }
    if let Some(zeroed) = fixed_theta {
        for &i in zeroed {
            env.lp.set_bounds(theta_var(i), 0.0, 0.0);
        }
    }
    for r in 0..s {
        let (p, t) = (phi_var(r), t_var(r));
        let row = env.output_row(r);
        env.set(row, p, -y[r]);
        env.set_rhs(row, 0.0);
        match out[r] {
            OutTerm::Active => {
                env.lp.set_bounds(p, 1.0, f64::INFINITY);
                env.lp.set_bounds(t, 0.0, 1.0);
                env.lp.objective[t] = 1.0 / weight;
            }
            OutTerm::Inactive | OutTerm::Vanishing => {
                env.lp.set_bounds(p, 1.0, 1.0);
                env.lp.set_bounds(t, 0.0, 0.0);
            }
        }
    }
    let nv = env.lp.num_vars();
    let add_cut = |lp: &mut crate::lp::LinearProgram, r: usize, at: f64| {
        let mut row = vec![0.0; nv];
        row[t_var(r)] = 1.0;
        row[phi_var(r)] = 1.0 / (at * at);
        lp.add_constraint(row, Relation::Ge, 2.0 / at);
    };
    for r in (0..s).filter(|&r| out[r] == OutTerm::Active) {
        add_cut(&mut env.lp, r, 1.0);
        if let Some(at) = seeds[r].filter(|v| v.is_finite() && *v > 1.0) {
            add_cut(&mut env.lp, r, at);
        }
    }

    for iteration in 1..=CUT_MAX_ITERATIONS {
        let sol = env.solve(tech)?;
        match sol.status {
            Status::Optimal => {}
            Status::Infeasible => return Ok(None),
            Status::Unbounded => {
                return Err(MeasureError::NoOptimum(
                    "cutting-plane master is unbounded".into(),
                ))
            }
        }
        let p = &sol.primal;
        let theta: Vec<f64> = (0..m).map(|i| p[theta_var(i)].clamp(0.0, 1.0)).collect();
        let phi: Vec<f64> = (0..s).map(|r| p[phi_var(r)].max(1.0)).collect();
        let mut worst = 0.0f64;
        let mut cuts = Vec::new();
        for r in (0..s).filter(|&r| out[r] == OutTerm::Active) {
            let gap = 1.0 / phi[r] - p[t_var(r)];
            worst = worst.max(gap);
            if gap >= CUT_TOL {
                cuts.push((r, phi[r]));
            }
        }
        let value = (wx.iter().zip(&theta).map(|(w, t)| w * t).sum::<f64>()
            + (0..s)
                .filter(|&r| out[r] == OutTerm::Active)
                .map(|r| 1.0 / phi[r])
                .sum::<f64>())
            / weight;
        if cuts.is_empty() {
            return Ok(Some(CutOutcome {
                value,
                lower_bound: sol.value.unwrap_or(value),
                theta,
                phi,
                iterations: iteration,
            }));
        }
        if iteration == CUT_MAX_ITERATIONS {
            return Err(MeasureError::NotConverged {
                iterations: iteration,
                gap: worst,
            });
        }
        for (r, at) in cuts {
            add_cut(&mut env.lp, r, at);
        }
    }
    unreachable!("the loop returns on its last iteration")
}

/// FGL-type efficiency of `(x, y)` under the chosen weighting.
pub fn fgl(
    tech: &Technology,
    x: &[f64],
    y: &[f64],
    variant: FglVariant,
) -> Result<FglResult, MeasureError> {
    check_dims(tech, x, y)?;
    let (m, s) = (tech.m(), tech.s());
    let delta = |v: f64| if v > 0.0 { 1.0 } else { 0.0 };
    let mut psi_values = None;
    let (wx, out): (Vec<f64>, Vec<OutTerm>) = match variant {
        FglVariant::Classic => (
            x.iter().map(|v| delta(*v)).collect(),
            y.iter()
                .map(|v| {
                    if *v > 0.0 {
                        OutTerm::Active
                    } else {
                        OutTerm::Inactive
                    }
                })
                .collect(),
        ),
        FglVariant::Modified => {
            let ps = (0..s)
                .map(|r| psi(tech, x, y, r))
                .collect::<Result<Vec<u8>, _>>()?;
            let out = (0..s)
                .map(|r| match (ps[r], y[r] > 0.0) {
                    (0, _) => OutTerm::Inactive,
                    (_, true) => OutTerm::Active,
                    (_, false) => OutTerm::Vanishing,
                })
                .collect();
            psi_values = Some(ps);
            (x.iter().map(|v| delta(*v)).collect(), out)
        }
        FglVariant::Russell => {
            if let Some(r) = y.iter().position(|v| *v == 0.0) {
                return Err(MeasureError::NoOptimum(format!(
                    "output {r} is zero, so 1/phi_{r} has no attained minimum"
                )));
            }
            (vec![1.0; m], vec![OutTerm::Active; s])
        }
    };

    let mut seeds = vec![None; s];
    for r in (0..s).filter(|&r| out[r] == OutTerm::Active) {
        seeds[r] = match pps::max_output_expansion(tech, x, y, r) {
            Ok(v) => Some(v),
            Err(PpsError::UnboundedExpansion(_)) => None,
            Err(e) => return Err(e.into()),
        };
    }

    let best =
        cutting_plane(tech, x, y, &wx, &out, None, &seeds)?.ok_or(MeasureError::NotInTechnology)?;
    let (ix, _) = positive_coordinates(x, y);
    let zero_input_target = if ix.is_empty() {
        false
    } else {
        match cutting_plane(tech, x, y, &wx, &out, Some(&ix), &seeds)? {
            Some(probe) => probe.value <= best.value + ZERO_INPUT_TOL,
            None => false,
        }
    };

    let mut phi = best.phi.clone();
    let mut annotation = None;
    for r in (0..s).filter(|&r| out[r] == OutTerm::Vanishing) {
        phi[r] = f64::INFINITY;
        annotation = Some("infimum, not minimum".to_owned());
    }
    let target_x = x.iter().zip(&best.theta).map(|(v, t)| v * t).collect();
    let target_y = y
        .iter()
        .zip(&best.phi)
        .map(|(v, p)| if *v == 0.0 { 0.0 } else { v * p })
        .collect();
    Ok(FglResult {
        score: best.value,
        theta: best.theta,
        phi,
        target_x,
        target_y,
        psi: psi_values,
        zero_input_target,
        converged: true,
        gap: (best.value - best.lower_bound).max(0.0),
        iterations: best.iterations,
        annotation,
    })
}
