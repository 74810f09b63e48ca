//! Checks run before evaluation: facet positivity of the frontier,
//! free-lunch detection, trade-off consistency and the strong efficient set.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::batch::{map_indexed, Execution};
use crate::data::Dataset;
use crate::lp::{self, LinearProgram, LpError, LpOutcome, Relation, Sense, Status};
use crate::pps::{self, Envelope, PpsError};
use crate::technology::{Rts, Technology};

/// Relative tolerance for primal/dual agreement.
pub const DUALITY_TOL: f64 = 1e-6;
/// Normalized additive slack at or below this counts as strongly efficient.
pub const EFFICIENCY_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("pair ({0}, {1}) references an unknown DMU")]
    UnknownPair(usize, usize),
    #[error("inequality has lengths ({m}, {s}), expected ({em}, {es})")]
    DimensionMismatch {
        m: usize,
        s: usize,
        em: usize,
        es: usize,
    },
    #[error("{name}: primal {primal} and dual {dual} disagree")]
    DualityGap {
        name: String,
        primal: f64,
        dual: f64,
    },
    #[error(transparent)]
    Pps(#[from] PpsError),
    #[error(transparent)]
    Solver(#[from] LpError),
}

/// Primal and dual objective of one solved diagnostic LP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityCheck {
    pub name: String,
    pub primal: f64,
    pub dual: f64,
}

impl DualityCheck {
    pub fn agrees(&self) -> bool {
        (self.primal - self.dual).abs() <= DUALITY_TOL * (1.0 + self.primal.abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetPositivity {
    /// `None` when the multiplier system is infeasible.
    pub v_star: Vec<Option<f64>>,
    pub u_star: Vec<Option<f64>>,
    pub passed: bool,
    pub duality: Vec<DualityCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeLunch {
    /// `None` when the LP is infeasible or unbounded.
    pub value: Option<f64>,
    pub unbounded: bool,
    pub has_free_lunch: bool,
    /// Optimal value of the dual check, when it has one.
    pub dual_value: Option<f64>,
    pub duality: Option<DualityCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub v_star: Vec<Option<f64>>,
    pub u_star: Vec<Option<f64>>,
    pub facet_positivity_passed: bool,
    pub free_lunch_value: Option<f64>,
    pub free_lunch_unbounded: bool,
    pub has_free_lunch: bool,
    /// Whether every `u_r*` is positive, the premise of the free-lunch test.
    pub free_lunch_hypothesis_met: bool,
    pub dual_free_lunch_value: Option<f64>,
    pub duality: Vec<DualityCheck>,
}

fn check_duality(name: String, out: &LpOutcome) -> Result<DualityCheck, DiagnosticsError> {
    let check = DualityCheck {
        name,
        primal: out.value.unwrap_or(f64::NAN),
        dual: out.dual_value.unwrap_or(f64::NAN),
    };
    if check.agrees() {
        Ok(check)
    } else {
        Err(DiagnosticsError::DualityGap {
            name: check.name,
            primal: check.primal,
            dual: check.dual,
        })
    }
}

/// Direction columns entering the positivity system: the trade-offs, or
/// the observed DMUs themselves under CRS.
fn direction_columns(tech: &Technology) -> Vec<(Vec<f64>, Vec<f64>)> {
    match tech.rts() {
        Rts::VrsTo => tech
            .tradeoffs()
            .columns
            .iter()
            .map(|c| (c.r_minus.clone(), c.r_plus.clone()))
            .collect(),
        Rts::Crs => tech
            .dataset()
            .dmus()
            .iter()
            .map(|d| (d.x.clone(), d.y.clone()))
            .collect(),
    }
}

/// Minimizes each multiplier over
/// `{ sum v + sum u = 1, v.r_minus - u.r_plus >= 0, v, u >= 0 }`.
pub fn facet_positivity_check(tech: &Technology) -> Result<FacetPositivity, DiagnosticsError> {
    let (m, s) = (tech.m(), tech.s());
    let columns = direction_columns(tech);
    let mut base = LinearProgram::new(Sense::Minimize, vec![0.0; m + s]);
    base.add_constraint(vec![1.0; m + s], Relation::Eq, 1.0);
    for (rm, rp) in &columns {
        let row = rm.iter().copied().chain(rp.iter().map(|v| -v)).collect();
        base.add_constraint(row, Relation::Ge, 0.0);
    }
    let results = map_indexed(m + s, Execution::Parallel, |k| {
        let mut lp = base.clone();
        lp.objective[k] = 1.0;
        lp::solve(&lp, tech.settings())
    });
    let mut stars = Vec::with_capacity(m + s);
    let mut duality = Vec::new();
    for (k, out) in results.into_iter().enumerate() {
        let out = out?;
        if out.status == Status::Optimal {
            let name = if k < m {
                format!("v_{}", k + 1)
            } else {
                format!("u_{}", k - m + 1)
            };
            duality.push(check_duality(name, &out)?);
            stars.push(Some(out.primal[k].max(0.0)));
        } else {
            stars.push(None);
        }
    }
    let tol = tech.settings().feasibility_tol;
    let passed = stars.iter().all(|v| matches!(v, Some(x) if *x > tol));
    let u_star = stars.split_off(m);
    Ok(FacetPositivity {
        v_star: stars,
        u_star,
        passed,
        duality,
    })
}

/// `max sum d` over `(0, d) in P`, with the dual check solved alongside.
pub fn free_lunch_check(tech: &Technology) -> Result<FreeLunch, DiagnosticsError> {
    let (m, s) = (tech.m(), tech.s());
    let mut env = Envelope::new(tech, Sense::Maximize, s);
    for r in 0..s {
        let d = env.var(r);
        env.lp.objective[d] = 1.0;
        env.set(env.output_row(r), d, -1.0);
    }
    let primal = env.solve(tech)?;

    // dual: min -sigma s.t. v.x_j - u.y_j >= sigma, v.R- - u.R+ >= 0, u >= 1
    let sigma = m + s;
    let mut dual = LinearProgram::new(Sense::Minimize, vec![0.0; m + s + 1]);
    dual.objective[sigma] = -1.0;
    dual.set_bounds(sigma, f64::NEG_INFINITY, f64::INFINITY);
    for r in 0..s {
        dual.set_bounds(m + r, 1.0, f64::INFINITY);
    }
    let n = tech.dataset().n();
    for j in 0..tech.columns() {
        let mut row: Vec<f64> = (0..m)
            .map(|i| tech.input_entry(j, i))
            .chain((0..s).map(|r| -tech.output_entry(j, r)))
            .collect();
        row.push(if j < n && tech.rts() == Rts::VrsTo {
            -1.0
        } else {
            0.0
        });
        dual.add_constraint(row, Relation::Ge, 0.0);
    }
    let dual_out = lp::solve(&dual, tech.settings())?;
    let dual_value = dual_out
        .value
        .filter(|_| dual_out.status == Status::Optimal);

    let tol = tech.settings().feasibility_tol;
    let report = match primal.status {
        Status::Optimal => {
            let value = primal.value.unwrap_or(0.0).max(0.0);
            let duality = DualityCheck {
                name: "free lunch".into(),
                primal: value,
                dual: dual_value.unwrap_or(f64::NAN),
            };
            if !duality.agrees() {
                return Err(DiagnosticsError::DualityGap {
                    name: duality.name,
                    primal: duality.primal,
                    dual: duality.dual,
                });
            }
            FreeLunch {
                value: Some(value),
                unbounded: false,
                has_free_lunch: value > tol,
                dual_value,
                duality: Some(duality),
            }
        }
        Status::Unbounded => FreeLunch {
            value: None,
            unbounded: true,
            has_free_lunch: true,
            dual_value,
            duality: None,
        },
        Status::Infeasible => FreeLunch {
            value: None,
            unbounded: false,
            has_free_lunch: false,
            dual_value,
            duality: None,
        },
    };
    Ok(report)
}

/// Both pre-flight checks, merged.
pub fn diagnose(tech: &Technology) -> Result<DiagnosticsReport, DiagnosticsError> {
    let fp = facet_positivity_check(tech)?;
    let fl = free_lunch_check(tech)?;
    let tol = tech.settings().feasibility_tol;
    let mut duality = fp.duality;
    duality.extend(fl.duality);
    Ok(DiagnosticsReport {
        free_lunch_hypothesis_met: fp.u_star.iter().all(|u| matches!(u, Some(v) if *v > tol)),
        v_star: fp.v_star,
        u_star: fp.u_star,
        facet_positivity_passed: fp.passed,
        free_lunch_value: fl.value,
        free_lunch_unbounded: fl.unbounded,
        has_free_lunch: fl.has_free_lunch,
        dual_free_lunch_value: fl.dual_value,
        duality,
    })
}

/// `v.a + u.b >= rhs` on consistency multipliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearInequality {
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Feasibility {
    Feasible,
    Infeasible,
}

/// Feasibility of `v(x_p - x_q) - u(y_p - y_q) >= 0` over `pairs` together
/// with `sum v + sum u = 1`, `v, u >= 0` and `extra`. Pair ids are 1-based.
pub fn tradeoff_consistency(
    dataset: &Dataset,
    pairs: &[(usize, usize)],
    extra: &[LinearInequality],
    settings: &lp::Settings,
) -> Result<Feasibility, DiagnosticsError> {
    let (m, s) = (dataset.m(), dataset.s());
    let mut lp = LinearProgram::new(Sense::Minimize, vec![0.0; m + s]);
    lp.add_constraint(vec![1.0; m + s], Relation::Eq, 1.0);
    for &(p, q) in pairs {
        let (Some(a), Some(b)) = (dataset.dmu(p), dataset.dmu(q)) else {
            return Err(DiagnosticsError::UnknownPair(p, q));
        };
        let row = (0..m)
            .map(|i| a.x[i] - b.x[i])
            .chain((0..s).map(|r| -(a.y[r] - b.y[r])))
            .collect();
        lp.add_constraint(row, Relation::Ge, 0.0);
    }
    for ineq in extra {
        if ineq.v.len() != m || ineq.u.len() != s {
            return Err(DiagnosticsError::DimensionMismatch {
                m: ineq.v.len(),
                s: ineq.u.len(),
                em: m,
                es: s,
            });
        }
        let row = ineq.v.iter().chain(&ineq.u).copied().collect();
        lp.add_constraint(row, Relation::Ge, ineq.rhs);
    }
    Ok(match lp::solve(&lp, settings)?.status {
        Status::Infeasible => Feasibility::Infeasible,
        _ => Feasibility::Feasible,
    })
}

/// Normalized additive slack of every DMU, in id order.
pub fn additive_scores(tech: &Technology, exec: Execution) -> Result<Vec<f64>, DiagnosticsError> {
    let dmus = tech.dataset().dmus();
    map_indexed(dmus.len(), exec, |k| {
        pps::normalized_additive_inefficiency(tech, &dmus[k].x, &dmus[k].y)
    })
    .into_iter()
    .map(|r| r.map_err(DiagnosticsError::from))
    .collect()
}

/// Ids of DMUs with no normalized additive slack.
pub fn strong_efficient_set(tech: &Technology) -> Result<Vec<usize>, DiagnosticsError> {
    let scores = additive_scores(tech, Execution::Parallel)?;
    Ok(tech
        .dataset()
        .dmus()
        .iter()
        .zip(scores)
        .filter(|(_, v)| *v <= EFFICIENCY_TOL)
        .map(|(d, _)| d.id)
        .collect())
}
