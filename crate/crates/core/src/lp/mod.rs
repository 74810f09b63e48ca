//! Deterministic dense linear-programming engine.
//!
//! Every model in the crate is assembled as a [`LinearProgram`] and handed to
//! [`solve`]. The engine converts the problem to standard form, equilibrates
//! rows and columns with power-of-two factors, runs a two-phase primal simplex
//! on a dense tableau under Bland's rule, and finally re-solves the optimal
//! basis with a partially pivoted LU factorization so that the reported primal
//! point and multipliers do not carry the tableau's accumulated round-off.

mod lu;
mod simplex;
mod standard;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Optimization direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Relation of a constraint row to its right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A linear program over `n` variables with per-variable bounds.
///
/// Bounds default to `[0, +inf)`. Use `f64::NEG_INFINITY` / `f64::INFINITY`
/// for free directions.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            sense,
            objective,
            constraints: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> usize {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Malformed(
                "bound vectors do not match objective length".into(),
            ));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::Malformed(
                "objective has a non-finite coefficient".into(),
            ));
        }
        for (k, row) in self.constraints.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(LpError::Malformed(format!(
                    "row {k} has {} coefficients, expected {n}",
                    row.coeffs.len()
                )));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(LpError::Malformed(format!(
                    "row {k} has a non-finite entry"
                )));
            }
        }
        for j in 0..n {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if lo.is_nan()
                || hi.is_nan()
                || lo > hi
                || lo == f64::INFINITY
                || hi == f64::NEG_INFINITY
            {
                return Err(LpError::Malformed(format!(
                    "variable {j} has bounds [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest relative violation `violation / (1 + |rhs|)` over rows and bounds.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.constraints {
            let lhs: f64 = row.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let excess = match row.relation {
                Relation::Le => lhs - row.rhs,
                Relation::Ge => row.rhs - lhs,
                Relation::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(excess / (1.0 + row.rhs.abs()));
        }
        for (j, &v) in x.iter().enumerate() {
            if self.lower[j].is_finite() {
                worst = worst.max((self.lower[j] - v) / (1.0 + self.lower[j].abs()));
            }
            if self.upper[j].is_finite() {
                worst = worst.max((v - self.upper[j]) / (1.0 + self.upper[j].abs()));
            }
        }
        worst
    }
}

/// Solver tolerances. Feasibility, optimality and pivot thresholds act on the
/// equilibrated problem; `check_tol` is the relative tolerance used to verify
/// the unscaled answer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub pivot_tol: f64,
    pub check_tol: f64,
    pub max_iterations: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
            pivot_tol: 1e-10,
            check_tol: 1e-7,
            max_iterations: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of [`solve`].
///
/// `duals` are shadow prices: the derivative of the optimal value with
/// respect to each row's right-hand side, in the problem's own sense.
#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: Status,
    pub value: Option<f64>,
    pub primal: Vec<f64>,
    pub duals: Option<Vec<f64>>,
    /// Objective of the dual problem at `duals` (including bound multipliers).
    pub dual_value: Option<f64>,
    pub iterations: usize,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    /// Optimal value, or `None` for infeasible / unbounded problems.
    pub fn optimum(&self) -> Option<f64> {
        self.value
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("iteration limit of {0} reached")]
    IterationLimit(usize),
}

/// Solves `lp`. Pure and deterministic: equal inputs give bit-identical outcomes.
pub fn solve(lp: &LinearProgram, settings: &Settings) -> Result<LpOutcome, LpError> {
    lp.validate()?;
    let std_form = standard::StandardForm::build(lp);
    let raw = simplex::run(&std_form, settings)?;
    let sign = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    match raw {
        simplex::RawOutcome::Infeasible { iterations } => Ok(LpOutcome {
            status: Status::Infeasible,
            value: None,
            primal: Vec::new(),
            duals: None,
            dual_value: None,
            iterations,
        }),
        simplex::RawOutcome::Unbounded { iterations } => Ok(LpOutcome {
            status: Status::Unbounded,
            value: None,
            primal: Vec::new(),
            duals: None,
            dual_value: None,
            iterations,
        }),
        simplex::RawOutcome::Optimal {
            x_std,
            y_std,
            iterations,
        } => {
            let primal = std_form.recover(&x_std);
            let violation = lp.max_violation(&primal);
            if violation > settings.check_tol {
                return Err(LpError::NumericalBreakdown(format!(
                    "optimal point violates the constraints by {violation:e}"
                )));
            }
            let dual_std: f64 = std_form
                .b
                .iter()
                .zip(&y_std)
                .map(|(b, y)| b * y)
                .sum::<f64>()
                + std_form.obj_offset;
            let duals = y_std[..std_form.original_rows]
                .iter()
                .map(|y| sign * y)
                .collect();
            Ok(LpOutcome {
                status: Status::Optimal,
                value: Some(lp.objective_value(&primal)),
                primal,
                duals: Some(duals),
                dual_value: Some(sign * dual_std),
                iterations,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> Settings {
        Settings::default()
    }

    #[test]
    fn min_with_single_lower_row() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0]);
        lp.add_constraint(vec![1.0], Relation::Ge, 1.0);
        let out = solve(&lp, &opts()).unwrap();
        assert_eq!(out.status, Status::Optimal);
        assert!((out.value.unwrap() - 1.0).abs() < 1e-12);
        assert!((out.primal[0] - 1.0).abs() < 1e-12);
        assert!((out.duals.as_ref().unwrap()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![0.0]);
        lp.add_constraint(vec![1.0], Relation::Le, -1.0);
        lp.add_constraint(vec![1.0], Relation::Ge, 0.0);
        assert_eq!(solve(&lp, &opts()).unwrap().status, Status::Infeasible);
    }

    #[test]
    fn max_on_simplex_face() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 1.0]);
        lp.add_constraint(vec![1.0, 1.0], Relation::Le, 2.0);
        let out = solve(&lp, &opts()).unwrap();
        assert!((out.value.unwrap() - 2.0).abs() < 1e-12);
        assert!((out.dual_value.unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_ray_is_reported() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 0.0]);
        lp.add_constraint(vec![1.0, -1.0], Relation::Le, 1.0);
        assert_eq!(solve(&lp, &opts()).unwrap().status, Status::Unbounded);
    }

    #[test]
    fn free_and_upper_bounded_variables() {
        // min x - y, x free in [-3, inf), y in (-inf, 2], x + y >= -10
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0, -1.0]);
        lp.set_bounds(0, -3.0, f64::INFINITY);
        lp.set_bounds(1, f64::NEG_INFINITY, 2.0);
        lp.add_constraint(vec![1.0, 1.0], Relation::Ge, -10.0);
        let out = solve(&lp, &opts()).unwrap();
        assert!((out.value.unwrap() + 5.0).abs() < 1e-12);
        assert!((out.dual_value.unwrap() + 5.0).abs() < 1e-12);

        let mut free = LinearProgram::new(Sense::Minimize, vec![1.0]);
        free.set_bounds(0, f64::NEG_INFINITY, f64::INFINITY);
        free.add_constraint(vec![2.0], Relation::Eq, -4.0);
        let out = solve(&free, &opts()).unwrap();
        assert!((out.primal[0] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_variable_is_respected() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 1.0]);
        lp.set_bounds(1, 0.5, 0.5);
        lp.add_constraint(vec![1.0, 1.0], Relation::Le, 3.0);
        let out = solve(&lp, &opts()).unwrap();
        assert!((out.primal[1] - 0.5).abs() < 1e-12);
        assert!((out.value.unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn malformed_rows_are_rejected() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0, 2.0]);
        lp.add_constraint(vec![1.0], Relation::Ge, 1.0);
        assert!(matches!(solve(&lp, &opts()), Err(LpError::Malformed(_))));

        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0]);
        lp.set_bounds(0, 2.0, 1.0);
        assert!(matches!(solve(&lp, &opts()), Err(LpError::Malformed(_))));
    }

    #[test]
    fn redundant_equalities_keep_a_valid_basis() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0, 2.0]);
        lp.add_constraint(vec![1.0, 1.0], Relation::Eq, 1.0);
        lp.add_constraint(vec![2.0, 2.0], Relation::Eq, 2.0);
        let out = solve(&lp, &opts()).unwrap();
        assert!((out.value.unwrap() - 1.0).abs() < 1e-12);
        assert!((out.dual_value.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's classic cycling instance under Dantzig pricing.
        let mut lp = LinearProgram::new(Sense::Minimize, vec![-0.75, 150.0, -0.02, 6.0]);
        lp.add_constraint(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0);
        lp.add_constraint(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0);
        lp.add_constraint(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let out = solve(&lp, &opts()).unwrap();
        assert!((out.value.unwrap() + 0.05).abs() < 1e-12);
    }

    #[test]
    fn badly_scaled_rows_are_equilibrated() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 1e-6]);
        lp.add_constraint(vec![1e6, 1.0], Relation::Le, 2e6);
        lp.add_constraint(vec![1e-5, 1e-3], Relation::Le, 1.0);
        let out = solve(&lp, &opts()).unwrap();
        let check = lp.max_violation(&out.primal);
        assert!(check < 1e-9, "{check}");
        let v = out.value.unwrap();
        assert!((v - out.dual_value.unwrap()).abs() <= 1e-9 * (1.0 + v.abs()));
    }
}
