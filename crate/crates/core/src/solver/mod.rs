//! Continuous relaxation solver for linear + rotated-cone models.
//!
//! Pipeline: a light presolve (fixed variables, singleton rows to bounds,
//! cones with a zero scale) followed by a homogeneous self-dual interior
//! point solve. The reported objective is a safe lower bound built from a
//! projected dual point, so bound comparisons between formulations are not
//! distorted by primal optimism.

mod backend;
mod certify;
mod presolve;

pub use certify::{certify, ResidualReport};

use crate::model::ConicModel;

/// Convergence tolerances for one relaxation solve.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolverTolerances {
    pub feas: f64,
    pub gap_abs: f64,
    pub gap_rel: f64,
    pub step_min: f64,
    pub max_iters: u32,
}

impl Default for SolverTolerances {
    fn default() -> Self {
        SolverTolerances { feas: 1e-8, gap_abs: 1e-8, gap_rel: 1e-8, step_min: 1e-14, max_iters: 200 }
    }
}

impl SolverTolerances {
    /// Allowed duality gap at objective value `obj`.
    pub fn gap_allowance(&self, obj: f64) -> f64 {
        self.gap_abs + self.gap_rel * obj.abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelaxStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalLimit,
}

#[derive(Clone, Debug)]
pub struct RelaxSolution {
    pub status: RelaxStatus,
    /// Safe lower bound on the relaxation optimum (valid when optimal).
    pub objective: f64,
    /// Objective at the returned primal point.
    pub primal_objective: f64,
    pub primal: Vec<f64>,
    /// `primal_objective − objective`.
    pub dual_gap: f64,
    pub max_residual: f64,
    pub iterations: u32,
}

impl RelaxSolution {
    fn status_only(status: RelaxStatus, n: usize) -> Self {
        let objective = match status {
            RelaxStatus::Infeasible => f64::INFINITY,
            RelaxStatus::Unbounded => f64::NEG_INFINITY,
            _ => f64::NAN,
        };
        RelaxSolution {
            status,
            objective,
            primal_objective: objective,
            primal: vec![0.0; n],
            dual_gap: f64::NAN,
            max_residual: f64::NAN,
            iterations: 0,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == RelaxStatus::Optimal
    }
}

/// Solves the continuous relaxation of `model` (integrality marks ignored).
pub fn solve_relaxation(model: &ConicModel, tol: &SolverTolerances) -> RelaxSolution {
    let bounds: Vec<(f64, f64)> = model.vars.iter().map(|v| (v.lower, v.upper)).collect();
    solve_with_bounds(model, &bounds, tol)
}

/// Same as [`solve_relaxation`] with the variable bounds replaced.
pub fn solve_with_bounds(model: &ConicModel, bounds: &[(f64, f64)], tol: &SolverTolerances) -> RelaxSolution {
    let n = model.num_vars();
    assert_eq!(bounds.len(), n, "one bound pair per variable");
    let pre = match presolve::presolve(model, bounds, tol.feas) {
        Ok(p) => p,
        Err(presolve::Infeasible) => return RelaxSolution::status_only(RelaxStatus::Infeasible, n),
    };
    let mut sol = backend::solve(model, &pre, tol);
    if sol.status == RelaxStatus::Optimal {
        let report = certify::certify_with_bounds(model, bounds, &sol.primal);
        sol.max_residual = report.max;
        if !(report.max <= 1e-5) || sol.dual_gap > 10.0 * tol.gap_allowance(sol.primal_objective) + 1e-6 * (1.0 + sol.primal_objective.abs()) {
            sol.status = RelaxStatus::NumericalLimit;
        }
    }
    sol
}
