use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use super::presolve::{Aff, Presolved};
use super::{RelaxSolution, RelaxStatus, SolverTolerances};
use crate::model::{ConicModel, Sense};

/// Kind of each constraint row handed to the interior point solver, used
/// when the dual point is projected.
#[derive(Clone, Copy, PartialEq)]
enum RowKind {
    Free,
    Nonneg,
    Bound,
}

struct Standard {
    i: Vec<usize>,
    j: Vec<usize>,
    v: Vec<f64>,
    b: Vec<f64>,
    kinds: Vec<RowKind>,
    cones: Vec<SupportedConeT<f64>>,
    soc_dims: Vec<usize>,
}

impl Standard {
    fn push(&mut self, entries: &[(usize, f64)], rhs: f64, kind: RowKind) {
        let r = self.b.len();
        for &(c, a) in entries {
            self.i.push(r);
            self.j.push(c);
            self.v.push(a);
        }
        self.b.push(rhs);
        self.kinds.push(kind);
    }

    /// Appends the row `s = alpha·aff` as `s = b − A·x`.
    fn push_aff(&mut self, terms: &[(Aff, f64)]) {
        let mut entries = Vec::new();
        let mut rhs = 0.0;
        for &(a, alpha) in terms {
            rhs += alpha * a.constant;
            if let Some(c) = a.col {
                entries.push((c, -alpha));
            }
        }
        self.push(&entries, rhs, RowKind::Free);
    }
}

fn build(pre: &Presolved) -> Standard {
    let mut st = Standard { i: vec![], j: vec![], v: vec![], b: vec![], kinds: vec![], cones: vec![], soc_dims: vec![] };
    for row in pre.rows.iter().filter(|r| r.sense == Sense::Eq) {
        st.push(&row.coeffs, row.rhs, RowKind::Free);
    }
    let n_eq = st.b.len();
    if n_eq > 0 {
        st.cones.push(SupportedConeT::ZeroConeT(n_eq));
    }
    for row in pre.rows.iter().filter(|r| r.sense != Sense::Eq) {
        if row.sense == Sense::Le {
            st.push(&row.coeffs, row.rhs, RowKind::Nonneg);
        } else {
            let neg: Vec<(usize, f64)> = row.coeffs.iter().map(|&(c, a)| (c, -a)).collect();
            st.push(&neg, -row.rhs, RowKind::Nonneg);
        }
    }
    for c in 0..pre.lo.len() {
        if pre.hi[c].is_finite() {
            st.push(&[(c, 1.0)], pre.hi[c], RowKind::Bound);
        }
        if pre.lo[c].is_finite() {
            st.push(&[(c, -1.0)], -pre.lo[c], RowKind::Bound);
        }
    }
    let n_nonneg = st.b.len() - n_eq;
    if n_nonneg > 0 {
        st.cones.push(SupportedConeT::NonnegativeConeT(n_nonneg));
    }
    for cone in &pre.cones {
        // Σ z² ≤ u·v  ⇔  ‖(u − v, 2z)‖ ≤ u + v
        st.push_aff(&[(cone.u, 1.0), (cone.v, 1.0)]);
        st.push_aff(&[(cone.u, 1.0), (cone.v, -1.0)]);
        for &z in &cone.z {
            st.push_aff(&[(z, 2.0)]);
        }
        let dim = cone.z.len() + 2;
        st.cones.push(SupportedConeT::SecondOrderConeT(dim));
        st.soc_dims.push(dim);
    }
    st
}

fn project_soc(z: &mut [f64]) {
    let t = z[0];
    let norm = z[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= t {
        return;
    }
    if norm <= -t {
        z.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    let scale = 0.5 * (t + norm);
    z[0] = scale;
    for v in &mut z[1..] {
        *v *= scale / norm;
    }
}

/// Lower bound `c0 − b·z + Σ_j min over [lo_j, hi_j] of r_j·x_j` with
/// `r = c + Aᵀz`, from a projected dual point `z` in which bound rows are
/// dropped (their role is taken by the box minimization).
fn safe_bound(pre: &Presolved, st: &Standard, z_raw: &[f64]) -> Option<f64> {
    let mut z = z_raw.to_vec();
    let n_lin = st.kinds.len() - st.soc_dims.iter().sum::<usize>();
    for (r, kind) in st.kinds[..n_lin].iter().enumerate() {
        match kind {
            RowKind::Free => {}
            RowKind::Nonneg => z[r] = z[r].max(0.0),
            RowKind::Bound => z[r] = 0.0,
        }
    }
    let mut off = n_lin;
    for &d in &st.soc_dims {
        project_soc(&mut z[off..off + d]);
        off += d;
    }
    let mut red = pre.c.clone();
    for k in 0..st.v.len() {
        red[st.j[k]] += st.v[k] * z[st.i[k]];
    }
    let scale = 1.0 + pre.c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut bound = pre.c0 - st.b.iter().zip(&z).map(|(b, z)| b * z).sum::<f64>();
    for (c, &r) in red.iter().enumerate() {
        let term = if r > 0.0 { r * pre.lo[c] } else { r * pre.hi[c] };
        if term.is_finite() {
            bound += term;
        } else if r.abs() > 1e-10 * scale {
            return None;
        }
    }
    Some(bound)
}

/// Shorter steps are retried when the interior point method stalls.
const STEP_FRACTIONS: &[f64] = &[0.99, 0.9, 0.8];

pub(super) fn solve(model: &ConicModel, pre: &Presolved, tol: &SolverTolerances) -> RelaxSolution {
    let n = model.num_vars();
    let ncol = pre.orig_of.len();
    let expand = |x: &[f64]| -> Vec<f64> {
        let mut full = pre.fixed.clone();
        for (c, &j) in pre.orig_of.iter().enumerate() {
            full[j] = x[c].clamp(pre.lo[c], pre.hi[c]);
        }
        full
    };

    if ncol == 0 {
        let primal = expand(&[]);
        let obj = model.objective_value(&primal);
        return RelaxSolution {
            status: RelaxStatus::Optimal,
            objective: obj,
            primal_objective: obj,
            primal,
            dual_gap: 0.0,
            max_residual: 0.0,
            iterations: 0,
        };
    }

    let st = build(pre);
    if st.b.is_empty() {
        if pre.c.iter().any(|&c| c != 0.0) {
            return RelaxSolution::status_only(RelaxStatus::Unbounded, n);
        }
        let primal = expand(&vec![0.0; ncol]);
        let obj = model.objective_value(&primal);
        return RelaxSolution {
            status: RelaxStatus::Optimal,
            objective: obj,
            primal_objective: obj,
            primal,
            dual_gap: 0.0,
            max_residual: 0.0,
            iterations: 0,
        };
    }

    let m = st.b.len();
    let a = CscMatrix::new_from_triplets(m, ncol, st.i.clone(), st.j.clone(), st.v.clone());
    let p = CscMatrix::zeros((ncol, ncol));
    let mut solver = None;
    for &step_fraction in STEP_FRACTIONS {
        let settings = DefaultSettingsBuilder::default()
            .verbose(false)
            .max_iter(tol.max_iters)
            .tol_feas(tol.feas)
            .tol_gap_abs(tol.gap_abs)
            .tol_gap_rel(tol.gap_rel)
            .min_terminate_step_length(tol.step_min.max(1e-14))
            .presolve_enable(false)
            .max_step_fraction(step_fraction)
            .build()
            .expect("solver settings");
        let mut s = match DefaultSolver::new(&p, &pre.c, &a, &st.b, &st.cones, settings) {
            Ok(s) => s,
            Err(_) => return RelaxSolution::status_only(RelaxStatus::NumericalLimit, n),
        };
        s.solve();
        let stalled = !matches!(
            s.solution.status,
            SolverStatus::Solved
                | SolverStatus::AlmostSolved
                | SolverStatus::PrimalInfeasible
                | SolverStatus::AlmostPrimalInfeasible
                | SolverStatus::DualInfeasible
                | SolverStatus::AlmostDualInfeasible
        );
        solver = Some(s);
        if !stalled {
            break;
        }
    }
    let solver = solver.expect("at least one attempt");
    let sol = &solver.solution;
    let status = match sol.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => RelaxStatus::Optimal,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => RelaxStatus::Infeasible,
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => RelaxStatus::Unbounded,
        _ => RelaxStatus::NumericalLimit,
    };
    if status != RelaxStatus::Optimal {
        let mut out = RelaxSolution::status_only(status, n);
        out.iterations = sol.iterations;
        if status == RelaxStatus::NumericalLimit && sol.x.iter().all(|v| v.is_finite()) {
            out.primal = expand(&sol.x);
        }
        return out;
    }

    let primal = expand(&sol.x);
    let primal_objective = model.objective_value(&primal);
    let objective = match safe_bound(pre, &st, &sol.z) {
        Some(lb) => lb,
        None => primal_objective - tol.gap_allowance(primal_objective),
    };
    RelaxSolution {
        status,
        objective,
        primal_objective,
        primal,
        dual_gap: primal_objective - objective,
        max_residual: 0.0,
        iterations: sol.iterations,
    }
}
