//! Aggregated class models: one copy of Ω scaled by the class multiplicity,
//! with integer counts `Y ∈ {0..r}` and perspective rows scaled by `Y` and
//! `r − Y`. Also the scaling operations on block sets.

use crate::error::{Error, Result};
use crate::model::{BlockSet, ConicModel, OmegaSpec, ProblemSpec, VarId};
use crate::perspective::{attach_copy, finish_global, perspective_value, soc_encode, Emitter, Encoding, PerspectiveRow};
use crate::solver::{solve_relaxation, SolverTolerances};
use crate::Mode;

/// Variables of one aggregated class.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregatedClassModel {
    pub r: u32,
    /// Per block: aggregated `X_s`.
    pub x: Vec<Vec<VarId>>,
    /// Per block: on-part `W_s` (equal to `X_s` when Γ = {0}).
    pub w: Vec<Vec<VarId>>,
    /// Per block: off-part `Z_s` (empty when Γ = {0}).
    pub z: Vec<Vec<VarId>>,
    /// Integer counts `Y_s ∈ {0..r}`.
    pub y: Vec<VarId>,
}

/// Appends the aggregated system for `r` copies of Ω:
/// `Ĥ(W, Y) ≤ Y·d`, `H̄(Z, r − Y) ≤ (r − Y)·d`, `X = W + Z`, scaled boxes,
/// `A·Y (sense) r·b` and `Y ∈ [0, r]`. With `r = 0` everything is pinned at 0.
pub fn aggregate_class(
    omega: &OmegaSpec,
    r: u32,
    builder: &mut ConicModel,
    class: u32,
    mode: Mode,
) -> AggregatedClassModel {
    let mut em = Emitter::default();
    let v = em.emit_copy(builder, omega, r, Encoding::Perspective, mode == Mode::Integer, class, None);
    AggregatedClassModel { r, x: v.x, w: v.w, z: v.z, y: v.y }
}

/// One aggregated copy per class with `r = N_t`.
pub fn compile_agg(spec: &ProblemSpec, mode: Mode) -> ConicModel {
    let mut m = ConicModel::new(&format!("{}_agg", spec.name));
    let mut em = Emitter::default();
    let mut global = vec![Vec::new(); spec.global_rows.len()];
    for (t, class) in spec.classes.iter().enumerate() {
        let vars = em.emit_copy(&mut m, &class.omega, class.multiplicity, Encoding::Perspective, mode == Mode::Integer, t as u32, None);
        attach_copy(&mut m, class, &vars, &mut global);
    }
    finish_global(&mut m, spec, global);
    m
}

/// Model of `r⊙F`: block variables in `r·box` and every row in perspective
/// form with its scale fixed at `r`.
pub fn scaled_set_model(f: &BlockSet, r: f64) -> (ConicModel, Vec<VarId>) {
    let mut m = ConicModel::new("scaled_set");
    let t = m.add_continuous(r, r, None);
    let x: Vec<VarId> = (0..f.dim).map(|j| m.add_continuous(r * f.lower[j], r * f.upper[j], None)).collect();
    for row in &f.rows {
        soc_encode(&PerspectiveRow { base: row.func.clone(), scale_var: t, vars: x.clone(), rhs: row.rhs }, &mut m);
    }
    (m, x)
}

/// Support function of `r⊙F` in `direction`: `r·max_{x ∈ F} direction·x`.
pub fn support_scaled_set(f: &BlockSet, r: f64, direction: &[f64]) -> Result<f64> {
    if !(r >= 0.0) || direction.len() != f.dim {
        return Err(Error::InvalidArgument("support needs r ≥ 0 and a direction of block length".into()));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    let (mut m, x) = scaled_set_model(f, 1.0);
    for (&xj, &d) in x.iter().zip(direction) {
        m.add_objective(xj, -d);
    }
    let sol = solve_relaxation(&m, &SolverTolerances::default());
    if !sol.is_optimal() {
        return Err(Error::InvalidArgument(format!("support solve ended {:?}", sol.status)));
    }
    Ok(-r * 0.5 * (sol.objective + sol.primal_objective))
}

/// Membership `X ∈ r⊙F` through the scaled rows `H_l(X, r) ≤ r·d_l` and the
/// box `r·lower ≤ X ≤ r·upper`.
pub fn scaled_set_contains(f: &BlockSet, x: &[f64], r: f64, tol: f64) -> bool {
    if x.len() != f.dim {
        return false;
    }
    if r == 0.0 {
        return x.iter().all(|v| v.abs() <= tol);
    }
    let in_box = (0..f.dim).all(|j| x[j] >= r * f.lower[j] - tol && x[j] <= r * f.upper[j] + tol);
    let relaxed_box = BlockSet { rows: Vec::new(), lower: f.lower.iter().map(|l| l - tol).collect(), upper: f.upper.iter().map(|u| u + tol).collect(), dim: f.dim };
    in_box
        && f.rows.iter().all(|row| match perspective_value(&row.func, x, r, &relaxed_box) {
            Ok(v) => v <= r * row.rhs + tol,
            Err(_) => false,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BlockPair, CouplingRow, Sense};

    fn interval_omega(coupling: Vec<CouplingRow>) -> OmegaSpec {
        OmegaSpec {
            blocks: vec![BlockPair { on: BlockSet::interval(1.0, 2.0), off: BlockSet::zero_singleton(1) }],
            coupling,
            tu_asserted: true,
        }
    }

    #[test]
    fn interval_expansion_matches_hand_rows() {
        let mut m = ConicModel::new("agg");
        let a = aggregate_class(&interval_omega(vec![]), 2, &mut m, 0, Mode::Integer);
        let (x, y) = (a.x[0][0], a.y[0]);
        assert_eq!(m.vars[y].lower, 0.0);
        assert_eq!(m.vars[y].upper, 2.0);
        assert!(m.vars[y].integer);
        assert!(a.z[0].is_empty());
        assert_eq!(m.rows.len(), 2);
        assert_eq!(m.rows[0].coeffs, vec![(x, 1.0), (y, -1.0)]);
        assert_eq!(m.rows[0].sense, Sense::Ge);
        assert_eq!(m.rows[1].coeffs, vec![(x, 1.0), (y, -2.0)]);
        assert_eq!(m.rows[1].sense, Sense::Le);
        assert!(m.cones.is_empty());
    }

    #[test]
    fn zero_multiplicity_pins_everything() {
        let mut m = ConicModel::new("agg");
        let a = aggregate_class(&interval_omega(vec![]), 0, &mut m, 0, Mode::Integer);
        for j in [a.x[0][0], a.y[0]] {
            assert_eq!((m.vars[j].lower, m.vars[j].upper), (0.0, 0.0));
        }
    }

    #[test]
    fn coupling_forcing_off_dominates() {
        let omega = interval_omega(vec![CouplingRow { coeffs: vec![1], sense: Sense::Le, rhs: 0 }]);
        let mut m = ConicModel::new("agg");
        let a = aggregate_class(&omega, 3, &mut m, 0, Mode::Relaxed);
        m.add_objective(a.x[0][0], -1.0);
        let sol = solve_relaxation(&m, &SolverTolerances::default());
        assert!(sol.is_optimal());
        assert!(sol.primal[a.y[0]].abs() < 1e-7);
        assert!(sol.primal[a.x[0][0]].abs() < 1e-7);
    }

    #[test]
    fn support_examples() {
        let f = BlockSet::interval(1.0, 2.0);
        assert!((support_scaled_set(&f, 2.0, &[1.0]).unwrap() - 4.0).abs() < 1e-8);
        assert_eq!(support_scaled_set(&f, 0.0, &[1.0]).unwrap(), 0.0);
        let disk = BlockSet::interval(-5.0, 5.0)
            .with_row(crate::model::ConvexQuadratic::new(vec![1.0], vec![0.0], 0.0).unwrap(), 1.0);
        assert!((support_scaled_set(&disk, 3.0, &[1.0]).unwrap() - 3.0).abs() < 1e-7);
    }

    #[test]
    fn membership_scales() {
        let f = BlockSet::interval(1.0, 2.0);
        assert!(scaled_set_contains(&f, &[3.0], 2.0, 1e-9));
        assert!(!scaled_set_contains(&f, &[4.5], 2.0, 1e-9));
        assert!(scaled_set_contains(&f, &[0.0], 0.0, 1e-9));
    }
}
