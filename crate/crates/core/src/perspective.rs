//! Perspective functions, their rotated-cone encoding, and the per-copy
//! compilations of a [`ProblemSpec`].
//!
//! `compile_p0` uses the weak encoding: each on-row `ĥ(w) ≤ d` is imposed
//! directly on `w` with its right-hand side relaxed by `(1 − y)·max(0, ĥ(0) − d)`,
//! and each off-row `h̄(z) ≤ d` with `y·max(0, h̄(0) − d)`. The relaxation is
//! exact at integral `y` and weaker than the perspective rows in between.
//! This is an interpretation of the unscaled joint rows `h(x, y) ≤ d`, which
//! cannot be rebuilt from the two slices alone.

use crate::error::{Error, Result};
use crate::model::{BlockSet, ConicModel, ConvexQuadratic, OmegaSpec, ProblemSpec, Role, Sense, VarId, VarTag};
use crate::Mode;

/// `t·f(x/t)` for `t > 0` and `x/t ∈ domain`, `0` at `(0, 0)`, `+∞` otherwise.
///
/// The domain is bounded, so the closure at `t = 0` contains only the origin.
pub fn perspective_value(f: &ConvexQuadratic, x: &[f64], t: f64, domain: &BlockSet) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidArgument(format!("perspective scale must be nonnegative, got {t}")));
    }
    if x.len() != f.dim || x.len() != domain.dim {
        return Err(Error::Dimension(format!("point has {} entries, function {}", x.len(), f.dim)));
    }
    if t == 0.0 {
        return Ok(if x.iter().all(|&v| v == 0.0) { 0.0 } else { f64::INFINITY });
    }
    let scaled: Vec<f64> = x.iter().map(|v| v / t).collect();
    if !domain.contains(&scaled, 1e-12) {
        return Ok(f64::INFINITY);
    }
    Ok(t * f.eval(&scaled))
}

/// Constraint `t·base(x/t) ≤ t·rhs` on block variables `vars` with scale `t`.
#[derive(Clone, Debug)]
pub struct PerspectiveRow {
    pub base: ConvexQuadratic,
    pub scale_var: VarId,
    pub vars: Vec<VarId>,
    pub rhs: f64,
}

/// What [`soc_encode`] appended.
#[derive(Clone, Debug, PartialEq)]
pub enum EncodedRow {
    /// A rotated cone plus its defining rows.
    Cone { cone: usize, rows: Vec<usize>, aux: Vec<VarId> },
    /// Zero curvature: a single linear row, no cone.
    Linear { row: usize },
}

/// Interval range of `Σ coeffs·x + constant` under the current bounds.
fn affine_range(m: &ConicModel, terms: &[(VarId, f64)], constant: f64) -> (f64, f64) {
    let mut lo = constant;
    let mut hi = constant;
    for &(j, a) in terms {
        if a == 0.0 {
            continue;
        }
        let (l, u) = (m.vars[j].lower, m.vars[j].upper);
        let (p, q) = if a > 0.0 { (a * l, a * u) } else { (a * u, a * l) };
        lo += p;
        hi += q;
    }
    (lo, hi)
}

/// Appends `Σ q_j·x_j² ≤ t·(Σ a_k·v_k + constant)` as a rotated cone.
///
/// With `q* = max(1, max q_j)`, the cone is `Σ (q_j/q*)·x_j² ≤ t·s` where
/// `q*·s = Σ a_k·v_k + constant`. Members with `q_j < q*` go through an
/// auxiliary `√(q_j/q*)·x_j`. Flooring `q*` at 1 keeps the range of `s`
/// no wider than the affine part when curvatures are small.
fn quad_le(
    m: &mut ConicModel,
    t: VarId,
    quad: &[(VarId, f64)],
    affine: &[(VarId, f64)],
    constant: f64,
    tag: Option<VarTag>,
) -> EncodedRow {
    let q_ref = quad.iter().fold(1.0f64, |acc, &(_, q)| acc.max(q));
    let (_, hi) = affine_range(m, affine, constant);
    let s = m.add_continuous(0.0, (hi / q_ref).max(0.0), tag);
    let mut coeffs = vec![(s, q_ref)];
    coeffs.extend(affine.iter().map(|&(j, a)| (j, -a)));
    let mut rows = vec![m.add_row(coeffs, Sense::Eq, constant)];
    let mut aux = vec![s];
    let mut members = Vec::new();
    for &(j, q) in quad.iter().filter(|&&(_, q)| q > 0.0) {
        if q == q_ref {
            members.push(j);
            continue;
        }
        let k = (q / q_ref).sqrt();
        let (l, u) = (m.vars[j].lower * k, m.vars[j].upper * k);
        let a = m.add_continuous(l.min(u), l.max(u), tag);
        rows.push(m.add_row(vec![(a, 1.0), (j, -k)], Sense::Eq, 0.0));
        aux.push(a);
        members.push(a);
    }
    let cone = m.add_cone(t, s, members);
    EncodedRow::Cone { cone, rows, aux }
}

/// Appends the rotated-cone form of `row`: auxiliary `v` with
/// `v = (d − c)·t − b·x` and `Σ q_j·x_j² ≤ t·v`. Linear rows become
/// `b·x + (c − d)·t ≤ 0`.
pub fn soc_encode(row: &PerspectiveRow, builder: &mut ConicModel) -> EncodedRow {
    let f = &row.base;
    let t = row.scale_var;
    let tag = builder.vars[t].tag.map(|tg| VarTag { role: Role::Slack, ..tg });
    if f.is_linear() {
        let mut coeffs: Vec<(VarId, f64)> = row.vars.iter().copied().zip(f.lin.iter().copied()).collect();
        coeffs.push((t, f.const_term - row.rhs));
        return EncodedRow::Linear { row: builder.add_row(coeffs, Sense::Le, 0.0) };
    }
    let quad: Vec<(VarId, f64)> = row.vars.iter().copied().zip(f.quad.iter().copied()).collect();
    let mut affine: Vec<(VarId, f64)> = row.vars.iter().copied().zip(f.lin.iter().map(|b| -b)).collect();
    affine.push((t, row.rhs - f.const_term));
    quad_le(builder, t, &quad, &affine, 0.0, tag)
}

/// How block rows are imposed by [`emit_copy`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Encoding {
    Weak,
    Perspective,
}

/// Variables created for one copy (or one aggregated class) of Ω.
#[derive(Clone, Debug, Default)]
pub(crate) struct CopyVars {
    pub x: Vec<Vec<VarId>>,
    pub w: Vec<Vec<VarId>>,
    /// Empty per block when Γ = {0}.
    pub z: Vec<Vec<VarId>>,
    pub y: Vec<VarId>,
}

/// Shared emitter state: the lazily created constant-one variable.
#[derive(Default)]
pub(crate) struct Emitter {
    one: Option<VarId>,
}

impl Emitter {
    fn one(&mut self, m: &mut ConicModel) -> VarId {
        *self.one.get_or_insert_with(|| m.add_continuous(1.0, 1.0, None))
    }

    /// Appends one copy of Ω scaled by `r`: `y ∈ [0, r]`,
    /// `r·lowerΛ` style boxes on `w` and `z`, and the block rows.
    pub fn emit_copy(
        &mut self,
        m: &mut ConicModel,
        omega: &OmegaSpec,
        r: u32,
        enc: Encoding,
        integer: bool,
        class: u32,
        member: Option<u32>,
    ) -> CopyVars {
        let rf = r as f64;
        let tag = |block: usize, role: Role, coord: usize| {
            Some(VarTag { class, member, block: block as u32, role, coord: coord as u32 })
        };
        let mut out = CopyVars::default();
        for s in 0..omega.k() {
            out.y.push(m.add_var(0.0, rf, integer, tag(s, Role::Y, 0)));
        }
        for (s, pair) in omega.blocks.iter().enumerate() {
            let y = out.y[s];
            let dim = pair.dim();
            let on = &pair.on;
            let off_zero = pair.off_is_zero();
            let w_role = if off_zero { Role::X } else { Role::W };
            let w: Vec<VarId> = (0..dim)
                .map(|j| m.add_continuous((rf * on.lower[j]).min(0.0), (rf * on.upper[j]).max(0.0), tag(s, w_role, j)))
                .collect();
            for j in 0..dim {
                if on.lower[j] != 0.0 {
                    m.add_row(vec![(w[j], 1.0), (y, -on.lower[j])], Sense::Ge, 0.0);
                }
                if on.upper[j] != 0.0 {
                    m.add_row(vec![(w[j], 1.0), (y, -on.upper[j])], Sense::Le, 0.0);
                }
            }
            let (x, z) = if off_zero {
                (w.clone(), Vec::new())
            } else {
                let off = &pair.off;
                let z: Vec<VarId> = (0..dim)
                    .map(|j| m.add_continuous((rf * off.lower[j]).min(0.0), (rf * off.upper[j]).max(0.0), tag(s, Role::Z, j)))
                    .collect();
                // lowerΓ·(r − y) ≤ z ≤ upperΓ·(r − y)
                for j in 0..dim {
                    if off.lower[j] != 0.0 {
                        m.add_row(vec![(z[j], 1.0), (y, off.lower[j])], Sense::Ge, rf * off.lower[j]);
                    }
                    if off.upper[j] != 0.0 {
                        m.add_row(vec![(z[j], 1.0), (y, off.upper[j])], Sense::Le, rf * off.upper[j]);
                    }
                }
                let x: Vec<VarId> = (0..dim)
                    .map(|j| {
                        let (lo, hi) = (m.vars[w[j]].lower + m.vars[z[j]].lower, m.vars[w[j]].upper + m.vars[z[j]].upper);
                        let xv = m.add_continuous(lo, hi, tag(s, Role::X, j));
                        m.add_row(vec![(xv, 1.0), (w[j], -1.0), (z[j], -1.0)], Sense::Eq, 0.0);
                        xv
                    })
                    .collect();
                (x, z)
            };
            match enc {
                Encoding::Perspective => {
                    for row in &on.rows {
                        soc_encode(&PerspectiveRow { base: row.func.clone(), scale_var: y, vars: w.clone(), rhs: row.rhs }, m);
                    }
                    if !z.is_empty() && !pair.off.rows.is_empty() {
                        // complement scale r − y
                        let comp = m.add_continuous(0.0, rf, tag(s, Role::Slack, 0));
                        m.add_row(vec![(comp, 1.0), (y, 1.0)], Sense::Eq, rf);
                        for row in &pair.off.rows {
                            soc_encode(&PerspectiveRow { base: row.func.clone(), scale_var: comp, vars: z.clone(), rhs: row.rhs }, m);
                        }
                    }
                }
                Encoding::Weak => {
                    for row in &on.rows {
                        // ĥ(w) ≤ d + (1 − y)·M
                        let slack = (row.func.const_term - row.rhs).max(0.0);
                        self.weak_row(m, &row.func, &w, row.rhs + rf * slack, &[(y, -slack)], tag(s, Role::Slack, 0));
                    }
                    if !z.is_empty() {
                        for row in &pair.off.rows {
                            // h̄(z) ≤ d + y·M
                            let slack = (row.func.const_term - row.rhs).max(0.0);
                            self.weak_row(m, &row.func, &z, row.rhs, &[(y, slack)], tag(s, Role::Slack, 0));
                        }
                    }
                }
            }
            out.x.push(x);
            out.w.push(w);
            out.z.push(z);
        }
        for row in &omega.coupling {
            let coeffs = row.coeffs.iter().zip(&out.y).map(|(&a, &y)| (y, a as f64)).collect();
            m.add_row(coeffs, row.sense, rf * row.rhs as f64);
        }
        out
    }

    /// `f(v) ≤ rhs + Σ extra·u` without perspective scaling.
    fn weak_row(
        &mut self,
        m: &mut ConicModel,
        f: &ConvexQuadratic,
        vars: &[VarId],
        rhs: f64,
        extra: &[(VarId, f64)],
        tag: Option<VarTag>,
    ) {
        let mut affine: Vec<(VarId, f64)> = vars.iter().copied().zip(f.lin.iter().map(|b| -b)).collect();
        affine.extend_from_slice(extra);
        let constant = rhs - f.const_term;
        if f.is_linear() {
            let coeffs = affine.iter().map(|&(j, a)| (j, -a)).collect();
            m.add_row(coeffs, Sense::Le, constant);
            return;
        }
        let quad: Vec<(VarId, f64)> = vars.iter().copied().zip(f.quad.iter().copied()).collect();
        let one = self.one(m);
        quad_le(m, one, &quad, &affine, constant, tag);
    }
}

/// Adds `Σ obj·x + y_obj·y` and the global-row contributions of one copy.
pub(crate) fn attach_copy(
    m: &mut ConicModel,
    class: &crate::model::EquivClass,
    vars: &CopyVars,
    global: &mut [Vec<(VarId, f64)>],
) {
    for (s, xs) in vars.x.iter().enumerate() {
        for (j, &xv) in xs.iter().enumerate() {
            m.add_objective(xv, class.obj[s][j]);
        }
        m.add_objective(vars.y[s], class.y_cost(s));
    }
    for (l, coeffs) in class.coupling_coeffs.iter().enumerate() {
        for (s, xs) in vars.x.iter().enumerate() {
            for (j, &xv) in xs.iter().enumerate() {
                let a = coeffs[s][j];
                if a != 0.0 {
                    global[l].push((xv, a));
                }
            }
        }
    }
}

pub(crate) fn finish_global(m: &mut ConicModel, spec: &ProblemSpec, global: Vec<Vec<(VarId, f64)>>) {
    for (row, coeffs) in spec.global_rows.iter().zip(global) {
        m.add_row(coeffs, row.sense, row.rhs);
    }
}

fn compile_per_copy(spec: &ProblemSpec, mode: Mode, enc: Encoding, suffix: &str) -> ConicModel {
    let mut m = ConicModel::new(&format!("{}_{suffix}", spec.name));
    let mut em = Emitter::default();
    let mut global = vec![Vec::new(); spec.global_rows.len()];
    for (t, class) in spec.classes.iter().enumerate() {
        for i in 0..class.multiplicity {
            let vars = em.emit_copy(&mut m, &class.omega, 1, enc, mode == Mode::Integer, t as u32, Some(i));
            attach_copy(&mut m, class, &vars, &mut global);
        }
    }
    finish_global(&mut m, spec, global);
    m
}

/// One copy per member with the weak (unscaled) block rows.
pub fn compile_p0(spec: &ProblemSpec, mode: Mode) -> ConicModel {
    compile_per_copy(spec, mode, Encoding::Weak, "p0")
}

/// One copy per member with perspective block rows.
pub fn compile_per(spec: &ProblemSpec, mode: Mode) -> ConicModel {
    compile_per_copy(spec, mode, Encoding::Perspective, "per")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq() -> ConvexQuadratic {
        ConvexQuadratic::new(vec![1.0], vec![0.0], 0.0).unwrap()
    }

    #[test]
    fn value_examples() {
        let dom = BlockSet::interval(0.0, 4.0);
        assert_eq!(perspective_value(&sq(), &[2.0], 1.0, &dom).unwrap(), 4.0);
        assert_eq!(perspective_value(&sq(), &[0.0], 0.0, &dom).unwrap(), 0.0);
        assert_eq!(perspective_value(&sq(), &[3.0], 2.0, &dom).unwrap(), 4.5);
        assert_eq!(perspective_value(&sq(), &[1.0], 0.0, &dom).unwrap(), f64::INFINITY);
        assert_eq!(perspective_value(&sq(), &[9.0], 1.0, &dom).unwrap(), f64::INFINITY);
        assert!(perspective_value(&sq(), &[0.0], -1.0, &dom).is_err());
    }

    #[test]
    fn linear_row_falls_back() {
        let mut m = ConicModel::new("t");
        let y = m.add_continuous(0.0, 1.0, None);
        let x = m.add_continuous(0.0, 1.0, None);
        let row = PerspectiveRow { base: ConvexQuadratic::linear(vec![1.0], 0.0), scale_var: y, vars: vec![x], rhs: 1.0 };
        let enc = soc_encode(&row, &mut m);
        assert_eq!(enc, EncodedRow::Linear { row: 0 });
        assert!(m.cones.is_empty());
        assert_eq!(m.rows[0].coeffs, vec![(x, 1.0), (y, -1.0)]);
        assert_eq!(m.rows[0].sense, Sense::Le);
    }

    #[test]
    fn square_row_boundary() {
        // x² ≤ 4 scaled by y: cone x² ≤ y·(4y)
        let mut m = ConicModel::new("t");
        let y = m.add_continuous(0.0, 1.0, None);
        let x = m.add_continuous(-2.0, 2.0, None);
        let row = PerspectiveRow { base: sq(), scale_var: y, vars: vec![x], rhs: 4.0 };
        let EncodedRow::Cone { cone, aux, .. } = soc_encode(&row, &mut m) else { panic!() };
        assert_eq!(m.cones[cone].u, y);
        assert_eq!(m.cones[cone].z, vec![x]);
        let v = aux[0];
        assert_eq!(m.rows[0].coeffs, vec![(v, 1.0), (y, -4.0)]);
        let mut pt = vec![0.0; m.num_vars()];
        pt[y] = 1.0;
        pt[x] = 2.0;
        pt[v] = 4.0;
        let rep = crate::solver::certify(&m, &pt);
        assert!(rep.max < 1e-12);
        assert_eq!(pt[x] * pt[x], pt[y] * pt[v]);
    }

    #[test]
    fn linear_term_folds_into_scale_row() {
        // x² + 2x ≤ 3 at (x = 1, y = 1): 1 ≤ 1·(3 − 2)
        let mut m = ConicModel::new("t");
        let y = m.add_continuous(0.0, 1.0, None);
        let x = m.add_continuous(-3.0, 3.0, None);
        let f = ConvexQuadratic::new(vec![1.0], vec![2.0], 0.0).unwrap();
        let row = PerspectiveRow { base: f, scale_var: y, vars: vec![x], rhs: 3.0 };
        let EncodedRow::Cone { aux, .. } = soc_encode(&row, &mut m) else { panic!() };
        let v_val = 3.0 * 1.0 - 2.0 * 1.0;
        assert_eq!(v_val, 1.0);
        let mut pt = vec![0.0; m.num_vars()];
        pt[y] = 1.0;
        pt[x] = 1.0;
        pt[aux[0]] = v_val;
        assert!(crate::solver::certify(&m, &pt).max < 1e-12);
    }

    #[test]
    fn empty_spec_compiles_to_empty_model() {
        let spec = ProblemSpec { name: "empty".into(), classes: vec![], global_rows: vec![] };
        for m in [compile_p0(&spec, Mode::Relaxed), compile_per(&spec, Mode::Integer)] {
            assert_eq!(m.num_vars(), 0);
            assert_eq!(m.objective_value(&[]), 0.0);
        }
    }
}
