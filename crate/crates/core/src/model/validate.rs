use serde::{Deserialize, Serialize};

use super::{BlockSet, ConicModel, ProblemSpec};
use crate::solver::{solve_relaxation, RelaxStatus, SolverTolerances};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    NegativeCurvature,
    DimensionMismatch,
    BadBox,
    EmptyOnSet,
    EmptyOffSet,
    EmptyCoupling,
    NotTotallyUnimodular,
    ZeroMultiplicity,
    /// Warning: two classes carry identical data and could be merged.
    IdenticalClasses,
    /// Warning: coupling matrix too large to spot-check, or not asserted TU.
    TuUnchecked,
}

impl ViolationKind {
    pub fn describe(self) -> &'static str {
        match self {
            ViolationKind::NegativeCurvature => "negative curvature",
            ViolationKind::DimensionMismatch => "dimension mismatch",
            ViolationKind::BadBox => "box bounds not finite or not ordered",
            ViolationKind::EmptyOnSet => "empty on-set",
            ViolationKind::EmptyOffSet => "empty off-set",
            ViolationKind::EmptyCoupling => "empty coupling polytope",
            ViolationKind::NotTotallyUnimodular => "coupling matrix not totally unimodular",
            ViolationKind::ZeroMultiplicity => "multiplicity must be at least 1",
            ViolationKind::IdenticalClasses => "identical classes",
            ViolationKind::TuUnchecked => "total unimodularity not verified",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub class: Option<usize>,
    pub block: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.kind.describe())?;
        if let Some(c) = self.class {
            write!(f, " (class {c}")?;
            if let Some(b) = self.block {
                write!(f, ", block {b}")?;
            }
            write!(f, ")")?;
        }
        if !self.message.is_empty() {
            write!(f, ": {}", self.message)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().chain(&self.warnings).any(|v| v.kind == kind)
    }
}

fn push(list: &mut Vec<Violation>, kind: ViolationKind, class: usize, block: Option<usize>, message: String) {
    list.push(Violation { kind, class: Some(class), block, message });
}

fn set_shape(set: &BlockSet, dim: usize) -> Result<(), String> {
    if set.dim != dim || set.lower.len() != dim || set.upper.len() != dim {
        return Err(format!("set has dim {} and box lengths {}/{}, block expects {dim}", set.dim, set.lower.len(), set.upper.len()));
    }
    if let Some(row) = set.rows.iter().find(|r| !r.func.shape_ok() || r.func.dim != dim) {
        return Err(format!("row of dim {} in a block of dim {dim}", row.func.dim));
    }
    Ok(())
}

fn set_is_empty(set: &BlockSet) -> bool {
    if set.rows.is_empty() {
        return false;
    }
    let (m, _) = crate::aggregation::scaled_set_model(set, 1.0);
    solve_relaxation(&m, &SolverTolerances::default()).status == RelaxStatus::Infeasible
}

/// Checks every structural assumption of a spec. Violations are data: the
/// report names the failing class and block.
pub fn validate_problem(spec: &ProblemSpec) -> ValidationReport {
    use ViolationKind::*;
    let mut rep = ValidationReport::default();
    let n_global = spec.global_rows.len();
    for (t, class) in spec.classes.iter().enumerate() {
        let omega = &class.omega;
        let k = omega.k();
        if class.multiplicity == 0 {
            push(&mut rep.violations, ZeroMultiplicity, t, None, String::new());
        }
        let mut shapes_ok = true;
        for (s, pair) in omega.blocks.iter().enumerate() {
            let dim = pair.on.dim;
            for (set, name) in [(&pair.on, "on"), (&pair.off, "off")] {
                if let Err(msg) = set_shape(set, dim) {
                    push(&mut rep.violations, DimensionMismatch, t, Some(s), format!("{name}-set {msg}"));
                    shapes_ok = false;
                    continue;
                }
                if set.rows.iter().any(|r| !r.func.is_convex()) {
                    push(&mut rep.violations, NegativeCurvature, t, Some(s), format!("{name}-set row"));
                    shapes_ok = false;
                }
                let bad_box = set.lower.iter().zip(&set.upper).any(|(l, u)| !l.is_finite() || !u.is_finite() || l > u)
                    || set.rows.iter().any(|r| !r.rhs.is_finite());
                if bad_box {
                    push(&mut rep.violations, BadBox, t, Some(s), format!("{name}-set"));
                    shapes_ok = false;
                }
            }
            if class.obj.get(s).map(Vec::len) != Some(dim) {
                push(&mut rep.violations, DimensionMismatch, t, Some(s), "objective vector".into());
            }
        }
        if class.obj.len() != k {
            push(&mut rep.violations, DimensionMismatch, t, None, format!("{} objective blocks for {k} blocks", class.obj.len()));
        }
        if !class.y_obj.is_empty() && class.y_obj.len() != k {
            push(&mut rep.violations, DimensionMismatch, t, None, "binary cost vector".into());
        }
        if class.coupling_coeffs.len() != n_global {
            push(&mut rep.violations, DimensionMismatch, t, None, format!("{} global-row coefficient sets for {n_global} rows", class.coupling_coeffs.len()));
        } else {
            for (l, per_block) in class.coupling_coeffs.iter().enumerate() {
                let ok = per_block.len() == k && per_block.iter().zip(&omega.blocks).all(|(a, b)| a.len() == b.dim());
                if !ok {
                    push(&mut rep.violations, DimensionMismatch, t, None, format!("coefficients of global row {l}"));
                }
            }
        }
        if let Some(row) = omega.coupling.iter().find(|r| r.coeffs.len() != k) {
            push(&mut rep.violations, DimensionMismatch, t, None, format!("coupling row of length {} over {k} binaries", row.coeffs.len()));
            continue;
        }
        if shapes_ok {
            for (s, pair) in omega.blocks.iter().enumerate() {
                if set_is_empty(&pair.on) {
                    push(&mut rep.violations, EmptyOnSet, t, Some(s), String::new());
                }
                if set_is_empty(&pair.off) {
                    push(&mut rep.violations, EmptyOffSet, t, Some(s), String::new());
                }
            }
        }
        if !omega.coupling.is_empty() {
            let mut lp = ConicModel::new("coupling");
            let y: Vec<usize> = (0..k).map(|_| lp.add_continuous(0.0, 1.0, None)).collect();
            for row in &omega.coupling {
                lp.add_row(row.coeffs.iter().zip(&y).map(|(&a, &j)| (j, a as f64)).collect(), row.sense, row.rhs as f64);
            }
            if solve_relaxation(&lp, &SolverTolerances::default()).status == RelaxStatus::Infeasible {
                push(&mut rep.violations, EmptyCoupling, t, None, String::new());
            }
            let a: Vec<Vec<i64>> = omega.coupling.iter().map(|r| r.coeffs.clone()).collect();
            match crate::oracle::check_tu_small(&a) {
                Ok(true) => {}
                Ok(false) if omega.tu_asserted => push(&mut rep.violations, NotTotallyUnimodular, t, None, String::new()),
                Ok(false) => push(&mut rep.warnings, NotTotallyUnimodular, t, None, "not asserted".into()),
                Err(_) => push(&mut rep.warnings, TuUnchecked, t, None, format!("{}x{k} matrix trusted", a.len())),
            }
        }
    }
    for t in 0..spec.classes.len() {
        for u in t + 1..spec.classes.len() {
            let (a, b) = (&spec.classes[t], &spec.classes[u]);
            if a.omega == b.omega && a.obj == b.obj && a.y_obj == b.y_obj && a.coupling_coeffs == b.coupling_coeffs {
                push(&mut rep.warnings, IdenticalClasses, t, None, format!("class {t} equals class {u}"));
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BlockPair, ConvexQuadratic, EquivClass, OmegaSpec};

    fn spec_with(on: BlockSet) -> ProblemSpec {
        ProblemSpec {
            name: "v".into(),
            classes: vec![EquivClass {
                omega: OmegaSpec { blocks: vec![BlockPair { on, off: BlockSet::zero_singleton(1) }], coupling: vec![], tu_asserted: true },
                multiplicity: 2,
                obj: vec![vec![1.0]],
                y_obj: vec![],
                coupling_coeffs: vec![],
            }],
            global_rows: vec![],
        }
    }

    #[test]
    fn interval_spec_is_ok() {
        let rep = validate_problem(&spec_with(BlockSet::interval(1.0, 2.0)));
        assert!(rep.is_ok(), "{:?}", rep);
    }

    #[test]
    fn negative_curvature_reported() {
        let f = ConvexQuadratic::new(vec![-1.0], vec![0.0], 0.0).unwrap();
        let rep = validate_problem(&spec_with(BlockSet::interval(0.0, 1.0).with_row(f, 1.0)));
        assert!(rep.has(ViolationKind::NegativeCurvature));
        assert_eq!(rep.violations[0].class, Some(0));
        assert_eq!(rep.violations[0].block, Some(0));
    }

    #[test]
    fn contradictory_rows_give_empty_on_set() {
        let on = BlockSet::interval(0.0, 2.0)
            .with_row(ConvexQuadratic::linear(vec![1.0], 0.0), 0.0)
            .with_row(ConvexQuadratic::linear(vec![-1.0], 0.0), -1.0);
        let rep = validate_problem(&spec_with(on));
        assert!(rep.has(ViolationKind::EmptyOnSet));
        assert_eq!(rep, validate_problem(&spec_with(rep_on())));
    }

    fn rep_on() -> BlockSet {
        BlockSet::interval(0.0, 2.0)
            .with_row(ConvexQuadratic::linear(vec![1.0], 0.0), 0.0)
            .with_row(ConvexQuadratic::linear(vec![-1.0], 0.0), -1.0)
    }
}
