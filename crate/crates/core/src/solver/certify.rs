use crate::model::ConicModel;

/// Scaled constraint violations of a primal point.
///
/// Rows report `violation / (1 + |rhs|)`; cones report
/// `max(0, ‖(u − v, 2z)‖ − (u + v)) / 2`; bounds report
/// `violation / (1 + |bound|)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResidualReport {
    pub rows: Vec<f64>,
    pub cones: Vec<f64>,
    pub bounds: Vec<f64>,
    pub max: f64,
}

impl ResidualReport {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty() && self.cones.is_empty() && self.bounds.is_empty()
    }
}

/// Recomputes every row, cone and bound violation of `x` against `model`.
pub fn certify(model: &ConicModel, x: &[f64]) -> ResidualReport {
    let bounds: Vec<(f64, f64)> = model.vars.iter().map(|v| (v.lower, v.upper)).collect();
    certify_with_bounds(model, &bounds, x)
}

pub(crate) fn cone_violation(u: f64, v: f64, z: impl Iterator<Item = f64>) -> f64 {
    let zz: f64 = z.map(|zj| 4.0 * zj * zj).sum();
    let norm = ((u - v) * (u - v) + zz).sqrt();
    (0.5 * (norm - (u + v))).max(0.0)
}

pub(crate) fn certify_with_bounds(model: &ConicModel, bounds: &[(f64, f64)], x: &[f64]) -> ResidualReport {
    let rows: Vec<f64> = model
        .rows
        .iter()
        .map(|r| r.sense.violation(r.activity(x), r.rhs) / (1.0 + r.rhs.abs()))
        .collect();
    let cones: Vec<f64> = model
        .cones
        .iter()
        .map(|c| cone_violation(x[c.u], x[c.v], c.z.iter().map(|&j| x[j])))
        .collect();
    let bounds: Vec<f64> = bounds
        .iter()
        .zip(x)
        .map(|(&(lo, hi), &xj)| {
            let below = if lo.is_finite() { (lo - xj).max(0.0) / (1.0 + lo.abs()) } else { 0.0 };
            let above = if hi.is_finite() { (xj - hi).max(0.0) / (1.0 + hi.abs()) } else { 0.0 };
            below.max(above)
        })
        .collect();
    let max = rows.iter().chain(&cones).chain(&bounds).fold(0.0f64, |m, &v| m.max(v));
    ResidualReport { rows, cones, bounds, max }
}
