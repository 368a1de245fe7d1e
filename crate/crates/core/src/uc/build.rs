use super::graph::{build_dp_graph, ArcKind, DpGraph};
use super::{FleetSpec, UnitSpec};
use crate::error::Result;
use crate::model::{
    BlockPair, BlockSet, ConicModel, ConvexQuadratic, CouplingRow, EquivClass, GlobalRow, OmegaSpec, ProblemSpec, Role, Sense, VarTag,
};
use crate::perspective::{soc_encode, PerspectiveRow};
use crate::solver::{solve_relaxation, SolverTolerances};

/// Schedule graph of every fleet class.
pub fn fleet_graphs(fleet: &FleetSpec) -> Result<Vec<DpGraph>> {
    fleet.check()?;
    fleet.classes.iter().map(|c| build_dp_graph(&c.unit, fleet.periods())).collect()
}

/// Period-wise power box of an ON arc covering `len` periods.
fn arc_box(unit: &UnitSpec, len: usize, starts: bool, stops: bool) -> (Vec<f64>, Vec<f64>) {
    let lower = vec![unit.p_min; len];
    let mut upper = vec![unit.p_max; len];
    if starts {
        upper[0] = upper[0].min(unit.su_limit);
    }
    if stops {
        upper[len - 1] = upper[len - 1].min(unit.sd_limit);
    }
    (lower, upper)
}

fn ramps_ok(unit: &UnitSpec, x: &[f64]) -> bool {
    x.windows(2).all(|p| p[1] - p[0] <= unit.ramp_up + 1e-12 && p[0] - p[1] <= unit.ramp_down + 1e-12)
}

/// Lower end of the cost epigraph box: the minimum of `Σ a·x² + b·x` over
/// the arc's power box and ramp rows. Uses the clipped vertex when it
/// already meets the ramps, a conic solve otherwise.
fn cost_floor(unit: &UnitSpec, lower: &[f64], upper: &[f64]) -> f64 {
    let cost = ConvexQuadratic::new(vec![unit.cost_quad; lower.len()], vec![unit.cost_lin; lower.len()], 0.0).unwrap();
    let (value, arg) = cost.min_over_box(lower, upper);
    if ramps_ok(unit, &arg) {
        return value;
    }
    let mut m = ConicModel::new("cost_floor");
    let one = m.add_continuous(1.0, 1.0, None);
    let x: Vec<usize> = lower.iter().zip(upper).map(|(&l, &u)| m.add_continuous(l, u, None)).collect();
    let z = m.add_continuous(value, cost.max_over_box(lower, upper), None);
    for w in x.windows(2) {
        m.add_row(vec![(w[1], 1.0), (w[0], -1.0)], Sense::Le, unit.ramp_up);
        m.add_row(vec![(w[0], 1.0), (w[1], -1.0)], Sense::Le, unit.ramp_down);
    }
    let mut vars = x.clone();
    vars.push(z);
    let mut lin = vec![unit.cost_lin; x.len()];
    lin.push(-1.0);
    let mut quad = vec![unit.cost_quad; x.len()];
    quad.push(0.0);
    let f = ConvexQuadratic::new(quad, lin, 0.0).unwrap();
    soc_encode(&PerspectiveRow { base: f, scale_var: one, vars, rhs: 0.0 }, &mut m);
    m.add_objective(z, 1.0);
    let sol = solve_relaxation(&m, &SolverTolerances::default());
    if sol.is_optimal() {
        sol.objective.max(value)
    } else {
        value
    }
}

fn unit_class(unit: &UnitSpec, count: u32, g: &DpGraph) -> EquivClass {
    let n = g.n as usize;
    let mut blocks = Vec::with_capacity(g.arcs.len());
    let mut obj = Vec::new();
    let mut y_obj = Vec::new();
    let mut coupling_coeffs = vec![Vec::new(); n];
    for arc in &g.arcs {
        if arc.kind == ArcKind::Off {
            blocks.push(BlockPair { on: BlockSet::zero_singleton(0), off: BlockSet::zero_singleton(0) });
            obj.push(Vec::new());
            y_obj.push(if arc.precedes_startup() { unit.startup_cost } else { 0.0 });
            for row in coupling_coeffs.iter_mut() {
                row.push(Vec::new());
            }
            continue;
        }
        let len = arc.len() as usize;
        let dim = len + 1;
        let (mut lower, mut upper) = arc_box(unit, len, arc.starts_up(), arc.shuts_down(g.n));
        let z_lo = cost_floor(unit, &lower, &upper);
        let cost = ConvexQuadratic::new(vec![unit.cost_quad; len], vec![unit.cost_lin; len], 0.0).unwrap();
        let z_hi = cost.max_over_box(&lower, &upper);
        lower.push(z_lo);
        upper.push(z_hi.max(z_lo));
        let mut on = BlockSet::boxed(lower.clone(), upper.clone());
        for j in 0..len.saturating_sub(1) {
            let mut up = vec![0.0; dim];
            up[j + 1] = 1.0;
            up[j] = -1.0;
            let down: Vec<f64> = up.iter().map(|v| -v).collect();
            // rows implied by the power box are left out
            if upper[j + 1] - lower[j] > unit.ramp_up {
                on = on.with_row(ConvexQuadratic::linear(up, 0.0), unit.ramp_up);
            }
            if upper[j] - lower[j + 1] > unit.ramp_down {
                on = on.with_row(ConvexQuadratic::linear(down, 0.0), unit.ramp_down);
            }
        }
        let mut quad = vec![unit.cost_quad; dim];
        quad[len] = 0.0;
        let mut lin = vec![unit.cost_lin; dim];
        lin[len] = -1.0;
        on = on.with_row(ConvexQuadratic::new(quad, lin, 0.0).unwrap(), 0.0);
        blocks.push(BlockPair { on, off: BlockSet::zero_singleton(dim) });
        let mut c = vec![0.0; dim];
        c[len] = 1.0;
        obj.push(c);
        y_obj.push(len as f64 * unit.cost_fixed);
        for (j, row) in coupling_coeffs.iter_mut().enumerate() {
            let period = j as u32 + 1;
            let mut v = vec![0.0; dim];
            if period >= arc.first && period <= arc.last {
                v[(period - arc.first) as usize] = 1.0;
            }
            row.push(v);
        }
    }
    let delta = g.delta();
    let coupling = g
        .incidence()
        .into_iter()
        .zip(delta)
        .filter(|(row, rhs)| *rhs != 0 || row.iter().any(|&v| v != 0))
        .map(|(coeffs, rhs)| CouplingRow { coeffs, sense: Sense::Eq, rhs })
        .collect();
    EquivClass {
        omega: OmegaSpec { blocks, coupling, tu_asserted: true },
        multiplicity: count,
        obj,
        y_obj,
        coupling_coeffs,
    }
}

/// Graph-based unit commitment spec: one class per fleet class, one block
/// per arc (ON arcs carry the span's power plus a cost epigraph variable,
/// OFF arcs only their binary), flow rows `E·y = δ`, and one demand
/// equality per period.
pub fn build_uc(fleet: &FleetSpec) -> Result<ProblemSpec> {
    let graphs = fleet_graphs(fleet)?;
    let classes = fleet.classes.iter().zip(&graphs).map(|(c, g)| unit_class(&c.unit, c.count, g)).collect();
    let global_rows = fleet.demand.iter().map(|&d| GlobalRow { sense: Sense::Eq, rhs: d }).collect();
    Ok(ProblemSpec { name: fleet.name.clone(), classes, global_rows })
}

/// Three-binary baseline: commitment `u`, start-up `v` and shut-down `w` per
/// unit and period, with minimum up/down windows, start-up and shut-down
/// limits, ramp rows and a quadratic cost epigraph per period.
pub fn build_3bin(fleet: &FleetSpec) -> Result<ConicModel> {
    fleet.check()?;
    let n = fleet.periods() as usize;
    let mut m = ConicModel::new(&format!("{}_3bin", fleet.name));
    let one = m.add_continuous(1.0, 1.0, None);
    let mut demand_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (t, class) in fleet.classes.iter().enumerate() {
        let unit = &class.unit;
        for i in 0..class.count {
            let tag = |role: Role, block: usize, coord: usize| {
                Some(VarTag { class: t as u32, member: Some(i), block: block as u32, role, coord: coord as u32 })
            };
            let u: Vec<usize> = (0..n).map(|j| m.add_var(0.0, 1.0, true, tag(Role::Y, 0, j))).collect();
            let v: Vec<usize> = (0..n).map(|j| m.add_var(0.0, 1.0, true, tag(Role::Y, 1, j))).collect();
            let w: Vec<usize> = (0..n).map(|j| m.add_var(0.0, 1.0, true, tag(Role::Y, 2, j))).collect();
            let p: Vec<usize> = (0..n).map(|j| m.add_continuous(0.0, unit.p_max, tag(Role::X, 0, j))).collect();
            let init_on = unit.initial_state > 0;
            for j in 0..n {
                // u_j − u_{j−1} = v_j − w_j
                let mut row = vec![(u[j], 1.0), (v[j], -1.0), (w[j], 1.0)];
                let rhs = if j == 0 {
                    if init_on { 1.0 } else { 0.0 }
                } else {
                    row.push((u[j - 1], -1.0));
                    0.0
                };
                m.add_row(row, Sense::Eq, rhs);
                m.add_row(vec![(v[j], 1.0), (w[j], 1.0)], Sense::Le, 1.0);
                let up_from = (j + 1).saturating_sub(unit.min_up as usize);
                let mut row: Vec<(usize, f64)> = (up_from..=j).map(|k| (v[k], 1.0)).collect();
                row.push((u[j], -1.0));
                m.add_row(row, Sense::Le, 0.0);
                let down_from = (j + 1).saturating_sub(unit.min_down as usize);
                let mut row: Vec<(usize, f64)> = (down_from..=j).map(|k| (w[k], 1.0)).collect();
                row.push((u[j], 1.0));
                m.add_row(row, Sense::Le, 1.0);
                m.add_row(vec![(p[j], 1.0), (u[j], -unit.p_min)], Sense::Ge, 0.0);
                m.add_row(vec![(p[j], 1.0), (u[j], -unit.p_max), (v[j], unit.p_max - unit.su_limit)], Sense::Le, 0.0);
                if j + 1 < n {
                    m.add_row(vec![(p[j], 1.0), (u[j], -unit.p_max), (w[j + 1], unit.p_max - unit.sd_limit)], Sense::Le, 0.0);
                }
                if j > 0 {
                    m.add_row(vec![(p[j], 1.0), (p[j - 1], -1.0), (u[j - 1], -unit.ramp_up), (v[j], -unit.su_limit)], Sense::Le, 0.0);
                    m.add_row(vec![(p[j - 1], 1.0), (p[j], -1.0), (u[j], -unit.ramp_down), (w[j], -unit.sd_limit)], Sense::Le, 0.0);
                }
                let e_lo = crate::model::interval_min(unit.cost_quad, unit.cost_lin, 0.0, unit.p_max).0;
                let e_hi = crate::model::interval_max(unit.cost_quad, unit.cost_lin, 0.0, unit.p_max).0;
                let e = m.add_continuous(e_lo, e_hi, tag(Role::Epigraph, 0, j));
                let f = ConvexQuadratic::new(vec![unit.cost_quad, 0.0], vec![unit.cost_lin, -1.0], 0.0).unwrap();
                soc_encode(&PerspectiveRow { base: f, scale_var: one, vars: vec![p[j], e], rhs: 0.0 }, &mut m);
                m.add_objective(e, 1.0);
                m.add_objective(u[j], unit.cost_fixed);
                m.add_objective(v[j], unit.startup_cost);
                demand_rows[j].push((p[j], 1.0));
            }
            // residual obligations carried in from before period 1
            if init_on {
                let k = unit.initial_state as u32;
                for j in 0..(unit.min_up.saturating_sub(k) as usize).min(n) {
                    m.add_row(vec![(u[j], 1.0)], Sense::Eq, 1.0);
                }
            } else {
                let k = unit.initial_state.unsigned_abs();
                for j in 0..(unit.min_down.saturating_sub(k) as usize).min(n) {
                    m.add_row(vec![(u[j], 1.0)], Sense::Eq, 0.0);
                }
            }
        }
    }
    for (j, row) in demand_rows.into_iter().enumerate() {
        m.add_row(row, Sense::Eq, fleet.demand[j]);
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uc::FleetClass;

    fn fleet(unit: UnitSpec, demand: Vec<f64>) -> FleetSpec {
        FleetSpec { name: "f".into(), classes: vec![FleetClass { unit, count: 1 }], demand }
    }

    #[test]
    fn single_period_arc_bounds() {
        let unit = UnitSpec { cost_quad: 1.0, cost_lin: 0.0, p_min: 1.0, p_max: 2.0, ..UnitSpec::example() };
        let spec = build_uc(&fleet(unit, vec![1.5])).unwrap();
        let class = &spec.classes[0];
        assert_eq!(spec.global_rows.len(), 1);
        let on_blocks: Vec<_> = class.omega.blocks.iter().filter(|b| b.dim() > 0).collect();
        assert_eq!(on_blocks.len(), 1);
        let on = &on_blocks[0].on;
        assert_eq!((on.lower[1], on.upper[1]), (1.0, 4.0));
    }

    #[test]
    fn ramp_binding_floor_uses_solve() {
        // clipped vertex (2, 10) breaks the ramp; the optimum is (2, 3)
        let unit = UnitSpec { p_min: 1.0, p_max: 10.0, ramp_up: 1.0, ramp_down: 1.0, cost_quad: 1.0, cost_lin: -20.0, ..UnitSpec::example() };
        let (lo, hi) = (vec![1.0, 1.0], vec![2.0, 10.0]);
        let floor = cost_floor(&unit, &lo, &hi);
        assert!(floor <= -87.0 + 1e-9 && floor > -87.0 - 1e-5, "{floor}");
    }
}
