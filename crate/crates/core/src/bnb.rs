//! Best-bound branch-and-bound over the integer variables of a
//! [`ConicModel`], using the conic relaxation solver at every node.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ConicModel, ProblemSpec, Role, Sense, VarId};
use crate::solver::{solve_relaxation, solve_with_bounds, RelaxSolution, RelaxStatus, SolverTolerances};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branching {
    MostFractional,
    PseudoCost,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeOrder {
    BestBound,
    Dfs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MipParams {
    pub mip_gap: f64,
    pub int_tol: f64,
    pub node_limit: u64,
    pub time_limit_seconds: f64,
    pub branching: Branching,
    pub node_order: NodeOrder,
    pub tol: SolverTolerances,
}

impl Default for MipParams {
    fn default() -> Self {
        MipParams {
            mip_gap: 1e-6,
            int_tol: 1e-6,
            node_limit: 1_000_000,
            time_limit_seconds: f64::INFINITY,
            branching: Branching::MostFractional,
            node_order: NodeOrder::BestBound,
            tol: SolverTolerances::default(),
        }
    }
}

impl MipParams {
    /// Settings used for unit-commitment runs.
    pub fn uc() -> Self {
        MipParams { mip_gap: 1e-4, ..Default::default() }
    }

    pub fn check(&self) -> Result<()> {
        let in_unit = |v: f64| v > 0.0 && v < 1.0;
        if !in_unit(self.mip_gap) || !in_unit(self.int_tol) {
            return Err(Error::InvalidArgument("mip_gap and int_tol must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MipStatus {
    Optimal,
    Feasible,
    Infeasible,
    Limit,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: MipStatus,
    /// `+∞` without an incumbent.
    pub incumbent_value: f64,
    pub incumbent: Option<Vec<f64>>,
    /// Global lower bound.
    pub bound: f64,
    /// Bound of the root relaxation.
    pub root_bound: f64,
    pub gap: f64,
    pub nodes_explored: u64,
    pub wall_seconds: f64,
}

/// `|incumbent − bound| / max(1, |incumbent|)`.
pub fn mip_gap_of(incumbent: f64, bound: f64) -> f64 {
    if !incumbent.is_finite() || !bound.is_finite() {
        return f64::INFINITY;
    }
    (incumbent - bound).abs() / incumbent.abs().max(1.0)
}

/// Floor/ceil split of the domain `[lo, hi]` at the fractional `value`.
pub fn branch_children(lo: f64, hi: f64, value: f64) -> ((f64, f64), (f64, f64)) {
    ((lo, value.floor().max(lo)), (value.ceil().min(hi), hi))
}

struct Node {
    bound: f64,
    seq: u64,
    int_bounds: Vec<(f64, f64)>,
    /// `(variable, side, distance)` of the branch that created the node.
    branch: Option<(usize, usize, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // max-heap: smaller bound first, then earlier sequence number
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then_with(|| other.seq.cmp(&self.seq))
    }
}

enum Frontier {
    Heap(BinaryHeap<Node>),
    Stack(Vec<Node>),
}

impl Frontier {
    fn push(&mut self, n: Node) {
        match self {
            Frontier::Heap(h) => h.push(n),
            Frontier::Stack(s) => s.push(n),
        }
    }
    fn pop(&mut self) -> Option<Node> {
        match self {
            Frontier::Heap(h) => h.pop(),
            Frontier::Stack(s) => s.pop(),
        }
    }
    fn min_bound(&self) -> f64 {
        let it: Box<dyn Iterator<Item = &Node>> = match self {
            Frontier::Heap(h) => Box::new(h.iter()),
            Frontier::Stack(s) => Box::new(s.iter()),
        };
        it.map(|n| n.bound).fold(f64::INFINITY, f64::min)
    }
}

struct Search<'a> {
    model: &'a ConicModel,
    params: &'a MipParams,
    ints: Vec<VarId>,
    base: Vec<(f64, f64)>,
    incumbent: Option<Vec<f64>>,
    inc_value: f64,
    /// Smallest bound among nodes discarded by the gap test.
    pruned_min: f64,
    inexact: bool,
    pc_sum: Vec<[f64; 2]>,
    pc_cnt: Vec<[u32; 2]>,
    /// Rows over integer variables only, with columns as positions in `ints`.
    int_rows: Vec<(Vec<(usize, f64)>, Sense, f64)>,
}

impl<'a> Search<'a> {
    fn bounds_with(&self, int_bounds: &[(f64, f64)]) -> Vec<(f64, f64)> {
        let mut b = self.base.clone();
        for (k, &j) in self.ints.iter().enumerate() {
            b[j] = int_bounds[k];
        }
        b
    }

    fn solve(&self, int_bounds: &[(f64, f64)]) -> RelaxSolution {
        solve_with_bounds(self.model, &self.bounds_with(int_bounds), &self.params.tol)
    }

    fn gap_closed(&self, bound: f64) -> bool {
        self.incumbent.is_some() && (self.inc_value - bound) / self.inc_value.abs().max(1.0) <= self.params.mip_gap
    }

    /// Rounds the integer variables and solves for the continuous ones.
    /// When plain rounding breaks a row over integer variables only, the
    /// rounding is redone as a linear program over those rows, with every
    /// variable restricted to its floor and ceiling and charged its distance
    /// to `x`.
    fn try_fixed(&mut self, x: &[f64], int_bounds: &[(f64, f64)]) {
        let mut r: Vec<f64> = self.ints.iter().zip(int_bounds).map(|(&j, &(lo, hi))| x[j].round().clamp(lo, hi)).collect();
        if !self.int_rows_hold(&r) {
            match self.round_on_rows(x, int_bounds) {
                Some(v) => r = v,
                None => return,
            }
        }
        let fixed: Vec<(f64, f64)> = r.iter().map(|&v| (v, v)).collect();
        let sol = self.solve(&fixed);
        if sol.is_optimal() && sol.primal_objective < self.inc_value {
            self.inc_value = sol.primal_objective;
            self.incumbent = Some(sol.primal);
        }
    }

    fn int_rows_hold(&self, r: &[f64]) -> bool {
        self.int_rows.iter().all(|(coeffs, sense, rhs)| {
            let lhs: f64 = coeffs.iter().map(|&(k, a)| a * r[k]).sum();
            sense.violation(lhs, *rhs) <= 1e-9 * (1.0 + rhs.abs())
        })
    }

    fn round_on_rows(&self, x: &[f64], int_bounds: &[(f64, f64)]) -> Option<Vec<f64>> {
        let mut lp = ConicModel::new("rounding");
        for (k, (&j, &(lo, hi))) in self.ints.iter().zip(int_bounds).enumerate() {
            let v = x[j].clamp(lo, hi);
            let (fl, ce) = (v.floor(), v.ceil());
            let var = lp.add_continuous(fl, ce, None);
            // slope of the distance to v between floor and ceiling, with a
            // small index-based offset so ties have a unique optimum
            let tie = 1e-6 * ((k as u64).wrapping_mul(2654435761) % 1000) as f64 / 1000.0;
            lp.add_objective(var, 1.0 - 2.0 * (v - fl) + tie);
        }
        for (coeffs, sense, rhs) in &self.int_rows {
            lp.add_row(coeffs.clone(), *sense, *rhs);
        }
        let sol = solve_relaxation(&lp, &self.params.tol);
        if !sol.is_optimal() {
            return None;
        }
        let r: Vec<f64> = sol.primal.iter().map(|v| v.round()).collect();
        self.int_rows_hold(&r).then_some(r)
    }

    fn fractional(&self, x: &[f64]) -> Vec<(usize, f64)> {
        self.ints
            .iter()
            .enumerate()
            .filter_map(|(k, &j)| {
                let f = x[j] - x[j].floor();
                let dist = f.min(1.0 - f);
                (dist > self.params.int_tol).then_some((k, f))
            })
            .collect()
    }

    fn pick(&self, frac: &[(usize, f64)]) -> usize {
        let most_fractional = || {
            let mut best = frac[0];
            for &(k, f) in &frac[1..] {
                if f.min(1.0 - f) > best.1.min(1.0 - best.1) {
                    best = (k, f);
                }
            }
            best.0
        };
        if self.params.branching == Branching::MostFractional {
            return most_fractional();
        }
        // unseen variables and sides use the mean over observed ones
        let mut mean = [1.0; 2];
        for side in 0..2 {
            let (sum, cnt) = (0..self.pc_cnt.len())
                .filter(|&k| self.pc_cnt[k][side] > 0)
                .fold((0.0, 0u32), |(a, c), k| (a + self.pc_sum[k][side] / self.pc_cnt[k][side] as f64, c + 1));
            if cnt > 0 {
                mean[side] = sum / cnt as f64;
            }
        }
        let unit = |k: usize, side: usize| {
            if self.pc_cnt[k][side] == 0 {
                mean[side]
            } else {
                self.pc_sum[k][side] / self.pc_cnt[k][side] as f64
            }
        };
        let mut best: Option<(usize, f64)> = None;
        for &(k, f) in frac {
            let down = unit(k, 0) * f;
            let up = unit(k, 1) * (1.0 - f);
            let score = down.max(1e-6) * up.max(1e-6);
            if best.map_or(true, |(_, s)| score > s) {
                best = Some((k, score));
            }
        }
        best.map_or_else(most_fractional, |(k, _)| k)
    }
}

fn int_rows(model: &ConicModel, ints: &[VarId]) -> Vec<(Vec<(usize, f64)>, Sense, f64)> {
    let mut pos = vec![None; model.num_vars()];
    for (k, &j) in ints.iter().enumerate() {
        pos[j] = Some(k);
    }
    model
        .rows
        .iter()
        .filter_map(|row| {
            let coeffs: Option<Vec<(usize, f64)>> = row.coeffs.iter().map(|&(j, a)| pos[j].map(|k| (k, a))).collect();
            coeffs.filter(|c| !c.is_empty()).map(|c| (c, row.sense, row.rhs))
        })
        .collect()
}

/// Branch-and-bound on the integer variables of `model`.
pub fn solve_mip(model: &ConicModel, params: &MipParams) -> Result<SolveResult> {
    params.check()?;
    model.check()?;
    let start = Instant::now();
    let ints = model.integer_vars();
    let base: Vec<(f64, f64)> = model.vars.iter().map(|v| (v.lower, v.upper)).collect();
    let root_ints: Vec<(f64, f64)> = ints.iter().map(|&j| (base[j].0.ceil(), base[j].1.floor())).collect();
    let mut s = Search {
        model,
        params,
        pc_sum: vec![[0.0; 2]; ints.len()],
        pc_cnt: vec![[0; 2]; ints.len()],
        int_rows: int_rows(model, &ints),
        ints,
        base,
        incumbent: None,
        inc_value: f64::INFINITY,
        pruned_min: f64::INFINITY,
        inexact: false,
    };
    let mut frontier = match params.node_order {
        NodeOrder::BestBound => Frontier::Heap(BinaryHeap::new()),
        NodeOrder::Dfs => Frontier::Stack(Vec::new()),
    };
    frontier.push(Node { bound: f64::NEG_INFINITY, seq: 0, int_bounds: root_ints, branch: None });
    let mut seq = 1u64;
    let mut nodes = 0u64;
    let mut global = f64::NEG_INFINITY;
    let mut root_bound = f64::NEG_INFINITY;
    let mut limit_hit = false;

    while let Some(node) = frontier.pop() {
        let open_min = frontier.min_bound().min(node.bound);
        global = global.max(open_min.min(s.pruned_min).min(s.inc_value));
        if node.bound > f64::NEG_INFINITY && (node.bound >= s.inc_value || s.gap_closed(node.bound)) {
            s.pruned_min = s.pruned_min.min(node.bound);
            continue;
        }
        if nodes >= params.node_limit || start.elapsed().as_secs_f64() > params.time_limit_seconds {
            frontier.push(node);
            limit_hit = true;
            break;
        }
        nodes += 1;
        if node.int_bounds.iter().any(|&(lo, hi)| lo > hi) {
            continue;
        }
        let sol = s.solve(&node.int_bounds);
        let bound = match sol.status {
            RelaxStatus::Infeasible => {
                if nodes == 1 {
                    root_bound = f64::INFINITY;
                }
                continue;
            }
            RelaxStatus::Optimal => sol.objective.max(node.bound),
            _ => node.bound,
        };
        if let (RelaxStatus::Optimal, Some((k, side, dist))) = (sol.status, node.branch) {
            s.pc_sum[k][side] += (bound - node.bound).max(0.0) / dist.max(1e-9);
            s.pc_cnt[k][side] += 1;
        }
        if nodes == 1 {
            root_bound = bound;
        }
        if bound >= s.inc_value || s.gap_closed(bound) {
            s.pruned_min = s.pruned_min.min(bound);
            continue;
        }
        let have_primal = sol.status == RelaxStatus::Optimal;
        let frac = if have_primal { s.fractional(&sol.primal) } else { Vec::new() };
        if have_primal && frac.is_empty() {
            s.try_fixed(&sol.primal, &node.int_bounds);
            continue;
        }
        if have_primal && (nodes == 1 || nodes % 16 == 0) {
            s.try_fixed(&sol.primal, &node.int_bounds);
            if bound >= s.inc_value || s.gap_closed(bound) {
                s.pruned_min = s.pruned_min.min(bound);
                continue;
            }
        }
        let (k, value) = if have_primal {
            let k = s.pick(&frac);
            (k, sol.primal[s.ints[k]])
        } else {
            // no usable point: split the widest domain at its midpoint
            match (0..s.ints.len())
                .filter(|&k| node.int_bounds[k].1 > node.int_bounds[k].0)
                .max_by(|&a, &b| {
                    let wa = node.int_bounds[a].1 - node.int_bounds[a].0;
                    let wb = node.int_bounds[b].1 - node.int_bounds[b].0;
                    wa.total_cmp(&wb).then(b.cmp(&a))
                }) {
                Some(k) => (k, 0.5 * (node.int_bounds[k].0 + node.int_bounds[k].1) + 0.25),
                None => {
                    s.inexact = true;
                    s.pruned_min = s.pruned_min.min(bound);
                    continue;
                }
            }
        };
        let (lo, hi) = node.int_bounds[k];
        let (down, up) = branch_children(lo, hi, value);
        let f = value - value.floor();
        for (side, dom, dist) in [(0, down, f), (1, up, 1.0 - f)] {
            let mut ib = node.int_bounds.clone();
            ib[k] = dom;
            let branch = have_primal.then_some((k, side, dist));
            frontier.push(Node { bound, seq, int_bounds: ib, branch });
            seq += 1;
        }
    }

    let open_min = frontier.min_bound();
    let final_bound = open_min.min(s.pruned_min).min(s.inc_value).max(global);
    let final_bound = if s.incumbent.is_none() && !limit_hit && !s.inexact { f64::INFINITY } else { final_bound };
    let gap = mip_gap_of(s.inc_value, final_bound);
    let status = if limit_hit {
        MipStatus::Limit
    } else if s.incumbent.is_none() {
        if s.inexact {
            MipStatus::Limit
        } else {
            MipStatus::Infeasible
        }
    } else if s.inexact && gap > params.mip_gap {
        MipStatus::Feasible
    } else {
        MipStatus::Optimal
    };
    Ok(SolveResult {
        status,
        incumbent_value: s.inc_value,
        incumbent: s.incumbent,
        bound: final_bound,
        root_bound,
        gap,
        nodes_explored: nodes,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Appends `y_i − y_{i+1} ≥ 0` for consecutive members of every class on
/// the class's key binary: the first block with a nonempty on-part (block 0
/// when every block is empty).
pub fn add_symmetry_cuts(model: &ConicModel, spec: &ProblemSpec) -> Result<ConicModel> {
    let mut out = model.clone();
    let per_copy = model.vars.iter().any(|v| matches!(v.tag, Some(t) if t.role == Role::Y && t.member.is_some()));
    if !per_copy && spec.per_copy_binaries() > 0 {
        return Err(Error::NotPerCopy(model.name.clone()));
    }
    for (t, class) in spec.classes.iter().enumerate() {
        let key = class.omega.blocks.iter().position(|b| b.dim() > 0).unwrap_or(0) as u32;
        let mut ys: Vec<(u32, VarId)> = model
            .vars
            .iter()
            .enumerate()
            .filter_map(|(j, v)| match v.tag {
                Some(tag) if tag.class == t as u32 && tag.block == key && tag.role == Role::Y => tag.member.map(|i| (i, j)),
                _ => None,
            })
            .collect();
        ys.sort();
        for pair in ys.windows(2) {
            out.add_row(vec![(pair[0].1, 1.0), (pair[1].1, -1.0)], Sense::Ge, 0.0);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn children_split_at_fraction() {
        assert_eq!(branch_children(0.0, 2.0, 0.5), ((0.0, 0.0), (1.0, 2.0)));
        assert_eq!(branch_children(0.0, 3.0, 2.25), ((0.0, 2.0), (3.0, 3.0)));
    }

    #[test]
    fn knapsack_like_model() {
        // min −x − y  s.t.  2x + 2y ≤ 3, x, y ∈ {0, 1}
        let mut m = ConicModel::new("k");
        let x = m.add_var(0.0, 1.0, true, None);
        let y = m.add_var(0.0, 1.0, true, None);
        m.add_row(vec![(x, 2.0), (y, 2.0)], Sense::Le, 3.0);
        m.add_objective(x, -1.0);
        m.add_objective(y, -1.0);
        let res = solve_mip(&m, &MipParams::default()).unwrap();
        assert_eq!(res.status, MipStatus::Optimal);
        assert!((res.incumbent_value + 1.0).abs() < 1e-7);
        assert!(res.nodes_explored >= 1);
        assert!(res.bound <= res.incumbent_value + 1e-9);
    }

    #[test]
    fn infeasible_integer_model() {
        let mut m = ConicModel::new("i");
        let x = m.add_var(0.0, 1.0, true, None);
        m.add_row(vec![(x, 2.0)], Sense::Eq, 1.0);
        let res = solve_mip(&m, &MipParams::default()).unwrap();
        assert_eq!(res.status, MipStatus::Infeasible);
        assert!(res.incumbent.is_none());
    }

    #[test]
    fn params_are_checked() {
        let p = MipParams { mip_gap: 0.0, ..Default::default() };
        assert!(p.check().is_err());
    }
}
