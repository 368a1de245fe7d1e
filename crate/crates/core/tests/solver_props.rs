use aggper::model::{ConicModel, Sense};
use aggper::solver::{certify, solve_relaxation, solve_with_bounds, RelaxStatus, SolverTolerances};
use proptest::prelude::*;

fn tol() -> SolverTolerances {
    SolverTolerances::default()
}

#[test]
fn free_variables_stay_free() {
    // min x  s.t.  x − y = 0, y ∈ [1, 2], x free
    let mut m = ConicModel::new("free");
    let x = m.add_continuous(f64::NEG_INFINITY, f64::INFINITY, None);
    let y = m.add_continuous(1.0, 2.0, None);
    m.add_row(vec![(x, 1.0), (y, -1.0)], Sense::Eq, 0.0);
    m.add_objective(x, 1.0);
    let sol = solve_relaxation(&m, &tol());
    assert_eq!(sol.status, RelaxStatus::Optimal);
    assert!((sol.primal[x] - 1.0).abs() < 1e-7);
    assert!(sol.objective <= 1.0 + 1e-9 && sol.objective >= 1.0 - 1e-6);
}

#[test]
fn free_cone_members() {
    // min t  s.t.  a = 3, b = 4, a² + b² ≤ t·1  →  25
    let mut m = ConicModel::new("cone");
    let one = m.add_continuous(1.0, 1.0, None);
    let t = m.add_continuous(0.0, f64::INFINITY, None);
    let a = m.add_continuous(f64::NEG_INFINITY, f64::INFINITY, None);
    let b = m.add_continuous(f64::NEG_INFINITY, f64::INFINITY, None);
    m.add_row(vec![(a, 1.0)], Sense::Eq, 3.0);
    m.add_row(vec![(a, 1.0), (b, -1.0)], Sense::Eq, -1.0);
    m.add_cone(t, one, vec![a, b]);
    m.add_objective(t, 1.0);
    let sol = solve_relaxation(&m, &tol());
    assert_eq!(sol.status, RelaxStatus::Optimal);
    assert!((sol.primal_objective - 25.0).abs() < 1e-6);
}

#[test]
fn infeasible_and_unbounded() {
    let mut m = ConicModel::new("inf");
    let x = m.add_continuous(0.0, 1.0, None);
    let y = m.add_continuous(0.0, 1.0, None);
    m.add_row(vec![(x, 1.0), (y, 1.0)], Sense::Ge, 3.0);
    assert_eq!(solve_relaxation(&m, &tol()).status, RelaxStatus::Infeasible);
    let mut m = ConicModel::new("unb");
    let x = m.add_continuous(f64::NEG_INFINITY, 0.0, None);
    let y = m.add_continuous(0.0, 1.0, None);
    m.add_row(vec![(x, 1.0), (y, 1.0)], Sense::Le, 0.0);
    m.add_objective(x, 1.0);
    assert_eq!(solve_relaxation(&m, &tol()).status, RelaxStatus::Unbounded);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// Separable `min Σ q·x² + b·x` over boxes with one budget row, where the
    /// minimizer comes from bisection on the multiplier.
    #[test]
    fn budgeted_quadratic_matches_bisection(
        terms in prop::collection::vec((0.1f64..5.0, -3.0f64..3.0, -2.0f64..0.0, 0.5f64..2.0), 1..6),
        budget_frac in 0.05f64..0.95,
    ) {
        let lo_sum: f64 = terms.iter().map(|t| t.2).sum();
        let hi_sum: f64 = terms.iter().map(|t| t.3).sum();
        let budget = lo_sum + budget_frac * (hi_sum - lo_sum);
        let mut m = ConicModel::new("budget");
        let one = m.add_continuous(1.0, 1.0, None);
        let mut xs = Vec::new();
        for &(q, b, lo, hi) in &terms {
            let x = m.add_continuous(lo, hi, None);
            let e = m.add_continuous(0.0, f64::INFINITY, None);
            let s = m.add_continuous(f64::NEG_INFINITY, f64::INFINITY, None);
            m.add_row(vec![(s, 1.0), (x, -q.sqrt())], Sense::Eq, 0.0);
            m.add_cone(e, one, vec![s]);
            m.add_objective(e, 1.0);
            m.add_objective(x, b);
            xs.push(x);
        }
        m.add_row(xs.iter().map(|&x| (x, 1.0)).collect(), Sense::Eq, budget);
        let at = |mu: f64| -> Vec<f64> { terms.iter().map(|&(q, b, lo, hi)| ((mu - b) / (2.0 * q)).clamp(lo, hi)).collect() };
        let (mut a, mut z) = (-100.0, 100.0);
        for _ in 0..200 {
            let mid = 0.5 * (a + z);
            if at(mid).iter().sum::<f64>() < budget { a = mid } else { z = mid }
        }
        let x = at(0.5 * (a + z));
        let exact: f64 = terms.iter().zip(&x).map(|(&(q, b, _, _), &v)| q * v * v + b * v).sum();
        let sol = solve_relaxation(&m, &tol());
        prop_assert_eq!(sol.status, RelaxStatus::Optimal);
        prop_assert!(sol.objective <= exact + 1e-9 * (1.0 + exact.abs()), "bound {} above {}", sol.objective, exact);
        prop_assert!((sol.primal_objective - exact).abs() <= 1e-6 * (1.0 + exact.abs()));
        prop_assert!(certify(&m, &sol.primal).max <= 1e-6);
    }

    #[test]
    fn tightened_bounds_never_lower_the_bound(lo in -2.0f64..0.0, hi in 0.1f64..2.0, cut in 0.0f64..1.0) {
        let mut m = ConicModel::new("box");
        let one = m.add_continuous(1.0, 1.0, None);
        let x = m.add_continuous(lo, hi, None);
        let e = m.add_continuous(0.0, f64::INFINITY, None);
        m.add_cone(e, one, vec![x]);
        m.add_objective(e, 1.0);
        let base = solve_relaxation(&m, &tol());
        let mut bounds: Vec<(f64, f64)> = m.vars.iter().map(|v| (v.lower, v.upper)).collect();
        bounds[x].0 = lo + cut * (hi - lo);
        let tight = solve_with_bounds(&m, &bounds, &tol());
        prop_assert!(tight.objective >= base.objective - 1e-7);
        let v = bounds[x].0.max(0.0);
        prop_assert!((tight.primal_objective - v * v).abs() < 1e-6);
    }
}
