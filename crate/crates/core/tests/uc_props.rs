use std::collections::BTreeSet;

use aggper::aggregation::compile_agg;
use aggper::bnb::{solve_mip, MipParams, MipStatus};
use aggper::oracle::brute_optimum;
use aggper::perspective::compile_per;
use aggper::uc::{build_dp_graph, decode_path, ArcKind, DpGraph, Node};
use aggper::uc::{build_3bin, build_uc, FleetClass, FleetSpec, UnitSpec};
use aggper::{Error, Mode};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Minimum up/down rules checked directly on an on/off schedule.
fn schedule_ok(unit: &UnitSpec, s: &[bool]) -> bool {
    let n = s.len();
    let (up, down) = (unit.min_up as usize, unit.min_down as usize);
    let k = unit.initial_state.unsigned_abs() as usize;
    let init_on = unit.initial_state > 0;
    let mut h = 0;
    while h < n {
        let mut r = h;
        while r + 1 < n && s[r + 1] == s[h] {
            r += 1;
        }
        let len = r - h + 1;
        let to_end = r == n - 1;
        let ok = match (s[h], h == 0) {
            (true, true) if init_on => to_end || k + len >= up,
            (true, true) => k >= down && (to_end || len >= up),
            (true, false) => to_end || len >= up,
            (false, true) if init_on => k >= up && (to_end || len >= down),
            (false, true) => to_end || k + len >= down,
            (false, false) => to_end || len >= down,
        };
        if !ok {
            return false;
        }
        h = r + 1;
    }
    true
}

fn paths(g: &DpGraph) -> Vec<Vec<i64>> {
    fn walk(g: &DpGraph, at: Node, y: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if at == Node::Sink {
            out.push(y.clone());
            return;
        }
        for (a, arc) in g.arcs.iter().enumerate() {
            if arc.from == at {
                y[a] = 1;
                walk(g, arc.to, y, out);
                y[a] = 0;
            }
        }
    }
    let mut out = Vec::new();
    walk(g, Node::Source, &mut vec![0; g.arcs.len()], &mut out);
    out
}

fn det(mut a: Vec<Vec<i64>>) -> i64 {
    let n = a.len();
    let mut sign = 1;
    let mut prev = 1;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

fn unit(min_up: u32, min_down: u32, initial_state: i32) -> UnitSpec {
    UnitSpec { min_up, min_down, initial_state, ..UnitSpec::example() }
}

#[test]
fn spans_for_min_up_two() {
    let g = build_dp_graph(&unit(2, 1, -1), 3).unwrap();
    let spans: Vec<(u32, u32)> = g.arcs.iter().filter(|a| a.kind == ArcKind::On).map(|a| (a.first, a.last)).collect();
    assert_eq!(spans, vec![(1, 2), (1, 3), (2, 3), (3, 3)]);
    assert_eq!(g.num_nodes(), 8);
}

#[test]
fn one_period_graph() {
    let g = build_dp_graph(&unit(1, 1, -1), 1).unwrap();
    assert_eq!(g.arcs.iter().filter(|a| a.kind == ArcKind::On).count(), 1);
    assert_eq!(g.num_nodes(), 4);
}

#[test]
fn decoded_paths_are_exactly_the_valid_schedules() {
    for n in 1..=6u32 {
        for up in 1..=4 {
            for down in 1..=4 {
                for init in [-5, -3, -2, -1, 1, 2, 3, 5] {
                    let u = unit(up, down, init);
                    let valid: BTreeSet<Vec<bool>> = (0..1u32 << n)
                        .map(|bits| (0..n).map(|j| bits >> j & 1 == 1).collect::<Vec<bool>>())
                        .filter(|s| schedule_ok(&u, s))
                        .collect();
                    let g = match build_dp_graph(&u, n) {
                        Ok(g) => g,
                        Err(Error::NoValidSchedule(_)) => {
                            assert!(valid.is_empty(), "n={n} up={up} down={down} init={init}");
                            continue;
                        }
                        Err(e) => panic!("{e}"),
                    };
                    assert_eq!(g.num_nodes(), 2 * n as usize + 2);
                    let decoded: Vec<Vec<bool>> = paths(&g).iter().map(|y| decode_path(&g, y).unwrap()).collect();
                    let unique: BTreeSet<Vec<bool>> = decoded.iter().cloned().collect();
                    assert_eq!(unique.len(), decoded.len(), "two paths share a schedule");
                    assert_eq!(unique, valid, "n={n} up={up} down={down} init={init}");
                }
            }
        }
    }
}

#[test]
fn broken_selections_do_not_decode() {
    let g = build_dp_graph(&unit(1, 1, -1), 3).unwrap();
    let p = &paths(&g)[0];
    let mut two = p.clone();
    let extra = two.iter().position(|&v| v == 0).unwrap();
    two[extra] = 1;
    assert!(decode_path(&g, &two).is_err());
    assert!(decode_path(&g, &vec![0; g.arcs.len()]).is_err());
    assert!(decode_path(&g, &[1]).is_err());
}

#[test]
fn incidence_submatrices_are_unimodular() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (up, down, init) in [(1, 1, -1), (2, 3, 2), (3, 2, -4), (1, 2, 5)] {
        let g = build_dp_graph(&unit(up, down, init), 6).unwrap();
        let e = g.incidence();
        for &col in g.delta().iter().filter(|&&d| d != 0) {
            assert!(col == 1 || col == -1);
        }
        for _ in 0..400 {
            let size = rng.gen_range(1..=6usize).min(e.len()).min(g.arcs.len());
            let rows = rand::seq::index::sample(&mut rng, e.len(), size).into_vec();
            let cols = rand::seq::index::sample(&mut rng, g.arcs.len(), size).into_vec();
            let sub: Vec<Vec<i64>> = rows.iter().map(|&i| cols.iter().map(|&j| e[i][j]).collect()).collect();
            assert!(det(sub).abs() <= 1);
        }
    }
}

fn one_unit(unit: UnitSpec, demand: Vec<f64>) -> FleetSpec {
    FleetSpec { name: "one".into(), classes: vec![FleetClass { unit, count: 1 }], demand }
}

#[test]
fn single_period_three_bin_closed_form() {
    for (init, start) in [(-1, true), (1, false)] {
        let u = UnitSpec { cost_quad: 0.5, cost_lin: 3.0, cost_fixed: 2.0, startup_cost: 7.0, initial_state: init, ..UnitSpec::example() };
        let d = 1.5;
        let expect = 0.5 * d * d + 3.0 * d + 2.0 + if start { 7.0 } else { 0.0 };
        let fleet = one_unit(u, vec![d]);
        for m in [build_3bin(&fleet).unwrap(), compile_per(&build_uc(&fleet).unwrap(), Mode::Integer)] {
            let r = solve_mip(&m, &MipParams { mip_gap: 1e-8, ..MipParams::default() }).unwrap();
            assert_eq!(r.status, MipStatus::Optimal);
            assert!((r.incumbent_value - expect).abs() <= 1e-6 * expect, "{} vs {expect}", r.incumbent_value);
        }
    }
}

#[test]
fn zero_demand_keeps_everything_off() {
    let u = UnitSpec { cost_fixed: 1.0, initial_state: -2, ..UnitSpec::example() };
    let fleet = one_unit(u, vec![0.0; 4]);
    for m in [build_3bin(&fleet).unwrap(), compile_agg(&build_uc(&fleet).unwrap(), Mode::Integer)] {
        let r = solve_mip(&m, &MipParams::default()).unwrap();
        assert_eq!(r.status, MipStatus::Optimal);
        assert!(r.incumbent_value.abs() <= 1e-6);
    }
}

#[test]
fn epigraph_box_of_a_single_period_arc() {
    let u = UnitSpec { p_min: 1.0, p_max: 2.0, cost_quad: 1.0, cost_lin: 0.0, ..UnitSpec::example() };
    let spec = build_uc(&one_unit(u, vec![1.5])).unwrap();
    let class = &spec.classes[0];
    assert_eq!(class.omega.blocks.iter().filter(|b| b.dim() > 0).count(), 1);
    let on = &class.omega.blocks.iter().find(|b| b.dim() > 0).unwrap().on;
    // coordinates: power, then the cost epigraph
    assert_eq!((on.lower[1], on.upper[1]), (1.0, 4.0));
    assert_eq!(spec.global_rows.len(), 1);
}

fn random_unit(rng: &mut ChaCha8Rng) -> UnitSpec {
    let p_max = rng.gen_range(2.0..6.0f64);
    let p_min = rng.gen_range(0.2..0.5) * p_max;
    UnitSpec {
        p_min,
        p_max,
        ramp_up: rng.gen_range(0.3..1.0) * p_max,
        ramp_down: rng.gen_range(0.3..1.0) * p_max,
        su_limit: rng.gen_range(1.0..1.5) * p_min,
        sd_limit: rng.gen_range(1.0..1.5) * p_min,
        min_up: rng.gen_range(1..=3),
        min_down: rng.gen_range(1..=3),
        cost_quad: rng.gen_range(0.0..0.5),
        cost_lin: rng.gen_range(1.0..4.0),
        cost_fixed: rng.gen_range(0.0..3.0),
        startup_cost: rng.gen_range(0.0..5.0),
        initial_state: if rng.gen_bool(0.5) { rng.gen_range(1..=3) } else { -rng.gen_range(1..=3) },
    }
}

/// Small random fleets: the three formulations and a brute-force sweep over
/// every pair of schedules reach the same optimum.
#[test]
fn formulations_agree_with_enumeration() {
    let mut checked = 0;
    for seed in 0..200u64 {
        if checked == 8 {
            break;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let units = [random_unit(&mut rng), random_unit(&mut rng)];
        let cap: f64 = units.iter().map(|u| u.p_max).sum();
        let demand: Vec<f64> = (0..5).map(|_| rng.gen_range(0.1..0.7) * cap).collect();
        let fleet = FleetSpec {
            name: format!("pair{seed}"),
            classes: units.iter().map(|u| FleetClass { unit: u.clone(), count: 1 }).collect(),
            demand,
        };
        let Ok(spec) = build_uc(&fleet) else { continue };
        let brute = brute_optimum(&spec).unwrap();
        let params = MipParams { mip_gap: 1e-8, ..MipParams::default() };
        let models = [build_3bin(&fleet).unwrap(), compile_per(&spec, Mode::Integer), compile_agg(&spec, Mode::Integer)];
        for m in &models {
            let r = solve_mip(m, &params).unwrap();
            if brute.is_infinite() {
                assert_eq!(r.status, MipStatus::Infeasible, "seed {seed} {}", m.name);
            } else {
                assert_eq!(r.status, MipStatus::Optimal, "seed {seed} {}", m.name);
                assert!((r.incumbent_value - brute).abs() <= 1e-6 * brute.abs().max(1.0), "seed {seed} {}: {} vs {brute}", m.name, r.incumbent_value);
            }
        }
        checked += brute.is_finite() as u32;
    }
    assert_eq!(checked, 8, "too few feasible fleets");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    /// Counts of one make the aggregated and per-copy models the same problem.
    #[test]
    fn unit_counts_give_equal_relaxations(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let units = [random_unit(&mut rng), random_unit(&mut rng)];
        let cap: f64 = units.iter().map(|u| u.p_max).sum();
        let demand: Vec<f64> = (0..4).map(|_| rng.gen_range(0.3..0.6) * cap).collect();
        let fleet = FleetSpec { name: "p".into(), classes: units.iter().map(|u| FleetClass { unit: u.clone(), count: 1 }).collect(), demand };
        if let Ok(spec) = build_uc(&fleet) {
            let tol = aggper::solver::SolverTolerances::default();
            let a = aggper::solver::solve_relaxation(&compile_agg(&spec, Mode::Relaxed), &tol);
            let p = aggper::solver::solve_relaxation(&compile_per(&spec, Mode::Relaxed), &tol);
            prop_assert_eq!(a.status, p.status);
            if a.is_optimal() {
                prop_assert!((a.objective - p.objective).abs() <= 1e-6 * (1.0 + p.objective.abs()));
            }
        }
    }
}
