use aggper::aggregation::compile_agg;
use aggper::bnb::{solve_mip, MipParams, MipStatus};
use aggper::model::{interval_max, interval_min};
use aggper::perspective::{compile_p0, compile_per};
use aggper::sep::{
    build_line_cover, build_sp, gen_lc_instance, gen_sqp_instance, sp_objective_all_on, LcClass, LcParams,
    SepClassParams, SqpParams,
};
use aggper::solver::{solve_relaxation, RelaxStatus, SolverTolerances};
use aggper::{Mode, Sense};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid_extremes(q: f64, b: f64, lo: f64, hi: f64) -> (f64, f64) {
    let n = 100_000;
    let (mut mn, mut mx) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let v = q * x * x + b * x;
        mn = mn.min(v);
        mx = mx.max(v);
    }
    (mn, mx)
}

#[test]
fn interval_extremes_match_dense_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let q = rng.gen_range(0.0..5.0);
        let b = rng.gen_range(-5.0..5.0);
        let lo = rng.gen_range(-2.0..2.0);
        let hi = lo + rng.gen_range(0.0..2.0);
        let (mn, arg_mn) = interval_min(q, b, lo, hi);
        let (mx, arg_mx) = interval_max(q, b, lo, hi);
        let (gmn, gmx) = grid_extremes(q, b, lo, hi);
        // exact values can only beat the grid, and by at most its resolution
        let h = (hi - lo) / 100_000.0;
        let slack = (2.0 * q * 2.0 + b.abs()) * h;
        assert!(mn <= gmn + 1e-9 && mn >= gmn - slack - 1e-9, "min {mn} vs grid {gmn}");
        assert!(mx >= gmx - 1e-9 && mx <= gmx + slack + 1e-9, "max {mx} vs grid {gmx}");
        assert!((q * arg_mn * arg_mn + b * arg_mn - mn).abs() <= 1e-9 * (1.0 + mn.abs()));
        assert!((q * arg_mx * arg_mx + b * arg_mx - mx).abs() <= 1e-9 * (1.0 + mx.abs()));
        assert!((lo..=hi).contains(&arg_mn) && (lo..=hi).contains(&arg_mx));
    }
}

fn class(a: f64, b: f64, row_quad: Vec<f64>, row_lin: Vec<f64>) -> SepClassParams {
    SepClassParams { a, b, c: 1.0, lower: -1.0, upper: 1.0, row_quad, row_lin, multiplicity: 1 }
}

#[test]
fn epigraph_boxes_of_square() {
    let spec = build_sp("sq", &[class(1.0, 0.0, vec![0.0], vec![1.0])], &[0.0], &[Sense::Le]).unwrap();
    let on = &spec.classes[0].omega.blocks[0].on;
    assert_eq!(on.lower, vec![-1.0, 0.0]);
    assert_eq!(on.upper, vec![1.0, 1.0]);
}

#[test]
fn epigraph_boxes_of_curved_row() {
    let spec = build_sp("row", &[class(1.0, 0.0, vec![2.0], vec![5.0])], &[1.0], &[Sense::Le]).unwrap();
    let on = &spec.classes[0].omega.blocks[0].on;
    // (x, w, z)
    assert_eq!(on.lower.len(), 3);
    assert!((on.lower[1] + 3.0).abs() < 1e-12, "{}", on.lower[1]);
    assert!((on.upper[1] - 7.0).abs() < 1e-12);
    assert_eq!((on.lower[2], on.upper[2]), (0.0, 1.0));
}

#[test]
fn curved_rows_must_be_le() {
    let r = build_sp("bad", &[class(1.0, 0.0, vec![1.0], vec![0.0])], &[0.0], &[Sense::Eq]);
    assert!(r.is_err());
    let r = build_sp("neg", &[class(-1.0, 0.0, vec![0.0], vec![1.0])], &[0.0], &[Sense::Le]);
    assert!(r.is_err());
}

fn sensor(multiplicity: u32) -> LcClass {
    LcClass { a: 1.0, c: 1.0, u: 1.0, multiplicity }
}

fn mip(model: &aggper::ConicModel) -> aggper::bnb::SolveResult {
    solve_mip(model, &MipParams::default()).unwrap()
}

#[test]
fn line_cover_two_sensors() {
    let spec = build_line_cover("lc2", &[sensor(2)], 1.0).unwrap();
    for model in [
        compile_p0(&spec, Mode::Integer),
        compile_per(&spec, Mode::Integer),
        compile_agg(&spec, Mode::Integer),
    ] {
        let r = mip(&model);
        assert_eq!(r.status, MipStatus::Optimal);
        assert!((r.incumbent_value - 2.0).abs() < 1e-6, "{}", r.incumbent_value);
    }
}

#[test]
fn line_cover_single_sensor() {
    let spec = build_line_cover("lc1", &[sensor(1)], 1.0).unwrap();
    let r = mip(&compile_agg(&spec, Mode::Integer));
    assert!((r.incumbent_value - 2.0).abs() < 1e-6);
}

#[test]
fn line_cover_demand_beyond_capacity_is_infeasible() {
    let spec = build_line_cover("lc_over", &[sensor(2)], 2.5).unwrap();
    for model in [compile_p0(&spec, Mode::Integer), compile_agg(&spec, Mode::Integer)] {
        assert_eq!(mip(&model).status, MipStatus::Infeasible);
    }
}

#[test]
fn line_cover_rejects_bad_sensors() {
    assert!(build_line_cover("x", &[LcClass { a: 0.0, ..sensor(1) }], 1.0).is_err());
    assert!(build_line_cover("x", &[LcClass { u: 0.0, ..sensor(1) }], 1.0).is_err());
}

#[test]
fn lc_generator_ranges() {
    for seed in 0..10 {
        let p = LcParams { t: 40, n: 5, seed };
        let (spec, meta) = gen_lc_instance(&p).unwrap();
        let n = 200.0;
        let c_max = meta.c_max.unwrap();
        assert!([10.0 * n, 20.0 * n, 30.0 * n].contains(&c_max));
        assert_eq!(spec.classes.len(), 40);
        for class in &spec.classes {
            assert_eq!(class.multiplicity, 5);
            let f = &class.omega.blocks[0].on.rows.last().unwrap().func;
            assert!(f.quad[0] >= n && f.quad[0] <= c_max);
            let c = class.y_obj[0];
            assert!(c >= 1.0 && c <= n && c.fract() == 0.0);
        }
    }
}

#[test]
fn generators_are_deterministic() {
    let lc = |seed| serde_json::to_vec(&gen_lc_instance(&LcParams { t: 30, n: 7, seed }).unwrap()).unwrap();
    assert_eq!(lc(3), lc(3));
    assert_ne!(lc(3), lc(4));
    let sqp = |seed| serde_json::to_vec(&gen_sqp_instance(&SqpParams { t: 10, n: 5, m: 4, seed }).unwrap()).unwrap();
    assert_eq!(sqp(9), sqp(9));
    assert_ne!(sqp(9), sqp(10));
}

#[test]
fn extra_rows_leave_other_draws_alone() {
    let (a, _) = gen_sqp_instance(&SqpParams { t: 6, n: 3, m: 2, seed: 5 }).unwrap();
    let (b, _) = gen_sqp_instance(&SqpParams { t: 6, n: 3, m: 5, seed: 5 }).unwrap();
    for (ca, cb) in a.classes.iter().zip(&b.classes) {
        assert_eq!(ca.y_obj, cb.y_obj);
        let fa = &ca.omega.blocks[0].on.rows.last().unwrap().func;
        let fb = &cb.omega.blocks[0].on.rows.last().unwrap().func;
        assert_eq!((fa.quad[0], fa.lin[0]), (fb.quad[0], fb.lin[0]));
    }
}

#[test]
fn sqp_hidden_point_bounds_the_optimum() {
    for seed in 0..4 {
        let (spec, meta) = gen_sqp_instance(&SqpParams { t: 3, n: 2, m: 2, seed }).unwrap();
        let witness = sp_objective_all_on(&spec, meta.x_hat.as_ref().unwrap());
        let r = mip(&compile_agg(&spec, Mode::Integer));
        assert_eq!(r.status, MipStatus::Optimal);
        assert!(r.incumbent_value <= witness + 1e-6, "{} > {}", r.incumbent_value, witness);
    }
}

#[test]
fn aggregation_tightens_sqp_relaxation() {
    let tol = SolverTolerances::default();
    let mut tighter = 0;
    for seed in 0..20 {
        let (spec, _) = gen_sqp_instance(&SqpParams { t: 10, n: 5, m: 4, seed }).unwrap();
        let p0 = solve_relaxation(&compile_p0(&spec, Mode::Relaxed), &tol);
        let agg = solve_relaxation(&compile_agg(&spec, Mode::Relaxed), &tol);
        assert_eq!(p0.status, RelaxStatus::Optimal);
        assert_eq!(agg.status, RelaxStatus::Optimal);
        if agg.objective > p0.objective + 1e-6 * (1.0 + p0.objective.abs()) {
            tighter += 1;
        }
    }
    assert!(tighter >= 19, "agg strictly tighter on {tighter}/20");
}
