//! Experiment batches and oracle cross-checks behind the command-line tool.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aggregation::compile_agg;
use crate::bnb::{solve_mip, MipParams, MipStatus};
use crate::error::{Error, Result};
use crate::model::{ConicModel, OmegaSpec, ProblemSpec, Role, Sense};
use crate::oracle::{self, Verdict};
use crate::perspective::{compile_p0, compile_per};
use crate::sep::{gen_lc_instance, gen_sqp_instance, LcParams, SqpParams};
use crate::solver::{solve_relaxation, RelaxStatus};
use crate::uc::{build_3bin, build_uc, gen_fleet, FleetParams};
use crate::Mode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Lc,
    Sqp,
    Uc,
}

impl Family {
    pub fn token(self) -> &'static str {
        match self {
            Family::Lc => "lc",
            Family::Sqp => "sqp",
            Family::Uc => "uc",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    P0,
    Per,
    Agg,
    #[serde(rename = "3bin")]
    #[value(name = "3bin")]
    ThreeBin,
}

impl Formulation {
    pub fn token(self) -> &'static str {
        match self {
            Formulation::P0 => "p0",
            Formulation::Per => "per",
            Formulation::Agg => "agg",
            Formulation::ThreeBin => "3bin",
        }
    }
}

/// `|opt − lb| / |opt|`, or `|opt − lb|` when `opt = 0`.
pub fn relative_gap(opt: f64, lb: f64) -> f64 {
    if opt == 0.0 {
        (opt - lb).abs()
    } else {
        (opt - lb).abs() / opt.abs()
    }
}

/// A generated instance in whichever shape its family uses.
#[derive(Clone, Debug)]
pub enum Instance {
    Spec(ProblemSpec),
    Fleet { spec: ProblemSpec, three_bin: ConicModel },
}

impl Instance {
    pub fn spec(&self) -> &ProblemSpec {
        match self {
            Instance::Spec(s) => s,
            Instance::Fleet { spec, .. } => spec,
        }
    }

    pub fn compile(&self, f: Formulation, mode: Mode) -> Result<ConicModel> {
        Ok(match f {
            Formulation::P0 => compile_p0(self.spec(), mode),
            Formulation::Per => compile_per(self.spec(), mode),
            Formulation::Agg => compile_agg(self.spec(), mode),
            Formulation::ThreeBin => match self {
                Instance::Fleet { three_bin, .. } => match mode {
                    Mode::Integer => three_bin.clone(),
                    Mode::Relaxed => three_bin.relaxed(),
                },
                Instance::Spec(_) => return Err(Error::InvalidArgument("3bin applies to the uc family only".into())),
            },
        })
    }
}

/// Instance shape. `t` is the number of classes (periods for `uc`),
/// `n` the members per class (maximum units per class for `uc`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceSize {
    pub family: Family,
    #[serde(rename = "T")]
    pub t: u32,
    #[serde(rename = "N")]
    pub n: u32,
    #[serde(default)]
    pub m: Option<u32>,
    /// Unit classes for `uc`.
    #[serde(default)]
    pub classes: Option<u32>,
}

pub fn generate(size: &InstanceSize, seed: u64) -> Result<Instance> {
    match size.family {
        Family::Lc => Ok(Instance::Spec(gen_lc_instance(&LcParams { t: size.t, n: size.n, seed })?.0)),
        Family::Sqp => {
            let m = size.m.unwrap_or(4);
            Ok(Instance::Spec(gen_sqp_instance(&SqpParams { t: size.t, n: size.n, m, seed })?.0))
        }
        Family::Uc => {
            let fleet = gen_fleet(&FleetParams { classes: size.classes.unwrap_or(2), max_count: size.n, periods: size.t, seed })?;
            Ok(Instance::Fleet { spec: build_uc(&fleet)?, three_bin: build_3bin(&fleet)? })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub size: InstanceSize,
    pub seeds: Vec<u64>,
    /// Formulations whose relaxation bound is reported.
    pub formulations: Vec<Formulation>,
    /// Formulations also solved to optimality; the best incumbent among them
    /// is the reference optimum for every row of the instance.
    #[serde(default = "default_mip")]
    pub mip: Vec<Formulation>,
    #[serde(default)]
    pub params: MipParams,
}

fn default_mip() -> Vec<Formulation> {
    vec![Formulation::Agg]
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub family: String,
    pub seed: u64,
    #[serde(rename = "T")]
    pub t: u32,
    #[serde(rename = "N")]
    pub n: u32,
    pub formulation: String,
    pub status: String,
    pub lb: f64,
    pub opt: f64,
    pub gap: f64,
    pub nodes: u64,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub seed: u64,
    pub lb_p0: f64,
    pub lb_per: f64,
    pub lb_agg: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapSummary {
    pub formulation: String,
    pub mean_lb: f64,
    pub mean_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ResultRow>,
    pub audit: Vec<AuditEntry>,
    pub summary: Vec<GapSummary>,
    pub failed: bool,
}

impl ExperimentReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn mean_gap(&self, f: Formulation) -> Option<f64> {
        self.summary.iter().find(|s| s.formulation == f.token()).map(|s| s.mean_gap)
    }
}

fn relaxation_bound(model: &ConicModel, params: &MipParams) -> (f64, RelaxStatus) {
    let sol = solve_relaxation(model, &params.tol);
    match sol.status {
        RelaxStatus::Optimal | RelaxStatus::Infeasible => (sol.objective, sol.status),
        s => (f64::NAN, s),
    }
}

fn status_token(s: MipStatus) -> &'static str {
    match s {
        MipStatus::Optimal => "optimal",
        MipStatus::Feasible => "feasible",
        MipStatus::Infeasible => "infeasible",
        MipStatus::Limit => "limit",
    }
}

/// Runs every (seed, formulation) pair in config order. Solver trouble is
/// recorded in the row. The batch is marked failed when an instance breaks
/// `LB_agg = LB_per ≥ LB_p0` (see [`oracle::lb_order_verdict`]).
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.params.check()?;
    let mut rows = Vec::new();
    let mut audit = Vec::new();
    let mut failed = false;
    for &seed in &config.seeds {
        let inst = generate(&config.size, seed)?;
        let mut lbs = Vec::new();
        let mut best = f64::INFINITY;
        let first = rows.len();
        for &f in &config.formulations {
            let started = Instant::now();
            let (lb, relax_status) = relaxation_bound(&inst.compile(f, Mode::Relaxed)?, &config.params);
            let mut status = match relax_status {
                RelaxStatus::Optimal => "relaxed",
                RelaxStatus::Infeasible => "infeasible",
                RelaxStatus::Unbounded => "unbounded",
                RelaxStatus::NumericalLimit => "numerical_limit",
            };
            let mut nodes = 0;
            if config.mip.contains(&f) && relax_status == RelaxStatus::Optimal {
                let res = solve_mip(&inst.compile(f, Mode::Integer)?, &config.params)?;
                status = status_token(res.status);
                nodes = res.nodes_explored;
                if res.incumbent.is_some() {
                    best = best.min(res.incumbent_value);
                }
            }
            lbs.push((f, lb));
            rows.push(ResultRow {
                family: config.size.family.token().into(),
                seed,
                t: config.size.t,
                n: config.size.n,
                formulation: f.token().into(),
                status: status.into(),
                lb,
                opt: f64::NAN,
                gap: f64::NAN,
                nodes,
                seconds: started.elapsed().as_secs_f64(),
            });
        }
        for row in &mut rows[first..] {
            if best.is_finite() {
                row.opt = best;
                row.gap = relative_gap(best, row.lb);
            }
        }
        let lb_of = |f: Formulation| lbs.iter().find(|(g, _)| *g == f).map(|(_, v)| *v);
        if let (Some(p0), Some(per), Some(agg)) = (lb_of(Formulation::P0), lb_of(Formulation::Per), lb_of(Formulation::Agg)) {
            let verdict = oracle::lb_order_verdict(p0, per, agg);
            failed |= verdict == Verdict::Fail;
            audit.push(AuditEntry { seed, lb_p0: p0, lb_per: per, lb_agg: agg, verdict });
        }
    }
    let summary = config
        .formulations
        .iter()
        .map(|f| {
            let sel: Vec<&ResultRow> = rows.iter().filter(|r| r.formulation == f.token()).collect();
            let mean = |g: &dyn Fn(&ResultRow) -> f64| sel.iter().map(|r| g(r)).sum::<f64>() / sel.len().max(1) as f64;
            GapSummary { formulation: f.token().into(), mean_lb: mean(&|r| r.lb), mean_gap: mean(&|r| r.gap) }
        })
        .collect();
    Ok(ExperimentReport { config: config.clone(), rows, audit, summary, failed })
}

/// Oracle corpus for [`cross_check`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CrossCheckConfig {
    pub lc: Vec<LcParams>,
    pub sqp: Vec<SqpParams>,
    pub uc: Vec<FleetParams>,
    /// Random Ω drawn for the hull check, with `r` cycling through `1..=4`.
    pub random_omegas: u32,
    pub hull_directions: usize,
    pub seed: u64,
    /// Compare `solve_mip` with enumeration when the budget allows.
    pub brute: bool,
    /// Fault injection: halve the count coefficient of the first aggregated
    /// on-box upper row of this class in every hull check.
    pub corrupt_class: Option<usize>,
    pub params: MipParams,
}

impl CrossCheckConfig {
    /// A small corpus covering the three families.
    pub fn default_corpus() -> Self {
        CrossCheckConfig {
            lc: (0..3).map(|seed| LcParams { t: 3, n: 2, seed }).collect(),
            sqp: (0..3).map(|seed| SqpParams { t: 2, n: 2, m: 2, seed }).collect(),
            uc: vec![FleetParams { classes: 1, max_count: 2, periods: 2, seed: 0 }],
            random_omegas: 5,
            hull_directions: 5,
            seed: 7,
            brute: true,
            corrupt_class: None,
            params: MipParams::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub check: String,
    pub instance: String,
    pub class: Option<usize>,
    pub verdict: Verdict,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckReport {
    pub rows: Vec<CheckRow>,
}

impl CrossCheckReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| r.verdict == Verdict::Fail)
    }

    pub fn inconclusive(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| r.verdict == Verdict::Inconclusive)
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn to_table(&self) -> String {
        let mut out = String::from("check,instance,class,verdict,detail\n");
        for r in &self.rows {
            let class = r.class.map(|c| c.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{},{},{}\n", r.check, r.instance, class, r.verdict, r.detail.replace(',', ";")));
        }
        out
    }
}

/// Halves the count coefficient of the first on-box upper row `v ≤ hi·Y`
/// of the given class.
pub fn corrupt_upper_box(model: &mut ConicModel, class: u32) -> bool {
    let tag = |v: usize| model.vars[v].tag;
    let target = model.rows.iter().position(|row| {
        row.sense == Sense::Le
            && row.rhs == 0.0
            && row.coeffs.len() == 2
            && matches!(tag(row.coeffs[0].0), Some(t) if t.class == class && t.role != Role::Y)
            && row.coeffs[0].1 == 1.0
            && matches!(tag(row.coeffs[1].0), Some(t) if t.role == Role::Y)
            && row.coeffs[1].1 < 0.0
    });
    match target {
        Some(i) => {
            model.rows[i].coeffs[1].1 *= 0.5;
            true
        }
        None => false,
    }
}

fn hull_row(name: &str, class: Option<usize>, omega: &OmegaSpec, r: u32, dirs: usize, seed: u64, corrupt: bool) -> CheckRow {
    let rep = oracle::check_hull_equiv_with(omega, r, dirs, seed, |m| {
        if corrupt {
            corrupt_upper_box(m, 0);
        }
    });
    match rep {
        Ok(rep) => CheckRow {
            check: "hull".into(),
            instance: name.into(),
            class,
            verdict: rep.verdict,
            detail: format!("r={r} margin={:.3e} worst_rel_diff={:.3e}", rep.slater_margin, rep.worst_rel_diff),
        },
        Err(e) => CheckRow { check: "hull".into(), instance: name.into(), class, verdict: Verdict::Inconclusive, detail: e.to_string() },
    }
}

fn spec_checks(name: &str, inst: &Instance, cfg: &CrossCheckConfig, out: &mut Vec<CheckRow>) -> Result<()> {
    let spec = inst.spec();
    let lb = oracle::check_lb_order(spec);
    out.push(CheckRow {
        check: "lb_order".into(),
        instance: name.into(),
        class: None,
        verdict: lb.verdict,
        detail: format!("p0={:.9e} per={:.9e} agg={:.9e}", lb.lb_p0, lb.lb_per, lb.lb_agg),
    });
    for (t, class) in spec.classes.iter().enumerate() {
        let corrupt = cfg.corrupt_class == Some(t);
        out.push(hull_row(name, Some(t), &class.omega, class.multiplicity, cfg.hull_directions, cfg.seed ^ t as u64, corrupt));
    }
    if cfg.brute {
        match oracle::brute_optimum(spec) {
            Ok(brute) => {
                for f in [Formulation::Per, Formulation::Agg] {
                    let res = solve_mip(&inst.compile(f, Mode::Integer)?, &cfg.params)?;
                    let value = if res.incumbent.is_some() { res.incumbent_value } else { f64::INFINITY };
                    let agree = if brute.is_finite() { (value - brute).abs() <= 1e-6 * (1.0 + brute.abs()) } else { value == brute };
                    let verdict = match res.status {
                        MipStatus::Optimal | MipStatus::Infeasible => {
                            if agree {
                                Verdict::Pass
                            } else {
                                Verdict::Fail
                            }
                        }
                        _ => Verdict::Inconclusive,
                    };
                    out.push(CheckRow {
                        check: format!("brute_vs_mip_{}", f.token()),
                        instance: name.into(),
                        class: None,
                        verdict,
                        detail: format!("brute={brute:.9e} mip={value:.9e}"),
                    });
                }
            }
            Err(e) => out.push(CheckRow { check: "brute_vs_mip".into(), instance: name.into(), class: None, verdict: Verdict::Skipped, detail: e.to_string() }),
        }
    }
    Ok(())
}

/// Runs the lower-bound order, hull and enumeration checks on the corpus.
pub fn cross_check(cfg: &CrossCheckConfig) -> Result<CrossCheckReport> {
    cfg.params.check()?;
    let mut rows = Vec::new();
    for p in &cfg.lc {
        let inst = Instance::Spec(gen_lc_instance(p)?.0);
        spec_checks(&format!("lc_T{}_N{}_s{}", p.t, p.n, p.seed), &inst, cfg, &mut rows)?;
    }
    for p in &cfg.sqp {
        let inst = Instance::Spec(gen_sqp_instance(p)?.0);
        spec_checks(&format!("sqp_T{}_N{}_m{}_s{}", p.t, p.n, p.m, p.seed), &inst, cfg, &mut rows)?;
    }
    for p in &cfg.uc {
        let size = InstanceSize { family: Family::Uc, t: p.periods, n: p.max_count, m: None, classes: Some(p.classes) };
        let inst = generate(&size, p.seed)?;
        spec_checks(&format!("uc_n{}_s{}", p.periods, p.seed), &inst, cfg, &mut rows)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for i in 0..cfg.random_omegas {
        let omega = oracle::random_omega(&mut rng);
        let r = i % 4 + 1;
        rows.push(hull_row(&format!("omega_{i}"), None, &omega, r, cfg.hull_directions, cfg.seed + i as u64, false));
    }
    Ok(CrossCheckReport { rows })
}
