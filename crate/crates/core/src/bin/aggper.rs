use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use aggper::bnb::{solve_mip, MipParams};
use aggper::harness::{self, CrossCheckConfig, ExperimentConfig, Family, Formulation, Instance, InstanceSize};
use aggper::model::text::{emit_model, ModelFormat};
use aggper::solver::solve_relaxation;
use aggper::uc::{build_3bin, build_uc, gen_fleet, FleetParams, FleetSpec};
use aggper::{Mode, ProblemSpec, Result};

#[derive(Parser)]
#[command(name = "aggper", version, about = "Compile, solve and audit aggregated perspective formulations")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct SizeArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long = "T", default_value_t = 10)]
    t: u32,
    #[arg(long = "N", default_value_t = 5)]
    n: u32,
    #[arg(long)]
    m: Option<u32>,
    /// Unit classes (uc only).
    #[arg(long)]
    classes: Option<u32>,
}

impl SizeArgs {
    fn size(&self) -> InstanceSize {
        InstanceSize { family: self.family, t: self.t, n: self.n, m: self.m, classes: self.classes }
    }
}

#[derive(Args, Clone)]
struct MipArgs {
    #[arg(long)]
    mip_gap: Option<f64>,
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Solves run serially; values above 1 are accepted and ignored.
    #[arg(long, default_value_t = 1)]
    threads: u32,
}

impl MipArgs {
    fn apply(&self, mut p: MipParams) -> MipParams {
        if let Some(g) = self.mip_gap {
            p.mip_gap = g;
        }
        if let Some(t) = self.time_limit {
            p.time_limit_seconds = t;
        }
        if self.threads > 1 {
            eprintln!("note: --threads {} ignored, solves are serial", self.threads);
        }
        p
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate an instance (problem JSON, or fleet JSON for uc).
    Gen {
        #[command(flatten)]
        size: SizeArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compile an instance file to a conic model.
    Compile {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "agg")]
        formulation: Formulation,
        #[arg(long)]
        relaxed: bool,
        /// `conic-text` or `json`.
        #[arg(long, default_value = "conic-text")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve an instance file and print the result as JSON.
    Solve {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "agg")]
        formulation: Formulation,
        /// Solve the continuous relaxation only.
        #[arg(long)]
        relaxed: bool,
        #[command(flatten)]
        mip: MipArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a batch from a JSON config (or from flags) and write `<out>.csv` and `<out>.json`.
    Experiment {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        size: Option<SizeArgs>,
        #[arg(long, value_delimiter = ',')]
        seed: Vec<u64>,
        #[arg(long, value_enum, value_delimiter = ',')]
        formulation: Vec<Formulation>,
        #[command(flatten)]
        mip: MipArgs,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Run oracle checks; exits with status 1 on any failure.
    Crosscheck {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Corrupt one aggregated row of this class (fault injection).
        #[arg(long)]
        corrupt_class: Option<usize>,
        #[command(flatten)]
        mip: MipArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_out(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => Ok(fs::write(p, bytes)?),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn load_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path)?;
    if let Ok(fleet) = serde_json::from_str::<FleetSpec>(&text) {
        fleet.check()?;
        return Ok(Instance::Fleet { spec: build_uc(&fleet)?, three_bin: build_3bin(&fleet)? });
    }
    Ok(Instance::Spec(ProblemSpec::from_json(&text)?))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Gen { size, seed, out } => {
            let json = match size.family {
                Family::Uc => {
                    let p = FleetParams { classes: size.classes.unwrap_or(2), max_count: size.n, periods: size.t, seed };
                    gen_fleet(&p)?.to_json()?
                }
                _ => harness::generate(&size.size(), seed)?.spec().to_json()?,
            };
            write_out(out.as_deref(), json.as_bytes())?;
        }
        Cmd::Compile { input, formulation, relaxed, format, out } => {
            let mode = if relaxed { Mode::Relaxed } else { Mode::Integer };
            let model = load_instance(&input)?.compile(formulation, mode)?;
            write_out(out.as_deref(), &emit_model(&model, format.parse::<ModelFormat>()?)?)?;
        }
        Cmd::Solve { input, formulation, relaxed, mip, out } => {
            let inst = load_instance(&input)?;
            let params = mip.apply(MipParams::default());
            let json = if relaxed {
                let sol = solve_relaxation(&inst.compile(formulation, Mode::Relaxed)?, &params.tol);
                serde_json::json!({
                    "status": format!("{:?}", sol.status),
                    "bound": sol.objective,
                    "objective": sol.primal_objective,
                    "iterations": sol.iterations,
                })
            } else {
                serde_json::to_value(solve_mip(&inst.compile(formulation, Mode::Integer)?, &params)?)?
            };
            write_out(out.as_deref(), serde_json::to_string_pretty(&json)?.as_bytes())?;
        }
        Cmd::Experiment { config, size, seed, formulation, mip, out } => {
            let mut cfg = match (config, size) {
                (Some(path), _) => ExperimentConfig::from_json(&fs::read_to_string(path)?)?,
                (None, Some(size)) => ExperimentConfig {
                    size: size.size(),
                    seeds: if seed.is_empty() { vec![0] } else { seed },
                    formulations: if formulation.is_empty() { vec![Formulation::P0, Formulation::Per, Formulation::Agg] } else { formulation },
                    mip: vec![Formulation::Agg],
                    params: MipParams::default(),
                },
                (None, None) => return Err(aggper::Error::InvalidArgument("experiment needs --config or --family".into())),
            };
            cfg.params = mip.apply(cfg.params);
            let report = harness::run_experiment(&cfg)?;
            fs::write(out.with_extension("csv"), report.to_csv()?)?;
            fs::write(out.with_extension("json"), report.to_json()?)?;
            for s in &report.summary {
                println!("{:>5}  mean_lb={:.6e}  mean_gap={:.6e}", s.formulation, s.mean_lb, s.mean_gap);
            }
            if report.failed {
                eprintln!("lower-bound audit FAILED");
                return Ok(false);
            }
        }
        Cmd::Crosscheck { config, corrupt_class, mip, out } => {
            let mut cfg = match config {
                Some(path) => CrossCheckConfig::from_json(&fs::read_to_string(path)?)?,
                None => CrossCheckConfig::default_corpus(),
            };
            if corrupt_class.is_some() {
                cfg.corrupt_class = corrupt_class;
            }
            cfg.params = mip.apply(cfg.params);
            let report = harness::cross_check(&cfg)?;
            write_out(out.as_deref(), report.to_table().as_bytes())?;
            let inconclusive: Vec<_> = report.inconclusive().collect();
            if !inconclusive.is_empty() {
                eprintln!("inconclusive:");
                for r in inconclusive {
                    eprintln!("  {} {} {}", r.check, r.instance, r.detail);
                }
            }
            for r in report.failures() {
                eprintln!("FAIL {} {} class={:?} {}", r.check, r.instance, r.class, r.detail);
            }
            return Ok(report.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
