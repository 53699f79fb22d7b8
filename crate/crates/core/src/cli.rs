//! `ptlplan` command line: generate, plan, window, simulate, oracle.
//!
//! Exit codes: 0 success, 1 usage or invalid input, 2 infeasible result
//! (solver or re-planner said no), 3 I/O failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::costs::{CostKind, DEFAULT_K_C};
use crate::error::{Error, Result};
use crate::failure::{
    build_timeline, compute_window, inject_failure, replan, timeline_with_offsets, FailureScenario, VehicleState,
    WindowOptions,
};
use crate::grasp::{solve, SolverConfig};
use crate::io::{self, PlanFile, TimelineRow};
use crate::model::{generate_instance, GeneratorParams, Instance};
use crate::oracle::exact_solve;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ptlplan", version, about = "Fault-tolerant power-line inspection planning")]
pub struct Cli {
    /// Base random seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON run configuration (solver and window settings)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for every output file
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic instance
    Generate(GenerateArgs),
    /// Solve an instance with GRASP
    Plan(PlanArgs),
    /// Compute the re-plan window of a plan
    Window(WindowArgs),
    /// Inject one failure and re-plan
    Simulate(SimulateArgs),
    /// Exact solution of a tiny instance
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Radius around the substation, meters
    #[arg(long)]
    pub d_max: f64,
    /// Generator parameters as JSON (fields default individually)
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub n_vehicles: Option<usize>,
    /// Per-vehicle budget, percent
    #[arg(long)]
    pub budget: Option<f64>,
    #[arg(long)]
    pub corridors: Option<usize>,
    /// Output file name inside --out-dir
    #[arg(long, default_value = "instance.json")]
    pub out: String,
}

#[derive(Debug, Args, Clone, Default)]
pub struct SolverFlags {
    /// minmax, cminsum or combined
    #[arg(long)]
    pub cost: Option<CostKind>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub rcl_alpha: Option<f64>,
    #[arg(long)]
    pub k_c: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[command(flatten)]
    pub solver: SolverFlags,
    /// Independent solver runs with consecutive seeds; the cheapest is kept
    #[arg(long)]
    pub repeat: Option<usize>,
    /// Override the instance budget, percent
    #[arg(long)]
    pub budget: Option<f64>,
    /// Write the per-restart cost trace to trace.csv
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub plan: PathBuf,
    /// Failure grid step, seconds (default 1 % of t_max)
    #[arg(long)]
    pub dt: Option<f64>,
    #[command(flatten)]
    pub solver: SolverFlags,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub plan: PathBuf,
    #[arg(long)]
    pub fail_vehicle: usize,
    /// Seconds (`120`, `120s`) or percent of the maximal route time (`50%`)
    #[arg(long)]
    pub fail_time: String,
    #[command(flatten)]
    pub solver: SolverFlags,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub cost: Option<CostKind>,
    #[arg(long)]
    pub k_c: Option<f64>,
}

/// Contents of the `--config` file. Command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub restarts: Option<usize>,
    pub rcl_alpha: Option<f64>,
    pub seed: Option<u64>,
    pub cost_function: Option<CostKind>,
    pub k_c: Option<f64>,
    pub max_local_search_passes: Option<usize>,
    pub repeat: Option<usize>,
    pub dt: Option<f64>,
}

/// Everything needed to reproduce a run's outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub solver: SolverConfig,
    pub instance_hash: String,
    pub seeds: Vec<u64>,
    pub options: serde_json::Value,
    pub timings: Vec<(String, f64)>,
}

impl RunManifest {
    fn new(command: &str, solver: &SolverConfig, instance_hash: String) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            solver: solver.clone(),
            instance_hash,
            seeds: Vec::new(),
            options: serde_json::Value::Null,
            timings: Vec::new(),
        }
    }
}

struct Context {
    seed: Option<u64>,
    config: RunConfig,
    out_dir: PathBuf,
}

impl Context {
    fn solver(&self, flags: &SolverFlags, default_cost: CostKind, default_k_c: f64) -> SolverConfig {
        let d = SolverConfig::default();
        SolverConfig {
            restarts: flags.restarts.or(self.config.restarts).unwrap_or(d.restarts),
            rcl_alpha: flags.rcl_alpha.or(self.config.rcl_alpha).unwrap_or(d.rcl_alpha),
            seed: self.seed.or(self.config.seed).unwrap_or(d.seed),
            max_local_search_passes: self.config.max_local_search_passes.unwrap_or(d.max_local_search_passes),
            cost_function: flags.cost.or(self.config.cost_function).unwrap_or(default_cost),
            k_c: flags.k_c.or(self.config.k_c).unwrap_or(default_k_c),
        }
    }

    fn out(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(cli: Cli) -> Result<i32> {
    let config = match &cli.config {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        None => RunConfig::default(),
    };
    std::fs::create_dir_all(&cli.out_dir)?;
    let ctx = Context { seed: cli.seed, config, out_dir: cli.out_dir };
    match cli.command {
        Command::Generate(a) => cmd_generate(&ctx, &a),
        Command::Plan(a) => cmd_plan(&ctx, &a),
        Command::Window(a) => cmd_window(&ctx, &a),
        Command::Simulate(a) => cmd_simulate(&ctx, &a),
        Command::Oracle(a) => cmd_oracle(&ctx, &a),
    }
}

fn cmd_generate(ctx: &Context, a: &GenerateArgs) -> Result<i32> {
    let mut params: GeneratorParams = match &a.params {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        None => GeneratorParams::default(),
    };
    if let Some(n) = a.n_vehicles {
        params.n_vehicles = n;
    }
    if let Some(b) = a.budget {
        params.budget_percent = b;
    }
    if let Some(c) = a.corridors {
        params.corridors = c;
    }
    let seed = ctx.seed.or(ctx.config.seed).unwrap_or(0);
    let inst = generate_instance(seed, a.d_max, &params)?;
    let path = ctx.out(&a.out);
    io::write_instance(&path, &inst)?;
    println!("n_seg={}", inst.n_seg());
    println!("instance={}", path.display());
    Ok(EXIT_OK)
}

fn cmd_plan(ctx: &Context, a: &PlanArgs) -> Result<i32> {
    let mut inst = io::read_instance(&a.instance)?;
    if let Some(b) = a.budget {
        inst.budget_percent = b;
        inst.validate()?;
        io::write_instance(&ctx.out("instance.json"), &inst)?;
    }
    let base = ctx.solver(&a.solver, CostKind::Combined, DEFAULT_K_C);
    let repeat = a.repeat.or(ctx.config.repeat).unwrap_or(1).max(1);
    let hash = io::instance_hash(&inst);
    let mut manifest = RunManifest::new("plan", &base, hash.clone());
    manifest.options = serde_json::json!({ "repeat": repeat, "budget_percent": inst.budget_percent });

    let started = Instant::now();
    let mut best: Option<(crate::grasp::SolveResult, u64)> = None;
    let mut trace = Vec::new();
    for r in 0..repeat {
        let seed = base.seed.wrapping_add(r as u64);
        manifest.seeds.push(seed);
        let res = solve(&inst, &SolverConfig { seed, ..base.clone() })?;
        for (i, c) in res.per_restart_costs.iter().enumerate() {
            trace.push(TraceRow { repeat: r, seed, restart: i, cost: *c });
        }
        if best.as_ref().is_none_or(|(b, _)| res.best_cost < b.best_cost) {
            best = Some((res, seed));
        }
    }
    let (res, seed) = best.expect("repeat >= 1");
    manifest.timings.push(("solve".into(), started.elapsed().as_secs_f64()));

    let problem = inst.problem();
    let file = PlanFile::new(&problem, hash, &res.best_plan, base.cost_function, base.k_c, res.best_cost)?;
    io::write_json(&ctx.out("plan.json"), &file)?;
    io::write_json(&ctx.out("manifest.json"), &manifest)?;
    if a.trace {
        io::write_csv(&ctx.out("trace.csv"), &trace)?;
    }

    println!("{:>7} {:>6} {:>11} {:>11} {:>8}", "vehicle", "visits", "battery_%", "duration_s", "feasible");
    for t in &file.tours {
        println!(
            "{:>7} {:>6} {:>11.3} {:>11.1} {:>8}",
            t.vehicle_id,
            t.visits.len(),
            t.battery_cost,
            t.duration,
            t.battery_cost <= inst.budget_percent
        );
    }
    println!("cost({})={:.6}", base.cost_function, res.best_cost);
    println!("feasible={} seed={} wall_time_s={:.3}", file.feasible, seed, started.elapsed().as_secs_f64());
    Ok(if file.feasible { EXIT_OK } else { EXIT_INFEASIBLE })
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceRow {
    repeat: usize,
    seed: u64,
    restart: usize,
    cost: f64,
}

fn load_pair(instance: &Path, plan: &Path) -> Result<(Instance, PlanFile)> {
    let inst = io::read_instance(instance)?;
    let plan = io::read_plan(plan)?;
    let hash = io::instance_hash(&inst);
    if plan.instance_hash != hash {
        return Err(Error::Validation(format!(
            "plan was made for instance {} but {} hashes to {hash}",
            plan.instance_hash,
            instance.display()
        )));
    }
    Ok((inst, plan))
}

fn cmd_window(ctx: &Context, a: &WindowArgs) -> Result<i32> {
    let (inst, file) = load_pair(&a.instance, &a.plan)?;
    let cfg = ctx.solver(&a.solver, file.cost_function, file.k_c);
    let options = WindowOptions { dt: a.dt.or(ctx.config.dt), ..WindowOptions::default() };
    let problem = inst.problem();
    let plan = file.plan();
    let started = Instant::now();
    let report = compute_window(&problem, &plan, &cfg, &options)?;
    let timeline = build_timeline(&problem, &plan)?;

    let mut manifest = RunManifest::new("window", &cfg, file.instance_hash.clone());
    manifest.seeds.push(cfg.seed);
    manifest.options = serde_json::to_value(&options)?;
    manifest.timings.push(("window".into(), started.elapsed().as_secs_f64()));
    io::write_json(&ctx.out("window.json"), &report)?;
    io::write_samples_csv(&ctx.out("window_samples.csv"), &report)?;
    io::write_timeline_csv(&ctx.out("timeline.csv"), &timeline)?;
    io::write_json(&ctx.out("window_manifest.json"), &manifest)?;

    println!("window_percent={:.2}", report.window_percent);
    println!("t_star={:.3}", report.t_star);
    println!("t_max={:.3}", report.t_max);
    Ok(EXIT_OK)
}

/// `50%` of t_max, or plain / `s`-suffixed seconds.
pub fn parse_fail_time(s: &str, t_max: f64) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Validation(format!("bad failure time '{s}'"));
    let t = if let Some(p) = s.strip_suffix('%') {
        let pct: f64 = p.trim().parse().map_err(|_| bad())?;
        if !(0.0..=100.0).contains(&pct) {
            return Err(Error::Validation(format!("failure time {pct} % outside [0, 100] %")));
        }
        pct / 100.0 * t_max
    } else {
        s.strip_suffix('s').unwrap_or(s).trim().parse().map_err(|_| bad())?
    };
    if !(0.0..=t_max).contains(&t) {
        return Err(Error::Validation(format!("failure time {t} s outside [0, {t_max}] s")));
    }
    Ok(t)
}

#[derive(Debug, Serialize, Deserialize)]
struct SimulationSummary {
    scenario: FailureScenario,
    success: bool,
    t_max: f64,
    outstanding: Vec<u32>,
    inspected: Vec<u32>,
    commit_times: Vec<(usize, f64)>,
    replan_cost: f64,
    violations: Vec<crate::model::Violation>,
}

fn cmd_simulate(ctx: &Context, a: &SimulateArgs) -> Result<i32> {
    let (inst, file) = load_pair(&a.instance, &a.plan)?;
    let cfg = ctx.solver(&a.solver, file.cost_function, file.k_c);
    let problem = inst.problem();
    let plan = file.plan();
    let timeline = build_timeline(&problem, &plan)?;
    let t_fail = parse_fail_time(&a.fail_time, timeline.t_max)?;
    let scenario = FailureScenario { failed_vehicle: a.fail_vehicle, t_fail };
    let residual = inject_failure(&problem, &plan, &timeline, scenario)
        .map_err(|e| Error::Validation(e.to_string()))?;
    let out = replan(&residual, &cfg)?;

    // solid curves: the original plan up to each vehicle's commit point
    let mut pre: Vec<TimelineRow> = Vec::new();
    for vt in &timeline.vehicles {
        let cut = match residual.problem.vehicles.iter().position(|v| v.vehicle_id == vt.vehicle_id) {
            Some(i) => residual.commit_times[i],
            None => t_fail,
        };
        for e in vt.events.iter().filter(|e| e.t <= cut) {
            pre.push(TimelineRow { t: e.t, vehicle: vt.vehicle_id, battery_percent: e.battery, x: e.position.x, y: e.position.y, z: e.position.z });
        }
        let (p, b) = match vt.state_at(cut) {
            VehicleState::Transit { position, battery }
            | VehicleState::Idle { position, battery }
            | VehicleState::Inspecting { position, battery, .. } => (position, battery),
        };
        if pre.last().is_none_or(|r| r.vehicle != vt.vehicle_id || r.t < cut) {
            pre.push(TimelineRow { t: cut, vehicle: vt.vehicle_id, battery_percent: b, x: p.x, y: p.y, z: p.z });
        }
    }
    // dashed curves: the re-plan, starting at each survivor's commit point
    let offsets: Vec<(f64, f64)> = out
        .plan
        .tours
        .iter()
        .map(|t| {
            let i = residual.problem.vehicles.iter().position(|v| v.vehicle_id == t.vehicle_id).expect("survivor");
            (residual.commit_times[i], residual.consumed[i])
        })
        .collect();
    let post = timeline_with_offsets(&residual.problem, &out.plan, &offsets)?;

    let replan_file =
        PlanFile::new(&residual.problem, file.instance_hash.clone(), &out.plan, cfg.cost_function, cfg.k_c, out.cost)?;
    io::write_json(&ctx.out("replan.json"), &replan_file)?;
    io::write_csv(&ctx.out("timeline_pre.csv"), &pre)?;
    io::write_timeline_csv(&ctx.out("timeline_post.csv"), &post)?;
    let summary = SimulationSummary {
        scenario,
        success: out.success,
        t_max: timeline.t_max,
        outstanding: residual.problem.segments.iter().map(|s| s.id).collect(),
        inspected: residual.inspected.clone(),
        commit_times: residual.problem.vehicles.iter().map(|v| v.vehicle_id).zip(residual.commit_times.iter().copied()).collect(),
        replan_cost: out.cost,
        violations: out.violations.clone(),
    };
    io::write_json(&ctx.out("simulate.json"), &summary)?;

    println!("t_fail={:.3} ({:.1} % of t_max)", t_fail, 100.0 * t_fail / timeline.t_max.max(f64::MIN_POSITIVE));
    println!("outstanding={}", summary.outstanding.len());
    println!("success={}", out.success);
    Ok(if out.success { EXIT_OK } else { EXIT_INFEASIBLE })
}

fn cmd_oracle(ctx: &Context, a: &OracleArgs) -> Result<i32> {
    let inst = io::read_instance(&a.instance)?;
    let kind = a.cost.or(ctx.config.cost_function).unwrap_or(CostKind::Combined);
    let k_c = a.k_c.or(ctx.config.k_c).unwrap_or(DEFAULT_K_C);
    let problem = inst.problem();
    let r = exact_solve(&problem, kind, k_c)?;
    let file = PlanFile::new(&problem, io::instance_hash(&inst), &r.optimal_plan, kind, k_c, r.optimal_cost)?;
    io::write_json(&ctx.out("oracle.json"), &file)?;
    println!("cost({kind})={:.6}", r.optimal_cost);
    println!("enumerated={}", r.enumerated_count);
    println!("feasible={}", file.feasible);
    Ok(if file.feasible { EXIT_OK } else { EXIT_INFEASIBLE })
}
