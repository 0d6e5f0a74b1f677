use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pcmbranch::bnb_engine::Limits;
use pcmbranch::branching_rules::ExpertRelpscost;
use pcmbranch::harness::{self, bound_trace_export, RaceMode, Racer, RuleSpec, DEFAULT_QUANTUM};
use pcmbranch::milp_builder::{build_milp, check_feasibility, write_mps, FlowModel, Schedule};
use pcmbranch::pcm_model::{generate_instance, ieee118_template, pjm5_base, PcmInstance};
use pcmbranch::policy;
use pcmbranch::training::{collect_expert, train_il, train_rl, IlConfig, PcmEnvironment, RlConfig, TrajectoryStore};

#[derive(Parser)]
#[command(name = "pcmbranch", version, about = "Unit-commitment MILPs solved with learned branching")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write noisy instances of a base system.
    Gen(GenArgs),
    /// Check a schedule against an instance's constraints.
    Check(CheckArgs),
    /// Solve one instance with one branching rule.
    Solve(SolveArgs),
    /// Record expert demonstrations over a directory of instances.
    Collect(CollectArgs),
    /// Train a policy by imitation.
    TrainIl(TrainIlArgs),
    /// Refine a policy with REINFORCE.
    TrainRl(TrainRlArgs),
    /// Race two policies on one instance.
    Race(RaceArgs),
    /// Run every rule on every instance of a directory.
    Bench(BenchArgs),
    /// Export an instance's MILP as a fixed-format MPS file.
    ExportMps(ExportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum System {
    Pjm5,
    Ieee118,
}

#[derive(Clone, Copy, ValueEnum)]
enum Flow {
    Transport,
    DcAngle,
}

impl From<Flow> for FlowModel {
    fn from(f: Flow) -> Self {
        match f {
            Flow::Transport => FlowModel::Transport,
            Flow::DcAngle => FlowModel::DcAngle,
        }
    }
}

#[derive(Args, Clone, Copy)]
struct LimitArgs {
    #[arg(long)]
    limit_work: Option<u64>,
    #[arg(long)]
    limit_nodes: Option<u64>,
    /// Seconds.
    #[arg(long)]
    limit_time: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    gap: f64,
}

impl LimitArgs {
    fn limits(&self) -> Limits {
        Limits {
            time: self.limit_time.map(Duration::from_secs_f64),
            work_units: self.limit_work,
            nodes: self.limit_nodes,
            gap: self.gap,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "pjm5")]
    system: System,
    #[arg(long, default_value_t = 24)]
    horizon: usize,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// mostfrac | pscost | strong | expert | policy:PATH | race:PATH_A,PATH_B
    #[arg(long, default_value = "expert")]
    rule: String,
    #[arg(long, value_enum, default_value = "transport")]
    flow: Flow,
    #[command(flatten)]
    limits: LimitArgs,
    /// Bound trace table.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Leave out wall-clock seconds so the trace is reproducible.
    #[arg(long)]
    no_wall: bool,
    /// Incumbent schedule (JSON).
    #[arg(long)]
    schedule: Option<PathBuf>,
}

#[derive(Args)]
struct CollectArgs {
    #[arg(long)]
    instances: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "transport")]
    flow: Flow,
    #[arg(long, default_value_t = 4)]
    reliability: u32,
    #[arg(long, default_value_t = 8)]
    max_probes: usize,
    #[command(flatten)]
    limits: LimitArgs,
}

#[derive(Args)]
struct TrainIlArgs {
    #[arg(long)]
    store: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 50)]
    epochs: usize,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    include_truncated: bool,
    /// Per-epoch loss table.
    #[arg(long)]
    curve: Option<PathBuf>,
}

#[derive(Args)]
struct TrainRlArgs {
    #[arg(long)]
    instances: PathBuf,
    /// Store holding the expert baselines for these instances.
    #[arg(long)]
    store: PathBuf,
    #[arg(long)]
    init: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "transport")]
    flow: Flow,
    #[arg(long, default_value_t = 2)]
    epochs: usize,
    #[arg(long, default_value_t = 4)]
    iterations: usize,
    #[arg(long, default_value_t = 8)]
    batch_size: usize,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1e-4)]
    step: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    limits: LimitArgs,
    /// Per-iteration return table.
    #[arg(long)]
    curve: Option<PathBuf>,
}

#[derive(Args)]
struct RaceArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    alpha: PathBuf,
    #[arg(long)]
    beta: PathBuf,
    #[arg(long, value_enum, default_value = "transport")]
    flow: Flow,
    /// Interleave in work-unit quanta on one thread instead of two threads.
    #[arg(long)]
    deterministic: bool,
    #[arg(long, default_value_t = DEFAULT_QUANTUM)]
    quantum: u64,
    #[command(flatten)]
    limits: LimitArgs,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    instances: PathBuf,
    /// Rule names separated by ';' (race rules contain a comma).
    #[arg(long, value_delimiter = ';', required = true)]
    rules: Vec<String>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "transport")]
    flow: Flow,
    #[command(flatten)]
    limits: LimitArgs,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "transport")]
    flow: Flow,
}

fn load_instance(path: &Path) -> Result<PcmInstance> {
    PcmInstance::load(path).with_context(|| format!("reading instance {}", path.display()))
}

fn gen(a: GenArgs) -> Result<()> {
    let base = match a.system {
        System::Pjm5 => pjm5_base(a.horizon)?,
        System::Ieee118 => ieee118_template(a.horizon)?,
    };
    std::fs::create_dir_all(&a.out)?;
    for i in 0..a.count {
        let inst = generate_instance(&base, a.noise, a.seed + i as u64)?;
        let path = a.out.join(format!("instance_{i:04}.json"));
        inst.save(&path)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn check(a: CheckArgs) -> Result<()> {
    let inst = load_instance(&a.instance)?;
    let sched = Schedule::load(&a.schedule)?;
    let rep = check_feasibility(&inst, &sched, a.tol)?;
    for (family, v) in &rep.violations {
        println!("{family},{v}");
    }
    if rep.passed() {
        println!("feasible");
        Ok(())
    } else {
        let (family, v) = rep.worst_family().unwrap_or(("unknown", f64::NAN));
        bail!("infeasible: worst family {family} violated by {v}")
    }
}

fn solve(a: SolveArgs) -> Result<()> {
    let inst = load_instance(&a.instance)?;
    let prob = build_milp(&inst, a.flow.into())?;
    let spec = RuleSpec::parse(&a.rule)?;
    let st = spec.run(&prob, a.limits.limits())?;
    println!("status,{}", st.status.as_str());
    println!("objective,{}", st.objective().map(|o| o.to_string()).unwrap_or_default());
    println!("work_units,{}", st.work_units);
    println!("n_explored,{}", st.n_explored);
    println!("gap,{}", st.gap());
    println!("wall_seconds,{:.6}", st.wall_time);
    if let Some(p) = &a.trace {
        bound_trace_export(&st, p, !a.no_wall)?;
    }
    if let (Some(p), Some(s)) = (&a.schedule, &st.incumbent) {
        s.save(p)?;
    }
    Ok(())
}

fn collect(a: CollectArgs) -> Result<()> {
    let problems = harness::load_problems(&a.instances, a.flow.into())?;
    if problems.is_empty() {
        bail!("no instances in {}", a.instances.display());
    }
    let expert = ExpertRelpscost {
        reliability: a.reliability,
        max_probes: a.max_probes,
        ..ExpertRelpscost::default()
    };
    let store = collect_expert(&problems, expert, a.limits.limits())?;
    store.save(&a.out)?;
    println!("trajectories,{}", store.trajectories.len());
    println!("pairs,{}", store.n_pairs());
    println!("digest,{}", store.digest());
    Ok(())
}

fn train_il_cmd(a: TrainIlArgs) -> Result<()> {
    let store = TrajectoryStore::load(&a.store)?;
    let cfg = IlConfig {
        epochs: a.epochs,
        batch_size: a.batch_size,
        lr: a.lr,
        seed: a.seed,
        include_truncated: a.include_truncated,
    };
    let (net, curve) = train_il(&store, &cfg)?;
    policy::save(&net, &a.out)?;
    let mut table = String::from("epoch,loss\n");
    for (e, l) in curve.iter().enumerate() {
        let _ = writeln!(table, "{},{}", e + 1, l);
    }
    match &a.curve {
        Some(p) => std::fs::write(p, &table)?,
        None => print!("{table}"),
    }
    Ok(())
}

fn train_rl_cmd(a: TrainRlArgs) -> Result<()> {
    let problems = harness::load_problems(&a.instances, a.flow.into())?;
    let store = TrajectoryStore::load(&a.store)?;
    let env = PcmEnvironment::new(&problems, &store, a.limits.limits())?;
    let init = policy::load(&a.init)?;
    let cfg = RlConfig {
        epochs: a.epochs,
        iterations: a.iterations,
        batch_size: a.batch_size,
        lambda: a.lambda,
        step: a.step,
        seed: a.seed,
        ..RlConfig::default()
    };
    let (net, curve) = train_rl(&env, &init, &cfg)?;
    policy::save(&net, &a.out)?;
    let mut table = String::from("epoch,iteration,mean_return,mean_work,truncated,steps\n");
    for c in &curve {
        let _ = writeln!(
            table,
            "{},{},{},{},{},{}",
            c.epoch, c.iteration, c.mean_return, c.mean_work, c.truncated, c.steps
        );
    }
    match &a.curve {
        Some(p) => std::fs::write(p, &table)?,
        None => print!("{table}"),
    }
    Ok(())
}

fn race_cmd(a: RaceArgs) -> Result<()> {
    let inst = load_instance(&a.instance)?;
    let prob = build_milp(&inst, a.flow.into())?;
    let alpha = Arc::new(policy::load(&a.alpha)?);
    let beta = Arc::new(policy::load(&a.beta)?);
    let mode = if a.deterministic {
        RaceMode::Deterministic { quantum: a.quantum }
    } else {
        RaceMode::Concurrent
    };
    let r = harness::race(&prob, &alpha, &beta, a.limits.limits(), mode)?;
    let winner = match r.winner {
        Some(Racer::Alpha) => "alpha",
        Some(Racer::Beta) => "beta",
        None => "none",
    };
    let (lw, lg) = r.loser_progress_at_stop();
    println!("winner,{winner}");
    println!("status,{}", r.winner_state().status.as_str());
    println!("objective,{}", r.objective().map(|o| o.to_string()).unwrap_or_default());
    println!("work_units,{}", r.work_units());
    println!("n_explored,{}", r.winner_state().n_explored);
    println!("alpha_gap,{}", r.alpha.gap());
    println!("beta_gap,{}", r.beta.gap());
    println!("other_work_units,{lw}");
    println!("other_gap,{lg}");
    Ok(())
}

fn bench_cmd(a: BenchArgs) -> Result<()> {
    let problems = harness::load_problems(&a.instances, a.flow.into())?;
    let rules = a.rules.iter().map(|r| RuleSpec::parse(r)).collect::<pcmbranch::Result<Vec<_>>>()?;
    let rep = harness::bench(&problems, &rules, a.limits.limits(), Some(&a.out))?;
    print!("{}", rep.summary_csv());
    Ok(())
}

fn export_mps(a: ExportArgs) -> Result<()> {
    let inst = load_instance(&a.instance)?;
    let prob = build_milp(&inst, a.flow.into())?;
    let name = a.instance.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "PCM".into());
    std::fs::write(&a.out, write_mps(&prob, &name))?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Gen(a) => gen(a),
        Cmd::Check(a) => check(a),
        Cmd::Solve(a) => solve(a),
        Cmd::Collect(a) => collect(a),
        Cmd::TrainIl(a) => train_il_cmd(a),
        Cmd::TrainRl(a) => train_rl_cmd(a),
        Cmd::Race(a) => race_cmd(a),
        Cmd::Bench(a) => bench_cmd(a),
        Cmd::ExportMps(a) => export_mps(a),
    }
}
