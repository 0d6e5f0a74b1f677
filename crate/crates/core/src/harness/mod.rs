//! Racing two policies on one problem, benchmark campaigns across rules and
//! bound-trace export.

mod bench;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU8, Ordering};
use std::sync::Arc;

use crate::bnb_engine::{solve, BnbSolver, BranchingRule, Limits, SolveState, SolveStatus};
use crate::branching_rules::{ExpertRelpscost, MostFractional, Pseudocost, StrongBranching};
use crate::error::{Error, Result};
use crate::milp_builder::{build_milp, FlowModel, MilpProblem};
use crate::pcm_model::PcmInstance;
use crate::policy::{self, PolicyNetwork, PolicyRule};

pub use bench::{bench, variance, BenchReport, BenchRow, RuleSummary};

pub const DEFAULT_QUANTUM: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Racer {
    Alpha,
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RaceMode {
    /// Single thread, lockstep in work-unit quanta.
    Deterministic { quantum: u64 },
    /// One thread per racer with a shared stop flag.
    Concurrent,
}

impl Default for RaceMode {
    fn default() -> Self {
        RaceMode::Deterministic {
            quantum: DEFAULT_QUANTUM,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RaceResult {
    /// `None` when neither racer terminated before its limits.
    pub winner: Option<Racer>,
    pub alpha: SolveState,
    pub beta: SolveState,
}

impl RaceResult {
    /// The winner's state, or the racer with the smaller gap when nobody won.
    pub fn winner_state(&self) -> &SolveState {
        match self.winner {
            Some(Racer::Alpha) => &self.alpha,
            Some(Racer::Beta) => &self.beta,
            None if self.beta.gap() < self.alpha.gap() => &self.beta,
            None => &self.alpha,
        }
    }

    pub fn loser_state(&self) -> &SolveState {
        if std::ptr::eq(self.winner_state(), &self.alpha) {
            &self.beta
        } else {
            &self.alpha
        }
    }

    /// (work_units, gap) of the other racer when the race stopped.
    pub fn loser_progress_at_stop(&self) -> (u64, f64) {
        let s = self.loser_state();
        (s.work_units, s.gap())
    }

    pub fn objective(&self) -> Option<f64> {
        self.winner_state().objective()
    }

    /// Reported cost of the race.
    pub fn work_units(&self) -> u64 {
        self.winner_state().work_units
    }
}

/// A solve that ended by proof rather than by a limit.
fn decided(s: &SolveState) -> bool {
    matches!(s.status, SolveStatus::Optimal | SolveStatus::Infeasible)
}

/// Races two branching rules on one problem.
pub fn race_rules(
    prob: &MilpProblem,
    alpha: &mut dyn BranchingRule,
    beta: &mut dyn BranchingRule,
    limits: Limits,
    mode: RaceMode,
) -> Result<RaceResult> {
    match mode {
        RaceMode::Deterministic { quantum } => race_lockstep(prob, alpha, beta, limits, quantum),
        RaceMode::Concurrent => race_threads(prob, alpha, beta, limits),
    }
}

/// Races two greedy policies.
pub fn race(
    prob: &MilpProblem,
    net_alpha: &Arc<PolicyNetwork>,
    net_beta: &Arc<PolicyNetwork>,
    limits: Limits,
    mode: RaceMode,
) -> Result<RaceResult> {
    let mut a = PolicyRule::greedy(Arc::clone(net_alpha));
    let mut b = PolicyRule::greedy(Arc::clone(net_beta));
    race_rules(prob, &mut a, &mut b, limits, mode)
}

fn race_lockstep(
    prob: &MilpProblem,
    alpha: &mut dyn BranchingRule,
    beta: &mut dyn BranchingRule,
    limits: Limits,
    quantum: u64,
) -> Result<RaceResult> {
    if quantum == 0 {
        return Err(Error::InvalidConfig("race quantum must be >= 1".into()));
    }
    let mut a = BnbSolver::new(prob, alpha, limits)?;
    let mut b = BnbSolver::new(prob, beta, limits)?;
    let mut horizon = 0u64;
    loop {
        horizon += quantum;
        let a_done = a.run_until(horizon)?;
        let b_done = b.run_until(horizon)?;
        let (sa, sb) = (a.state(), b.state());
        let winner = match (decided(sa), decided(sb)) {
            (true, true) if sb.work_units < sa.work_units => Some(Racer::Beta),
            (true, _) => Some(Racer::Alpha),
            (false, true) => Some(Racer::Beta),
            (false, false) => None,
        };
        if winner.is_some() || (a_done && b_done) {
            return Ok(RaceResult {
                winner,
                alpha: a.into_state(),
                beta: b.into_state(),
            });
        }
    }
}

const NOBODY: u8 = 0;
const ALPHA_WON: u8 = 1;
const BETA_WON: u8 = 2;

fn race_threads(
    prob: &MilpProblem,
    alpha: &mut dyn BranchingRule,
    beta: &mut dyn BranchingRule,
    limits: Limits,
) -> Result<RaceResult> {
    let flag = AtomicU8::new(NOBODY);
    let run = |rule: &mut dyn BranchingRule, me: u8| -> Result<SolveState> {
        let mut s = BnbSolver::new(prob, rule, limits)?;
        while flag.load(Ordering::Acquire) == NOBODY {
            if s.step()? {
                if decided(s.state()) {
                    let _ = flag.compare_exchange(NOBODY, me, Ordering::AcqRel, Ordering::Acquire);
                }
                break;
            }
        }
        Ok(s.into_state())
    };
    let (ra, rb) = std::thread::scope(|scope| {
        let ha = scope.spawn(|| run(alpha, ALPHA_WON));
        let rb = run(beta, BETA_WON);
        (ha.join().expect("racer thread panicked"), rb)
    });
    let winner = match flag.load(Ordering::Acquire) {
        ALPHA_WON => Some(Racer::Alpha),
        BETA_WON => Some(Racer::Beta),
        _ => None,
    };
    Ok(RaceResult {
        winner,
        alpha: ra?,
        beta: rb?,
    })
}

/// A branching rule as named on the command line.
#[derive(Clone)]
pub enum RuleSpec {
    MostFrac,
    Pscost,
    Strong,
    Expert,
    Policy {
        label: String,
        net: Arc<PolicyNetwork>,
    },
    Race {
        label: String,
        alpha: Arc<PolicyNetwork>,
        beta: Arc<PolicyNetwork>,
    },
}

impl std::fmt::Debug for RuleSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

impl RuleSpec {
    /// Parses `mostfrac`, `pscost`, `strong`, `expert`, `policy:PATH` or
    /// `race:PATH_A,PATH_B`, loading any weight files.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        Ok(match s {
            "mostfrac" => RuleSpec::MostFrac,
            "pscost" => RuleSpec::Pscost,
            "strong" => RuleSpec::Strong,
            "expert" | "relpscost" => RuleSpec::Expert,
            _ => {
                if let Some(path) = s.strip_prefix("policy:") {
                    RuleSpec::Policy {
                        label: s.to_string(),
                        net: Arc::new(policy::load(path)?),
                    }
                } else if let Some(pair) = s.strip_prefix("race:") {
                    let (a, b) = pair
                        .split_once(',')
                        .ok_or_else(|| Error::Parse(format!("race rule needs two weight files: {s}")))?;
                    RuleSpec::Race {
                        label: s.to_string(),
                        alpha: Arc::new(policy::load(a)?),
                        beta: Arc::new(policy::load(b)?),
                    }
                } else {
                    return Err(Error::Parse(format!("unknown rule {s:?}")));
                }
            }
        })
    }

    pub fn label(&self) -> String {
        match self {
            RuleSpec::MostFrac => "mostfrac".into(),
            RuleSpec::Pscost => "pscost".into(),
            RuleSpec::Strong => "strong".into(),
            RuleSpec::Expert => "expert".into(),
            RuleSpec::Policy { label, .. } | RuleSpec::Race { label, .. } => label.clone(),
        }
    }

    /// The rule object, or `None` for a race.
    pub fn build(&self) -> Option<Box<dyn BranchingRule>> {
        Some(match self {
            RuleSpec::MostFrac => Box::new(MostFractional),
            RuleSpec::Pscost => Box::new(Pseudocost),
            RuleSpec::Strong => Box::new(StrongBranching::default()),
            RuleSpec::Expert => Box::new(ExpertRelpscost::default()),
            RuleSpec::Policy { net, .. } => Box::new(PolicyRule::greedy(Arc::clone(net))),
            RuleSpec::Race { .. } => return None,
        })
    }

    /// Solves `prob`; a race reports the winner's state (deterministic mode).
    pub fn run(&self, prob: &MilpProblem, limits: Limits) -> Result<SolveState> {
        match self {
            RuleSpec::Race { alpha, beta, .. } => {
                Ok(race(prob, alpha, beta, limits, RaceMode::default())?.winner_state().clone())
            }
            _ => {
                let mut rule = self.build().expect("non-race rule");
                solve(prob, rule.as_mut(), limits)
            }
        }
    }
}

/// Comma-separated bound trace. `inf` marks an unbounded side. With
/// `include_wall` false the table is byte-reproducible.
pub fn bound_trace_csv(state: &SolveState, include_wall: bool) -> String {
    let mut out = String::new();
    if include_wall {
        out.push_str("work_units,wall_seconds,z_primal,z_dual,n_open,n_explored\n");
    } else {
        out.push_str("work_units,z_primal,z_dual,n_open,n_explored\n");
    }
    for r in &state.trace {
        let _ = write!(out, "{}", r.work_units);
        if include_wall {
            let _ = write!(out, ",{:.6}", r.wall_seconds);
        }
        let _ = writeln!(out, ",{},{},{},{}", r.z_primal, r.z_dual, r.n_open, r.n_explored);
    }
    out
}

pub fn bound_trace_export(state: &SolveState, path: impl AsRef<Path>, include_wall: bool) -> Result<()> {
    std::fs::write(path, bound_trace_csv(state, include_wall))?;
    Ok(())
}

/// Instance files (`*.json`) in a directory, sorted by file name.
pub fn instance_files(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

/// Loads and builds every instance of a directory; ids are file stems.
pub fn load_problems(dir: impl AsRef<Path>, flow: FlowModel) -> Result<Vec<(String, MilpProblem)>> {
    instance_files(dir)?
        .into_iter()
        .map(|p| {
            let id = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let inst = PcmInstance::load(&p)?;
            Ok((id, build_milp(&inst, flow)?))
        })
        .collect()
}
