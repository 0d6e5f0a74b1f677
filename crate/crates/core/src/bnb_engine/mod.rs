//! Best-first branch-and-bound over binary columns.
//!
//! Nodes are evaluated lazily: a child enters the open pool keyed by its
//! parent's LP bound and its own relaxation is solved, warm-started from the
//! parent's optimal basis, when it is popped. The pool always yields the
//! lowest bound, ties going to the older node.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::branching_rules::PseudocostStore;
use crate::error::{Error, Result};
use crate::lp_simplex::{
    Basis, LpResult, LpSolver, LpStatus, ProbeDirection, ProbeOutcome, SimplexConfig, SimplexState,
};
use crate::milp_builder::{MilpProblem, Schedule};

pub const INT_TOL: f64 = 1e-6;
/// Work charged per processed node on top of its simplex iterations.
pub const NODE_WORK: u64 = 10;
/// Normalizer for node-count features when no work limit is set.
pub const DEFAULT_WORK_SCALE: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub time: Option<Duration>,
    pub work_units: Option<u64>,
    pub nodes: Option<u64>,
    /// Relative optimality gap, scaled by `max(1, |z_primal|)`.
    pub gap: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            time: None,
            work_units: None,
            nodes: None,
            gap: 1e-6,
        }
    }
}

impl Limits {
    pub fn with_work(work_units: u64) -> Self {
        Self {
            work_units: Some(work_units),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolveStatus {
    Running,
    Optimal,
    Infeasible,
    LimitReached,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Running => "running",
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::LimitReached => "limit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundChange {
    pub column: usize,
    pub lb: f64,
    pub ub: f64,
}

/// How a node was created from its parent, used to update pseudocosts once
/// the node's own relaxation is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchOrigin {
    pub column: usize,
    pub direction: ProbeDirection,
    /// Distance the column's value had to move: `x` down, `1 - x` up.
    pub distance: f64,
    pub parent_objective: f64,
}

#[derive(Debug, Clone)]
pub struct BnbNode {
    pub id: u64,
    pub parent_id: Option<u64>,
    pub depth: usize,
    pub local_dual_bound: f64,
    /// Every bound change on the root-to-node path, oldest first.
    pub bound_changes: Vec<BoundChange>,
    pub warm_basis: Option<Arc<Basis>>,
    pub origin: Option<BranchOrigin>,
}

struct Open(BnbNode);

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Open {}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Open {
    // Reversed so that `BinaryHeap` pops the lowest bound, then the lowest id.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .local_dual_bound
            .total_cmp(&self.0.local_dual_bound)
            .then_with(|| other.0.id.cmp(&self.0.id))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub work_units: u64,
    pub wall_seconds: f64,
    pub z_primal: f64,
    pub z_dual: f64,
    pub n_open: usize,
    pub n_explored: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveState {
    pub status: SolveStatus,
    pub z_primal: f64,
    pub z_dual: f64,
    pub incumbent: Option<Schedule>,
    pub n_explored: u64,
    pub work_units: u64,
    /// Simplex iterations of node relaxations and incumbent polishing.
    pub lp_iterations: u64,
    pub probe_iterations: u64,
    pub incumbents_found: u64,
    pub max_depth_seen: usize,
    pub wall_time: f64,
    /// Nodes abandoned because their LP could not be solved reliably.
    pub numerics_dropped: u64,
    pub trace: Vec<TraceRow>,
}

impl SolveState {
    fn new() -> Self {
        Self {
            status: SolveStatus::Running,
            z_primal: f64::INFINITY,
            z_dual: f64::NEG_INFINITY,
            incumbent: None,
            n_explored: 0,
            work_units: 0,
            lp_iterations: 0,
            probe_iterations: 0,
            incumbents_found: 0,
            max_depth_seen: 0,
            wall_time: 0.0,
            numerics_dropped: 0,
            trace: vec![TraceRow {
                work_units: 0,
                wall_seconds: 0.0,
                z_primal: f64::INFINITY,
                z_dual: f64::NEG_INFINITY,
                n_open: 0,
                n_explored: 0,
            }],
        }
    }

    pub fn gap(&self) -> f64 {
        if self.z_primal.is_finite() && self.z_dual.is_finite() {
            self.z_primal - self.z_dual
        } else {
            f64::INFINITY
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn objective(&self) -> Option<f64> {
        self.incumbent.as_ref().map(|s| s.objective_value)
    }
}

/// Current work counter of a solve.
pub fn work_units_now(state: &SolveState) -> u64 {
    state.work_units
}

pub fn gap_tolerance(rel: f64, z_primal: f64) -> f64 {
    rel * z_primal.abs().max(1.0)
}

/// Per-problem data shared by rules and featurization.
#[derive(Debug, Clone)]
pub struct ProblemInfo {
    pub binaries: Vec<usize>,
    /// Time index of each column over the horizon, in `[0, 1)`.
    pub time_position: Vec<f64>,
    pub objective_scale: f64,
    /// For each binary column, the sorted binary columns sharing a row with it.
    pub adjacency: Vec<Vec<usize>>,
}

impl ProblemInfo {
    pub fn new(prob: &MilpProblem) -> Self {
        let binaries: Vec<usize> = (0..prob.n_vars).filter(|&j| prob.is_binary[j]).collect();
        let horizon = prob.col_meta.iter().map(|m| m.t + 1).max().unwrap_or(1).max(1);
        let time_position = (0..prob.n_vars)
            .map(|j| prob.col_meta.get(j).map_or(0.0, |m| m.t as f64 / horizon as f64))
            .collect();
        let objective_scale = prob.objective.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        let mut adjacency = vec![Vec::new(); prob.n_vars];
        for row in &prob.rows {
            let bin: Vec<usize> = row.coefs.iter().map(|&(j, _)| j).filter(|&j| prob.is_binary[j]).collect();
            for &a in &bin {
                adjacency[a].extend(bin.iter().copied().filter(|&b| b != a));
            }
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
            adj.dedup();
        }
        Self {
            binaries,
            time_position,
            objective_scale,
            adjacency,
        }
    }

    pub fn n_binaries(&self) -> usize {
        self.binaries.len()
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        a == b || self.adjacency[a].binary_search(&b).is_ok()
    }
}

/// Tree-wide statistics visible to rules when a node branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeStats {
    pub z_primal: f64,
    pub z_dual: f64,
    pub max_depth_seen: usize,
    pub n_explored: u64,
    pub incumbents_found: u64,
    pub work_scale: u64,
    pub gap_rel: f64,
}

/// Depth at which each column was last branched on anywhere in the tree.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchHistory {
    pub last_depth: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchDecision {
    pub chosen_column: usize,
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RuleOutcome {
    Branch(BranchDecision),
    /// Both children of some candidate were shown to be cut off.
    Prune,
}

/// Everything a rule may inspect at a branching node.
pub struct BranchContext<'a> {
    pub prob: &'a MilpProblem,
    pub info: &'a ProblemInfo,
    pub node: &'a BnbNode,
    pub lp: &'a LpResult,
    pub candidates: &'a [usize],
    pub store: &'a mut PseudocostStore,
    pub history: &'a BranchHistory,
    pub tree: TreeStats,
    solver: &'a LpSolver,
    lp_state: &'a SimplexState,
    probe_iterations: u64,
}

impl<'a> BranchContext<'a> {
    /// LP value of column `j` at this node.
    pub fn value(&self, j: usize) -> f64 {
        self.lp.primal[j]
    }

    pub fn probe_iterations(&self) -> u64 {
        self.probe_iterations
    }

    /// Strong-branching probe charged to the solve's work counter. Children
    /// whose bound reaches the incumbent count as cut off; completed,
    /// feasible probes are recorded as pseudocost observations.
    pub fn probe(&mut self, col: usize, dir: ProbeDirection, iter_cap: usize) -> Result<ProbeOutcome> {
        let mut out = self
            .solver
            .strong_branch_probe(self.lp_state, self.lp.objective, col, dir, iter_cap, INT_TOL)?;
        self.probe_iterations += out.iterations as u64;
        if !out.cutoff && !out.truncated {
            let x = self.lp.primal[col];
            let dist = match dir {
                ProbeDirection::Down => x - x.floor(),
                ProbeDirection::Up => x.ceil() - x,
            };
            self.store.record(col, dir, out.delta / dist);
            let child = self.lp.objective + out.delta;
            if child >= self.tree.z_primal - gap_tolerance(self.tree.gap_rel, self.tree.z_primal) {
                out.cutoff = true;
            }
        }
        Ok(out)
    }
}

pub trait BranchingRule: Send {
    fn name(&self) -> String;
    fn select(&mut self, ctx: &mut BranchContext<'_>) -> Result<RuleOutcome>;
}

/// Binary columns fractional in `x` and not fixed by the local bounds,
/// in column order.
pub fn candidate_set(prob: &MilpProblem, lb: &[f64], ub: &[f64], x: &[f64], int_tol: f64) -> Vec<usize> {
    (0..prob.n_vars)
        .filter(|&j| prob.is_binary[j] && lb[j] < ub[j] && (x[j] - x[j].round()).abs() > int_tol)
        .collect()
}

/// Resumable branch-and-bound solve; see [`solve`] for the one-shot form.
pub struct BnbSolver<'a> {
    prob: &'a MilpProblem,
    info: ProblemInfo,
    lp: LpSolver,
    rule: &'a mut dyn BranchingRule,
    limits: Limits,
    store: PseudocostStore,
    history: BranchHistory,
    heap: BinaryHeap<Open>,
    state: SolveState,
    root_lb: Vec<f64>,
    root_ub: Vec<f64>,
    next_id: u64,
    start: Instant,
}

impl<'a> BnbSolver<'a> {
    pub fn new(prob: &'a MilpProblem, rule: &'a mut dyn BranchingRule, limits: Limits) -> Result<Self> {
        prob.validate()?;
        if !(limits.gap >= 0.0) {
            return Err(Error::InvalidConfig(format!("gap tolerance {} must be >= 0", limits.gap)));
        }
        let lp = LpSolver::new(prob, SimplexConfig::default());
        let (root_lb, root_ub) = lp.root_bounds();
        let mut heap = BinaryHeap::new();
        heap.push(Open(BnbNode {
            id: 0,
            parent_id: None,
            depth: 0,
            local_dual_bound: f64::NEG_INFINITY,
            bound_changes: Vec::new(),
            warm_basis: None,
            origin: None,
        }));
        Ok(Self {
            prob,
            info: ProblemInfo::new(prob),
            lp,
            rule,
            limits,
            store: PseudocostStore::new(prob.n_vars),
            history: BranchHistory {
                last_depth: vec![None; prob.n_vars],
            },
            heap,
            state: SolveState::new(),
            root_lb,
            root_ub,
            next_id: 1,
            start: Instant::now(),
        })
    }

    pub fn state(&self) -> &SolveState {
        &self.state
    }

    pub fn into_state(self) -> SolveState {
        self.state
    }

    pub fn store(&self) -> &PseudocostStore {
        &self.store
    }

    pub fn is_finished(&self) -> bool {
        self.state.status != SolveStatus::Running
    }

    pub fn n_open(&self) -> usize {
        self.heap.len()
    }

    fn gap_tol(&self) -> f64 {
        gap_tolerance(self.limits.gap, self.state.z_primal)
    }

    fn open_bound(&self) -> f64 {
        let b = self.heap.peek().map_or(self.state.z_primal, |n| n.0.local_dual_bound);
        b.min(self.state.z_primal)
    }

    fn limit_hit(&self) -> bool {
        let s = &self.state;
        self.limits.work_units.is_some_and(|w| s.work_units >= w)
            || self.limits.nodes.is_some_and(|n| s.n_explored >= n)
            || self.limits.time.is_some_and(|t| self.start.elapsed() >= t)
    }

    fn finish(&mut self, status: SolveStatus) {
        self.state.status = status;
        self.state.wall_time = self.start.elapsed().as_secs_f64();
        match status {
            SolveStatus::Optimal => {
                self.heap.clear();
                self.state.z_dual = self.state.z_primal;
            }
            SolveStatus::Infeasible => {
                self.state.z_dual = f64::INFINITY;
            }
            _ => {
                self.state.z_dual = self.state.z_dual.max(self.open_bound().min(self.state.z_primal));
            }
        }
    }

    fn push_trace(&mut self) {
        let z_dual = if self.heap.is_empty() && self.state.z_primal.is_infinite() {
            self.state.z_dual
        } else {
            self.open_bound()
        };
        self.state.z_dual = self.state.z_dual.max(z_dual);
        self.state.wall_time = self.start.elapsed().as_secs_f64();
        self.state.trace.push(TraceRow {
            work_units: self.state.work_units,
            wall_seconds: self.state.wall_time,
            z_primal: self.state.z_primal,
            z_dual: self.state.z_dual,
            n_open: self.heap.len(),
            n_explored: self.state.n_explored,
        });
    }

    /// Processes one node. Returns `true` once the solve has terminated.
    pub fn step(&mut self) -> Result<bool> {
        if self.is_finished() {
            return Ok(true);
        }
        if self.limit_hit() {
            self.finish(SolveStatus::LimitReached);
            return Ok(true);
        }
        let Some(Open(node)) = self.heap.pop() else {
            let status = if self.state.incumbent.is_some() {
                SolveStatus::Optimal
            } else {
                SolveStatus::Infeasible
            };
            self.finish(status);
            return Ok(true);
        };
        if node.local_dual_bound >= self.state.z_primal - self.gap_tol() {
            // Every remaining node is at least as bad.
            self.finish(SolveStatus::Optimal);
            return Ok(true);
        }
        self.process(node)?;
        self.push_trace();
        Ok(false)
    }

    /// Steps until the work counter reaches `work` or the solve terminates.
    pub fn run_until(&mut self, work: u64) -> Result<bool> {
        while self.state.work_units < work {
            if self.step()? {
                return Ok(true);
            }
        }
        Ok(self.is_finished())
    }

    pub fn run(&mut self) -> Result<()> {
        while !self.step()? {}
        Ok(())
    }

    fn local_bounds(&self, node: &BnbNode) -> (Vec<f64>, Vec<f64>) {
        let (mut lb, mut ub) = (self.root_lb.clone(), self.root_ub.clone());
        for c in &node.bound_changes {
            lb[c.column] = c.lb;
            ub[c.column] = c.ub;
        }
        (lb, ub)
    }

    fn process(&mut self, node: BnbNode) -> Result<()> {
        let (lb, ub) = self.local_bounds(&node);
        let (mut lp, mut lp_state) = self.lp.solve(&lb, &ub, node.warm_basis.as_deref());
        self.state.n_explored += 1;
        self.state.lp_iterations += lp.iterations as u64;
        self.state.work_units += lp.iterations as u64 + NODE_WORK;
        self.state.max_depth_seen = self.state.max_depth_seen.max(node.depth);

        if matches!(lp.status, LpStatus::IterationLimit | LpStatus::Unbounded) && node.warm_basis.is_some() {
            let (cold, cold_state) = self.lp.solve(&lb, &ub, None);
            self.state.lp_iterations += cold.iterations as u64;
            self.state.work_units += cold.iterations as u64;
            lp = cold;
            lp_state = cold_state;
        }
        match lp.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Ok(()),
            LpStatus::IterationLimit | LpStatus::Unbounded => {
                self.state.numerics_dropped += 1;
                return Ok(());
            }
        }

        if let Some(o) = node.origin {
            let gain = (lp.objective - o.parent_objective).max(0.0);
            self.store.record(o.column, o.direction, gain / o.distance);
        }
        let bound = lp.objective.max(node.local_dual_bound);
        if bound >= self.state.z_primal - self.gap_tol() {
            return Ok(());
        }

        let candidates = candidate_set(self.prob, &lb, &ub, &lp.primal, INT_TOL);
        if candidates.is_empty() {
            self.accept_integral(&lb, &ub, &lp);
            return Ok(());
        }

        let node_view = BnbNode {
            local_dual_bound: bound,
            ..node
        };
        let tree = TreeStats {
            z_primal: self.state.z_primal,
            z_dual: self.open_bound().min(bound),
            max_depth_seen: self.state.max_depth_seen,
            n_explored: self.state.n_explored,
            incumbents_found: self.state.incumbents_found,
            work_scale: self.limits.work_units.unwrap_or(DEFAULT_WORK_SCALE).max(1),
            gap_rel: self.limits.gap,
        };
        let mut ctx = BranchContext {
            prob: self.prob,
            info: &self.info,
            node: &node_view,
            lp: &lp,
            candidates: &candidates,
            store: &mut self.store,
            history: &self.history,
            tree,
            solver: &self.lp,
            lp_state: &lp_state,
            probe_iterations: 0,
        };
        let outcome = self.rule.select(&mut ctx);
        let probe_iters = ctx.probe_iterations;
        self.state.probe_iterations += probe_iters;
        self.state.work_units += probe_iters;
        let decision = match outcome? {
            RuleOutcome::Prune => return Ok(()),
            RuleOutcome::Branch(d) => d,
        };
        let col = decision.chosen_column;
        if candidates.binary_search(&col).is_err() {
            return Err(Error::InvalidConfig(format!(
                "rule {} chose column {col}, which is not a branching candidate",
                self.rule.name()
            )));
        }
        self.history.last_depth[col] = Some(node_view.depth);

        let x = lp.primal[col];
        let basis = Arc::new(lp.basis.clone());
        for (dir, lo, hi, dist) in [
            (ProbeDirection::Down, lb[col], x.floor(), x - x.floor()),
            (ProbeDirection::Up, x.ceil(), ub[col], x.ceil() - x),
        ] {
            let mut changes = node_view.bound_changes.clone();
            changes.push(BoundChange { column: col, lb: lo, ub: hi });
            self.heap.push(Open(BnbNode {
                id: self.next_id,
                parent_id: Some(node_view.id),
                depth: node_view.depth + 1,
                local_dual_bound: bound,
                bound_changes: changes,
                warm_basis: Some(Arc::clone(&basis)),
                origin: Some(BranchOrigin {
                    column: col,
                    direction: dir,
                    distance: dist,
                    parent_objective: lp.objective,
                }),
            }));
            self.next_id += 1;
        }
        Ok(())
    }

    /// Re-solves with binaries fixed to their rounded values and records the
    /// result as incumbent if it improves on the current one.
    fn accept_integral(&mut self, lb: &[f64], ub: &[f64], lp: &LpResult) {
        let (mut flb, mut fub) = (lb.to_vec(), ub.to_vec());
        for &j in &self.info.binaries {
            let v = lp.primal[j].round();
            flb[j] = v;
            fub[j] = v;
        }
        let (polished, _) = self.lp.solve(&flb, &fub, Some(&lp.basis));
        self.state.lp_iterations += polished.iterations as u64;
        self.state.work_units += polished.iterations as u64;
        let mut values = if polished.status == LpStatus::Optimal {
            polished.primal
        } else {
            lp.primal.clone()
        };
        for &j in &self.info.binaries {
            values[j] = values[j].round();
        }
        let objective = self.prob.objective_value(&values);
        if objective < self.state.z_primal {
            self.state.z_primal = objective;
            self.state.incumbents_found += 1;
            self.state.incumbent = Some(Schedule {
                values,
                objective_value: objective,
            });
        }
    }
}

/// Solves `prob` to optimality or until a limit is hit. Limits never raise
/// errors; the returned state carries the best incumbent and gap.
pub fn solve(prob: &MilpProblem, rule: &mut dyn BranchingRule, limits: Limits) -> Result<SolveState> {
    let mut solver = BnbSolver::new(prob, rule, limits)?;
    solver.run()?;
    Ok(solver.into_state())
}
