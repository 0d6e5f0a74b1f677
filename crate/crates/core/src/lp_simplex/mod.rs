//! Bounded-variable revised primal simplex.
//!
//! Every row `i` gets a slack `s_i` so that `A x + s = b`; the slack bounds
//! encode the row sense (`<=`: `s >= 0`, `>=`: `s <= 0`, `=`: `s = 0`). The
//! basis inverse is represented by a dense LU of the structural kernel of the
//! basis (rows whose slack is nonbasic, against basic structural columns)
//! plus a product-form eta file, refactored every `refactor_interval` pivots.
//!
//! Infeasible starting points, including warm starts whose basic variables
//! were pushed out of bounds by a bound change, are repaired by a composite
//! phase 1 that minimises the sum of bound violations before phase 2 resumes
//! on the true objective.

mod lu;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::milp_builder::{MilpProblem, Sense};
use lu::DenseLu;

const NONE: usize = usize::MAX;
const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PivotRule {
    DantzigWithBlandFallback,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexConfig {
    pub feas_tol: f64,
    pub opt_tol: f64,
    /// `None` means `50 * (rows + cols)`.
    pub max_iters: Option<usize>,
    pub pivot_rule: PivotRule,
    pub refactor_interval: usize,
    /// Consecutive degenerate pivots before Bland's rule takes over.
    pub degenerate_streak: usize,
}

impl Default for SimplexConfig {
    fn default() -> Self {
        Self {
            feas_tol: 1e-7,
            opt_tol: 1e-7,
            max_iters: None,
            pivot_rule: PivotRule::DantzigWithBlandFallback,
            refactor_interval: 100,
            degenerate_streak: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
}

/// Status of every structural column followed by every row slack.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Basis {
    pub status: Vec<VarStatus>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub status: LpStatus,
    pub objective: f64,
    /// Structural values only.
    pub primal: Vec<f64>,
    pub basis: Basis,
    pub iterations: usize,
    /// Row duals `y` with `c_B = B^T y`; valid when optimal.
    pub duals: Vec<f64>,
    /// `c_j - a_j^T y` for structural columns; valid when optimal.
    pub reduced_costs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeDirection {
    Down,
    Up,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeOutcome {
    /// Increase of the LP bound; zero when `cutoff` is set.
    pub delta: f64,
    pub cutoff: bool,
    /// Iteration cap reached; `delta` is then an estimate.
    pub truncated: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
struct Eta {
    pos: usize,
    pivot: f64,
    entries: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
struct Factor {
    lu: Option<DenseLu>,
    kernel_rows: Vec<usize>,
    kernel_pos: Vec<usize>,
    /// Structural column at each kernel position when factored.
    kernel_cols: Vec<usize>,
    slack_pos: Vec<usize>,
    etas: Vec<Eta>,
}

/// Mutable simplex state: bounds, basis, values and factorization.
#[derive(Debug, Clone)]
pub struct SimplexState {
    lb: Vec<f64>,
    ub: Vec<f64>,
    status: Vec<VarStatus>,
    basic: Vec<usize>,
    x: Vec<f64>,
    factor: Factor,
}

impl SimplexState {
    pub fn basis(&self) -> Basis {
        Basis {
            status: self.status.clone(),
        }
    }

    pub fn value(&self, j: usize) -> f64 {
        self.x[j]
    }
}

/// LP data in column form, reusable across many solves of one problem.
#[derive(Debug, Clone)]
pub struct LpSolver {
    n: usize,
    m: usize,
    cost: Vec<f64>,
    cols: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    slack_lb: Vec<f64>,
    slack_ub: Vec<f64>,
    col_lb: Vec<f64>,
    col_ub: Vec<f64>,
    cfg: SimplexConfig,
}

impl LpSolver {
    pub fn new(prob: &MilpProblem, cfg: SimplexConfig) -> Self {
        let n = prob.n_vars;
        let m = prob.rows.len();
        let mut cols = vec![Vec::new(); n];
        for (i, row) in prob.rows.iter().enumerate() {
            for &(j, a) in &row.coefs {
                cols[j].push((i, a));
            }
        }
        let (slack_lb, slack_ub) = prob
            .rows
            .iter()
            .map(|r| match r.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            })
            .unzip();
        Self {
            n,
            m,
            cost: prob.objective.clone(),
            cols,
            rhs: prob.rows.iter().map(|r| r.rhs).collect(),
            slack_lb,
            slack_ub,
            col_lb: prob.var_lb.clone(),
            col_ub: prob.var_ub.clone(),
            cfg,
        }
    }

    pub fn config(&self) -> &SimplexConfig {
        &self.cfg
    }

    pub fn n_cols(&self) -> usize {
        self.n
    }

    pub fn n_rows(&self) -> usize {
        self.m
    }

    pub fn column(&self, j: usize) -> &[(usize, f64)] {
        &self.cols[j]
    }

    pub fn default_max_iters(&self) -> usize {
        self.cfg.max_iters.unwrap_or(50 * (self.n + self.m).max(1))
    }

    /// Root bounds of the structural columns.
    pub fn root_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (self.col_lb.clone(), self.col_ub.clone())
    }

    /// Solves with structural bounds `lb`/`ub`, starting from `warm` when it
    /// is structurally valid and nonsingular.
    pub fn solve(&self, lb: &[f64], ub: &[f64], warm: Option<&Basis>) -> (LpResult, SimplexState) {
        let mut state = self.initial_state(lb, ub, warm);
        let res = self.run(&mut state, self.default_max_iters());
        (res, state)
    }

    pub fn initial_state(&self, lb: &[f64], ub: &[f64], warm: Option<&Basis>) -> SimplexState {
        assert_eq!(lb.len(), self.n);
        assert_eq!(ub.len(), self.n);
        let mut full_lb = lb.to_vec();
        full_lb.extend_from_slice(&self.slack_lb);
        let mut full_ub = ub.to_vec();
        full_ub.extend_from_slice(&self.slack_ub);

        if let Some(status) = warm.and_then(|b| self.sanitize(b, &full_lb, &full_ub)) {
            if let Some(state) = self.state_from_status(status, full_lb.clone(), full_ub.clone()) {
                return state;
            }
        }
        let status = (0..self.n + self.m)
            .map(|j| {
                if j >= self.n {
                    VarStatus::Basic
                } else if full_lb[j].is_finite() {
                    VarStatus::AtLower
                } else {
                    VarStatus::AtUpper
                }
            })
            .collect();
        self.state_from_status(status, full_lb, full_ub)
            .expect("slack basis is always nonsingular")
    }

    fn sanitize(&self, basis: &Basis, lb: &[f64], ub: &[f64]) -> Option<Vec<VarStatus>> {
        if basis.status.len() != self.n + self.m {
            return None;
        }
        let n_basic = basis.status.iter().filter(|&&s| s == VarStatus::Basic).count();
        if n_basic != self.m {
            return None;
        }
        let mut status = basis.status.clone();
        for (j, s) in status.iter_mut().enumerate() {
            match *s {
                VarStatus::AtLower if !lb[j].is_finite() => {
                    if !ub[j].is_finite() {
                        return None;
                    }
                    *s = VarStatus::AtUpper;
                }
                VarStatus::AtUpper if !ub[j].is_finite() => {
                    if !lb[j].is_finite() {
                        return None;
                    }
                    *s = VarStatus::AtLower;
                }
                _ => {}
            }
        }
        Some(status)
    }

    fn state_from_status(&self, status: Vec<VarStatus>, lb: Vec<f64>, ub: Vec<f64>) -> Option<SimplexState> {
        let basic: Vec<usize> = (0..self.n + self.m).filter(|&j| status[j] == VarStatus::Basic).collect();
        let factor = self.factorize(&basic)?;
        let mut state = SimplexState {
            x: vec![0.0; self.n + self.m],
            lb,
            ub,
            status,
            basic,
            factor,
        };
        self.reset_nonbasic_values(&mut state);
        self.recompute_basic_values(&mut state);
        Some(state)
    }

    /// Changes structural bounds in place; nonbasic columns follow their bound.
    pub fn set_bounds(&self, state: &mut SimplexState, changes: &[(usize, f64, f64)]) {
        for &(j, lo, hi) in changes {
            state.lb[j] = lo;
            state.ub[j] = hi;
        }
        self.reset_nonbasic_values(state);
        self.recompute_basic_values(state);
    }

    fn reset_nonbasic_values(&self, state: &mut SimplexState) {
        for j in 0..self.n + self.m {
            match state.status[j] {
                VarStatus::AtLower => state.x[j] = state.lb[j],
                VarStatus::AtUpper => state.x[j] = state.ub[j],
                VarStatus::Basic => {}
            }
        }
    }

    fn factorize(&self, basic: &[usize]) -> Option<Factor> {
        let m = self.m;
        let mut slack_pos = vec![NONE; m];
        let mut kernel_pos = Vec::new();
        for (p, &j) in basic.iter().enumerate() {
            if j >= self.n {
                slack_pos[j - self.n] = p;
            } else {
                kernel_pos.push(p);
            }
        }
        let kernel_rows: Vec<usize> = (0..m).filter(|&r| slack_pos[r] == NONE).collect();
        let k = kernel_pos.len();
        if kernel_rows.len() != k {
            return None;
        }
        let lu = if k == 0 {
            None
        } else {
            let mut row_index = vec![NONE; m];
            for (i, &r) in kernel_rows.iter().enumerate() {
                row_index[r] = i;
            }
            let mut dense = vec![0.0; k * k];
            for (c, &p) in kernel_pos.iter().enumerate() {
                for &(r, a) in &self.cols[basic[p]] {
                    if row_index[r] != NONE {
                        dense[row_index[r] * k + c] = a;
                    }
                }
            }
            Some(DenseLu::factor(k, dense).ok()?)
        };
        let kernel_cols = kernel_pos.iter().map(|&p| basic[p]).collect();
        Some(Factor {
            lu,
            kernel_rows,
            kernel_pos,
            kernel_cols,
            slack_pos,
            etas: Vec::new(),
        })
    }

    /// `B z = v`, with `v` indexed by row and `z` by basis position.
    fn ftran(&self, state: &SimplexState, v: &[f64]) -> Vec<f64> {
        let f = &state.factor;
        let mut z = vec![0.0; self.m];
        let mut zs: Vec<f64> = f.kernel_rows.iter().map(|&r| v[r]).collect();
        if let Some(lu) = &f.lu {
            lu.solve(&mut zs);
        }
        for r in 0..self.m {
            if f.slack_pos[r] != NONE {
                z[f.slack_pos[r]] = v[r];
            }
        }
        for (c, &p) in f.kernel_pos.iter().enumerate() {
            let val = zs[c];
            z[p] = val;
            if val != 0.0 {
                for &(r, a) in &self.cols[f.kernel_cols[c]] {
                    let sp = f.slack_pos[r];
                    if sp != NONE {
                        z[sp] -= a * val;
                    }
                }
            }
        }
        for eta in &f.etas {
            let zp = z[eta.pos] / eta.pivot;
            z[eta.pos] = zp;
            if zp != 0.0 {
                for &(i, a) in &eta.entries {
                    z[i] -= a * zp;
                }
            }
        }
        z
    }

    /// `B^T y = w`, with `w` indexed by basis position and `y` by row.
    fn btran(&self, state: &SimplexState, mut w: Vec<f64>) -> Vec<f64> {
        let f = &state.factor;
        for eta in f.etas.iter().rev() {
            let s: f64 = eta.entries.iter().map(|&(i, a)| a * w[i]).sum();
            w[eta.pos] = (w[eta.pos] - s) / eta.pivot;
        }
        let mut y = vec![0.0; self.m];
        for r in 0..self.m {
            if f.slack_pos[r] != NONE {
                y[r] = w[f.slack_pos[r]];
            }
        }
        let mut rhs: Vec<f64> = f
            .kernel_pos
            .iter()
            .zip(&f.kernel_cols)
            .map(|(&p, &j)| {
                let mut s = w[p];
                for &(r, a) in &self.cols[j] {
                    if f.slack_pos[r] != NONE {
                        s -= a * y[r];
                    }
                }
                s
            })
            .collect();
        if let Some(lu) = &f.lu {
            lu.solve_transpose(&mut rhs);
        }
        for (i, &r) in f.kernel_rows.iter().enumerate() {
            y[r] = rhs[i];
        }
        y
    }

    fn column_dense(&self, j: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.m];
        if j < self.n {
            for &(r, a) in &self.cols[j] {
                v[r] = a;
            }
        } else {
            v[j - self.n] = 1.0;
        }
        v
    }

    fn recompute_basic_values(&self, state: &mut SimplexState) {
        let mut v = self.rhs.clone();
        for j in 0..self.n + self.m {
            if state.status[j] == VarStatus::Basic {
                continue;
            }
            let xj = state.x[j];
            if xj == 0.0 {
                continue;
            }
            if j < self.n {
                for &(r, a) in &self.cols[j] {
                    v[r] -= a * xj;
                }
            } else {
                v[j - self.n] -= xj;
            }
        }
        let z = self.ftran(state, &v);
        for (p, &j) in state.basic.iter().enumerate() {
            state.x[j] = z[p];
        }
    }

    fn refactor(&self, state: &mut SimplexState) -> bool {
        match self.factorize(&state.basic) {
            Some(f) => {
                state.factor = f;
                self.recompute_basic_values(state);
                true
            }
            None => false,
        }
    }

    fn reduced_cost(&self, j: usize, cost_j: f64, y: &[f64]) -> f64 {
        if j < self.n {
            cost_j - self.cols[j].iter().map(|&(r, a)| a * y[r]).sum::<f64>()
        } else {
            cost_j - y[j - self.n]
        }
    }

    fn infeasibility(&self, state: &SimplexState, j: usize) -> f64 {
        let tol = self.cfg.feas_tol;
        let x = state.x[j];
        if x < state.lb[j] - tol {
            -1.0
        } else if x > state.ub[j] + tol {
            1.0
        } else {
            0.0
        }
    }

    /// Runs phase 1 / phase 2 iterations from `state` for at most `max_iters` steps.
    pub fn run(&self, state: &mut SimplexState, max_iters: usize) -> LpResult {
        let tol = self.cfg;
        let n_all = self.n + self.m;
        let mut iterations = 0usize;
        let mut degenerate = 0usize;
        let mut bland = false;
        let mut verified = false;

        loop {
            let phase1_costs: Vec<f64> = state.basic.iter().map(|&j| self.infeasibility(state, j)).collect();
            let phase1 = phase1_costs.iter().any(|&c| c != 0.0);
            let cb: Vec<f64> = if phase1 {
                phase1_costs
            } else {
                state
                    .basic
                    .iter()
                    .map(|&j| if j < self.n { self.cost[j] } else { 0.0 })
                    .collect()
            };
            let y = self.btran(state, cb);

            // Pricing.
            let mut entering = NONE;
            let mut enter_dir = 0.0;
            let mut best = 0.0;
            for j in 0..n_all {
                let st = state.status[j];
                if st == VarStatus::Basic || state.lb[j] == state.ub[j] {
                    continue;
                }
                let cj = if phase1 || j >= self.n { 0.0 } else { self.cost[j] };
                let d = self.reduced_cost(j, cj, &y);
                let (eligible, dir) = match st {
                    VarStatus::AtLower => (d < -tol.opt_tol, 1.0),
                    VarStatus::AtUpper => (d > tol.opt_tol, -1.0),
                    VarStatus::Basic => (false, 0.0),
                };
                if !eligible {
                    continue;
                }
                if bland {
                    entering = j;
                    enter_dir = dir;
                    break;
                }
                if d.abs() > best {
                    best = d.abs();
                    entering = j;
                    enter_dir = dir;
                }
            }

            if entering == NONE {
                if !verified && !state.factor.etas.is_empty() {
                    // Confirm on a fresh factorization before concluding.
                    verified = true;
                    if self.refactor(state) {
                        continue;
                    }
                }
                let status = if phase1 { LpStatus::Infeasible } else { LpStatus::Optimal };
                return self.finish(state, status, iterations, if phase1 { None } else { Some(y) });
            }
            verified = false;

            if iterations >= max_iters {
                return self.finish(state, LpStatus::IterationLimit, iterations, None);
            }

            let alpha = self.ftran(state, &self.column_dense(entering));

            // Ratio test (two-pass Harris; plain min-ratio under Bland).
            let range = state.ub[entering] - state.lb[entering];
            let mut candidates: Vec<(usize, f64, f64, VarStatus)> = Vec::new();
            let mut harris = f64::INFINITY;
            for (p, &a) in alpha.iter().enumerate() {
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let j = state.basic[p];
                let rate = -enter_dir * a;
                let x = state.x[j];
                let (lo, hi) = (state.lb[j], state.ub[j]);
                let below = x < lo - tol.feas_tol;
                let above = x > hi + tol.feas_tol;
                let (target, leave_as) = if rate < 0.0 {
                    if above {
                        (hi, VarStatus::AtUpper)
                    } else if below {
                        continue;
                    } else {
                        (lo, VarStatus::AtLower)
                    }
                } else if below {
                    (lo, VarStatus::AtLower)
                } else if above {
                    continue;
                } else {
                    (hi, VarStatus::AtUpper)
                };
                if !target.is_finite() {
                    continue;
                }
                let ratio = (target - x) / rate;
                let relaxed = if rate < 0.0 { target - tol.feas_tol } else { target + tol.feas_tol };
                harris = harris.min((relaxed - x) / rate);
                candidates.push((p, ratio.max(0.0), a.abs(), leave_as));
            }

            let mut leave: Option<(usize, f64, VarStatus)> = None;
            if bland {
                let mut best_ratio = f64::INFINITY;
                for &(p, ratio, _, st) in &candidates {
                    let better = match leave {
                        None => true,
                        Some((bp, _, _)) => {
                            ratio < best_ratio - 1e-12
                                || (ratio <= best_ratio + 1e-12 && state.basic[p] < state.basic[bp])
                        }
                    };
                    if better {
                        best_ratio = best_ratio.min(ratio);
                        leave = Some((p, ratio, st));
                    }
                }
            } else {
                let mut best_pivot = 0.0;
                for &(p, ratio, piv, st) in &candidates {
                    if ratio <= harris && piv > best_pivot {
                        best_pivot = piv;
                        leave = Some((p, ratio, st));
                    }
                }
            }

            let theta = match leave {
                Some((_, ratio, _)) if ratio < range => ratio,
                _ if range.is_finite() => {
                    // Bound flip of the entering column.
                    for (p, &a) in alpha.iter().enumerate() {
                        let j = state.basic[p];
                        state.x[j] -= enter_dir * a * range;
                    }
                    state.x[entering] = if enter_dir > 0.0 { state.ub[entering] } else { state.lb[entering] };
                    state.status[entering] = if enter_dir > 0.0 {
                        VarStatus::AtUpper
                    } else {
                        VarStatus::AtLower
                    };
                    iterations += 1;
                    degenerate = 0;
                    bland = false;
                    continue;
                }
                _ => {
                    if phase1 {
                        // Cannot happen for a bounded phase-1 objective; treat as numerical trouble.
                        return self.finish(state, LpStatus::Infeasible, iterations, None);
                    }
                    return self.finish(state, LpStatus::Unbounded, iterations, None);
                }
            };
            let (r, _, leave_as) = leave.expect("theta implies a leaving row");

            for (p, &a) in alpha.iter().enumerate() {
                if a != 0.0 {
                    let j = state.basic[p];
                    state.x[j] -= enter_dir * a * theta;
                }
            }
            state.x[entering] += enter_dir * theta;
            let leaving = state.basic[r];
            state.x[leaving] = match leave_as {
                VarStatus::AtLower => state.lb[leaving],
                _ => state.ub[leaving],
            };
            state.status[leaving] = leave_as;
            state.status[entering] = VarStatus::Basic;
            state.basic[r] = entering;
            let entries = alpha
                .iter()
                .enumerate()
                .filter(|&(p, a)| p != r && a.abs() > 1e-14)
                .map(|(p, &a)| (p, a))
                .collect();
            state.factor.etas.push(Eta {
                pos: r,
                pivot: alpha[r],
                entries,
            });
            iterations += 1;

            if theta <= 1e-12 {
                degenerate += 1;
                if degenerate >= tol.degenerate_streak {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }

            if state.factor.etas.len() >= tol.refactor_interval && !self.refactor(state) {
                // Numerically singular basis; restart from the slack basis.
                let (lb, ub) = (state.lb[..self.n].to_vec(), state.ub[..self.n].to_vec());
                *state = self.initial_state(&lb, &ub, None);
            }
        }
    }

    fn finish(&self, state: &SimplexState, status: LpStatus, iterations: usize, y: Option<Vec<f64>>) -> LpResult {
        let primal = state.x[..self.n].to_vec();
        let objective = match status {
            LpStatus::Infeasible => f64::INFINITY,
            LpStatus::Unbounded => f64::NEG_INFINITY,
            _ => self.cost.iter().zip(&primal).map(|(c, v)| c * v).sum(),
        };
        let (duals, reduced_costs) = match y {
            Some(y) => {
                let d = (0..self.n).map(|j| self.reduced_cost(j, self.cost[j], &y)).collect();
                (y, d)
            }
            None => (Vec::new(), Vec::new()),
        };
        LpResult {
            status,
            objective,
            primal,
            basis: state.basis(),
            iterations,
            duals,
            reduced_costs,
        }
    }

    /// Tentatively fixes binary column `col` down to 0 or up to 1 and re-solves
    /// from the node's optimal `state` with at most `iter_cap` iterations.
    pub fn strong_branch_probe(
        &self,
        state: &SimplexState,
        parent_objective: f64,
        col: usize,
        dir: ProbeDirection,
        iter_cap: usize,
        int_tol: f64,
    ) -> Result<ProbeOutcome> {
        let v = state.x[col];
        if (v - v.round()).abs() <= int_tol {
            return Err(Error::NotFractional(col));
        }
        let mut probe = state.clone();
        let (lo, hi) = match dir {
            ProbeDirection::Down => (state.lb[col], v.floor()),
            ProbeDirection::Up => (v.ceil(), state.ub[col]),
        };
        self.set_bounds(&mut probe, &[(col, lo, hi)]);
        let res = self.run(&mut probe, iter_cap);
        Ok(match res.status {
            LpStatus::Infeasible => ProbeOutcome {
                delta: 0.0,
                cutoff: true,
                truncated: false,
                iterations: res.iterations,
            },
            LpStatus::Optimal => ProbeOutcome {
                delta: (res.objective - parent_objective).max(0.0),
                cutoff: false,
                truncated: false,
                iterations: res.iterations,
            },
            _ => {
                // Primal phase-2 objectives approach the optimum from above,
                // so only a feasible iterate gives a usable estimate.
                let feasible = probe
                    .basic
                    .iter()
                    .all(|&j| self.infeasibility(&probe, j) == 0.0);
                let delta = if feasible {
                    (res.objective - parent_objective).max(0.0)
                } else {
                    0.0
                };
                ProbeOutcome {
                    delta,
                    cutoff: false,
                    truncated: true,
                    iterations: res.iterations,
                }
            }
        })
    }
}

/// Solves the LP relaxation of `prob` with its own column bounds.
pub fn solve_lp(prob: &MilpProblem, warm: Option<&Basis>, cfg: SimplexConfig) -> LpResult {
    let solver = LpSolver::new(prob, cfg);
    let (lb, ub) = solver.root_bounds();
    solver.solve(&lb, &ub, warm).0
}
