//! Classical variable-selection rules and the pseudocost statistics they share.

use serde::{Deserialize, Serialize};

use crate::bnb_engine::{BranchContext, BranchDecision, BranchingRule, RuleOutcome};
use crate::error::Result;
use crate::lp_simplex::ProbeDirection;

pub const SCORE_EPS: f64 = 1e-6;
/// Stand-in gain for a probe direction that is cut off.
const CUTOFF_GAIN: f64 = 1e30;

/// Per-column sums of per-unit bound gains and observation counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudocostStore {
    up_sum: Vec<f64>,
    up_count: Vec<u32>,
    down_sum: Vec<f64>,
    down_count: Vec<u32>,
    total: [(f64, u64); 2],
}

fn side(dir: ProbeDirection) -> usize {
    match dir {
        ProbeDirection::Down => 0,
        ProbeDirection::Up => 1,
    }
}

impl PseudocostStore {
    pub fn new(n_cols: usize) -> Self {
        Self {
            up_sum: vec![0.0; n_cols],
            up_count: vec![0; n_cols],
            down_sum: vec![0.0; n_cols],
            down_count: vec![0; n_cols],
            total: [(0.0, 0); 2],
        }
    }

    pub fn record(&mut self, col: usize, dir: ProbeDirection, per_unit_gain: f64) {
        if !per_unit_gain.is_finite() {
            return;
        }
        let g = per_unit_gain.max(0.0);
        match dir {
            ProbeDirection::Down => {
                self.down_sum[col] += g;
                self.down_count[col] += 1;
            }
            ProbeDirection::Up => {
                self.up_sum[col] += g;
                self.up_count[col] += 1;
            }
        }
        let t = &mut self.total[side(dir)];
        t.0 += g;
        t.1 += 1;
    }

    pub fn count(&self, col: usize, dir: ProbeDirection) -> u32 {
        match dir {
            ProbeDirection::Down => self.down_count[col],
            ProbeDirection::Up => self.up_count[col],
        }
    }

    /// Mean per-unit gain, if the column has been observed in that direction.
    pub fn average(&self, col: usize, dir: ProbeDirection) -> Option<f64> {
        let (s, c) = match dir {
            ProbeDirection::Down => (self.down_sum[col], self.down_count[col]),
            ProbeDirection::Up => (self.up_sum[col], self.up_count[col]),
        };
        (c > 0).then(|| s / c as f64)
    }

    /// Mean per-unit gain over every observation in that direction.
    pub fn global_average(&self, dir: ProbeDirection) -> Option<f64> {
        let (s, c) = self.total[side(dir)];
        (c > 0).then(|| s / c as f64)
    }
}

pub fn fractionality(x: f64) -> f64 {
    (x - x.floor()).min(x.ceil() - x)
}

pub fn product_score(down: f64, up: f64) -> f64 {
    down.max(SCORE_EPS) * up.max(SCORE_EPS)
}

/// Index of the largest score; the earliest wins ties.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

fn decide(candidates: &[usize], scores: Vec<f64>) -> BranchDecision {
    BranchDecision {
        chosen_column: candidates[argmax(&scores)],
        scores,
    }
}

pub fn most_fractional(candidates: &[usize], x: &[f64]) -> BranchDecision {
    let scores = candidates.iter().map(|&j| fractionality(x[j])).collect();
    decide(candidates, scores)
}

/// Product-rule pseudocost score; unobserved directions count as gain 1.
pub fn pseudocost_score(candidates: &[usize], x: &[f64], store: &PseudocostStore) -> BranchDecision {
    let scores = candidates
        .iter()
        .map(|&j| {
            let f = x[j] - x[j].floor();
            let up = store.average(j, ProbeDirection::Up).unwrap_or(1.0);
            let down = store.average(j, ProbeDirection::Down).unwrap_or(1.0);
            product_score(down * f, up * (1.0 - f))
        })
        .collect();
    decide(candidates, scores)
}

/// Probes both children of `col`; `None` when both are cut off.
fn probe_pair(ctx: &mut BranchContext<'_>, col: usize, iter_cap: usize) -> Result<Option<(f64, f64)>> {
    let down = ctx.probe(col, ProbeDirection::Down, iter_cap)?;
    let up = ctx.probe(col, ProbeDirection::Up, iter_cap)?;
    if down.cutoff && up.cutoff {
        return Ok(None);
    }
    let gain = |o: crate::lp_simplex::ProbeOutcome| if o.cutoff { CUTOFF_GAIN } else { o.delta };
    Ok(Some((gain(down), gain(up))))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MostFractional;

impl BranchingRule for MostFractional {
    fn name(&self) -> String {
        "mostfrac".into()
    }

    fn select(&mut self, ctx: &mut BranchContext<'_>) -> Result<RuleOutcome> {
        Ok(RuleOutcome::Branch(most_fractional(ctx.candidates, &ctx.lp.primal)))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Pseudocost;

impl BranchingRule for Pseudocost {
    fn name(&self) -> String {
        "pscost".into()
    }

    fn select(&mut self, ctx: &mut BranchContext<'_>) -> Result<RuleOutcome> {
        Ok(RuleOutcome::Branch(pseudocost_score(ctx.candidates, &ctx.lp.primal, ctx.store)))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StrongBranching {
    pub iter_cap: usize,
}

impl Default for StrongBranching {
    fn default() -> Self {
        Self { iter_cap: 100 }
    }
}

impl BranchingRule for StrongBranching {
    fn name(&self) -> String {
        "strong".into()
    }

    fn select(&mut self, ctx: &mut BranchContext<'_>) -> Result<RuleOutcome> {
        let candidates = ctx.candidates;
        let mut scores = Vec::with_capacity(candidates.len());
        for &j in candidates {
            match probe_pair(ctx, j, self.iter_cap)? {
                None => return Ok(RuleOutcome::Prune),
                Some((down, up)) => scores.push(product_score(down, up)),
            }
        }
        Ok(RuleOutcome::Branch(decide(candidates, scores)))
    }
}

/// Reliability pseudocost branching.
#[derive(Debug, Clone, Copy)]
pub struct ExpertRelpscost {
    /// Observations per direction before a column's pseudocosts are trusted.
    pub reliability: u32,
    pub max_probes: usize,
    pub iter_cap: usize,
}

impl Default for ExpertRelpscost {
    fn default() -> Self {
        Self {
            reliability: 4,
            max_probes: 8,
            iter_cap: 100,
        }
    }
}

impl ExpertRelpscost {
    fn unreliable(&self, store: &PseudocostStore, j: usize) -> bool {
        store.count(j, ProbeDirection::Down) < self.reliability || store.count(j, ProbeDirection::Up) < self.reliability
    }
}

impl BranchingRule for ExpertRelpscost {
    fn name(&self) -> String {
        "expert".into()
    }

    fn select(&mut self, ctx: &mut BranchContext<'_>) -> Result<RuleOutcome> {
        let candidates = ctx.candidates;
        let mut order: Vec<usize> = candidates.to_vec();
        order.sort_by(|&a, &b| {
            fractionality(ctx.lp.primal[b])
                .total_cmp(&fractionality(ctx.lp.primal[a]))
                .then(a.cmp(&b))
        });
        let mut probed = 0;
        for j in order {
            if probed >= self.max_probes {
                break;
            }
            if !self.unreliable(ctx.store, j) {
                continue;
            }
            probed += 1;
            if probe_pair(ctx, j, self.iter_cap)?.is_none() {
                return Ok(RuleOutcome::Prune);
            }
        }
        Ok(RuleOutcome::Branch(pseudocost_score(candidates, &ctx.lp.primal, ctx.store)))
    }
}
