//! Imitation of the expert rule and policy-gradient fine-tuning.

mod store;

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bnb_engine::{solve, BranchContext, BranchingRule, Limits, RuleOutcome, SolveStatus};
use crate::branching_rules::ExpertRelpscost;
use crate::error::{Error, Result};
use crate::milp_builder::MilpProblem;
use crate::policy::{featurize, n_params, CandidateFeatures, PolicyNetwork, PolicyRule, Step, Trajectory};

pub use store::TrajectoryStore;

/// Wraps a rule and records the features seen before each of its decisions.
pub struct Recorder<R> {
    pub inner: R,
    pub steps: Vec<Step>,
}

impl<R> Recorder<R> {
    pub fn new(inner: R) -> Self {
        Self {
            inner,
            steps: Vec::new(),
        }
    }
}

impl<R: BranchingRule> BranchingRule for Recorder<R> {
    fn name(&self) -> String {
        self.inner.name()
    }

    fn select(&mut self, ctx: &mut BranchContext<'_>) -> Result<RuleOutcome> {
        let features = featurize(ctx);
        let out = self.inner.select(ctx)?;
        if let RuleOutcome::Branch(d) = &out {
            let action = ctx
                .candidates
                .iter()
                .position(|&c| c == d.chosen_column)
                .ok_or(Error::ActionOutOfRange {
                    index: d.chosen_column,
                    len: ctx.candidates.len(),
                })?;
            self.steps.push(Step { features, action });
        }
        Ok(out)
    }
}

/// Solves every problem with the expert and records its decisions; each
/// problem's final work count becomes its baseline.
pub fn collect_expert(problems: &[(String, MilpProblem)], expert: ExpertRelpscost, limits: Limits) -> Result<TrajectoryStore> {
    let trajectories = problems
        .par_iter()
        .map(|(id, prob)| {
            let mut rec = Recorder::new(expert);
            let st = solve(prob, &mut rec, limits)?;
            Ok(Trajectory {
                problem_id: id.clone(),
                steps: rec.steps,
                work_units: st.work_units,
                baseline: st.work_units as f64,
                optimal: st.status == SolveStatus::Optimal,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrajectoryStore { trajectories })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IlConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    /// Seeds both the initial weights and the per-epoch shuffles.
    pub seed: u64,
    /// Also learn from trajectories that stopped at a limit.
    pub include_truncated: bool,
}

impl Default for IlConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            batch_size: 32,
            lr: 1e-3,
            seed: 0,
            include_truncated: false,
        }
    }
}

impl IlConfig {
    fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || !(self.lr > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "epochs {} and batch size {} must be >= 1, lr {} must be > 0",
                self.epochs, self.batch_size, self.lr
            )));
        }
        Ok(())
    }
}

/// Mean negative log-likelihood of `samples` and its gradient.
pub fn il_loss_and_grad(net: &PolicyNetwork, samples: &[(&CandidateFeatures, usize)]) -> Result<(f64, Vec<f64>)> {
    let mut grad = vec![0.0; n_params()];
    let scale = -1.0 / samples.len() as f64;
    let mut loss = 0.0;
    for &(f, a) in samples {
        loss -= net.accumulate_grad_log_prob(f, a, scale, &mut grad)?;
    }
    Ok((loss / samples.len() as f64, grad))
}

/// Fits a network to the expert's choices by minibatch SGD on the mean
/// negative log-likelihood. Returns the network and the mean training loss
/// of each epoch.
pub fn train_il(store: &TrajectoryStore, cfg: &IlConfig) -> Result<(PolicyNetwork, Vec<f64>)> {
    cfg.validate()?;
    let samples = store.pairs(cfg.include_truncated);
    if samples.is_empty() {
        return Err(Error::EmptyStore);
    }
    let mut net = PolicyNetwork::init(cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut curve = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<_> = chunk.iter().map(|&i| samples[i]).collect();
            let (loss, grad) = il_loss_and_grad(&net, &batch)?;
            total += loss * batch.len() as f64;
            for (p, g) in net.params.iter_mut().zip(&grad) {
                *p -= cfg.lr * g;
            }
        }
        curve.push(total / samples.len() as f64);
    }
    net.tag = format!("il:{}", store.digest());
    Ok((net, curve))
}

/// Top-1 agreement of greedy selection with the recorded actions.
pub fn imitation_accuracy(net: &PolicyNetwork, samples: &[(&CandidateFeatures, usize)]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let hits = samples
        .iter()
        .filter(|(f, a)| crate::branching_rules::argmax(&crate::policy::forward(net, f)) == *a)
        .count();
    hits as f64 / samples.len() as f64
}

/// Terminal return shared by every step of a trajectory: the relative work
/// saved against the expert, scaled by `lambda`.
pub fn rl_reward(work_units: f64, baseline: f64, lambda: f64) -> f64 {
    lambda * (baseline - work_units) / baseline
}

/// Mini-batch of problem indices for `iteration` of `epoch`: the pool is
/// shuffled once per epoch and consumed cyclically.
pub fn recycle_schedule(pool: usize, epoch: usize, iteration: usize, batch: usize, seed: u64) -> Vec<usize> {
    if pool == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (epoch as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut perm: Vec<usize> = (0..pool).collect();
    perm.shuffle(&mut rng);
    (0..batch).map(|k| perm[(iteration * batch + k) % pool]).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rollout {
    pub steps: Vec<Step>,
    pub work_units: u64,
    /// The solve stopped at a limit; `work_units` is then a lower bound.
    pub truncated: bool,
}

/// A family of episodes the policy-gradient trainer can sample.
pub trait Environment: Sync {
    fn n_problems(&self) -> usize;
    fn baseline(&self, problem: usize) -> f64;
    fn rollout(&self, problem: usize, net: &Arc<PolicyNetwork>, seed: u64) -> Result<Rollout>;
}

/// Branch-and-bound episodes over a fixed set of problems.
pub struct PcmEnvironment {
    pub problems: Vec<MilpProblem>,
    pub baselines: Vec<f64>,
    pub limits: Limits,
}

impl PcmEnvironment {
    /// Baselines are looked up by problem id in `store`.
    pub fn new(problems: &[(String, MilpProblem)], store: &TrajectoryStore, limits: Limits) -> Result<Self> {
        let baselines = problems
            .iter()
            .map(|(id, _)| {
                store
                    .baseline(id)
                    .ok_or_else(|| Error::InvalidConfig(format!("no expert baseline for problem {id}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            problems: problems.iter().map(|(_, p)| p.clone()).collect(),
            baselines,
            limits,
        })
    }
}

impl Environment for PcmEnvironment {
    fn n_problems(&self) -> usize {
        self.problems.len()
    }

    fn baseline(&self, problem: usize) -> f64 {
        self.baselines[problem]
    }

    fn rollout(&self, problem: usize, net: &Arc<PolicyNetwork>, seed: u64) -> Result<Rollout> {
        let mut rule = PolicyRule::sampling(Arc::clone(net), seed).recording();
        let st = solve(&self.problems[problem], &mut rule, self.limits)?;
        Ok(Rollout {
            steps: rule.take_steps(),
            work_units: st.work_units,
            truncated: st.status == SolveStatus::LimitReached,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RlConfig {
    pub epochs: usize,
    pub iterations: usize,
    pub batch_size: usize,
    pub lambda: f64,
    pub step: f64,
    pub seed: u64,
    /// Only an undiscounted return is supported.
    pub gamma: f64,
}

impl Default for RlConfig {
    fn default() -> Self {
        Self {
            epochs: 2,
            iterations: 4,
            batch_size: 8,
            lambda: 1.0,
            step: 1e-4,
            seed: 0,
            gamma: 1.0,
        }
    }
}

impl RlConfig {
    fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.iterations == 0 || self.batch_size == 0 {
            return Err(Error::InvalidConfig("epochs, iterations and batch size must be >= 1".into()));
        }
        if !(self.lambda > 0.0) || !(self.step > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "lambda {} and step {} must be > 0",
                self.lambda, self.step
            )));
        }
        if self.gamma != 1.0 {
            return Err(Error::InvalidConfig(format!("discount {} unsupported; returns are undiscounted", self.gamma)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RlIteration {
    pub epoch: usize,
    pub iteration: usize,
    pub problems: Vec<usize>,
    pub mean_return: f64,
    pub mean_work: f64,
    pub truncated: usize,
    pub steps: usize,
}

fn rollout_seed(seed: u64, epoch: usize, iteration: usize, k: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ ((epoch as u64) << 40) ^ ((iteration as u64) << 20) ^ k as u64
}

/// REINFORCE with a terminal return: per iteration, one sampled episode per
/// mini-batch problem, then a single ascent step on
/// `sum_j sum_s u_j * grad log pi(a_s | f_s)` averaged over all steps.
pub fn train_rl(env: &dyn Environment, init: &PolicyNetwork, cfg: &RlConfig) -> Result<(PolicyNetwork, Vec<RlIteration>)> {
    cfg.validate()?;
    let mut net = init.clone();
    let mut curve = Vec::new();
    for epoch in 0..cfg.epochs {
        for iteration in 0..cfg.iterations {
            let batch = recycle_schedule(env.n_problems(), epoch, iteration, cfg.batch_size, cfg.seed);
            let snapshot = Arc::new(net.clone());
            let rollouts = batch
                .par_iter()
                .enumerate()
                .map(|(k, &p)| env.rollout(p, &snapshot, rollout_seed(cfg.seed, epoch, iteration, k)))
                .collect::<Result<Vec<_>>>()?;

            let mut grad = vec![0.0; n_params()];
            let mut n_steps = 0;
            let mut returns = 0.0;
            let mut work = 0.0;
            for (r, &p) in rollouts.iter().zip(&batch) {
                let u = rl_reward(r.work_units as f64, env.baseline(p), cfg.lambda);
                returns += u;
                work += r.work_units as f64;
                n_steps += r.steps.len();
                if u != 0.0 {
                    for s in &r.steps {
                        snapshot.accumulate_grad_log_prob(&s.features, s.action, u, &mut grad)?;
                    }
                }
            }
            if n_steps > 0 && grad.iter().any(|&g| g != 0.0) {
                let scale = cfg.step / n_steps as f64;
                for (p, g) in net.params.iter_mut().zip(&grad) {
                    *p += scale * g;
                }
            }
            curve.push(RlIteration {
                epoch,
                iteration,
                mean_return: returns / batch.len() as f64,
                mean_work: work / batch.len() as f64,
                truncated: rollouts.iter().filter(|r| r.truncated).count(),
                steps: n_steps,
                problems: batch,
            });
        }
    }
    net.tag = format!("rl:{}", init.tag);
    Ok((net, curve))
}

#[cfg(test)]
mod tests;
