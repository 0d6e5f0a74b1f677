//! Learned branching: candidate featurization, the shared-weight scoring
//! network, action selection and the on-disk weight format.

mod features;
mod io;
mod network;

use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bnb_engine::{BranchContext, BranchDecision, BranchingRule, RuleOutcome};
use crate::branching_rules::argmax;
use crate::error::{Error, Result};

pub use features::{
    feature_hash, featurize, CandidateFeatures, COUNT_CAP, FEATURE_SPEC, N_FEATURES, N_VARIABLE_FEATURES,
};
pub use io::{from_bytes, load, save, to_bytes, FORMAT_VERSION, MAGIC};
pub use network::{forward, grad_log_prob, n_params, softmax, PolicyNetwork, LAYERS};

/// One branching decision: the node's features and the chosen row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub features: CandidateFeatures,
    pub action: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub problem_id: String,
    pub steps: Vec<Step>,
    pub work_units: u64,
    /// Expert work units on the same problem.
    pub baseline: f64,
    /// False when the solve stopped at a limit.
    pub optimal: bool,
}

impl Trajectory {
    pub fn validate(&self) -> Result<()> {
        for s in &self.steps {
            if !s.features.is_consistent() {
                return Err(Error::DimensionMismatch {
                    expected: N_FEATURES,
                    got: s.features.data.len() % N_FEATURES,
                });
            }
            if s.action >= s.features.n_rows() {
                return Err(Error::ActionOutOfRange {
                    index: s.action,
                    len: s.features.n_rows(),
                });
            }
        }
        Ok(())
    }
}

pub enum SelectMode<'r> {
    Greedy,
    Sample(&'r mut ChaCha8Rng),
}

/// Row index drawn from `probs`: the most likely row (earliest on ties),
/// or a categorical sample.
pub fn choose(probs: &[f64], mode: SelectMode<'_>) -> usize {
    match mode {
        SelectMode::Greedy => argmax(probs),
        SelectMode::Sample(rng) => match WeightedIndex::new(probs) {
            Ok(dist) => dist.sample(rng),
            Err(_) => argmax(probs),
        },
    }
}

/// Picks a candidate column; `scores` carries the probability of each row.
pub fn select(net: &PolicyNetwork, feats: &CandidateFeatures, candidates: &[usize], mode: SelectMode<'_>) -> Result<BranchDecision> {
    if feats.n_rows() != candidates.len() {
        return Err(Error::DimensionMismatch {
            expected: candidates.len(),
            got: feats.n_rows(),
        });
    }
    let probs = forward(net, feats);
    let i = choose(&probs, mode);
    Ok(BranchDecision {
        chosen_column: candidates[i],
        scores: probs,
    })
}

/// Branching rule driven by a policy network.
pub struct PolicyRule {
    net: Arc<PolicyNetwork>,
    rng: Option<ChaCha8Rng>,
    record: bool,
    steps: Vec<Step>,
}

impl PolicyRule {
    pub fn greedy(net: Arc<PolicyNetwork>) -> Self {
        Self {
            net,
            rng: None,
            record: false,
            steps: Vec::new(),
        }
    }

    pub fn sampling(net: Arc<PolicyNetwork>, seed: u64) -> Self {
        Self {
            rng: Some(ChaCha8Rng::seed_from_u64(seed)),
            ..Self::greedy(net)
        }
    }

    /// Keeps every (features, action) pair for later training.
    pub fn recording(mut self) -> Self {
        self.record = true;
        self
    }

    pub fn take_steps(&mut self) -> Vec<Step> {
        std::mem::take(&mut self.steps)
    }
}

impl BranchingRule for PolicyRule {
    fn name(&self) -> String {
        format!("policy:{}", self.net.tag)
    }

    fn select(&mut self, ctx: &mut BranchContext<'_>) -> Result<RuleOutcome> {
        let feats = featurize(ctx);
        let mode = match self.rng.as_mut() {
            Some(rng) => SelectMode::Sample(rng),
            None => SelectMode::Greedy,
        };
        let probs = forward(&self.net, &feats);
        let i = choose(&probs, mode);
        if self.record {
            self.steps.push(Step {
                features: feats,
                action: i,
            });
        }
        Ok(RuleOutcome::Branch(BranchDecision {
            chosen_column: ctx.candidates[i],
            scores: probs,
        }))
    }
}
