use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bnb_engine::{BranchContext, NODE_WORK};
use crate::lp_simplex::ProbeDirection;

pub const N_FEATURES: usize = 18;
pub const N_VARIABLE_FEATURES: usize = 12;
/// Observation counts saturate at this value after `log1p` scaling.
pub const COUNT_CAP: f64 = 64.0;

/// Names, in order, of the per-candidate feature columns. Hashed into every
/// saved network so a model cannot be applied to a different layout.
pub const FEATURE_SPEC: [&str; N_FEATURES] = [
    "lp_value",
    "fractionality",
    "objective_coefficient/max|c|",
    "pseudogain_up/(pseudogain_up+mean_up)",
    "pseudogain_down/(pseudogain_down+mean_down)",
    "log1p(count_up)/log1p(64)",
    "log1p(count_down)/log1p(64)",
    "ever_branched",
    "sign(reduced_cost)",
    "last_branch_depth/(1+max_depth)",
    "path_changes_sharing_a_row/path_changes",
    "t/T",
    "depth/(1+max_depth)",
    "min(1,(z_primal-z_dual)/max(1,|z_primal|))",
    "min(1,(local_dual-z_dual)/max(1,|z_dual|))",
    "candidates/binaries",
    "log1p(incumbents)/log1p(64)",
    "min(1,10*nodes/work_scale)",
];

/// First eight bytes of the SHA-256 of the feature list.
pub fn feature_hash() -> u64 {
    let mut h = Sha256::new();
    h.update(b"pcmbranch-features-v1\n");
    for name in FEATURE_SPEC {
        h.update(name.as_bytes());
        h.update(b"\n");
    }
    let digest = h.finalize();
    u64::from_be_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Row-major matrix with one row of `N_FEATURES` values per candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateFeatures {
    pub data: Vec<f64>,
}

impl CandidateFeatures {
    pub fn from_rows(rows: &[[f64; N_FEATURES]]) -> Self {
        Self {
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.data.len() / N_FEATURES
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * N_FEATURES..(i + 1) * N_FEATURES]
    }

    pub fn is_consistent(&self) -> bool {
        self.data.len() % N_FEATURES == 0
    }
}

fn scaled_count(c: f64) -> f64 {
    ((1.0 + c).ln() / (1.0 + COUNT_CAP).ln()).min(1.0)
}

fn relative_gain(own: Option<f64>, mean: Option<f64>) -> f64 {
    let g = own.unwrap_or(1.0);
    let m = mean.unwrap_or(1.0);
    if g + m > 0.0 {
        (g / (g + m)).clamp(0.0, 1.0)
    } else {
        0.5
    }
}

fn unit(v: f64) -> f64 {
    if v.is_finite() {
        v.clamp(0.0, 1.0)
    } else {
        1.0
    }
}

/// Features of every candidate at the node described by `ctx`.
pub fn featurize(ctx: &BranchContext<'_>) -> CandidateFeatures {
    let tree = ctx.tree;
    let depth_norm = 1.0 + tree.max_depth_seen.max(ctx.node.depth) as f64;
    let z_primal = tree.z_primal;
    let z_dual = tree.z_dual;
    let gap = if z_primal.is_finite() && z_dual.is_finite() {
        unit((z_primal - z_dual) / z_primal.abs().max(1.0))
    } else {
        1.0
    };
    let local = if z_dual.is_finite() {
        unit((ctx.node.local_dual_bound - z_dual) / z_dual.abs().max(1.0))
    } else {
        0.0
    };
    let node_part = [
        ctx.node.depth as f64 / depth_norm,
        gap,
        local,
        ctx.candidates.len() as f64 / ctx.info.n_binaries().max(1) as f64,
        scaled_count(tree.incumbents_found as f64),
        unit((tree.n_explored * NODE_WORK) as f64 / tree.work_scale as f64),
    ];
    let mean_up = ctx.store.global_average(ProbeDirection::Up);
    let mean_down = ctx.store.global_average(ProbeDirection::Down);
    let path = &ctx.node.bound_changes;

    let mut data = Vec::with_capacity(ctx.candidates.len() * N_FEATURES);
    for &j in ctx.candidates {
        let x = ctx.lp.primal[j].clamp(0.0, 1.0);
        let c = if ctx.info.objective_scale > 0.0 {
            ctx.prob.objective[j] / ctx.info.objective_scale
        } else {
            0.0
        };
        let rc = ctx.lp.reduced_costs.get(j).copied().unwrap_or(0.0);
        let rc_sign = if rc > 1e-9 {
            1.0
        } else if rc < -1e-9 {
            -1.0
        } else {
            0.0
        };
        let last = ctx.history.last_depth[j];
        let touching = if path.is_empty() {
            0.0
        } else {
            path.iter().filter(|b| ctx.info.adjacent(b.column, j)).count() as f64 / path.len() as f64
        };
        data.extend_from_slice(&[
            x,
            x.min(1.0 - x),
            c.clamp(-1.0, 1.0),
            relative_gain(ctx.store.average(j, ProbeDirection::Up), mean_up),
            relative_gain(ctx.store.average(j, ProbeDirection::Down), mean_down),
            scaled_count(ctx.store.count(j, ProbeDirection::Up) as f64),
            scaled_count(ctx.store.count(j, ProbeDirection::Down) as f64),
            if last.is_some() { 1.0 } else { 0.0 },
            rc_sign,
            last.map_or(0.0, |d| d as f64 / depth_norm),
            touching,
            ctx.info.time_position[j],
        ]);
        data.extend_from_slice(&node_part);
    }
    CandidateFeatures { data }
}
