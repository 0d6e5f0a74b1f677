use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::features::{CandidateFeatures, N_FEATURES};
use crate::error::{Error, Result};

/// Layer widths of the per-candidate scorer.
pub const LAYERS: [usize; 4] = [N_FEATURES, 64, 32, 1];

/// Offsets of each layer's weight matrix and bias in the flat parameter vector.
fn layout() -> [(usize, usize, usize, usize); 3] {
    let mut out = [(0, 0, 0, 0); 3];
    let mut off = 0;
    for l in 0..3 {
        let (n_in, n_out) = (LAYERS[l], LAYERS[l + 1]);
        out[l] = (off, off + n_in * n_out, n_in, n_out);
        off += n_in * n_out + n_out;
    }
    out
}

pub fn n_params() -> usize {
    (0..3).map(|l| LAYERS[l] * LAYERS[l + 1] + LAYERS[l + 1]).sum()
}

/// Shared-weight MLP scoring each candidate row independently; a softmax
/// over the row scores gives the branching distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyNetwork {
    /// Per layer: row-major `out x in` weights followed by `out` biases.
    pub params: Vec<f64>,
    /// Free-form provenance, e.g. the digest of the training store.
    pub tag: String,
}

struct Activations {
    h1: [f64; 64],
    h2: [f64; 32],
    logit: f64,
}

impl PolicyNetwork {
    /// Glorot-uniform weights, zero biases.
    pub fn init(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = vec![0.0; n_params()];
        for (w, _, n_in, n_out) in layout() {
            let a = (6.0 / (n_in + n_out) as f64).sqrt();
            for p in &mut params[w..w + n_in * n_out] {
                *p = rng.random_range(-a..a);
            }
        }
        Self {
            params,
            tag: format!("init:{seed}"),
        }
    }

    pub fn from_params(params: Vec<f64>, tag: impl Into<String>) -> Result<Self> {
        if params.len() != n_params() {
            return Err(Error::DimensionMismatch {
                expected: n_params(),
                got: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::MalformedPolicy("non-finite weight".into()));
        }
        Ok(Self {
            params,
            tag: tag.into(),
        })
    }

    fn activations(&self, x: &[f64]) -> Activations {
        let [(w1, b1, _, _), (w2, b2, _, _), (w3, b3, _, _)] = layout();
        let p = &self.params;
        let mut h1 = [0.0; 64];
        for (o, h) in h1.iter_mut().enumerate() {
            let row = &p[w1 + o * N_FEATURES..w1 + (o + 1) * N_FEATURES];
            let s: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + p[b1 + o];
            *h = s.max(0.0);
        }
        let mut h2 = [0.0; 32];
        for (o, h) in h2.iter_mut().enumerate() {
            let row = &p[w2 + o * 64..w2 + (o + 1) * 64];
            let s: f64 = row.iter().zip(&h1).map(|(w, v)| w * v).sum::<f64>() + p[b2 + o];
            *h = s.max(0.0);
        }
        let logit = p[w3..w3 + 32].iter().zip(&h2).map(|(w, v)| w * v).sum::<f64>() + p[b3];
        Activations { h1, h2, logit }
    }

    /// Score of a single candidate row.
    pub fn row_logit(&self, x: &[f64]) -> f64 {
        self.activations(x).logit
    }

    pub fn logits(&self, feats: &CandidateFeatures) -> Vec<f64> {
        (0..feats.n_rows()).map(|i| self.row_logit(feats.row(i))).collect()
    }

    /// Adds `scale * d logit / d params` for row `x` into `grad`.
    fn accumulate_row_grad(&self, x: &[f64], act: &Activations, scale: f64, grad: &mut [f64]) {
        let [(w1, b1, _, _), (w2, b2, _, _), (w3, b3, _, _)] = layout();
        let p = &self.params;
        grad[b3] += scale;
        let mut d2 = [0.0; 32];
        for k in 0..32 {
            grad[w3 + k] += scale * act.h2[k];
            if act.h2[k] > 0.0 {
                d2[k] = scale * p[w3 + k];
            }
        }
        let mut d1 = [0.0; 64];
        for (o, &d) in d2.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            grad[b2 + o] += d;
            let base = w2 + o * 64;
            for k in 0..64 {
                grad[base + k] += d * act.h1[k];
                d1[k] += d * p[base + k];
            }
        }
        for (o, &d) in d1.iter().enumerate() {
            if d == 0.0 || act.h1[o] <= 0.0 {
                continue;
            }
            grad[b1 + o] += d;
            let base = w1 + o * N_FEATURES;
            for k in 0..N_FEATURES {
                grad[base + k] += d * x[k];
            }
        }
    }

    /// Adds `scale * d log p(action) / d params` into `grad`; returns `log p(action)`.
    pub fn accumulate_grad_log_prob(
        &self,
        feats: &CandidateFeatures,
        action: usize,
        scale: f64,
        grad: &mut [f64],
    ) -> Result<f64> {
        let n = feats.n_rows();
        if action >= n {
            return Err(Error::ActionOutOfRange { index: action, len: n });
        }
        let acts: Vec<Activations> = (0..n).map(|i| self.activations(feats.row(i))).collect();
        let logits: Vec<f64> = acts.iter().map(|a| a.logit).collect();
        let probs = softmax(&logits);
        for (i, act) in acts.iter().enumerate() {
            let w = if i == action { 1.0 - probs[i] } else { -probs[i] };
            if w != 0.0 {
                self.accumulate_row_grad(feats.row(i), act, scale * w, grad);
            }
        }
        Ok(probs[action].ln())
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Probability of each candidate row.
pub fn forward(net: &PolicyNetwork, feats: &CandidateFeatures) -> Vec<f64> {
    softmax(&net.logits(feats))
}

/// Gradient of `log p(action)` with respect to every parameter.
pub fn grad_log_prob(net: &PolicyNetwork, feats: &CandidateFeatures, action: usize) -> Result<Vec<f64>> {
    let mut g = vec![0.0; net.params.len()];
    net.accumulate_grad_log_prob(feats, action, 1.0, &mut g)?;
    Ok(g)
}
