//! Single-site heat-bath sampling from a trained model.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::corpus::{Alphabet, PitchSequence};
use crate::error::{Error, Result};
use crate::potts::{local_logits, softmax_in_place, ModelParams};
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Output length.
    pub n: usize,
    /// Total single-site updates are `sweeps_factor * n`.
    pub sweeps_factor: usize,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        SamplerConfig {
            n,
            sweeps_factor: 10,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("output length must be at least 1".into()));
        }
        if self.sweeps_factor == 0 {
            return Err(Error::InvalidArgument("sweeps factor must be at least 1".into()));
        }
        Ok(())
    }
}

/// Distribution the heat-bath kernel draws from at `pos`: the model
/// conditional given up to `k_max` neighbours on each side.
pub fn update_distribution(params: &ModelParams, state: &[usize], pos: usize) -> Vec<f64> {
    let mut p = vec![0.0; params.q()];
    fill_update_distribution(params, state, pos, &mut p);
    p
}

#[inline]
fn fill_update_distribution(params: &ModelParams, state: &[usize], pos: usize, out: &mut [f64]) {
    let k = params.k_max();
    let left = &state[pos.saturating_sub(k)..pos];
    let right = &state[pos + 1..(pos + 1 + k).min(state.len())];
    local_logits(params, left, right, out);
    softmax_in_place(out);
}

/// Runs one chain from an i.i.d.-uniform start and returns its final state.
pub fn generate(params: &ModelParams, config: &SamplerConfig) -> Result<Vec<usize>> {
    config.validate()?;
    params.check_finite()?;
    let q = params.q();
    let n = config.n;
    let mut rng = SeededRng::new(config.seed);
    let mut state: Vec<usize> = (0..n).map(|_| rng.index(q)).collect();
    let mut probs = vec![0.0; q];
    let steps = config
        .sweeps_factor
        .checked_mul(n)
        .ok_or_else(|| Error::InvalidArgument("sweeps_factor * n overflows".into()))?;
    for _ in 0..steps {
        let pos = rng.index(n);
        fill_update_distribution(params, &state, pos, &mut probs);
        state[pos] = rng.categorical(&probs);
    }
    Ok(state)
}

/// [`generate`] wrapped as a sequence over the model's alphabet.
pub fn generate_sequence(
    params: &ModelParams,
    alphabet: Arc<Alphabet>,
    config: &SamplerConfig,
) -> Result<PitchSequence> {
    if alphabet.len() != params.q() {
        return Err(Error::Dimension(format!(
            "alphabet has {} symbols, model has q = {}",
            alphabet.len(),
            params.q()
        )));
    }
    PitchSequence::new(generate(params, config)?, alphabet)
}
