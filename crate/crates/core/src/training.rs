//! L1-regularized pseudo-likelihood fitting.
//!
//! The objective is the mean negative log conditional probability of each
//! window's centre given its `k_max` neighbours on both sides, plus
//! `(λ/M) Σ_k ‖J_k‖₁`. It is minimized by proximal gradient descent
//! (soft-thresholding on the couplings) with Barzilai–Borwein trial steps and
//! Armijo backtracking, which keeps accepted objectives non-increasing.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{self, PitchSequence, TrainingSample};
use crate::error::{Error, Result};
use crate::potts::{self, local_logits, softmax_in_place, ModelParams};
use crate::sampling::{self, SamplerConfig};

/// Samples per parallel work unit. Partial sums are merged in chunk order, so
/// results do not depend on the number of worker threads.
const CHUNK: usize = 256;
const ARMIJO: f64 = 1e-4;
const MAX_STEP: f64 = 1e8;
const MAX_HALVINGS: usize = 200;
/// Tolerance on the L1 subgradient conditions checked on return.
pub const OPTIMALITY_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub k_max: usize,
    pub lambda: f64,
    pub max_iters: usize,
    /// Stop once the relative change of the objective falls below this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            k_max: 10,
            lambda: 2.0,
            max_iters: 5000,
            tol: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_max == 0 {
            return Err(Error::InvalidArgument("k_max must be at least 1".into()));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "lambda must be a finite non-negative number, got {}",
                self.lambda
            )));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be positive".into()));
        }
        Ok(())
    }

    /// Reads a config from JSON (`.json`) or TOML (anything else). Missing keys
    /// take their defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let context = path.display().to_string();
        let config: TrainConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::format(context, e))?
        } else {
            toml::from_str(&text).map_err(|e| Error::format(context, e))?
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub final_objective: f64,
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
    pub zero_coupling_fraction: f64,
    /// Stopped on the relative-change tolerance (or an exact fixed point)
    /// rather than the iteration cap.
    pub converged: bool,
    /// Largest violation of the L1 optimality conditions at the returned point.
    pub optimality_residual: f64,
    pub zero_fraction_trace: Vec<f64>,
}

impl TrainReport {
    /// `iter,objective,zero_fraction` rows.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iter,objective,zero_fraction\n");
        for (i, (f, z)) in self
            .objective_trace
            .iter()
            .zip(&self.zero_fraction_trace)
            .enumerate()
        {
            out.push_str(&format!("{i},{f:.17e},{z:.17e}\n"));
        }
        out
    }
}

/// Training windows with the empirical sufficient statistics precomputed.
#[derive(Debug, Clone)]
pub struct SampleSet {
    q: usize,
    k_max: usize,
    /// `M × (2 k_max + 1)` symbols, row-major.
    windows: Vec<usize>,
    /// Per-coordinate empirical counts divided by M, in flat parameter order.
    empirical: Vec<f64>,
}

impl SampleSet {
    pub fn new(samples: &[TrainingSample], q: usize) -> Result<Self> {
        let first = samples.first().ok_or(Error::InvalidArgument(
            "no training samples".into(),
        ))?;
        let k_max = first.k_max();
        let width = 2 * k_max + 1;
        let mut windows = Vec::with_capacity(samples.len() * width);
        for s in samples {
            if s.k_max() != k_max {
                return Err(Error::Dimension("samples with different k_max".into()));
            }
            if let Some(&bad) = s.window().iter().find(|&&v| v >= q) {
                return Err(Error::Dimension(format!("sample symbol {bad} outside 0..{q}")));
            }
            windows.extend_from_slice(s.window());
        }
        let mut set = SampleSet {
            q,
            k_max,
            windows,
            empirical: Vec::new(),
        };
        set.empirical = set.empirical_counts();
        Ok(set)
    }

    pub fn from_sequence(seq: &PitchSequence, k_max: usize) -> Result<Self> {
        SampleSet::new(&corpus::windows(seq, k_max)?, seq.q())
    }

    pub fn len(&self) -> usize {
        self.windows.len() / (2 * self.k_max + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Empirical counts (divided by M) in flat parameter order.
    pub fn empirical(&self) -> &[f64] {
        &self.empirical
    }

    fn n_params(&self) -> usize {
        self.q + self.k_max * self.q * self.q
    }

    #[inline]
    fn j_index(&self, k: usize, left: usize, right: usize) -> usize {
        self.q + ((k - 1) * self.q + left) * self.q + right
    }

    fn empirical_counts(&self) -> Vec<f64> {
        let mut counts = vec![0.0; self.n_params()];
        let k_max = self.k_max;
        for w in self.windows.chunks(2 * k_max + 1) {
            let c = w[k_max];
            counts[c] += 1.0;
            for k in 1..=k_max {
                counts[self.j_index(k, w[k_max - k], c)] += 1.0;
                counts[self.j_index(k, c, w[k_max + k])] += 1.0;
            }
        }
        let m = self.len() as f64;
        counts.iter_mut().for_each(|v| *v /= m);
        counts
    }

    fn check_params(&self, params: &ModelParams) -> Result<()> {
        if params.q() != self.q || params.k_max() != self.k_max {
            return Err(Error::Dimension(format!(
                "model has q={}, k_max={}; samples have q={}, k_max={}",
                params.q(),
                params.k_max(),
                self.q,
                self.k_max
            )));
        }
        Ok(())
    }

    /// Smooth part of the objective and optionally its gradient, both as means
    /// over samples.
    fn evaluate(&self, params: &ModelParams, want_grad: bool) -> (f64, Option<Vec<f64>>) {
        let width = 2 * self.k_max + 1;
        let partials: Vec<(f64, Vec<f64>)> = self
            .windows
            .par_chunks(CHUNK * width)
            .map(|chunk| self.evaluate_chunk(params, chunk, want_grad))
            .collect();
        let m = self.len() as f64;
        let mut loss = 0.0;
        let mut grad = if want_grad {
            Some(vec![0.0; self.n_params()])
        } else {
            None
        };
        for (l, g) in partials {
            loss += l;
            if let Some(grad) = grad.as_mut() {
                grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
            }
        }
        loss /= m;
        if let Some(grad) = grad.as_mut() {
            for (g, e) in grad.iter_mut().zip(&self.empirical) {
                *g = *g / m - e;
            }
        }
        (loss, grad)
    }

    /// Returns `Σ -log P(centre | context)` and the summed model expectations.
    fn evaluate_chunk(&self, params: &ModelParams, chunk: &[usize], want_grad: bool) -> (f64, Vec<f64>) {
        let (q, k_max) = (self.q, self.k_max);
        let mut expect = if want_grad {
            vec![0.0; self.n_params()]
        } else {
            Vec::new()
        };
        let mut probs = vec![0.0; q];
        let mut loss = 0.0;
        for w in chunk.chunks(2 * k_max + 1) {
            let (left, rest) = w.split_at(k_max);
            let (centre, right) = (rest[0], &rest[1..]);
            local_logits(params, left, right, &mut probs);
            let own = probs[centre];
            let log_z = softmax_in_place(&mut probs);
            loss += log_z - own;
            if want_grad {
                for (e, p) in expect[..q].iter_mut().zip(&probs) {
                    *e += p;
                }
                for k in 1..=k_max {
                    let a = w[k_max - k];
                    let b = w[k_max + k];
                    // J_k(s_{-k}, σ) for every σ
                    let row = self.j_index(k, a, 0);
                    for (e, p) in expect[row..row + q].iter_mut().zip(&probs) {
                        *e += p;
                    }
                    // J_k(σ, s_{+k}) for every σ
                    for (sigma, p) in probs.iter().enumerate() {
                        expect[self.j_index(k, sigma, b)] += p;
                    }
                }
            }
        }
        (loss, expect)
    }
}

fn l1_couplings(theta: &[f64], q: usize) -> f64 {
    theta[q..].iter().map(|v| v.abs()).sum()
}

/// Mean negative log-pseudo-likelihood plus `(λ/M) Σ_k ‖J_k‖₁`.
pub fn pseudo_loss(params: &ModelParams, samples: &[TrainingSample], lambda: f64) -> Result<f64> {
    let set = SampleSet::new(samples, params.q())?;
    set.check_params(params)?;
    let (f, _) = set.evaluate(params, false);
    Ok(f + lambda / set.len() as f64 * l1_couplings(&params.to_flat(), params.q()))
}

/// Gradient of the smooth (unregularized) part, shaped like the parameters.
pub fn pseudo_grad(params: &ModelParams, samples: &[TrainingSample]) -> Result<ModelParams> {
    let set = SampleSet::new(samples, params.q())?;
    set.check_params(params)?;
    let (_, grad) = set.evaluate(params, true);
    ModelParams::from_flat(params.q(), params.k_max(), &grad.unwrap())
}

/// Model expectations (divided by M) of the empirical statistics, flat order.
/// At an unregularized optimum they equal [`SampleSet::empirical`].
pub fn model_expectations(params: &ModelParams, set: &SampleSet) -> Result<Vec<f64>> {
    set.check_params(params)?;
    let (_, grad) = set.evaluate(params, true);
    Ok(grad
        .unwrap()
        .iter()
        .zip(set.empirical())
        .map(|(g, e)| g + e)
        .collect())
}

/// Largest violation of the L1 optimality conditions for flat gradient `grad`
/// at `theta`, with per-coordinate penalty `penalty` on the couplings.
pub fn optimality_residual(theta: &[f64], grad: &[f64], q: usize, penalty: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, (&x, &g)) in theta.iter().zip(grad).enumerate() {
        let v = if i < q {
            g.abs()
        } else if x == 0.0 {
            (g.abs() - penalty).max(0.0)
        } else {
            (g + penalty * x.signum()).abs()
        };
        worst = worst.max(v);
    }
    worst
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Fits a model over an alphabet of size `q` to the given windows.
pub fn train(
    samples: &[TrainingSample],
    q: usize,
    config: &TrainConfig,
) -> Result<(ModelParams, TrainReport)> {
    config.validate()?;
    let set = SampleSet::new(samples, q)?;
    if set.k_max() != config.k_max {
        return Err(Error::Dimension(format!(
            "samples were cut for k_max={}, config asks for {}",
            set.k_max(),
            config.k_max
        )));
    }
    train_set(&set, config)
}

/// Cuts windows from `seq` and fits a model on its alphabet.
pub fn train_sequence(seq: &PitchSequence, config: &TrainConfig) -> Result<(ModelParams, TrainReport)> {
    config.validate()?;
    let set = SampleSet::from_sequence(seq, config.k_max)?;
    train_set(&set, config)
}

pub fn train_set(set: &SampleSet, config: &TrainConfig) -> Result<(ModelParams, TrainReport)> {
    config.validate()?;
    let (q, k_max) = (set.q(), set.k_max());
    let penalty = config.lambda / set.len() as f64;
    let unpack = |theta: &[f64]| {
        ModelParams::from_flat(q, k_max, theta).expect("finite iterate")
    };
    let objective = |f: f64, theta: &[f64]| f + penalty * l1_couplings(theta, q);

    let mut theta = vec![0.0; q + k_max * q * q];
    let (f0, g0) = set.evaluate(&unpack(&theta), true);
    let mut grad = g0.unwrap();
    let mut obj = objective(f0, &theta);
    if !obj.is_finite() {
        return Err(Error::Diverged {
            iteration: 0,
            objective: obj,
            last_params: Box::new(unpack(&theta)),
        });
    }

    // Each logit has one field and 2 k_max couplings with unit coefficients and
    // each coupling feeds at most two logits; with the softmax curvature bounded
    // by 1/2 this gives a Lipschitz bound of 1 + 2 k_max on the gradient.
    let min_step = 1.0 / (1.0 + 2.0 * k_max as f64);
    let mut step = min_step;
    let mut trace = vec![obj];
    let mut zero_trace = vec![unpack(&theta).zero_coupling_fraction()];
    let mut converged = false;
    let mut iterations = 0;
    let mut trial = vec![0.0; theta.len()];

    'outer: for iter in 1..=config.max_iters {
        iterations = iter;
        let mut halvings = 0;
        let (new_obj, new_grad) = loop {
            for (i, t) in trial.iter_mut().enumerate() {
                let x = theta[i] - step * grad[i];
                *t = if i < q { x } else { soft_threshold(x, step * penalty) };
            }
            if trial == theta {
                converged = true;
                break 'outer;
            }
            let finite = trial.iter().all(|v| v.is_finite());
            let candidate = if finite {
                let (f, g) = set.evaluate(&unpack(&trial), true);
                Some((objective(f, &trial), g.unwrap()))
            } else {
                None
            };
            if let Some((cand_obj, cand_grad)) = candidate {
                if cand_obj.is_finite() {
                    let decrease: f64 = trial
                        .iter()
                        .zip(&theta)
                        .zip(&grad)
                        .map(|((t, x), g)| g * (t - x))
                        .sum::<f64>()
                        + penalty * (l1_couplings(&trial, q) - l1_couplings(&theta, q));
                    if cand_obj <= obj + ARMIJO * decrease {
                        break (cand_obj, cand_grad);
                    }
                }
            }
            halvings += 1;
            if halvings > MAX_HALVINGS {
                return Err(Error::Diverged {
                    iteration: iter,
                    objective: obj,
                    last_params: Box::new(unpack(&theta)),
                });
            }
            step /= 2.0;
        };

        // Barzilai–Borwein step for the next trial.
        let mut ss = 0.0;
        let mut sy = 0.0;
        for i in 0..theta.len() {
            let s = trial[i] - theta[i];
            ss += s * s;
            sy += s * (new_grad[i] - grad[i]);
        }
        step = if sy > 0.0 {
            (ss / sy).clamp(min_step, MAX_STEP)
        } else {
            min_step
        };

        let change = (obj - new_obj).abs() / new_obj.abs().max(1.0);
        std::mem::swap(&mut theta, &mut trial);
        grad = new_grad;
        obj = new_obj;
        trace.push(obj);
        zero_trace.push(theta[q..].iter().filter(|&&v| v == 0.0).count() as f64 / (theta.len() - q) as f64);
        if change < config.tol {
            converged = true;
            break;
        }
    }

    // Fix the additive gauge of the fields.
    let mean = theta[..q].iter().sum::<f64>() / q as f64;
    theta[..q].iter_mut().for_each(|h| *h -= mean);
    let params = unpack(&theta);
    let (_, final_grad) = set.evaluate(&params, true);
    let residual = optimality_residual(&theta, &final_grad.unwrap(), q, penalty);
    if residual > OPTIMALITY_TOL && converged {
        log::warn!("optimality residual {residual:.3e} above {OPTIMALITY_TOL:.0e} at convergence");
    }
    let report = TrainReport {
        final_objective: obj,
        iterations,
        objective_trace: trace,
        zero_coupling_fraction: params.zero_coupling_fraction(),
        converged,
        optimality_residual: residual,
        zero_fraction_trace: zero_trace,
    };
    Ok((params, report))
}

/// One point of a λ sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaPoint {
    pub lambda: f64,
    /// Mean squared error between generated and corpus pair frequencies over
    /// every distance `1..=k_max`.
    pub pair_mse: f64,
    pub zero_coupling_fraction: f64,
}

/// Trains one model per λ, samples from each, and scores pair-frequency MSE
/// against the corpus.
pub fn lambda_sweep(
    seq: &PitchSequence,
    lambdas: &[f64],
    base: &TrainConfig,
    sampler: &SamplerConfig,
) -> Result<Vec<LambdaPoint>> {
    let set = SampleSet::from_sequence(seq, base.k_max)?;
    let corpus_stats = potts::FreqStats::from_sequence(seq, base.k_max)?;
    lambdas
        .iter()
        .map(|&lambda| {
            let config = TrainConfig {
                lambda,
                ..base.clone()
            };
            let (params, _) = train_set(&set, &config)?;
            let generated = sampling::generate_sequence(&params, seq.alphabet().clone(), sampler)?;
            let model_stats = potts::FreqStats::from_sequence(&generated, base.k_max)?;
            let mut sq = 0.0;
            let mut count = 0usize;
            for (a, b) in corpus_stats.pair.iter().zip(&model_stats.pair) {
                for (x, y) in a.values().iter().zip(b.values()) {
                    sq += (x - y) * (x - y);
                    count += 1;
                }
            }
            Ok(LambdaPoint {
                lambda,
                pair_mse: sq / count as f64,
                zero_coupling_fraction: params.zero_coupling_fraction(),
            })
        })
        .collect()
}
