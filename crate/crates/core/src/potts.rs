//! Translation-invariant pairwise Potts model: parameters, energies,
//! single-site conditionals and empirical/exact statistics.
//!
//! Parameters enter the Boltzmann weight with a positive sign,
//! `P(s) ∝ exp(Σ_i h(s_i) + Σ_k Σ_{j-i=k} J_k(s_i, s_j))`, and
//! [`energy`] returns the Hamiltonian `H = -(that exponent)`.

use std::fmt::Write as _;

use serde::Deserialize;

use crate::corpus::PitchSequence;
use crate::error::{Error, Result};

/// Local fields `h` (length q) and interaction matrices `J_k`, `k = 1..=k_max`
/// (q×q, row = left symbol, column = right symbol).
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    q: usize,
    k_max: usize,
    h: Vec<f64>,
    /// Row-major `[k-1][left][right]`.
    j: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(q: usize, k_max: usize) -> Self {
        assert!(q >= 1 && k_max >= 1, "q and k_max must be positive");
        ModelParams {
            q,
            k_max,
            h: vec![0.0; q],
            j: vec![0.0; k_max * q * q],
        }
    }

    /// Builds parameters from a field vector and a flat `[k][left][right]` coupling vector.
    pub fn new(q: usize, k_max: usize, h: Vec<f64>, j: Vec<f64>) -> Result<Self> {
        if q == 0 || k_max == 0 {
            return Err(Error::Dimension("q and k_max must be positive".into()));
        }
        if h.len() != q || j.len() != k_max * q * q {
            return Err(Error::Dimension(format!(
                "expected {q} fields and {} couplings, got {} and {}",
                k_max * q * q,
                h.len(),
                j.len()
            )));
        }
        let params = ModelParams { q, k_max, h, j };
        params.check_finite()?;
        Ok(params)
    }

    /// Inverse of [`ModelParams::to_flat`].
    pub fn from_flat(q: usize, k_max: usize, theta: &[f64]) -> Result<Self> {
        if theta.len() != q + k_max * q * q {
            return Err(Error::Dimension(format!(
                "flat parameter vector has length {}, expected {}",
                theta.len(),
                q + k_max * q * q
            )));
        }
        ModelParams::new(q, k_max, theta[..q].to_vec(), theta[q..].to_vec())
    }

    /// `[h, J_1, …, J_kmax]` concatenated.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut theta = Vec::with_capacity(self.n_params());
        theta.extend_from_slice(&self.h);
        theta.extend_from_slice(&self.j);
        theta
    }

    pub fn n_params(&self) -> usize {
        self.q + self.j.len()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn fields(&self) -> &[f64] {
        &self.h
    }

    pub fn fields_mut(&mut self) -> &mut [f64] {
        &mut self.h
    }

    pub fn couplings(&self) -> &[f64] {
        &self.j
    }

    pub fn h(&self, s: usize) -> f64 {
        self.h[s]
    }

    /// `J_k(left, right)` for distance `k` in `1..=k_max`.
    #[inline]
    pub fn j(&self, k: usize, left: usize, right: usize) -> f64 {
        self.j[((k - 1) * self.q + left) * self.q + right]
    }

    pub fn set_j(&mut self, k: usize, left: usize, right: usize, value: f64) {
        let q = self.q;
        self.j[((k - 1) * q + left) * q + right] = value;
    }

    /// The q×q block of `J_k`, row-major.
    pub fn j_block(&self, k: usize) -> &[f64] {
        let qq = self.q * self.q;
        &self.j[(k - 1) * qq..k * qq]
    }

    pub fn check_finite(&self) -> Result<()> {
        if let Some(i) = self.h.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("h[{i}] = {}", self.h[i])));
        }
        if let Some(i) = self.j.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("J entry {i} = {}", self.j[i])));
        }
        Ok(())
    }

    /// Fraction of coupling entries that are exactly zero.
    pub fn zero_coupling_fraction(&self) -> f64 {
        self.j.iter().filter(|&&v| v == 0.0).count() as f64 / self.j.len() as f64
    }

    /// JSON `{"q", "K_max", "h": [q], "J": [K_max][q][q]}` with every double
    /// written to 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        write!(out, "{{\"q\":{},\"K_max\":{},\"h\":", self.q, self.k_max).unwrap();
        write_row(&mut out, &self.h);
        out.push_str(",\"J\":[");
        for k in 1..=self.k_max {
            if k > 1 {
                out.push(',');
            }
            out.push('[');
            for (r, row) in self.j_block(k).chunks(self.q).enumerate() {
                if r > 0 {
                    out.push(',');
                }
                write_row(&mut out, row);
            }
            out.push(']');
        }
        out.push_str("]}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            q: usize,
            #[serde(rename = "K_max")]
            k_max: usize,
            h: Vec<f64>,
            #[serde(rename = "J")]
            j: Vec<Vec<Vec<f64>>>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| Error::format("model JSON", e))?;
        if raw.j.len() != raw.k_max || raw.j.iter().flatten().any(|row| row.len() != raw.q) {
            return Err(Error::Dimension("model J does not match q and K_max".into()));
        }
        if raw.j.iter().any(|m| m.len() != raw.q) {
            return Err(Error::Dimension("model J does not match q and K_max".into()));
        }
        let j: Vec<f64> = raw.j.into_iter().flatten().flatten().collect();
        ModelParams::new(raw.q, raw.k_max, raw.h, j)
    }
}

fn write_row(out: &mut String, values: &[f64]) {
    out.push('[');
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(out, "{v:.16e}").unwrap();
    }
    out.push(']');
}

/// Hamiltonian `H = -Σ h(s_i) - Σ_k Σ_{j-i=k} J_k(s_i, s_j)`.
pub fn energy(params: &ModelParams, seq: &PitchSequence) -> Result<f64> {
    if seq.q() != params.q() {
        return Err(Error::Dimension(format!(
            "sequence alphabet has {} symbols, model has {}",
            seq.q(),
            params.q()
        )));
    }
    Ok(energy_of(params, seq.data()))
}

/// [`energy`] on raw indices; indices must be below `q`.
pub fn energy_of(params: &ModelParams, states: &[usize]) -> f64 {
    let mut e = 0.0;
    for (i, &s) in states.iter().enumerate() {
        e -= params.h(s);
        for k in 1..=params.k_max().min(states.len() - 1 - i) {
            e -= params.j(k, s, states[i + k]);
        }
    }
    e
}

/// Unnormalized log-probabilities of the centre symbol given its neighbours.
///
/// `left` holds the symbols immediately before the site in sequence order (its
/// last element is `s_{-1}`); `right` the symbols immediately after (its first
/// element is `s_{+1}`). Contexts may be shorter than `k_max` at sequence
/// borders; longer contexts are truncated to `k_max`.
#[inline]
pub fn local_logits(params: &ModelParams, left: &[usize], right: &[usize], out: &mut [f64]) {
    let q = params.q();
    out.copy_from_slice(params.fields());
    let kl = left.len().min(params.k_max());
    for l in 1..=kl {
        let a = left[left.len() - l];
        let row = params.j_block(l);
        // J_l(a, σ): row a
        for (o, &v) in out.iter_mut().zip(&row[a * q..(a + 1) * q]) {
            *o += v;
        }
    }
    let kr = right.len().min(params.k_max());
    for l in 1..=kr {
        let b = right[l - 1];
        let block = params.j_block(l);
        // J_l(σ, b): column b
        for (sigma, o) in out.iter_mut().enumerate() {
            *o += block[sigma * q + b];
        }
    }
}

/// In-place softmax with max subtraction. Returns `log Z` of the input logits.
pub fn softmax_in_place(logits: &mut [f64]) -> f64 {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in logits.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in logits.iter_mut() {
        *v /= sum;
    }
    max + sum.ln()
}

/// `P(s_0 = σ | left, right)` for every σ.
pub fn conditional(params: &ModelParams, left: &[usize], right: &[usize]) -> Result<Vec<f64>> {
    let q = params.q();
    if let Some(&bad) = left.iter().chain(right).find(|&&s| s >= q) {
        return Err(Error::Dimension(format!("context symbol {bad} outside 0..{q}")));
    }
    let mut p = vec![0.0; q];
    local_logits(params, left, right, &mut p);
    if let Some(i) = p.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("local field for symbol {i} is {}", p[i])));
    }
    softmax_in_place(&mut p);
    Ok(p)
}

/// A q×q matrix of pair frequencies, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMatrix {
    q: usize,
    values: Vec<f64>,
}

impl PairMatrix {
    pub fn zeros(q: usize) -> Self {
        PairMatrix {
            q,
            values: vec![0.0; q * q],
        }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.q + col]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn transpose(&self) -> PairMatrix {
        let mut t = PairMatrix::zeros(self.q);
        for r in 0..self.q {
            for c in 0..self.q {
                t.values[c * self.q + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.values.chunks(self.q).map(|r| r.iter().sum()).collect()
    }

    pub fn frobenius_distance(&self, other: &PairMatrix) -> f64 {
        assert_eq!(self.q, other.q, "matrix sizes differ");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Single and pair frequencies up to `k_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqStats {
    pub single: Vec<f64>,
    /// `pair[k-1]` holds `f_k`.
    pub pair: Vec<PairMatrix>,
}

impl FreqStats {
    pub fn from_sequence(seq: &PitchSequence, k_max: usize) -> Result<Self> {
        Ok(FreqStats {
            single: single_freq(seq),
            pair: (1..=k_max)
                .map(|k| pair_freq(seq, k))
                .collect::<Result<_>>()?,
        })
    }
}

/// `f(σ) = (1/N) Σ_i δ(σ, s_i)`.
pub fn single_freq(seq: &PitchSequence) -> Vec<f64> {
    let mut f = vec![0.0; seq.q()];
    for &s in seq.data() {
        f[s] += 1.0;
    }
    let n = seq.len() as f64;
    f.iter_mut().for_each(|v| *v /= n);
    f
}

/// `f_k(σ, σ') = (1/(N-k)) Σ_{j-i=k} δ(σ, s_i) δ(σ', s_j)`.
pub fn pair_freq(seq: &PitchSequence, k: usize) -> Result<PairMatrix> {
    if k == 0 || k >= seq.len() {
        return Err(Error::InvalidArgument(format!(
            "pair distance {k} must lie in 1..{} for a sequence of length {}",
            seq.len(),
            seq.len()
        )));
    }
    let q = seq.q();
    let data = seq.data();
    let mut m = PairMatrix::zeros(q);
    for i in 0..data.len() - k {
        m.values[data[i] * q + data[i + k]] += 1.0;
    }
    let norm = (data.len() - k) as f64;
    m.values.iter_mut().for_each(|v| *v /= norm);
    Ok(m)
}

const MAX_ENUMERATED_STATES: usize = 1 << 24;
const MAX_ENUMERATED_LENGTH: usize = 14;

fn check_enumerable(q: usize, n: usize) -> Result<usize> {
    let too_large = Error::StateSpaceTooLarge { q, n };
    if n == 0 || n > MAX_ENUMERATED_LENGTH {
        return Err(too_large);
    }
    let mut states = 1usize;
    for _ in 0..n {
        states = states.checked_mul(q).ok_or(Error::StateSpaceTooLarge { q, n })?;
        if states > MAX_ENUMERATED_STATES {
            return Err(too_large);
        }
    }
    Ok(states)
}

/// Decodes state number `code` into a length-`n` configuration, first
/// position most significant.
pub fn decode_state(mut code: usize, q: usize, n: usize) -> Vec<usize> {
    let mut s = vec![0; n];
    for slot in s.iter_mut().rev() {
        *slot = code % q;
        code /= q;
    }
    s
}

/// Inverse of [`decode_state`].
pub fn encode_state(states: &[usize], q: usize) -> usize {
    states.iter().fold(0, |acc, &s| acc * q + s)
}

/// Exact Boltzmann probabilities of all `q^n` configurations of a length-`n`
/// chain, indexed by [`encode_state`].
pub fn exact_distribution(params: &ModelParams, n: usize) -> Result<Vec<f64>> {
    let q = params.q();
    let states = check_enumerable(q, n)?;
    let mut logw: Vec<f64> = (0..states)
        .map(|code| -energy_of(params, &decode_state(code, q, n)))
        .collect();
    softmax_in_place(&mut logw);
    Ok(logw)
}

/// Position-averaged single and pair marginals of the exact distribution.
///
/// Averages run over the interior sites `k_max ..= n-1-k_max` (0-based): the
/// single marginal is averaged over those sites and `P_k` over pairs
/// `(i, i+k)` with `i` interior, so `Σ_σ' P_k(σ, σ') = P(σ)` holds exactly.
pub fn exact_marginals(params: &ModelParams, n: usize) -> Result<FreqStats> {
    let q = params.q();
    let k_max = params.k_max();
    if n < 2 * k_max + 1 {
        return Err(Error::TooShort {
            what: "exact marginals",
            needed: 2 * k_max + 1,
            got: n,
        });
    }
    let probs = exact_distribution(params, n)?;
    let interior = k_max..n - k_max;
    let sites = interior.len() as f64;
    let mut single = vec![0.0; q];
    let mut pair = vec![PairMatrix::zeros(q); k_max];
    for (code, &p) in probs.iter().enumerate() {
        let s = decode_state(code, q, n);
        for i in interior.clone() {
            single[s[i]] += p / sites;
            for k in 1..=k_max {
                pair[k - 1].values[s[i] * q + s[i + k]] += p / sites;
            }
        }
    }
    Ok(FreqStats { single, pair })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use proptest::prelude::*;

    fn seq(data: &[usize], q: usize) -> PitchSequence {
        let alphabet = crate::corpus::Alphabet::new((0..q as i64).collect()).unwrap();
        PitchSequence::new(data.to_vec(), std::sync::Arc::new(alphabet)).unwrap()
    }

    fn random_params(q: usize, k_max: usize, scale: f64, seed: u64) -> ModelParams {
        let mut rng = SeededRng::new(seed);
        let theta: Vec<f64> = (0..q + k_max * q * q)
            .map(|_| scale * (2.0 * rng.unit() - 1.0))
            .collect();
        ModelParams::from_flat(q, k_max, &theta).unwrap()
    }

    #[test]
    fn zero_params_energy_is_zero() {
        let p = ModelParams::zeros(3, 2);
        assert_eq!(energy(&p, &seq(&[0, 2, 1, 1], 3)).unwrap(), 0.0);
    }

    #[test]
    fn adjacent_pair_energy() {
        let mut p = ModelParams::zeros(2, 1);
        p.set_j(1, 0, 0, 1.0);
        assert_eq!(energy(&p, &seq(&[0, 0, 0], 2)).unwrap(), -2.0);
    }

    #[test]
    fn single_site_energy() {
        let p = ModelParams::new(2, 1, vec![0.3, -1.2], vec![5.0; 4]).unwrap();
        assert_eq!(energy(&p, &seq(&[1], 2)).unwrap(), 1.2);
    }

    #[test]
    fn energy_alphabet_mismatch() {
        let p = ModelParams::zeros(3, 1);
        assert!(matches!(energy(&p, &seq(&[0, 1], 2)), Err(Error::Dimension(_))));
    }

    #[test]
    fn zero_params_conditional_is_uniform() {
        let p = ModelParams::zeros(4, 3);
        let c = conditional(&p, &[0, 1, 2], &[3, 3, 1]).unwrap();
        for v in c {
            assert!((v - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn two_state_conditional() {
        let mut p = ModelParams::zeros(2, 1);
        p.set_j(1, 0, 0, 1.0);
        let c = conditional(&p, &[0], &[0]).unwrap();
        let e2 = 2f64.exp();
        assert!((c[0] - e2 / (e2 + 1.0)).abs() < 1e-15);
        assert!((c[0] - 0.880797).abs() < 1e-6);
    }

    #[test]
    fn conditional_rejects_non_finite() {
        let mut p = ModelParams::zeros(2, 1);
        p.set_j(1, 0, 1, f64::NAN);
        assert!(matches!(conditional(&p, &[0], &[]), Err(Error::NonFinite(_))));
    }

    #[test]
    fn conditional_handles_huge_couplings() {
        let mut p = ModelParams::zeros(3, 1);
        p.set_j(1, 0, 1, 800.0);
        let c = conditional(&p, &[0], &[]).unwrap();
        assert!((c[1] - 1.0).abs() < 1e-12);
        assert!(c.iter().all(|v| v.is_finite()));
    }

    /// Brute-force conditional for the middle site of a length-4 chain.
    #[test]
    fn conditional_matches_enumeration() {
        let (q, n) = (2, 4);
        let p = random_params(q, 1, 1.0, 11);
        let probs = exact_distribution(&p, n).unwrap();
        for code in 0..q.pow(n as u32) {
            let s = decode_state(code, q, n);
            for site in 0..n {
                let mut joint = vec![0.0; q];
                for (sigma, slot) in joint.iter_mut().enumerate() {
                    let mut t = s.clone();
                    t[site] = sigma;
                    *slot = probs[encode_state(&t, q)];
                }
                let total: f64 = joint.iter().sum();
                let c = conditional(&p, &s[..site], &s[site + 1..]).unwrap();
                for sigma in 0..q {
                    assert!((c[sigma] - joint[sigma] / total).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn frequencies() {
        let f = single_freq(&seq(&[0, 0, 1], 2));
        assert!((f[0] - 2.0 / 3.0).abs() < 1e-15 && (f[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(single_freq(&seq(&[2, 2, 2], 3)), vec![0.0, 0.0, 1.0]);

        let s = seq(&[0, 1, 0, 1], 2);
        let f1 = pair_freq(&s, 1).unwrap();
        assert!((f1.get(0, 1) - 2.0 / 3.0).abs() < 1e-15);
        assert!((f1.get(1, 0) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!((f1.get(0, 0), f1.get(1, 1)), (0.0, 0.0));
        let f2 = pair_freq(&s, 2).unwrap();
        assert_eq!(f2.values(), &[0.5, 0.0, 0.0, 0.5]);
        assert!(pair_freq(&s, 4).is_err());
        assert!(pair_freq(&s, 0).is_err());

        let pal = seq(&[0, 1, 2, 1, 0], 3);
        for k in 1..4 {
            let m = pair_freq(&pal, k).unwrap();
            assert_eq!(m, m.transpose());
        }
    }

    #[test]
    fn uniform_single_frequencies() {
        let mut rng = SeededRng::new(5);
        let data: Vec<usize> = (0..1_000_000).map(|_| rng.index(4)).collect();
        for v in single_freq(&seq(&data, 4)) {
            assert!((v - 0.25).abs() < 0.002);
        }
    }

    #[test]
    fn exact_marginals_zero_params() {
        let stats = exact_marginals(&ModelParams::zeros(3, 2), 6).unwrap();
        for v in &stats.single {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        for m in &stats.pair {
            for v in m.values() {
                assert!((v - 1.0 / 9.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exact_marginals_independent_sites() {
        let p = ModelParams::new(2, 1, vec![2f64.ln(), 0.0], vec![0.0; 4]).unwrap();
        let stats = exact_marginals(&p, 3).unwrap();
        assert!((stats.single[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((stats.single[1] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn exact_marginals_refuses_large_spaces() {
        let p = ModelParams::zeros(2, 1);
        assert!(matches!(exact_marginals(&p, 15), Err(Error::StateSpaceTooLarge { .. })));
        let p = ModelParams::zeros(5, 1);
        assert!(matches!(exact_marginals(&p, 11), Err(Error::StateSpaceTooLarge { .. })));
    }

    #[test]
    fn model_json_round_trip_is_exact() {
        let p = random_params(3, 2, 3.0, 9);
        let text = p.to_json();
        assert!(text.starts_with("{\"q\":3,\"K_max\":2,\"h\":["));
        let back = ModelParams::from_json(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.to_json(), text);
        let zero = ModelParams::zeros(1, 1).to_json();
        assert_eq!(zero, "{\"q\":1,\"K_max\":1,\"h\":[0.0000000000000000e0],\"J\":[[[0.0000000000000000e0]]]}\n");
    }

    proptest! {
        #[test]
        fn conditional_normalized(seed in 0u64..10_000, q in 1usize..6, k in 1usize..4,
                                  nl in 0usize..4, nr in 0usize..4) {
            let p = random_params(q, k, 4.0, seed);
            let mut rng = SeededRng::new(seed ^ 0xabc);
            let left: Vec<usize> = (0..nl).map(|_| rng.index(q)).collect();
            let right: Vec<usize> = (0..nr).map(|_| rng.index(q)).collect();
            let c = conditional(&p, &left, &right).unwrap();
            prop_assert!((c.iter().sum::<f64>() - 1.0).abs() < 1e-12);

            let mut shifted = p.clone();
            shifted.fields_mut().iter_mut().for_each(|h| *h += 3.7);
            let c2 = conditional(&shifted, &left, &right).unwrap();
            for (a, b) in c.iter().zip(&c2) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn heat_bath_ratio_matches_energy(seed in 0u64..10_000, n in 1usize..9, site_pick in 0usize..100) {
            let (q, k) = (3, 2);
            let p = random_params(q, k, 1.5, seed);
            let mut rng = SeededRng::new(seed + 1);
            let mut s: Vec<usize> = (0..n).map(|_| rng.index(q)).collect();
            let site = site_pick % n;
            let lo = site.saturating_sub(k);
            let c = conditional(&p, &s[lo..site], &s[site + 1..(site + 1 + k).min(n)]).unwrap();
            s[site] = 0;
            let e0 = energy_of(&p, &s);
            for sigma in 1..q {
                s[site] = sigma;
                let ratio = c[sigma] / c[0];
                let expected = (-(energy_of(&p, &s) - e0)).exp();
                prop_assert!((ratio / expected - 1.0).abs() < 1e-10);
            }
        }

        #[test]
        fn pair_rows_track_single(data in prop::collection::vec(0usize..4, 10..300), k in 1usize..6) {
            prop_assume!(k < data.len());
            let s = seq(&data, 4);
            let f = single_freq(&s);
            let m = pair_freq(&s, k).unwrap();
            let total: f64 = m.values().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            let bound = k as f64 / (data.len() - k) as f64;
            for (r, fs) in m.row_sums().iter().zip(&f) {
                prop_assert!((r - fs).abs() <= bound + 1e-12);
            }
        }

        #[test]
        fn exact_marginal_rows_sum_to_single(seed in 0u64..1000) {
            let p = random_params(2, 2, 1.0, seed);
            let stats = exact_marginals(&p, 7).unwrap();
            prop_assert!((stats.single.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for m in &stats.pair {
                for (r, s) in m.row_sums().iter().zip(&stats.single) {
                    prop_assert!((r - s).abs() < 1e-12);
                }
            }
        }
    }
}
