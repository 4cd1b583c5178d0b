//! Pattern-level comparisons between a corpus and a generated sequence.
//!
//! Sequences are compared through their raw labels, so a generated sequence
//! may use its own alphabet. Every table has a CSV emitter.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Alphabet, PitchSequence};
use crate::potts::{pair_freq, PairMatrix};
use crate::{Error, Result};

/// Counts of every length-`len` window (stride 1).
pub fn pattern_counts(labels: &[i64], len: usize) -> HashMap<Vec<i64>, u64> {
    let mut counts = HashMap::new();
    if len == 0 || len > labels.len() {
        return counts;
    }
    for w in labels.windows(len) {
        *counts.entry(w.to_vec()).or_insert(0) += 1;
    }
    counts
}

/// Pattern frequencies per length, normalized by `N - len + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternStats {
    pub by_length: Vec<BTreeMap<Vec<i64>, f64>>,
}

impl PatternStats {
    /// Lengths `1..=max_len`; lengths beyond the sequence give empty maps.
    pub fn from_sequence(seq: &PitchSequence, max_len: usize) -> Self {
        let labels = seq.labels();
        let by_length = (1..=max_len)
            .map(|l| {
                let counts = pattern_counts(&labels, l);
                let total: u64 = counts.values().sum();
                counts
                    .into_iter()
                    .map(|(p, c)| (p, c as f64 / total as f64))
                    .collect()
            })
            .collect();
        PatternStats { by_length }
    }

    pub fn length(&self, l: usize) -> Option<&BTreeMap<Vec<i64>, f64>> {
        l.checked_sub(1).and_then(|i| self.by_length.get(i))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub length: usize,
    /// 1-based.
    pub rank: usize,
    pub pattern: Vec<i64>,
    pub corpus_freq: f64,
    pub generated_freq: f64,
}

/// Rank-frequency table over patterns of length `1..=max_len` present in both
/// sequences. Both frequency columns are renormalized over that common set;
/// rows are ordered by descending corpus frequency, then by pattern.
pub fn pattern_freq_rank(corpus: &PitchSequence, generated: &PitchSequence, max_len: usize) -> Vec<RankRow> {
    let a = corpus.labels();
    let b = generated.labels();
    let limit = a.len().min(b.len());
    if max_len > limit {
        log::warn!("pattern length {max_len} exceeds sequence length; truncating to {limit}");
    }
    let per_length: Vec<Vec<RankRow>> = (1..=max_len.min(limit))
        .into_par_iter()
        .map(|l| rank_length(&a, &b, l))
        .collect();
    per_length.into_iter().flatten().collect()
}

fn rank_length(a: &[i64], b: &[i64], l: usize) -> Vec<RankRow> {
    let ca = pattern_counts(a, l);
    let cb = pattern_counts(b, l);
    let mut common: Vec<(Vec<i64>, u64, u64)> = ca
        .into_iter()
        .filter_map(|(p, n)| cb.get(&p).map(|&m| (p, n, m)))
        .collect();
    let total_a: u64 = common.iter().map(|c| c.1).sum();
    let total_b: u64 = common.iter().map(|c| c.2).sum();
    common.sort_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
    common
        .into_iter()
        .enumerate()
        .map(|(i, (pattern, n, m))| RankRow {
            length: l,
            rank: i + 1,
            pattern,
            corpus_freq: n as f64 / total_a as f64,
            generated_freq: m as f64 / total_b as f64,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InnovationRow {
    pub length: usize,
    pub n_corpus: usize,
    pub n_generated_d0: usize,
    pub n_generated_d1: usize,
    pub n_enumerated_d1: usize,
}

impl InnovationRow {
    pub fn ratio_d0(&self) -> f64 {
        ratio(self.n_generated_d0, self.n_corpus)
    }

    pub fn ratio_d1(&self) -> f64 {
        ratio(self.n_generated_d1, self.n_corpus)
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnovationCurve {
    pub rows: Vec<InnovationRow>,
}

impl InnovationCurve {
    pub fn row(&self, length: usize) -> Option<&InnovationRow> {
        self.rows.iter().find(|r| r.length == length)
    }
}

/// All patterns at Hamming distance exactly one from some corpus pattern,
/// substituting symbols of `symbols`, excluding the corpus patterns themselves.
pub fn enumerate_d1(corpus_patterns: &HashSet<Vec<i64>>, symbols: &[i64]) -> HashSet<Vec<i64>> {
    let mut out = HashSet::new();
    for p in corpus_patterns {
        let mut cand = p.clone();
        for i in 0..p.len() {
            for &x in symbols {
                if x == p[i] {
                    continue;
                }
                cand[i] = x;
                if !corpus_patterns.contains(&cand) {
                    out.insert(cand.clone());
                }
            }
            cand[i] = p[i];
        }
    }
    out
}

/// Distinct-pattern innovation counts for each requested length. Neighbours
/// are enumerated over the corpus alphabet; lengths longer than either
/// sequence are dropped with a warning.
pub fn hamming_counts(corpus: &PitchSequence, generated: &PitchSequence, lengths: &[usize]) -> Result<InnovationCurve> {
    if corpus.is_empty() || generated.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let a = corpus.labels();
    let b = generated.labels();
    let limit = a.len().min(b.len());
    let kept: Vec<usize> = lengths
        .iter()
        .copied()
        .filter(|&l| {
            let ok = l >= 1 && l <= limit;
            if !ok {
                log::warn!("skipping pattern length {l}: outside 1..={limit}");
            }
            ok
        })
        .collect();
    let symbols = corpus.alphabet().symbols().to_vec();
    let rows = kept
        .par_iter()
        .map(|&l| {
            let corpus_set: HashSet<Vec<i64>> = a.windows(l).map(<[i64]>::to_vec).collect();
            let generated_set: HashSet<Vec<i64>> = b.windows(l).map(<[i64]>::to_vec).collect();
            let enumerated = enumerate_d1(&corpus_set, &symbols);
            InnovationRow {
                length: l,
                n_corpus: corpus_set.len(),
                n_generated_d0: generated_set.intersection(&corpus_set).count(),
                n_generated_d1: generated_set.intersection(&enumerated).count(),
                n_enumerated_d1: enumerated.len(),
            }
        })
        .collect();
    Ok(InnovationCurve { rows })
}

/// Re-indexes `seq` onto `alphabet`, which must contain all its labels.
pub fn reindex(seq: &PitchSequence, alphabet: &Arc<Alphabet>) -> Result<PitchSequence> {
    PitchSequence::with_alphabet(&seq.labels(), Arc::clone(alphabet))
}

/// Corpus alphabet extended by any extra labels of `other`.
pub fn union_alphabet(corpus: &PitchSequence, other: &PitchSequence) -> Arc<Alphabet> {
    Arc::new(corpus.alphabet().extended_with(&other.labels()))
}

/// Distance-`k` pair matrix of `seq` on its own alphabet.
pub fn pair_matrix_report(seq: &PitchSequence, k: usize) -> Result<PairMatrix> {
    pair_freq(seq, k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixComparison {
    pub k: usize,
    pub corpus: PairMatrix,
    pub generated: PairMatrix,
    pub frobenius: f64,
}

/// Pair matrices of both sequences on a shared alphabet, with their distance.
pub fn compare_pair_matrices(corpus: &PitchSequence, generated: &PitchSequence, k: usize) -> Result<MatrixComparison> {
    let alphabet = union_alphabet(corpus, generated);
    let a = pair_freq(&reindex(corpus, &alphabet)?, k)?;
    let b = pair_freq(&reindex(generated, &alphabet)?, k)?;
    let frobenius = a.frobenius_distance(&b);
    Ok(MatrixComparison {
        k,
        corpus: a,
        generated: b,
        frobenius,
    })
}

/// Expected Frobenius distance between a pair matrix and its estimate from
/// `samples` multinomial draws: `sqrt(sum f(1-f) / samples)`.
pub fn multinomial_noise_floor(matrix: &PairMatrix, samples: usize) -> f64 {
    let var: f64 = matrix.values().iter().map(|f| f * (1.0 - f)).sum();
    (var / samples as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub k: usize,
    pub sigma: i64,
    pub sigma_prime: i64,
    pub corpus_freq: f64,
    pub model_freq: f64,
}

/// One point per (distance, symbol pair) for `k = 1..=k_max`, skipping pairs
/// absent from both sequences.
pub fn scatter_data(corpus: &PitchSequence, generated: &PitchSequence, k_max: usize) -> Result<Vec<ScatterPoint>> {
    if corpus.is_empty() || generated.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let alphabet = union_alphabet(corpus, generated);
    let a = reindex(corpus, &alphabet)?;
    let b = reindex(generated, &alphabet)?;
    let q = alphabet.len();
    let mut points = Vec::new();
    for k in 1..=k_max {
        let fa = pair_freq(&a, k)?;
        let fb = pair_freq(&b, k)?;
        for r in 0..q {
            for c in 0..q {
                let (x, y) = (fa.get(r, c), fb.get(r, c));
                if x == 0.0 && y == 0.0 {
                    continue;
                }
                points.push(ScatterPoint {
                    k,
                    sigma: alphabet.symbols()[r],
                    sigma_prime: alphabet.symbols()[c],
                    corpus_freq: x,
                    model_freq: y,
                });
            }
        }
    }
    Ok(points)
}

/// Pearson correlation; `None` for fewer than two points or zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n != y.len() || n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Ranks starting at 1, ties sharing their mean rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let mean = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = mean;
        }
        i = j + 1;
    }
    ranks
}

pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson(&average_ranks(x), &average_ranks(y))
}

fn join_pattern(p: &[i64]) -> String {
    p.iter().map(i64::to_string).collect::<Vec<_>>().join(" ")
}

pub fn rank_freq_csv(rows: &[RankRow]) -> String {
    let mut s = String::from("l,rank,pattern,corpus_freq,generated_freq\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{:.12e},{:.12e}",
            r.length,
            r.rank,
            join_pattern(&r.pattern),
            r.corpus_freq,
            r.generated_freq
        );
    }
    s
}

/// Rows `(k, row, col, value)` with raw labels for row and column.
pub fn matrix_csv(entries: &[(usize, &PairMatrix, &Alphabet)]) -> String {
    let mut s = String::from("k,row,col,value\n");
    for (k, m, alphabet) in entries {
        let q = m.q();
        for r in 0..q {
            for c in 0..q {
                let _ = writeln!(
                    s,
                    "{},{},{},{:.12e}",
                    k,
                    alphabet.symbols()[r],
                    alphabet.symbols()[c],
                    m.get(r, c)
                );
            }
        }
    }
    s
}

pub fn scatter_csv(points: &[ScatterPoint]) -> String {
    let mut s = String::from("k,sigma,sigma_prime,corpus_freq,model_freq\n");
    for p in points {
        let _ = writeln!(
            s,
            "{},{},{},{:.12e},{:.12e}",
            p.k, p.sigma, p.sigma_prime, p.corpus_freq, p.model_freq
        );
    }
    s
}

pub fn innovation_csv(curve: &InnovationCurve) -> String {
    let mut s = String::from("l,n_corpus,n_d0,n_d1,n_enum_d1\n");
    for r in &curve.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.length, r.n_corpus, r.n_generated_d0, r.n_generated_d1, r.n_enumerated_d1
        );
    }
    s
}
