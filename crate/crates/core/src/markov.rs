//! Fixed-order and variable-order Markov baselines.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::corpus::{Alphabet, PitchSequence};
use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Next-symbol counts for one context, in ascending symbol order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Continuations {
    pub next: Vec<usize>,
    pub counts: Vec<u64>,
}

impl Continuations {
    fn add(&mut self, symbol: usize) {
        match self.next.binary_search(&symbol) {
            Ok(i) => self.counts[i] += 1,
            Err(i) => {
                self.next.insert(i, symbol);
                self.counts.insert(i, 1);
            }
        }
    }

    /// Number of distinct continuation symbols.
    pub fn distinct(&self) -> usize {
        self.next.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn probability(&self, symbol: usize) -> f64 {
        match self.next.binary_search(&symbol) {
            Ok(i) => self.counts[i] as f64 / self.total() as f64,
            Err(_) => 0.0,
        }
    }

    fn draw(&self, rng: &mut SeededRng) -> usize {
        self.next[rng.categorical_counts(&self.counts)]
    }
}

/// Order-`k` transition counts: each observed k-gram maps to the multiset of
/// symbols that followed it.
#[derive(Debug, Clone)]
pub struct FixedOrderModel {
    order: usize,
    alphabet: Arc<Alphabet>,
    table: BTreeMap<Vec<usize>, Continuations>,
    /// Occurrence counts of every corpus k-gram, used for (re)starts.
    starts: Vec<(Vec<usize>, u64)>,
}

pub fn fit_fo(corpus: &PitchSequence, order: usize) -> Result<FixedOrderModel> {
    let data = corpus.data();
    if data.len() < order + 1 {
        return Err(Error::TooShort {
            what: "fixed-order Markov fit",
            needed: order + 1,
            got: data.len(),
        });
    }
    let mut table: BTreeMap<Vec<usize>, Continuations> = BTreeMap::new();
    for i in order..data.len() {
        table
            .entry(data[i - order..i].to_vec())
            .or_default()
            .add(data[i]);
    }
    let mut starts: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    for w in data.windows(order.max(1)).take(data.len() - order + 1) {
        *starts.entry(w[..order].to_vec()).or_default() += 1;
    }
    Ok(FixedOrderModel {
        order,
        alphabet: corpus.alphabet().clone(),
        table,
        starts: starts.into_iter().collect(),
    })
}

impl FixedOrderModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn continuations(&self, context: &[usize]) -> Option<&Continuations> {
        self.table.get(context)
    }

    /// `P(next | context)`, zero for unseen contexts.
    pub fn probability(&self, context: &[usize], next: usize) -> f64 {
        self.table
            .get(context)
            .map_or(0.0, |c| c.probability(next))
    }

    pub fn transition_count(&self) -> u64 {
        self.table.values().map(Continuations::total).sum()
    }

    pub fn contexts(&self) -> impl Iterator<Item = (&Vec<usize>, &Continuations)> {
        self.table.iter()
    }

    fn draw_start(&self, rng: &mut SeededRng) -> &[usize] {
        let counts: Vec<u64> = self.starts.iter().map(|(_, c)| *c).collect();
        &self.starts[rng.categorical_counts(&counts)].0
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Entry<'a> {
            context: &'a [usize],
            next: &'a [usize],
            counts: &'a [u64],
        }
        #[derive(Serialize)]
        struct Dump<'a> {
            order: usize,
            symbols: &'a [i64],
            transitions: Vec<Entry<'a>>,
        }
        let dump = Dump {
            order: self.order,
            symbols: self.alphabet.symbols(),
            transitions: self
                .table
                .iter()
                .map(|(k, c)| Entry {
                    context: k,
                    next: &c.next,
                    counts: &c.counts,
                })
                .collect(),
        };
        serde_json::to_string(&dump).expect("model dump serializes") + "\n"
    }
}

/// Generates `n` symbols from a uniformly chosen corpus k-gram, restarting
/// from a fresh k-gram whenever the current context was never continued.
pub fn generate_fo(model: &FixedOrderModel, n: usize, seed: u64) -> Result<PitchSequence> {
    if n == 0 {
        return Err(Error::InvalidArgument("output length must be at least 1".into()));
    }
    let mut rng = SeededRng::new(seed);
    let k = model.order;
    let mut out: Vec<usize> = Vec::with_capacity(n + k);
    out.extend_from_slice(model.draw_start(&mut rng));
    while out.len() < n {
        let context = &out[out.len() - k..];
        match model.table.get(context) {
            Some(c) => {
                let s = c.draw(&mut rng);
                out.push(s);
            }
            None => {
                let restart = model.draw_start(&mut rng).to_vec();
                out.extend_from_slice(&restart);
            }
        }
    }
    out.truncate(n);
    PitchSequence::new(out, model.alphabet.clone())
}

#[derive(Debug, Clone, Default)]
struct TrieNode {
    continuations: Continuations,
    /// Keyed by the symbol one step further back in time.
    children: BTreeMap<usize, usize>,
}

/// Suffix trie of contexts up to length `k_max - 1`; the node reached by
/// reading a history backwards holds the continuation counts of that context.
#[derive(Debug, Clone)]
pub struct VariableOrderModel {
    k_max: usize,
    min_continuations: usize,
    alphabet: Arc<Alphabet>,
    nodes: Vec<TrieNode>,
}

/// Context order chosen for one emitted symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VoStep {
    pub order: usize,
    pub distinct_continuations: usize,
}

pub const DEFAULT_MIN_CONTINUATIONS: usize = 3;

pub fn fit_vo(corpus: &PitchSequence, k_max: usize, min_continuations: usize) -> Result<VariableOrderModel> {
    let data = corpus.data();
    if data.len() < 2 {
        return Err(Error::TooShort {
            what: "variable-order Markov fit",
            needed: 2,
            got: data.len(),
        });
    }
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    let mut nodes = vec![TrieNode::default()];
    for i in 0..data.len() {
        let next = data[i];
        let mut node = 0;
        nodes[0].continuations.add(next);
        for d in 1..=i.min(k_max - 1) {
            let sym = data[i - d];
            node = match nodes[node].children.get(&sym) {
                Some(&child) => child,
                None => {
                    nodes.push(TrieNode::default());
                    let child = nodes.len() - 1;
                    nodes[node].children.insert(sym, child);
                    child
                }
            };
            nodes[node].continuations.add(next);
        }
    }
    Ok(VariableOrderModel {
        k_max,
        min_continuations,
        alphabet: corpus.alphabet().clone(),
        nodes,
    })
}

impl VariableOrderModel {
    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn min_continuations(&self) -> usize {
        self.min_continuations
    }

    /// Corpus continuations of `context` (sequence order, most recent last).
    pub fn continuations(&self, context: &[usize]) -> Option<&Continuations> {
        if context.len() >= self.k_max {
            return None;
        }
        let mut node = 0;
        for &sym in context.iter().rev() {
            node = *self.nodes[node].children.get(&sym)?;
        }
        Some(&self.nodes[node].continuations)
    }

    /// Largest order `k < k_max` whose context (the last `k` symbols of
    /// `history`) has strictly more than `min_continuations` distinct
    /// continuations; 0 otherwise.
    pub fn select(&self, history: &[usize]) -> (VoStep, &Continuations) {
        let mut best = (0, 0usize);
        let mut node = 0;
        for d in 1..=history.len().min(self.k_max - 1) {
            match self.nodes[node].children.get(&history[history.len() - d]) {
                Some(&child) => node = child,
                None => break,
            }
            if self.nodes[node].continuations.distinct() > self.min_continuations {
                best = (d, node);
            }
        }
        let cont = &self.nodes[best.1].continuations;
        (
            VoStep {
                order: best.0,
                distinct_continuations: cont.distinct(),
            },
            cont,
        )
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Entry {
            context: Vec<usize>,
            next: Vec<usize>,
            counts: Vec<u64>,
        }
        #[derive(Serialize)]
        struct Dump<'a> {
            k_max: usize,
            min_continuations: usize,
            symbols: &'a [i64],
            contexts: Vec<Entry>,
        }
        let mut contexts = Vec::new();
        let mut stack = vec![(0usize, Vec::<usize>::new())];
        while let Some((node, back)) = stack.pop() {
            let c = &self.nodes[node].continuations;
            contexts.push(Entry {
                context: back.iter().rev().copied().collect(),
                next: c.next.clone(),
                counts: c.counts.clone(),
            });
            for (&sym, &child) in self.nodes[node].children.iter().rev() {
                let mut b = back.clone();
                b.push(sym);
                stack.push((child, b));
            }
        }
        let dump = Dump {
            k_max: self.k_max,
            min_continuations: self.min_continuations,
            symbols: self.alphabet.symbols(),
            contexts,
        };
        serde_json::to_string(&dump).expect("model dump serializes") + "\n"
    }
}

/// Generates `n` symbols, choosing the context order afresh at every step.
/// Returns the sequence and the per-step order log.
pub fn generate_vo(model: &VariableOrderModel, n: usize, seed: u64) -> Result<(PitchSequence, Vec<VoStep>)> {
    if n == 0 {
        return Err(Error::InvalidArgument("output length must be at least 1".into()));
    }
    let mut rng = SeededRng::new(seed);
    let mut out = Vec::with_capacity(n);
    let mut log = Vec::with_capacity(n);
    while out.len() < n {
        let (step, cont) = model.select(&out);
        debug_assert!(step.order == 0 || step.distinct_continuations > model.min_continuations);
        let s = cont.draw(&mut rng);
        out.push(s);
        log.push(step);
    }
    Ok((PitchSequence::new(out, model.alphabet.clone())?, log))
}
