//! LZ77-style cross-parsing of a target sequence `B` against a reference `A`.
//!
//! `B` is scanned left to right; at each position the longest prefix of the
//! remainder that occurs anywhere in `A` becomes a match (earliest source
//! position on ties), and a symbol absent from `A` becomes a literal. Matches
//! are found with a suffix automaton of `A`, so a parse costs `O(|A| + |B|)`.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

/// One token of a cross-parse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Token<T> {
    Match { source_pos: usize, length: usize },
    Literal { symbol: T },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossParse<T> {
    pub tokens: Vec<Token<T>>,
    pub reference_len: usize,
    pub target_len: usize,
    /// Longest common substring of reference and target.
    pub longest_common: usize,
}

impl<T: Copy> CrossParse<T> {
    pub fn match_lengths(&self) -> impl Iterator<Item = usize> + '_ {
        self.tokens.iter().filter_map(|t| match t {
            Token::Match { length, .. } => Some(*length),
            Token::Literal { .. } => None,
        })
    }

    pub fn match_count(&self) -> usize {
        self.match_lengths().count()
    }

    pub fn literal_count(&self) -> usize {
        self.tokens.len() - self.match_count()
    }

    /// Rebuilds `B` from the tokens and `A`.
    pub fn reconstruct(&self, reference: &[T]) -> Vec<T> {
        let mut out = Vec::with_capacity(self.target_len);
        for t in &self.tokens {
            match *t {
                Token::Match { source_pos, length } => {
                    out.extend_from_slice(&reference[source_pos..source_pos + length])
                }
                Token::Literal { symbol } => out.push(symbol),
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
struct State<T> {
    len: usize,
    link: Option<usize>,
    /// End position (exclusive) of the first occurrence of this state's strings.
    first_end: usize,
    next: HashMap<T, usize>,
}

/// Suffix automaton over a reference sequence.
#[derive(Debug, Clone)]
pub struct SuffixAutomaton<T> {
    states: Vec<State<T>>,
}

impl<T: Copy + Eq + Hash> SuffixAutomaton<T> {
    pub fn new(text: &[T]) -> Self {
        let mut states = Vec::with_capacity(2 * text.len() + 1);
        states.push(State {
            len: 0,
            link: None,
            first_end: 0,
            next: HashMap::new(),
        });
        let mut last = 0;
        for (i, &c) in text.iter().enumerate() {
            let cur = states.len();
            states.push(State {
                len: states[last].len + 1,
                link: None,
                first_end: i + 1,
                next: HashMap::new(),
            });
            let mut p = Some(last);
            while let Some(pi) = p {
                if states[pi].next.contains_key(&c) {
                    break;
                }
                states[pi].next.insert(c, cur);
                p = states[pi].link;
            }
            match p {
                None => states[cur].link = Some(0),
                Some(pi) => {
                    let qi = states[pi].next[&c];
                    if states[pi].len + 1 == states[qi].len {
                        states[cur].link = Some(qi);
                    } else {
                        let clone = states.len();
                        let mut cloned = states[qi].clone();
                        cloned.len = states[pi].len + 1;
                        states.push(cloned);
                        let mut p2 = Some(pi);
                        while let Some(pj) = p2 {
                            if states[pj].next.get(&c) != Some(&qi) {
                                break;
                            }
                            states[pj].next.insert(c, clone);
                            p2 = states[pj].link;
                        }
                        states[qi].link = Some(clone);
                        states[cur].link = Some(clone);
                    }
                }
            }
            last = cur;
        }
        SuffixAutomaton { states }
    }

    /// Longest prefix of `pattern` occurring in the reference, as
    /// `(length, earliest start)`. Length 0 means the first symbol is absent.
    pub fn longest_prefix_match(&self, pattern: &[T]) -> (usize, usize) {
        let mut state = 0;
        let mut len = 0;
        for c in pattern {
            match self.states[state].next.get(c) {
                Some(&s) => {
                    state = s;
                    len += 1;
                }
                None => break,
            }
        }
        if len == 0 {
            (0, 0)
        } else {
            (len, self.states[state].first_end - len)
        }
    }

    /// Length of the longest substring of `text` occurring in the reference.
    pub fn longest_common_substring(&self, text: &[T]) -> usize {
        let mut state = 0;
        let mut len = 0;
        let mut best = 0;
        for c in text {
            loop {
                if let Some(&s) = self.states[state].next.get(c) {
                    state = s;
                    len += 1;
                    break;
                }
                match self.states[state].link {
                    Some(l) => {
                        state = l;
                        len = self.states[l].len;
                    }
                    None => {
                        len = 0;
                        break;
                    }
                }
            }
            best = best.max(len);
        }
        best
    }
}

/// Greedy longest-match parse of `target` against `reference`.
pub fn cross_parse<T: Copy + Eq + Hash>(reference: &[T], target: &[T]) -> CrossParse<T> {
    let automaton = SuffixAutomaton::new(reference);
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < target.len() {
        let (length, source_pos) = automaton.longest_prefix_match(&target[pos..]);
        if length == 0 {
            tokens.push(Token::Literal {
                symbol: target[pos],
            });
            pos += 1;
        } else {
            tokens.push(Token::Match { source_pos, length });
            pos += length;
        }
    }
    CrossParse {
        tokens,
        reference_len: reference.len(),
        target_len: target.len(),
        longest_common: automaton.longest_common_substring(target),
    }
}

/// Bits to encode a match of `length` against a reference of `reference_len`:
/// one flag bit, `log2 |A|` for the position and an Elias-gamma length.
pub fn match_cost_bits(reference_len: usize, length: usize) -> f64 {
    let gamma = 2 * (usize::BITS - 1 - length.leading_zeros()) as usize + 1;
    1.0 + (reference_len as f64).log2() + gamma as f64
}

/// Bits to encode a literal: one flag bit plus `log2 q`.
pub fn literal_cost_bits(q: usize) -> f64 {
    1.0 + (q as f64).log2()
}

/// Bits per symbol of `B` under the cost model above, for an alphabet of size `q`.
pub fn cross_entropy<T: Copy>(parse: &CrossParse<T>, q: usize) -> f64 {
    let bits: f64 = parse
        .tokens
        .iter()
        .map(|t| match *t {
            Token::Match { length, .. } => match_cost_bits(parse.reference_len, length),
            Token::Literal { .. } => literal_cost_bits(q),
        })
        .sum();
    bits / parse.target_len as f64
}

/// Mean match length; literals are not matches. Zero without matches.
pub fn acs<T: Copy>(parse: &CrossParse<T>) -> f64 {
    let (sum, count) = parse
        .match_lengths()
        .fold((0usize, 0usize), |(s, c), l| (s + l, c + 1));
    if count == 0 {
        0.0
    } else {
        sum as f64 / count as f64
    }
}

/// Longest common substring of `A` and `B`. Never shorter than the longest
/// greedy match, and sometimes longer: a greedy match can end inside the
/// longest shared run.
pub fn lcs<T: Copy>(parse: &CrossParse<T>) -> usize {
    parse.longest_common
}

pub fn max_match_length<T: Copy>(parse: &CrossParse<T>) -> usize {
    parse.match_lengths().max().unwrap_or(0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub cross_entropy_bits_per_symbol: f64,
    pub acs: f64,
    pub lcs: usize,
    pub match_count: usize,
    pub literal_count: usize,
}

impl SimilarityReport {
    pub const CSV_HEADER: &'static str = "a_id,b_id,model,k_max,seed,cross_entropy,acs,lcs";

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One CSV row without trailing newline.
    pub fn csv_row(&self, a_id: &str, b_id: &str, model: &str, k_max: Option<usize>, seed: Option<u64>) -> String {
        let opt = |v: Option<String>| v.unwrap_or_default();
        format!(
            "{},{},{},{},{},{:.12},{:.12},{}",
            a_id,
            b_id,
            model,
            opt(k_max.map(|k| k.to_string())),
            opt(seed.map(|k| k.to_string())),
            self.cross_entropy_bits_per_symbol,
            self.acs,
            self.lcs
        )
    }
}

/// Parses `target` against `reference` and summarizes the parse. `q` is the
/// alphabet size used to price literals.
pub fn similarity<T: Copy + Eq + Hash>(reference: &[T], target: &[T], q: usize) -> SimilarityReport {
    let parse = cross_parse(reference, target);
    SimilarityReport {
        cross_entropy_bits_per_symbol: cross_entropy(&parse, q),
        acs: acs(&parse),
        lcs: lcs(&parse),
        match_count: parse.match_count(),
        literal_count: parse.literal_count(),
    }
}

/// Quadratic dynamic-programming longest common substring length.
pub fn lcs_dynamic<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    let mut best = 0;
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { 0 };
            best = best.max(cur[j + 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Naive greedy parse with explicit search, used as an oracle.
    fn naive_parse(a: &[u8], b: &[u8]) -> Vec<Token<u8>> {
        let mut tokens = Vec::new();
        let mut pos = 0;
        while pos < b.len() {
            let mut best = (0, 0);
            for start in 0..a.len() {
                let mut l = 0;
                while start + l < a.len() && pos + l < b.len() && a[start + l] == b[pos + l] {
                    l += 1;
                }
                if l > best.0 {
                    best = (l, start);
                }
            }
            if best.0 == 0 {
                tokens.push(Token::Literal { symbol: b[pos] });
                pos += 1;
            } else {
                tokens.push(Token::Match { source_pos: best.1, length: best.0 });
                pos += best.0;
            }
        }
        tokens
    }

    #[test]
    fn worked_example() {
        let a = [1, 2, 3, 1, 2];
        let b = [1, 2, 3, 2, 3];
        let p = cross_parse(&a, &b);
        assert_eq!(
            p.tokens,
            vec![
                Token::Match { source_pos: 0, length: 3 },
                Token::Match { source_pos: 1, length: 2 },
            ]
        );
        assert_eq!(acs(&p), 2.5);
        assert_eq!(lcs(&p), 3);
    }

    #[test]
    fn self_match() {
        let a: Vec<u32> = (0..50).map(|i| i * 7 % 13).collect();
        let p = cross_parse(&a, &a);
        assert_eq!(p.tokens, vec![Token::Match { source_pos: 0, length: 50 }]);
        assert_eq!(lcs(&p), 50);
    }

    #[test]
    fn literals_for_absent_symbols() {
        let p = cross_parse(&[1, 2], &[9, 1, 9]);
        assert_eq!(p.literal_count(), 2);
        assert_eq!(p.match_count(), 1);
        assert_eq!(acs(&p), 1.0);
        let none = cross_parse(&[1, 2], &[7, 8, 9]);
        assert_eq!((acs(&none), lcs(&none)), (0.0, 0));
        // all literals: exactly log2 q + 1 bits per symbol
        assert!((cross_entropy(&none, 8) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn self_match_cost() {
        let a: Vec<u32> = (0..1024).map(|i| (i * 31 + i / 7) % 33).collect();
        let p = cross_parse(&a, &a);
        assert_eq!(p.tokens.len(), 1);
        let h = cross_entropy(&p, 33);
        assert!((h - 32.0 / 1024.0).abs() < 1e-12);
        assert!((h - 0.031).abs() < 5e-4);
    }

    #[test]
    fn elias_gamma_lengths() {
        assert_eq!(match_cost_bits(1, 1), 2.0);
        assert_eq!(match_cost_bits(1, 2), 4.0);
        assert_eq!(match_cost_bits(1, 3), 4.0);
        assert_eq!(match_cost_bits(1, 4), 6.0);
        assert_eq!(match_cost_bits(8, 1024), 1.0 + 3.0 + 21.0);
    }

    #[test]
    fn corruption_raises_cross_entropy() {
        let a: Vec<i64> = (0..2000).map(|i| (i * 13 % 17 + i / 100) % 12).collect();
        let b = a[300..1300].to_vec();
        let mut corrupted = b.clone();
        for i in (0..corrupted.len()).step_by(10) {
            corrupted[i] = 99;
        }
        let q = 13;
        let clean = cross_entropy(&cross_parse(&a, &b), q);
        let dirty = cross_entropy(&cross_parse(&a, &corrupted), q);
        assert!(dirty > clean, "{dirty} <= {clean}");
    }

    #[test]
    fn lcs_can_exceed_longest_greedy_match() {
        let a = [1, 2, 2, 3, 4, 5];
        let b = [1, 2, 3, 4, 5];
        let p = cross_parse(&a, &b);
        assert_eq!(max_match_length(&p), 3);
        assert_eq!(lcs(&p), 4);
    }

    #[test]
    fn csv_row_layout() {
        let r = similarity(&[1, 2, 3, 1, 2], &[1, 2, 3, 2, 3], 3);
        let row = r.csv_row("a", "b", "fo", Some(5), None);
        assert_eq!(row.split(',').count(), SimilarityReport::CSV_HEADER.split(',').count());
        assert!(row.starts_with("a,b,fo,5,,"));
        assert!(row.ends_with(",2.500000000000,3"));
        let back: SimilarityReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn lcs_dynamic_small() {
        assert_eq!(lcs_dynamic(b"abcde", b"xbcdy"), 3);
        assert_eq!(lcs_dynamic(b"abc", b"xyz"), 0);
        assert_eq!(lcs_dynamic::<u8>(b"", b"x"), 0);
    }

    proptest! {
        #[test]
        fn parse_invariants(a in prop::collection::vec(0u8..6, 1..120),
                            b in prop::collection::vec(0u8..8, 1..120)) {
            let p = cross_parse(&a, &b);
            prop_assert_eq!(p.reconstruct(&a), b.clone());
            prop_assert_eq!(&p.tokens, &naive_parse(&a, &b));
            for t in &p.tokens {
                match *t {
                    Token::Match { source_pos, length } => {
                        prop_assert!(length >= 1 && source_pos + length <= a.len());
                    }
                    Token::Literal { symbol } => prop_assert!(!a.contains(&symbol)),
                }
            }
            let r = similarity(&a, &b, 8);
            prop_assert_eq!(r.lcs, lcs_dynamic(&a, &b));
            prop_assert!(max_match_length(&p) <= r.lcs);
            prop_assert!(0.0 <= r.acs && r.acs <= r.lcs as f64);
            prop_assert!(r.lcs <= a.len().min(b.len()));
            prop_assert_eq!(r.lcs == 0, !b.iter().any(|s| a.contains(s)));
        }
    }
}
