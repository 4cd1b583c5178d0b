//! Corpus ingestion, alphabets, interval encoding and training windows.

use std::collections::HashMap;
use std::io::Read;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bijection between raw symbol labels and dense indices `0..q`, in order of
/// first occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<i64>,
    index: HashMap<i64, usize>,
}

#[derive(Serialize, Deserialize)]
struct AlphabetJson {
    symbols: Vec<i64>,
}

impl Alphabet {
    /// Builds an alphabet from labels in index order. Labels must be unique.
    pub fn new(symbols: Vec<i64>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, &s) in symbols.iter().enumerate() {
            if index.insert(s, i).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate alphabet symbol {s}"
                )));
            }
        }
        Ok(Alphabet { symbols, index })
    }

    /// Alphabet of the distinct labels in `labels`, ordered by first occurrence.
    pub fn from_labels(labels: &[i64]) -> Result<Self> {
        let mut seen = HashMap::new();
        let mut symbols = Vec::new();
        for &l in labels {
            seen.entry(l).or_insert_with(|| {
                symbols.push(l);
                symbols.len() - 1
            });
        }
        Alphabet::new(symbols)
    }

    /// This alphabet followed by any labels of `labels` it does not yet contain.
    pub fn extended_with(&self, labels: &[i64]) -> Alphabet {
        let mut symbols = self.symbols.clone();
        let mut index = self.index.clone();
        for &l in labels {
            if let std::collections::hash_map::Entry::Vacant(e) = index.entry(l) {
                e.insert(symbols.len());
                symbols.push(l);
            }
        }
        Alphabet { symbols, index }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, label: i64) -> Option<usize> {
        self.index.get(&label).copied()
    }

    pub fn label(&self, index: usize) -> Option<i64> {
        self.symbols.get(index).copied()
    }

    pub fn symbols(&self) -> &[i64] {
        &self.symbols
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(&AlphabetJson {
            symbols: self.symbols.clone(),
        })
        .expect("alphabet serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: AlphabetJson =
            serde_json::from_str(text).map_err(|e| Error::format("alphabet JSON", e))?;
        Alphabet::new(raw.symbols)
    }
}

/// A symbol sequence of dense alphabet indices.
#[derive(Debug, Clone, PartialEq)]
pub struct PitchSequence {
    data: Vec<usize>,
    alphabet: Arc<Alphabet>,
}

impl PitchSequence {
    pub fn new(data: Vec<usize>, alphabet: Arc<Alphabet>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if let Some(&bad) = data.iter().find(|&&s| s >= alphabet.len()) {
            return Err(Error::Dimension(format!(
                "index {bad} outside alphabet of size {}",
                alphabet.len()
            )));
        }
        Ok(PitchSequence { data, alphabet })
    }

    /// Re-indexes raw labels onto a fresh first-occurrence alphabet.
    pub fn from_labels(labels: &[i64]) -> Result<Self> {
        let alphabet = Arc::new(Alphabet::from_labels(labels)?);
        Self::with_alphabet(labels, alphabet)
    }

    /// Indexes raw labels with an existing alphabet.
    pub fn with_alphabet(labels: &[i64], alphabet: Arc<Alphabet>) -> Result<Self> {
        let data = labels
            .iter()
            .map(|&l| alphabet.index_of(l).ok_or(Error::UnknownSymbol(l)))
            .collect::<Result<Vec<_>>>()?;
        PitchSequence::new(data, alphabet)
    }

    pub fn data(&self) -> &[usize] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Alphabet size q.
    pub fn q(&self) -> usize {
        self.alphabet.len()
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn labels(&self) -> Vec<i64> {
        self.data.iter().map(|&i| self.alphabet.symbols[i]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusFormat {
    /// Whitespace-separated integers (MIDI pitches or intervals).
    PlainIntegers,
    /// Scientific pitch notation such as `C4`, `F#3`, `Bb2`, mapped to MIDI numbers.
    NoteNames,
}

/// Reads a corpus, skipping comments (from a token starting with `#` to the
/// end of its line), and re-indexes it by first occurrence.
pub fn load_corpus<R: Read>(mut source: R, format: CorpusFormat) -> Result<PitchSequence> {
    let mut text = String::new();
    source
        .read_to_string(&mut text)
        .map_err(|e| Error::io("<corpus>", e))?;
    let labels = parse_tokens(&text, format)?;
    if labels.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    PitchSequence::from_labels(&labels)
}

/// Parses the raw labels of a corpus text without building an alphabet.
pub fn parse_tokens(text: &str, format: CorpusFormat) -> Result<Vec<i64>> {
    let mut labels = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let mut offset = 0;
        for token in line.split_whitespace() {
            if token.starts_with('#') {
                break;
            }
            // column of the token start, 1-based, in characters
            let byte_pos = line[offset..].find(token).unwrap() + offset;
            offset = byte_pos + token.len();
            let column = line[..byte_pos].chars().count() + 1;
            let parsed = match format {
                CorpusFormat::PlainIntegers => token.parse::<i64>().map_err(|_| {
                    format!("expected an integer, found {token:?}")
                }),
                CorpusFormat::NoteNames => parse_note_name(token),
            };
            match parsed {
                Ok(v) => labels.push(v),
                Err(message) => {
                    return Err(Error::Parse {
                        line: line_no + 1,
                        column,
                        message,
                    })
                }
            }
        }
    }
    Ok(labels)
}

/// Scientific pitch notation to MIDI number (`C4` = 60, `C-1` = 0).
pub fn parse_note_name(token: &str) -> std::result::Result<i64, String> {
    let bad = || format!("expected a note name like C4 or F#3, found {token:?}");
    let mut chars = token.char_indices().peekable();
    let (_, letter) = chars.next().ok_or_else(bad)?;
    let pitch_class: i64 = match letter.to_ascii_uppercase() {
        'C' => 0,
        'D' => 2,
        'E' => 4,
        'F' => 5,
        'G' => 7,
        'A' => 9,
        'B' => 11,
        _ => return Err(bad()),
    };
    let mut accidental = 0i64;
    let mut rest_start = token.len();
    while let Some(&(pos, c)) = chars.peek() {
        match c {
            '#' => accidental += 1,
            'b' => accidental -= 1,
            _ => {
                rest_start = pos;
                break;
            }
        }
        chars.next();
    }
    let octave_str = &token[rest_start..];
    if octave_str.is_empty() {
        return Err(bad());
    }
    let octave: i64 = octave_str.parse().map_err(|_| bad())?;
    let midi = 12 * (octave + 1) + pitch_class + accidental;
    if !(0..=127).contains(&midi) {
        return Err(format!("note {token:?} is outside the MIDI range 0..=127"));
    }
    Ok(midi)
}

/// MIDI number to a sharp-spelled note name.
pub fn note_name(midi: i64) -> String {
    const NAMES: [&str; 12] = [
        "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B",
    ];
    format!("{}{}", NAMES[midi.rem_euclid(12) as usize], midi.div_euclid(12) - 1)
}

/// Serializes raw labels in the plain-integers corpus format, 16 tokens per line.
pub fn write_plain(labels: &[i64]) -> String {
    let mut out = String::new();
    for chunk in labels.chunks(16) {
        let line: Vec<String> = chunk.iter().map(|l| l.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Successive differences of the raw labels, on a new interval alphabet.
pub fn to_intervals(seq: &PitchSequence) -> Result<PitchSequence> {
    if seq.len() < 2 {
        return Err(Error::TooShort {
            what: "interval encoding",
            needed: 2,
            got: seq.len(),
        });
    }
    let raw = seq.labels();
    let intervals: Vec<i64> = raw.windows(2).map(|w| w[1] - w[0]).collect();
    PitchSequence::from_labels(&intervals)
}

/// Inverse of interval encoding given the first pitch.
pub fn from_intervals(first: i64, intervals: &[i64]) -> Vec<i64> {
    let mut out = Vec::with_capacity(intervals.len() + 1);
    let mut current = first;
    out.push(current);
    for &d in intervals {
        current += d;
        out.push(current);
    }
    out
}

/// A window of `2 k_max + 1` consecutive symbols centred on one site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingSample {
    window: Vec<usize>,
    k_max: usize,
}

impl TrainingSample {
    pub fn new(window: Vec<usize>, k_max: usize) -> Result<Self> {
        if k_max == 0 || window.len() != 2 * k_max + 1 {
            return Err(Error::Dimension(format!(
                "window of length {} does not match k_max = {k_max}",
                window.len()
            )));
        }
        Ok(TrainingSample { window, k_max })
    }

    pub fn window(&self) -> &[usize] {
        &self.window
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn center(&self) -> usize {
        self.window[self.k_max]
    }

    /// `s_{-l}` for `l` in `1..=k_max`.
    pub fn left(&self, l: usize) -> usize {
        self.window[self.k_max - l]
    }

    /// `s_{+l}` for `l` in `1..=k_max`.
    pub fn right(&self, l: usize) -> usize {
        self.window[self.k_max + l]
    }

    /// Left context in sequence order, ending right before the centre.
    pub fn left_context(&self) -> &[usize] {
        &self.window[..self.k_max]
    }

    /// Right context in sequence order, starting right after the centre.
    pub fn right_context(&self) -> &[usize] {
        &self.window[self.k_max + 1..]
    }
}

/// All `N - 2 k_max` overlapping training windows of a sequence.
pub fn windows(seq: &PitchSequence, k_max: usize) -> Result<Vec<TrainingSample>> {
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be at least 1".into()));
    }
    let needed = 2 * k_max + 1;
    if seq.len() < needed {
        return Err(Error::TooShort {
            what: "training windows",
            needed,
            got: seq.len(),
        });
    }
    Ok(seq
        .data()
        .windows(needed)
        .map(|w| TrainingSample {
            window: w.to_vec(),
            k_max,
        })
        .collect())
}
