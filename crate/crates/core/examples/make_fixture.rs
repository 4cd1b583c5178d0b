//! Writes the bundled structured melody to `fixtures/structured_melody.txt`.
//!
//! The melody walks a two-octave diatonic scale in 20-note phrases: a
//! five-note motif, the same motif again (usually verbatim, sometimes a step
//! higher or lower), a second motif starting near where the first ended, and
//! a cadence toward the tonic. Motifs are drawn from a fixed pool of 40 leaping
//! shapes.

use std::path::PathBuf;

use melodic_maxent::corpus::write_plain;
use melodic_maxent::rng::SeededRng;

const SCALE: [i64; 15] = [55, 57, 59, 60, 62, 64, 65, 67, 69, 71, 72, 74, 76, 77, 79];
const TOP: i64 = SCALE.len() as i64 - 1;
const MOTIF_LEN: usize = 5;
const MOTIFS: usize = 40;
const STEPS: [i64; 8] = [-4, -3, -2, -1, 1, 2, 3, 4];
const RESTATE_SHIFTS: [i64; 4] = [0, 0, 1, -1];
const TARGET_LEN: usize = 3000;
const SEED: u64 = 20_170_301;

fn motif(rng: &mut SeededRng) -> Vec<i64> {
    let mut m = vec![0];
    for _ in 1..MOTIF_LEN {
        let last = *m.last().unwrap();
        m.push(last + STEPS[rng.index(STEPS.len())]);
    }
    m
}

/// Appends `shape` starting at degree `start`, moved inside the scale if needed.
fn place(out: &mut Vec<usize>, shape: &[i64], start: i64) {
    let lo = -shape.iter().min().unwrap();
    let hi = TOP - shape.iter().max().unwrap();
    let base = if lo > hi { 7 } else { start.clamp(lo, hi) };
    out.extend(shape.iter().map(|d| (base + d).clamp(0, TOP) as usize));
}

fn cadence(rng: &mut SeededRng, from: usize) -> Vec<usize> {
    let tonic = if from >= 7 { 10 } else { 3 };
    let mut c = Vec::with_capacity(MOTIF_LEN);
    let mut d = from as i64;
    for i in 0..MOTIF_LEN {
        let remaining = (MOTIF_LEN - i) as i64;
        let gap = tonic - d;
        let step = if gap.abs() >= remaining { gap.signum() * 2 } else { gap.signum() };
        d = (d + if rng.unit() < 0.2 { 0 } else { step }).clamp(0, TOP);
        c.push(d as usize);
    }
    *c.last_mut().unwrap() = tonic as usize;
    c
}

fn main() {
    let mut rng = SeededRng::new(SEED);
    let motifs: Vec<Vec<i64>> = (0..MOTIFS).map(|_| motif(&mut rng)).collect();
    let mut degrees: Vec<usize> = Vec::new();
    while degrees.len() < TARGET_LEN {
        let mut p = Vec::new();
        let first = &motifs[rng.index(motifs.len())];
        let start = 3 + rng.index(9) as i64;
        place(&mut p, first, start);
        let again = p[0] as i64 + RESTATE_SHIFTS[rng.index(RESTATE_SHIFTS.len())];
        place(&mut p, first, again);
        let second = &motifs[rng.index(motifs.len())];
        let next = p[p.len() - 1] as i64 + RESTATE_SHIFTS[rng.index(RESTATE_SHIFTS.len())];
        place(&mut p, second, next);
        let end = cadence(&mut rng, p[p.len() - 1]);
        p.extend(end);
        degrees.extend(p);
    }
    degrees.truncate(TARGET_LEN);
    let labels: Vec<i64> = degrees.iter().map(|&d| SCALE[d]).collect();
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/structured_melody.txt");
    let text = format!("# structured melody, MIDI pitches\n{}", write_plain(&labels));
    std::fs::write(&path, text).expect("write fixture");
    println!("wrote {} notes to {}", labels.len(), path.display());
}
