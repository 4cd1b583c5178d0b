//! Pairwise maximum-entropy (Potts) models of monophonic melodies.
//!
//! The crate learns a translation-invariant model with one local field and one
//! interaction matrix per distance `k = 1..=k_max`, fits it by L1-regularized
//! pseudo-likelihood, samples new melodies with a heat-bath chain, and compares
//! them with fixed- and variable-order Markov baselines through LZ77
//! cross-parsing (cross-entropy, average and longest common substring).
//!
//! Symbols are stored as dense 0-based indices into an [`Alphabet`]; raw labels
//! (MIDI pitches or intervals) only appear at the I/O boundary.

pub mod analysis;
pub mod cli;
pub mod corpus;
mod error;
pub mod markov;
pub mod potts;
pub mod rng;
pub mod sampling;
pub mod training;
pub mod zipeval;

pub use corpus::{Alphabet, CorpusFormat, PitchSequence, TrainingSample};
pub use error::{Error, Result};
pub use potts::{FreqStats, ModelParams};
pub use sampling::SamplerConfig;
pub use training::{TrainConfig, TrainReport};
