//! The `melomax` command line.
//!
//! Every artifact is a directory. Each command writes its outputs plus a
//! `manifest.json` recording the parsed arguments, SHA-256 hashes of every
//! input and output file, the seed and the tool version; `melomax replay`
//! re-runs a manifest into a scratch directory and compares hashes.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis;
use crate::corpus::{self, Alphabet, CorpusFormat, PitchSequence};
use crate::markov;
use crate::potts::ModelParams;
use crate::sampling::{self, SamplerConfig};
use crate::training::{self, TrainConfig};
use crate::zipeval::{self, SimilarityReport};
use crate::{Error, Result};

/// Environment variable naming the root for default output directories.
pub const OUT_ENV: &str = "MELOMAX_OUT";
pub const MANIFEST: &str = "manifest.json";
const ARTIFACT: &str = "artifact.json";
const SEQUENCE: &str = "sequence.txt";
const ALPHABET: &str = "alphabet.json";
const MODEL: &str = "model.json";

#[derive(Debug, Parser)]
#[command(name = "melomax", version, about = "Maximum-entropy melody models and Markov baselines")]
pub struct Cli {
    /// Output directory. Defaults to `$MELOMAX_OUT/<command>`, or
    /// `melomax-out/<command>` when the variable is unset.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Read a corpus file into a corpus artifact.
    Ingest(IngestArgs),
    /// Fit a model to a corpus artifact.
    Train(TrainArgs),
    /// Sample a sequence from a model or a Markov baseline.
    Generate(GenerateArgs),
    /// Cross-parse sequences against a reference.
    Evaluate(EvaluateArgs),
    /// Write figure tables comparing a generated sequence with a corpus.
    Analyze(AnalyzeArgs),
    /// Re-run a manifest and check that every output hash matches.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Train(_) => "train",
            Command::Generate(_) => "generate",
            Command::Evaluate(_) => "evaluate",
            Command::Analyze(_) => "analyze",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct IngestArgs {
    /// Corpus text file.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "plain-integers")]
    pub format: CorpusFormat,
    /// Store successive intervals instead of pitches.
    #[arg(long)]
    pub intervals: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    /// Corpus artifact directory.
    pub corpus: PathBuf,
    /// JSON or TOML training config; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MarkovKind {
    /// Fixed order, set with `--order`.
    Fo,
    /// Variable order up to `--vo-kmax`.
    Vo,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(group(ArgGroup::new("source").required(true).args(["model", "markov"])))]
pub struct GenerateArgs {
    /// Model artifact directory from `train`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, value_enum, requires = "corpus")]
    pub markov: Option<MarkovKind>,
    /// Corpus artifact for Markov baselines.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub sweeps_factor: usize,
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    #[arg(long, default_value_t = 10)]
    pub vo_kmax: usize,
    #[arg(long, default_value_t = markov::DEFAULT_MIN_CONTINUATIONS)]
    pub min_continuations: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(group(ArgGroup::new("targets").required(true).args(["target", "batch"])))]
pub struct EvaluateArgs {
    /// Reference sequence artifact (usually the corpus).
    pub reference: PathBuf,
    /// Sequence artifact to parse against the reference.
    pub target: Option<PathBuf>,
    /// Directory of sequence artifacts, one CSV row each.
    #[arg(long)]
    pub batch: Option<PathBuf>,
    /// Compare stored symbols directly instead of intervals.
    #[arg(long)]
    pub no_intervals: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Figure {
    Scatter,
    Matrices,
    Rankfreq,
    Innovation,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct AnalyzeArgs {
    pub corpus: PathBuf,
    pub generated: PathBuf,
    #[arg(long, value_enum)]
    pub figure: Figure,
    /// Largest distance for `scatter`.
    #[arg(long, default_value_t = 10)]
    pub kmax: usize,
    /// Distances for `matrices`; repeatable.
    #[arg(long = "k", default_values_t = [1usize, 5])]
    pub k: Vec<usize>,
    /// Longest pattern for `rankfreq`.
    #[arg(long, default_value_t = 6)]
    pub max_len: usize,
    /// Pattern lengths for `innovation`, as `a..b` or a comma list.
    #[arg(long, default_value = "1..8")]
    pub lengths: String,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// A `manifest.json` file or the directory holding it.
    pub manifest: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Encoding {
    Pitch,
    Interval,
}

/// Metadata stored next to every corpus, model and sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactInfo {
    pub kind: String,
    pub encoding: Encoding,
    pub q: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Command,
    /// Absolute input path to SHA-256.
    pub inputs: BTreeMap<String, String>,
    /// Output file name to SHA-256.
    pub outputs: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub tool_version: String,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    if let Command::Replay(args) = &cli.command {
        return replay(&args.manifest);
    }
    let out = match cli.out {
        Some(p) => p,
        None => default_out_root().join(cli.command.name()),
    };
    let command = absolutize(cli.command)?;
    let manifest = run_command(&command, &out)?;
    println!("{}", out.display());
    log::info!("{} wrote {} files", manifest.command, manifest.outputs.len());
    Ok(())
}

fn default_out_root() -> PathBuf {
    std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("melomax-out"))
}

fn abs(p: &Path) -> Result<PathBuf> {
    std::path::absolute(p).map_err(|e| Error::io(p, e))
}

fn abs_opt(p: &Option<PathBuf>) -> Result<Option<PathBuf>> {
    p.as_deref().map(abs).transpose()
}

fn absolutize(command: Command) -> Result<Command> {
    Ok(match command {
        Command::Ingest(a) => Command::Ingest(IngestArgs { input: abs(&a.input)?, ..a }),
        Command::Train(a) => Command::Train(TrainArgs {
            corpus: abs(&a.corpus)?,
            config: abs_opt(&a.config)?,
            ..a
        }),
        Command::Generate(a) => Command::Generate(GenerateArgs {
            model: abs_opt(&a.model)?,
            corpus: abs_opt(&a.corpus)?,
            ..a
        }),
        Command::Evaluate(a) => Command::Evaluate(EvaluateArgs {
            reference: abs(&a.reference)?,
            target: abs_opt(&a.target)?,
            batch: abs_opt(&a.batch)?,
            ..a
        }),
        Command::Analyze(a) => Command::Analyze(AnalyzeArgs {
            corpus: abs(&a.corpus)?,
            generated: abs(&a.generated)?,
            ..a
        }),
        Command::Replay(a) => Command::Replay(ReplayArgs { manifest: abs(&a.manifest)? }),
    })
}

/// Runs `command` into `out` and writes its manifest.
pub fn run_command(command: &Command, out: &Path) -> Result<RunManifest> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut inputs = Vec::new();
    let seed = match command {
        Command::Ingest(a) => cmd_ingest(a, out, &mut inputs)?,
        Command::Train(a) => cmd_train(a, out, &mut inputs)?,
        Command::Generate(a) => cmd_generate(a, out, &mut inputs)?,
        Command::Evaluate(a) => cmd_evaluate(a, out, &mut inputs)?,
        Command::Analyze(a) => cmd_analyze(a, out, &mut inputs)?,
        Command::Replay(_) => {
            return Err(Error::InvalidArgument("replay has no manifest of its own".into()))
        }
    };
    let mut input_hashes = BTreeMap::new();
    for path in inputs {
        input_hashes.insert(path.display().to_string(), hash_file(&path)?);
    }
    let manifest = RunManifest {
        command: command.name().to_string(),
        args: command.clone(),
        inputs: input_hashes,
        outputs: hash_outputs(out)?,
        seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    write(out, MANIFEST, &text)?;
    Ok(manifest)
}

pub fn hash_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Hashes of every regular file in `dir` except the manifest.
pub fn hash_outputs(dir: &Path) -> Result<BTreeMap<String, String>> {
    let mut hashes = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let name = entry.file_name().to_string_lossy().into_owned();
        if path.is_file() && name != MANIFEST {
            hashes.insert(name, hash_file(&path)?);
        }
    }
    Ok(hashes)
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let file = if path.is_dir() { path.join(MANIFEST) } else { path.to_path_buf() };
    let text = read(&file)?;
    serde_json::from_str(&text).map_err(|e| Error::format(file.display().to_string(), e))
}

/// Re-runs a manifest in a scratch directory and compares every hash.
pub fn replay(path: &Path) -> Result<()> {
    let manifest = read_manifest(path)?;
    for (input, expected) in &manifest.inputs {
        let actual = hash_file(Path::new(input))?;
        if &actual != expected {
            return Err(Error::ReplayMismatch(format!("input {input} changed since the run")));
        }
    }
    let scratch = std::env::temp_dir().join(format!(
        "melomax-replay-{}-{}",
        std::process::id(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos())
            .unwrap_or(0)
    ));
    let result = run_command(&manifest.args, &scratch);
    let _ = fs::remove_dir_all(&scratch);
    let rerun = result?;
    if rerun.outputs != manifest.outputs {
        let differing: Vec<&String> = manifest
            .outputs
            .keys()
            .chain(rerun.outputs.keys())
            .filter(|k| manifest.outputs.get(*k) != rerun.outputs.get(*k))
            .collect();
        return Err(Error::ReplayMismatch(format!("outputs differ: {differing:?}")));
    }
    println!("replay ok: {} outputs match", rerun.outputs.len());
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(path, e))
}

fn to_json_line<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn read_info(dir: &Path, inputs: &mut Vec<PathBuf>) -> Result<ArtifactInfo> {
    let path = dir.join(ARTIFACT);
    let text = read(&path)?;
    inputs.push(path.clone());
    serde_json::from_str(&text).map_err(|e| Error::format(path.display().to_string(), e))
}

fn read_alphabet(dir: &Path, inputs: &mut Vec<PathBuf>) -> Result<Alphabet> {
    let path = dir.join(ALPHABET);
    let alphabet = Alphabet::from_json(&read(&path)?)?;
    inputs.push(path);
    Ok(alphabet)
}

/// Loads a corpus or sequence artifact.
pub fn load_sequence(dir: &Path, inputs: &mut Vec<PathBuf>) -> Result<(PitchSequence, ArtifactInfo)> {
    let info = read_info(dir, inputs)?;
    let alphabet = read_alphabet(dir, inputs)?;
    let path = dir.join(SEQUENCE);
    let labels = corpus::parse_tokens(&read(&path)?, CorpusFormat::PlainIntegers)?;
    inputs.push(path);
    let seq = PitchSequence::with_alphabet(&labels, alphabet.into())?;
    Ok((seq, info))
}

fn write_sequence(out: &Path, seq: &PitchSequence, info: &ArtifactInfo) -> Result<()> {
    write(out, SEQUENCE, &corpus::write_plain(&seq.labels()))?;
    write(out, ALPHABET, &seq.alphabet().to_json())?;
    write(out, ARTIFACT, &to_json_line(info))
}

fn cmd_ingest(args: &IngestArgs, out: &Path, inputs: &mut Vec<PathBuf>) -> Result<Option<u64>> {
    let file = fs::File::open(&args.input).map_err(|e| Error::io(&args.input, e))?;
    inputs.push(args.input.clone());
    let mut seq = corpus::load_corpus(file, args.format)?;
    let encoding = if args.intervals {
        seq = corpus::to_intervals(&seq)?;
        Encoding::Interval
    } else {
        Encoding::Pitch
    };
    let info = ArtifactInfo {
        kind: "corpus".into(),
        encoding,
        q: seq.q(),
        n: Some(seq.len()),
        generator: None,
        k_max: None,
        seed: None,
    };
    write_sequence(out, &seq, &info)?;
    Ok(None)
}

fn cmd_train(args: &TrainArgs, out: &Path, inputs: &mut Vec<PathBuf>) -> Result<Option<u64>> {
    let mut config = match &args.config {
        Some(path) => {
            inputs.push(path.clone());
            TrainConfig::from_file(path)?
        }
        None => TrainConfig::default(),
    };
    if let Some(v) = args.kmax {
        config.k_max = v;
    }
    if let Some(v) = args.lambda {
        config.lambda = v;
    }
    if let Some(v) = args.tol {
        config.tol = v;
    }
    if let Some(v) = args.max_iters {
        config.max_iters = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    config.validate()?;
    let (seq, corpus_info) = load_sequence(&args.corpus, inputs)?;
    let needed = 2 * config.k_max + 1;
    if seq.len() < needed {
        return Err(Error::InvalidArgument(format!(
            "--kmax {} needs a corpus of at least {needed} symbols, this one has {}; lower --kmax to at most {}",
            config.k_max,
            seq.len(),
            seq.len().saturating_sub(1) / 2
        )));
    }
    let (params, report) = training::train_sequence(&seq, &config)?;
    if !report.converged {
        log::warn!("training stopped at the iteration cap before meeting the tolerance");
    }
    write(out, MODEL, &params.to_json())?;
    write(out, ALPHABET, &seq.alphabet().to_json())?;
    write(out, "report.json", &to_json_line(&report))?;
    write(out, "trace.csv", &report.trace_csv())?;
    write(out, "config.json", &to_json_line(&config))?;
    let info = ArtifactInfo {
        kind: "model".into(),
        encoding: corpus_info.encoding,
        q: params.q(),
        n: None,
        generator: Some("maxent".into()),
        k_max: Some(params.k_max()),
        seed: Some(config.seed),
    };
    write(out, ARTIFACT, &to_json_line(&info))?;
    Ok(Some(config.seed))
}

fn cmd_generate(args: &GenerateArgs, out: &Path, inputs: &mut Vec<PathBuf>) -> Result<Option<u64>> {
    let (seq, info) = match (&args.model, args.markov) {
        (Some(dir), _) => {
            let model_info = read_info(dir, inputs)?;
            let path = dir.join(MODEL);
            let params = ModelParams::from_json(&read(&path)?)?;
            inputs.push(path);
            let alphabet = read_alphabet(dir, inputs)?;
            let config = SamplerConfig {
                n: args.n,
                sweeps_factor: args.sweeps_factor,
                seed: args.seed,
            };
            let seq = sampling::generate_sequence(&params, alphabet.into(), &config)?;
            let info = ArtifactInfo {
                generator: Some("maxent".into()),
                k_max: Some(params.k_max()),
                ..model_info
            };
            (seq, info)
        }
        (None, Some(kind)) => {
            let dir = args
                .corpus
                .as_ref()
                .ok_or_else(|| Error::InvalidArgument("--markov needs --corpus".into()))?;
            let (corpus, corpus_info) = load_sequence(dir, inputs)?;
            let (seq, generator, k) = match kind {
                MarkovKind::Fo => {
                    let model = markov::fit_fo(&corpus, args.order)?;
                    write(out, "markov.json", &model.to_json())?;
                    (markov::generate_fo(&model, args.n, args.seed)?, "fo", args.order)
                }
                MarkovKind::Vo => {
                    let model = markov::fit_vo(&corpus, args.vo_kmax, args.min_continuations)?;
                    let (seq, steps) = markov::generate_vo(&model, args.n, args.seed)?;
                    let mut log = String::from("position,order,distinct_continuations\n");
                    for (i, s) in steps.iter().enumerate() {
                        log.push_str(&format!("{i},{},{}\n", s.order, s.distinct_continuations));
                    }
                    write(out, "vo_log.csv", &log)?;
                    (seq, "vo", args.vo_kmax)
                }
            };
            let info = ArtifactInfo {
                generator: Some(generator.into()),
                k_max: Some(k),
                ..corpus_info
            };
            (seq, info)
        }
        (None, None) => {
            return Err(Error::InvalidArgument("pass --model or --markov".into()));
        }
    };
    let info = ArtifactInfo {
        kind: "sequence".into(),
        q: seq.q(),
        n: Some(seq.len()),
        seed: Some(args.seed),
        ..info
    };
    write_sequence(out, &seq, &info)?;
    Ok(Some(args.seed))
}

fn comparable_labels(seq: &PitchSequence, info: &ArtifactInfo, intervals: bool) -> Result<Vec<i64>> {
    if intervals && info.encoding == Encoding::Pitch {
        Ok(corpus::to_intervals(seq)?.labels())
    } else {
        Ok(seq.labels())
    }
}

fn distinct_count(a: &[i64], b: &[i64]) -> usize {
    let mut all: Vec<i64> = a.iter().chain(b).copied().collect();
    all.sort_unstable();
    all.dedup();
    all.len()
}

fn dir_name(p: &Path) -> String {
    p.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| p.display().to_string())
}

fn cmd_evaluate(args: &EvaluateArgs, out: &Path, inputs: &mut Vec<PathBuf>) -> Result<Option<u64>> {
    let intervals = !args.no_intervals;
    let (reference, ref_info) = load_sequence(&args.reference, inputs)?;
    let a = comparable_labels(&reference, &ref_info, intervals)?;
    let a_id = dir_name(&args.reference);
    let mut targets: Vec<PathBuf> = Vec::new();
    if let Some(t) = &args.target {
        targets.push(t.clone());
    }
    if let Some(batch) = &args.batch {
        let mut found = Vec::new();
        for entry in fs::read_dir(batch).map_err(|e| Error::io(batch, e))? {
            let path = entry.map_err(|e| Error::io(batch, e))?.path();
            if path.join(SEQUENCE).is_file() && path.join(ARTIFACT).is_file() {
                found.push(path);
            }
        }
        if found.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "{} contains no sequence artifacts",
                batch.display()
            )));
        }
        targets.extend(found);
    }
    let mut loaded = Vec::new();
    for t in &targets {
        let (seq, info) = load_sequence(t, inputs)?;
        loaded.push((dir_name(t), seq, info));
    }
    loaded.sort_by(|x, y| {
        let key = |i: &ArtifactInfo| (i.generator.clone(), i.k_max, i.seed);
        key(&x.2).cmp(&key(&y.2)).then_with(|| x.0.cmp(&y.0))
    });
    let rows: Vec<(String, SimilarityReport)> = loaded
        .par_iter()
        .map(|(id, seq, info)| {
            let b = comparable_labels(seq, info, intervals)?;
            let report = zipeval::similarity(&a, &b, distinct_count(&a, &b));
            let row = report.csv_row(
                &a_id,
                id,
                info.generator.as_deref().unwrap_or(&info.kind),
                info.k_max,
                info.seed,
            );
            Ok((row, report))
        })
        .collect::<Result<_>>()?;
    let mut csv = format!("{}\n", SimilarityReport::CSV_HEADER);
    for (row, _) in &rows {
        csv.push_str(row);
        csv.push('\n');
    }
    write(out, "similarity.csv", &csv)?;
    if args.batch.is_none() {
        write(out, "report.json", &rows[0].1.to_json())?;
    }
    Ok(None)
}

/// Parses `a..b` (inclusive) or `a,b,c`.
pub fn parse_lengths(spec: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidArgument(format!("cannot parse lengths '{spec}'; use a..b or a,b,c"));
    if let Some((a, b)) = spec.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
        if a == 0 || a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    spec.split(',')
        .map(|t| t.trim().parse::<usize>().ok().filter(|&l| l > 0).ok_or_else(bad))
        .collect()
}

#[derive(Debug, Serialize)]
struct ScatterSummary {
    points: usize,
    threshold: f64,
    points_above_threshold: usize,
    pearson: Option<f64>,
    pearson_log: Option<f64>,
}

fn cmd_analyze(args: &AnalyzeArgs, out: &Path, inputs: &mut Vec<PathBuf>) -> Result<Option<u64>> {
    let (corpus, _) = load_sequence(&args.corpus, inputs)?;
    let (generated, _) = load_sequence(&args.generated, inputs)?;
    match args.figure {
        Figure::Scatter => {
            let points = analysis::scatter_data(&corpus, &generated, args.kmax)?;
            write(out, "scatter.csv", &analysis::scatter_csv(&points))?;
            let threshold = 10.0 / corpus.len() as f64;
            let kept: Vec<_> = points.iter().filter(|p| p.corpus_freq > threshold).collect();
            let xs: Vec<f64> = kept.iter().map(|p| p.corpus_freq).collect();
            let ys: Vec<f64> = kept.iter().map(|p| p.model_freq).collect();
            let (lx, ly): (Vec<f64>, Vec<f64>) = kept
                .iter()
                .filter(|p| p.model_freq > 0.0)
                .map(|p| (p.corpus_freq.ln(), p.model_freq.ln()))
                .unzip();
            let summary = ScatterSummary {
                points: points.len(),
                threshold,
                points_above_threshold: kept.len(),
                pearson: analysis::pearson(&xs, &ys),
                pearson_log: analysis::pearson(&lx, &ly),
            };
            write(out, "summary.json", &to_json_line(&summary))?;
        }
        Figure::Matrices => {
            let mut comparisons = Vec::new();
            for &k in &args.k {
                comparisons.push(analysis::compare_pair_matrices(&corpus, &generated, k)?);
            }
            let alphabet = analysis::union_alphabet(&corpus, &generated);
            let corpus_entries: Vec<_> = comparisons.iter().map(|c| (c.k, &c.corpus, &*alphabet)).collect();
            let generated_entries: Vec<_> =
                comparisons.iter().map(|c| (c.k, &c.generated, &*alphabet)).collect();
            write(out, "corpus_matrices.csv", &analysis::matrix_csv(&corpus_entries))?;
            write(out, "generated_matrices.csv", &analysis::matrix_csv(&generated_entries))?;
            let mut frob = String::from("k,frobenius\n");
            for c in &comparisons {
                frob.push_str(&format!("{},{:.12e}\n", c.k, c.frobenius));
            }
            write(out, "frobenius.csv", &frob)?;
        }
        Figure::Rankfreq => {
            let rows = analysis::pattern_freq_rank(&corpus, &generated, args.max_len);
            write(out, "rankfreq.csv", &analysis::rank_freq_csv(&rows))?;
            let mut summary = String::from("l,patterns,spearman\n");
            for l in 1..=args.max_len {
                let sel: Vec<_> = rows.iter().filter(|r| r.length == l).collect();
                let xs: Vec<f64> = sel.iter().map(|r| r.corpus_freq).collect();
                let ys: Vec<f64> = sel.iter().map(|r| r.generated_freq).collect();
                let rho = analysis::spearman(&xs, &ys)
                    .map(|r| format!("{r:.12}"))
                    .unwrap_or_default();
                summary.push_str(&format!("{l},{},{rho}\n", sel.len()));
            }
            write(out, "rankfreq_summary.csv", &summary)?;
        }
        Figure::Innovation => {
            let lengths = parse_lengths(&args.lengths)?;
            let curve = analysis::hamming_counts(&corpus, &generated, &lengths)?;
            write(out, "innovation.csv", &analysis::innovation_csv(&curve))?;
        }
    }
    Ok(None)
}
