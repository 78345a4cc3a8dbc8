//! Command-line front end. [`run`] takes explicit streams so it can be
//! driven from tests; `main` only wires it to the process.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use tnt_core::model::{DEFAULT_BEAM, DEFAULT_MAX_SUFFIX, DEFAULT_SUFFIX_FREQ, DEFAULT_UNKNOWN_CANDIDATES};
use tnt_core::viterbi::reliability;
use tnt_core::{TaggedOutput, TaggerConfig, TaggerModel, ThetaMode, TieBreak};

use crate::error::Error;
use crate::eval::{self, Metric, ReliabilityMetric};
use crate::format::{parse_tagged, parse_untagged, write_output};
use crate::store;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "tnt", version, about = "Second-order Markov model part-of-speech tagger")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model from a tagged corpus.
    Train {
        /// Tagged corpus (`token<TAB>tag`, blank line between sentences).
        #[arg(short, long)]
        corpus: PathBuf,
        /// Model file to write.
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        train: TrainArgs,
        #[command(flatten)]
        decode: DecodeArgs,
    },
    /// Tag untagged text read from INPUT or standard input.
    Tag {
        #[arg(short, long)]
        model: PathBuf,
        input: Option<PathBuf>,
        /// Add a third column with the reliability quotient.
        #[arg(long)]
        reliability: bool,
        #[command(flatten)]
        decode: DecodeArgs,
    },
    /// Tag a gold corpus with a model and report accuracy.
    Eval {
        #[arg(short, long)]
        model: PathBuf,
        #[arg(short, long)]
        gold: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Kv)]
        format: Format,
        #[command(flatten)]
        decode: DecodeArgs,
    },
    /// k-fold contiguous cross-validation.
    Xval {
        #[arg(short, long)]
        corpus: PathBuf,
        #[arg(short, default_value_t = 10)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Format::Tsv)]
        format: Format,
        #[command(flatten)]
        train: TrainArgs,
        #[command(flatten)]
        decode: DecodeArgs,
    },
    /// Accuracy as a function of training-set size.
    Learncurve {
        #[arg(short, long)]
        corpus: PathBuf,
        /// Training sizes in tokens, strictly increasing.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 30_000)]
        test_tokens: usize,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print a two-column table of this metric instead of the full table.
        #[arg(long, value_enum)]
        metric: Option<CurveMetric>,
        #[command(flatten)]
        train: TrainArgs,
        #[command(flatten)]
        decode: DecodeArgs,
    },
    /// Accuracy of reliable and unreliable assignments per quotient threshold.
    Relcurve {
        #[arg(short, long)]
        corpus: PathBuf,
        /// Thresholds (>= 1; `inf` allowed).
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "1,2,5,10,20,50,100,200,500,1000,2000,5000,10000,100000"
        )]
        thresholds: Vec<f64>,
        #[arg(short, default_value_t = 10)]
        k: usize,
        /// Print a two-column table of this column instead of the full table.
        #[arg(long, value_enum)]
        metric: Option<RelMetric>,
        #[command(flatten)]
        train: TrainArgs,
    },
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Longest suffix used for unknown words.
    #[arg(long, default_value_t = DEFAULT_MAX_SUFFIX)]
    max_suffix: usize,
    /// Only words at most this frequent feed the suffix model.
    #[arg(long, default_value_t = DEFAULT_SUFFIX_FREQ)]
    suffix_freq: u64,
    /// Condition on capitalization (default).
    #[arg(long)]
    caps: bool,
    /// Ignore capitalization.
    #[arg(long, conflicts_with = "caps")]
    no_caps: bool,
    #[arg(long, value_enum, default_value_t = ThetaArg::Printed)]
    theta_mode: ThetaArg,
    /// Which interpolation order wins a tie.
    #[arg(long, value_enum, default_value_t = TieArg::Higher)]
    tie_break: TieArg,
}

#[derive(Debug, Args)]
struct DecodeArgs {
    /// Beam threshold; 0 disables pruning [default: 1000, or the model's].
    #[arg(long)]
    beam: Option<f64>,
    /// Candidate tags kept for unknown words; 0 keeps all [default: 10, or the model's].
    #[arg(long)]
    unknown_cap: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ThetaArg {
    Printed,
    Sqrt,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TieArg {
    Higher,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Tsv,
    Kv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CurveMetric {
    Overall,
    Known,
    Unknown,
    UnknownRate,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RelMetric {
    Fraction,
    Reliable,
    Unreliable,
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

impl From<tnt_core::Error> for Failure {
    fn from(e: tnt_core::Error) -> Self {
        Failure::Data(e.into())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.into())
    }
}

type Outcome = std::result::Result<(), Failure>;

impl DecodeArgs {
    /// Resolves the flags against `base`, which is either the defaults or
    /// a loaded model's settings.
    fn resolve(&self, base: &TaggerConfig) -> std::result::Result<(Option<f64>, Option<usize>), Failure> {
        let beam = match self.beam {
            None => base.beam_theta,
            Some(0.0) => None,
            Some(b) if b > 1.0 && b.is_finite() => Some(b),
            Some(b) => return Err(Failure::Usage(format!("--beam must be 0 or greater than 1, got {b}"))),
        };
        let cap = match self.unknown_cap {
            None => base.unknown_candidates,
            Some(0) => None,
            Some(c) => Some(c),
        };
        Ok((beam, cap))
    }
}

fn config(train: &TrainArgs, decode: &DecodeArgs) -> std::result::Result<TaggerConfig, Failure> {
    if train.max_suffix == 0 || train.suffix_freq == 0 {
        return Err(Failure::Usage("--max-suffix and --suffix-freq must be at least 1".into()));
    }
    let defaults = TaggerConfig {
        beam_theta: Some(DEFAULT_BEAM),
        unknown_candidates: Some(DEFAULT_UNKNOWN_CANDIDATES),
        ..TaggerConfig::default()
    };
    let (beam_theta, unknown_candidates) = decode.resolve(&defaults)?;
    Ok(TaggerConfig {
        beam_theta,
        max_suffix: train.max_suffix,
        suffix_freq_threshold: train.suffix_freq,
        tie_break: match train.tie_break {
            TieArg::Higher => TieBreak::HigherOrder,
            TieArg::Lower => TieBreak::LowerOrder,
        },
        theta_mode: match train.theta_mode {
            ThetaArg::Printed => ThetaMode::Printed,
            ThetaArg::Sqrt => ThetaMode::Sqrt,
        },
        capitalization: !train.no_caps,
        unknown_candidates,
    })
}

fn load_model(path: &PathBuf, decode: &DecodeArgs) -> std::result::Result<TaggerModel, Failure> {
    // Validate flags before touching the file.
    decode.resolve(&TaggerConfig::default())?;
    let model = store::load(path).map_err(|e| Failure::Data(with_path(e, path)))?;
    let (beam, cap) = decode.resolve(model.config())?;
    Ok(model.with_decoding(beam, cap)?)
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    }
}

fn read_corpus(path: &PathBuf) -> std::result::Result<tnt_core::TaggedCorpus, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Data(with_path(e.into(), path)))?;
    parse_tagged(&text).map_err(|e| Failure::Data(with_path(e, path)))
}

fn tag_all(model: &TaggerModel, sentences: &[Vec<String>], with_reliability: bool) -> Vec<TaggedOutput> {
    sentences
        .par_iter()
        .map(|words| {
            let mut out = model.tag_sentence(words);
            if with_reliability {
                let quotients = reliability(model, words, &out);
                for (t, q) in out.tokens.iter_mut().zip(quotients) {
                    t.quotient = Some(q);
                }
            }
            out
        })
        .collect()
}

fn execute(command: Command, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Outcome {
    match command {
        Command::Train {
            corpus,
            output,
            train,
            decode,
        } => {
            let config = config(&train, &decode)?;
            let corpus = read_corpus(&corpus)?;
            let model = TaggerModel::assemble(&corpus, config)?;
            let bytes = store::save(&model, &output)?;
            writeln!(
                stderr,
                "trained on {} sentences, {} tokens, {} tags; wrote {} bytes to {}",
                corpus.sentences().len(),
                corpus.token_count(),
                model.tags().len(),
                bytes,
                output.display()
            )?;
        }
        Command::Tag {
            model,
            input,
            reliability,
            decode,
        } => {
            let model = load_model(&model, &decode)?;
            let start = Instant::now();
            let mut text = String::new();
            match &input {
                Some(path) => {
                    text = fs::read_to_string(path).map_err(|e| Failure::Data(with_path(e.into(), path)))?
                }
                None => {
                    stdin.read_to_string(&mut text)?;
                }
            }
            let sentences = parse_untagged(&text);
            let outputs = tag_all(&model, &sentences, reliability);
            stdout.write_all(write_output(&model, &sentences, &outputs, reliability).as_bytes())?;
            stdout.flush()?;
            let tokens: usize = sentences.iter().map(Vec::len).sum();
            let secs = start.elapsed().as_secs_f64();
            writeln!(
                stderr,
                "tagged {} tokens in {} sentences in {:.3} s ({:.0} tokens/s)",
                tokens,
                sentences.len(),
                secs,
                tokens as f64 / secs.max(1e-9)
            )?;
        }
        Command::Eval {
            model,
            gold,
            format,
            decode,
        } => {
            let model = load_model(&model, &decode)?;
            let gold = read_corpus(&gold)?;
            let sentences: Vec<Vec<String>> = gold
                .sentences()
                .iter()
                .map(|s| s.words().map(str::to_string).collect())
                .collect();
            let report = eval::score(&gold, &tag_all(&model, &sentences, false), &model)?;
            let text = match format {
                Format::Kv => report.to_kv(),
                Format::Tsv => eval::CrossValReport { folds: vec![report] }.to_tsv(),
            };
            stdout.write_all(text.as_bytes())?;
        }
        Command::Xval {
            corpus,
            k,
            format,
            train,
            decode,
        } => {
            let config = config(&train, &decode)?;
            if k < 2 {
                return Err(Failure::Usage("-k must be at least 2".into()));
            }
            let corpus = read_corpus(&corpus)?;
            let report = eval::cross_validate(&corpus, k, config)?;
            let text = match format {
                Format::Kv => report.to_kv(),
                Format::Tsv => report.to_tsv(),
            };
            stdout.write_all(text.as_bytes())?;
        }
        Command::Learncurve {
            corpus,
            sizes,
            test_tokens,
            repeats,
            seed,
            metric,
            train,
            decode,
        } => {
            let config = config(&train, &decode)?;
            if sizes.windows(2).any(|w| w[0] >= w[1]) || sizes.first() == Some(&0) {
                return Err(Failure::Usage("--sizes must be positive and strictly increasing".into()));
            }
            if repeats == 0 || test_tokens == 0 {
                return Err(Failure::Usage("--repeats and --test-tokens must be at least 1".into()));
            }
            let corpus = read_corpus(&corpus)?;
            let curve = eval::learning_curve(&corpus, &sizes, test_tokens, repeats, seed, config)?;
            let text = match metric {
                None => curve.to_tsv(),
                Some(m) => curve.to_table(match m {
                    CurveMetric::Overall => Metric::Overall,
                    CurveMetric::Known => Metric::Known,
                    CurveMetric::Unknown => Metric::Unknown,
                    CurveMetric::UnknownRate => Metric::UnknownRate,
                }),
            };
            stdout.write_all(text.as_bytes())?;
        }
        Command::Relcurve {
            corpus,
            thresholds,
            k,
            metric,
            train,
        } => {
            let config = config(&train, &DecodeArgs { beam: None, unknown_cap: None })?;
            if thresholds.iter().any(|t| t.is_nan() || *t < 1.0) {
                return Err(Failure::Usage("--thresholds must all be >= 1".into()));
            }
            if k < 2 {
                return Err(Failure::Usage("-k must be at least 2".into()));
            }
            let corpus = read_corpus(&corpus)?;
            let curve = eval::reliability_curve(&corpus, &thresholds, k, config)?;
            let text = match metric {
                None => curve.to_tsv(),
                Some(m) => curve.to_table(match m {
                    RelMetric::Fraction => ReliabilityMetric::Fraction,
                    RelMetric::Reliable => ReliabilityMetric::ReliableAccuracy,
                    RelMetric::Unreliable => ReliabilityMetric::UnreliableAccuracy,
                }),
            };
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

/// Runs the tool with `args` (including the program name) and returns the
/// exit status: 0 on success, 1 for usage errors, 2 for data or model
/// errors. Diagnostics go to `stderr`.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    match execute(cli.command, stdin, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_DATA
        }
    }
}
