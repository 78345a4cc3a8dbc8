//! Accuracy scoring, k-fold cross-validation, learning curves and
//! reliability-threshold sweeps.
//!
//! Folds and repeats run in parallel; results are always collected in fold
//! (or size, repeat) order so reports are deterministic.

use std::fmt::Write as _;

use rayon::prelude::*;
use tnt_core::viterbi::tag_with_reliability;
use tnt_core::{TaggedCorpus, TaggedOutput, TaggerConfig, TaggerModel};

use crate::error::{Error, Result};

/// Token counts for one test run. Accuracies are derived, and are `None`
/// for an empty subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FoldReport {
    pub token_count: usize,
    pub correct: usize,
    pub known_count: usize,
    pub known_correct: usize,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl FoldReport {
    pub fn unknown_count(&self) -> usize {
        self.token_count - self.known_count
    }

    pub fn unknown_correct(&self) -> usize {
        self.correct - self.known_correct
    }

    pub fn overall_accuracy(&self) -> f64 {
        ratio(self.correct, self.token_count).unwrap_or(0.0)
    }

    pub fn known_accuracy(&self) -> Option<f64> {
        ratio(self.known_correct, self.known_count)
    }

    pub fn unknown_accuracy(&self) -> Option<f64> {
        ratio(self.unknown_correct(), self.unknown_count())
    }

    pub fn unknown_rate(&self) -> f64 {
        ratio(self.unknown_count(), self.token_count).unwrap_or(0.0)
    }

    /// The value of `m`, `None` for an empty known or unknown subset.
    pub fn metric(&self, m: Metric) -> Option<f64> {
        match m {
            Metric::Overall => Some(self.overall_accuracy()),
            Metric::Known => self.known_accuracy(),
            Metric::Unknown => self.unknown_accuracy(),
            Metric::UnknownRate => Some(self.unknown_rate()),
        }
    }

    /// `key<TAB>value` lines, one per metric.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "tokens\t{}", self.token_count);
        let _ = writeln!(out, "known_tokens\t{}", self.known_count);
        let _ = writeln!(out, "unknown_tokens\t{}", self.unknown_count());
        for m in Metric::ALL {
            let _ = writeln!(out, "{}\t{}", m.name(), num(self.metric(m)));
        }
        out
    }
}

/// The quantities reported per run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Overall,
    Known,
    Unknown,
    UnknownRate,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Overall, Metric::Known, Metric::Unknown, Metric::UnknownRate];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Overall => "overall_accuracy",
            Metric::Known => "known_accuracy",
            Metric::Unknown => "unknown_accuracy",
            Metric::UnknownRate => "unknown_rate",
        }
    }
}

fn num(x: Option<f64>) -> String {
    x.map_or("NA".into(), |x| format!("{x:.6}"))
}

/// Mean and sample (n−1) standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

impl Summary {
    /// Summarizes the present values; `None` if there are none. A single
    /// value has a standard deviation of 0.
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Summary> {
        let v: Vec<f64> = values.into_iter().collect();
        let n = v.len();
        if n == 0 {
            return None;
        }
        let mean = v.iter().sum::<f64>() / n as f64;
        let sd = if n < 2 {
            0.0
        } else {
            (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Some(Summary { mean, sd, n })
    }
}

/// Scores tagger output against the gold corpus. A token is known iff its
/// exact surface is in the model's lexicon.
pub fn score(gold: &TaggedCorpus, outputs: &[TaggedOutput], model: &TaggerModel) -> Result<FoldReport> {
    if gold.token_count() == 0 {
        return Err(Error::Evaluation("empty test set".into()));
    }
    if outputs.len() != gold.sentences().len() {
        let sentence = outputs.len().min(gold.sentences().len());
        return Err(Error::Alignment {
            sentence,
            message: format!(
                "gold has {} sentences, output has {}",
                gold.sentences().len(),
                outputs.len()
            ),
        });
    }
    let mut report = FoldReport::default();
    for (i, (sentence, output)) in gold.sentences().iter().zip(outputs).enumerate() {
        if sentence.len() != output.tokens.len() {
            return Err(Error::Alignment {
                sentence: i,
                message: format!(
                    "gold has {} tokens, output has {}",
                    sentence.len(),
                    output.tokens.len()
                ),
            });
        }
        for (token, out) in sentence.tokens.iter().zip(&output.tokens) {
            let correct = model.tag(out.tag) == &token.tag;
            report.token_count += 1;
            report.correct += correct as usize;
            if model.is_known(&token.surface) {
                report.known_count += 1;
                report.known_correct += correct as usize;
            }
        }
    }
    Ok(report)
}

/// Tags every sentence of `corpus` with the model's configured beam.
pub fn tag_corpus(model: &TaggerModel, corpus: &TaggedCorpus) -> Vec<TaggedOutput> {
    corpus
        .sentences()
        .iter()
        .map(|s| {
            let words: Vec<&str> = s.words().collect();
            model.tag_sentence(&words)
        })
        .collect()
}

/// Trains on `train`, tags `test` and scores it.
pub fn train_and_score(train: &TaggedCorpus, test: &TaggedCorpus, config: TaggerConfig) -> Result<FoldReport> {
    let model = TaggerModel::assemble(train, config)?;
    score(test, &tag_corpus(&model, test), &model)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValReport {
    pub folds: Vec<FoldReport>,
}

impl CrossValReport {
    pub fn summary(&self, m: Metric) -> Option<Summary> {
        Summary::of(self.folds.iter().filter_map(|f| f.metric(m)))
    }

    /// One row per fold followed by `mean` and `sd` rows.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("fold\ttokens");
        for m in Metric::ALL {
            let _ = write!(out, "\t{}", m.name());
        }
        out.push('\n');
        for (i, f) in self.folds.iter().enumerate() {
            let _ = write!(out, "{}\t{}", i, f.token_count);
            for m in Metric::ALL {
                let _ = write!(out, "\t{}", num(f.metric(m)));
            }
            out.push('\n');
        }
        let total: usize = self.folds.iter().map(|f| f.token_count).sum();
        for (label, pick) in [("mean", 0), ("sd", 1)] {
            let _ = write!(out, "{label}\t{total}");
            for m in Metric::ALL {
                let s = self.summary(m).map(|s| if pick == 0 { s.mean } else { s.sd });
                let _ = write!(out, "\t{}", num(s));
            }
            out.push('\n');
        }
        out
    }

    /// `key<TAB>value` lines: `folds`, `tokens`, then `<metric>.mean` and
    /// `<metric>.sd` for each metric.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "folds\t{}", self.folds.len());
        let total: usize = self.folds.iter().map(|f| f.token_count).sum();
        let _ = writeln!(out, "tokens\t{total}");
        for m in Metric::ALL {
            let s = self.summary(m);
            let _ = writeln!(out, "{}.mean\t{}", m.name(), num(s.map(|s| s.mean)));
            let _ = writeln!(out, "{}.sd\t{}", m.name(), num(s.map(|s| s.sd)));
        }
        out
    }
}

fn check_k(corpus: &TaggedCorpus, k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::Evaluation("cross-validation needs k >= 2".into()));
    }
    if corpus.sentences().len() < k {
        return Err(tnt_core::Error::TooFewSentences {
            sentences: corpus.sentences().len(),
            k,
        }
        .into());
    }
    Ok(())
}

/// The non-empty contiguous folds of `corpus`, in order. With blocks of
/// `ceil(n / k)` sentences the last folds can be empty; those are skipped.
fn folds(corpus: &TaggedCorpus, k: usize) -> Result<Vec<(TaggedCorpus, TaggedCorpus)>> {
    check_k(corpus, k)?;
    let mut out = Vec::with_capacity(k);
    for fold in 0..k {
        let (train, test) = corpus.partition_contiguous(fold, k)?;
        if !test.is_empty() {
            out.push((train, test));
        }
    }
    Ok(out)
}

/// k-fold contiguous cross-validation.
pub fn cross_validate(corpus: &TaggedCorpus, k: usize, config: TaggerConfig) -> Result<CrossValReport> {
    let folds = folds(corpus, k)?
        .par_iter()
        .map(|(train, test)| train_and_score(train, test, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(CrossValReport { folds })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningPoint {
    /// Requested training budget in tokens.
    pub size: usize,
    pub runs: Vec<FoldReport>,
}

impl LearningPoint {
    pub fn summary(&self, m: Metric) -> Option<Summary> {
        Summary::of(self.runs.iter().filter_map(|r| r.metric(m)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    pub points: Vec<LearningPoint>,
}

impl LearningCurve {
    /// Full table: size, then mean and sd of every metric.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("train_tokens");
        for m in Metric::ALL {
            let _ = write!(out, "\t{0}\t{0}.sd", m.name());
        }
        out.push('\n');
        for p in &self.points {
            let _ = write!(out, "{}", p.size);
            for m in Metric::ALL {
                let s = p.summary(m);
                let _ = write!(out, "\t{}\t{}", num(s.map(|s| s.mean)), num(s.map(|s| s.sd)));
            }
            out.push('\n');
        }
        out
    }

    /// Two-column plottable table of one metric's mean.
    pub fn to_table(&self, m: Metric) -> String {
        let mut out = format!("train_tokens\t{}\n", m.name());
        for p in &self.points {
            let _ = writeln!(out, "{}\t{}", p.size, num(p.summary(m).map(|s| s.mean)));
        }
        out
    }
}

/// For each training size and repeat, draws disjoint train and test samples,
/// trains, tags and scores. Repeat `r` of size index `i` uses seed
/// `seed + i * repeats + r`.
pub fn learning_curve(
    corpus: &TaggedCorpus,
    sizes: &[usize],
    test_tokens: usize,
    repeats: usize,
    seed: u64,
    config: TaggerConfig,
) -> Result<LearningCurve> {
    if sizes.is_empty() || repeats == 0 || test_tokens == 0 {
        return Err(Error::Evaluation(
            "need at least one size, one repeat and a positive test budget".into(),
        ));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) || sizes[0] == 0 {
        return Err(Error::Evaluation(
            "training sizes must be positive and strictly increasing".into(),
        ));
    }
    let largest = *sizes.last().unwrap();
    if largest + test_tokens > corpus.token_count() {
        return Err(tnt_core::Error::BudgetExceeded {
            requested: largest + test_tokens,
            available: corpus.token_count(),
        }
        .into());
    }
    let jobs: Vec<(usize, usize)> = (0..sizes.len())
        .flat_map(|i| (0..repeats).map(move |r| (i, r)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(i, r)| {
            let s = seed.wrapping_add((i * repeats + r) as u64);
            let (train, test) = corpus.sample_disjoint(sizes[i], test_tokens, s)?;
            train_and_score(&train, &test, config)
        })
        .collect::<Result<Vec<_>>>()?;
    let points = sizes
        .iter()
        .zip(runs.chunks(repeats))
        .map(|(&size, runs)| LearningPoint {
            size,
            runs: runs.to_vec(),
        })
        .collect();
    Ok(LearningCurve { points })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliabilityPoint {
    pub threshold: f64,
    pub total: usize,
    pub reliable: usize,
    pub reliable_correct: usize,
    pub unreliable_correct: usize,
}

impl ReliabilityPoint {
    pub fn reliable_fraction(&self) -> f64 {
        ratio(self.reliable, self.total).unwrap_or(0.0)
    }

    pub fn reliable_accuracy(&self) -> Option<f64> {
        ratio(self.reliable_correct, self.reliable)
    }

    pub fn unreliable_accuracy(&self) -> Option<f64> {
        ratio(self.unreliable_correct, self.total - self.reliable)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityCurve {
    pub points: Vec<ReliabilityPoint>,
}

/// Columns of a reliability table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReliabilityMetric {
    Fraction,
    ReliableAccuracy,
    UnreliableAccuracy,
}

impl ReliabilityMetric {
    pub fn name(self) -> &'static str {
        match self {
            ReliabilityMetric::Fraction => "reliable_fraction",
            ReliabilityMetric::ReliableAccuracy => "reliable_accuracy",
            ReliabilityMetric::UnreliableAccuracy => "unreliable_accuracy",
        }
    }

    fn get(self, p: &ReliabilityPoint) -> Option<f64> {
        match self {
            ReliabilityMetric::Fraction => Some(p.reliable_fraction()),
            ReliabilityMetric::ReliableAccuracy => p.reliable_accuracy(),
            ReliabilityMetric::UnreliableAccuracy => p.unreliable_accuracy(),
        }
    }
}

fn threshold_label(t: f64) -> String {
    if t.is_infinite() {
        "inf".into()
    } else {
        format!("{t}")
    }
}

impl ReliabilityCurve {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("threshold\ttokens\treliable");
        for m in [
            ReliabilityMetric::Fraction,
            ReliabilityMetric::ReliableAccuracy,
            ReliabilityMetric::UnreliableAccuracy,
        ] {
            let _ = write!(out, "\t{}", m.name());
        }
        out.push('\n');
        for p in &self.points {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                threshold_label(p.threshold),
                p.total,
                p.reliable,
                num(Some(p.reliable_fraction())),
                num(p.reliable_accuracy()),
                num(p.unreliable_accuracy())
            );
        }
        out
    }

    pub fn to_table(&self, m: ReliabilityMetric) -> String {
        let mut out = format!("threshold\t{}\n", m.name());
        for p in &self.points {
            let _ = writeln!(out, "{}\t{}", threshold_label(p.threshold), num(m.get(p)));
        }
        out
    }
}

/// Builds the curve from `(quotient, correct)` pairs. A token counts as
/// reliable when its quotient is at least the threshold, so threshold 1
/// covers every exactly decoded token and an infinite threshold keeps only
/// single-candidate tokens.
pub fn reliability_points(tokens: &[(f64, bool)], thresholds: &[f64]) -> Result<ReliabilityCurve> {
    if thresholds.iter().any(|t| t.is_nan() || *t < 1.0) {
        return Err(Error::Evaluation("reliability thresholds must be >= 1".into()));
    }
    let points = thresholds
        .iter()
        .map(|&threshold| {
            let mut p = ReliabilityPoint {
                threshold,
                total: tokens.len(),
                reliable: 0,
                reliable_correct: 0,
                unreliable_correct: 0,
            };
            for &(q, correct) in tokens {
                if q >= threshold {
                    p.reliable += 1;
                    p.reliable_correct += correct as usize;
                } else {
                    p.unreliable_correct += correct as usize;
                }
            }
            p
        })
        .collect();
    Ok(ReliabilityCurve { points })
}

/// Cross-validated `(quotient, correct)` pairs for every corpus token, in
/// corpus order. Decoding is exact.
pub fn reliability_tokens(corpus: &TaggedCorpus, k: usize, config: TaggerConfig) -> Result<Vec<(f64, bool)>> {
    let per_fold = folds(corpus, k)?
        .par_iter()
        .map(|(train, test)| -> Result<Vec<(f64, bool)>> {
            let model = TaggerModel::assemble(train, config)?;
            let mut out = Vec::with_capacity(test.token_count());
            for sentence in test.sentences() {
                let words: Vec<&str> = sentence.words().collect();
                let output = tag_with_reliability(&model, &words);
                for (gold, t) in sentence.tokens.iter().zip(&output.tokens) {
                    let q = t.quotient.unwrap_or(f64::NAN);
                    out.push((q, model.tag(t.tag) == &gold.tag));
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_fold.concat())
}

/// k-fold reliability sweep over the given thresholds.
pub fn reliability_curve(
    corpus: &TaggedCorpus,
    thresholds: &[f64],
    k: usize,
    config: TaggerConfig,
) -> Result<ReliabilityCurve> {
    reliability_points(&[], thresholds)?;
    reliability_points(&reliability_tokens(corpus, k, config)?, thresholds)
}
