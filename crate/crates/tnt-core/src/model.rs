//! The assembled tagger: counts, interpolation weights, suffix guesser and
//! the precomputed transition tables used during decoding.

use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::corpus::{Tag, TaggedCorpus};
use crate::ngram::{deleted_interpolation, InterpolationWeights, NGramCounts, State, TagId, TieBreak};
use crate::suffix::{SuffixModel, ThetaMode};
use crate::{is_capitalized, Error, Result};

pub const DEFAULT_BEAM: f64 = 1000.0;
pub const DEFAULT_MAX_SUFFIX: usize = 10;
pub const DEFAULT_SUFFIX_FREQ: u64 = 10;
pub const DEFAULT_UNKNOWN_CANDIDATES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaggerConfig {
    /// δ-ratio pruning threshold; `None` decodes exactly.
    pub beam_theta: Option<f64>,
    /// Longest suffix considered for unknown words, in characters.
    pub max_suffix: usize,
    /// Only words at most this frequent feed the suffix tries.
    pub suffix_freq_threshold: u64,
    pub tie_break: TieBreak,
    pub theta_mode: ThetaMode,
    /// Condition contextual probabilities on capitalization flags.
    pub capitalization: bool,
    /// Keep only this many best-scoring tags for an unknown word.
    pub unknown_candidates: Option<usize>,
}

impl Default for TaggerConfig {
    fn default() -> Self {
        TaggerConfig {
            beam_theta: Some(DEFAULT_BEAM),
            max_suffix: DEFAULT_MAX_SUFFIX,
            suffix_freq_threshold: DEFAULT_SUFFIX_FREQ,
            tie_break: TieBreak::HigherOrder,
            theta_mode: ThetaMode::Printed,
            capitalization: true,
            unknown_candidates: Some(DEFAULT_UNKNOWN_CANDIDATES),
        }
    }
}

impl TaggerConfig {
    /// Configuration for exact decoding with no candidate pruning.
    pub fn exact() -> Self {
        TaggerConfig {
            beam_theta: None,
            unknown_candidates: None,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(b) = self.beam_theta {
            if b.is_nan() || b <= 1.0 {
                return Err(Error::InvalidConfig("beam threshold must be greater than 1"));
            }
        }
        if self.max_suffix == 0 || self.suffix_freq_threshold == 0 {
            return Err(Error::InvalidConfig("suffix length and frequency threshold must be >= 1"));
        }
        if self.unknown_candidates == Some(0) {
            return Err(Error::InvalidConfig("unknown-word candidate cap must be >= 1"));
        }
        Ok(())
    }
}

/// A possible tag for one token with its emission score (`P(w|t)` for known
/// words, the inverted suffix score for unknown ones).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateTag {
    pub tag: TagId,
    pub emission: f64,
}

/// Dense `λ1 P̂(t3) + λ2 P̂(t3|t2)` plus a sparse `λ3 P̂(t3|t1,t2)` table over
/// contextual state indices.
#[derive(Debug, Clone)]
struct TransitionTables {
    width: usize,
    capitalization: bool,
    pair: Vec<f64>,
    trigram: HashMap<(u32, u32, u32), f64>,
}

impl TransitionTables {
    fn build(counts: &NGramCounts, w: &InterpolationWeights) -> Self {
        let ntags = counts.tags().len();
        let capitalization = counts.capitalization();
        let width = if capitalization { 2 * ntags + 2 } else { ntags + 2 };
        let mut tables = TransitionTables {
            width,
            capitalization,
            pair: alloc::vec![0.0; width * width],
            trigram: HashMap::new(),
        };
        let states: Vec<State> = (0..width).map(|i| tables.state(i)).collect();
        for &t2 in &states {
            for &t3 in &states {
                let p = w.lambda1 * counts.mle_unigram(t3) + w.lambda2 * counts.mle_bigram(t2, t3);
                let at = tables.index(t2) * width + tables.index(t3);
                tables.pair[at] = p;
            }
        }
        for &(t1, t2, t3) in counts.trigrams().keys() {
            let p = w.lambda3 * counts.mle_trigram(t1, t2, t3);
            let key = (tables.index(t1) as u32, tables.index(t2) as u32, tables.index(t3) as u32);
            tables.trigram.insert(key, p);
        }
        tables
    }

    fn index(&self, s: State) -> usize {
        match s {
            State::Bos => 0,
            State::Eos => self.width - 1,
            State::Tag { tag, capitalized } => {
                if self.capitalization {
                    1 + 2 * tag.index() + capitalized as usize
                } else {
                    1 + tag.index()
                }
            }
        }
    }

    fn state(&self, i: usize) -> State {
        if i == 0 {
            State::Bos
        } else if i == self.width - 1 {
            State::Eos
        } else if self.capitalization {
            State::Tag {
                tag: TagId(((i - 1) / 2) as u32),
                capitalized: (i - 1) % 2 == 1,
            }
        } else {
            State::tag(TagId((i - 1) as u32))
        }
    }

    #[inline]
    fn prob(&self, i1: usize, i2: usize, i3: usize) -> f64 {
        let pair = self.pair[i2 * self.width + i3];
        match self.trigram.get(&(i1 as u32, i2 as u32, i3 as u32)) {
            Some(t) => pair + t,
            None => pair,
        }
    }
}

/// Immutable trained model. Safe to share between threads.
#[derive(Debug, Clone)]
pub struct TaggerModel {
    counts: NGramCounts,
    weights: InterpolationWeights,
    suffix: SuffixModel,
    config: TaggerConfig,
    tables: TransitionTables,
}

impl TaggerModel {
    /// Counts, estimates interpolation weights and builds the suffix tries.
    pub fn assemble(corpus: &TaggedCorpus, config: TaggerConfig) -> Result<Self> {
        config.validate()?;
        let counts = NGramCounts::count_with(corpus, config.capitalization)?;
        let weights = deleted_interpolation(&counts, config.tie_break)?;
        let suffix = SuffixModel::build(
            &counts,
            config.max_suffix,
            config.suffix_freq_threshold,
            config.theta_mode,
        )?;
        Self::from_parts(counts, weights, suffix, config)
    }

    pub fn from_parts(
        counts: NGramCounts,
        weights: InterpolationWeights,
        suffix: SuffixModel,
        config: TaggerConfig,
    ) -> Result<Self> {
        config.validate()?;
        if counts.capitalization() != config.capitalization {
            return Err(Error::Inconsistent(
                "capitalization flag differs between counts and configuration".into(),
            ));
        }
        let tables = TransitionTables::build(&counts, &weights);
        Ok(TaggerModel {
            counts,
            weights,
            suffix,
            config,
            tables,
        })
    }

    /// Same model with a different decoding configuration. Only fields that
    /// do not affect training may change.
    pub fn with_decoding(&self, beam_theta: Option<f64>, unknown_candidates: Option<usize>) -> Result<Self> {
        let config = TaggerConfig {
            beam_theta,
            unknown_candidates,
            ..self.config
        };
        config.validate()?;
        let mut model = self.clone();
        model.config = config;
        Ok(model)
    }

    pub fn counts(&self) -> &NGramCounts {
        &self.counts
    }

    pub fn weights(&self) -> &InterpolationWeights {
        &self.weights
    }

    pub fn suffix_model(&self) -> &SuffixModel {
        &self.suffix
    }

    pub fn config(&self) -> &TaggerConfig {
        &self.config
    }

    pub fn tags(&self) -> &[Tag] {
        self.counts.tags()
    }

    pub fn tag(&self, id: TagId) -> &Tag {
        self.counts.tag(id)
    }

    pub fn is_known(&self, word: &str) -> bool {
        self.counts.lex_entry(word).is_some()
    }

    /// Contextual state a word takes when tagged `tag`.
    pub fn state_for(&self, word: &str, tag: TagId) -> State {
        State::Tag {
            tag,
            capitalized: self.config.capitalization && is_capitalized(word),
        }
    }

    /// Smoothed `P(t3 | t1, t2)` from the precomputed tables.
    pub fn transition(&self, t1: State, t2: State, t3: State) -> f64 {
        let t = &self.tables;
        t.prob(t.index(t1), t.index(t2), t.index(t3))
    }

    #[inline]
    pub(crate) fn transition_index(&self, i1: usize, i2: usize, i3: usize) -> f64 {
        self.tables.prob(i1, i2, i3)
    }

    pub(crate) fn state_index(&self, s: State) -> usize {
        self.tables.index(s)
    }

    /// Possible tags of a word, sorted by tag id, and whether the word is in
    /// the lexicon.
    ///
    /// Known words get exactly their observed tags scored by `P̂(w|t)`.
    /// Unknown words get every tag with a positive suffix score, cut to the
    /// configured number of best-scoring tags.
    pub fn candidates(&self, word: &str) -> (Vec<CandidateTag>, bool) {
        if let Some(entry) = self.counts.lex_entry(word) {
            let cands = entry
                .tags
                .iter()
                .map(|&(tag, _)| CandidateTag {
                    tag,
                    emission: self.counts.mle_lexical(word, tag),
                })
                .collect();
            return (cands, true);
        }
        let mut cands: Vec<CandidateTag> = self
            .suffix
            .emission_scores(word)
            .into_iter()
            .enumerate()
            .filter(|&(_, s)| s > 0.0)
            .map(|(i, emission)| CandidateTag {
                tag: TagId(i as u32),
                emission,
            })
            .collect();
        if cands.is_empty() {
            // Only reachable when every score underflows; fall back to the
            // prior so that decoding always has a state.
            cands = self
                .suffix
                .prior()
                .iter()
                .enumerate()
                .filter(|&(_, &p)| p > 0.0)
                .map(|(i, _)| CandidateTag {
                    tag: TagId(i as u32),
                    emission: 1.0,
                })
                .collect();
        }
        if let Some(cap) = self.config.unknown_candidates {
            if cands.len() > cap {
                cands.sort_by(|a, b| b.emission.total_cmp(&a.emission).then(a.tag.cmp(&b.tag)));
                cands.truncate(cap);
                cands.sort_by_key(|c| c.tag);
            }
        }
        (cands, false)
    }
}
