//! Tag n-gram and lexical frequency tables, maximum-likelihood estimates,
//! deleted interpolation and the smoothed trigram probability.
//!
//! Every sentence is counted as the state sequence
//! `<BOS> <BOS> t1 ... tT <EOS>`. Boundary states take part in the bigram and
//! trigram tables and in deleted interpolation. They never enter the lexicon,
//! and `N` (the unigram denominator) counts real tokens only, so the unigram
//! estimate of a boundary state is zero. The unigram table records one
//! `<BOS>` and one `<EOS>` per sentence: `<BOS>` is counted once, as the
//! conditioning context of `t1`, which keeps every bigram row normalized.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::corpus::{Tag, TaggedCorpus, BOS_LABEL, EOS_LABEL};
use crate::{is_capitalized, Error, Result};

/// Index of a tag in a model's sorted tag list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TagId(pub u32);

impl TagId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A contextual state of the Markov model.
///
/// With capitalization enabled a state is a `(tag, flag)` composite; without
/// it `capitalized` is always false. The derived order sorts tags by name
/// (tag ids follow lexicographic order) with boundaries at either end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum State {
    Bos,
    Tag { tag: TagId, capitalized: bool },
    Eos,
}

impl State {
    pub fn tag(tag: TagId) -> Self {
        State::Tag {
            tag,
            capitalized: false,
        }
    }

    pub fn base_tag(self) -> Option<TagId> {
        match self {
            State::Tag { tag, .. } => Some(tag),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexEntry {
    pub total: u64,
    /// Sorted by tag id, counts are positive.
    pub tags: Vec<(TagId, u64)>,
}

impl LexEntry {
    pub fn count(&self, tag: TagId) -> u64 {
        self.tags
            .binary_search_by_key(&tag, |&(t, _)| t)
            .map_or(0, |i| self.tags[i].1)
    }
}

/// Which interpolation weight wins when two leave-one-out ratios tie.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Trigram over bigram over unigram.
    #[default]
    HigherOrder,
    /// Unigram over bigram over trigram.
    LowerOrder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NGramCounts {
    tags: Vec<Tag>,
    tag_counts: Vec<u64>,
    unigrams: BTreeMap<State, u64>,
    bigrams: BTreeMap<(State, State), u64>,
    trigrams: BTreeMap<(State, State, State), u64>,
    lexicon: BTreeMap<String, LexEntry>,
    total: u64,
    capitalization: bool,
}

fn bump<K: Ord>(map: &mut BTreeMap<K, u64>, key: K) {
    *map.entry(key).or_insert(0) += 1;
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl NGramCounts {
    /// Counts contextual states on base tags only.
    pub fn count(corpus: &TaggedCorpus) -> Result<Self> {
        Self::count_with(corpus, false)
    }

    /// Counts contextual n-grams over `(tag, capitalized)` composites when
    /// `capitalization` is set. Lexical counts always use base tags.
    pub fn count_with(corpus: &TaggedCorpus, capitalization: bool) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let tags: Vec<Tag> = corpus.tagset().iter().cloned().collect();
        let mut counts = NGramCounts {
            tag_counts: alloc::vec![0; tags.len()],
            tags,
            unigrams: BTreeMap::new(),
            bigrams: BTreeMap::new(),
            trigrams: BTreeMap::new(),
            lexicon: BTreeMap::new(),
            total: 0,
            capitalization,
        };
        let mut seq = Vec::new();
        for sentence in corpus.sentences() {
            seq.clear();
            seq.push(State::Bos);
            seq.push(State::Bos);
            for token in &sentence.tokens {
                let id = counts.tag_id(&token.tag).expect("tag from corpus tagset");
                counts.tag_counts[id.index()] += 1;
                counts.total += 1;
                let entry = counts
                    .lexicon
                    .entry(token.surface.clone())
                    .or_insert_with(|| LexEntry {
                        total: 0,
                        tags: Vec::new(),
                    });
                entry.total += 1;
                match entry.tags.binary_search_by_key(&id, |&(t, _)| t) {
                    Ok(i) => entry.tags[i].1 += 1,
                    Err(i) => entry.tags.insert(i, (id, 1)),
                }
                seq.push(State::Tag {
                    tag: id,
                    capitalized: capitalization && is_capitalized(&token.surface),
                });
            }
            seq.push(State::Eos);

            for &s in &seq[1..] {
                bump(&mut counts.unigrams, s);
            }
            for w in seq.windows(2) {
                bump(&mut counts.bigrams, (w[0], w[1]));
            }
            for w in seq.windows(3) {
                bump(&mut counts.trigrams, (w[0], w[1], w[2]));
            }
        }
        Ok(counts)
    }

    /// Reassembles counts from stored tables, checking their mutual
    /// consistency. Base tag counts and `N` are derived from the lexicon.
    pub fn from_tables(
        tags: Vec<Tag>,
        unigrams: BTreeMap<State, u64>,
        bigrams: BTreeMap<(State, State), u64>,
        trigrams: BTreeMap<(State, State, State), u64>,
        lexicon: BTreeMap<String, LexEntry>,
        capitalization: bool,
    ) -> Result<Self> {
        use alloc::format;
        if !tags.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Inconsistent("tag list is not strictly sorted".into()));
        }
        let in_range = |s: &State| match s {
            State::Tag { tag, capitalized } => {
                tag.index() < tags.len() && (capitalization || !capitalized)
            }
            _ => true,
        };
        if !unigrams.keys().all(in_range)
            || !bigrams.keys().all(|(a, b)| in_range(a) && in_range(b))
            || !trigrams
                .keys()
                .all(|(a, b, c)| in_range(a) && in_range(b) && in_range(c))
        {
            return Err(Error::Inconsistent("n-gram refers to an unknown state".into()));
        }
        let mut tag_counts = alloc::vec![0u64; tags.len()];
        let mut total = 0;
        for (word, entry) in &lexicon {
            let sum: u64 = entry.tags.iter().map(|&(_, c)| c).sum();
            if sum != entry.total
                || entry.tags.iter().any(|&(t, c)| c == 0 || t.index() >= tags.len())
                || !entry.tags.windows(2).all(|w| w[0].0 < w[1].0)
            {
                return Err(Error::Inconsistent(format!("bad lexicon entry for {word:?}")));
            }
            for &(t, c) in &entry.tags {
                tag_counts[t.index()] += c;
            }
            total += sum;
        }
        let state_total: u64 = unigrams
            .iter()
            .filter(|(s, _)| matches!(s, State::Tag { .. }))
            .map(|(_, &c)| c)
            .sum();
        if state_total != total {
            return Err(Error::Inconsistent(format!(
                "unigram counts sum to {state_total}, lexicon to {total}"
            )));
        }
        Ok(NGramCounts {
            tags,
            tag_counts,
            unigrams,
            bigrams,
            trigrams,
            lexicon,
            total,
            capitalization,
        })
    }

    pub fn tags(&self) -> &[Tag] {
        &self.tags
    }

    pub fn tag_id(&self, tag: &Tag) -> Option<TagId> {
        self.tags
            .binary_search(tag)
            .ok()
            .map(|i| TagId(i as u32))
    }

    pub fn tag(&self, id: TagId) -> &Tag {
        &self.tags[id.index()]
    }

    /// Looks up a tag by label; `<BOS>` and `<EOS>` map to boundary states.
    pub fn state(&self, label: &str, capitalized: bool) -> Option<State> {
        match label {
            BOS_LABEL => Some(State::Bos),
            EOS_LABEL => Some(State::Eos),
            _ => {
                let i = self.tags.binary_search_by(|t| t.as_str().cmp(label)).ok()?;
                Some(State::Tag {
                    tag: TagId(i as u32),
                    capitalized,
                })
            }
        }
    }

    pub fn capitalization(&self) -> bool {
        self.capitalization
    }

    /// `N`: number of real tokens counted.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Frequency of a base tag over real tokens.
    pub fn tag_count(&self, tag: TagId) -> u64 {
        self.tag_counts[tag.index()]
    }

    pub fn unigram(&self, s: State) -> u64 {
        self.unigrams.get(&s).copied().unwrap_or(0)
    }

    pub fn bigram(&self, a: State, b: State) -> u64 {
        self.bigrams.get(&(a, b)).copied().unwrap_or(0)
    }

    pub fn trigram(&self, a: State, b: State, c: State) -> u64 {
        self.trigrams.get(&(a, b, c)).copied().unwrap_or(0)
    }

    pub fn lexical(&self, word: &str, tag: TagId) -> u64 {
        self.lexicon.get(word).map_or(0, |e| e.count(tag))
    }

    pub fn word_total(&self, word: &str) -> u64 {
        self.lexicon.get(word).map_or(0, |e| e.total)
    }

    pub fn lex_entry(&self, word: &str) -> Option<&LexEntry> {
        self.lexicon.get(word)
    }

    pub fn unigrams(&self) -> &BTreeMap<State, u64> {
        &self.unigrams
    }

    pub fn bigrams(&self) -> &BTreeMap<(State, State), u64> {
        &self.bigrams
    }

    pub fn trigrams(&self) -> &BTreeMap<(State, State, State), u64> {
        &self.trigrams
    }

    pub fn lexicon(&self) -> &BTreeMap<String, LexEntry> {
        &self.lexicon
    }

    /// Contextual states that occur in the counts, boundaries excluded.
    pub fn context_states(&self) -> impl Iterator<Item = State> + '_ {
        self.unigrams
            .keys()
            .copied()
            .filter(|s| matches!(s, State::Tag { .. }))
    }

    /// `f(t3) / N`; zero for boundary states.
    pub fn mle_unigram(&self, t3: State) -> f64 {
        match t3 {
            State::Tag { .. } => ratio(self.unigram(t3), self.total),
            _ => 0.0,
        }
    }

    /// `f(t2, t3) / f(t2)`.
    pub fn mle_bigram(&self, t2: State, t3: State) -> f64 {
        ratio(self.bigram(t2, t3), self.unigram(t2))
    }

    /// `f(t1, t2, t3) / f(t1, t2)`.
    pub fn mle_trigram(&self, t1: State, t2: State, t3: State) -> f64 {
        ratio(self.trigram(t1, t2, t3), self.bigram(t1, t2))
    }

    /// `f(w, t) / f(t)` over base tags.
    pub fn mle_lexical(&self, word: &str, tag: TagId) -> f64 {
        ratio(self.lexical(word, tag), self.tag_count(tag))
    }

    /// Unconditioned maximum-likelihood distribution over base tags.
    pub fn tag_distribution(&self) -> Vec<f64> {
        self.tag_counts
            .iter()
            .map(|&c| ratio(c, self.total))
            .collect()
    }
}

/// Context-independent weights of the unigram, bigram and trigram estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationWeights {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

impl InterpolationWeights {
    pub fn new(lambda1: f64, lambda2: f64, lambda3: f64) -> Result<Self> {
        let ok = [lambda1, lambda2, lambda3]
            .iter()
            .all(|l| l.is_finite() && *l >= 0.0)
            && ((lambda1 + lambda2 + lambda3) - 1.0).abs() <= 1e-12;
        if !ok {
            return Err(Error::InvalidConfig("interpolation weights must be >= 0 and sum to 1"));
        }
        Ok(InterpolationWeights {
            lambda1,
            lambda2,
            lambda3,
        })
    }

    /// Normalizes integer accumulators. All-zero accumulators are rejected.
    pub fn from_accumulators(acc: [u64; 3]) -> Result<Self> {
        let sum = acc[0] + acc[1] + acc[2];
        if sum == 0 {
            return Err(Error::NoTrigrams);
        }
        let s = sum as f64;
        Ok(InterpolationWeights {
            lambda1: acc[0] as f64 / s,
            lambda2: acc[1] as f64 / s,
            lambda3: acc[2] as f64 / s,
        })
    }
}

/// Leave-one-out accumulators `[λ1, λ2, λ3]` before normalization.
///
/// For every counted trigram the weight whose estimate best predicts the
/// trigram with one occurrence of it removed is credited with the trigram's
/// frequency. A ratio with a zero denominator counts as zero.
pub fn interpolation_accumulators(counts: &NGramCounts, tie: TieBreak) -> [u64; 3] {
    let n = counts.total();
    let mut acc = [0u64; 3];
    for (&(t1, t2, t3), &f123) in counts.trigrams() {
        if f123 == 0 {
            continue;
        }
        let tri = ratio(f123 - 1, counts.bigram(t1, t2).saturating_sub(1));
        let bi = ratio(
            counts.bigram(t2, t3).saturating_sub(1),
            counts.unigram(t2).saturating_sub(1),
        );
        let uni = ratio(counts.unigram(t3).saturating_sub(1), n.saturating_sub(1));
        let slot = match tie {
            TieBreak::HigherOrder => {
                if tri >= bi && tri >= uni {
                    2
                } else if bi >= uni {
                    1
                } else {
                    0
                }
            }
            TieBreak::LowerOrder => {
                if uni >= bi && uni >= tri {
                    0
                } else if bi >= tri {
                    1
                } else {
                    2
                }
            }
        };
        acc[slot] += f123;
    }
    acc
}

/// Estimates λ1, λ2, λ3 by deleted interpolation.
pub fn deleted_interpolation(counts: &NGramCounts, tie: TieBreak) -> Result<InterpolationWeights> {
    InterpolationWeights::from_accumulators(interpolation_accumulators(counts, tie))
}

/// `λ1 P̂(t3) + λ2 P̂(t3|t2) + λ3 P̂(t3|t1,t2)`.
pub fn smoothed_trigram(
    counts: &NGramCounts,
    weights: &InterpolationWeights,
    t1: State,
    t2: State,
    t3: State,
) -> f64 {
    weights.lambda1 * counts.mle_unigram(t3)
        + weights.lambda2 * counts.mle_bigram(t2, t3)
        + weights.lambda3 * counts.mle_trigram(t1, t2, t3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::fixture_a;
    use alloc::vec;

    fn st(c: &NGramCounts, label: &str) -> State {
        c.state(label, false).unwrap()
    }

    #[test]
    fn fixture_counts() {
        let c = NGramCounts::count(&fixture_a()).unwrap();
        let (dt, nn, vb, sent) = (st(&c, "DT"), st(&c, "NN"), st(&c, "VB"), st(&c, "SENT"));
        assert_eq!(c.unigram(dt), 2);
        assert_eq!(c.bigram(dt, nn), 2);
        assert_eq!(c.trigram(dt, nn, vb), 2);
        assert_eq!(c.lexical("dog", nn.base_tag().unwrap()), 1);
        assert_eq!(c.total(), 8);
        assert_eq!(c.trigram(State::Bos, State::Bos, dt), 2);
        assert_eq!(c.bigram(sent, State::Eos), 2);
        assert_eq!(c.unigram(State::Bos), 2);
        assert_eq!(c.unigram(State::Eos), 2);
        assert_eq!(c.trigrams().len(), 5);
        let real: u64 = c.context_states().map(|s| c.unigram(s)).sum();
        assert_eq!(real, c.total());
    }

    #[test]
    fn minimal_sentence_counts() {
        let c = NGramCounts::count(&TaggedCorpus::from_pairs([[("a", "X")]]).unwrap()).unwrap();
        let x = st(&c, "X");
        assert_eq!(c.trigram(State::Bos, State::Bos, x), 1);
        assert_eq!(c.bigram(x, State::Eos), 1);
    }

    #[test]
    fn empty_corpus_rejected() {
        assert_eq!(
            NGramCounts::count(&TaggedCorpus::default()).unwrap_err(),
            Error::EmptyCorpus
        );
    }

    #[test]
    fn mle_examples() {
        let c = NGramCounts::count(&fixture_a()).unwrap();
        let (dt, nn, vb) = (st(&c, "DT"), st(&c, "NN"), st(&c, "VB"));
        assert_eq!(c.mle_bigram(dt, nn), 1.0);
        assert_eq!(c.mle_lexical("dog", nn.base_tag().unwrap()), 0.5);
        assert_eq!(c.mle_trigram(vb, vb, vb), 0.0);
        assert_eq!(c.mle_unigram(vb), 0.25);
        assert_eq!(c.mle_unigram(State::Eos), 0.0);
    }

    #[test]
    fn smoothed_fixture_value() {
        let c = NGramCounts::count(&fixture_a()).unwrap();
        let w = InterpolationWeights::new(0.2, 0.3, 0.5).unwrap();
        let p = smoothed_trigram(&c, &w, st(&c, "DT"), st(&c, "NN"), st(&c, "VB"));
        assert!((p - 0.85).abs() < 1e-15);
        let uni = InterpolationWeights::new(1.0, 0.0, 0.0).unwrap();
        for t1 in [State::Bos, st(&c, "DT"), st(&c, "VB")] {
            let p = smoothed_trigram(&c, &uni, t1, st(&c, "SENT"), st(&c, "NN"));
            assert_eq!(p, c.mle_unigram(st(&c, "NN")));
        }
        // Unseen tag: all three components vanish.
        let unseen = State::tag(TagId(99));
        assert_eq!(smoothed_trigram(&c, &w, State::Bos, State::Bos, unseen), 0.0);
    }

    #[test]
    fn weights_validation() {
        assert!(InterpolationWeights::new(0.5, 0.5, 0.1).is_err());
        assert!(InterpolationWeights::new(-0.1, 0.6, 0.5).is_err());
        assert_eq!(
            InterpolationWeights::from_accumulators([0, 0, 0]).unwrap_err(),
            Error::NoTrigrams
        );
    }

    #[test]
    fn single_sentence_three_way_tie() {
        // (<BOS>,<BOS>,X): 0/0, 0/0 and (1-1)/(2-1) all evaluate to zero.
        let c = NGramCounts::count(&TaggedCorpus::from_pairs([[("a", "X"), ("b", "Y")]]).unwrap())
            .unwrap();
        let hi = interpolation_accumulators(&c, TieBreak::HigherOrder);
        let lo = interpolation_accumulators(&c, TieBreak::LowerOrder);
        // Every trigram in a single sentence has f = 1, so every ratio is 0.
        assert_eq!(hi, [0, 0, 3]);
        assert_eq!(lo, [3, 0, 0]);
    }

    #[test]
    fn trigram_preference_gives_pure_trigram_weights() {
        // Trigram ratios are 1 everywhere; bigram ratios reach at most 1 and
        // unigram ratios stay at 0.25.
        let corpus = TaggedCorpus::from_pairs(vec![
            vec![("a", "A"), ("b", "B"), ("c", "C")],
            vec![("a", "A"), ("b", "B"), ("c", "C")],
            vec![("a", "A"), ("b", "B"), ("c", "C")],
        ])
        .unwrap();
        let c = NGramCounts::count(&corpus).unwrap();
        let w = deleted_interpolation(&c, TieBreak::HigherOrder).unwrap();
        assert_eq!((w.lambda1, w.lambda2, w.lambda3), (0.0, 0.0, 1.0));
    }

    #[test]
    fn from_tables_roundtrip_and_validation() {
        let c = NGramCounts::count_with(&fixture_a(), true).unwrap();
        let rebuilt = NGramCounts::from_tables(
            c.tags().to_vec(),
            c.unigrams().clone(),
            c.bigrams().clone(),
            c.trigrams().clone(),
            c.lexicon().clone(),
            true,
        )
        .unwrap();
        assert_eq!(rebuilt, c);
        let mut bad = c.unigrams().clone();
        *bad.get_mut(&st(&c, "DT")).unwrap() += 1;
        assert!(NGramCounts::from_tables(
            c.tags().to_vec(),
            bad,
            c.bigrams().clone(),
            c.trigrams().clone(),
            c.lexicon().clone(),
            true,
        )
        .is_err());
    }
}
