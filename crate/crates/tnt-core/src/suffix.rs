//! Suffix tries for tagging words that are missing from the lexicon.
//!
//! Words are inserted character by character from the end, so a node at depth
//! `i` holds the tag frequencies of all words ending in that `i`-character
//! suffix. Tag distributions are smoothed by successive abstraction: starting
//! from the root (empty suffix), each longer matched suffix mixes its own
//! maximum-likelihood estimate with the distribution of the next shorter one,
//! weighted `1 : θ`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::ngram::{NGramCounts, TagId};
use crate::{is_capitalized, Error, Result};

/// How θ is derived from the spread of the tag distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThetaMode {
    /// The sample variance `1/(s-1) Σ (P̂(t) - P̄)²`.
    #[default]
    Printed,
    /// The square root of the sample variance.
    Sqrt,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
struct Node {
    children: BTreeMap<char, u32>,
    /// Sorted by tag id.
    counts: Vec<(TagId, u64)>,
    total: u64,
}

impl Node {
    fn add(&mut self, tag: TagId, count: u64) {
        self.total += count;
        match self.counts.binary_search_by_key(&tag, |&(t, _)| t) {
            Ok(i) => self.counts[i].1 += count,
            Err(i) => self.counts.insert(i, (tag, count)),
        }
    }

    fn count(&self, tag: TagId) -> u64 {
        self.counts
            .binary_search_by_key(&tag, |&(t, _)| t)
            .map_or(0, |i| self.counts[i].1)
    }
}

/// Tag frequencies indexed by reversed word endings.
///
/// Equality compares contents, not arena layout, so a trie rebuilt from its
/// entries equals the original.
#[derive(Debug, Clone)]
pub struct SuffixTrie {
    nodes: Vec<Node>,
}

impl PartialEq for SuffixTrie {
    fn eq(&self, other: &Self) -> bool {
        self.entries() == other.entries()
    }
}

impl Eq for SuffixTrie {}

impl Default for SuffixTrie {
    fn default() -> Self {
        SuffixTrie {
            nodes: vec![Node::default()],
        }
    }
}

impl SuffixTrie {
    fn child(&self, node: usize, c: char) -> Option<usize> {
        self.nodes[node].children.get(&c).map(|&i| i as usize)
    }

    fn child_or_insert(&mut self, node: usize, c: char) -> usize {
        if let Some(i) = self.child(node, c) {
            return i;
        }
        let id = self.nodes.len();
        self.nodes.push(Node::default());
        self.nodes[node].children.insert(c, id as u32);
        id
    }

    /// Adds `count` occurrences of `word` with `tag` to every suffix node up
    /// to `max_length` characters.
    pub fn insert(&mut self, word: &str, tag: TagId, count: u64, max_length: usize) {
        let mut node = 0;
        self.nodes[0].add(tag, count);
        for c in word.chars().rev().take(max_length) {
            node = self.child_or_insert(node, c);
            self.nodes[node].add(tag, count);
        }
    }

    fn find(&self, suffix: &str) -> Option<usize> {
        suffix
            .chars()
            .rev()
            .try_fold(0, |node, c| self.child(node, c))
    }

    /// `f(suffix)`; zero when the suffix was never seen.
    pub fn total(&self, suffix: &str) -> u64 {
        self.find(suffix).map_or(0, |n| self.nodes[n].total)
    }

    /// `f(tag, suffix)`.
    pub fn count(&self, suffix: &str, tag: TagId) -> u64 {
        self.find(suffix).map_or(0, |n| self.nodes[n].count(tag))
    }

    pub fn is_empty(&self) -> bool {
        self.nodes[0].total == 0
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Node ids along the longest stored suffix of `word`, root first.
    fn path(&self, word: &str, max_length: usize) -> Vec<usize> {
        let mut path = vec![0];
        let mut node = 0;
        for c in word.chars().rev().take(max_length) {
            match self.child(node, c) {
                Some(next) if self.nodes[next].total > 0 => {
                    node = next;
                    path.push(node);
                }
                _ => break,
            }
        }
        path
    }

    /// Length in characters of the longest suffix of `word` seen in the trie.
    pub fn longest_match(&self, word: &str, max_length: usize) -> usize {
        self.path(word, max_length).len() - 1
    }

    /// Every `(suffix, tag, count)` triple, sorted by suffix and then tag.
    pub fn entries(&self) -> Vec<(String, TagId, u64)> {
        let mut out = Vec::new();
        let mut stack = vec![(0usize, String::new())];
        while let Some((node, reversed)) = stack.pop() {
            let suffix: String = reversed.chars().rev().collect();
            for &(tag, count) in &self.nodes[node].counts {
                out.push((suffix.clone(), tag, count));
            }
            for (&c, &child) in &self.nodes[node].children {
                let mut r = reversed.clone();
                r.push(c);
                stack.push((child as usize, r));
            }
        }
        out.sort();
        out
    }

    /// Rebuilds a trie from node-level counts as produced by [`entries`].
    ///
    /// Every proper suffix of a stored suffix must itself be stored with at
    /// least the same tag counts.
    ///
    /// [`entries`]: SuffixTrie::entries
    pub fn from_entries(entries: impl IntoIterator<Item = (String, TagId, u64)>) -> Result<Self> {
        let mut trie = SuffixTrie::default();
        for (suffix, tag, count) in entries {
            let mut node = 0;
            for c in suffix.chars().rev() {
                node = trie.child_or_insert(node, c);
            }
            if trie.nodes[node].count(tag) != 0 {
                return Err(Error::Inconsistent(alloc::format!(
                    "duplicate suffix entry {suffix:?}"
                )));
            }
            trie.nodes[node].add(tag, count);
        }
        for parent in 0..trie.nodes.len() {
            for &child in trie.nodes[parent].children.values() {
                let child = &trie.nodes[child as usize];
                let ok = child
                    .counts
                    .iter()
                    .all(|&(t, c)| c <= trie.nodes[parent].count(t));
                if !ok || child.total == 0 {
                    return Err(Error::Inconsistent(
                        "suffix counts grow with suffix length".into(),
                    ));
                }
            }
        }
        Ok(trie)
    }

    fn mle(&self, node: usize, ntags: usize) -> Vec<f64> {
        let node = &self.nodes[node];
        let mut dist = vec![0.0; ntags];
        if node.total > 0 {
            for &(t, c) in &node.counts {
                dist[t.index()] = c as f64 / node.total as f64;
            }
        }
        dist
    }
}

/// Smoothing weight from the spread of the unconditioned tag distribution.
pub fn theta(distribution: &[f64], mode: ThetaMode) -> Result<f64> {
    let s = distribution.len();
    if s < 2 {
        return Err(Error::TooFewTags(s));
    }
    let mean = distribution.iter().sum::<f64>() / s as f64;
    let variance = distribution
        .iter()
        .map(|p| (p - mean) * (p - mean))
        .sum::<f64>()
        / (s - 1) as f64;
    Ok(match mode {
        ThetaMode::Printed => variance,
        ThetaMode::Sqrt => libm::sqrt(variance),
    })
}

/// Suffix-based tag guesser for words outside the lexicon.
#[derive(Debug, Clone, PartialEq)]
pub struct SuffixModel {
    lower: SuffixTrie,
    upper: SuffixTrie,
    theta: f64,
    max_length: usize,
    max_word_freq: u64,
    /// Unconditioned `P̂(t)` over the whole training corpus.
    prior: Vec<f64>,
}

impl SuffixModel {
    /// Builds both tries from the lexicon words with total frequency at most
    /// `max_word_freq`.
    pub fn build(
        counts: &NGramCounts,
        max_length: usize,
        max_word_freq: u64,
        mode: ThetaMode,
    ) -> Result<Self> {
        let prior = counts.tag_distribution();
        let theta = theta(&prior, mode)?;
        let mut lower = SuffixTrie::default();
        let mut upper = SuffixTrie::default();
        for (word, entry) in counts.lexicon() {
            if entry.total > max_word_freq {
                continue;
            }
            let trie = if is_capitalized(word) {
                &mut upper
            } else {
                &mut lower
            };
            for &(tag, count) in &entry.tags {
                trie.insert(word, tag, count, max_length);
            }
        }
        if lower.is_empty() && upper.is_empty() {
            return Err(Error::EmptySuffixLexicon {
                threshold: max_word_freq,
            });
        }
        Ok(SuffixModel {
            lower,
            upper,
            theta,
            max_length,
            max_word_freq,
            prior,
        })
    }

    /// Reassembles a model from stored tries and a known θ.
    pub fn from_parts(
        counts: &NGramCounts,
        lower: SuffixTrie,
        upper: SuffixTrie,
        theta: f64,
        max_length: usize,
        max_word_freq: u64,
    ) -> Result<Self> {
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(Error::InvalidConfig("theta must be finite and >= 0"));
        }
        if lower.is_empty() && upper.is_empty() {
            return Err(Error::EmptySuffixLexicon {
                threshold: max_word_freq,
            });
        }
        Ok(SuffixModel {
            lower,
            upper,
            theta,
            max_length,
            max_word_freq,
            prior: counts.tag_distribution(),
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn max_length(&self) -> usize {
        self.max_length
    }

    pub fn max_word_freq(&self) -> u64 {
        self.max_word_freq
    }

    pub fn lower(&self) -> &SuffixTrie {
        &self.lower
    }

    pub fn upper(&self) -> &SuffixTrie {
        &self.upper
    }

    pub fn trie_for(&self, word: &str) -> &SuffixTrie {
        if is_capitalized(word) {
            &self.upper
        } else {
            &self.lower
        }
    }

    /// Distribution that seeds the recursion for the selected trie: the
    /// maximum-likelihood estimate at its root, or the corpus-wide tag
    /// distribution when that trie received no words.
    pub fn root_distribution(&self, capitalized: bool) -> Vec<f64> {
        let trie = if capitalized { &self.upper } else { &self.lower };
        if trie.is_empty() {
            self.prior.clone()
        } else {
            trie.mle(0, self.prior.len())
        }
    }

    /// Smoothed `P(t | longest matched suffix of word)` for every tag id.
    pub fn tag_distribution(&self, word: &str) -> Vec<f64> {
        let capitalized = is_capitalized(word);
        let trie = self.trie_for(word);
        if trie.is_empty() {
            return self.root_distribution(capitalized);
        }
        self.smooth_along(capitalized, &trie.path(word, self.max_length))
    }

    /// Smoothed distribution at one stored suffix node of the chosen trie,
    /// or `None` if the suffix was never seen there.
    pub fn suffix_distribution(&self, capitalized: bool, suffix: &str) -> Option<Vec<f64>> {
        let trie = if capitalized { &self.upper } else { &self.lower };
        let len = suffix.chars().count();
        if trie.is_empty() || len > self.max_length {
            return None;
        }
        let path = trie.path(suffix, len);
        (path.len() == len + 1).then(|| self.smooth_along(capitalized, &path))
    }

    fn smooth_along(&self, capitalized: bool, path: &[usize]) -> Vec<f64> {
        let trie = if capitalized { &self.upper } else { &self.lower };
        let mut dist = self.root_distribution(capitalized);
        let ntags = self.prior.len();
        let denom = 1.0 + self.theta;
        for &node in &path[1..] {
            let mle = trie.mle(node, ntags);
            for (p, m) in dist.iter_mut().zip(mle) {
                *p = (m + self.theta * *p) / denom;
            }
        }
        dist
    }

    /// Bayesian inversion of the suffix distribution: `P(t | suffix) / P̂(t)`,
    /// proportional to `P(suffix | t)`. Zero for tags absent from training.
    pub fn emission_score(&self, word: &str, tag: TagId) -> f64 {
        self.emission_scores(word)[tag.index()]
    }

    /// [`emission_score`](Self::emission_score) for every tag id at once.
    pub fn emission_scores(&self, word: &str) -> Vec<f64> {
        let mut dist = self.tag_distribution(word);
        for (p, &prior) in dist.iter_mut().zip(&self.prior) {
            *p = if prior > 0.0 { *p / prior } else { 0.0 };
        }
        dist
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }
}
