//! Tagged and untagged corpora, sentence splitting and train/test partitioning.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Label of the two beginning-of-sentence states.
pub const BOS_LABEL: &str = "<BOS>";
/// Label of the end-of-sentence state.
pub const EOS_LABEL: &str = "<EOS>";

/// Tokens that close a sentence when the input carries no explicit breaks.
pub const SENTENCE_TERMINATORS: [&str; 4] = [".", "!", "?", ";"];

/// A part-of-speech label such as `NN`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag(String);

impl Tag {
    pub fn new(symbol: impl Into<String>) -> Result<Self> {
        let symbol = symbol.into();
        if symbol.is_empty() || symbol.chars().any(char::is_whitespace) {
            return Err(Error::InvalidTag(symbol));
        }
        if symbol == BOS_LABEL || symbol == EOS_LABEL {
            return Err(Error::ReservedTag(symbol));
        }
        Ok(Tag(symbol))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tag({})", self.0)
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Tag {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedToken {
    pub surface: String,
    pub tag: Tag,
}

impl TaggedToken {
    pub fn new(surface: impl Into<String>, tag: Tag) -> Result<Self> {
        let surface = surface.into();
        check_surface(&surface)?;
        Ok(TaggedToken { surface, tag })
    }
}

pub(crate) fn check_surface(surface: &str) -> Result<()> {
    if surface.is_empty() || surface.chars().any(char::is_whitespace) {
        return Err(Error::InvalidToken(surface.to_string()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    pub tokens: Vec<TaggedToken>,
}

impl TaggedSentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.surface.as_str())
    }

    pub fn tags(&self) -> impl Iterator<Item = &Tag> {
        self.tokens.iter().map(|t| &t.tag)
    }
}

/// Ordered sentences of `(token, tag)` pairs.
///
/// The tag set and token count are derived on construction and always agree
/// with the sentences.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TaggedCorpus {
    sentences: Vec<TaggedSentence>,
    tagset: BTreeSet<Tag>,
    token_count: usize,
}

impl TaggedCorpus {
    pub fn new(sentences: Vec<TaggedSentence>) -> Result<Self> {
        let mut tagset = BTreeSet::new();
        let mut token_count = 0;
        for (i, sentence) in sentences.iter().enumerate() {
            if sentence.is_empty() {
                return Err(Error::EmptySentence(i));
            }
            for token in &sentence.tokens {
                check_surface(&token.surface)?;
                tagset.insert(token.tag.clone());
            }
            token_count += sentence.len();
        }
        Ok(TaggedCorpus {
            sentences,
            tagset,
            token_count,
        })
    }

    /// Builds a corpus from `(word, tag)` string pairs. Mostly a convenience
    /// for tests and synthetic data.
    pub fn from_pairs<'a, S, I>(sentences: S) -> Result<Self>
    where
        S: IntoIterator<Item = I>,
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut out = Vec::new();
        for sentence in sentences {
            let tokens = sentence
                .into_iter()
                .map(|(w, t)| TaggedToken::new(w, Tag::new(t)?))
                .collect::<Result<Vec<_>>>()?;
            out.push(TaggedSentence { tokens });
        }
        Self::new(out)
    }

    pub fn sentences(&self) -> &[TaggedSentence] {
        &self.sentences
    }

    pub fn tagset(&self) -> &BTreeSet<Tag> {
        &self.tagset
    }

    pub fn token_count(&self) -> usize {
        self.token_count
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    fn subset(&self, indices: impl IntoIterator<Item = usize>) -> TaggedCorpus {
        let sentences: Vec<_> = indices
            .into_iter()
            .map(|i| self.sentences[i].clone())
            .collect();
        // Sub-corpora of a valid corpus are valid.
        TaggedCorpus::new(sentences).expect("subset of a valid corpus")
    }

    /// Splits off the `fold`-th contiguous block of `ceil(n / k)` sentences as
    /// the test set; the remaining sentences, in order, form the training set.
    pub fn partition_contiguous(
        &self,
        fold: usize,
        k: usize,
    ) -> Result<(TaggedCorpus, TaggedCorpus)> {
        if k == 0 || fold >= k {
            return Err(Error::FoldOutOfRange { fold, k });
        }
        let n = self.sentences.len();
        if k > n {
            return Err(Error::TooFewSentences { sentences: n, k });
        }
        let block = n.div_ceil(k);
        let start = (fold * block).min(n);
        let end = (start + block).min(n);
        let train = self.subset((0..start).chain(end..n));
        let test = self.subset(start..end);
        Ok((train, test))
    }

    /// Draws disjoint random training and test sets at sentence granularity.
    ///
    /// Sentences are visited in a seeded random order; the test set is filled
    /// first until it reaches `test_tokens`, then the training set until it
    /// reaches `train_tokens`. Both sides keep the original corpus order.
    pub fn sample_disjoint(
        &self,
        train_tokens: usize,
        test_tokens: usize,
        seed: u64,
    ) -> Result<(TaggedCorpus, TaggedCorpus)> {
        let requested = train_tokens + test_tokens;
        if requested > self.token_count {
            return Err(Error::BudgetExceeded {
                requested,
                available: self.token_count,
            });
        }
        let mut order: Vec<usize> = (0..self.sentences.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

        let mut pool = order.into_iter();
        let mut take = |budget: usize| -> Result<Vec<usize>> {
            let mut picked = Vec::new();
            let mut got = 0;
            while got < budget {
                let Some(i) = pool.next() else {
                    return Err(Error::BudgetExceeded {
                        requested,
                        available: self.token_count,
                    });
                };
                got += self.sentences[i].len();
                picked.push(i);
            }
            picked.sort_unstable();
            Ok(picked)
        };
        let test = take(test_tokens)?;
        let train = take(train_tokens)?;
        Ok((self.subset(train), self.subset(test)))
    }
}

/// Splits a whitespace-separated token stream into sentences, closing a
/// sentence after every token that is exactly one of `. ! ? ;`.
pub fn split_untagged(text: &str) -> Vec<Vec<String>> {
    let mut sentences = Vec::new();
    let mut current = Vec::new();
    for token in text.split_whitespace() {
        current.push(token.to_string());
        if SENTENCE_TERMINATORS.contains(&token) {
            sentences.push(core::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    sentences
}


#[cfg(test)]
mod tests {
    use super::fixtures::fixture_a;
    use super::*;
    use alloc::vec;

    fn numbered(n: usize) -> TaggedCorpus {
        TaggedCorpus::from_pairs((0..n).map(|_| vec![("w", "X")])).unwrap()
    }

    #[test]
    fn fixture_shape() {
        let c = fixture_a();
        assert_eq!(c.sentences().len(), 2);
        assert_eq!(c.token_count(), 8);
        let tags: Vec<&str> = c.tagset().iter().map(Tag::as_str).collect();
        assert_eq!(tags, ["DT", "NN", "SENT", "VB"]);
    }

    #[test]
    fn tags_are_validated() {
        assert!(matches!(Tag::new("<BOS>"), Err(Error::ReservedTag(_))));
        assert!(matches!(Tag::new("<EOS>"), Err(Error::ReservedTag(_))));
        assert!(matches!(Tag::new(""), Err(Error::InvalidTag(_))));
        assert!(matches!(Tag::new("N N"), Err(Error::InvalidTag(_))));
        assert!(TaggedToken::new("a b", Tag::new("X").unwrap()).is_err());
    }

    #[test]
    fn empty_sentence_rejected() {
        let err = TaggedCorpus::new(vec![TaggedSentence { tokens: vec![] }]).unwrap_err();
        assert_eq!(err, Error::EmptySentence(0));
    }

    #[test]
    fn split_untagged_examples() {
        let s = split_untagged("He ran . She slept .");
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|x| x.len() == 3));
        assert_eq!(split_untagged("no boundary here"), vec![vec!["no", "boundary", "here"]]);
        assert_eq!(split_untagged("Wait ! Go ?").len(), 2);
        assert!(split_untagged("").is_empty());
        // Whole-token match only.
        assert_eq!(split_untagged("etc. and so on").len(), 1);
        assert_eq!(split_untagged("a ; b").len(), 2);
    }

    #[test]
    fn partition_fixture() {
        let c = fixture_a();
        let (train, test) = c.partition_contiguous(0, 2).unwrap();
        assert_eq!(test.sentences(), &c.sentences()[..1]);
        assert_eq!(train.sentences(), &c.sentences()[1..]);
    }

    #[test]
    fn partition_single_fold_and_unit_blocks() {
        let c = numbered(10);
        let (train, test) = c.partition_contiguous(0, 1).unwrap();
        assert!(train.is_empty());
        assert_eq!(test.sentences().len(), 10);
        for fold in 0..10 {
            let (train, test) = c.partition_contiguous(fold, 10).unwrap();
            assert_eq!(test.sentences().len(), 1);
            assert_eq!(train.sentences().len(), 9);
        }
    }

    #[test]
    fn partition_errors() {
        let c = fixture_a();
        assert_eq!(
            c.partition_contiguous(2, 2).unwrap_err(),
            Error::FoldOutOfRange { fold: 2, k: 2 }
        );
        assert_eq!(
            c.partition_contiguous(0, 3).unwrap_err(),
            Error::TooFewSentences { sentences: 2, k: 3 }
        );
    }

    #[test]
    fn sample_fixture() {
        let c = fixture_a();
        let (train, test) = c.sample_disjoint(4, 4, 1).unwrap();
        assert_eq!(train.sentences().len(), 1);
        assert_eq!(test.sentences().len(), 1);
        assert_ne!(train.sentences()[0], test.sentences()[0]);
        assert_eq!(c.sample_disjoint(4, 4, 1).unwrap(), (train, test));
        assert!(matches!(
            c.sample_disjoint(9, 0, 1),
            Err(Error::BudgetExceeded { requested: 9, available: 8 })
        ));
    }
}
