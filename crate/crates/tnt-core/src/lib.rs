//! Statistical part-of-speech tagging with a second-order Markov model.
//!
//! The crate is `no_std` and only needs an allocator. It covers the whole
//! modelling path: n-gram counting, deleted interpolation, suffix-based
//! guessing for unknown words, and beam-pruned Viterbi decoding with
//! per-token reliability quotients. File formats, evaluation and the
//! command-line front end live in the `tnt` crate.
#![no_std]

extern crate alloc;

pub mod corpus;
mod error;
pub mod model;
pub mod ngram;
pub mod suffix;
pub mod viterbi;

pub use corpus::{split_untagged, Tag, TaggedCorpus, TaggedSentence, TaggedToken};
pub use error::Error;
pub use model::{CandidateTag, TaggerConfig, TaggerModel};
pub use ngram::{InterpolationWeights, NGramCounts, State, TieBreak};
pub use suffix::{SuffixModel, SuffixTrie, ThetaMode};
pub use viterbi::{Lattice, TaggedOutput, TokenOutput};

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Whether a word counts as capitalized: its first character is an
/// uppercase letter.
pub fn is_capitalized(word: &str) -> bool {
    word.chars().next().is_some_and(char::is_uppercase)
}

#[cfg(test)]
mod tests {
    use super::is_capitalized;

    #[test]
    fn capitalization_uses_first_char_category() {
        assert!(is_capitalized("Go"));
        assert!(is_capitalized("Ärger"));
        assert!(!is_capitalized("go"));
        assert!(!is_capitalized("1990s"));
        assert!(!is_capitalized("."));
        assert!(!is_capitalized("eBay"));
        assert!(!is_capitalized(""));
    }
}
