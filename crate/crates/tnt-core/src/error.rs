use alloc::string::String;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid tag {0:?}: tags must be non-empty and contain no whitespace")]
    InvalidTag(String),
    #[error("tag {0:?} is reserved for sentence boundaries")]
    ReservedTag(String),
    #[error("invalid token {0:?}: tokens must be non-empty and contain no whitespace")]
    InvalidToken(String),
    #[error("sentence {0} is empty")]
    EmptySentence(usize),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("fold {fold} out of range for {k} folds")]
    FoldOutOfRange { fold: usize, k: usize },
    #[error("cannot split {sentences} sentences into {k} folds")]
    TooFewSentences { sentences: usize, k: usize },
    #[error("requested {requested} tokens but the corpus only has {available}")]
    BudgetExceeded { requested: usize, available: usize },
    #[error("no trigrams counted; cannot estimate interpolation weights")]
    NoTrigrams,
    #[error("suffix lexicon is empty after keeping words with frequency <= {threshold}; raise the threshold")]
    EmptySuffixLexicon { threshold: u64 },
    #[error("theta needs a distribution over at least two tags, got {0}")]
    TooFewTags(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("unknown tag {0:?}")]
    UnknownTag(String),
    #[error("inconsistent model: {0}")]
    Inconsistent(String),
}
