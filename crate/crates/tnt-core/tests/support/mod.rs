//! Synthetic models and brute-force oracles shared by the integration and
//! acceptance tests. Nothing here calls the decoder.
#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tnt_core::ngram::{smoothed_trigram, TagId};
use tnt_core::{State, TaggedCorpus, TaggerModel, TieBreak};

pub const TAG_NAMES: [&str; 5] = ["A", "B", "C", "D", "E"];
const LETTERS: &[u8] = b"abcdeklmnorst";

fn random_word(rng: &mut ChaCha8Rng, capitalized: bool) -> String {
    let len = rng.random_range(1..=4);
    let mut w: String = (0..len)
        .map(|_| LETTERS[rng.random_range(0..LETTERS.len())] as char)
        .collect();
    if capitalized {
        w[..1].make_ascii_uppercase();
    }
    w
}

/// Random tagged corpus over `ntags` tags and a small random vocabulary in
/// which words may carry several tags.
pub fn random_corpus(rng: &mut ChaCha8Rng, ntags: usize, sentences: usize) -> TaggedCorpus {
    let vocab: Vec<String> = (0..rng.random_range(4..12))
        .map(|_| {
            let cap = rng.random_bool(0.25);
            random_word(rng, cap)
        })
        .collect();
    let mut out: Vec<Vec<(String, String)>> = Vec::new();
    for _ in 0..sentences {
        let len = rng.random_range(1..=6);
        let sent = (0..len)
            .map(|_| {
                let w = vocab[rng.random_range(0..vocab.len())].clone();
                let t = TAG_NAMES[rng.random_range(0..ntags)].to_string();
                (w, t)
            })
            .collect();
        out.push(sent);
    }
    // Make sure every tag occurs so the tag count is exactly `ntags`.
    for (i, t) in TAG_NAMES[..ntags].iter().enumerate() {
        let n = out.len();
        out[i % n].push((vocab[i % vocab.len()].clone(), t.to_string()));
    }
    TaggedCorpus::from_pairs(
        out.iter()
            .map(|s| s.iter().map(|(w, t)| (w.as_str(), t.as_str())).collect::<Vec<_>>()),
    )
    .unwrap()
}

/// Test sentence mixing known and unseen words.
pub fn random_sentence(rng: &mut ChaCha8Rng, corpus: &TaggedCorpus) -> Vec<String> {
    let known: Vec<&str> = corpus.sentences().iter().flat_map(|s| s.words()).collect();
    let len = rng.random_range(1..=6);
    (0..len)
        .map(|_| {
            if rng.random_bool(0.7) {
                known[rng.random_range(0..known.len())].to_string()
            } else {
                let cap = rng.random_bool(0.3);
                random_word(rng, cap)
            }
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Emission score recomputed from the count tables and suffix model.
pub fn emission(model: &TaggerModel, word: &str, tag: TagId) -> f64 {
    let counts = model.counts();
    if counts.word_total(word) > 0 {
        counts.lexical(word, tag) as f64 / counts.tag_count(tag) as f64
    } else {
        model.suffix_model().emission_score(word, tag)
    }
}

/// Every tag sequence over the per-position candidate sets with its log
/// score, accumulated left to right in the same factor order as the model.
pub fn enumerate(model: &TaggerModel, words: &[String]) -> Vec<(Vec<TagId>, f64)> {
    let counts = model.counts();
    let weights = model.weights();
    let cands: Vec<Vec<TagId>> = words
        .iter()
        .map(|w| model.candidates(w).0.iter().map(|c| c.tag).collect())
        .collect();
    let total: usize = cands.iter().map(Vec::len).product();
    let mut out = Vec::with_capacity(total);
    for mut code in 0..total {
        let mut seq = Vec::with_capacity(words.len());
        for c in cands.iter().rev() {
            seq.push(c[code % c.len()]);
            code /= c.len();
        }
        seq.reverse();
        let (mut s1, mut s2) = (State::Bos, State::Bos);
        let mut score = 0.0;
        for (w, &t) in words.iter().zip(&seq) {
            let s3 = model.state_for(w, t);
            score += smoothed_trigram(counts, weights, s1, s2, s3).ln();
            score += emission(model, w, t).ln();
            s1 = s2;
            s2 = s3;
        }
        score += smoothed_trigram(counts, weights, s1, s2, State::Eos).ln();
        out.push((seq, score));
    }
    out
}

/// Best score per (position, tag) over all enumerated sequences.
pub fn constrained_best(all: &[(Vec<TagId>, f64)], len: usize) -> Vec<HashMap<TagId, f64>> {
    let mut best = vec![HashMap::new(); len];
    for (seq, score) in all {
        for (i, t) in seq.iter().enumerate() {
            let e = best[i].entry(*t).or_insert(f64::NEG_INFINITY);
            if *score > *e {
                *e = *score;
            }
        }
    }
    best
}

/// Straight transcription of the deleted-interpolation loop, counting the
/// padded tag sequences itself. Returns the unnormalized `[λ1, λ2, λ3]`.
pub fn deleted_interpolation_oracle(corpus: &TaggedCorpus, tie: TieBreak) -> [u64; 3] {
    let mut uni: HashMap<String, u64> = HashMap::new();
    let mut bi: HashMap<(String, String), u64> = HashMap::new();
    let mut tri: HashMap<(String, String, String), u64> = HashMap::new();
    let mut n = 0u64;
    for s in corpus.sentences() {
        let mut seq = vec!["<BOS>".to_string(), "<BOS>".to_string()];
        seq.extend(s.tags().map(|t| t.as_str().to_string()));
        seq.push("<EOS>".to_string());
        n += s.len() as u64;
        for t in &seq[1..] {
            *uni.entry(t.clone()).or_default() += 1;
        }
        for w in seq.windows(2) {
            *bi.entry((w[0].clone(), w[1].clone())).or_default() += 1;
        }
        for w in seq.windows(3) {
            *tri.entry((w[0].clone(), w[1].clone(), w[2].clone())).or_default() += 1;
        }
    }
    let (mut l1, mut l2, mut l3) = (0u64, 0u64, 0u64);
    for ((t1, t2, t3), &f) in &tri {
        let f12 = bi[&(t1.clone(), t2.clone())];
        let f23 = bi[&(t2.clone(), t3.clone())];
        let f2 = uni[t2];
        let f3 = uni[t3];
        let c3 = if f12 == 1 { 0.0 } else { (f - 1) as f64 / (f12 - 1) as f64 };
        let c2 = if f2 == 1 { 0.0 } else { (f23 - 1) as f64 / (f2 - 1) as f64 };
        let c1 = if n == 1 { 0.0 } else { (f3 - 1) as f64 / (n - 1) as f64 };
        match tie {
            TieBreak::HigherOrder => {
                if c3 >= c2 && c3 >= c1 {
                    l3 += f
                } else if c2 >= c1 {
                    l2 += f
                } else {
                    l1 += f
                }
            }
            TieBreak::LowerOrder => {
                if c1 >= c2 && c1 >= c3 {
                    l1 += f
                } else if c2 >= c3 {
                    l2 += f
                } else {
                    l3 += f
                }
            }
        }
    }
    [l1, l2, l3]
}
