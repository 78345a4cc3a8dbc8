mod support;

use support::{constrained_best, enumerate, random_corpus, random_sentence, rng};
use tnt_core::viterbi::{reliability, tag_with_reliability, viterbi, Lattice};
use tnt_core::{TaggedCorpus, TaggerConfig, TaggerModel};

fn random_model(seed: u64, capitalization: bool) -> (TaggerModel, TaggedCorpus) {
    let mut r = rng(seed);
    let ntags = 2 + (seed % 4) as usize;
    let corpus = random_corpus(&mut r, ntags, 8 + (seed % 20) as usize);
    let config = TaggerConfig {
        capitalization,
        suffix_freq_threshold: 1_000,
        ..TaggerConfig::exact()
    };
    (TaggerModel::assemble(&corpus, config).unwrap(), corpus)
}

#[test]
fn exact_viterbi_matches_enumeration() {
    for seed in 0..300 {
        let (model, corpus) = random_model(seed, seed % 2 == 0);
        let mut r = rng(seed + 10_000);
        for _ in 0..3 {
            let words = random_sentence(&mut r, &corpus);
            let out = viterbi(&model, &words, None);
            let all = enumerate(&model, &words);
            let best = all.iter().map(|(_, s)| *s).fold(f64::NEG_INFINITY, f64::max);
            assert!(
                (out.log_prob - best).abs() <= 1e-9 || out.log_prob == best,
                "seed {seed}: {} vs {best}",
                out.log_prob
            );
            let tags: Vec<_> = out.tags().collect();
            let mine = all.iter().find(|(s, _)| *s == tags).unwrap().1;
            assert!((mine - best).abs() <= 1e-9 || mine == best);
        }
    }
}

#[test]
fn reliability_matches_enumeration() {
    for seed in 0..200 {
        let (model, corpus) = random_model(seed, seed % 3 == 0);
        let mut r = rng(seed + 20_000);
        let words = random_sentence(&mut r, &corpus);
        let out = tag_with_reliability(&model, &words);
        let all = enumerate(&model, &words);
        let best = constrained_best(&all, words.len());
        for (i, token) in out.tokens.iter().enumerate() {
            let q = token.quotient.unwrap();
            assert!(q >= 1.0);
            let own = best[i][&token.tag];
            let alt = best[i]
                .iter()
                .filter(|(t, _)| **t != token.tag)
                .map(|(_, s)| *s)
                .fold(f64::NEG_INFINITY, f64::max);
            if best[i].len() == 1 {
                assert_eq!(q, f64::INFINITY);
            } else if own == alt {
                // Includes the all-zero case: 0/0 counts as a tie.
                assert_eq!(q, 1.0);
            } else if alt == f64::NEG_INFINITY {
                assert_eq!(q, f64::INFINITY);
            } else {
                let expected = (own - alt).exp();
                assert!(
                    ((q - expected) / expected).abs() < 1e-9,
                    "seed {seed} pos {i}: {q} vs {expected}"
                );
            }
        }
    }
}

#[test]
fn beam_survivors_and_backpointers() {
    for seed in 0..100 {
        let (model, corpus) = random_model(seed, true);
        let mut r = rng(seed + 30_000);
        let words = random_sentence(&mut r, &corpus);
        for theta in [2.0, 10.0, 1000.0] {
            let lattice = Lattice::build(&model, &words, Some(theta));
            for i in 0..lattice.len() {
                let max = lattice.column(i).max_log_delta();
                let states = lattice.states(i);
                assert!(states.iter().any(|s| s.alive));
                for s in states.iter().filter(|s| s.alive) {
                    assert!(s.log_delta >= max - theta.ln() - 1e-12);
                    if i >= 2 {
                        let back = s.back.expect("alive state has a predecessor");
                        let prev = lattice
                            .states(i - 1)
                            .into_iter()
                            .find(|p| p.prev == Some(back) && Some(p.tag) == s.prev)
                            .unwrap();
                        assert!(prev.alive);
                    }
                }
            }
        }
    }
}

#[test]
fn loose_beam_equals_exact() {
    for seed in 0..100 {
        let (model, corpus) = random_model(seed, false);
        let mut r = rng(seed + 40_000);
        let words = random_sentence(&mut r, &corpus);
        assert_eq!(viterbi(&model, &words, None), viterbi(&model, &words, Some(1e300)));
    }
}

#[test]
fn beam_monotone_at_first_position() {
    // Survival sets shrink with the threshold at every position where the
    // incoming states agree; the first column is the unconditional case.
    for seed in 0..100 {
        let (model, corpus) = random_model(seed, true);
        let mut r = rng(seed + 50_000);
        let words = random_sentence(&mut r, &corpus);
        let mut last = usize::MAX;
        for theta in [1e6, 1e3, 10.0, 1.5] {
            let n = Lattice::build(&model, &words, Some(theta)).column(0).surviving();
            assert!(n <= last);
            last = n;
        }
    }
}

#[test]
fn log_prob_reproduces_factor_product() {
    for seed in 0..50 {
        let (model, corpus) = random_model(seed, true);
        let mut r = rng(seed + 60_000);
        let words = random_sentence(&mut r, &corpus);
        let out = viterbi(&model, &words, None);
        let tags: Vec<_> = out.tags().collect();
        let mut product = 1.0f64;
        let (mut s1, mut s2) = (tnt_core::State::Bos, tnt_core::State::Bos);
        for (w, &t) in words.iter().zip(&tags) {
            let s3 = model.state_for(w, t);
            product *= model.transition(s1, s2, s3) * support::emission(&model, w, t);
            s1 = s2;
            s2 = s3;
        }
        product *= model.transition(s1, s2, tnt_core::State::Eos);
        let got = out.log_prob.exp();
        assert!(got == product || ((got - product) / product).abs() < 1e-9, "{got} vs {product}");
    }
}

#[test]
fn capitalization_is_inert_on_lowercase_data() {
    for seed in 0..100 {
        let mut r = rng(seed);
        let corpus = random_corpus(&mut r, 3, 15);
        let lower = TaggedCorpus::from_pairs(corpus.sentences().iter().map(|s| {
            s.tokens
                .iter()
                .map(|t| (t.surface.to_lowercase(), t.tag.as_str().to_string()))
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .iter()
        .map(|s| s.iter().map(|(w, t)| (w.as_str(), t.as_str())).collect::<Vec<_>>()))
        .unwrap();
        let exact = TaggerConfig {
            suffix_freq_threshold: 1_000,
            ..TaggerConfig::exact()
        };
        let on = TaggerModel::assemble(&lower, exact).unwrap();
        let off = TaggerModel::assemble(
            &lower,
            TaggerConfig {
                capitalization: false,
                ..exact
            },
        )
        .unwrap();
        let words: Vec<String> = random_sentence(&mut r, &lower)
            .into_iter()
            .map(|w| w.to_lowercase())
            .collect();
        assert_eq!(viterbi(&on, &words, None), viterbi(&off, &words, None));
    }
}

#[test]
fn reliability_accepts_external_output() {
    let (model, corpus) = random_model(7, true);
    let words = random_sentence(&mut rng(1), &corpus);
    let out = viterbi(&model, &words, None);
    let q = reliability(&model, &words, &out);
    assert_eq!(q.len(), words.len());
    assert!(q.iter().all(|&q| q >= 1.0));
}
