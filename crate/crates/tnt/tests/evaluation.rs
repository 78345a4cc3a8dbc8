#[path = "../../tnt-core/tests/support/mod.rs"]
mod support;

use std::collections::HashSet;

use proptest::prelude::*;
use support::{random_corpus, rng};
use tnt::eval::{cross_validate, learning_curve, reliability_points, reliability_tokens, Metric};
use tnt::format::parse_tagged;
use tnt_core::{TaggedCorpus, TaggerConfig};

const SAMPLE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/sample.tt");

fn sample() -> TaggedCorpus {
    parse_tagged(&std::fs::read_to_string(SAMPLE).unwrap()).unwrap()
}

fn config() -> TaggerConfig {
    TaggerConfig {
        suffix_freq_threshold: 1_000,
        ..TaggerConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn folds_recompose_and_cover_every_token(seed in any::<u64>(), ntags in 2usize..=5, n in 10usize..60, k in 2usize..=10) {
        let corpus = random_corpus(&mut rng(seed), ntags, n);
        let report = cross_validate(&corpus, k, config()).unwrap();
        let tested: usize = report.folds.iter().map(|f| f.token_count).sum();
        prop_assert_eq!(tested, corpus.token_count());
        for (fold, f) in report.folds.iter().enumerate() {
            let known = f.known_accuracy().unwrap_or(0.0) * f.known_count as f64;
            let unknown = f.unknown_accuracy().unwrap_or(0.0) * f.unknown_count() as f64;
            let overall = (known + unknown) / f.token_count as f64;
            prop_assert!((overall - f.overall_accuracy()).abs() <= 1e-12);
            for m in Metric::ALL {
                if let Some(v) = f.metric(m) {
                    prop_assert!((0.0..=1.0).contains(&v));
                }
            }
            // Unknown rate recomputed from the training split.
            let (train, test) = corpus.partition_contiguous(fold, k).unwrap();
            let vocab: HashSet<&str> = train.sentences().iter().flat_map(|s| s.words()).collect();
            let unseen = test.sentences().iter().flat_map(|s| s.words()).filter(|w| !vocab.contains(w)).count();
            prop_assert_eq!(unseen, f.unknown_count());
        }
    }

    #[test]
    fn reliable_counts_shrink_with_threshold(tokens in proptest::collection::vec((1.0f64..1e6, any::<bool>()), 0..200), mut t in proptest::collection::vec(1.0f64..1e6, 1..10)) {
        t.sort_by(f64::total_cmp);
        let curve = reliability_points(&tokens, &t).unwrap();
        for w in curve.points.windows(2) {
            prop_assert!(w[0].reliable >= w[1].reliable);
        }
    }
}

#[test]
fn cross_validation_means_lie_within_fold_range() {
    let report = cross_validate(&sample(), 10, TaggerConfig::default()).unwrap();
    assert_eq!(report.folds.len(), 10);
    for m in Metric::ALL {
        let s = report.summary(m).unwrap();
        let values: Vec<f64> = report.folds.iter().filter_map(|f| f.metric(m)).collect();
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(lo <= s.mean && s.mean <= hi);
    }
}

#[test]
fn reliability_extremes_on_sample() {
    let corpus = sample();
    let tokens = reliability_tokens(&corpus, 10, TaggerConfig::default()).unwrap();
    assert_eq!(tokens.len(), corpus.token_count());
    let curve = reliability_points(&tokens, &[1.0, f64::INFINITY]).unwrap();
    let all = curve.points[0];
    assert_eq!(all.reliable, all.total);
    let overall = tokens.iter().filter(|t| t.1).count() as f64 / tokens.len() as f64;
    assert_eq!(all.reliable_accuracy(), Some(overall));
    let singles = tokens.iter().filter(|t| t.0.is_infinite()).count();
    assert_eq!(curve.points[1].reliable, singles);
}

#[test]
fn learning_curve_is_deterministic_and_consistent() {
    let corpus = sample();
    let cfg = TaggerConfig::default();
    let a = learning_curve(&corpus, &[2_000, 8_000], 3_000, 1, 11, cfg).unwrap();
    assert_eq!(a, learning_curve(&corpus, &[2_000, 8_000], 3_000, 1, 11, cfg).unwrap());

    // A training budget close to a cross-validation fold lands within the
    // spread of the cross-validated accuracy.
    let xval = cross_validate(&corpus, 10, cfg).unwrap();
    let overall = xval.summary(Metric::Overall).unwrap();
    let budget = corpus.token_count() * 9 / 10 - 2_000;
    let curve = learning_curve(&corpus, &[budget], 2_000, 10, 3, cfg).unwrap();
    let mean = curve.points[0].summary(Metric::Overall).unwrap().mean;
    assert!(
        (mean - overall.mean).abs() <= overall.sd,
        "{mean} vs {} ± {}",
        overall.mean,
        overall.sd
    );
}
