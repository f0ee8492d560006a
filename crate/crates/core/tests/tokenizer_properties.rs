mod common;

use std::collections::HashMap;
use std::sync::LazyLock;

use common::*;
use hostnet_core::tokenizers::{bpe_train, clean_text, BpeModel, SubwordModel, UnigramConfig, UnigramModel, UnigramTrainer};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Textbook BPE: recount every adjacent pair from scratch each round and
/// merge the most frequent (ties to the lexicographically smallest pair).
fn naive_bpe(corpus: &[&str], merges: usize) -> Vec<(String, String)> {
    let mut words: Vec<Vec<String>> = corpus
        .iter()
        .flat_map(|l| l.split_whitespace())
        .map(|w| {
            let mut s: Vec<String> = w.chars().map(String::from).collect();
            s.push("</w>".into());
            s
        })
        .collect();
    let mut out = Vec::new();
    for _ in 0..merges {
        let mut counts: HashMap<(String, String), usize> = HashMap::new();
        for w in &words {
            for pair in w.windows(2) {
                *counts.entry((pair[0].clone(), pair[1].clone())).or_default() += 1;
            }
        }
        let best = counts
            .into_iter()
            .filter(|(_, c)| *c >= 2)
            .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)));
        let Some(((a, b), _)) = best else { break };
        for w in &mut words {
            let mut merged = Vec::with_capacity(w.len());
            let mut i = 0;
            while i < w.len() {
                if i + 1 < w.len() && w[i] == a && w[i + 1] == b {
                    merged.push(format!("{a}{b}"));
                    i += 2;
                } else {
                    merged.push(w[i].clone());
                    i += 1;
                }
            }
            *w = merged;
        }
        out.push((a, b));
    }
    out
}

#[test]
fn bpe_merges_match_naive_recount() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let corpus = synthetic_corpus(5_000, &mut rng);
    let refs: Vec<&str> = corpus.iter().map(String::as_str).collect();
    let model = bpe_train(&corpus, 120).unwrap();
    let n = model.merges().len();
    assert!(n > 20);
    assert_eq!(model.merges(), naive_bpe(&refs, n).as_slice());
}

#[test]
fn model_files_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let corpus = synthetic_corpus(8_000, &mut rng);
    let bpe = SubwordModel::Bpe(bpe_train(&corpus, 80).unwrap());
    let config = UnigramConfig { vocab_size: 60, ..Default::default() };
    let uni = SubwordModel::Unigram(UnigramTrainer::new(&corpus, config).unwrap().train().unwrap());
    for model in [bpe, uni] {
        let back = SubwordModel::from_file_str(&model.to_file_string()).unwrap();
        for line in corpus.iter().take(50) {
            assert_eq!(back.encode(line), model.encode(line));
            assert_eq!(back.decode(&model.encode(line)).unwrap(), *line);
        }
    }
    assert!(BpeModel::from_file_str("nonsense").is_err());
}

static SMALL_UNIGRAM: LazyLock<UnigramModel> = LazyLock::new(|| {
    let corpus = synthetic_corpus(3_000, &mut ChaCha8Rng::seed_from_u64(23));
    UnigramTrainer::new(&corpus, UnigramConfig { vocab_size: 50, ..Default::default() })
        .unwrap()
        .train()
        .unwrap()
});

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn unigram_round_trip(text in "[a-z ]{0,40}") {
        let model = &*SMALL_UNIGRAM;
        let normalized = text.split_whitespace().collect::<Vec<_>>().join(" ");
        prop_assert_eq!(model.decode_ids(&model.encode_ids(&normalized)).unwrap(), normalized);
    }

    #[test]
    fn clean_text_output_is_normalized(raw in "[a-z<>/&; :.\t]{0,60}") {
        let out = clean_text(&raw);
        prop_assert!(!out.contains("  ") && !out.contains('\t'));
        prop_assert_eq!(out.trim(), out.as_str());
    }

    #[test]
    fn plain_text_is_a_fixed_point(raw in "[a-z0-9 .,!?]{0,60}") {
        let normalized = raw.split_whitespace().collect::<Vec<_>>().join(" ");
        prop_assert_eq!(clean_text(&raw), normalized);
    }
}
