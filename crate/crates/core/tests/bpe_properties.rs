mod common;

use common::{oracle_train, random_corpus};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tokcomp::bpe::{self, char_tokenizer, TokenizerModel};
use tokcomp::corpus::CorpusSlice;
use tokcomp::pretokenize::{self, alphabet_of, Alphabet};

fn merge_pairs(model: &TokenizerModel) -> Vec<(String, String)> {
    model.merges().iter().map(|m| (m.left.clone(), m.right.clone())).collect()
}

fn corpus_strategy() -> impl Strategy<Value = Vec<String>> {
    any::<u64>().prop_map(|seed| random_corpus(&mut ChaCha8Rng::seed_from_u64(seed), 400))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn incremental_trainer_matches_full_recount(docs in corpus_strategy(), extra in 0usize..=20) {
        let corpus = CorpusSlice::from_texts(docs.iter());
        let budget = alphabet_of(&corpus).len() + extra;
        let model = bpe::train_bpe(&corpus, budget).unwrap();
        let oracle = oracle_train(&docs, budget);
        let expected: Vec<(String, String)> =
            oracle.merges.iter().map(|(l, r, _)| (l.clone(), r.clone())).collect();
        prop_assert_eq!(merge_pairs(&model), expected);
        prop_assert_eq!(model.vocab_size(), oracle.vocab_size);
        let alphabet: Vec<&str> = model.alphabet().iter().collect();
        let oracle_alphabet: Vec<&str> = oracle.alphabet.iter().map(String::as_str).collect();
        prop_assert_eq!(alphabet, oracle_alphabet);
    }

    #[test]
    fn each_merge_removes_exactly_its_count(docs in corpus_strategy()) {
        let corpus = CorpusSlice::from_texts(docs.iter());
        let budget = alphabet_of(&corpus).len() + 20;
        let oracle = oracle_train(&docs, budget);
        let model = bpe::train_bpe(&corpus, budget).unwrap();
        let pairs = merge_pairs(&model);
        let mut previous = None;
        for k in 0..=pairs.len() {
            let prefix = TokenizerModel::from_parts(
                model.alphabet().clone(), pairs[..k].to_vec(), 1, budget,
            ).unwrap();
            let total: u64 = docs.iter().map(|d| prefix.count_tokens(d) as u64).sum();
            if let Some(prev) = previous {
                prop_assert_eq!(prev - total, oracle.merges[k - 1].2);
            }
            previous = Some(total);
        }
    }

    #[test]
    fn decode_inverts_encode(docs in corpus_strategy(), text_seed in any::<u64>()) {
        let corpus = CorpusSlice::from_texts(docs.iter());
        let model = bpe::train_bpe(&corpus, alphabet_of(&corpus).len() + 15).unwrap();
        // Only words whose first character has a marked symbol and whose
        // other characters have plain symbols are fully in-alphabet.
        let text = random_corpus(&mut ChaCha8Rng::seed_from_u64(text_seed), 200).join(" ");
        let in_alphabet = pretokenize::pretokenize(&text).iter().all(|w| {
            w.symbols().iter().all(|s| !s.contains(pretokenize::UNK) && model.alphabet().contains(s))
        });
        prop_assume!(in_alphabet);
        let decoded = model.decode(&model.encode(&text)).unwrap();
        prop_assert_eq!(decoded, text.split_whitespace().collect::<Vec<_>>().join(" "));
    }

    #[test]
    fn char_model_emits_one_token_per_character(text in "\\PC{0,80}") {
        let model = char_tokenizer(Alphabet::ascii_printable());
        let expected = text.chars().filter(|c| !c.is_whitespace()).count();
        prop_assert_eq!(model.count_tokens(&text), expected);
        prop_assert_eq!(model.encode(&text).len(), expected);
    }

    #[test]
    fn saved_models_load_identically(docs in corpus_strategy()) {
        let corpus = CorpusSlice::from_texts(docs.iter());
        let model = bpe::train_bpe(&corpus, alphabet_of(&corpus).len() + 10).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.model");
        bpe::save_model(&model, &path).unwrap();
        let loaded = bpe::load_model(&path).unwrap();
        prop_assert_eq!(merge_pairs(&loaded), merge_pairs(&model));
        prop_assert_eq!(loaded.tokens(), model.tokens());
        prop_assert_eq!(loaded.budget(), model.budget());
        let text = docs.join(" ");
        prop_assert_eq!(loaded.encode_ids(&text), model.encode_ids(&text));
    }
}

#[test]
fn encoding_is_thread_count_independent() {
    let docs = random_corpus(&mut ChaCha8Rng::seed_from_u64(7), 1000);
    let corpus = CorpusSlice::from_texts(docs.iter());
    let model = bpe::train_bpe(&corpus, alphabet_of(&corpus).len() + 20).unwrap();
    let serial: Vec<Vec<u32>> = docs.iter().map(|d| model.encode_ids(d)).collect();
    for threads in [1, 4] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let (tokens, _) = pool.install(|| tokcomp::compression::measure_length(&model, &corpus));
        assert_eq!(tokens, serial.iter().map(|s| s.len() as u64).sum::<u64>());
    }
}

#[test]
fn token_count_never_increases_with_more_merges() {
    let docs = random_corpus(&mut ChaCha8Rng::seed_from_u64(11), 1000);
    let corpus = CorpusSlice::from_texts(docs.iter());
    let budget = alphabet_of(&corpus).len() + 20;
    let model = bpe::train_bpe(&corpus, budget).unwrap();
    let pairs = merge_pairs(&model);
    let counts: Vec<usize> = (0..=pairs.len())
        .map(|k| {
            let m = TokenizerModel::from_parts(model.alphabet().clone(), pairs[..k].to_vec(), 1, budget).unwrap();
            docs.iter().map(|d| m.count_tokens(d)).sum()
        })
        .collect();
    assert!(counts.windows(2).all(|w| w[1] < w[0]), "{counts:?}");
}
