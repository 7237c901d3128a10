//! Test oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::Rng;

pub const MARK: char = '\u{2581}';
pub const REPLACEMENT: &str = "\u{FFFD}";

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

/// Splits text into marked character symbols without touching the crate's
/// pretokenizer.
pub fn oracle_symbols(text: &str) -> Vec<Vec<String>> {
    text.split_whitespace()
        .map(|w| {
            w.chars()
                .map(|c| if c == MARK || c == '\u{FFFD}' { '\u{FFFD}' } else { c })
                .enumerate()
                .map(|(i, c)| if i == 0 { format!("{MARK}{c}") } else { c.to_string() })
                .collect()
        })
        .collect()
}

/// Non-overlapping, left-to-right occurrences of `(l, r)` in `word`.
fn occurrences(word: &[String], l: &str, r: &str) -> u64 {
    let mut n = 0;
    let mut i = 0;
    while i + 1 < word.len() {
        if word[i] == l && word[i + 1] == r {
            n += 1;
            i += 2;
        } else {
            i += 1;
        }
    }
    n
}

fn merge(word: &[String], l: &str, r: &str) -> Vec<String> {
    let mut out = Vec::with_capacity(word.len());
    let mut i = 0;
    while i < word.len() {
        if i + 1 < word.len() && word[i] == l && word[i + 1] == r {
            out.push(format!("{l}{r}"));
            i += 2;
        } else {
            out.push(word[i].clone());
            i += 1;
        }
    }
    out
}

pub struct OracleRun {
    pub alphabet: BTreeSet<String>,
    /// `(left, right, count at the time of merging)`.
    pub merges: Vec<(String, String, u64)>,
    pub vocab_size: usize,
}

/// Brute-force BPE: after every merge, recount every pair of every word
/// occurrence from scratch.
pub fn oracle_train(docs: &[String], budget: usize) -> OracleRun {
    let mut words: Vec<Vec<String>> = docs.iter().flat_map(|d| oracle_symbols(d)).collect();
    let mut vocab: BTreeSet<String> = words.iter().flatten().cloned().collect();
    // Every character also appears bare, even if only ever word-initial.
    let bare: Vec<String> = vocab.iter().map(|s| s.trim_start_matches(MARK).to_string()).collect();
    vocab.extend(bare);
    vocab.insert(REPLACEMENT.to_string());
    let alphabet = vocab.clone();
    let mut merges = Vec::new();
    while vocab.len() < budget {
        let mut pairs: BTreeSet<(String, String)> = BTreeSet::new();
        for w in &words {
            for p in w.windows(2) {
                pairs.insert((p[0].clone(), p[1].clone()));
            }
        }
        let mut best: Option<((String, String), u64)> = None;
        // BTreeSet iterates pairs in ascending order, so keeping the first
        // maximum implements the lexicographic tie-break.
        for (l, r) in pairs {
            let c: u64 = words.iter().map(|w| occurrences(w, &l, &r)).sum();
            if best.as_ref().is_none_or(|b| c > b.1) {
                best = Some(((l, r), c));
            }
        }
        let Some(((l, r), c)) = best else { break };
        if c < 2 {
            break;
        }
        for w in &mut words {
            *w = merge(w, &l, &r);
        }
        vocab.insert(format!("{l}{r}"));
        merges.push((l, r, c));
    }
    OracleRun {
        alphabet,
        merges,
        vocab_size: vocab.len(),
    }
}

/// Random documents drawn from a small, skewed character set so that pairs
/// repeat and ties are common. Occasionally includes the marker and
/// non-ASCII letters.
pub fn random_corpus<R: Rng>(rng: &mut R, max_chars: usize) -> Vec<String> {
    const POOL: &[char] = &['a', 'b', 'c', 'd', 'e', 'x', 'é', 'ß', '.', '\u{2581}'];
    let k = rng.gen_range(1..=POOL.len());
    let chars = &POOL[..k];
    let total = rng.gen_range(0..=max_chars);
    let mut docs = Vec::new();
    let mut doc = String::new();
    let mut used = 0;
    while used < total {
        let r: f64 = rng.gen();
        if r < 0.04 {
            docs.push(std::mem::take(&mut doc));
        } else if r < 0.25 {
            doc.push(if rng.gen_bool(0.9) { ' ' } else { '\t' });
        } else {
            // Square the uniform draw to skew towards the first characters.
            let u: f64 = rng.gen();
            doc.push(chars[((u * u) * k as f64) as usize]);
        }
        used += 1;
    }
    docs.push(doc);
    docs
}

/// Length of the longest common subsequence by trying every subset of the
/// shorter sequence.
pub fn exhaustive_lcs(a: &[&str], b: &[&str]) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut best = 0;
    for mask in 0u32..(1 << short.len()) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let sub: Vec<&str> = (0..short.len()).filter(|i| mask >> i & 1 == 1).map(|i| short[i]).collect();
        let mut it = long.iter();
        if sub.iter().all(|s| it.any(|x| x == s)) {
            best = size;
        }
    }
    best
}

pub fn random_sentence<R: Rng>(rng: &mut R, max_words: usize, vocab: &[&str]) -> String {
    let n = rng.gen_range(0..=max_words);
    (0..n).map(|_| vocab[rng.gen_range(0..vocab.len())]).collect::<Vec<_>>().join(" ")
}

/// Word frequencies counted independently of the crate, with the marker
/// character replaced like any other reserved symbol.
pub fn word_counts(docs: &[String]) -> BTreeMap<String, u64> {
    let mut m = BTreeMap::new();
    for d in docs {
        for w in d.split_whitespace() {
            *m.entry(w.replace(MARK, REPLACEMENT)).or_insert(0) += 1;
        }
    }
    m
}

/// Spearman's ρ for untied data via 1 − 6Σd²/(n(n²−1)).
pub fn spearman_closed_form(xs: &[f64], ys: &[f64]) -> f64 {
    let rank = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        for (pos, &i) in idx.iter().enumerate() {
            r[i] = (pos + 1) as f64;
        }
        r
    };
    let (rx, ry) = (rank(xs), rank(ys));
    let n = xs.len() as f64;
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b) * (a - b)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}
