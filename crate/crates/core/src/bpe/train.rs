//! Incremental BPE training.
//!
//! Pairs are counted over word types weighted by corpus frequency. A pair's
//! count is its number of non-overlapping left-to-right occurrences (a run
//! `a a a` holds one `(a, a)`), which is exactly how many symbols a merge of
//! that pair removes. Counts are kept up to date by re-counting only the
//! words touched by each merge, and the best pair is taken from a max-heap
//! with lazy invalidation: highest count first, then the lexicographically
//! smallest `(left, right)`.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::rc::Rc;

use super::TokenizerModel;
use crate::corpus::{build_frequency_table, CorpusSlice};
use crate::error::{Error, Result};
use crate::pretokenize::{alphabet_of, WordUnit};

type Pair = (u32, u32);

#[derive(Debug, PartialEq, Eq)]
struct Candidate {
    count: u64,
    key: Reverse<(Rc<str>, Rc<str>)>,
    pair: Pair,
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.count
            .cmp(&other.count)
            .then_with(|| self.key.cmp(&other.key))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Non-overlapping pair counts of one word, aggregated.
fn word_pairs(word: &[u32], out: &mut Vec<(Pair, u64)>) {
    out.clear();
    // End index of the last counted (x, x) pair, so `x x x` counts once.
    let mut last_same_end = usize::MAX;
    for i in 0..word.len().saturating_sub(1) {
        let pair = (word[i], word[i + 1]);
        if pair.0 == pair.1 {
            if last_same_end == i {
                continue;
            }
            last_same_end = i + 1;
        }
        out.push((pair, 1));
    }
    out.sort_unstable_by_key(|&(p, _)| p);
    out.dedup_by(|b, a| {
        if a.0 == b.0 {
            a.1 += b.1;
            true
        } else {
            false
        }
    });
}

fn merge_word(word: &mut Vec<u32>, pair: Pair, product: u32) -> bool {
    let mut write = 0;
    let mut read = 0;
    let mut changed = false;
    while read < word.len() {
        if read + 1 < word.len() && word[read] == pair.0 && word[read + 1] == pair.1 {
            word[write] = product;
            read += 2;
            changed = true;
        } else {
            word[write] = word[read];
            read += 1;
        }
        write += 1;
    }
    word.truncate(write);
    changed
}

struct Trainer {
    symbols: Vec<Rc<str>>,
    ids: HashMap<Rc<str>, u32>,
    words: Vec<Vec<u32>>,
    freqs: Vec<u64>,
    counts: HashMap<Pair, u64>,
    occurs_in: HashMap<Pair, HashSet<usize>>,
    heap: BinaryHeap<Candidate>,
}

impl Trainer {
    fn intern(&mut self, s: &str) -> u32 {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = self.symbols.len() as u32;
        let rc: Rc<str> = Rc::from(s);
        self.symbols.push(Rc::clone(&rc));
        self.ids.insert(rc, id);
        id
    }

    fn push(&mut self, pair: Pair) {
        if let Some(&count) = self.counts.get(&pair) {
            self.heap.push(Candidate {
                count,
                key: Reverse((
                    Rc::clone(&self.symbols[pair.0 as usize]),
                    Rc::clone(&self.symbols[pair.1 as usize]),
                )),
                pair,
            });
        }
    }

    fn init_counts(&mut self) {
        let mut scratch = Vec::new();
        for (w, word) in self.words.iter().enumerate() {
            word_pairs(word, &mut scratch);
            for &(pair, n) in &scratch {
                *self.counts.entry(pair).or_default() += n * self.freqs[w];
                self.occurs_in.entry(pair).or_default().insert(w);
            }
        }
        let mut pairs: Vec<Pair> = self.counts.keys().copied().collect();
        pairs.sort_unstable();
        for pair in pairs {
            self.push(pair);
        }
    }

    /// Pops the best live candidate.
    fn best(&mut self) -> Option<(Pair, u64)> {
        while let Some(c) = self.heap.pop() {
            if self.counts.get(&c.pair) == Some(&c.count) {
                return Some((c.pair, c.count));
            }
        }
        None
    }

    fn apply(&mut self, pair: Pair, product: u32) {
        let Some(words) = self.occurs_in.remove(&pair) else {
            return;
        };
        let mut words: Vec<usize> = words.into_iter().collect();
        words.sort_unstable();

        let mut delta: HashMap<Pair, i64> = HashMap::new();
        let mut before = Vec::new();
        let mut after = Vec::new();
        for w in words {
            word_pairs(&self.words[w], &mut before);
            if !merge_word(&mut self.words[w], pair, product) {
                continue;
            }
            word_pairs(&self.words[w], &mut after);
            let freq = self.freqs[w] as i64;
            for &(p, n) in &before {
                *delta.entry(p).or_default() -= n as i64 * freq;
            }
            for &(p, n) in &after {
                *delta.entry(p).or_default() += n as i64 * freq;
                if p != pair {
                    self.occurs_in.entry(p).or_default().insert(w);
                }
            }
        }

        let mut changed: Vec<Pair> = delta
            .into_iter()
            .filter(|&(_, d)| d != 0)
            .map(|(p, d)| {
                let c = self.counts.entry(p).or_default();
                let next = *c as i64 + d;
                debug_assert!(next >= 0, "pair count went negative");
                *c = next as u64;
                if next == 0 {
                    self.counts.remove(&p);
                }
                p
            })
            .collect();
        changed.sort_unstable();
        for p in changed {
            self.push(p);
        }
    }
}

/// Trains a BPE model on `corpus` with at most `budget` vocabulary entries.
///
/// Stops when the vocabulary is full or no pair occurs at least twice, so
/// small supports yield smaller vocabularies than requested. An empty corpus
/// gives a model with no merges.
pub fn train_bpe(corpus: &CorpusSlice, budget: usize) -> Result<TokenizerModel> {
    let alphabet = alphabet_of(corpus);
    if budget < alphabet.len() {
        return Err(Error::arg(format!(
            "budget {budget} is smaller than the alphabet ({} symbols)",
            alphabet.len()
        )));
    }

    let mut trainer = Trainer {
        symbols: Vec::new(),
        ids: HashMap::new(),
        words: Vec::new(),
        freqs: Vec::new(),
        counts: HashMap::new(),
        occurs_in: HashMap::new(),
        heap: BinaryHeap::new(),
    };
    for sym in alphabet.iter() {
        trainer.intern(sym);
    }
    let table = build_frequency_table(corpus);
    for (word, freq) in table.sorted() {
        let Some(unit) = WordUnit::from_word(word) else {
            continue;
        };
        let ids: Vec<u32> = unit.symbols().iter().map(|s| trainer.intern(s)).collect();
        trainer.words.push(ids);
        trainer.freqs.push(freq);
    }
    debug_assert_eq!(trainer.symbols.len(), alphabet.len());
    trainer.init_counts();

    let mut merges = Vec::new();
    while trainer.symbols.len() < budget {
        let Some((pair, count)) = trainer.best() else {
            break;
        };
        if count < 2 {
            break;
        }
        let left = Rc::clone(&trainer.symbols[pair.0 as usize]);
        let right = Rc::clone(&trainer.symbols[pair.1 as usize]);
        let product = trainer.intern(&format!("{left}{right}"));
        trainer.apply(pair, product);
        merges.push((left.to_string(), right.to_string()));
    }

    TokenizerModel::from_parts(alphabet, merges, corpus.support_size(), budget)
}
