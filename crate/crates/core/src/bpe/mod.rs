//! Byte-pair-encoding tokenizers over Unicode characters.
//!
//! A [`TokenizerModel`] is an alphabet plus an ordered list of merge rules.
//! Encoding replays the merges in rank order inside each word, exactly as
//! training applied them, so the segmentation of the training corpus under
//! the finished model is the one training ended with.

mod io;
mod train;

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::pretokenize::{self, Alphabet, MARKER, UNK};

pub use io::{load_model, save_model, FORMAT_VERSION};
pub use train::train_bpe;

/// Id of the unknown token in every model.
pub const UNK_ID: u32 = 0;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MergeRule {
    pub left: String,
    pub right: String,
    /// Zero-based position in the merge order.
    pub rank: u32,
}

impl MergeRule {
    /// The symbol this rule produces.
    pub fn product(&self) -> String {
        let mut s = String::with_capacity(self.left.len() + self.right.len());
        s.push_str(&self.left);
        s.push_str(&self.right);
        s
    }
}

/// Token ids and their strings, position by position.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenSequence {
    pub ids: Vec<u32>,
    pub surface: Vec<String>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
struct CompiledMerge {
    left: u32,
    right: u32,
    product: u32,
}

/// A trained (or character-level) tokenizer. Immutable once built.
#[derive(Debug, Clone)]
pub struct TokenizerModel {
    alphabet: Alphabet,
    merges: Vec<MergeRule>,
    tokens: Vec<String>,
    vocab: HashMap<String, u32>,
    support_size: usize,
    budget: usize,
    compiled: Vec<CompiledMerge>,
    /// Ranks of every rule for a symbol pair, ascending. A pair can recur
    /// when two different merge paths spell the same symbol.
    pair_ranks: HashMap<(u32, u32), Vec<u32>>,
}

impl PartialEq for TokenizerModel {
    fn eq(&self, other: &Self) -> bool {
        self.alphabet == other.alphabet
            && self.merges == other.merges
            && self.tokens == other.tokens
            && self.support_size == other.support_size
            && self.budget == other.budget
    }
}

impl Eq for TokenizerModel {}

impl TokenizerModel {
    /// Assembles a model and assigns ids: [`UNK`] gets [`UNK_ID`], the other
    /// alphabet symbols follow in lexicographic order, then each new merge
    /// product in rank order.
    pub fn from_parts(
        alphabet: Alphabet,
        merges: Vec<(String, String)>,
        support_size: usize,
        budget: usize,
    ) -> Result<Self> {
        if support_size == 0 && !merges.is_empty() {
            return Err(Error::arg("a model without support cannot have merges"));
        }
        let mut tokens = Vec::with_capacity(alphabet.len() + merges.len());
        let mut vocab = HashMap::with_capacity(alphabet.len() + merges.len());
        tokens.push(UNK.to_string());
        vocab.insert(UNK.to_string(), UNK_ID);
        for sym in alphabet.iter().filter(|&s| s != UNK) {
            vocab.insert(sym.to_string(), tokens.len() as u32);
            tokens.push(sym.to_string());
        }

        let mut rules = Vec::with_capacity(merges.len());
        let mut compiled = Vec::with_capacity(merges.len());
        let mut pair_ranks: HashMap<(u32, u32), Vec<u32>> = HashMap::new();
        for (rank, (left, right)) in merges.into_iter().enumerate() {
            let rank = rank as u32;
            let lookup = |s: &str| {
                vocab.get(s).copied().ok_or_else(|| {
                    Error::arg(format!("merge {rank} uses {s:?} before it exists"))
                })
            };
            let (l, r) = (lookup(&left)?, lookup(&right)?);
            let rule = MergeRule { left, right, rank };
            let product = rule.product();
            let p = match vocab.get(&product) {
                Some(&id) => id,
                None => {
                    let id = tokens.len() as u32;
                    vocab.insert(product.clone(), id);
                    tokens.push(product);
                    id
                }
            };
            compiled.push(CompiledMerge {
                left: l,
                right: r,
                product: p,
            });
            pair_ranks.entry((l, r)).or_default().push(rank);
            rules.push(rule);
        }
        if tokens.len() > budget {
            return Err(Error::arg(format!(
                "vocabulary of {} exceeds budget {budget}",
                tokens.len()
            )));
        }
        Ok(TokenizerModel {
            alphabet,
            merges: rules,
            tokens,
            vocab,
            support_size,
            budget,
            compiled,
            pair_ranks,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn merges(&self) -> &[MergeRule] {
        &self.merges
    }

    /// Documents the model was trained on; 0 for a character tokenizer.
    pub fn support_size(&self) -> usize {
        self.support_size
    }

    /// Requested maximum vocabulary size.
    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn vocab_size(&self) -> usize {
        self.tokens.len()
    }

    pub fn unk_id(&self) -> u32 {
        UNK_ID
    }

    pub fn token_id(&self, token: &str) -> Option<u32> {
        self.vocab.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    /// Tokens in id order.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Appends the token ids of one word (already whitespace-free).
    fn encode_word_into(&self, word: &str, out: &mut Vec<u32>) {
        let mut chars = word.chars();
        let Some(first) = chars.next() else {
            return;
        };
        let mut syms = Vec::with_capacity(word.len());
        syms.push(
            self.token_id(&pretokenize::marked(normalize(first)))
                .unwrap_or(UNK_ID),
        );
        let mut buf = [0u8; 4];
        for c in chars {
            let s: &str = normalize(c).encode_utf8(&mut buf);
            syms.push(self.token_id(s).unwrap_or(UNK_ID));
        }
        self.apply_merges(&mut syms);
        out.extend_from_slice(&syms);
    }

    fn apply_merges(&self, word: &mut Vec<u32>) {
        if self.compiled.is_empty() {
            return;
        }
        let mut next_rank = 0u32;
        while word.len() >= 2 {
            // The lowest rule at or after `next_rank` whose pair is present;
            // every rule in between would be a no-op.
            let mut best: Option<u32> = None;
            for w in word.windows(2) {
                if let Some(ranks) = self.pair_ranks.get(&(w[0], w[1])) {
                    let i = ranks.partition_point(|&r| r < next_rank);
                    if let Some(&r) = ranks.get(i) {
                        if best.is_none_or(|b| r < b) {
                            best = Some(r);
                        }
                    }
                }
            }
            let Some(rank) = best else { break };
            let m = self.compiled[rank as usize];
            let mut write = 0;
            let mut read = 0;
            while read < word.len() {
                if read + 1 < word.len() && word[read] == m.left && word[read + 1] == m.right {
                    word[write] = m.product;
                    read += 2;
                } else {
                    word[write] = word[read];
                    read += 1;
                }
                write += 1;
            }
            word.truncate(write);
            next_rank = rank + 1;
        }
    }

    /// Token ids of `text`.
    pub fn encode_ids(&self, text: &str) -> Vec<u32> {
        let mut ids = Vec::with_capacity(text.len());
        for word in pretokenize::raw_words(text) {
            self.encode_word_into(word, &mut ids);
        }
        ids
    }

    /// Number of tokens `text` encodes to.
    pub fn count_tokens(&self, text: &str) -> usize {
        let mut ids = Vec::new();
        let mut total = 0;
        for word in pretokenize::raw_words(text) {
            ids.clear();
            self.encode_word_into(word, &mut ids);
            total += ids.len();
        }
        total
    }

    pub fn encode(&self, text: &str) -> TokenSequence {
        let ids = self.encode_ids(text);
        let surface = ids.iter().map(|&id| self.tokens[id as usize].clone()).collect();
        TokenSequence { ids, surface }
    }

    /// Reverses [`TokenizerModel::encode`] up to whitespace normalization.
    /// Markers become single spaces (none before the first word); the
    /// unknown token renders as U+FFFD.
    pub fn decode_ids(&self, ids: &[u32]) -> Result<String> {
        let mut out = String::new();
        for &id in ids {
            let token = self
                .token(id)
                .ok_or_else(|| Error::arg(format!("token id {id} is not in the vocabulary")))?;
            for c in token.chars() {
                if c == MARKER {
                    if !out.is_empty() {
                        out.push(' ');
                    }
                } else {
                    out.push(c);
                }
            }
        }
        Ok(out)
    }

    pub fn decode(&self, tokens: &TokenSequence) -> Result<String> {
        self.decode_ids(&tokens.ids)
    }
}

#[inline]
fn normalize(c: char) -> char {
    if c == MARKER {
        '\u{FFFD}'
    } else {
        c
    }
}

/// The zero-support tokenizer: splits every word into alphabet characters.
pub fn char_tokenizer(alphabet: Alphabet) -> TokenizerModel {
    let budget = alphabet.len();
    TokenizerModel::from_parts(alphabet, Vec::new(), 0, budget)
        .expect("a merge-free model over its own alphabet is always valid")
}
