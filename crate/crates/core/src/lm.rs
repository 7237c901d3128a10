//! Tokenizations scored as language models.
//!
//! A tokenizer with a fixed vocabulary is a 0-gram model: every token gets
//! probability `1/|V|`, so the likelihood of a text depends only on how many
//! tokens it takes. Count-based n-gram scoring with add-one smoothing is
//! provided alongside for comparison.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Natural-log likelihood of `token_count` tokens under the uniform model.
pub fn zerogram_loglik(token_count: usize, vocab_size: usize) -> Result<f64> {
    if vocab_size == 0 {
        return Err(Error::arg("vocabulary size must be at least 1"));
    }
    Ok(-(token_count as f64) * (vocab_size as f64).ln())
}

/// Fixed-rate code length per character: `tokens · log2|V| / chars`.
pub fn bits_per_char(token_count: usize, vocab_size: usize, char_count: usize) -> Result<f64> {
    if char_count == 0 {
        return Err(Error::arg("character count must be at least 1"));
    }
    if vocab_size == 0 {
        return Err(Error::arg("vocabulary size must be at least 1"));
    }
    Ok(token_count as f64 * (vocab_size as f64).log2() / char_count as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LikelihoodReport {
    /// Natural-log probability of the sequence.
    pub log_likelihood: f64,
    pub token_count: usize,
    pub bits_per_token: f64,
    pub bits_per_char: Option<f64>,
}

impl LikelihoodReport {
    pub fn new(log_likelihood: f64, token_count: usize) -> Self {
        let bits = -log_likelihood / std::f64::consts::LN_2;
        LikelihoodReport {
            log_likelihood,
            token_count,
            bits_per_token: if token_count == 0 { 0.0 } else { bits / token_count as f64 },
            bits_per_char: None,
        }
    }

    /// Adds bits-per-character for a text of `char_count` characters.
    pub fn with_char_count(mut self, char_count: usize) -> Result<Self> {
        if char_count == 0 {
            return Err(Error::arg("character count must be at least 1"));
        }
        self.bits_per_char = Some(-self.log_likelihood / std::f64::consts::LN_2 / char_count as f64);
        Ok(self)
    }
}

/// Count-based n-gram model over token ids.
///
/// `counts` holds n-grams of every order from 1 to `n`, so positions near
/// the start of a sequence can back off to the context that exists.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    n: usize,
    vocab_size: usize,
    counts: HashMap<Vec<u32>, u64>,
    /// Sum of counts of n-grams sharing each context.
    context_totals: HashMap<Vec<u32>, u64>,
}

impl NGramModel {
    /// The uniform (0-gram) model.
    pub fn uniform(vocab_size: usize) -> Result<Self> {
        Self::from_counts(0, vocab_size, HashMap::new())
    }

    /// Builds a model from explicit n-gram counts. Keys may have any length
    /// from 1 to `n`; zero counts are rejected.
    pub fn from_counts(n: usize, vocab_size: usize, counts: HashMap<Vec<u32>, u64>) -> Result<Self> {
        if vocab_size == 0 {
            return Err(Error::arg("vocabulary size must be at least 1"));
        }
        if n == 0 && !counts.is_empty() {
            return Err(Error::arg("a 0-gram model carries no counts"));
        }
        let mut context_totals: HashMap<Vec<u32>, u64> = HashMap::new();
        for (gram, &c) in &counts {
            if gram.is_empty() || gram.len() > n {
                return Err(Error::arg(format!("{}-gram in an order-{n} model", gram.len())));
            }
            if c == 0 {
                return Err(Error::arg("n-gram counts must be at least 1"));
            }
            *context_totals.entry(gram[..gram.len() - 1].to_vec()).or_default() += c;
        }
        Ok(NGramModel {
            n,
            vocab_size,
            counts,
            context_totals,
        })
    }

    /// Counts all 1..=n-grams within each sequence.
    pub fn train<'a, I>(n: usize, vocab_size: usize, sequences: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [u32]>,
    {
        let mut counts: HashMap<Vec<u32>, u64> = HashMap::new();
        if n > 0 {
            for seq in sequences {
                for end in 1..=seq.len() {
                    for order in 1..=n.min(end) {
                        *counts.entry(seq[end - order..end].to_vec()).or_default() += 1;
                    }
                }
            }
        }
        Self::from_counts(n, vocab_size, counts)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn count(&self, gram: &[u32]) -> u64 {
        self.counts.get(gram).copied().unwrap_or(0)
    }

    /// Add-one smoothed log probability of `token` after `context`.
    fn log_prob(&self, context: &[u32], token: u32) -> f64 {
        let mut gram = Vec::with_capacity(context.len() + 1);
        gram.extend_from_slice(context);
        gram.push(token);
        let joint = self.count(&gram) as f64;
        let total = self.context_totals.get(context).copied().unwrap_or(0) as f64;
        ((joint + 1.0) / (total + self.vocab_size as f64)).ln()
    }

    /// Scores a token sequence. Each position uses up to `n - 1` preceding
    /// tokens as context.
    pub fn loglik(&self, tokens: &[u32]) -> LikelihoodReport {
        if self.n == 0 {
            let ll = -(tokens.len() as f64) * (self.vocab_size as f64).ln();
            return LikelihoodReport::new(ll, tokens.len());
        }
        let ll = (0..tokens.len())
            .map(|k| {
                let start = k.saturating_sub(self.n - 1);
                self.log_prob(&tokens[start..k], tokens[k])
            })
            .sum();
        LikelihoodReport::new(ll, tokens.len())
    }
}

/// Scores `tokens` under `model`; see [`NGramModel::loglik`].
pub fn ngram_loglik(model: &NGramModel, tokens: &[u32]) -> LikelihoodReport {
    model.loglik(tokens)
}
