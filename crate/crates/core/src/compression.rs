//! Intrinsic compression measurements.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::bpe::TokenizerModel;
use crate::corpus::{CorpusSlice, FrequencyTable};
use crate::error::{Error, Result};
use crate::pretokenize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompressionReport {
    pub tokenizer_label: String,
    pub support_size: usize,
    pub token_count: u64,
    /// Non-whitespace characters.
    pub char_count: u64,
    /// Excess length over the reference tokenizer, in whole percent.
    pub relative_length_pct: Option<i64>,
}

/// Token and character totals of `model` over every document of `corpus`.
pub fn measure_length(model: &TokenizerModel, corpus: &CorpusSlice) -> (u64, u64) {
    corpus
        .documents()
        .par_iter()
        .map(|d| {
            (
                model.count_tokens(&d.text) as u64,
                pretokenize::non_whitespace_chars(&d.text) as u64,
            )
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
}

/// `(token_count / ref_count − 1) · 100`, rounded half away from zero.
pub fn relative_length(token_count: u64, ref_count: u64) -> Result<i64> {
    if ref_count == 0 {
        return Err(Error::arg("reference token count must be at least 1"));
    }
    let diff = token_count as i128 - ref_count as i128;
    let r = ref_count as i128;
    // round(100·diff / r) with exact integer arithmetic.
    let num = 200 * diff.abs() + r;
    let magnitude = num / (2 * r);
    Ok((diff.signum() * magnitude) as i64)
}

/// Human-readable label for a support size: `char`, `1-doc`, `1k-doc`, `1m-doc`.
pub fn support_label(support_size: usize) -> String {
    match support_size {
        0 => "char".to_string(),
        n if n >= 1_000_000 && n % 1_000_000 == 0 => format!("{}m-doc", n / 1_000_000),
        n if n >= 1_000 && n % 1_000 == 0 => format!("{}k-doc", n / 1_000),
        n => format!("{n}-doc"),
    }
}

/// One row per tokenizer with lengths relative to the best-supported row.
///
/// `rows` holds `(label, support_size, token_count, char_count)`. The
/// output is ordered by descending support, like a compression table.
pub fn compression_table(rows: Vec<(String, usize, u64, u64)>) -> Result<Vec<CompressionReport>> {
    let reference = rows
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.cmp(&b.1 .1).then(b.0.cmp(&a.0)))
        .map(|(_, r)| r.2)
        .ok_or_else(|| Error::arg("no tokenizers to compare"))?;
    let mut reports = rows
        .into_iter()
        .map(|(label, support, tokens, chars)| {
            Ok(CompressionReport {
                tokenizer_label: label,
                support_size: support,
                token_count: tokens,
                char_count: chars,
                relative_length_pct: Some(relative_length(tokens, reference)?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    reports.sort_by_key(|r| std::cmp::Reverse(r.support_size));
    Ok(reports)
}

/// Formats a relative length the way compression tables print it.
pub fn format_pct(pct: i64) -> String {
    if pct >= 0 {
        format!("+{pct}%")
    } else {
        format!("{pct}%")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreqBinStats {
    /// Words with counts in `[10^e, 10^(e+1))`.
    pub bin_exponent: u32,
    /// Unweighted mean over word types.
    pub mean_tokens_per_word: f64,
    pub type_count: usize,
}

/// `floor(log10(count))` for `count >= 1`.
pub fn decade(count: u64) -> u32 {
    count.max(1).ilog10()
}

/// Mean tokens per word type, grouped by order of magnitude of the word's
/// count in `table`. Each distinct word is encoded once, on its own.
pub fn tokens_per_word_by_bin(model: &TokenizerModel, table: &FrequencyTable) -> Result<Vec<FreqBinStats>> {
    if table.is_empty() {
        return Err(Error::arg("frequency table is empty"));
    }
    let words: Vec<(&str, u64)> = table.iter().collect();
    let per_word: Vec<(u32, usize)> = words
        .par_iter()
        .map(|&(w, c)| (decade(c), model.count_tokens(w)))
        .collect();
    let mut bins: BTreeMap<u32, (u64, usize)> = BTreeMap::new();
    for (e, n) in per_word {
        let bin = bins.entry(e).or_default();
        bin.0 += n as u64;
        bin.1 += 1;
    }
    Ok(bins
        .into_iter()
        .map(|(e, (tokens, types))| FreqBinStats {
            bin_exponent: e,
            mean_tokens_per_word: tokens as f64 / types as f64,
            type_count: types,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageStat {
    pub threshold: u64,
    /// Word types with count ≥ threshold.
    pub type_count: usize,
    /// Share of all word occurrences those types account for.
    pub corpus_fraction: f64,
}

pub fn coverage_above_threshold(table: &FrequencyTable, threshold: u64) -> Result<CoverageStat> {
    if threshold == 0 {
        return Err(Error::arg("threshold must be at least 1"));
    }
    let (types, covered) = table
        .iter()
        .filter(|&(_, c)| c >= threshold)
        .fold((0usize, 0u64), |(t, s), (_, c)| (t + 1, s + c));
    let total = table.total_occurrences();
    Ok(CoverageStat {
        threshold,
        type_count: types,
        corpus_fraction: if total == 0 { 0.0 } else { covered as f64 / total as f64 },
    })
}

/// Mean table count of the words of `text`; unseen words count 0.
pub fn example_frequency_profile(text: &str, table: &FrequencyTable) -> f64 {
    let (n, sum) = pretokenize::words(text).fold((0u64, 0u64), |(n, s), w| (n + 1, s + table.get(&w)));
    if n == 0 {
        0.0
    } else {
        sum as f64 / n as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PercentileBin {
    pub mean: f64,
    /// Indices into the input, in ascending order of value.
    pub members: Vec<usize>,
}

/// Sorts `values` and cuts them into `ceil(1 / bin_fraction)` contiguous
/// bins of near-equal size; earlier bins take the remainder. With fewer
/// values than bins, every value gets its own bin.
pub fn percentile_bins(values: &[f64], bin_fraction: f64) -> Result<Vec<PercentileBin>> {
    if values.is_empty() {
        return Err(Error::arg("no values to bin"));
    }
    if !(bin_fraction > 0.0 && bin_fraction <= 1.0) {
        return Err(Error::arg(format!("bin fraction must be in (0, 1], got {bin_fraction}")));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::arg("values contain NaN"));
    }
    // Guard against 1/0.02 landing a hair above 50.
    let wanted = ((1.0 / bin_fraction) - 1e-9).ceil().max(1.0) as usize;
    let k = wanted.min(values.len());
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let base = values.len() / k;
    let extra = values.len() % k;
    let mut bins = Vec::with_capacity(k);
    let mut start = 0;
    for b in 0..k {
        let size = base + usize::from(b < extra);
        let members = order[start..start + size].to_vec();
        let mean = members.iter().map(|&i| values[i]).sum::<f64>() / size as f64;
        bins.push(PercentileBin { mean, members });
        start += size;
    }
    Ok(bins)
}

/// Per-example mean word frequency of `texts`, binned by percentile.
///
/// When `scores` is given (one per text, e.g. a per-example metric delta),
/// each bin also reports the mean score of its members.
pub fn frequency_profile_bins(
    texts: &[String],
    table: &FrequencyTable,
    bin_fraction: f64,
    scores: Option<&[f64]>,
) -> Result<Vec<(PercentileBin, Option<f64>)>> {
    if let Some(s) = scores {
        if s.len() != texts.len() {
            return Err(Error::arg(format!(
                "{} scores for {} examples",
                s.len(),
                texts.len()
            )));
        }
    }
    let profile: Vec<f64> = texts.iter().map(|t| example_frequency_profile(t, table)).collect();
    let bins = percentile_bins(&profile, bin_fraction)?;
    Ok(bins
        .into_iter()
        .map(|bin| {
            let score = scores.map(|s| bin.members.iter().map(|&i| s[i]).sum::<f64>() / bin.members.len() as f64);
            (bin, score)
        })
        .collect())
}
