//! Rouge-L overlap between system outputs.
//!
//! Word-level, case-sensitive, no stemming: tokens are whitespace-separated
//! words and each text is scored as a single sequence.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Length of the longest common subsequence, in O(|a|·|b|) time and
/// O(min) space.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut row = vec![0usize; short.len() + 1];
    for x in long {
        let mut diag = 0;
        for (j, y) in short.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[short.len()]
}

pub fn rouge_l(candidate: &str, reference: &str) -> RougeScore {
    let cand: Vec<&str> = candidate.split_whitespace().collect();
    let refs: Vec<&str> = reference.split_whitespace().collect();
    match (cand.is_empty(), refs.is_empty()) {
        (true, true) => {
            return RougeScore {
                precision: 1.0,
                recall: 1.0,
                f1: 1.0,
            }
        }
        (true, false) | (false, true) => {
            return RougeScore {
                precision: 0.0,
                recall: 0.0,
                f1: 0.0,
            }
        }
        _ => {}
    }
    let lcs = lcs_len(&cand, &refs) as f64;
    let precision = lcs / cand.len() as f64;
    let recall = lcs / refs.len() as f64;
    // 2·LCS / (|c| + |r|) equals 2PR/(P+R) and is exactly symmetric.
    let f1 = 2.0 * lcs / (cand.len() + refs.len()) as f64;
    RougeScore { precision, recall, f1 }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapMatrix {
    pub labels: Vec<String>,
    /// `scores[i][j]`: mean Rouge-L F1 between systems `i` and `j`.
    pub scores: Vec<Vec<f64>>,
}

/// Mean pairwise Rouge-L F1 between systems whose outputs are aligned by
/// example index.
pub fn pairwise_matrix(outputs: &[(String, Vec<String>)]) -> Result<OverlapMatrix> {
    let Some((_, first)) = outputs.first() else {
        return Err(Error::arg("no systems given"));
    };
    let n = first.len();
    if n == 0 {
        return Err(Error::arg("systems have no outputs"));
    }
    if let Some((label, o)) = outputs.iter().find(|(_, o)| o.len() != n) {
        return Err(Error::arg(format!(
            "system {label} has {} outputs, expected {n}",
            o.len()
        )));
    }
    let k = outputs.len();
    let mut scores = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let sum: f64 = outputs[i]
                .1
                .iter()
                .zip(&outputs[j].1)
                .map(|(a, b)| rouge_l(a, b).f1)
                .sum();
            let mean = sum / n as f64;
            scores[i][j] = mean;
            scores[j][i] = mean;
        }
    }
    Ok(OverlapMatrix {
        labels: outputs.iter().map(|(l, _)| l.clone()).collect(),
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_and_disjoint() {
        let s = rouge_l("the cat sat", "the cat sat");
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        let s = rouge_l("a b", "c d");
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn partial_overlap() {
        let s = rouge_l("the cat sat", "the cat");
        assert!((s.precision - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.recall, 1.0);
        assert!((s.f1 - 0.8).abs() < 1e-15);
        let harmonic = 2.0 * s.precision * s.recall / (s.precision + s.recall);
        assert!((s.f1 - harmonic).abs() < 1e-15);
    }

    #[test]
    fn empty_inputs() {
        assert_eq!(rouge_l("", " ").f1, 1.0);
        assert_eq!(rouge_l("", "a").f1, 0.0);
        assert_eq!(rouge_l("a", "").recall, 0.0);
    }

    #[test]
    fn case_sensitive() {
        assert_eq!(rouge_l("The", "the").f1, 0.0);
    }

    #[test]
    fn lcs_basic() {
        assert_eq!(lcs_len(b"ABCBDAB", b"BDCABA"), 4);
        assert_eq!(lcs_len::<u8>(b"", b"abc"), 0);
    }

    #[test]
    fn matrix_examples() {
        let same = vec!["x y".to_string(), "z".to_string()];
        let m = pairwise_matrix(&[("a".into(), same.clone()), ("b".into(), same)]).unwrap();
        assert_eq!(m.scores, vec![vec![1.0, 1.0], vec![1.0, 1.0]]);

        let m = pairwise_matrix(&[("a".into(), vec!["p q".into()]), ("b".into(), vec!["r s".into()])]).unwrap();
        assert_eq!(m.scores[0][1], 0.0);
        assert_eq!(m.scores[1][0], 0.0);

        let m = pairwise_matrix(&[("A".into(), vec!["a b".into()]), ("B".into(), vec!["a c".into()])]).unwrap();
        assert_eq!(m.scores[0][1], 0.5);
        assert_eq!(m.labels, vec!["A", "B"]);
    }

    #[test]
    fn matrix_length_mismatch() {
        let err = pairwise_matrix(&[("a".into(), vec!["x".into()]), ("b".into(), vec![])]).unwrap_err();
        assert!(matches!(err, Error::Argument(_)));
        assert!(pairwise_matrix(&[]).is_err());
    }
}
