//! Experiment grids: one row per tokenizer with its support, its measured
//! length in tokens and any number of downstream metric columns.
//!
//! Stored as tab-separated text with a header row:
//!
//! ```text
//! tokenizer  support  length   1B/XSum  10m/XSum
//! 1m-doc     1000000  9336052  47.71    40.92
//! char       0        39480577 44.69    27.86
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::{self, CorrelationResult, Side, Statistic};

#[derive(Debug, Clone, PartialEq)]
pub struct ResultsGrid {
    pub labels: Vec<String>,
    pub supports: Vec<f64>,
    pub lengths: Vec<f64>,
    /// `(name, one value per row)`.
    pub metrics: Vec<(String, Vec<f64>)>,
}

impl ResultsGrid {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut rows = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
        let err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line: line + 1,
            message,
        };
        let (hline, header) = rows.next().ok_or_else(|| err(0, "empty grid file".into()))?;
        let header: Vec<&str> = header.split('\t').map(str::trim).collect();
        if header.len() < 4 || header[1] != "support" || header[2] != "length" {
            return Err(err(
                hline,
                "header must be: tokenizer, support, length, then metric columns".into(),
            ));
        }
        let mut grid = ResultsGrid {
            labels: Vec::new(),
            supports: Vec::new(),
            lengths: Vec::new(),
            metrics: header[3..].iter().map(|h| (h.to_string(), Vec::new())).collect(),
        };
        for (i, line) in rows {
            let cells: Vec<&str> = line.split('\t').map(str::trim).collect();
            if cells.len() != header.len() {
                return Err(err(i, format!("expected {} columns, found {}", header.len(), cells.len())));
            }
            let num = |c: &str| -> Result<f64> {
                c.replace(',', "")
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(i, format!("not a number: {c:?}")))
            };
            grid.labels.push(cells[0].to_string());
            grid.supports.push(num(cells[1])?);
            grid.lengths.push(num(cells[2])?);
            for (m, c) in grid.metrics.iter_mut().zip(&cells[3..]) {
                m.1.push(num(c)?);
            }
        }
        Ok(grid)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCorrelation {
    pub metric: String,
    /// Support size against the metric, one-sided for positive association.
    pub spearman: CorrelationResult,
    /// Length in tokens against the metric, one-sided for negative association.
    pub pearson: CorrelationResult,
}

/// Correlates every metric column with support (rank) and length (linear).
pub fn correlate_grid(grid: &ResultsGrid) -> Result<Vec<GridCorrelation>> {
    grid.metrics
        .iter()
        .map(|(name, values)| {
            Ok(GridCorrelation {
                metric: name.clone(),
                spearman: stats::correlation(&grid.supports, values, Statistic::Rank, Side::Greater)?,
                pearson: stats::correlation(&grid.lengths, values, Statistic::Linear, Side::Less)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_correlate() {
        let text = "# demo\ntokenizer\tsupport\tlength\tm\n\
                    a\t100\t10\t3.0\nb\t10\t20\t2.0\n\nc\t0\t40\t1.0\n";
        let g = ResultsGrid::parse(text, Path::new("g.tsv")).unwrap();
        assert_eq!(g.labels, vec!["a", "b", "c"]);
        let c = correlate_grid(&g).unwrap();
        assert_eq!(c[0].spearman.coefficient, 1.0);
        assert!(c[0].pearson.coefficient < -0.9);
        assert_eq!(c[0].pearson.side, Side::Less);
    }

    #[test]
    fn thousands_separators() {
        let text = "tokenizer\tsupport\tlength\tm\na\t1\t9,336,052\t1\n";
        let g = ResultsGrid::parse(text, Path::new("g")).unwrap();
        assert_eq!(g.lengths, vec![9_336_052.0]);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let text = "tokenizer\tsupport\tlength\tm\na\t1\t2\n";
        match ResultsGrid::parse(text, Path::new("g")).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("{e}"),
        }
        assert!(ResultsGrid::parse("x\ty\n", Path::new("g")).is_err());
        assert!(ResultsGrid::parse("tokenizer\tsupport\tlength\tm\na\t1\t2\tx\n", Path::new("g")).is_err());
    }
}
