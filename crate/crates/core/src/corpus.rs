//! Corpus loading, support slices and word-frequency tables.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::pretokenize;

/// On-disk corpus layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorpusFormat {
    /// UTF-8 text, one document per line.
    #[default]
    Lines,
    /// One JSON object per line with a string `text` field.
    Structured,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    /// Zero-based record position in the source file.
    pub index: usize,
    pub text: String,
}

/// A prefix of a corpus, measured in documents.
///
/// Slices taken from the same load share storage, so nested slices are
/// cheap.
#[derive(Debug, Clone)]
pub struct CorpusSlice {
    documents: Arc<Vec<Document>>,
    len: usize,
}

impl PartialEq for CorpusSlice {
    fn eq(&self, other: &Self) -> bool {
        self.documents() == other.documents()
    }
}

impl CorpusSlice {
    pub fn new(documents: Vec<Document>) -> Self {
        let len = documents.len();
        CorpusSlice {
            documents: Arc::new(documents),
            len,
        }
    }

    /// Builds a slice from in-memory texts, indexing them in order.
    pub fn from_texts<I, S>(texts: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(
            texts
                .into_iter()
                .enumerate()
                .map(|(index, t)| Document {
                    index,
                    text: t.into(),
                })
                .collect(),
        )
    }

    pub fn empty() -> Self {
        Self::new(Vec::new())
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents[..self.len]
    }

    /// Number of documents in the slice.
    pub fn support_size(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The first `n` documents (clamped to what is available).
    pub fn prefix(&self, n: usize) -> CorpusSlice {
        CorpusSlice {
            documents: Arc::clone(&self.documents),
            len: n.min(self.len),
        }
    }

    /// Documents `start..` of this slice as an independent slice.
    pub fn suffix(&self, start: usize) -> CorpusSlice {
        let start = start.min(self.len);
        CorpusSlice::new(self.documents()[start..].to_vec())
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.documents().iter().map(|d| d.text.as_str())
    }
}

#[derive(Deserialize)]
struct Record {
    text: String,
}

/// Reads the first `limit` documents of a corpus file (all of them when
/// `limit` is `None`).
pub fn load_corpus(path: &Path, format: CorpusFormat, limit: Option<usize>) -> Result<CorpusSlice> {
    let limit = limit.unwrap_or(usize::MAX);
    let mut documents = Vec::new();
    if limit == 0 {
        return Ok(CorpusSlice::new(documents));
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    for (index, line) in reader.lines().enumerate() {
        if documents.len() >= limit {
            break;
        }
        let line_no = index + 1;
        let mut line = line.map_err(|e| match e.kind() {
            io::ErrorKind::InvalidData => Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: "invalid UTF-8".into(),
            },
            _ => Error::io(path, e),
        })?;
        if line.ends_with('\r') {
            line.pop();
        }
        let text = match format {
            CorpusFormat::Lines => line,
            CorpusFormat::Structured => {
                serde_json::from_str::<Record>(&line)
                    .map_err(|e| Error::Parse {
                        path: path.to_path_buf(),
                        line: line_no,
                        message: e.to_string(),
                    })?
                    .text
            }
        };
        documents.push(Document { index, text });
    }
    Ok(CorpusSlice::new(documents))
}

/// Loads nested document prefixes of the requested sizes with a single read.
///
/// Sizes larger than the file are clamped, so the realized sizes may repeat
/// at the tail.
pub fn nested_slices(path: &Path, format: CorpusFormat, sizes: &[usize]) -> Result<Vec<CorpusSlice>> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::arg(format!(
            "support sizes must be strictly ascending, got {sizes:?}"
        )));
    }
    let max = sizes.last().copied().unwrap_or(0);
    let full = load_corpus(path, format, Some(max))?;
    Ok(sizes.iter().map(|&n| full.prefix(n)).collect())
}

/// Word occurrence counts over a reference corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    counts: HashMap<String, u64>,
    total: u64,
}

impl FrequencyTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `count` occurrences of `word`. Zero counts are ignored.
    pub fn add(&mut self, word: &str, count: u64) {
        if count == 0 {
            return;
        }
        match self.counts.get_mut(word) {
            Some(c) => *c += count,
            None => {
                self.counts.insert(word.to_string(), count);
            }
        }
        self.total += count;
    }

    pub fn add_text(&mut self, text: &str) {
        for w in pretokenize::words(text) {
            self.add(&w, 1);
        }
    }

    pub fn merge(&mut self, other: FrequencyTable) {
        for (w, c) in other.counts {
            self.add(&w, c);
        }
    }

    pub fn get(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    pub fn total_occurrences(&self) -> u64 {
        self.total
    }

    /// Number of distinct words.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(w, &c)| (w.as_str(), c))
    }

    /// Entries by descending count, ties by ascending word.
    pub fn sorted(&self) -> Vec<(&str, u64)> {
        let mut entries: Vec<_> = self.iter().collect();
        entries.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        entries
    }

    /// Writes `word<TAB>count` lines in [`FrequencyTable::sorted`] order.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for (word, count) in self.sorted() {
            writeln!(w, "{word}\t{count}").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut table = FrequencyTable::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() {
                continue;
            }
            let bad = |message: &str| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: message.to_string(),
            };
            let (word, count) = line
                .split_once('\t')
                .ok_or_else(|| bad("expected word<TAB>count"))?;
            if word.is_empty() || word.chars().any(char::is_whitespace) {
                return Err(bad("word must be non-empty and contain no whitespace"));
            }
            let count: u64 = count.trim().parse().map_err(|_| bad("count is not an integer"))?;
            if count == 0 {
                return Err(bad("count must be at least 1"));
            }
            table.add(word, count);
        }
        Ok(table)
    }
}

/// Counts normalized words over every document of the slice.
pub fn build_frequency_table(corpus: &CorpusSlice) -> FrequencyTable {
    corpus
        .documents()
        .par_iter()
        .fold(FrequencyTable::new, |mut t, d| {
            t.add_text(&d.text);
            t
        })
        .reduce(FrequencyTable::new, |mut a, b| {
            if a.len() < b.len() {
                let mut b = b;
                b.merge(a);
                return b;
            }
            a.merge(b);
            a
        })
}
