//! Support-limited BPE tokenizers and intrinsic tokenization metrics.
//!
//! The crate trains character-level BPE tokenizers on document prefixes of
//! a corpus ("support"), measures how well they compress held-out text, and
//! provides the statistics used to relate compression to downstream
//! results: exact small-sample rank and linear correlation, Rouge-L overlap
//! matrices, word-frequency binning and 0-gram likelihoods.
//!
//! ```
//! use tokcomp::{bpe, corpus::CorpusSlice};
//!
//! let support = CorpusSlice::from_texts(["low lower lowest", "low slow"]);
//! let model = bpe::train_bpe(&support, 64).unwrap();
//! let tokens = model.encode("lowest low");
//! assert_eq!(model.decode(&tokens).unwrap(), "lowest low");
//! ```

pub mod bpe;
pub mod compression;
pub mod corpus;
mod error;
pub mod grid;
pub mod lm;
pub mod overlap;
pub mod pretokenize;
pub mod stats;

pub use error::{Error, Result};
