//! Word splitting and symbol alphabets.
//!
//! Text is split into maximal runs of non-whitespace characters. Each run
//! becomes a [`WordUnit`] whose symbols are single Unicode scalar values,
//! except the first one, which carries the word-boundary [`MARKER`] fused to
//! the word-initial character (`"This"` becomes `▁T h i s`). Punctuation is
//! not split off; it stays inside the word it touches.
//!
//! The marker character and the replacement character never survive
//! normalization as ordinary text: both are mapped to [`UNK`], so a literal
//! `▁` in a symbol always means "word starts here".

use std::borrow::Cow;
use std::collections::BTreeSet;

use crate::corpus::CorpusSlice;

/// Word-boundary marker prefixed to the first symbol of every word.
pub const MARKER: char = '\u{2581}';

/// The unknown symbol. It is also how unknown tokens render when decoded.
pub const UNK: &str = "\u{FFFD}";

const UNK_CHAR: char = '\u{FFFD}';

#[inline]
fn normalize_char(c: char) -> char {
    if c == MARKER {
        UNK_CHAR
    } else {
        c
    }
}

/// Iterates over the words of `text` (maximal non-whitespace runs), before
/// normalization.
pub fn raw_words(text: &str) -> impl Iterator<Item = &str> {
    text.split_whitespace()
}

/// Canonical form of a single word: reserved characters replaced by [`UNK`].
pub fn normalize_word(word: &str) -> Cow<'_, str> {
    if word.contains(MARKER) {
        Cow::Owned(word.chars().map(normalize_char).collect())
    } else {
        Cow::Borrowed(word)
    }
}

/// Iterates over normalized words of `text`. These are the keys of
/// frequency tables.
pub fn words(text: &str) -> impl Iterator<Item = Cow<'_, str>> {
    raw_words(text).map(normalize_word)
}

/// One whitespace-delimited word as a sequence of atomic symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WordUnit {
    symbols: Vec<String>,
}

impl WordUnit {
    /// Splits a single word into symbols. Returns `None` for an empty word.
    pub fn from_word(word: &str) -> Option<Self> {
        let mut chars = word.chars().map(normalize_char);
        let first = chars.next()?;
        let mut symbols = Vec::with_capacity(word.len());
        symbols.push(marked(first));
        symbols.extend(chars.map(String::from));
        Some(WordUnit { symbols })
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn into_symbols(self) -> Vec<String> {
        self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// The word's characters with the marker removed.
    pub fn surface(&self) -> String {
        self.symbols
            .iter()
            .flat_map(|s| s.chars())
            .filter(|&c| c != MARKER)
            .collect()
    }
}

/// Marker-prefixed form of a character.
pub fn marked(c: char) -> String {
    let mut s = String::with_capacity(MARKER.len_utf8() + c.len_utf8());
    s.push(MARKER);
    s.push(c);
    s
}

/// Splits text into word units. Whitespace runs collapse and leading or
/// trailing whitespace is ignored.
pub fn pretokenize(text: &str) -> Vec<WordUnit> {
    raw_words(text).filter_map(WordUnit::from_word).collect()
}

/// Whitespace-normalized form of `text`: normalized words joined by single
/// spaces. This is what decoding an encoding reproduces.
pub fn normalize_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for (i, w) in words(text).enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&w);
    }
    out
}

/// Number of non-whitespace characters in `text`.
pub fn non_whitespace_chars(text: &str) -> usize {
    text.chars().filter(|c| !c.is_whitespace()).count()
}

/// The initial symbol inventory of a tokenizer.
///
/// Holds every bare character seen in the support, the marker-prefixed form
/// of every character seen in word-initial position, and [`UNK`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: BTreeSet<String>,
}

impl Default for Alphabet {
    fn default() -> Self {
        Self::new()
    }
}

impl Alphabet {
    /// An alphabet holding only the unknown symbol.
    pub fn new() -> Self {
        let mut symbols = BTreeSet::new();
        symbols.insert(UNK.to_string());
        Alphabet { symbols }
    }

    /// Builds an alphabet from explicit symbols; [`UNK`] is always added.
    pub fn from_symbols<I, S>(symbols: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut alphabet = Self::new();
        alphabet.symbols.extend(symbols.into_iter().map(Into::into));
        alphabet
    }

    /// Printable ASCII characters in bare and word-initial form.
    pub fn ascii_printable() -> Self {
        let mut alphabet = Self::new();
        for c in '!'..='~' {
            alphabet.add_char(c, true);
        }
        alphabet
    }

    pub fn from_texts<'a, I>(texts: I) -> Self
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut alphabet = Self::new();
        for text in texts {
            alphabet.add_text(text);
        }
        alphabet
    }

    pub fn add_text(&mut self, text: &str) {
        for word in raw_words(text) {
            for (i, c) in word.chars().map(normalize_char).enumerate() {
                self.add_char(c, i == 0);
            }
        }
    }

    fn add_char(&mut self, c: char, initial: bool) {
        let mut buf = [0u8; 4];
        let bare: &str = c.encode_utf8(&mut buf);
        if !self.symbols.contains(bare) {
            self.symbols.insert(bare.to_string());
        }
        if initial {
            let m = marked(c);
            if !self.symbols.contains(&m) {
                self.symbols.insert(m);
            }
        }
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.symbols.contains(symbol)
    }

    /// Symbols in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.symbols.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    /// Always false: the unknown symbol is always present.
    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn is_subset(&self, other: &Alphabet) -> bool {
        self.symbols.is_subset(&other.symbols)
    }
}

/// The alphabet of a support corpus.
pub fn alphabet_of(corpus: &CorpusSlice) -> Alphabet {
    Alphabet::from_texts(corpus.documents().iter().map(|d| d.text.as_str()))
}
