//! Model files.
//!
//! A model is stored as UTF-8 text, one field per line:
//!
//! ```text
//! tokcomp-bpe
//! format_version 1
//! support_size 10
//! budget 32000
//! special unk \u{fffd}
//! alphabet 3
//! a
//! ▁a
//! \u{fffd}
//! merges 1
//! ▁a a
//! checksum 6f1c...
//! ```
//!
//! Symbols are escaped so every field is a single space-free token:
//! backslash, space, tab, newline, carriage return, the unknown symbol and
//! any other whitespace or control character are written as escapes. The
//! marker `▁` is written literally; it cannot occur in normalized text, so it
//! is never ambiguous. The checksum is the SHA-256 of every byte before the
//! checksum line.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::TokenizerModel;
use crate::error::{Error, Result};
use crate::pretokenize::{Alphabet, UNK};

const MAGIC: &str = "tokcomp-bpe";
pub const FORMAT_VERSION: u32 = 1;

fn escape(symbol: &str, out: &mut String) {
    for c in symbol.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            ' ' => out.push_str("\\s"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c if c.is_whitespace() || c.is_control() || c == '\u{FFFD}' => {
                let _ = write!(out, "\\u{{{:x}}}", c as u32);
            }
            c => out.push(c),
        }
    }
}

fn unescape(field: &str) -> Result<String> {
    let mut out = String::with_capacity(field.len());
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('s') => out.push(' '),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('u') => {
                if chars.next() != Some('{') {
                    return Err(Error::Malformed(format!("bad escape in {field:?}")));
                }
                let hex: String = chars.by_ref().take_while(|&c| c != '}').collect();
                let c = u32::from_str_radix(&hex, 16)
                    .ok()
                    .and_then(char::from_u32)
                    .ok_or_else(|| Error::Malformed(format!("bad escape in {field:?}")))?;
                out.push(c);
            }
            _ => return Err(Error::Malformed(format!("bad escape in {field:?}"))),
        }
    }
    if out.is_empty() {
        return Err(Error::Malformed("empty symbol".into()));
    }
    Ok(out)
}

fn checksum(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Serializes a model to its text form.
pub fn to_text(model: &TokenizerModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "format_version {FORMAT_VERSION}");
    let _ = writeln!(out, "support_size {}", model.support_size());
    let _ = writeln!(out, "budget {}", model.budget());
    out.push_str("special unk ");
    escape(UNK, &mut out);
    out.push('\n');
    let _ = writeln!(out, "alphabet {}", model.alphabet().len());
    for sym in model.alphabet().iter() {
        escape(sym, &mut out);
        out.push('\n');
    }
    let _ = writeln!(out, "merges {}", model.merges().len());
    for rule in model.merges() {
        escape(&rule.left, &mut out);
        out.push(' ');
        escape(&rule.right, &mut out);
        out.push('\n');
    }
    let sum = checksum(out.as_bytes());
    let _ = writeln!(out, "checksum {sum}");
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Split<'a, char>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str> {
        self.inner
            .next()
            .map(|(_, l)| l)
            .ok_or_else(|| Error::Malformed(format!("missing {what}")))
    }

    fn field<T: std::str::FromStr>(&mut self, name: &str) -> Result<T> {
        let line = self.next(name)?;
        line.strip_prefix(name)
            .and_then(|rest| rest.strip_prefix(' '))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Malformed(format!("expected `{name} <value>`, found {line:?}")))
    }
}

/// Parses a model from its text form.
pub fn from_text(text: &str) -> Result<TokenizerModel> {
    let mut lines = Lines {
        inner: text.split('\n').enumerate(),
    };
    if lines.next("header")? != MAGIC {
        return Err(Error::Malformed("not a tokcomp model file".into()));
    }
    let version: u32 = lines.field("format_version")?;
    if version != FORMAT_VERSION {
        return Err(Error::Version {
            found: version,
            expected: FORMAT_VERSION,
        });
    }

    let body = text
        .strip_suffix('\n')
        .ok_or_else(|| Error::Malformed("file is truncated".into()))?;
    let split = body
        .rfind('\n')
        .ok_or_else(|| Error::Malformed("file is truncated".into()))?;
    let (covered, last) = (&text[..split + 1], &body[split + 1..]);
    let stored = last
        .strip_prefix("checksum ")
        .ok_or_else(|| Error::Malformed("missing checksum line".into()))?;
    let computed = checksum(covered.as_bytes());
    if stored != computed {
        return Err(Error::Checksum {
            stored: stored.to_string(),
            computed,
        });
    }

    let mut lines = Lines {
        inner: covered.split('\n').enumerate(),
    };
    lines.next("header")?;
    lines.next("format_version")?;
    let support_size: usize = lines.field("support_size")?;
    let budget: usize = lines.field("budget")?;
    let special = lines.next("special")?;
    match special.strip_prefix("special unk ") {
        Some(unk) if unescape(unk)? == UNK => {}
        _ => return Err(Error::Malformed(format!("unexpected special tokens {special:?}"))),
    }

    let n: usize = lines.field("alphabet")?;
    let mut symbols = Vec::with_capacity(n);
    for _ in 0..n {
        symbols.push(unescape(lines.next("alphabet symbol")?)?);
    }
    if symbols.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Malformed("alphabet is not sorted".into()));
    }
    if !symbols.iter().any(|s| s == UNK) {
        return Err(Error::Malformed("alphabet lacks the unknown symbol".into()));
    }
    let alphabet = Alphabet::from_symbols(symbols);

    let m: usize = lines.field("merges")?;
    let mut merges = Vec::with_capacity(m);
    for _ in 0..m {
        let line = lines.next("merge")?;
        let (l, r) = line
            .split_once(' ')
            .ok_or_else(|| Error::Malformed(format!("bad merge line {line:?}")))?;
        merges.push((unescape(l)?, unescape(r)?));
    }
    if !lines.next("end")?.is_empty() || lines.inner.next().is_some() {
        return Err(Error::Malformed("trailing content before checksum".into()));
    }

    TokenizerModel::from_parts(alphabet, merges, support_size, budget).map_err(|e| match e {
        Error::Argument(msg) => Error::Malformed(msg),
        e => e,
    })
}

pub fn save_model(model: &TokenizerModel, path: &Path) -> Result<()> {
    fs::write(path, to_text(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<TokenizerModel> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes).map_err(|_| Error::Malformed("model file is not UTF-8".into()))?;
    from_text(&text)
}
