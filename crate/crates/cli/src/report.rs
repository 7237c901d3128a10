//! Tab-separated tables or JSON lines on stdout.

use std::io::{self, Write};

use clap::ValueEnum;
use serde::Serialize;
use tokcomp::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Table,
    Structured,
}

pub struct Report {
    format: ReportFormat,
    buf: String,
}

impl Report {
    pub fn new(format: ReportFormat) -> Self {
        Report {
            format,
            buf: String::new(),
        }
    }

    /// Column names; only printed in table mode.
    pub fn header(&mut self, columns: &[&str]) {
        if self.format == ReportFormat::Table {
            self.line(columns.iter().map(|c| c.to_string()).collect());
        }
    }

    /// One record: serialized as-is, or rendered as one table row by `cells`.
    pub fn row<T: Serialize>(&mut self, value: &T, cells: impl FnOnce(&T) -> Vec<String>) -> Result<()> {
        self.whole(value, |v| vec![cells(v)])
    }

    /// A record that spans several table rows.
    pub fn whole<T: Serialize>(&mut self, value: &T, rows: impl FnOnce(&T) -> Vec<Vec<String>>) -> Result<()> {
        match self.format {
            ReportFormat::Table => rows(value).into_iter().for_each(|r| self.line(r)),
            ReportFormat::Structured => {
                let json = serde_json::to_string(value).map_err(|e| Error::Malformed(e.to_string()))?;
                self.buf.push_str(&json);
                self.buf.push('\n');
            }
        }
        Ok(())
    }

    fn line(&mut self, cells: Vec<String>) {
        self.buf.push_str(&cells.join("\t"));
        self.buf.push('\n');
    }

    pub fn finish(self) -> Result<()> {
        let mut stdout = io::stdout().lock();
        match stdout.write_all(self.buf.as_bytes()).and_then(|()| stdout.flush()) {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Error::Io {
                path: "<stdout>".into(),
                source: e,
            }),
            _ => Ok(()),
        }
    }
}
