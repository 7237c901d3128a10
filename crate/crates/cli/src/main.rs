//! `tokcomp`: train support-limited tokenizers and evaluate them.
//!
//! Exit codes: 0 success, 2 bad arguments, 3 I/O failure, 4 malformed or
//! unusable data, 5 request beyond what is implemented.

mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use tokcomp::bpe::{self, char_tokenizer, TokenizerModel};
use tokcomp::compression::{self, format_pct, support_label};
use tokcomp::corpus::{self, CorpusFormat, FrequencyTable};
use tokcomp::grid::{correlate_grid, ResultsGrid};
use tokcomp::lm::{ngram_loglik, NGramModel};
use tokcomp::overlap::pairwise_matrix;
use tokcomp::pretokenize::{alphabet_of, non_whitespace_chars, Alphabet};
use tokcomp::stats::stars;
use tokcomp::{Error, Result};

use report::{Report, ReportFormat};

#[derive(Parser)]
#[command(name = "tokcomp", version, about = "Support-limited BPE tokenizers and compression metrics")]
struct Cli {
    /// Output layout: tab-separated table or one JSON object per line.
    #[arg(long, value_enum, default_value_t = ReportFormat::Table, global = true)]
    report: ReportFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    /// One document per line.
    Lines,
    /// One JSON object per line with a `text` field.
    Structured,
}

impl From<Format> for CorpusFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Lines => CorpusFormat::Lines,
            Format::Structured => CorpusFormat::Structured,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CharAlphabet {
    /// Printable ASCII.
    Ascii,
    /// Every character of the largest requested support.
    Corpus,
}

#[derive(Subcommand)]
enum Command {
    /// Train one tokenizer per support size on nested corpus prefixes.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Lines)]
        format: Format,
        /// Ascending document counts; 0 yields a character tokenizer.
        #[arg(long, value_delimiter = ',', required = true)]
        supports: Vec<usize>,
        #[arg(long, default_value_t = 32_000)]
        vocab_size: usize,
        /// Directory for `<label>.model` files.
        #[arg(long)]
        out: PathBuf,
        /// Symbols of the support-0 tokenizer.
        #[arg(long, value_enum, default_value_t = CharAlphabet::Ascii)]
        char_alphabet: CharAlphabet,
    },
    /// Token counts of each model on a held-out corpus, relative to the
    /// best-supported model.
    Compress {
        #[arg(long)]
        heldout: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Lines)]
        format: Format,
        #[arg(required = true)]
        models: Vec<PathBuf>,
    },
    /// Build a word frequency table from a corpus.
    Count {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Lines)]
        format: Format,
        /// Only read the first N documents.
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mean tokens per word type, by order of magnitude of word frequency.
    Freq {
        #[arg(long)]
        freq_table: PathBuf,
        model: PathBuf,
    },
    /// How many word types reach a count, and what share of text they cover.
    Coverage {
        #[arg(long)]
        freq_table: PathBuf,
        #[arg(long)]
        threshold: u64,
    },
    /// Bin examples by the mean frequency of their words.
    Profile {
        #[arg(long)]
        freq_table: PathBuf,
        /// Examples, one per document.
        #[arg(long)]
        examples: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Lines)]
        format: Format,
        /// Fraction of examples per bin, e.g. 0.02 for 2% bins.
        #[arg(long, default_value_t = 0.02)]
        bin_fraction: f64,
        /// Per-example scores, one number per line, averaged per bin.
        #[arg(long)]
        scores: Option<PathBuf>,
    },
    /// Rank and linear correlations for a results grid.
    Correlate {
        #[arg(long)]
        grid: PathBuf,
    },
    /// Mean pairwise Rouge-L F1 between systems, one output file each.
    RougeMatrix {
        #[arg(required = true)]
        outputs: Vec<PathBuf>,
    },
    /// Log-likelihood of a text under a tokenizer's n-gram model.
    LmScore {
        #[arg(long)]
        model: PathBuf,
        /// Text to score.
        #[arg(long, conflicts_with = "input")]
        text: Option<String>,
        /// Corpus to score instead of `--text`.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Lines)]
        format: Format,
        /// 0 scores with the uniform model; higher orders need `--train`.
        #[arg(long, default_value_t = 0)]
        order: usize,
        /// Corpus the n-gram counts are taken from.
        #[arg(long)]
        train: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Argument(_) => 2,
        Error::Io { .. } => 3,
        Error::Capability(_) => 5,
        _ => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = Report::new(cli.report);
    match run(cli.command, &mut out).and_then(|()| out.finish()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tokcomp: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(command: Command, out: &mut Report) -> Result<()> {
    match command {
        Command::Train {
            corpus,
            format,
            supports,
            vocab_size,
            out: dir,
            char_alphabet,
        } => train(&corpus, format.into(), &supports, vocab_size, &dir, char_alphabet, out),
        Command::Compress { heldout, format, models } => compress(&heldout, format.into(), &models, out),
        Command::Count {
            corpus,
            format,
            limit,
            out: path,
        } => {
            let docs = corpus::load_corpus(&corpus, format.into(), limit)?;
            let table = corpus::build_frequency_table(&docs);
            table.save(&path)?;
            out.header(&["documents", "types", "occurrences"]);
            out.row(
                &CountRow {
                    documents: docs.support_size(),
                    types: table.len(),
                    occurrences: table.total_occurrences(),
                },
                |r| vec![r.documents.to_string(), r.types.to_string(), r.occurrences.to_string()],
            )
        }
        Command::Freq { freq_table, model } => {
            let table = FrequencyTable::load(&freq_table)?;
            let model = bpe::load_model(&model)?;
            out.header(&["bin", "types", "tokens_per_word"]);
            for bin in compression::tokens_per_word_by_bin(&model, &table)? {
                out.row(&bin, |b| {
                    vec![
                        format!("1e{}", b.bin_exponent),
                        b.type_count.to_string(),
                        format!("{:.3}", b.mean_tokens_per_word),
                    ]
                })?;
            }
            Ok(())
        }
        Command::Coverage { freq_table, threshold } => {
            let table = FrequencyTable::load(&freq_table)?;
            let stat = compression::coverage_above_threshold(&table, threshold)?;
            out.header(&["threshold", "types", "corpus_fraction"]);
            out.row(&stat, |s| {
                vec![s.threshold.to_string(), s.type_count.to_string(), format!("{:.3}", s.corpus_fraction)]
            })
        }
        Command::Profile {
            freq_table,
            examples,
            format,
            bin_fraction,
            scores,
        } => profile(&freq_table, &examples, format.into(), bin_fraction, scores.as_deref(), out),
        Command::Correlate { grid } => correlate(&grid, out),
        Command::RougeMatrix { outputs } => rouge_matrix(&outputs, out),
        Command::LmScore {
            model,
            text,
            input,
            format,
            order,
            train,
        } => lm_score(&model, text, input.as_deref(), format.into(), order, train.as_deref(), out),
    }
}

#[derive(Serialize)]
struct CountRow {
    documents: usize,
    types: usize,
    occurrences: u64,
}

#[derive(Serialize)]
struct TrainRow {
    label: String,
    support_size: usize,
    vocab_size: usize,
    merges: usize,
    path: PathBuf,
}

fn train(
    corpus_path: &Path,
    format: CorpusFormat,
    supports: &[usize],
    budget: usize,
    dir: &Path,
    char_alphabet: CharAlphabet,
    out: &mut Report,
) -> Result<()> {
    if budget == 0 {
        return Err(Error::Argument("vocabulary size must be at least 1".into()));
    }
    let slices = corpus::nested_slices(corpus_path, format, supports)?;
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    out.header(&["tokenizer", "support", "vocab", "merges", "path"]);
    for (&requested, slice) in supports.iter().zip(&slices) {
        let model = if requested == 0 {
            let alphabet = match char_alphabet {
                CharAlphabet::Ascii => Alphabet::ascii_printable(),
                CharAlphabet::Corpus => alphabet_of(slices.last().expect("supports is non-empty")),
            };
            char_tokenizer(alphabet)
        } else {
            bpe::train_bpe(slice, budget)?
        };
        let label = support_label(requested);
        let path = dir.join(format!("{label}.model"));
        bpe::save_model(&model, &path)?;
        out.row(
            &TrainRow {
                label,
                support_size: model.support_size(),
                vocab_size: model.vocab_size(),
                merges: model.merges().len(),
                path,
            },
            |r| {
                vec![
                    r.label.clone(),
                    r.support_size.to_string(),
                    r.vocab_size.to_string(),
                    r.merges.to_string(),
                    r.path.display().to_string(),
                ]
            },
        )?;
    }
    Ok(())
}

fn model_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn compress(heldout: &Path, format: CorpusFormat, paths: &[PathBuf], out: &mut Report) -> Result<()> {
    let text = corpus::load_corpus(heldout, format, None)?;
    let mut rows = Vec::with_capacity(paths.len());
    for path in paths {
        let model: TokenizerModel = bpe::load_model(path)?;
        let (tokens, chars) = compression::measure_length(&model, &text);
        rows.push((model_label(path), model.support_size(), tokens, chars));
    }
    out.header(&["tokenizer", "support", "tokens", "chars", "relative"]);
    for r in compression::compression_table(rows)? {
        out.row(&r, |r| {
            vec![
                r.tokenizer_label.clone(),
                r.support_size.to_string(),
                r.token_count.to_string(),
                r.char_count.to_string(),
                r.relative_length_pct.map(format_pct).unwrap_or_default(),
            ]
        })?;
    }
    Ok(())
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

#[derive(Serialize)]
struct ProfileRow {
    bin: usize,
    examples: usize,
    mean_frequency: f64,
    mean_score: Option<f64>,
}

fn profile(
    table: &Path,
    examples: &Path,
    format: CorpusFormat,
    bin_fraction: f64,
    scores: Option<&Path>,
    out: &mut Report,
) -> Result<()> {
    let table = FrequencyTable::load(table)?;
    let texts: Vec<String> = corpus::load_corpus(examples, format, None)?.texts().map(str::to_owned).collect();
    let scores = scores
        .map(|path| {
            read_to_string(path)?
                .lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
                .map(|(i, l)| {
                    l.trim().parse::<f64>().map_err(|e| Error::Parse {
                        path: path.to_path_buf(),
                        line: i + 1,
                        message: e.to_string(),
                    })
                })
                .collect::<Result<Vec<f64>>>()
        })
        .transpose()?;
    let bins = compression::frequency_profile_bins(&texts, &table, bin_fraction, scores.as_deref())?;
    out.header(&["bin", "examples", "mean_frequency", "mean_score"]);
    for (i, (bin, score)) in bins.into_iter().enumerate() {
        let row = ProfileRow {
            bin: i,
            examples: bin.members.len(),
            mean_frequency: bin.mean,
            mean_score: score,
        };
        out.row(&row, |r| {
            vec![
                r.bin.to_string(),
                r.examples.to_string(),
                format!("{:.3}", r.mean_frequency),
                r.mean_score.map(|s| format!("{s:.3}")).unwrap_or_default(),
            ]
        })?;
    }
    Ok(())
}

fn p_cell(p: Option<f64>) -> String {
    p.map(|p| format!("{p:.4}")).unwrap_or_else(|| "-".into())
}

fn correlate(path: &Path, out: &mut Report) -> Result<()> {
    let grid = ResultsGrid::load(path)?;
    out.header(&[
        "metric",
        "spearman",
        "spearman_p",
        "pearson",
        "pearson_p",
        "pearson_p_t",
    ]);
    for row in correlate_grid(&grid)? {
        out.row(&row, |r| {
            let (s, p) = (&r.spearman, &r.pearson);
            vec![
                r.metric.clone(),
                format!("{:.3}{}", s.coefficient, s.p_value.map(stars).unwrap_or("")),
                p_cell(s.p_value),
                format!("{:.3}{}", p.coefficient, p.p_value.map(stars).unwrap_or("")),
                p_cell(p.p_value),
                format!("{:.4}{}", p.p_value_t, stars(p.p_value_t)),
            ]
        })?;
    }
    Ok(())
}

fn rouge_matrix(paths: &[PathBuf], out: &mut Report) -> Result<()> {
    let systems = paths
        .iter()
        .map(|p| Ok((model_label(p), read_to_string(p)?.lines().map(str::to_owned).collect())))
        .collect::<Result<Vec<(String, Vec<String>)>>>()?;
    let matrix = pairwise_matrix(&systems)?;
    let mut header = vec!["system"];
    header.extend(matrix.labels.iter().map(String::as_str));
    out.header(&header);
    out.whole(&matrix, |m| {
        m.labels
            .iter()
            .zip(&m.scores)
            .map(|(label, row)| {
                std::iter::once(label.clone())
                    .chain(row.iter().map(|v| format!("{v:.3}")))
                    .collect()
            })
            .collect()
    })
}

fn lm_score(
    model_path: &Path,
    text: Option<String>,
    input: Option<&Path>,
    format: CorpusFormat,
    order: usize,
    train: Option<&Path>,
    out: &mut Report,
) -> Result<()> {
    let model = bpe::load_model(model_path)?;
    let texts: Vec<String> = match (text, input) {
        (Some(t), None) => vec![t],
        (None, Some(p)) => corpus::load_corpus(p, format, None)?.texts().map(str::to_owned).collect(),
        _ => return Err(Error::Argument("give exactly one of --text or --input".into())),
    };
    let lm = match (order, train) {
        (0, None) => NGramModel::uniform(model.vocab_size())?,
        (0, Some(_)) => return Err(Error::Argument("--train needs --order of at least 1".into())),
        (_, None) => return Err(Error::Argument("--order above 0 needs --train".into())),
        (n, Some(path)) => {
            let docs = corpus::load_corpus(path, format, None)?;
            let seqs: Vec<Vec<u32>> = docs.texts().map(|t| model.encode_ids(t)).collect();
            NGramModel::train(n, model.vocab_size(), seqs.iter().map(Vec::as_slice))?
        }
    };
    // Documents are scored as independent sequences.
    let mut total = None;
    let mut chars = 0;
    for t in &texts {
        let r = ngram_loglik(&lm, &model.encode_ids(t));
        chars += non_whitespace_chars(t);
        total = Some(match total {
            None => (r.log_likelihood, r.token_count),
            Some((ll, n)) => (ll + r.log_likelihood, n + r.token_count),
        });
    }
    let (ll, tokens) = total.unwrap_or((0.0, 0));
    let mut report = tokcomp::lm::LikelihoodReport::new(ll, tokens);
    if chars > 0 {
        report = report.with_char_count(chars)?;
    }
    out.header(&["log_likelihood", "tokens", "bits_per_token", "bits_per_char"]);
    out.row(&report, |r| {
        vec![
            r.log_likelihood.to_string(),
            r.token_count.to_string(),
            format!("{:.3}", r.bits_per_token),
            r.bits_per_char.map(|b| format!("{b:.3}")).unwrap_or_default(),
        ]
    })
}
