//! The `citecrf` command line.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 malformed input data or
//! style template, 3 structural, numeric or partial experiment failure.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use citecrf_core::corpus::{read_corpus, to_inline_xml_string, write_corpus, Format};
use citecrf_core::crf::{load_model, predict_all, save_model, train_with_log};
use citecrf_core::experiments::{cross_matrix, field_ablation, size_curve, ExperimentPlan, Failure};
use citecrf_core::metrics::evaluate;
use citecrf_core::synthgen::{generate_corpus, load_styles, random_records, read_records, write_records, GenerateOptions};
use citecrf_core::{tokenize, Corpus, Error, FeatureConfig, LabelSet, TrainConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (model format 1)");

#[derive(Debug, Parser)]
#[command(name = "citecrf", version = VERSION, about = "Reference-string parsing with a linear-chain CRF")]
struct Cli {
    /// Log progress to standard error (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print tokens and byte offsets, one reference per input line.
    Tokenize {
        /// Input file, or `-` for standard input.
        #[arg(default_value = "-")]
        input: PathBuf,
    },
    /// Render bibliographic records through citation styles into a labeled corpus.
    Generate(GenerateArgs),
    /// Convert a corpus between inline XML and CoNLL (format follows the extension).
    Convert { input: PathBuf, output: PathBuf },
    /// Shuffle a corpus and split it into train and eval parts.
    Split {
        input: PathBuf,
        #[arg(long, default_value_t = 0.7)]
        ratio: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to `<stem>.train.<ext>` next to the input.
        #[arg(long)]
        train: Option<PathBuf>,
        /// Defaults to `<stem>.eval.<ext>` next to the input.
        #[arg(long)]
        eval: Option<PathBuf>,
    },
    /// Relabel fields outside a kept set as O.
    Filter {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Comma-separated fields to keep.
        #[arg(long, conflicts_with = "drop", required_unless_present = "drop")]
        keep: Option<String>,
        /// Comma-separated fields to drop.
        #[arg(long)]
        drop: Option<String>,
    },
    /// Draw a seeded sample of distinct instances.
    Sample {
        input: PathBuf,
        #[arg(short = 'n', long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Train a CRF model on a labeled corpus.
    Train(TrainArgs),
    /// Label raw reference strings, one per line (blank lines are skipped).
    Parse {
        #[arg(short, long)]
        model: PathBuf,
        /// Input file, or `-` for standard input.
        #[arg(default_value = "-")]
        input: PathBuf,
        /// Output file; standard output if absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Output format; defaults to the output extension, else inline XML.
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
    },
    /// Evaluate a model on a gold corpus.
    Eval {
        #[arg(short, long)]
        model: PathBuf,
        gold: PathBuf,
        /// Write the report CSV here; the table always goes to standard output.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Train on every plan train corpus and evaluate on every eval corpus.
    Matrix { plan: PathBuf },
    /// Train on nested subsets of increasing size.
    Curve { plan: PathBuf },
    /// Compare full-label and reduced-label models on their shared fields.
    Ablation { plan: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutputFormat {
    InlineXml,
    Conll,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Records file (JSON lines).
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    records: Option<PathBuf>,
    /// Draw this many random records instead of reading a file.
    #[arg(long)]
    random: Option<usize>,
    /// Save the random records here.
    #[arg(long, requires = "random")]
    save_records: Option<PathBuf>,
    /// `builtin`, `builtin:<family>`, a .style file, or a directory of them.
    #[arg(long, default_value = "builtin")]
    styles: String,
    /// Number of references to generate.
    #[arg(short = 'n', long)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// One author span per name instead of one for the whole list.
    #[arg(long)]
    per_author: bool,
    /// Allow repeated (record, style) pairs.
    #[arg(long)]
    no_dedup: bool,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct TrainArgs {
    corpus: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    l2: Option<f64>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    min_feature_count: Option<usize>,
    /// Recorded with the model; training itself is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

/// Maps an error to its exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::Io { .. } => EXIT_USAGE,
        Error::Data(_) | Error::Template(_) => EXIT_DATA,
        Error::Structural(_) | Error::Numeric(_) => EXIT_INTERNAL,
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("citecrf: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command) -> citecrf_core::Result<i32> {
    match command {
        Command::Tokenize { input } => {
            let text = read_input(&input)?;
            let cfg = citecrf_core::TokenizerConfig::default();
            let mut out = String::new();
            for line in text.lines() {
                for t in tokenize(line, &cfg) {
                    out.push_str(&format!("{}\t{}\t{}\n", t.surface, t.start, t.end));
                }
                out.push('\n');
            }
            emit(None, &out)?;
        }
        Command::Generate(a) => generate(a)?,
        Command::Convert { input, output } => {
            let corpus = read_corpus(&input)?;
            write_corpus(&corpus, &output)?;
        }
        Command::Split {
            input,
            ratio,
            seed,
            train,
            eval,
        } => {
            let corpus = read_corpus(&input)?;
            let (tr, ev) = corpus.split(ratio, seed)?;
            let train = train.unwrap_or_else(|| sibling(&input, "train"));
            let eval = eval.unwrap_or_else(|| sibling(&input, "eval"));
            write_corpus(&tr, &train)?;
            write_corpus(&ev, &eval)?;
            eprintln!("{}: {} train, {} eval", input.display(), tr.len(), ev.len());
        }
        Command::Filter {
            input,
            output,
            keep,
            drop,
        } => {
            let corpus = read_corpus(&input)?;
            let keep = match (keep, drop) {
                (Some(k), _) => LabelSet::parse_list(&k).map_err(usage)?,
                (None, Some(d)) => corpus.labels().difference(LabelSet::parse_list(&d).map_err(usage)?),
                (None, None) => unreachable!("clap requires --keep or --drop"),
            };
            write_corpus(&corpus.filter_fields(keep)?, &output)?;
        }
        Command::Sample {
            input,
            size,
            seed,
            output,
        } => {
            let corpus = read_corpus(&input)?;
            write_corpus(&corpus.sample(size, seed)?, &output)?;
        }
        Command::Train(a) => {
            let corpus = read_corpus(&a.corpus)?;
            let mut cfg = TrainConfig::default();
            if let Some(v) = a.l2 {
                cfg.l2 = v;
            }
            if let Some(v) = a.max_epochs {
                cfg.max_epochs = v;
            }
            if let Some(v) = a.tolerance {
                cfg.tolerance = v;
            }
            if let Some(v) = a.min_feature_count {
                cfg.min_feature_count = v;
            }
            if let Some(v) = a.seed {
                cfg.seed = v;
            }
            let (model, log) = train_with_log(&corpus, &FeatureConfig::default(), &cfg)?;
            save_model(&model, &a.output)?;
            eprintln!(
                "trained on {} instances, {} features, {} epochs ({:?})",
                log.num_instances,
                log.num_features,
                log.epochs.len(),
                log.stop
            );
        }
        Command::Parse {
            model,
            input,
            output,
            format,
        } => {
            let model = load_model(&model)?;
            let text = read_input(&input)?;
            let labeled = text
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(|l| model.label(l))
                .collect::<citecrf_core::Result<Vec<_>>>()?;
            let corpus = Corpus::new("parsed", model.labels(), labeled)?;
            let format = format.unwrap_or(match output.as_deref().map(Format::from_path) {
                Some(Format::Conll) => OutputFormat::Conll,
                _ => OutputFormat::InlineXml,
            });
            let text = match format {
                OutputFormat::InlineXml => to_inline_xml_string(&corpus)?,
                OutputFormat::Conll => citecrf_core::corpus::to_conll_string(&corpus)?,
            };
            emit(output.as_deref(), &text)?;
        }
        Command::Eval { model, gold, csv } => {
            let model = load_model(&model)?;
            let gold = read_corpus(&gold)?;
            let pred = predict_all(&model, gold.instances())?;
            let report = evaluate(&gold, &pred)?;
            if let Some(path) = csv {
                write_file(&path, &report.to_csv())?;
            }
            emit(None, &report.to_table())?;
        }
        Command::Matrix { plan } => {
            let plan = ExperimentPlan::from_file(&plan)?;
            let m = cross_matrix(&plan)?;
            emit(None, &m.to_table())?;
            return Ok(report_failures(&m.failures()));
        }
        Command::Curve { plan } => {
            let plan = ExperimentPlan::from_file(&plan)?;
            let c = size_curve(&plan)?;
            emit(None, &c.to_table())?;
            return Ok(report_failures(&c.failures()));
        }
        Command::Ablation { plan } => {
            let plan = ExperimentPlan::from_file(&plan)?;
            let a = field_ablation(&plan)?;
            emit(None, &a.to_table())?;
            return Ok(report_failures(&a.failures()));
        }
    }
    Ok(EXIT_OK)
}

fn generate(a: GenerateArgs) -> citecrf_core::Result<()> {
    let records = match (&a.records, a.random) {
        (Some(path), _) => read_records(path)?,
        (None, Some(n)) => random_records(n, a.seed),
        (None, None) => unreachable!("clap requires --records or --random"),
    };
    if let Some(path) = &a.save_records {
        write_records(&records, path)?;
    }
    let styles = load_styles(&a.styles)?;
    let opts = GenerateOptions {
        per_author: a.per_author,
        dedup: !a.no_dedup,
        ..GenerateOptions::default()
    };
    let instances = generate_corpus(&records, &styles, a.size, a.seed, &opts)?;
    let name = a.output.file_stem().map_or("generated".into(), |s| s.to_string_lossy().into_owned());
    write_corpus(&Corpus::inferred(name, instances), &a.output)
}

fn report_failures(failures: &[Failure]) -> i32 {
    for f in failures {
        eprintln!("citecrf: {} failed: {}", f.job, f.error);
    }
    if failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_INTERNAL
    }
}

fn usage(e: Error) -> Error {
    match e {
        Error::Data(m) => Error::Usage(m),
        other => other,
    }
}

/// `dir/stem.ext` becomes `dir/stem.<part>.ext`.
fn sibling(input: &Path, part: &str) -> PathBuf {
    let stem = input.file_stem().map_or("corpus".into(), |s| s.to_string_lossy().into_owned());
    let name = match input.extension() {
        Some(ext) => format!("{stem}.{part}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{part}"),
    };
    input.with_file_name(name)
}

fn read_input(path: &Path) -> citecrf_core::Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .lock()
            .read_to_string(&mut s)
            .map_err(|e| Error::Io { path: path.into(), source: e })?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.into(), source: e })
    }
}

fn write_file(path: &Path, text: &str) -> citecrf_core::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.into(), source: e })?;
    }
    std::fs::write(path, text).map_err(|e| Error::Io { path: path.into(), source: e })
}

fn emit(path: Option<&Path>, text: &str) -> citecrf_core::Result<()> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Error::Io { path: "<stdout>".into(), source: e })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn version_names_model_format() {
        let n = citecrf_core::crf::MODEL_FORMAT.rsplit('/').next().unwrap();
        assert!(VERSION.ends_with(&format!("(model format {n})")));
        assert!(VERSION.starts_with(citecrf_core::VERSION));
    }

    #[test]
    fn sibling_paths() {
        assert_eq!(sibling(Path::new("d/refs.xml"), "train"), PathBuf::from("d/refs.train.xml"));
        assert_eq!(sibling(Path::new("refs"), "eval"), PathBuf::from("refs.eval"));
    }

    #[test]
    fn error_classes() {
        assert_eq!(exit_code(&Error::Usage("x".into())), 1);
        assert_eq!(exit_code(&Error::Data("x".into())), 2);
        assert_eq!(exit_code(&Error::Template("x".into())), 2);
        assert_eq!(exit_code(&Error::Numeric("x".into())), 3);
        assert_eq!(exit_code(&Error::Structural("x".into())), 3);
    }
}
