mod commands;
mod load;
mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use profgen_core::similarity::Aggregation;

/// Symptom profile generators: validate, count, enumerate and compare disorders.
#[derive(Debug, Parser)]
#[command(name = "profgen", version)]
pub struct Cli {
    /// Worker threads for enumeration and similarity (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Largest number of rows to materialize for one matrix.
    #[arg(long, global = true)]
    row_cap: Option<usize>,

    /// Known profile count for a disorder, as NAME=N. Repeatable.
    #[arg(long = "published-count", global = true, value_parser = parse_published)]
    published: Vec<(String, BigUint)>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Conditional for MPCS_max when either disorder has more than 10^4 profiles.
    Auto,
    Brute,
    Conditional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Agg {
    Mean,
    Max,
}

impl From<Agg> for Aggregation {
    fn from(a: Agg) -> Self {
        match a {
            Agg::Mean => Aggregation::Mean,
            Agg::Max => Aggregation::Max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpecFormat {
    Dsl,
    Toml,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse spec files (or directories of them) and report diagnostics.
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Exact profile counts, and comparison counts for every pair.
    ///
    /// An operand that is not a file is looked up in --published-count.
    Count {
        #[arg(required = true)]
        operands: Vec<String>,
    },
    /// Write profile matrices as CSV on a shared symptom table.
    Export {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Write each disorder's maximum profile instead of all profiles.
        #[arg(long)]
        mp: bool,
    },
    /// Maximum pairwise cosine similarity between two disorders.
    Mpcs {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = Agg::Max)]
        agg: Agg,
        #[arg(long, value_enum, default_value_t = Mode::Auto)]
        mode: Mode,
        /// Cross-check against the naive reference implementation.
        #[arg(long)]
        oracle: bool,
        /// Compare maximum profiles only.
        #[arg(long)]
        mp: bool,
    },
    /// Print the conditional generator pair and the symptom segmentation.
    Reduce { a: PathBuf, b: PathBuf },
    /// Evaluate one generator, e.g. "[{a,b},{c,d},{e,f},2]".
    Eval {
        /// Generator in bracket notation.
        #[arg(required_unless_present = "file")]
        generator: Option<String>,
        /// Read the generator from a file.
        #[arg(long, conflicts_with = "generator")]
        file: Option<PathBuf>,
        /// Cross-check against the naive reference implementation.
        #[arg(long)]
        oracle: bool,
    },
    /// Rewrite a spec file in another format, with sorted sets.
    Convert {
        path: PathBuf,
        #[arg(long, value_enum)]
        to: SpecFormat,
    },
}

fn parse_published(s: &str) -> Result<(String, BigUint), String> {
    let (name, n) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=N, got {s:?}"))?;
    let digits: String = n.chars().filter(|c| !matches!(c, ',' | '_')).collect();
    let n = digits
        .parse::<BigUint>()
        .map_err(|_| format!("not a nonnegative integer: {n:?}"))?;
    Ok((name.to_string(), n))
}

/// Failure classes with stable exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Invalid spec or a domain error from the library: exit 1.
    Domain(String),
    /// File system or bad invocation: exit 2.
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Io(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Domain(m) | Failure::Io(m) => m,
        }
    }
}

impl From<profgen_core::Error> for Failure {
    fn from(e: profgen_core::Error) -> Self {
        match e {
            profgen_core::Error::Io(_) => Failure::Io(e.to_string()),
            e => Failure::Domain(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

pub struct Context {
    pub format: OutputFormat,
    pub limits: profgen_core::Limits,
    pub published: BTreeMap<String, BigUint>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let mut limits = profgen_core::Limits::default();
    if let Some(cap) = cli.row_cap {
        limits.rows = cap;
    }
    let ctx = Context {
        format: cli.format,
        limits,
        published: cli.published.into_iter().collect(),
    };
    let mut sink = match output::Sink::open(cli.out.as_deref()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = commands::run(&ctx, cli.command, &mut sink).and_then(|code| {
        sink.finish()?;
        Ok(code)
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
