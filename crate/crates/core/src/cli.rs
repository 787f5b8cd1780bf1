//! `refclass` command-line front end.
//!
//! Exit codes: 0 on success, 1 on input or validation errors, 2 on usage
//! errors. Every failure prints one `error:<code>:<message>` line on stderr.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::classifier::{classify, AssignmentTable, ClassifierConfig, Mode, TiePolicy};
use crate::corpus::synth::{generate_synthetic, SyntheticConfig};
use crate::corpus::{load_corpus, validate_corpus, Corpus};
use crate::error::{Error, Result};
use crate::indicators::{IndicatorConfig, Indicators};
use crate::report::{
    emit_report, write_dir_atomic, write_files_atomic, IndicatorTables, RunManifest, BUNDLE_FILE,
    MANIFEST_FILE,
};
use crate::taxonomy::{load_taxonomy, Taxonomy};

pub const THREADS_ENV: &str = "REFCLASS_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "refclass",
    version,
    about = "Reference-based article classification and field-resolved impact indicators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic corpus with planted fields.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out_corpus: PathBuf,
        #[arg(long)]
        out_truth: PathBuf,
        #[arg(long)]
        out_taxonomy: PathBuf,
    },
    /// Parse and check a corpus against a taxonomy.
    Validate {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        taxonomy: PathBuf,
    },
    /// Classify every article and write the assignment table.
    Classify {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        taxonomy: PathBuf,
        #[arg(long, default_value_t = 10)]
        max_iter: usize,
        #[arg(long, default_value_t = 1)]
        min_votes: u32,
        #[arg(long, default_value = "unclassified-until-stable")]
        tie_policy: TiePolicy,
        #[arg(long, default_value = "category-level")]
        mode: Mode,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute indicator tables for a set of journals.
    Indicators {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        taxonomy: PathBuf,
        #[arg(long)]
        assignments: PathBuf,
        #[arg(long, default_value_t = 2)]
        window: i32,
        #[arg(long, default_value_t = 1.04)]
        kappa: f64,
        /// Inclusive IF years `A:B` (default: first year + window to last year).
        #[arg(long, value_parser = parse_years)]
        if_years: Option<(i32, i32)>,
        /// Inclusive publication years `A:B` (default: whole corpus).
        #[arg(long, value_parser = parse_years)]
        pub_years: Option<(i32, i32)>,
        #[arg(long, value_delimiter = ',', required = true)]
        journals: Vec<String>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Render computed indicator tables as report files.
    Report {
        #[arg(long)]
        in_dir: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn parse_years(s: &str) -> std::result::Result<(i32, i32), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected A:B, got '{s}'"))?;
    let a: i32 = a.trim().parse().map_err(|_| format!("bad year '{a}'"))?;
    let b: i32 = b.trim().parse().map_err(|_| format!("bad year '{b}'"))?;
    if a > b {
        return Err(format!("empty year range {a}:{b}"));
    }
    Ok((a, b))
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Runs the CLI and returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let msg = e.to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            eprintln!("error:usage:{}", one_line(first));
            return 2;
        }
    };

    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) => n,
            Err(_) => {
                eprintln!("error:usage:{THREADS_ENV} must be a non-negative integer, got '{v}'");
                return 2;
            }
        },
        Err(_) => 0,
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error:io:{}", one_line(&e.to_string()));
            return 1;
        }
    };

    match pool.install(|| dispatch(cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error:{}:{}", e.code(), one_line(&e.to_string()));
            1
        }
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn load_inputs(corpus: &Path, taxonomy: &Path) -> Result<(Corpus, Vec<u8>, Taxonomy, Vec<u8>)> {
    let corpus_bytes = read_bytes(corpus)?;
    let taxonomy_bytes = read_bytes(taxonomy)?;
    let c = load_corpus(corpus_bytes.as_slice())?;
    let t = load_taxonomy(taxonomy_bytes.as_slice())?;
    Ok((c, corpus_bytes, t, taxonomy_bytes))
}

fn dispatch(command: Command) -> Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let io_err = |e| Error::io("writing stdout", e);
    match command {
        Command::Synth {
            config,
            seed,
            out_corpus,
            out_truth,
            out_taxonomy,
        } => {
            let text = String::from_utf8(read_bytes(&config)?)
                .map_err(|_| Error::Config("config file is not UTF-8".into()))?;
            let mut cfg = SyntheticConfig::from_toml(&text)?;
            cfg.seed = seed;
            let s = generate_synthetic(&cfg)?;
            let mut corpus_buf = Vec::new();
            let mut truth_buf = Vec::new();
            let mut tax_buf = Vec::new();
            s.corpus.write_tsv(&mut corpus_buf).map_err(io_err)?;
            s.truth.write_tsv(&mut truth_buf).map_err(io_err)?;
            s.taxonomy.write_tsv(&mut tax_buf).map_err(io_err)?;
            write_files_atomic(&[
                (out_corpus.as_path(), corpus_buf),
                (out_truth.as_path(), truth_buf),
                (out_taxonomy.as_path(), tax_buf),
            ])?;
            writeln!(out, "articles\t{}", s.corpus.len()).map_err(io_err)?;
            writeln!(out, "journals\t{}", s.corpus.journals().len()).map_err(io_err)?;
        }
        Command::Validate { corpus, taxonomy } => {
            let (c, _, t, _) = load_inputs(&corpus, &taxonomy)?;
            validate_corpus(&c).write_tsv(&mut out).map_err(io_err)?;
            let unknown = c.unknown_categories(&t);
            if let Some((j, cat)) = unknown.first() {
                return Err(Error::Validation(format!(
                    "journal '{j}' lists unknown category '{cat}' ({} unknown in total)",
                    unknown.len()
                )));
            }
        }
        Command::Classify {
            corpus,
            taxonomy,
            max_iter,
            min_votes,
            tie_policy,
            mode,
            out: out_path,
        } => {
            let (c, _, t, _) = load_inputs(&corpus, &taxonomy)?;
            let cfg = ClassifierConfig {
                max_iterations: max_iter,
                min_votes,
                tie_policy,
                mode,
            };
            let result = classify(&c, &t, &cfg)?;
            let mut buf = Vec::new();
            result.assignments.write_tsv(&mut buf).map_err(io_err)?;
            write_files_atomic(&[(out_path.as_path(), buf)])?;
            writeln!(out, "iterations_run\t{}", result.iterations_run).map_err(io_err)?;
            for s in &result.iterations {
                writeln!(
                    out,
                    "iteration\t{}\tnew={}\trelabeled={}\tdeclassified={}",
                    s.iteration, s.newly_classified, s.relabeled, s.declassified
                )
                .map_err(io_err)?;
            }
            writeln!(out, "terminal_tie_breaks\t{}", result.terminal_tie_breaks).map_err(io_err)?;
        }
        Command::Indicators {
            corpus,
            taxonomy,
            assignments,
            window,
            kappa,
            if_years,
            pub_years,
            journals,
            out_dir,
        } => {
            let (c, corpus_bytes, t, taxonomy_bytes) = load_inputs(&corpus, &taxonomy)?;
            let assignment_bytes = read_bytes(&assignments)?;
            let table = AssignmentTable::read_tsv(assignment_bytes.as_slice())?;
            let (first, last) = c
                .year_span()
                .ok_or_else(|| Error::Input("corpus has no articles".into()))?;
            let cfg = IndicatorConfig {
                window,
                kappa,
                if_years: if_years.unwrap_or((first + window, last)),
                pub_years: pub_years.unwrap_or((first, last)),
                ..IndicatorConfig::default()
            };
            let ind = Indicators::new(&c, &t, &table, cfg)?;
            let tables = IndicatorTables::compute(&ind, &journals)?;

            let mut manifest = RunManifest::new("indicators");
            manifest.set("indicators", tables.config.describe());
            manifest.set("journals", tables.journals.join(","));
            manifest
                .input(&file_name(&corpus), &corpus_bytes)
                .input(&file_name(&taxonomy), &taxonomy_bytes)
                .input(&file_name(&assignments), &assignment_bytes);
            manifest.outputs.push(BUNDLE_FILE.into());
            write_dir_atomic(
                &out_dir,
                &[
                    (BUNDLE_FILE.to_string(), tables.to_json()),
                    (MANIFEST_FILE.to_string(), manifest.to_tsv()),
                ],
            )?;
        }
        Command::Report { in_dir, out_dir } => {
            let bundle = read_bytes(&in_dir.join(BUNDLE_FILE))?;
            let text = String::from_utf8(bundle.clone())
                .map_err(|_| Error::Input("indicator bundle is not UTF-8".into()))?;
            let tables = IndicatorTables::from_json(&text)?;
            let mut manifest = RunManifest::new("report");
            manifest.set("indicators", tables.config.describe());
            manifest.set("journals", tables.journals.join(","));
            manifest.input(BUNDLE_FILE, &bundle);
            if let Ok(upstream) = fs::read(in_dir.join(MANIFEST_FILE)) {
                manifest.input(&format!("upstream.{MANIFEST_FILE}"), &upstream);
            }
            emit_report(&tables, &manifest, &out_dir)?;
        }
    }
    out.flush().map_err(io_err)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn year_ranges() {
        assert_eq!(parse_years("2007:2016"), Ok((2007, 2016)));
        assert!(parse_years("2016:2007").is_err());
        assert!(parse_years("2007").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_cli(["refclass", "classify", "--bogus"]), 2);
        assert_eq!(run_cli(["refclass", "frobnicate"]), 2);
        assert_eq!(
            run_cli([
                "refclass",
                "classify",
                "--corpus",
                "c",
                "--taxonomy",
                "t",
                "--out",
                "o",
                "--tie-policy",
                "coin-flip"
            ]),
            2
        );
    }

    #[test]
    fn missing_input_exits_one() {
        assert_eq!(
            run_cli([
                "refclass",
                "classify",
                "--corpus",
                "/nonexistent/missing.tsv",
                "--taxonomy",
                "/nonexistent/t.tsv",
                "--out",
                "/nonexistent/a.tsv"
            ]),
            1
        );
    }
}
