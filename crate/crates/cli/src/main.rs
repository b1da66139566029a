//! `cardinal` command-line front end.
//!
//! Exit codes: 0 success, 1 configuration error, 2 containment criterion
//! failed (`compare` only), 3 I/O error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cardinal::compare::{compare_runs, ContainmentCriterion, Verdict};
use cardinal::config::load_config;
use cardinal::trace::TraceWriter;
use cardinal::{run_with, Error, EvalMode};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "cardinal",
    version,
    about = "Seeded simulator of cooperative immune-style worm response"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one seed and write metrics.csv and summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write trace.jsonl with every message and response.
        #[arg(long)]
        trace: bool,
        /// Evaluate hosts in parallel inside each step.
        #[arg(long)]
        parallel: bool,
    },
    /// Run each seed with and without the defense and write comparison.json.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Inclusive seed range `A..B`, or a single seed.
        #[arg(long, value_parser = parse_seeds)]
        seeds: SeedRange,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse and validate a configuration file.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Clone, Copy)]
struct SeedRange {
    first: u64,
    last: u64,
}

fn parse_seeds(s: &str) -> Result<SeedRange, String> {
    let parse = |t: &str| {
        t.trim()
            .parse::<u64>()
            .map_err(|e| format!("bad seed `{t}`: {e}"))
    };
    let (first, last) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
        None => {
            let v = parse(s)?;
            (v, v)
        }
    };
    if first > last {
        return Err(format!("empty seed range {first}..{last}"));
    }
    Ok(SeedRange { first, last })
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => 3,
        _ => 1,
    }
}

fn create_dir(path: &Path) -> Result<(), Error> {
    fs::create_dir_all(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn run(config: &Path, seed: u64, out: &Path, trace: bool, parallel: bool) -> Result<(), Error> {
    let cfg = load_config(config)?;
    create_dir(out)?;
    let mut tracer = if trace {
        Some(TraceWriter::create(&out.join("trace.jsonl"))?)
    } else {
        None
    };
    let mode = if parallel {
        EvalMode::Parallel
    } else {
        EvalMode::Sequential
    };
    let mut trace_err = None;
    let series = run_with(&cfg, seed, cfg.horizon, mode, |_, report| {
        if let (Some(t), None) = (tracer.as_mut(), trace_err.as_ref()) {
            trace_err = t.record(report).err();
        }
    })?;
    if let Some(e) = trace_err {
        return Err(e);
    }
    if let Some(t) = tracer {
        t.finish()?;
    }
    series.write_csv(&out.join("metrics.csv"))?;
    series.summary().write_json(&out.join("summary.json"))?;
    log::info!("wrote {} steps to {}", series.rows.len(), out.display());
    Ok(())
}

fn compare(config: &Path, seeds: SeedRange, out: &Path) -> Result<Verdict, Error> {
    let cfg = load_config(config)?;
    create_dir(out)?;
    let seeds: Vec<u64> = (seeds.first..=seeds.last).collect();
    let report = compare_runs(&cfg, &seeds, ContainmentCriterion::default())?;
    report.write_json(&out.join("comparison.json"))?;
    println!(
        "median peak infected: defended {:.3}, baseline {:.3}; {} of {} seeds contained",
        report.median_defended_peak,
        report.median_baseline_peak,
        report.seeds_contained,
        report.seeds.len()
    );
    match report.verdict {
        Verdict::Pass => println!("containment: PASS"),
        Verdict::NoOutbreak => println!("containment: no outbreak"),
        Verdict::Fail => {
            println!("containment: FAIL");
            for f in &report.failures {
                println!("  {f}");
            }
        }
    }
    Ok(report.verdict)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            seed,
            out,
            trace,
            parallel,
        } => run(&config, seed, &out, trace, parallel).map(|()| 0),
        Command::Compare { config, seeds, out } => {
            compare(&config, seeds, &out).map(|v| if v == Verdict::Fail { 2 } else { 0 })
        }
        Command::Validate { config } => load_config(&config).map(|cfg| {
            println!(
                "{}: ok ({} hosts, horizon {})",
                config.display(),
                cfg.host_count(),
                cfg.horizon
            );
            0
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
