use std::fs;
use std::process::ExitCode;

use asmlab::config::ExperimentConfig;
use asmlab::error::{config, AppError};
use asmlab::report::{summarize, ResultFile};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

const DEFAULT_GRID: &str = "geometric:1,0.5,8";
/// Keeps every default deform cell inside the N = 64 truncation.
const DEFORM_GRID: &str = "1,0.75,0.5,0.375,0.25";

/// Asymptotic spectral measures: numerical experiments.
///
/// Every experiment prints its defect table as CSV (hbar,kind,subject,value)
/// on stdout, or writes <PREFIX>.csv and <PREFIX>.json with --output. Check
/// results go to stderr.
///
/// Exit status: 0 when every check passes, 1 when a check fails (the failing
/// row is named on stderr), 2 on invalid configuration, with no files written.
///
/// The hbar grid is `geometric:START,RATIO,COUNT` or an explicit list such as
/// `1,0.5,0.25`, optionally followed by `;tail=K` (default tail: last 3 values).
///
/// Environment: ASMLAB_MAX_DIM caps every matrix dimension (default 512).
#[derive(Parser, Debug)]
#[command(name = "asmlab", version, verbatim_doc_comment)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// hbar grid specification [default: geometric:1,0.5,8; deform: 1,0.75,0.5,0.375,0.25]
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// RNG seed for sampled cases
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write <PREFIX>.csv and <PREFIX>.json instead of printing the CSV
    #[arg(long)]
    output: Option<String>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum SpinMode {
    /// Ball bijection, projectivity and determinant identities on random points
    Identities,
    /// Projectivity, equivalence and continuity defects of the (1-hbar)n path
    AsmDefects,
    /// Maximal CHSH value of unsharp spins on the singlet, threshold scan
    ChshScan,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum QuasiMode {
    /// Straightening bound on random quasiprojectors
    Sweep,
    /// Semiclassical state count of the spin-1/2 family
    Count,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Kernel {
    Stochastic2,
    GaussianGrid,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spin-1/2 unsharp observables
    Spin {
        #[arg(value_enum)]
        mode: SpinMode,
        /// Random ball points (identities)
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Unit direction x,y,z of the path (normalized with a warning)
        #[arg(long, default_value = "0,0,1", allow_hyphen_values = true)]
        n: String,
        #[command(flatten)]
        common: Common,
    },
    /// Confidence-kernel smearing of random PVMs
    Smear {
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long, default_value_t = 8)]
        max_dim: usize,
        #[arg(long, default_value_t = 5)]
        max_atoms: usize,
        #[arg(long, value_enum, default_value = "stochastic2")]
        kernel: Kernel,
        /// Width multiplier of the gaussian-grid kernel
        #[arg(long, default_value_t = 1.0)]
        sigma_scale: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Quasiprojector straightening and state counting
    Quasi {
        #[arg(value_enum)]
        mode: QuasiMode,
        #[arg(long, default_value_t = 500)]
        cases: usize,
        #[arg(long, default_value_t = 8)]
        max_dim: usize,
        /// Spin direction x,y,z (count)
        #[arg(long, default_value = "0,0,1", allow_hyphen_values = true)]
        n: String,
        #[command(flatten)]
        common: Common,
    },
    /// Wick POVMs on truncated Fock space, and the Toeplitz index witness
    Wick {
        /// Fock truncation degree N (dimension N+1)
        #[arg(long, default_value_t = 32)]
        trunc: usize,
        /// `disks:r1,r2,..` (a disk and the annuli between) or `annuli:a-b,c-d`
        #[arg(long, default_value = "disks:1.0")]
        cells: String,
        /// Winding numbers for the index witness; each needs 4|m| <= N
        #[arg(long, default_value = "-2,-1,1,2", allow_hyphen_values = true)]
        windings: String,
        /// Also check that the first cell's projectivity defect decays
        #[arg(long)]
        check_decay: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Injectivity profile and norm recovery of a Wick partition
    Deform {
        #[arg(long, default_value_t = 64)]
        trunc: usize,
        /// Same forms as for wick
        #[arg(long, default_value = "disks:0.5,1.0,1.5")]
        cells: String,
        #[command(flatten)]
        common: Common,
    },
    /// Riesz integration and Naimark dilation of random POVMs
    Riesz {
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[arg(long, default_value_t = 6)]
        max_dim: usize,
        #[arg(long, default_value_t = 5)]
        max_atoms: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Run an experiment described by a JSON config file
    ///
    /// {"experiment": "wick", "hbar_grid": "geometric:1,0.5,8",
    ///  "params": {"trunc": 32}, "seed": 0, "output": "out/wick"}
    #[command(verbatim_doc_comment)]
    Run {
        #[arg(long)]
        config: String,
        /// Overrides the config's output prefix
        #[arg(long)]
        output: Option<String>,
    },
    /// Merge result JSON files into a summary CSV with tail log-log slopes
    Report {
        #[arg(required = true)]
        inputs: Vec<String>,
        /// Summary CSV path (stdout when absent)
        #[arg(long)]
        output: Option<String>,
    },
}

fn build(experiment: &str, common: Common, params: Value) -> ExperimentConfig {
    let Value::Object(params) = params else { unreachable!() };
    ExperimentConfig {
        experiment: experiment.to_string(),
        hbar_grid: common.grid.unwrap_or_else(|| {
            if experiment == "deform" {
                DEFORM_GRID
            } else {
                DEFAULT_GRID
            }
            .to_string()
        }),
        params,
        seed: common.seed,
        output: common.output,
    }
}

fn kebab(mode: impl ValueEnum) -> String {
    mode.to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string()
}

fn to_config(cmd: Command) -> Result<ExperimentConfig, AppError> {
    Ok(match cmd {
        Command::Spin {
            mode,
            samples,
            n,
            common,
        } => {
            let mut p = json!({"mode": kebab(mode)});
            match mode {
                SpinMode::Identities => p["samples"] = json!(samples),
                SpinMode::AsmDefects => p["n"] = json!(n),
                SpinMode::ChshScan => {}
            }
            build("spin", common, p)
        }
        Command::Smear {
            cases,
            max_dim,
            max_atoms,
            kernel,
            sigma_scale,
            common,
        } => build(
            "smear",
            common,
            json!({"cases": cases, "max_dim": max_dim, "max_atoms": max_atoms,
                   "kernel": kebab(kernel).replace('-', "_"), "sigma_scale": sigma_scale}),
        ),
        Command::Quasi {
            mode,
            cases,
            max_dim,
            n,
            common,
        } => {
            let p = match mode {
                QuasiMode::Sweep => json!({"mode": "sweep", "cases": cases, "max_dim": max_dim}),
                QuasiMode::Count => json!({"mode": "count", "n": n}),
            };
            build("quasi", common, p)
        }
        Command::Wick {
            trunc,
            cells,
            windings,
            check_decay,
            common,
        } => build(
            "wick",
            common,
            json!({"trunc": trunc, "cells": cells, "windings": windings, "check_decay": check_decay}),
        ),
        Command::Deform { trunc, cells, common } => build("deform", common, json!({"trunc": trunc, "cells": cells})),
        Command::Riesz {
            cases,
            max_dim,
            max_atoms,
            common,
        } => build(
            "riesz",
            common,
            json!({"cases": cases, "max_dim": max_dim, "max_atoms": max_atoms}),
        ),
        Command::Run { config: path, output } => {
            let text = fs::read_to_string(&path).map_err(|e| config(format!("{path}: {e}")))?;
            let mut cfg = ExperimentConfig::from_json(&text)?;
            if output.is_some() {
                cfg.output = output;
            }
            cfg
        }
        Command::Report { .. } => unreachable!("handled separately"),
    })
}

fn report(inputs: &[String], output: Option<&str>) -> Result<(), AppError> {
    let files = inputs
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| config(format!("{p}: {e}")))?;
            ResultFile::parse(&text, p)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let csv = summarize(&files);
    match output {
        Some(path) => fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    for f in files.iter().filter(|f| !f.passed) {
        eprintln!("note: {} recorded failing checks", f.experiment);
    }
    Ok(())
}

fn apply_max_dim() -> Result<(), AppError> {
    if let Ok(v) = std::env::var("ASMLAB_MAX_DIM") {
        let dim: usize = v
            .parse()
            .ok()
            .filter(|&d| d > 0)
            .ok_or_else(|| config(format!("ASMLAB_MAX_DIM={v:?} is not a positive integer")))?;
        asmlab_core::operator::set_max_dim(dim);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn real_main(command: Command) -> Result<ExitCode, AppError> {
    apply_max_dim()?;
    if let Command::Report { inputs, output } = &command {
        report(inputs, output.as_deref())?;
        return Ok(ExitCode::SUCCESS);
    }
    let cfg = to_config(command)?;
    let outcome = asmlab::execute(&cfg)?;
    if cfg.output.is_none() {
        print!("{}", outcome.report.to_csv());
    }
    for line in &outcome.notes {
        println!("{line}");
    }
    for c in &outcome.checks {
        let tag = if c.passed { "ok" } else { "FAIL" };
        eprintln!("{tag:>4}  {}: {}", c.name, c.detail);
    }
    if outcome.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        let names: Vec<&str> = outcome.failures().iter().map(|c| c.name.as_str()).collect();
        eprintln!(
            "{}: {} failing check(s): {}",
            outcome.experiment,
            names.len(),
            names.join("; ")
        );
        Ok(ExitCode::from(1))
    }
}
