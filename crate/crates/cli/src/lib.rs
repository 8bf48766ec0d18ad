//! Command-line front end for building and checking minimal Stinespring
//! representations from JSON instance files.
//!
//! Exit codes: 0 on success, 1 on input or parse errors, 2 when the
//! mathematics fails (not CP, not a φ-map, not minimal, not equivalent).

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use stinespring::TolerancePolicy;

pub mod commands;
pub mod format;

use format::{ReportFile, RepresentationFile};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    Input = 1,
    Math = 2,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "stinespring",
    version,
    about = "Minimal Stinespring dilations for CP maps and φ-maps"
)]
pub struct Cli {
    /// Absolute tolerance for identity residuals.
    #[arg(long, global = true, default_value_t = TolerancePolicy::default().atol)]
    pub atol: f64,
    /// Relative singular-value cutoff for numerical rank.
    #[arg(long, global = true, default_value_t = TolerancePolicy::default().rank_rtol)]
    pub rank_rtol: f64,
    /// Relative floor for Choi eigenvalues in the CP test.
    #[arg(long, global = true, default_value_t = TolerancePolicy::default().psd_rtol)]
    pub psd_rtol: f64,
    /// Output path: the report for `check`, the representation for
    /// `dilate`, the witness for `equiv`, the instance for `gen`, a
    /// directory for `demo-asadi`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for `gen`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Render reports as text instead of JSON.
    #[arg(long, global = true)]
    pub human: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that φ is completely positive and Φ is a φ-map.
    Check { instance: PathBuf },
    /// Construct and verify the minimal representation pair.
    Dilate { instance: PathBuf },
    /// Decide unitary equivalence of two representation files.
    Equiv {
        instance: PathBuf,
        rep_a: PathBuf,
        rep_b: PathBuf,
    },
    /// Run the built-in Schur-multiplier example end to end.
    #[command(name = "demo-asadi")]
    Demo,
    /// Emit a random valid instance.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        h1: usize,
        #[arg(long)]
        h2: usize,
        #[arg(long)]
        r: usize,
    },
}

/// What a run printed and how it ended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub exit: Exit,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn input_error(msg: impl std::fmt::Display) -> Self {
        Outcome {
            exit: Exit::Input,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let exit = if e.use_stderr() {
                Exit::Input
            } else {
                Exit::Success
            };
            let text = e.render().to_string();
            if e.use_stderr() {
                Outcome {
                    exit,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    exit,
                    stdout: text,
                    stderr: String::new(),
                }
            }
        }
    }
}

fn render(report: &ReportFile, human: bool) -> String {
    if human {
        report.render_human()
    } else {
        format::to_json_text(report)
    }
}

pub fn execute(cli: &Cli) -> Outcome {
    let tol = match TolerancePolicy::new(cli.atol, cli.rank_rtol, cli.psd_rtol) {
        Ok(t) => t,
        Err(e) => return Outcome::input_error(e),
    };
    match dispatch(cli, &tol) {
        Ok(o) => o,
        Err(e) => Outcome::input_error(e),
    }
}

fn dispatch(cli: &Cli, tol: &TolerancePolicy) -> Result<Outcome, CliError> {
    let mut diagnostic = None;
    let (exit, stdout) = match &cli.command {
        Command::Check { instance } => {
            let (exit, report) = commands::check(instance, tol)?;
            diagnostic = report.error.clone();
            if let Some(out) = &cli.out {
                commands::write_json(out, &report)?;
            }
            (exit, render(&report, cli.human))
        }
        Command::Dilate { instance } => {
            let (exit, mut report, pair) = commands::dilate(instance, tol)?;
            diagnostic = report.error.clone();
            if let Some(pair) = pair {
                let file = RepresentationFile::from_pair(&pair);
                match &cli.out {
                    Some(out) => commands::write_json(out, &file)?,
                    None => report.representation = Some(file),
                }
            }
            (exit, render(&report, cli.human))
        }
        Command::Equiv {
            instance,
            rep_a,
            rep_b,
        } => {
            let (exit, mut report, witness) = commands::equiv(instance, rep_a, rep_b, tol)?;
            diagnostic = report.error.clone();
            if let Some(w) = witness {
                match &cli.out {
                    Some(out) => commands::write_json(out, &w)?,
                    None => report.witness = Some(w),
                }
            }
            (exit, render(&report, cli.human))
        }
        Command::Demo => {
            let (report, constructed) = commands::demo(tol);
            if let Some(dir) = &cli.out {
                commands::write_demo_files(dir, &constructed)?;
            }
            let exit = if report.passed() {
                Exit::Success
            } else {
                Exit::Math
            };
            (exit, report.render())
        }
        Command::Gen { n, k, h1, h2, r } => {
            let file = commands::gen(*n, *k, *h1, *h2, *r, cli.seed)?;
            match &cli.out {
                Some(out) => {
                    commands::write_json(out, &file)?;
                    (Exit::Success, String::new())
                }
                None => (Exit::Success, format::to_json_text(&file)),
            }
        }
    };
    let stderr = match (exit, diagnostic) {
        (Exit::Math, Some(msg)) => format!("error: {msg}\n"),
        (Exit::Math, None) => "error: verification failed\n".to_string(),
        _ => String::new(),
    };
    Ok(Outcome {
        exit,
        stdout,
        stderr,
    })
}
