//! Command-line front end: `gnep <command> <problem> [flags]`.
//!
//! Settings resolve as command-line flags, then `solver` lines in the
//! problem file, then defaults.

use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::config::SolverConfig;
use crate::error::Result;
use crate::problem::{apply_setting, parse_problem};
use crate::report::{real, RunReport};
use crate::solvers::{brute_force_oracle, solve_fixed_point, solve_qvi};

#[derive(Debug, Parser)]
#[command(name = "gnep", about = "Projected solutions of generalized games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Damped best-response fixed-point iteration from several starts.
    SolveFp(Common),
    /// Grid scan for zeros of the QVI residual.
    SolveQvi(Common),
    /// Certify every candidate grid pair.
    Oracle(Common),
    /// Certify a single candidate.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Candidate x̃, comma-separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x: Vec<f64>,
        /// Candidate ỹ, comma-separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        y: Vec<f64>,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Problem file.
    pub problem: std::path::PathBuf,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Random probes per emptiness check.
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub multistart: Option<usize>,
    /// Append wall-clock time to the report.
    #[arg(long)]
    pub timing: bool,
}

impl Common {
    fn flags(&self) -> Vec<(&'static str, String)> {
        let mut f = Vec::new();
        let mut add = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                f.push((k, v));
            }
        };
        add("h", self.h.map(|v| v.to_string()));
        add("eps", self.eps.map(|v| v.to_string()));
        add("lambda", self.lambda.map(|v| v.to_string()));
        add("budget", self.budget.map(|v| v.to_string()));
        add("seed", self.seed.map(|v| v.to_string()));
        add("max-iter", self.max_iter.map(|v| v.to_string()));
        add("multistart", self.multistart.map(|v| v.to_string()));
        f
    }
}

/// Result of one invocation: text for stdout and stderr plus the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I) -> Invocation
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let code = if e.use_stderr() { 2 } else { 0 };
            let (stdout, stderr) = if code == 0 { (text, String::new()) } else { (String::new(), text) };
            return Invocation { stdout, stderr, code };
        }
    };
    match execute(&cli.command) {
        Ok((report, code)) => Invocation {
            stdout: report.render(),
            stderr: String::new(),
            code,
        },
        Err(e) => Invocation {
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
            code: 2,
        },
    }
}

fn execute(cmd: &Command) -> Result<(RunReport, i32)> {
    let (name, common) = match cmd {
        Command::SolveFp(c) => ("solve-fp", c),
        Command::SolveQvi(c) => ("solve-qvi", c),
        Command::Oracle(c) => ("oracle", c),
        Command::Verify { common, .. } => ("verify", common),
    };
    let text = std::fs::read_to_string(&common.problem).map_err(|e| {
        crate::Error::Input(format!("cannot read {}: {e}", common.problem.display()))
    })?;
    let problem = parse_problem(&text)?;
    let mut cfg = problem.config(SolverConfig::default())?;
    for (k, v) in common.flags() {
        apply_setting(&mut cfg, k, &v)?;
    }
    cfg.validate()?;
    let game = &problem.game;
    let mut report = RunReport::header(name, &problem.digest()?, game, &cfg);
    let started = Instant::now();
    let code = match cmd {
        Command::Verify { x, y, .. } => {
            let cert = game.check_projected_solution(x, y, &cfg)?;
            report.push("certificates", 1);
            report.certificate(0, &cert);
            if cert.passed() { 0 } else { 1 }
        }
        _ => {
            let out = match name {
                "solve-fp" => solve_fixed_point(game, &cfg)?,
                "solve-qvi" => solve_qvi(game, &cfg)?,
                _ => brute_force_oracle(game, &cfg)?,
            };
            report.outcome(&out);
            if out.clusters.is_empty() { 1 } else { 0 }
        }
    };
    if common.timing {
        report.push("timing.seconds", real(started.elapsed().as_secs_f64()));
    }
    Ok((report, code))
}
