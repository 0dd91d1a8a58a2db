//! `pmw`: batch front end for the workbench.
//!
//! Every subcommand prints one JSON report (stdout, or `--out`) and a short
//! human summary on stderr. Exit status is 0 when every check in scope
//! passed, 1 when a check failed and 2 on usage or input errors.

mod commands;
mod settings;
mod suite;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use settings::Settings;

#[derive(Parser, Debug)]
#[command(name = "pmw", version, about = "Proof-mining workbench: types, translations, majorants and operator checks")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalOpts {
    /// Seed for all sampling (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Check tolerance; `PMW_TOL` overrides the built-in default.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Worker threads for sample-parallel checks.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Flat `key = value` file supplying defaults for these options.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify a finite type and print its hat projection.
    Types {
        /// Type in `t(s)` syntax, e.g. `X(X)(1)`.
        ty: String,
    },
    /// Negative translation or Dialectica interpretation of every formula in a file.
    Translate {
        #[arg(long, conflicts_with = "dialectica", required_unless_present = "dialectica")]
        nt: bool,
        #[arg(long)]
        dialectica: bool,
        file: PathBuf,
    },
    /// Recognize `∀a ∃b⪯ra ∀c F` shapes and print their Skolem forms.
    Delta { file: PathBuf },
    /// Real-number codes.
    #[command(subcommand)]
    Real(RealCmd),
    /// Majorants for the resolvent and for bounded-on-bounded-sets operators.
    #[command(subcommand)]
    Majorant(MajorantCmd),
    /// Operator catalog and property checks.
    #[command(subcommand)]
    Oplab(OplabCmd),
    /// Iterative schemes with trace logging.
    #[command(subcommand)]
    Run(RunCmd),
    /// Summarize a trace written by `run`.
    Report { trace: PathBuf },
    /// Run the full check suite.
    Suite {
        /// Samples per sampled check.
        #[arg(long, default_value_t = 300)]
        samples: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum RealCmd {
    /// Canonical representation `(r)∘(0..=prec)` of a nonnegative rational.
    Canon {
        value: String,
        #[arg(long, default_value_t = 8)]
        prec: u32,
    },
}

#[derive(Subcommand, Debug)]
pub enum MajorantCmd {
    /// Check `λα,x*. x* + 2k + (2 + 2^m(α(0)+1))·n` against `J^{χ_A}`.
    Resolvent {
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        l: Option<u64>,
        #[arg(long)]
        k: Option<u64>,
        /// Catalog name or key-value file; default: every majorizable catalog instance.
        #[arg(long)]
        instance: Option<String>,
        #[arg(long, default_value_t = 40)]
        gamma_samples: usize,
        #[arg(long, default_value_t = 40)]
        point_samples: usize,
    },
    /// Uniform majorant of `A` on balls, or a NotBounded witness.
    Bobs {
        instance: String,
        #[arg(long, default_value = "0,1,2,4,8,16")]
        grid: String,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum OplabCmd {
    /// Class, resolvent and minimal-norm checks on one instance.
    Verify {
        /// Catalog name or key-value file.
        instance: String,
        #[arg(long)]
        samples: Option<usize>,
        /// Comma-separated step sizes.
        #[arg(long)]
        gamma_grid: Option<String>,
        #[arg(long)]
        radius: Option<f64>,
    },
    /// List catalog instances.
    List,
}

#[derive(Subcommand, Debug)]
pub enum RunCmd {
    /// `x_{n+1} = J_{γ_n} x_n`.
    Ppa {
        #[arg(long)]
        instance: String,
        /// `const:c`, `harmonic:c` or `geometric:c:q`.
        #[arg(long, default_value = "const:1")]
        gamma: String,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Starting point; a single value is broadcast. Default: a seeded sample.
        #[arg(long)]
        x0: Option<String>,
        /// Reference zero for distance logging and the Fejér check.
        #[arg(long)]
        zero: Option<String>,
        /// Also write the trace as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// `x_{n+1} = J^S_{μ_n}(x_n + μ_n T_{λ_n} x_n)`.
    Moudafi {
        #[arg(long = "t")]
        t_instance: String,
        #[arg(long = "s")]
        s_instance: String,
        #[arg(long, default_value = "const:1")]
        mu: String,
        #[arg(long, default_value = "const:1")]
        lambda: String,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long)]
        x0: Option<String>,
        #[arg(long)]
        zero: Option<String>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

/// What a subcommand hands back to `main`.
pub struct Outcome {
    pub report: Value,
    pub passed: bool,
    pub summary: String,
}

fn dispatch(cmd: Command, s: &Settings) -> anyhow::Result<Outcome> {
    match cmd {
        Command::Types { ty } => commands::types(&ty),
        Command::Translate { nt, file, .. } => commands::translate(&file, nt),
        Command::Delta { file } => commands::delta(&file),
        Command::Real(RealCmd::Canon { value, prec }) => commands::real_canon(&value, prec),
        Command::Majorant(m) => commands::majorant(m, s),
        Command::Oplab(o) => commands::oplab(o, s),
        Command::Run(r) => commands::run(r, s),
        Command::Report { trace } => commands::report(&trace),
        Command::Suite { samples } => suite::run(s, samples),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let settings = match Settings::resolve(&cli.global) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    if let Some(j) = settings.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: cannot start {j} workers: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = match dispatch(cli.command, &settings) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let mut report = outcome.report;
    if let Value::Object(map) = &mut report {
        map.insert("seed".into(), settings.seed.into());
        map.insert("passed".into(), outcome.passed.into());
    }
    let text = serde_json::to_string_pretty(&report).expect("reports serialize") + "\n";
    match &settings.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    eprintln!(
        "{} [{}] (seed {})",
        outcome.summary,
        if outcome.passed { "PASS" } else { "FAIL" },
        settings.seed
    );
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
