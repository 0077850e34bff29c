use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fraclyap::fracops::mittag_leffler;
use fraclyap::harness::{
    builtin_document, parse_config, run_remark4, run_scenario, stability_probe, RunArtifacts, ScenarioConfig,
    BUILTIN_SCENARIOS,
};
use fraclyap::Error;

/// Lyapunov stability checks for Caputo fractional systems.
///
/// Exit status: 0 when every check passes, 1 when a mathematical check
/// fails, 2 on invalid input or I/O errors.
#[derive(Parser)]
#[command(name = "fraclyap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario document.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory, overriding `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Finite-horizon epsilon-delta probe for a scenario.
    Probe {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Evaluate the Mittag-Leffler function E_alpha(z).
    Ml {
        #[arg(long)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        z: f64,
    },
    /// Run a built-in scenario: example1, example1-identity, example2 or remark4.
    Builtin {
        #[arg(long)]
        name: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

enum Failure {
    Check(String),
    Input(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

fn load(path: &Path) -> Result<ScenarioConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_config(&text)
}

fn summarize(a: &RunArtifacts) -> Result<(), Failure> {
    println!("verdict: {}", a.verdict);
    for p in &a.csv_paths {
        println!("csv: {}", p.display());
    }
    println!("report: {}", a.report_path.display());
    println!("wall_time_s: {:.3}", a.wall_time.as_secs_f64());
    if a.all_passed {
        Ok(())
    } else {
        Err(Failure::Check(format!("checks failed, see {}", a.report_path.display())))
    }
}

fn run_builtin(name: &str, out: PathBuf) -> Result<(), Failure> {
    if name == "remark4" {
        let a = run_remark4(&out)?;
        println!("csv: {}", a.csv_path.display());
        println!("report: {}", a.report_path.display());
        return if a.positive && a.non_convergent {
            Ok(())
        } else {
            Err(Failure::Check("remark4 fixture lost its shape".into()))
        };
    }
    let doc = builtin_document(name).ok_or_else(|| {
        Error::Constraint(format!(
            "unknown built-in '{name}'; choose one of {}, remark4",
            BUILTIN_SCENARIOS.join(", ")
        ))
    })?;
    let mut cfg = parse_config(doc)?;
    cfg.output_dir = out;
    let artifacts = run_scenario(&cfg)?;
    let mut result = summarize(&artifacts);
    if cfg.probe.is_some() {
        let probe = stability_probe(&cfg, None)?;
        let path = cfg.output_dir.join(format!("{}_probe.txt", cfg.name));
        std::fs::write(&path, probe.to_text()).map_err(|source| Error::Io { path: path.clone(), source })?;
        println!("probe: {}", path.display());
        if !probe.stayed_below_eps && result.is_ok() {
            result = Err(Failure::Check(format!("probe left the eps ball, see {}", path.display())));
        }
    }
    result
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, out, steps, seed } => {
            let mut cfg = load(&config)?;
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            if let Some(steps) = steps {
                if steps < 8 {
                    return Err(Error::Constraint("steps must be at least 8".into()).into());
                }
                cfg.steps = steps;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            summarize(&run_scenario(&cfg)?)
        }
        Command::Probe { config, eps } => {
            let cfg = load(&config)?;
            let probe = stability_probe(&cfg, eps)?;
            print!("{}", probe.to_text());
            if probe.stayed_below_eps {
                Ok(())
            } else {
                Err(Failure::Check("trajectory left the eps ball".into()))
            }
        }
        Command::Ml { alpha, z } => {
            println!("{:?}", mittag_leffler(alpha, z)?);
            Ok(())
        }
        Command::Builtin { name, out } => run_builtin(&name, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("fraclyap: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("fraclyap: {e}");
            ExitCode::from(2)
        }
    }
}
