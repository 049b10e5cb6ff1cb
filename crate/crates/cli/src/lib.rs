//! Batch runner for the conifold checks: `run` writes one CSV per check and
//! a JSON summary, `plot` turns a run directory into log-log SVG plots.

pub mod checks;
pub mod config;
pub mod plot;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::checks::{check_names, run_all, run_check, Ctx};
use crate::config::Config;
use crate::report::Summary;

pub const DEFAULT_SEED: u64 = 7;

#[derive(Parser, Debug)]
#[command(name = "conifold-forge", version, about = "Numerical checks on conifold model geometries")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run one check, or `all`.
    Run {
        #[arg(value_parser = check_parser())]
        check: String,
        /// Flat `key = value` configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Record wall time in the summary (breaks byte-identical reruns).
        #[arg(long)]
        timing: bool,
    },
    /// Render `<check>.svg` for each plottable report in a run directory.
    Plot { dir: PathBuf },
}

fn check_parser() -> clap::builder::PossibleValuesParser {
    let mut names = check_names();
    names.push("all");
    clap::builder::PossibleValuesParser::new(names)
}

/// Entry point; returns the process exit code (0 pass, 1 failure, 2 usage).
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match cli.cmd {
        Cmd::Run { check, config, seed, out, timing } => {
            let cfg = match config.map(|p| Config::load(&p)).transpose() {
                Ok(c) => c.unwrap_or_default(),
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return 2;
                }
            };
            let seed = seed.or(cfg.seed()).unwrap_or(DEFAULT_SEED);
            let ctx = Ctx { cfg: &cfg, seed, timing };
            let reports = if check == "all" {
                run_all(&ctx)
            } else {
                match run_check(&check, &ctx) {
                    Ok(r) => vec![r],
                    Err(e) => {
                        eprintln!("error: {e:#}");
                        return 2;
                    }
                }
            };
            for r in &reports {
                println!("{}", r.line());
            }
            let summary = Summary::new(seed, cfg.entries().clone(), reports);
            if let Err(e) = summary.write(&out) {
                eprintln!("error: {e:#}");
                return 1;
            }
            i32::from(!summary.pass)
        }
        Cmd::Plot { dir } => match plot::plot_dir(&dir) {
            Ok(paths) => {
                for p in paths {
                    println!("{}", p.display());
                }
                0
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                1
            }
        },
    }
}
