//! Command-line front end: `run`, `preset`, `list-presets` and `validate`.
//!
//! Exit status is 0 when every scenario ran cleanly, 2 when a run finished
//! but broke an invariant, and 1 on any error.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::report::{self, EmitOptions, Format};
use crate::scenario::{self, Scenario};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_VIOLATION: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "afshar", version, about = "Simulate the two-pinhole / lens / wire-grid interferometer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every scenario in a manifest.
    Run {
        manifest: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run one built-in scenario.
    Preset {
        name: String,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Print the built-in scenarios.
    ListPresets {
        /// Print the presets as a manifest instead.
        #[arg(long)]
        manifest: bool,
    },
    /// Check a manifest without running it.
    Validate { manifest: PathBuf },
}

#[derive(Debug, Args)]
pub struct RunOpts {
    /// Override every scenario's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override every scenario's photon count.
    #[arg(long)]
    pub photons: Option<u64>,
    #[arg(long, env = "AFSHAR_OUT_DIR", default_value = "afshar-out")]
    pub out_dir: PathBuf,
    /// Also write the half-population miscount, labelled as such.
    #[arg(long)]
    pub emit_fallacy: bool,
    /// Summary layout: text or delimited.
    #[arg(long, default_value = "text", value_parser = ["text", "delimited"])]
    pub format: String,
}

fn read_manifest(path: &PathBuf) -> Result<Vec<Scenario>> {
    let text = fs::read_to_string(path)?;
    scenario::parse_manifest(&text)
}

fn run_all(mut scenarios: Vec<Scenario>, opts: &RunOpts, out: &mut dyn Write) -> Result<u8> {
    let options = EmitOptions { format: Format::parse(&opts.format)?, emit_fallacy: opts.emit_fallacy };
    for s in &mut scenarios {
        if let Some(seed) = opts.seed {
            s.seed = seed;
        }
        if let Some(n) = opts.photons {
            if n == 0 {
                return Err(Error::InsufficientStatistics("--photons must be positive".into()));
            }
            s.n_photons = n;
        }
    }
    // everything runs before anything is written
    let bundles = scenarios.iter().map(scenario::run_scenario).collect::<Result<Vec<_>>>()?;
    let mut status = EXIT_OK;
    for b in &bundles {
        let path = report::write_bundle(b, &opts.out_dir, options)?;
        let violations = b.violations();
        writeln!(out, "{}: {}", b.scenario.name, path.display())?;
        for v in &violations {
            writeln!(out, "  violation: {v}")?;
        }
        if !violations.is_empty() {
            status = EXIT_VIOLATION;
        }
    }
    Ok(status)
}

/// Executes a parsed command, writing progress to `out`.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<u8> {
    match cli.command {
        Command::Run { manifest, opts } => run_all(read_manifest(&manifest)?, &opts, out),
        Command::Preset { name, opts } => run_all(vec![Scenario::from_spec(&scenario::preset(&name)?)?], &opts, out),
        Command::ListPresets { manifest: true } => {
            let specs = scenario::PRESETS.iter().map(|(n, _)| scenario::preset(n)).collect::<Result<Vec<_>>>()?;
            write!(out, "{}", scenario::manifest_text(&specs)?)?;
            Ok(EXIT_OK)
        }
        Command::ListPresets { manifest: false } => {
            for (name, about) in scenario::PRESETS {
                writeln!(out, "{name:<12} {about}")?;
            }
            Ok(EXIT_OK)
        }
        Command::Validate { manifest } => {
            let scenarios = read_manifest(&manifest)?;
            writeln!(out, "{} scenario(s) valid", scenarios.len())?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` and runs; errors go to `err` and map to [`EXIT_ERROR`].
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version are not failures
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_ERROR;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}
