//! The command workflows. Each command resolves its settings into a
//! serializable config, runs it into an output directory, and records the
//! config in the manifest so that `replay` can run it again.

pub mod fit;
pub mod prior_check;
pub mod replay;
pub mod simulate;
pub mod study;

use std::path::{Path, PathBuf};

use factorgibbs_core::study::{Permutation, PAPER_SIM_1};
use factorgibbs_core::{PriorFamily, PriorSpec};
use serde::Serialize;

use crate::cli::{ChainArgs, Cli, Command, PriorArgs};
use crate::config::{pick, ConfigFile};
use crate::error::{CliError, CliResult};
use crate::io::{ensure_dir, read_matrix_csv};
use crate::manifest::{unix_now, RunManifest, CODE_VERSION, SCHEMA_VERSION};

/// Desk-scale chain lengths.
pub const DEFAULT_BURN_IN: u64 = 2_000;
pub const DEFAULT_ITERATIONS: u64 = 50_000;
/// Chain lengths selected by `--paper-scale`.
pub const PAPER_BURN_IN: u64 = 10_000;
pub const PAPER_ITERATIONS: u64 = 300_000;
pub const DEFAULT_SEED: u64 = 1;
/// Default seed of the simulated dataset for the built-in truth.
pub const DEFAULT_DATA_SEED: u64 = 7;

/// What a command produced, before the manifest is written.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    /// Set when the run completed its outputs but should exit non-zero.
    pub failure: Option<CliError>,
}

impl RunOutput {
    pub fn warn(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        eprintln!("WARNING: {msg}");
        self.warnings.push(msg);
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Simulate(a) => {
            let cfg = simulate::resolve(&a, &file)?;
            execute("simulate", &cfg, cfg.seed, &a.out, |out| simulate::execute(&cfg, out))
        }
        Command::Fit(a) => {
            let cfg = fit::resolve(&a, &file)?;
            execute("fit", &cfg, cfg.seed, &a.out, |out| fit::execute(&cfg, out))
        }
        Command::PriorCheck(a) => {
            let cfg = prior_check::resolve(&a, &file)?;
            execute("prior-check", &cfg, cfg.seed, &a.out, |out| prior_check::execute(&cfg, out))
        }
        Command::InvarianceStudy(a) => {
            let cfg = study::resolve(&a, &file)?;
            execute("invariance-study", &cfg, cfg.seed, &a.out, |out| study::execute(&cfg, out))
        }
        Command::Replay(a) => replay::replay(&a.manifest, &a.out),
    }
}

/// Runs `body` into `out` and writes the manifest, also when `body` reports
/// a failure after writing its outputs.
pub fn execute<C: Serialize>(
    command: &str,
    config: &C,
    seed: u64,
    out: &Path,
    body: impl FnOnce(&Path) -> CliResult<RunOutput>,
) -> CliResult<()> {
    ensure_dir(out)?;
    let started = unix_now();
    let mut result = body(out)?;
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        command: command.to_string(),
        config: serde_json::to_value(config).map_err(|e| CliError::Config(e.to_string()))?,
        seed,
        inputs: result.inputs.clone(),
        outputs: result.outputs.clone(),
        code_version: CODE_VERSION.to_string(),
        started_unix: started,
        finished_unix: unix_now(),
        warnings: result.warnings.clone(),
    };
    manifest.write(out)?;
    match result.failure.take() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

pub fn resolve_prior(args: &PriorArgs, file: &ConfigFile) -> CliResult<PriorSpec> {
    let family: PriorFamily = pick(args.prior.clone(), file, "prior", "order-invariant".to_string())?
        .parse()
        .map_err(|e: factorgibbs_core::Error| CliError::Config(e.to_string()))?;
    let d = PriorSpec::default_for(family);
    let spec = PriorSpec {
        family,
        c0: pick(args.c0, file, "c0", d.c0)?,
        nu: pick(args.nu, file, "nu", d.nu)?,
        s2: pick(args.s2, file, "s2", d.s2)?,
    };
    spec.validate()?;
    Ok(spec)
}

/// `(burn_in, iterations, thin, seed)`.
pub fn resolve_chain(args: &ChainArgs, file: &ConfigFile) -> CliResult<(u64, u64, u64, u64)> {
    let (b, i) = if args.paper_scale || file.get::<bool>("paper-scale")?.unwrap_or(false) {
        (PAPER_BURN_IN, PAPER_ITERATIONS)
    } else {
        (DEFAULT_BURN_IN, DEFAULT_ITERATIONS)
    };
    Ok((
        pick(args.burn_in, file, "burn-in", b)?,
        pick(args.iterations, file, "iters", i)?,
        pick(args.thin, file, "thin", 1)?,
        pick(args.seed, file, "seed", DEFAULT_SEED)?,
    ))
}

/// `paper-pi`, `identity`, or a CSV file of 1-based images (one row or one
/// value per line).
pub fn load_permutation(spec: &str, m: usize) -> CliResult<Permutation> {
    let pi = match spec {
        "paper-pi" => Permutation::paper_pi(),
        "identity" => Permutation::identity(m),
        path => {
            let mat = read_matrix_csv(Path::new(path), false)?;
            let values: Vec<usize> = mat
                .as_slice()
                .iter()
                .map(|v| {
                    if *v >= 1.0 && v.fract() == 0.0 {
                        Ok(*v as usize)
                    } else {
                        Err(CliError::Config(format!("{path}: permutation entry {v} is not a positive integer")))
                    }
                })
                .collect::<CliResult<_>>()?;
            Permutation::from_one_based(&values)?
        }
    };
    if pi.len() != m {
        return Err(CliError::Config(format!(
            "permutation has {} entries but the data have {m} variables",
            pi.len()
        )));
    }
    Ok(pi)
}

/// Absolute form of a user path, so a manifest can be replayed from any
/// working directory.
pub fn absolute(path: &Path) -> CliResult<PathBuf> {
    std::path::absolute(path).map_err(|e| CliError::io(path, e))
}

/// Same, for a permutation spec that may name a file.
pub fn absolute_pi(spec: String) -> CliResult<String> {
    if spec == "paper-pi" || spec == "identity" {
        return Ok(spec);
    }
    Ok(absolute(Path::new(&spec))?.to_string_lossy().into_owned())
}

pub fn known_fixture(name: &str) -> CliResult<()> {
    factorgibbs_core::study::fixture_by_name(name)?;
    Ok(())
}

pub fn default_fixture() -> String {
    PAPER_SIM_1.to_string()
}

/// `mean`, `sd` formatted for the terminal table.
pub fn fmt4(x: f64) -> String {
    format!("{x:.4}")
}
