use std::path::Path;

use serde::de::DeserializeOwned;

use super::{execute, fit, prior_check, simulate, study};
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;

fn config<T: DeserializeOwned>(m: &RunManifest, path: &Path) -> CliResult<T> {
    serde_json::from_value(m.config.clone()).map_err(|e| CliError::format(path, format!("config: {e}")))
}

/// Runs the command recorded in `manifest` again, writing into `out`.
pub fn replay(manifest: &Path, out: &Path) -> CliResult<()> {
    let m = RunManifest::read(manifest)?;
    match m.command.as_str() {
        "simulate" => {
            let c: simulate::SimulateConfig = config(&m, manifest)?;
            execute("simulate", &c, c.seed, out, |d| simulate::execute(&c, d))
        }
        "fit" => {
            let c: fit::FitConfig = config(&m, manifest)?;
            execute("fit", &c, c.seed, out, |d| fit::execute(&c, d))
        }
        "prior-check" => {
            let c: prior_check::PriorCheckConfig = config(&m, manifest)?;
            execute("prior-check", &c, c.seed, out, |d| prior_check::execute(&c, d))
        }
        "invariance-study" => {
            let c: study::StudyConfig = config(&m, manifest)?;
            execute("invariance-study", &c, c.seed, out, |d| study::execute(&c, d))
        }
        other => Err(CliError::format(manifest, format!("unknown command '{other}'"))),
    }
}
