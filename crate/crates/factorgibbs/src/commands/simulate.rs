use std::path::{Path, PathBuf};

use factorgibbs_core::study::{fixture_by_name, permute_columns, simulate_dataset, SimTruth};
use serde::{Deserialize, Serialize};

use super::{absolute, absolute_pi, default_fixture, known_fixture, load_permutation, RunOutput, DEFAULT_DATA_SEED};
use crate::cli::SimulateArgs;
use crate::config::{pick, pick_opt, ConfigFile};
use crate::error::{CliError, CliResult};
use crate::io::{read_matrix_csv, write_dataset_csv};

pub const KEYS: &[&str] = &["truth", "n", "seed", "permute"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub truth: Option<String>,
    pub beta0: Option<PathBuf>,
    pub omega0: Option<PathBuf>,
    pub n: usize,
    pub seed: u64,
    pub permute: Option<String>,
}

pub fn resolve(a: &SimulateArgs, file: &ConfigFile) -> CliResult<SimulateConfig> {
    file.check_keys(KEYS)?;
    let (truth, beta0, omega0) = match (&a.beta0, &a.omega0) {
        (Some(b), Some(o)) => (None, Some(absolute(b)?), Some(absolute(o)?)),
        _ => {
            let t = pick(a.truth.clone(), file, "truth", default_fixture())?;
            known_fixture(&t)?;
            (Some(t), None, None)
        }
    };
    let default_n = match &truth {
        Some(t) => fixture_by_name(t)?.n,
        None => 30,
    };
    let n = pick(a.n, file, "n", default_n)?;
    if n == 0 {
        return Err(CliError::Config("n must be positive".into()));
    }
    Ok(SimulateConfig {
        truth,
        beta0,
        omega0,
        n,
        seed: pick(a.seed, file, "seed", DEFAULT_DATA_SEED)?,
        permute: pick_opt(a.permute.clone(), file, "permute")?.map(absolute_pi).transpose()?,
    })
}

pub fn load_truth(cfg: &SimulateConfig, out: &mut RunOutput) -> CliResult<SimTruth> {
    match (&cfg.truth, &cfg.beta0, &cfg.omega0) {
        (Some(name), _, _) => {
            let fx = fixture_by_name(name)?;
            for w in fx.warnings {
                out.warn(w);
            }
            Ok(fx.truth)
        }
        (None, Some(b), Some(o)) => {
            out.inputs.extend([b.clone(), o.clone()]);
            let beta = read_matrix_csv(b, false)?;
            let omega = read_matrix_csv(o, false)?.as_slice().to_vec();
            Ok(SimTruth::new(beta, omega)?)
        }
        _ => Err(CliError::Config("simulate needs --truth or both --beta0 and --omega0".into())),
    }
}

pub fn execute(cfg: &SimulateConfig, dir: &Path) -> CliResult<RunOutput> {
    let mut out = RunOutput::default();
    let truth = load_truth(cfg, &mut out)?;
    let pi = cfg.permute.as_deref().map(|p| load_permutation(p, truth.m())).transpose()?;
    let y = simulate_dataset(&truth, cfg.n, cfg.seed)?;
    write_dataset_csv(&dir.join("Y.csv"), &y)?;
    out.outputs.push("Y.csv".into());
    if let Some(pi) = pi {
        write_dataset_csv(&dir.join("Ypi.csv"), &permute_columns(&y, &pi)?)?;
        out.outputs.push("Ypi.csv".into());
    }
    println!("wrote {} observations of {} variables to {}", y.n(), y.m(), dir.display());
    Ok(out)
}
