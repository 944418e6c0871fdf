use std::path::{Path, PathBuf};

use factorgibbs_core::study::ess::{effective_sample_size, mcse, mean, variance};
use factorgibbs_core::study::{fit_factor_mle, state_from_fit, MleMethod};
use factorgibbs_core::{chain_rng, run_chain, ChainState, Dataset, DrawStore, GibbsConfig, PriorSpec, StoreMode};
use serde::{Deserialize, Serialize};

use super::{absolute, fmt4, resolve_chain, resolve_prior, RunOutput};
use crate::cli::FitArgs;
use crate::config::{pick, ConfigFile};
use crate::error::{CliError, CliResult};
use crate::io::{read_dataset_csv, write_draws_csv, write_sidecar, write_table_csv};
use crate::manifest::CODE_VERSION;

pub const KEYS: &[&str] = &[
    "k", "prior", "c0", "nu", "s2", "burn-in", "iters", "thin", "seed", "paper-scale", "store", "init",
];

/// Random stream used to draw a starting point from the prior; chains use
/// streams 0 and 1.
pub const INIT_STREAM: u64 = 1 << 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub data: PathBuf,
    pub k: usize,
    pub prior: String,
    pub c0: f64,
    pub nu: f64,
    pub s2: f64,
    pub burn_in: u64,
    pub iterations: u64,
    pub thin: u64,
    pub seed: u64,
    pub store: String,
    pub init: String,
}

impl FitConfig {
    pub fn prior_spec(&self) -> CliResult<PriorSpec> {
        let spec = PriorSpec::new(self.prior.parse()?, self.c0, self.nu, self.s2)?;
        Ok(spec)
    }

    pub fn gibbs(&self) -> CliResult<GibbsConfig> {
        let cfg = GibbsConfig {
            prior: self.prior_spec()?,
            burn_in: self.burn_in,
            iterations: self.iterations,
            thin: self.thin,
            seed: self.seed,
            chain: 0,
            store: self.store.parse()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn resolve(a: &FitArgs, file: &ConfigFile) -> CliResult<FitConfig> {
    file.check_keys(KEYS)?;
    let prior = resolve_prior(&a.prior, file)?;
    let (burn_in, iterations, thin, seed) = resolve_chain(&a.chain, file)?;
    let k = pick(a.k, file, "k", 3)?;
    let cfg = FitConfig {
        data: absolute(&a.data)?,
        k,
        prior: prior.family.name().to_string(),
        c0: prior.c0,
        nu: prior.nu,
        s2: prior.s2,
        burn_in,
        iterations,
        thin,
        seed,
        store: pick(a.store.clone(), file, "store", StoreMode::SigmaDiag.name().to_string())?,
        init: pick(a.init.clone(), file, "init", "mle".to_string())?,
    };
    cfg.gibbs()?;
    if cfg.init != "mle" && cfg.init != "prior" {
        return Err(CliError::Config(format!("--init must be 'mle' or 'prior', got '{}'", cfg.init)));
    }
    if k == 0 {
        return Err(CliError::Config("k must be at least 1".into()));
    }
    Ok(cfg)
}

pub fn check_dims(y: &Dataset, k: usize, init: &str) -> CliResult<()> {
    if k > y.m() {
        return Err(CliError::Config(format!("k={k} exceeds the number of variables m={}", y.m())));
    }
    if init == "mle" && k == y.m() {
        return Err(CliError::Config(format!(
            "k = m = {k}: the maximum likelihood start is not defined; use --init prior or a smaller k"
        )));
    }
    Ok(())
}

fn initial_state(cfg: &FitConfig, y: &Dataset, prior: &PriorSpec, out: &mut RunOutput) -> CliResult<ChainState> {
    if cfg.init == "prior" {
        return Ok(ChainState::from_prior(y, prior, cfg.k, &mut chain_rng(cfg.seed, INIT_STREAM))?);
    }
    let fit = fit_factor_mle(y, cfg.k)?;
    if fit.method == MleMethod::PrincipalAxis {
        out.warn(format!(
            "maximum likelihood start fell back to principal axes: {}",
            fit.fallback_reason.as_deref().unwrap_or("unknown reason")
        ));
    }
    Ok(state_from_fit(y, &fit)?)
}

pub fn draws_sidecar(store: &DrawStore, gibbs: &GibbsConfig, extra: &[(&str, String)]) -> Vec<(String, String)> {
    let d = &store.diagnostics;
    let mut e: Vec<(String, String)> = vec![
        ("format".into(), "factorgibbs-draws-v1".into()),
        ("store".into(), store.mode.name().into()),
        ("m".into(), store.m.to_string()),
        ("k".into(), store.k.to_string()),
        ("n".into(), store.n.to_string()),
        ("prior".into(), gibbs.prior.family.name().into()),
        ("c0".into(), gibbs.prior.c0.to_string()),
        ("nu".into(), gibbs.prior.nu.to_string()),
        ("s2".into(), gibbs.prior.s2.to_string()),
        ("burn_in".into(), gibbs.burn_in.to_string()),
        ("iterations".into(), gibbs.iterations.to_string()),
        ("thin".into(), gibbs.thin.to_string()),
        ("seed".into(), gibbs.seed.to_string()),
        ("chain".into(), gibbs.chain.to_string()),
        ("rng".into(), "ChaCha8 (rand_chacha 0.9), stream = chain".into()),
        ("stored".into(), store.len().to_string()),
        ("truncated".into(), store.truncated.to_string()),
        ("sweeps".into(), d.sweeps.to_string()),
        ("ars_draws".into(), d.ars_draws.to_string()),
        ("ars_refinements".into(), d.ars_refinements.to_string()),
        ("jitter_retries".into(), d.jitter_retries.to_string()),
        ("warnings".into(), d.warnings.join("; ")),
        ("code_version".into(), CODE_VERSION.into()),
    ];
    e.extend(extra.iter().map(|(k, v)| (k.to_string(), v.clone())));
    e
}

/// Posterior mean, sd, ESS and MCSE of each `sigma_ii`.
pub fn sigma_summary(store: &DrawStore) -> Vec<Vec<String>> {
    (0..store.m)
        .map(|i| {
            let xs = store.sigma_diag_series(i);
            vec![
                (i + 1).to_string(),
                mean(&xs).to_string(),
                variance(&xs).max(0.0).sqrt().to_string(),
                effective_sample_size(&xs).to_string(),
                mcse(&xs).to_string(),
            ]
        })
        .collect()
}

pub fn execute(cfg: &FitConfig, dir: &Path) -> CliResult<RunOutput> {
    let mut out = RunOutput::default();
    out.inputs.push(cfg.data.clone());
    let y = read_dataset_csv(&cfg.data)?;
    check_dims(&y, cfg.k, &cfg.init)?;
    let gibbs = cfg.gibbs()?;
    let init = initial_state(cfg, &y, &gibbs.prior, &mut out)?;
    let (store, failure) = match run_chain(&y, &gibbs, init) {
        Ok(s) => (s, None),
        Err(aborted) => {
            let msg = aborted.to_string();
            (*aborted.partial, Some(CliError::Numerical(msg)))
        }
    };
    for w in &store.diagnostics.warnings {
        out.warn(w.clone());
    }
    write_draws_csv(&dir.join("draws.csv"), &store)?;
    write_sidecar(&dir.join("draws.meta"), &draws_sidecar(&store, &gibbs, &[("init", cfg.init.clone())]))?;
    out.outputs.extend(["draws.csv".to_string(), "draws.meta".to_string()]);
    if !store.is_empty() {
        let rows = sigma_summary(&store);
        write_table_csv(&dir.join("summary.csv"), &["variable", "mean", "sd", "ess", "mcse"], &rows)?;
        out.outputs.push("summary.csv".into());
        println!("{:>8} {:>10} {:>10} {:>8}", "sigma_ii", "mean", "sd", "ess");
        for r in &rows {
            let p = |s: &String| s.parse::<f64>().unwrap_or(f64::NAN);
            println!("{:>8} {:>10} {:>10} {:>8.0}", r[0], fmt4(p(&r[1])), fmt4(p(&r[2])), p(&r[3]));
        }
    }
    out.failure = failure;
    Ok(out)
}
