use std::path::Path;

use factorgibbs_core::dist::chi_square;
use factorgibbs_core::math::norm_isf;
use factorgibbs_core::priors::{gram_diag_df, sample_loadings_prior};
use factorgibbs_core::study::ess::{mean, variance};
use factorgibbs_core::study::ks::{ks_critical_value, ks_two_sample};
use factorgibbs_core::{chain_rng, ModelDims, PriorFamily, PriorSpec};
use serde::{Deserialize, Serialize};

use super::{fmt4, RunOutput, DEFAULT_SEED};
use crate::cli::PriorCheckArgs;
use crate::config::{pick, ConfigFile};
use crate::error::{CliError, CliResult};
use crate::io::{write_json, write_table_csv};

pub const KEYS: &[&str] = &["prior", "c0", "m", "k", "draws", "seed"];

/// Probability that a correct sampler fails any check. Each row runs three
/// tests (mean, variance, KS), and the level is split evenly across them.
pub const FAMILY_LEVEL: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorCheckConfig {
    pub prior: String,
    pub c0: f64,
    pub m: usize,
    pub k: usize,
    pub draws: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowCheck {
    pub i: usize,
    pub df: usize,
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
    pub ks: f64,
    pub ks_critical: f64,
    /// Standard errors allowed for the mean and variance checks.
    pub z: f64,
    pub pass: bool,
}

pub fn resolve(a: &PriorCheckArgs, file: &ConfigFile) -> CliResult<PriorCheckConfig> {
    file.check_keys(KEYS)?;
    let cfg = PriorCheckConfig {
        prior: pick(a.prior.clone(), file, "prior", "order-invariant".to_string())?,
        c0: pick(a.c0, file, "c0", 1.0)?,
        m: pick(a.m, file, "m", 15)?,
        k: pick(a.k, file, "k", 3)?,
        draws: pick(a.draws, file, "draws", 100_000)?,
        seed: pick(a.seed, file, "seed", DEFAULT_SEED)?,
    };
    let family: PriorFamily = cfg.prior.parse()?;
    PriorSpec::new(family, cfg.c0, 2.2, 0.1 / 2.2)?;
    ModelDims::new(cfg.m, cfg.k, 1)?;
    if cfg.draws < 2 {
        return Err(CliError::Config("draws must be at least 2".into()));
    }
    Ok(cfg)
}

/// Monte Carlo moments of `(beta beta')_ii / C0` against the chi-square
/// law with the family's degrees of freedom, plus a KS test against direct
/// chi-square draws. Thresholds are Bonferroni-corrected to
/// [`FAMILY_LEVEL`] over all rows.
pub fn check(cfg: &PriorCheckConfig) -> CliResult<Vec<RowCheck>> {
    let family: PriorFamily = cfg.prior.parse()?;
    let d = PriorSpec::default_for(family);
    let spec = PriorSpec::new(family, cfg.c0, d.nu, d.s2)?;
    let dims = ModelDims::new(cfg.m, cfg.k, 1)?;
    let mut rng = chain_rng(cfg.seed, 0);
    let mut cols = vec![Vec::with_capacity(cfg.draws); cfg.m];
    for _ in 0..cfg.draws {
        let beta = sample_loadings_prior(&spec, &dims, &mut rng);
        for (i, col) in cols.iter_mut().enumerate() {
            col.push(beta.row_head(i).iter().map(|b| b * b).sum::<f64>() / cfg.c0);
        }
    }
    let mut direct_rng = chain_rng(cfg.seed, 1);
    let n = cfg.draws as f64;
    let level = FAMILY_LEVEL / (3 * cfg.m) as f64;
    let z = norm_isf(level / 2.0);
    let ks_critical = ks_critical_value(level, n, n);
    Ok(cols
        .iter()
        .enumerate()
        .map(|(i, xs)| {
            let df = gram_diag_df(family, i + 1, cfg.k);
            let dff = df as f64;
            let direct: Vec<f64> = (0..cfg.draws).map(|_| chi_square(dff, &mut direct_rng)).collect();
            let (mu, var) = (mean(xs), variance(xs));
            let mean_se = (2.0 * dff / n).sqrt();
            // Var(s^2) for a chi-square: (mu4 - sigma^4) / n = (8 df^2 + 48 df) / n
            let variance_se = ((8.0 * dff * dff + 48.0 * dff) / n).sqrt();
            let ks = ks_two_sample(xs, &direct);
            RowCheck {
                i: i + 1,
                df,
                mean: mu,
                mean_se,
                variance: var,
                variance_se,
                ks,
                ks_critical,
                z,
                pass: (mu - dff).abs() < z * mean_se && (var - 2.0 * dff).abs() < z * variance_se && ks < ks_critical,
            }
        })
        .collect())
}

pub fn execute(cfg: &PriorCheckConfig, dir: &Path) -> CliResult<RunOutput> {
    let mut out = RunOutput::default();
    let rows = check(cfg)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.i.to_string(),
                r.df.to_string(),
                r.mean.to_string(),
                r.mean_se.to_string(),
                r.variance.to_string(),
                r.variance_se.to_string(),
                r.ks.to_string(),
                r.ks_critical.to_string(),
                r.pass.to_string(),
            ]
        })
        .collect();
    write_table_csv(
        &dir.join("prior_check.csv"),
        &["i", "df", "mean", "mean_se", "variance", "variance_se", "ks", "ks_critical", "pass"],
        &table,
    )?;
    write_json(&dir.join("prior_check.json"), &rows)?;
    out.outputs.extend(["prior_check.csv".to_string(), "prior_check.json".to_string()]);
    if let Some(r) = rows.first() {
        println!(
            "family level {FAMILY_LEVEL}: moments within {:.2} SE, KS below {:.4}",
            r.z, r.ks_critical
        );
    }
    println!("{:>3} {:>3} {:>9} {:>9} {:>7} pass", "i", "df", "mean", "variance", "ks");
    for r in &rows {
        println!("{:>3} {:>3} {:>9} {:>9} {:>7} {}", r.i, r.df, fmt4(r.mean), fmt4(r.variance), fmt4(r.ks), r.pass);
    }
    let failed: Vec<usize> = rows.iter().filter(|r| !r.pass).map(|r| r.i).collect();
    if !failed.is_empty() {
        out.failure = Some(CliError::CheckFailed(format!("rows {failed:?} disagree with the chi-square law")));
    }
    Ok(out)
}
