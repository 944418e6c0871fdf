use std::path::{Path, PathBuf};

use factorgibbs_core::study::{
    compare_arms, fixture_by_name, prepare_arms, simulate_dataset, InvarianceConfig, InvarianceReport, MleFit,
    MleMethod,
};
use factorgibbs_core::{GibbsConfig, PriorSpec, StoreMode};
use serde::{Deserialize, Serialize};

use super::fit::{check_dims, draws_sidecar};
use super::{absolute, absolute_pi, default_fixture, known_fixture, load_permutation, resolve_chain, resolve_prior, RunOutput, DEFAULT_DATA_SEED};
use crate::cli::StudyArgs;
use crate::config::{pick, pick_opt, ConfigFile};
use crate::error::{CliError, CliResult};
use crate::io::{read_dataset_csv, write_dataset_csv, write_draws_csv, write_json, write_sidecar, write_table_csv};
use crate::parallel::run_arms;

pub const KEYS: &[&str] = &[
    "truth", "n", "data-seed", "pi", "k", "prior", "c0", "nu", "s2", "burn-in", "iters", "thin", "seed",
    "paper-scale", "alpha", "kde-points", "save-draws",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub data: Option<PathBuf>,
    pub truth: Option<String>,
    pub n: Option<usize>,
    pub data_seed: Option<u64>,
    pub pi: String,
    pub k: usize,
    pub prior: String,
    pub c0: f64,
    pub nu: f64,
    pub s2: f64,
    pub burn_in: u64,
    pub iterations: u64,
    pub thin: u64,
    pub seed: u64,
    pub alpha: f64,
    pub kde_points: usize,
    pub save_draws: bool,
}

impl StudyConfig {
    pub fn invariance(&self) -> CliResult<InvarianceConfig> {
        let gibbs = GibbsConfig {
            prior: PriorSpec::new(self.prior.parse()?, self.c0, self.nu, self.s2)?,
            burn_in: self.burn_in,
            iterations: self.iterations,
            thin: self.thin,
            seed: self.seed,
            chain: 0,
            store: StoreMode::SigmaDiag,
        };
        let cfg = InvarianceConfig {
            gibbs,
            k: self.k,
            alpha: self.alpha,
            kde_points: self.kde_points,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn resolve(a: &StudyArgs, file: &ConfigFile) -> CliResult<StudyConfig> {
    file.check_keys(KEYS)?;
    let prior = resolve_prior(&a.prior, file)?;
    let (burn_in, iterations, thin, seed) = resolve_chain(&a.chain, file)?;
    let (data, truth, n, data_seed) = match &a.data {
        Some(p) => (Some(absolute(p)?), None, None, None),
        None => {
            let t = pick(a.truth.clone(), file, "truth", default_fixture())?;
            known_fixture(&t)?;
            let n = pick(a.n, file, "n", fixture_by_name(&t)?.n)?;
            let s = pick(a.data_seed, file, "data-seed", DEFAULT_DATA_SEED)?;
            (None, Some(t), Some(n), Some(s))
        }
    };
    let cfg = StudyConfig {
        data,
        truth,
        n,
        data_seed,
        pi: absolute_pi(pick(a.pi.clone(), file, "pi", "paper-pi".to_string())?)?,
        k: pick(a.k, file, "k", 3)?,
        prior: prior.family.name().to_string(),
        c0: prior.c0,
        nu: prior.nu,
        s2: prior.s2,
        burn_in,
        iterations,
        thin,
        seed,
        alpha: pick(a.alpha, file, "alpha", 0.01)?,
        kde_points: pick(a.kde_points, file, "kde-points", 256)?,
        save_draws: a.save_draws || pick_opt::<bool>(None, file, "save-draws")?.unwrap_or(false),
    };
    cfg.invariance()?;
    Ok(cfg)
}

#[derive(Debug, Serialize)]
struct ReportJson<'a> {
    prior: &'a str,
    k: usize,
    alpha: f64,
    permutation: Vec<usize>,
    all_pass: bool,
    failures: Vec<usize>,
    draws_y: usize,
    draws_ypi: usize,
    init_y: &'static str,
    init_ypi: &'static str,
    checks: Vec<CheckJson>,
    warnings: &'a [String],
}

#[derive(Debug, Serialize)]
struct CheckJson {
    variable: usize,
    permuted_variable: usize,
    ks: f64,
    critical_value: f64,
    ess_y: f64,
    ess_ypi: f64,
    mean_y: f64,
    mean_ypi: f64,
    pass: bool,
}

fn init_name(fit: &MleFit) -> &'static str {
    match fit.method {
        MleMethod::Em => "mle-em",
        MleMethod::PrincipalAxis => "principal-axis",
    }
}

fn write_report(dir: &Path, cfg: &StudyConfig, perm: Vec<usize>, r: &InvarianceReport, inits: [&'static str; 2], warnings: &[String]) -> CliResult<Vec<String>> {
    let mut files = Vec::new();
    let json = ReportJson {
        prior: &cfg.prior,
        k: cfg.k,
        alpha: r.alpha,
        permutation: perm,
        all_pass: r.all_pass(),
        failures: r.failures(),
        draws_y: r.draws_y,
        draws_ypi: r.draws_ypi,
        init_y: inits[0],
        init_ypi: inits[1],
        checks: r
            .checks
            .iter()
            .map(|c| CheckJson {
                variable: c.variable,
                permuted_variable: c.permuted_variable,
                ks: c.ks,
                critical_value: c.critical_value,
                ess_y: c.ess_y,
                ess_ypi: c.ess_ypi,
                mean_y: c.mean_y,
                mean_ypi: c.mean_ypi,
                pass: c.pass,
            })
            .collect(),
        warnings,
    };
    write_json(&dir.join("report.json"), &json)?;
    files.push("report.json".to_string());
    for c in &r.curves {
        let name = format!("kde_v{}.csv", c.variable);
        let rows: Vec<Vec<String>> = (0..c.grid.len())
            .map(|g| vec![c.grid[g].to_string(), c.density_y[g].to_string(), c.density_ypi[g].to_string()])
            .collect();
        write_table_csv(&dir.join(&name), &["grid", "density_Y", "density_Ypi"], &rows)?;
        files.push(name);
    }
    Ok(files)
}

pub fn execute(cfg: &StudyConfig, dir: &Path) -> CliResult<RunOutput> {
    let mut out = RunOutput::default();
    let inv = cfg.invariance()?;
    let y = match (&cfg.data, &cfg.truth) {
        (Some(p), _) => {
            out.inputs.push(p.clone());
            read_dataset_csv(p)?
        }
        (None, Some(name)) => {
            let fx = fixture_by_name(name)?;
            for w in fx.warnings {
                out.warn(w);
            }
            let n = cfg.n.unwrap_or(fx.n);
            simulate_dataset(&fx.truth, n, cfg.data_seed.unwrap_or(DEFAULT_DATA_SEED))?
        }
        (None, None) => return Err(CliError::Config("invariance-study needs a dataset or --truth".into())),
    };
    check_dims(&y, cfg.k, "mle")?;
    let pi = load_permutation(&cfg.pi, y.m())?;
    let arms = prepare_arms(&y, &pi, &inv)?;
    for (label, fit) in [("Y", &arms.fit_y), ("Ypi", &arms.fit_ypi)] {
        if let Some(reason) = &fit.fallback_reason {
            out.warn(format!("{label} arm started from principal axes: {reason}"));
        }
    }
    write_dataset_csv(&dir.join("Y.csv"), &arms.y)?;
    write_dataset_csv(&dir.join("Ypi.csv"), &arms.ypi)?;
    out.outputs.extend(["Y.csv".to_string(), "Ypi.csv".to_string()]);

    let (a, b) = run_arms(&arms);
    let (store_y, store_ypi) = match (a, b) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return Err(CliError::Numerical(e.to_string())),
    };
    if cfg.save_draws {
        for (label, store, gibbs) in [("Y", &store_y, &arms.config_y), ("Ypi", &store_ypi, &arms.config_ypi)] {
            write_draws_csv(&dir.join(format!("draws_{label}.csv")), store)?;
            write_sidecar(&dir.join(format!("draws_{label}.meta")), &draws_sidecar(store, gibbs, &[("arm", label.to_string())]))?;
            out.outputs.extend([format!("draws_{label}.csv"), format!("draws_{label}.meta")]);
        }
    }
    let report = compare_arms(&store_y, &store_ypi, &pi, inv.alpha, inv.kde_points);
    for w in &report.warnings {
        out.warn(w.clone());
    }
    let rows: Vec<Vec<String>> = report
        .checks
        .iter()
        .map(|c| {
            vec![
                c.variable.to_string(),
                c.permuted_variable.to_string(),
                c.ks.to_string(),
                c.critical_value.to_string(),
                c.ess_y.to_string(),
                c.ess_ypi.to_string(),
                c.pass.to_string(),
            ]
        })
        .collect();
    write_table_csv(&dir.join("checks.csv"), &["variable", "permuted_variable", "ks", "critical_value", "ess_y", "ess_ypi", "pass"], &rows)?;
    out.outputs.push("checks.csv".into());
    let files = write_report(dir, cfg, pi.as_one_based(), &report, [init_name(&arms.fit_y), init_name(&arms.fit_ypi)], &out.warnings)?;
    out.outputs.extend(files);

    println!("{:>3} {:>4} {:>8} {:>8} {:>7} {:>7} pass", "i", "pi", "ks", "crit", "ess_Y", "ess_Ypi");
    for c in &report.checks {
        println!(
            "{:>3} {:>4} {:>8.4} {:>8.4} {:>7.0} {:>7.0} {}",
            c.variable, c.permuted_variable, c.ks, c.critical_value, c.ess_y, c.ess_ypi, c.pass
        );
    }
    if !report.all_pass() {
        out.failure = Some(CliError::CheckFailed(format!(
            "variables {:?} differ between Y and Y^pi at level {}",
            report.failures(),
            inv.alpha
        )));
    }
    Ok(out)
}
