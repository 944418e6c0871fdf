//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! Run with `cargo test -p factorgibbs --test acceptance`.

#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use factorgibbs::parallel::run_arms;
use factorgibbs_core::ars::{build_envelope, default_abscissae, FamilyParams};
use factorgibbs_core::dist::positive_normal;
use factorgibbs_core::gibbs::{
    run_chain, sample_factors, sample_loading_row_head, sample_uniquenesses, GibbsConfig, StoreMode,
};
use factorgibbs_core::linalg::lq_decompose;
use factorgibbs_core::priors::sample_loadings_prior;
use factorgibbs_core::study::ess::mcse;
use factorgibbs_core::study::ks::{ks_critical_value, ks_critical_value_one_sample, ks_one_sample, ks_two_sample};
use factorgibbs_core::study::{
    compare_arms, mle_init, paper_sim_1, prepare_arms, simulate_dataset, InvarianceConfig, SimTruth,
};
use factorgibbs_core::{
    chain_rng, ChainRng, Dataset, LowerTriangular, Matrix, ModelDims, PriorFamily, PriorSpec, Uniquenesses,
};
use oracle::{family_moments, invert, linspace, row_gaussian, sample_mean, sample_var, tiny_posterior_means, GridCdf};
use rand_distr::{Distribution, StandardNormal};

const ALPHA: f64 = 0.01;

type Criterion = (&'static str, Duration, fn() -> Outcome);

/// Outcome of one criterion: pass flag and a one-line summary.
struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(failures: Vec<String>, checks: usize) -> Self {
        let pass = failures.is_empty();
        let detail = if pass {
            format!("{checks} checks")
        } else {
            format!("{} of {checks} checks failed: {}", failures.len(), failures.join("; "))
        };
        Outcome { pass, detail }
    }
}

/// Collects pass/fail results of the individual checks within a criterion.
#[derive(Default)]
struct Checks {
    count: usize,
    failures: Vec<String>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.count += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn within(&mut self, label: &str, got: f64, want: f64, se: f64, z: f64) {
        self.check((got - want).abs() <= z * se, || format!("{label}: {got:.5} vs {want:.5} (se {se:.2e})"));
    }

    fn ks_below(&mut self, label: &str, d: f64, crit: f64) {
        self.check(d < crit, || format!("{label}: KS {d:.5} >= {crit:.5}"));
    }

    fn finish(self) -> Outcome {
        Outcome::new(self.failures, self.count)
    }
}

fn normals(n: usize, rng: &mut ChainRng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

// 1 and 2 ---------------------------------------------------------------

const PRIOR_DRAWS: usize = 100_000;

/// `(beta beta')_ii / C0` for each row, over `PRIOR_DRAWS` prior draws.
fn gram_diagonals(family: PriorFamily, m: usize, k: usize, seed: u64) -> Vec<Vec<f64>> {
    let spec = PriorSpec::default_for(family);
    let dims = ModelDims::new(m, k, 1).unwrap();
    let mut rng = chain_rng(seed, 0);
    let mut out = vec![Vec::with_capacity(PRIOR_DRAWS); m];
    for _ in 0..PRIOR_DRAWS {
        let b = sample_loadings_prior(&spec, &dims, &mut rng);
        for (i, col) in out.iter_mut().enumerate() {
            col.push(b.row_head(i).iter().map(|x| x * x).sum::<f64>() / spec.c0);
        }
    }
    out
}

fn chi_square_moments(checks: &mut Checks, label: &str, xs: &[f64], df: f64) {
    let n = xs.len() as f64;
    checks.within(&format!("{label} mean"), sample_mean(xs), df, (2.0 * df / n).sqrt(), 3.0);
    // central fourth moment of chi-square(d) is 12 d (d + 4)
    let var_se = ((8.0 * df * df + 48.0 * df) / n).sqrt();
    checks.within(&format!("{label} variance"), sample_var(xs), 2.0 * df, var_se, 3.0);
}

fn standard_prior_chi_square() -> Outcome {
    let mut checks = Checks::default();
    for (k, seed) in [(3, 11), (6, 12)] {
        for (i, xs) in gram_diagonals(PriorFamily::Standard, 15, k, seed).iter().enumerate() {
            let df = (i + 1).min(k) as f64;
            chi_square_moments(&mut checks, &format!("k={k} i={}", i + 1), xs, df);
        }
    }
    checks.finish()
}

fn order_invariant_chi_square() -> Outcome {
    let mut checks = Checks::default();
    let crit = ks_critical_value(ALPHA, PRIOR_DRAWS as f64, PRIOR_DRAWS as f64);
    for (k, seed) in [(3, 21), (6, 22)] {
        let mut direct_rng = chain_rng(seed, 1);
        for (i, xs) in gram_diagonals(PriorFamily::OrderInvariant, 15, k, seed).iter().enumerate() {
            let label = format!("k={k} i={}", i + 1);
            chi_square_moments(&mut checks, &label, xs, k as f64);
            let direct: Vec<f64> = (0..PRIOR_DRAWS)
                .map(|_| normals(k, &mut direct_rng).iter().map(|z| z * z).sum())
                .collect();
            checks.ks_below(&label, ks_two_sample(xs, &direct), crit);
        }
    }
    checks.finish()
}

// 3 ---------------------------------------------------------------------

fn lq_matches_prior() -> Outcome {
    const N: usize = 100_000;
    let (m, k) = (5, 3);
    let mut rng = chain_rng(31, 0);
    let mut l_lq = vec![Vec::with_capacity(N); m * k];
    let mut q_lq = vec![Vec::with_capacity(N); k * k];
    for _ in 0..N {
        let b = Matrix::from_vec(m, k, normals(m * k, &mut rng)).unwrap();
        let (l, q) = lq_decompose(&b).unwrap();
        for (e, col) in l_lq.iter_mut().enumerate() {
            col.push(l.get(e / k, e % k));
        }
        for (e, col) in q_lq.iter_mut().enumerate() {
            col.push(q[(e / k, e % k)]);
        }
    }
    let spec = PriorSpec::default_for(PriorFamily::OrderInvariant);
    let dims = ModelDims::new(m, k, 1).unwrap();
    let mut prior_rng = chain_rng(31, 1);
    let mut l_prior = vec![Vec::with_capacity(N); m * k];
    for _ in 0..N {
        let l = sample_loadings_prior(&spec, &dims, &mut prior_rng);
        for (e, col) in l_prior.iter_mut().enumerate() {
            col.push(l.get(e / k, e % k));
        }
    }

    let mut checks = Checks::default();
    let crit = ks_critical_value(ALPHA, N as f64, N as f64);
    let entries: Vec<usize> = (0..m * k).filter(|e| e % k <= e / k).collect();
    for &e in &entries {
        checks.ks_below(&format!("L[{},{}]", e / k + 1, e % k + 1), ks_two_sample(&l_lq[e], &l_prior[e]), crit);
    }
    let se = 1.0 / (N as f64).sqrt();
    for &e in &entries {
        for (f, q) in q_lq.iter().enumerate() {
            let r = correlation(&l_lq[e], q);
            checks.within(&format!("corr(L[{},{}], Q[{},{}])", e / k + 1, e % k + 1, f / k + 1, f % k + 1), r, 0.0, se, 3.0);
        }
    }
    checks.finish()
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (sample_mean(a), sample_mean(b));
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

// 4 ---------------------------------------------------------------------

fn ars_exactness() -> Outcome {
    const N: usize = 1_000_000;
    let mut checks = Checks::default();
    let mut seed = 40;
    for alpha in 1..=6 {
        for gamma in [-2.0, 0.0, 0.5, 3.0] {
            seed += 1;
            let p = FamilyParams::new(alpha as f64, gamma).unwrap();
            let mut env = build_envelope(p, &default_abscissae(&p)).unwrap();
            let mut rng = chain_rng(seed, 0);
            let xs: Vec<f64> = (0..N).map(|_| env.sample(&mut rng)).collect();
            let (mean, var) = family_moments(alpha as f64, gamma);
            let label = format!("alpha={alpha} gamma={gamma}");
            let n = N as f64;
            checks.within(&format!("{label} mean"), sample_mean(&xs), mean, (var / n).sqrt(), 3.0);
            let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
            checks.within(&format!("{label} variance"), sample_var(&xs), var, ((m4 - var * var) / n).sqrt(), 3.0);
            if alpha == 1 {
                let ars: Vec<f64> = xs[..100_000].to_vec();
                let mut tn_rng = chain_rng(seed, 1);
                let tn: Vec<f64> =
                    (0..100_000).map(|_| positive_normal(gamma, std::f64::consts::FRAC_1_SQRT_2, &mut tn_rng)).collect();
                checks.ks_below(&format!("{label} vs truncated normal"), ks_two_sample(&ars, &tn), ks_critical_value(ALPHA, 1e5, 1e5));
            }
        }
    }
    checks.finish()
}

// 5 ---------------------------------------------------------------------

const COND_DRAWS: usize = 100_000;

fn fixed_factors(n: usize, k: usize) -> Matrix {
    Matrix::from_fn(n, k, |t, a| ((t as f64 + 1.0) * (a as f64 + 1.3)).sin() * 1.5)
}

fn full_conditionals() -> Outcome {
    let mut checks = Checks::default();

    // (a) diagonal of head row i = 2 with k = 3: density x^(k-i) N(.; mean, cov) on x > 0,
    // marginalized over the off-diagonal coordinate on a 2-D grid
    {
        let (n, k) = (12, 3);
        let f = fixed_factors(n, k);
        let rows: Vec<Vec<f64>> = (0..n).map(|t| f.row(t).to_vec()).collect();
        let y: Vec<f64> = (0..n).map(|t| (t as f64 * 1.1).sin() - 0.2).collect();
        let w = 0.6;
        let prior = PriorSpec::default_for(PriorFamily::OrderInvariant);
        let (mean, cov) = row_gaussian(&rows, &y, 2, w, prior.c0);
        let prec = invert(&cov);
        let g0 = linspace(mean[0] - 9.0 * cov[0][0].sqrt(), mean[0] + 9.0 * cov[0][0].sqrt(), 1200);
        let g1 = linspace(1e-12, mean[1].max(0.0) + 9.0 * cov[1][1].sqrt() + 3.0, 1200);
        let marginal: Vec<f64> = g1
            .iter()
            .map(|&b| {
                g0.iter()
                    .map(|&a| {
                        let (d0, d1) = (a - mean[0], b - mean[1]);
                        let q = prec[0][0] * d0 * d0 + 2.0 * prec[0][1] * d0 * d1 + prec[1][1] * d1 * d1;
                        b.powi((k - 2) as i32) * (-0.5 * q).exp()
                    })
                    .sum()
            })
            .collect();
        let cdf = GridCdf::new(g1, &marginal);
        let mut rng = chain_rng(51, 0);
        let xs: Vec<f64> = (0..COND_DRAWS)
            .map(|_| sample_loading_row_head(2, k, w, &f, &y, &prior, &mut rng).unwrap()[1])
            .collect();
        checks.ks_below("head-row diagonal", ks_one_sample(&xs, |x| cdf.eval(x)), ks_critical_value_one_sample(ALPHA, COND_DRAWS as f64));
    }

    // (b) inverse-gamma mean (nu s2 + d) / (nu + n - 2)
    {
        let n = 8;
        let f = fixed_factors(n, 2);
        let b = [[0.9, 0.0], [0.4, 1.1]];
        let beta = LowerTriangular::new(Matrix::from_rows(&b).unwrap()).unwrap();
        let y = Matrix::from_fn(n, 2, |t, i| (t as f64 * 0.7 + i as f64).cos());
        let data = Dataset::new(y.clone()).unwrap();
        let prior = PriorSpec::default_for(PriorFamily::OrderInvariant);
        let mut rng = chain_rng(52, 0);
        let draws: Vec<Vec<f64>> = (0..COND_DRAWS)
            .map(|_| sample_uniquenesses(&beta, &f, &data, &prior, &mut rng).as_slice().to_vec())
            .collect();
        for i in 0..2 {
            let d: f64 = (0..n)
                .map(|t| (y[(t, i)] - (0..=i).map(|a| b[i][a] * f[(t, a)]).sum::<f64>()).powi(2))
                .sum();
            let shape = (prior.nu + n as f64) / 2.0;
            let expected = (prior.nu * prior.s2 + d) / (prior.nu + n as f64 - 2.0);
            let sd = expected / (shape - 2.0).sqrt();
            let got = sample_mean(&draws.iter().map(|r| r[i]).collect::<Vec<_>>());
            checks.within(&format!("omega2_{} mean", i + 1), got, expected, sd / (COND_DRAWS as f64).sqrt(), 3.0);
        }
    }

    // (c) factor mean and covariance from (I + B' W^-1 B)^-1
    {
        let b = [[1.0, 0.0], [0.5, 0.8], [-0.3, 1.2]];
        let w = [0.5, 0.3, 0.8];
        let y = [1.0, -0.5, 2.0];
        let beta = LowerTriangular::new(Matrix::from_rows(&b).unwrap()).unwrap();
        let omega = Uniquenesses::new(w.to_vec()).unwrap();
        let data = Dataset::new(Matrix::from_rows(&[y]).unwrap()).unwrap();
        let prec: Vec<Vec<f64>> = (0..2)
            .map(|a| {
                (0..2)
                    .map(|c| (0..3).map(|i| b[i][a] * b[i][c] / w[i]).sum::<f64>() + if a == c { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        let v = invert(&prec);
        let lin: Vec<f64> = (0..2).map(|a| (0..3).map(|i| b[i][a] * y[i] / w[i]).sum()).collect();
        let mean: Vec<f64> = (0..2).map(|a| v[a][0] * lin[0] + v[a][1] * lin[1]).collect();
        let mut rng = chain_rng(53, 0);
        let draws: Vec<[f64; 2]> = (0..COND_DRAWS)
            .map(|_| {
                let f = sample_factors(&beta, &omega, &data, &mut rng).unwrap();
                [f[(0, 0)], f[(0, 1)]]
            })
            .collect();
        let n = COND_DRAWS as f64;
        let emp: Vec<f64> = (0..2).map(|a| draws.iter().map(|d| d[a]).sum::<f64>() / n).collect();
        for a in 0..2 {
            checks.within(&format!("factor mean {}", a + 1), emp[a], mean[a], (v[a][a] / n).sqrt(), 3.0);
            for c in a..2 {
                let cov = draws.iter().map(|d| (d[a] - emp[a]) * (d[c] - emp[c])).sum::<f64>() / (n - 1.0);
                let se = ((v[a][a] * v[c][c] + v[a][c] * v[a][c]) / n).sqrt();
                checks.within(&format!("factor cov {}{}", a + 1, c + 1), cov, v[a][c], se, 3.0);
            }
        }
    }
    checks.finish()
}

// 6 ---------------------------------------------------------------------

fn tiny_posterior() -> Outcome {
    let truth = SimTruth::new(Matrix::from_rows(&[[0.9], [0.6]]).unwrap(), vec![0.4, 0.5]).unwrap();
    let n = 20;
    let y = simulate_dataset(&truth, n, 61).unwrap();
    let prior = PriorSpec::default_for(PriorFamily::OrderInvariant);
    let ym = y.matrix();
    let mut s = [[0.0; 2]; 2];
    for (i, row) in s.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..n).map(|t| ym[(t, i)] * ym[(t, j)]).sum::<f64>() / n as f64;
        }
    }
    let want = tiny_posterior_means(s, n, prior.c0, prior.nu, prior.s2, 64);

    let mut cfg = GibbsConfig::new(prior, 5_000, 400_000, 62);
    cfg.store = StoreMode::BetaOmega;
    let store = run_chain(&y, &cfg, mle_init(&y, 1).unwrap()).unwrap();
    let mut checks = Checks::default();
    for (c, name) in ["beta_1_1", "beta_2_1", "omega2_1", "omega2_2"].iter().enumerate() {
        let xs = store.column_by_name(name).unwrap();
        checks.within(name, sample_mean(&xs), want[c], mcse(&xs), 3.0);
    }
    checks.finish()
}

// 7 ---------------------------------------------------------------------

/// Variables (1-based) whose invariance check fails at desk scale.
fn desk_scale_failures(family: PriorFamily, k: usize) -> Vec<usize> {
    let fx = paper_sim_1();
    let y = simulate_dataset(&fx.truth, fx.n, 7).unwrap();
    let gibbs = GibbsConfig::new(PriorSpec::default_for(family), 2_000, 50_000, 1);
    let cfg = InvarianceConfig::new(gibbs, k);
    let arms = prepare_arms(&y, &fx.pi, &cfg).unwrap();
    let (a, b) = run_arms(&arms);
    let report = compare_arms(&a.unwrap(), &b.unwrap(), &fx.pi, cfg.alpha, 16);
    report.failures()
}

fn desk_scale_replication() -> Outcome {
    let mut checks = Checks::default();
    for k in [3, 6] {
        let failed = desk_scale_failures(PriorFamily::OrderInvariant, k);
        checks.check(failed.is_empty(), || format!("order-invariant k={k} failed variables {failed:?}"));
    }
    let failed = desk_scale_failures(PriorFamily::Standard, 6);
    checks.check(!failed.is_empty(), || "standard k=6 showed no differences".to_string());
    let mut out = checks.finish();
    if out.pass {
        out.detail = format!("{}; standard k=6 fails on variables {failed:?}", out.detail);
    }
    out
}

// 8 ---------------------------------------------------------------------

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_factorgibbs"))
        .env_remove("FACTORGIBBS_SEED")
        .args(args)
        .output()
        .unwrap()
}

fn differing_files(a: &Path, b: &Path) -> Vec<String> {
    let mut out = Vec::new();
    for entry in fs::read_dir(a).unwrap() {
        let name = entry.unwrap().file_name();
        if name == "manifest.json" {
            continue;
        }
        if fs::read(a.join(&name)).ok() != fs::read(b.join(&name)).ok() {
            out.push(name.to_string_lossy().into_owned());
        }
    }
    out
}

fn replay_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let p = |name: &str| d.join(name).to_str().unwrap().to_string();
    let data = d.join("sim").join("Y.csv");
    let data = data.to_str().unwrap();
    let runs: Vec<(&str, Vec<String>)> = vec![
        ("sim", ["simulate", "--truth", "paper-sim-1", "--n", "30", "--permute", "paper-pi"].map(String::from).to_vec()),
        ("fit", ["fit", data, "--k", "3", "--burn-in", "100", "--iters", "2000", "--store", "beta-omega"].map(String::from).to_vec()),
        ("pc", ["prior-check", "--prior", "standard", "--k", "6", "--draws", "5000"].map(String::from).to_vec()),
        ("study", ["invariance-study", "--k", "3", "--burn-in", "100", "--iters", "2000", "--save-draws"].map(String::from).to_vec()),
    ];
    let mut checks = Checks::default();
    for (name, mut args) in runs {
        args.extend(["--out".to_string(), p(name)]);
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = cli(&args);
        let replay = cli(&["replay", &format!("{}/manifest.json", p(name)), "--out", &p(&format!("{name}-replay"))]);
        checks.check(first.status.code() == replay.status.code(), || format!("{name}: exit codes differ"));
        let diff = differing_files(&d.join(name), &d.join(format!("{name}-replay")));
        checks.check(diff.is_empty(), || format!("{name}: {diff:?} differ"));
    }
    checks.finish()
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 chi-square identity, standard prior", Duration::from_secs(10), standard_prior_chi_square),
        ("2 chi-square identity, order-invariant prior", Duration::from_secs(10), order_invariant_chi_square),
        ("3 LQ of Gaussian matrices matches the order-invariant prior", Duration::from_secs(60), lq_matches_prior),
        ("4 ARS exactness", Duration::from_secs(120), ars_exactness),
        ("5 full-conditional oracles", Duration::from_secs(60), full_conditionals),
        ("6 tiny-instance posterior oracle", Duration::from_secs(120), tiny_posterior),
        ("7 invariance study at desk scale", Duration::from_secs(600), desk_scale_replication),
        ("8 replay determinism", Duration::from_secs(600), replay_determinism),
    ];
    let mut all = true;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let mut out = run();
        let elapsed = start.elapsed();
        if elapsed > limit {
            out.pass = false;
            out.detail = format!("{}; runtime over {} s", out.detail, limit.as_secs());
        }
        all &= out.pass;
        let tag = if out.pass { "PASS" } else { "FAIL" };
        println!("{tag} {name} ({:.1} s): {}", elapsed.as_secs_f64(), out.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
