//! Simulation truth, permutations and the built-in `paper-sim-1` fixture.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

use crate::dataset::Dataset;
use crate::dist::standard_normal;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::chain_rng;

/// Name under which the built-in fixture is addressable.
pub const PAPER_SIM_1: &str = "paper-sim-1";

/// Loadings of the built-in 15-variable, 3-factor simulation.
pub const SIM1_BETA0: [[f64; 3]; 15] = [
    [0.97, 0.0, 0.0],
    [0.04, 0.90, 0.0],
    [1.00, -1.12, 0.57],
    [2.03, 0.42, 0.57],
    [0.31, 0.47, 0.09],
    [0.43, -0.21, -0.35],
    [0.75, 0.31, 0.68],
    [0.45, -0.48, -1.50],
    [-2.21, 1.45, 0.38],
    [1.98, -0.30, 0.96],
    [-2.63, 0.41, 1.09],
    [-0.72, 1.39, 0.97],
    [-0.88, 2.01, -0.39],
    [-0.53, 0.04, 0.59],
    [-0.95, 1.39, 0.37],
];

/// Raw uniquenesses of the fixture. Entry 9 is negative and is replaced by its
/// absolute value in [`paper_sim_1`].
pub const SIM1_OMEGA0_RAW: [f64; 15] = [
    0.17, 0.05, 0.02, 0.02, 0.05, 0.06, 0.04, 0.67, -0.04, 0.21, 0.10, 0.09, 0.21, 0.51, 0.03,
];

/// The fixture reordering, 1-based: variable `i` moves to `SIM1_PI[i-1]`.
pub const SIM1_PI: [usize; 15] = [10, 14, 13, 15, 12, 6, 7, 2, 11, 9, 8, 3, 5, 1, 4];

/// True loadings and uniquenesses for simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTruth {
    beta0: Matrix,
    omega0: Vec<f64>,
}

impl SimTruth {
    pub fn new(beta0: Matrix, omega0: Vec<f64>) -> Result<Self> {
        if omega0.len() != beta0.rows() {
            return Err(Error::DimensionMismatch {
                what: "truth uniquenesses vs loading rows",
                expected: (beta0.rows(), 1),
                got: (omega0.len(), 1),
            });
        }
        if beta0.cols() == 0 {
            return Err(Error::InvalidTruth("loading matrix has no columns".into()));
        }
        if let Some((i, w)) = omega0.iter().enumerate().find(|(_, w)| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidTruth(format!("uniqueness {} is {w}", i + 1)));
        }
        Ok(SimTruth { beta0, omega0 })
    }

    pub fn m(&self) -> usize {
        self.beta0.rows()
    }

    pub fn k(&self) -> usize {
        self.beta0.cols()
    }

    pub fn beta0(&self) -> &Matrix {
        &self.beta0
    }

    pub fn omega0(&self) -> &[f64] {
        &self.omega0
    }

    /// `Omega0 + beta0 beta0'`.
    pub fn sigma0(&self) -> Matrix {
        let mut s = self.beta0.matmul_t(&self.beta0);
        for (i, w) in self.omega0.iter().enumerate() {
            s[(i, i)] += w;
        }
        s
    }

    /// The truth with variable `i` relabelled as `pi(i)`.
    pub fn permuted(&self, pi: &Permutation) -> Result<SimTruth> {
        pi.check_len(self.m())?;
        let mut beta = Matrix::zeros(self.m(), self.k());
        let mut omega = vec![0.0; self.m()];
        for i in 0..self.m() {
            let j = pi.apply(i);
            beta.row_mut(j).copy_from_slice(self.beta0.row(i));
            omega[j] = self.omega0[i];
        }
        SimTruth::new(beta, omega)
    }
}

/// A named fixture and the substitutions made while loading it.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub truth: SimTruth,
    pub pi: Permutation,
    pub n: usize,
    pub warnings: Vec<String>,
}

/// The built-in 15-variable simulation. The raw uniqueness of variable 9 is
/// negative; its absolute value is used and a warning is returned.
pub fn paper_sim_1() -> Fixture {
    let mut warnings = Vec::new();
    let omega: Vec<f64> = SIM1_OMEGA0_RAW
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            if w < 0.0 {
                warnings.push(format!(
                    "uniqueness of variable {} is given as {w}, which is not a variance; using {}",
                    i + 1,
                    -w
                ));
            }
            w.abs()
        })
        .collect();
    let beta = Matrix::from_rows(&SIM1_BETA0).expect("fixture is finite");
    Fixture {
        truth: SimTruth::new(beta, omega).expect("fixture is valid after substitution"),
        pi: Permutation::paper_pi(),
        n: 30,
        warnings,
    }
}

pub fn fixture_by_name(name: &str) -> Result<Fixture> {
    match name {
        PAPER_SIM_1 => Ok(paper_sim_1()),
        other => Err(Error::InvalidConfig(format!("unknown fixture '{other}'"))),
    }
}

/// A bijection on variable indices, stored 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let m = map.len();
        let mut seen = vec![false; m];
        for &j in &map {
            if j >= m || seen[j] {
                return Err(Error::InvalidConfig(format!("{map:?} is not a permutation of 0..{m}")));
            }
            seen[j] = true;
        }
        Ok(Permutation { map })
    }

    pub fn from_one_based(map: &[usize]) -> Result<Self> {
        if map.contains(&0) {
            return Err(Error::InvalidConfig("1-based permutation contains 0".into()));
        }
        Permutation::new(map.iter().map(|j| j - 1).collect())
    }

    pub fn identity(m: usize) -> Self {
        Permutation { map: (0..m).collect() }
    }

    pub fn paper_pi() -> Self {
        Permutation::from_one_based(&SIM1_PI).expect("fixture is a bijection")
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Image of the 0-based index `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (i, &j) in self.map.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { map: inv }
    }

    pub fn as_one_based(&self) -> Vec<usize> {
        self.map.iter().map(|j| j + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &j)| i == j)
    }

    fn check_len(&self, m: usize) -> Result<()> {
        if self.len() != m {
            return Err(Error::DimensionMismatch {
                what: "permutation length",
                expected: (m, 1),
                got: (self.len(), 1),
            });
        }
        Ok(())
    }
}

/// `Y^pi` with column `pi(i)` equal to column `i` of `Y`.
pub fn permute_columns(y: &Dataset, pi: &Permutation) -> Result<Dataset> {
    pi.check_len(y.m())?;
    let src = y.matrix();
    let mut out = Matrix::zeros(y.n(), y.m());
    for t in 0..y.n() {
        for i in 0..y.m() {
            out[(t, pi.apply(i))] = src[(t, i)];
        }
    }
    Dataset::new(out)
}

/// `n` observations of `y = beta0 f + e`, `f ~ N_k(0, I)`, `e ~ N_m(0, Omega0)`.
///
/// Each observation draws its `k` factors and then its `m` errors in
/// variable order.
pub fn simulate_dataset(truth: &SimTruth, n: usize, seed: u64) -> Result<Dataset> {
    let (m, k) = (truth.m(), truth.k());
    let mut rng = chain_rng(seed, 0);
    let sd: Vec<f64> = truth.omega0.iter().map(|w| num_traits::Float::sqrt(*w)).collect();
    let mut y = Matrix::zeros(n, m);
    let mut f = vec![0.0; k];
    for t in 0..n {
        for v in f.iter_mut() {
            *v = standard_normal(&mut rng);
        }
        for i in 0..m {
            let signal: f64 = truth.beta0.row(i).iter().zip(&f).map(|(b, x)| b * x).sum();
            y[(t, i)] = signal + sd[i] * standard_normal(&mut rng);
        }
    }
    Dataset::new(y)
}
