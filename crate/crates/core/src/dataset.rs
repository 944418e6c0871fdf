use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// An `n x m` observation matrix: one row per observation, one column per
/// observed variable. Observations are taken to be centered.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: Matrix,
}

impl Dataset {
    pub fn new(y: Matrix) -> Result<Self> {
        if y.cols() == 0 {
            return Err(Error::DimensionMismatch {
                what: "dataset needs at least one variable",
                expected: (y.rows(), 1),
                got: y.shape(),
            });
        }
        Ok(Dataset { y })
    }

    /// Number of observations.
    pub fn n(&self) -> usize {
        self.y.rows()
    }

    /// Number of observed variables.
    pub fn m(&self) -> usize {
        self.y.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.y
    }

    pub fn into_matrix(self) -> Matrix {
        self.y
    }

    /// `Y'Y / n`, the second-moment matrix about zero.
    pub fn second_moment(&self) -> Matrix {
        let n = self.n().max(1) as f64;
        self.y.t_matmul(&self.y).scale(1.0 / n)
    }
}
