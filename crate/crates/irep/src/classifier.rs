//! Regularized least-squares binary classifier with ±1 labels.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `(w, b) = argmin ‖Xw + b − y‖² + λ‖w‖²`, decided by `sign(⟨w, x⟩ + b)`.
///
/// The intercept is not penalized: the system is solved on column-centered
/// features, so adding a constant to any feature leaves predictions intact.
#[derive(Debug, Clone, PartialEq)]
pub struct Rls {
    weights: DVector<f64>,
    bias: f64,
}

impl Rls {
    /// Fits on the rows of `x`. Solves the primal system when there are at
    /// least as many samples as features and the dual one otherwise.
    pub fn fit(x: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> Result<Self> {
        let (n, d) = x.shape();
        if n == 0 || d == 0 {
            return Err(Error::Numeric("empty training set".into()));
        }
        if y.len() != n {
            return Err(Error::Numeric(format!(
                "{n} samples but {} labels",
                y.len()
            )));
        }
        if lambda.is_nan() || lambda <= 0.0 {
            return Err(Error::Numeric(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        let x_mean = x.row_mean();
        let y_mean = y.mean();
        let mut xc = x.clone();
        for mut row in xc.row_iter_mut() {
            row -= &x_mean;
        }
        let yc = y.add_scalar(-y_mean);
        let weights = if n >= d {
            let mut a = xc.tr_mul(&xc);
            for i in 0..d {
                a[(i, i)] += lambda;
            }
            let chol = a
                .cholesky()
                .ok_or_else(|| Error::Numeric("primal system is not positive definite".into()))?;
            chol.solve(&xc.tr_mul(&yc))
        } else {
            let mut k = &xc * xc.transpose();
            for i in 0..n {
                k[(i, i)] += lambda;
            }
            let chol = k
                .cholesky()
                .ok_or_else(|| Error::Numeric("dual system is not positive definite".into()))?;
            xc.tr_mul(&chol.solve(&yc))
        };
        let bias = y_mean - (x_mean * &weights)[0];
        Ok(Self { weights, bias })
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn scores(&self, x: &DMatrix<f64>) -> DVector<f64> {
        (x * &self.weights).add_scalar(self.bias)
    }

    /// Fraction of rows whose predicted sign (ties to +1) matches `y`.
    pub fn accuracy(&self, x: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
        let s = self.scores(x);
        let hits = s
            .iter()
            .zip(y.iter())
            .filter(|(s, y)| (if **s >= 0.0 { 1.0 } else { -1.0 }) == **y)
            .count();
        hits as f64 / y.len() as f64
    }
}

/// Stacks feature rows into a matrix.
pub fn feature_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let d = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j])
}
