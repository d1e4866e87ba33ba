//! Pooling nonlinearities and the CDF / moment summaries of one-dimensional
//! projection laws.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A pointwise nonlinearity `η` applied to projection values before
/// group averaging.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Nonlinearity {
    /// Heaviside step `H(b − a)` with `H(0) = 1`.
    Threshold {
        b: f64,
    },
    /// `1 / (1 + exp(−slope·(b − a)))`.
    Sigmoid {
        b: f64,
        slope: f64,
    },
    /// `|a|^r`.
    AbsPower {
        r: u32,
    },
    Identity,
}

impl Nonlinearity {
    #[inline]
    pub fn apply(&self, a: f64) -> f64 {
        match *self {
            Nonlinearity::Threshold { b } => {
                if a <= b {
                    1.0
                } else {
                    0.0
                }
            }
            Nonlinearity::Sigmoid { b, slope } => 1.0 / (1.0 + libm::exp(-slope * (b - a))),
            Nonlinearity::AbsPower { r } => libm::pow(libm::fabs(a), r as f64),
            Nonlinearity::Identity => a,
        }
    }

    /// Group average `(1/N) Σ η(v)` over a projection multiset, summed in
    /// the order given.
    pub fn average(&self, values: &[f64]) -> Result<f64> {
        if values.is_empty() {
            return Err(Error::Empty("projection set"));
        }
        Ok(values.iter().map(|&v| self.apply(v)).sum::<f64>() / values.len() as f64)
    }
}

/// Strictly increasing thresholds `b_1 < … < b_B`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BinGrid {
    thresholds: Vec<f64>,
}

impl BinGrid {
    pub const DEFAULT_BINS: usize = 32;

    pub fn new(thresholds: Vec<f64>) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::Empty("bin grid"));
        }
        if thresholds.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidParameter(
                "bin thresholds must be finite".into(),
            ));
        }
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "bin thresholds must be strictly increasing".into(),
            ));
        }
        Ok(Self { thresholds })
    }

    /// `bins` evenly spaced thresholds covering `[−range, range]`
    /// (a single bin sits at 0).
    pub fn uniform(bins: usize, range: f64) -> Result<Self> {
        if bins == 0 {
            return Err(Error::Empty("bin grid"));
        }
        if !(range > 0.0 && range.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "grid range must be positive, got {range}"
            )));
        }
        if bins == 1 {
            return Self::new(alloc::vec![0.0]);
        }
        let step = 2.0 * range / (bins - 1) as f64;
        let mut thresholds: Vec<f64> = (0..bins).map(|j| -range + step * j as f64).collect();
        thresholds[bins - 1] = range;
        Self::new(thresholds)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    #[inline]
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }
}

impl Default for BinGrid {
    fn default() -> Self {
        Self::uniform(Self::DEFAULT_BINS, 1.0).expect("default grid is valid")
    }
}

/// `m_r = (1/N) Σ |v|^r` for `r = 1..=R`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MomentVector(pub Vec<f64>);

impl MomentVector {
    pub const DEFAULT_ORDER: usize = 6;

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Moment of order `r` (1-based).
    pub fn get(&self, r: usize) -> Option<f64> {
        r.checked_sub(1).and_then(|i| self.0.get(i).copied())
    }
}

/// Empirical CDF of `values` sampled on `grid`: entry `j` is the fraction of
/// values `≤ b_j`. Accepts values in any order.
pub fn cdf_vector(values: &[f64], grid: &BinGrid) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::Empty("projection set"));
    }
    let n = values.len() as f64;
    Ok(grid
        .thresholds()
        .iter()
        .map(|&b| values.iter().filter(|&&v| v <= b).count() as f64 / n)
        .collect())
}

/// [`cdf_vector`] for values already sorted ascending (binary search per
/// threshold).
pub fn cdf_vector_sorted(sorted: &[f64], grid: &BinGrid) -> Result<Vec<f64>> {
    if sorted.is_empty() {
        return Err(Error::Empty("projection set"));
    }
    debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
    let n = sorted.len() as f64;
    Ok(grid
        .thresholds()
        .iter()
        .map(|&b| sorted.partition_point(|&v| v <= b) as f64 / n)
        .collect())
}

/// Group-averaged smooth step `(1/N) Σ σ_s(b_j − v)` for every threshold.
pub fn sigmoid_vector(values: &[f64], grid: &BinGrid, slope: f64) -> Result<Vec<f64>> {
    grid.thresholds()
        .iter()
        .map(|&b| Nonlinearity::Sigmoid { b, slope }.average(values))
        .collect()
}

/// Truncated absolute-moment vector of a projection multiset.
pub fn moment_vector(values: &[f64], order: usize) -> Result<MomentVector> {
    if order == 0 {
        return Err(Error::InvalidParameter(
            "moment order must be at least 1".into(),
        ));
    }
    if values.is_empty() {
        return Err(Error::Empty("projection set"));
    }
    let n = values.len() as f64;
    let mut sums = alloc::vec![0.0; order];
    for &v in values {
        let a = libm::fabs(v);
        let mut p = 1.0;
        for s in sums.iter_mut() {
            p *= a;
            *s += p;
        }
    }
    Ok(MomentVector(sums.into_iter().map(|s| s / n).collect()))
}
