//! Real-valued signals and the order-independent inner product used for all
//! orbit projections.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A data point: a finite real vector of fixed dimension.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Signal {
    values: Vec<f64>,
}

impl Signal {
    /// Wraps `values`, rejecting empty vectors and non-finite entries.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("signal"));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { values })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(alloc::vec![0.0; dim])
    }

    /// One-hot vector `e_index` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: index + 1,
            });
        }
        let mut values = alloc::vec![0.0; dim];
        values[index] = 1.0;
        Self::new(values)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(exact_dot(&self.values, &self.values))
    }

    /// Returns `self / ‖self‖`; the zero signal is returned unchanged.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            return self.clone();
        }
        Self {
            values: self.values.iter().map(|v| v / n).collect(),
        }
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        libm::fabs(self.norm() - 1.0) <= tol
    }

    pub fn dot(&self, other: &Signal) -> Result<f64> {
        self.check_dim(other.dim())?;
        Ok(exact_dot(&self.values, &other.values))
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * factor).collect())
    }

    /// Euclidean distance `‖self − other‖₂`.
    pub fn distance(&self, other: &Signal) -> Result<f64> {
        self.check_dim(other.dim())?;
        let diff: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(libm::sqrt(exact_dot(&diff, &diff)))
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

impl AsRef<[f64]> for Signal {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

pub(crate) fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0, |m, v| {
        if libm::fabs(*v) > m {
            libm::fabs(*v)
        } else {
            m
        }
    })
}

/// Inner product whose result depends only on the multiset of coordinate
/// pairs `(a_j, b_j)`, not on their order.
///
/// Each rounded product is mapped to a 128-bit fixed-point integer (scaled by
/// a power of two chosen from the order-free bound `d·max|a|·max|b|`) and the
/// integers are summed, so the accumulation is associative. Permuting both
/// arguments by the same permutation therefore yields a bit-identical value,
/// which makes group-averaged statistics exactly invariant. The absolute
/// error is below `d·max|a|·max|b|·2⁻¹²⁴` plus the final rounding.
pub fn exact_dot(a: &[f64], b: &[f64]) -> f64 {
    exact_dot_with_max(a, b, max_abs(a), max_abs(b))
}

/// [`exact_dot`] with `max|a|` and `max|b|` supplied by the caller, for
/// loops where one side is only ever permuted.
pub(crate) fn exact_dot_with_max(a: &[f64], b: &[f64], max_a: f64, max_b: f64) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let bound = a.len() as f64 * max_a * max_b;
    if bound == 0.0 || !bound.is_finite() {
        return a.iter().zip(b).map(|(x, y)| x * y).sum();
    }
    let (_, exp) = libm::frexp(bound);
    // bound < 2^exp, so scaled partial sums stay below 2^125.
    let shift = 125 - exp;
    let acc: i128 = if (-1000..=1000).contains(&shift) {
        let factor = libm::scalbn(1.0, shift);
        let (mut hi, mut lo) = (0i64, 0i128);
        for (x, y) in a.iter().zip(b) {
            let (h, l) = split_trunc((x * y) * factor);
            hi += h;
            lo += l as i128;
        }
        ((hi as i128) << 62) + lo
    } else {
        a.iter()
            .zip(b)
            .map(|(x, y)| libm::scalbn(x * y, shift) as i128)
            .sum()
    };
    libm::scalbn(acc as f64, -shift)
}

/// `trunc(v) = h·2⁶² + l` for `|v| < 2¹²⁶`, using only native 64-bit
/// conversions (`f64 as i128` is a slow library call).
#[inline(always)]
fn split_trunc(v: f64) -> (i64, i64) {
    const TWO_62: f64 = 4_611_686_018_427_387_904.0;
    let h = (v * (1.0 / TWO_62)) as i64;
    (h, (v - h as f64 * TWO_62) as i64)
}
