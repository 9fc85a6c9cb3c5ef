//! Empirical marginal models.
//!
//! The empirical CDF is `rank(x) / (n + 1)`, so every Gaussianized value is
//! finite; ties get midranks. The quantile map comes in two flavors: the
//! generalized inverse (a step function, used for exact inversion of
//! training data) and a piecewise-linear interpolation between order
//! statistics (used when synthesizing values never seen in training).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfn::{std_normal_cdf, std_normal_quantile};

/// Sorted copy of one training column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MarginalModel {
    sorted: Vec<f64>,
}

impl TryFrom<Vec<f64>> for MarginalModel {
    type Error = Error;

    fn try_from(sorted: Vec<f64>) -> Result<Self> {
        Self::from_sorted(sorted)
    }
}

impl From<MarginalModel> for Vec<f64> {
    fn from(m: MarginalModel) -> Self {
        m.sorted
    }
}

impl MarginalModel {
    /// Fits the empirical marginal of `column`. The input is not modified.
    pub fn fit(column: &[f64]) -> Result<Self> {
        let mut sorted = column.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self::from_sorted(sorted)
    }

    /// Wraps an already sorted sample, checking the invariants.
    pub fn from_sorted(sorted: Vec<f64>) -> Result<Self> {
        if sorted.len() < 2 {
            return Err(Error::Input(format!(
                "marginal model needs at least 2 values, got {}",
                sorted.len()
            )));
        }
        if let Some(i) = sorted.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "non-finite value {} at position {i}",
                sorted[i]
            )));
        }
        if sorted.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Input("marginal values are not sorted".into()));
        }
        Ok(Self { sorted })
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    /// Midrank of `x` among the stored values; 0 below the minimum.
    fn rank(&self, x: f64) -> f64 {
        let below = self.sorted.partition_point(|&v| v < x);
        let upto = below + self.sorted[below..].partition_point(|&v| v <= x);
        if upto > below {
            below as f64 + (upto - below + 1) as f64 / 2.0
        } else {
            upto as f64
        }
    }

    /// Empirical CDF `rank(x) / (n + 1)`; values below the sample minimum map
    /// to `0.5 / (n + 1)` instead of zero.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.rank(x).max(0.5) / (self.n() + 1) as f64
    }

    /// Quantile at level `u ∈ (0, 1)`.
    ///
    /// Step mode is the generalized inverse `inf{x : ecdf(x) >= u}`, clamped
    /// to the sample maximum. Interpolated mode places order statistic
    /// `x_(k)` at level `k / (n + 1)` and interpolates linearly between them,
    /// holding the extremes constant outside `[1/(n+1), n/(n+1)]`.
    pub fn quantile(&self, u: f64, interpolate: bool) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("quantile needs u in (0, 1), got {u}")));
        }
        Ok(if interpolate {
            self.interpolated_quantile(u)
        } else {
            self.step_quantile_by(|x| self.ecdf(x) >= u)
        })
    }

    fn step_quantile_by(&self, reached: impl Fn(f64) -> bool) -> f64 {
        let j = self.sorted.partition_point(|&v| !reached(v));
        self.sorted[j.min(self.n() - 1)]
    }

    fn interpolated_quantile(&self, u: f64) -> f64 {
        let n = self.n();
        let pos = u * (n + 1) as f64;
        if pos <= 1.0 {
            return self.sorted[0];
        }
        if pos >= n as f64 {
            return self.sorted[n - 1];
        }
        let k = pos.floor() as usize;
        let frac = pos - k as f64;
        let lo = self.sorted[k - 1];
        let hi = self.sorted[k];
        lo + frac * (hi - lo)
    }

    /// `Φ^{-1}(ecdf(x))`.
    pub fn gaussianize(&self, x: f64) -> f64 {
        std_normal_quantile(self.ecdf(x)).expect("ecdf is strictly inside (0, 1)")
    }

    /// `quantile(Φ(z))`.
    ///
    /// In step mode the search runs in the Gaussian domain,
    /// `inf{x : gaussianize(x) >= z}`, which is the same set as
    /// `inf{x : ecdf(x) >= Φ(z)}` but avoids the rounding of `Φ`, so training
    /// values are recovered bit for bit.
    pub fn inverse_gaussianize(&self, z: f64, interpolate: bool) -> f64 {
        if interpolate {
            let u = std_normal_cdf(z);
            if u <= 0.0 {
                return self.min();
            }
            if u >= 1.0 {
                return self.max();
            }
            self.interpolated_quantile(u)
        } else {
            self.step_quantile_by(|x| self.gaussianize(x) >= z)
        }
    }

    /// Gaussianizes a whole column. For a column with distinct values this is
    /// a permutation of `{Φ^{-1}(k/(n+1)) : k = 1..n}`.
    pub fn gaussianize_all(&self, column: &[f64]) -> Vec<f64> {
        column.iter().map(|&x| self.gaussianize(x)).collect()
    }
}

/// Fits one marginal per column.
pub fn fit_marginals(data: &crate::DataMatrix) -> Result<Vec<MarginalModel>> {
    data.columns()
        .enumerate()
        .map(|(c, col)| {
            MarginalModel::fit(col).map_err(|e| match e {
                Error::Input(m) => Error::Input(format!("column {c}: {m}")),
                other => other,
            })
        })
        .collect()
}

/// The exact value `Φ^{-1}(k / (n + 1))` produced for rank `k`.
pub fn gaussian_score(k: usize, n: usize) -> f64 {
    std_normal_quantile(k as f64 / (n + 1) as f64).expect("score level inside (0, 1)")
}
