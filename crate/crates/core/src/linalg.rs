//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::data::DataMatrix;
use crate::error::{Error, Result};

/// Lower Cholesky factor `L` with `L Lᵀ = a`.
///
/// Fails on the first non-positive pivot; the error carries its index.
pub fn cholesky(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = a.nrows();
    if a.ncols() != p {
        return Err(Error::Dimension(format!(
            "cholesky needs a square matrix, got {}x{}",
            p,
            a.ncols()
        )));
    }
    let mut l = DMatrix::<f64>::zeros(p, p);
    for i in 0..p {
        for j in 0..=i {
            let mut sum = a[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if !(sum > 0.0) {
                    return Err(Error::Decomposition {
                        pivot: i,
                        value: sum,
                    });
                }
                l[(i, i)] = sum.sqrt();
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Ok(l)
}

pub fn column_means(data: &DataMatrix) -> Vec<f64> {
    let n = data.nrows() as f64;
    data.columns().map(|c| c.iter().sum::<f64>() / n).collect()
}

/// Maximum-likelihood covariance (divisor `n`).
pub fn covariance(data: &DataMatrix, mean: &[f64]) -> DMatrix<f64> {
    let n = data.nrows();
    let p = data.ncols();
    let centered: Vec<Vec<f64>> = (0..p)
        .map(|c| data.column(c).iter().map(|v| v - mean[c]).collect())
        .collect();
    let mut cov = DMatrix::<f64>::zeros(p, p);
    for i in 0..p {
        for j in 0..=i {
            let s: f64 = centered[i]
                .iter()
                .zip(&centered[j])
                .map(|(a, b)| a * b)
                .sum();
            cov[(i, j)] = s / n as f64;
            cov[(j, i)] = cov[(i, j)];
        }
    }
    cov
}

/// Pearson correlation matrix of the columns.
pub fn correlation(data: &DataMatrix) -> Result<DMatrix<f64>> {
    let mean = column_means(data);
    let cov = covariance(data, &mean);
    let p = cov.nrows();
    let sd: Vec<f64> = (0..p).map(|i| cov[(i, i)].sqrt()).collect();
    if let Some(i) = sd.iter().position(|s| !(*s > 0.0)) {
        return Err(Error::Input(format!("column {i} is constant")));
    }
    Ok(DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            1.0
        } else {
            cov[(i, j)] / (sd[i] * sd[j])
        }
    }))
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted in
/// descending order; eigenvectors are the matching columns.
pub fn symmetric_eigen_desc(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(a.clone());
    let p = a.nrows();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(p, p, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Symmetric inverse square root `a^{-1/2}` of a symmetric positive definite
/// matrix.
pub fn inverse_sqrt_spd(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (values, vectors) = symmetric_eigen_desc(a);
    let largest = values.first().copied().unwrap_or(0.0);
    let smallest = values.last().copied().unwrap_or(0.0);
    if !(smallest > largest.abs() * 1e-12) || !smallest.is_finite() {
        return Err(Error::Fit(format!(
            "covariance is singular (eigenvalues {largest:e} .. {smallest:e})"
        )));
    }
    let scale = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        values.len(),
        values.iter().map(|v| 1.0 / v.sqrt()),
    ));
    Ok(&vectors * scale * vectors.transpose())
}

/// Affine whitening `x -> W (x - mean)` with `W = Σ^{-1/2}` symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct Whitening {
    pub mean: Vec<f64>,
    pub transform: DMatrix<f64>,
}

impl Whitening {
    pub fn fit(data: &DataMatrix) -> Result<Self> {
        let mean = column_means(data);
        let cov = covariance(data, &mean);
        Self::from_moments(mean, &cov)
    }

    pub fn from_moments(mean: Vec<f64>, cov: &DMatrix<f64>) -> Result<Self> {
        Ok(Self {
            mean,
            transform: inverse_sqrt_spd(cov)?,
        })
    }

    pub fn apply(&self, data: &DataMatrix) -> Result<DataMatrix> {
        let p = self.mean.len();
        if data.ncols() != p {
            return Err(Error::Dimension(format!(
                "whitening expects {p} columns, got {}",
                data.ncols()
            )));
        }
        Ok(apply_linear(data, &self.transform, Some(&self.mean)))
    }
}

/// Row-wise `y = m (x - shift)`.
pub fn apply_linear(data: &DataMatrix, m: &DMatrix<f64>, shift: Option<&[f64]>) -> DataMatrix {
    let n = data.nrows();
    let p_in = data.ncols();
    let p_out = m.nrows();
    let mut out = DataMatrix::zeros(n, p_out);
    let centered: Vec<Vec<f64>> = (0..p_in)
        .map(|c| match shift {
            Some(s) => data.column(c).iter().map(|v| v - s[c]).collect(),
            None => data.column(c).to_vec(),
        })
        .collect();
    for o in 0..p_out {
        let col = out.column_mut(o);
        for (k, src) in centered.iter().enumerate() {
            let w = m[(o, k)];
            if w == 0.0 {
                continue;
            }
            for (dst, s) in col.iter_mut().zip(src) {
                *dst += w * s;
            }
        }
    }
    out
}
