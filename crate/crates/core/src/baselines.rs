//! Reference Gaussianizations: Box-Cox (BCG), radial (RG) and rotation-based
//! iterative Gaussianization (RBIG).

use nalgebra::DMatrix;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::linalg::{apply_linear, cholesky, column_means, covariance, inverse_sqrt_spd, symmetric_eigen_desc, Whitening};
use crate::marginal::{fit_marginals, MarginalModel};
use crate::specfn::{chi_quantile, DegreesOfFreedom};

pub const LAMBDA_MIN: f64 = -2.0;
pub const LAMBDA_MAX: f64 = 2.0;
pub const DEFAULT_BCG_SWEEPS: usize = 30;
pub const DEFAULT_RBIG_ITERS: usize = 50;

/// Classic Box-Cox `(u^λ - 1)/λ`, `ln u` at `λ = 0`.
pub fn box_cox(u: f64, lambda: f64) -> Result<f64> {
    if !(u > 0.0) {
        return Err(Error::Domain(format!("Box-Cox needs u > 0, got {u}")));
    }
    let l = u.ln();
    Ok(if lambda == 0.0 { l } else { (lambda * l).exp_m1() / lambda })
}

/// Manly's exponential transform `(e^{λu} - 1)/λ`, identity at `λ = 0`.
pub fn manly(u: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        u
    } else {
        (lambda * u).exp_m1() / lambda
    }
}

/// Box-Cox of the location-scale adjusted value `(u - α)/β`.
pub fn generalized_box_cox(u: f64, alpha: f64, beta: f64, lambda: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("generalized Box-Cox needs beta > 0, got {beta}")));
    }
    if !(u > alpha) {
        return Err(Error::Domain(format!("generalized Box-Cox needs u > alpha, got {u} <= {alpha}")));
    }
    box_cox((u - alpha) / beta, lambda)
}

/// Arcsinh-Box-Cox: `sinh(t g)/t` for `t > 0`, `g` for `t = 0` and
/// `arcsinh(t g)` for `t < 0`, where `g` is the classic Box-Cox value.
/// The negative branch carries no `1/t` factor.
pub fn arcsinh_box_cox(u: f64, lambda: f64, t: f64) -> Result<f64> {
    let g = box_cox(u, lambda)?;
    Ok(if t > 0.0 {
        (t * g).sinh() / t
    } else if t == 0.0 {
        g
    } else {
        (t * g).asinh()
    })
}

/// Fitted Box-Cox Gaussianization.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxCoxParams {
    pub lambda: Vec<f64>,
    /// Added to each column before transforming.
    pub shift: Vec<f64>,
    pub mu: Vec<f64>,
    /// Maximum-likelihood covariance of the transformed columns.
    pub sigma: DMatrix<f64>,
    pub converged: bool,
    pub sweeps: usize,
}

/// `-min + range·1e-3` for columns with a non-positive value, else 0.
fn positivity_shift(col: &[f64]) -> f64 {
    let (lo, hi) = col
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if lo > 0.0 {
        0.0
    } else {
        -lo + (hi - lo) * 1e-3
    }
}

fn transform_column(logs: &[f64], lambda: f64) -> Vec<f64> {
    if lambda == 0.0 {
        logs.to_vec()
    } else {
        logs.iter().map(|l| (lambda * l).exp_m1() / lambda).collect()
    }
}

struct Profile {
    n: usize,
    logs: Vec<Vec<f64>>,
    log_sums: Vec<f64>,
    columns: Vec<Vec<f64>>,
}

impl Profile {
    fn log_likelihood(&self, lambda: &[f64]) -> f64 {
        let data = DataMatrix::from_columns(self.columns.clone()).expect("consistent columns");
        let cov = covariance(&data, &column_means(&data));
        let Ok(l) = cholesky(&cov) else {
            return f64::NEG_INFINITY;
        };
        let log_det: f64 = 2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let jac: f64 = lambda.iter().zip(&self.log_sums).map(|(lam, s)| (lam - 1.0) * s).sum();
        let v = -(self.n as f64) / 2.0 * log_det + jac;
        if v.is_finite() {
            v
        } else {
            f64::NEG_INFINITY
        }
    }

    fn at(&mut self, lambda: &mut [f64], i: usize, value: f64) -> f64 {
        lambda[i] = value;
        self.columns[i] = transform_column(&self.logs[i], value);
        self.log_likelihood(lambda)
    }
}

fn shifted_logs(data: &DataMatrix, shift: &[f64]) -> Result<Vec<Vec<f64>>> {
    data.columns()
        .zip(shift)
        .enumerate()
        .map(|(c, (col, s))| {
            col.iter()
                .enumerate()
                .map(|(r, v)| {
                    let x = v + s;
                    if x > 0.0 {
                        Ok(x.ln())
                    } else {
                        Err(Error::Domain(format!(
                            "row {r}, column {c}: shifted value {x} is not positive"
                        )))
                    }
                })
                .collect()
        })
        .collect()
}

/// Profile log-likelihood `-n/2 ln|Σ̂(λ)| + Σ_i (λ_i - 1) Σ_l ln x_li` of the
/// (already shifted) data.
pub fn bcg_log_likelihood(data: &DataMatrix, shift: &[f64], lambda: &[f64]) -> Result<f64> {
    let logs = shifted_logs(data, shift)?;
    let log_sums = logs.iter().map(|c| c.iter().sum()).collect();
    let columns = logs.iter().zip(lambda).map(|(l, &lam)| transform_column(l, lam)).collect();
    Ok(Profile { n: data.nrows(), logs, log_sums, columns }.log_likelihood(lambda))
}

/// Fits per-column Box-Cox exponents in `[-2, 2]` by coordinate-wise
/// golden-section search on the profile likelihood, for at most `max_sweeps`
/// sweeps over the columns.
pub fn fit_bcg(data: &DataMatrix, max_sweeps: usize) -> Result<BoxCoxParams> {
    let (n, p) = (data.nrows(), data.ncols());
    if p == 0 || n <= p {
        return Err(Error::Input(format!("BCG needs n > p >= 1, got n={n}, p={p}")));
    }
    data.ensure_finite()?;
    let shift: Vec<f64> = data.columns().map(positivity_shift).collect();
    let logs = shifted_logs(data, &shift).map_err(|e| Error::Fit(e.to_string()))?;
    let log_sums = logs.iter().map(|c| c.iter().sum()).collect();
    let mut lambda = vec![1.0; p];
    let columns = logs.iter().map(|l| transform_column(l, 1.0)).collect();
    let mut prof = Profile { n, logs, log_sums, columns };

    const TOL: f64 = 1e-7;
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < max_sweeps {
        sweeps += 1;
        let mut moved: f64 = 0.0;
        for i in 0..p {
            let old = lambda[i];
            let (mut a, mut b) = (LAMBDA_MIN, LAMBDA_MAX);
            let mut c = b - ratio * (b - a);
            let mut d = a + ratio * (b - a);
            let mut fc = prof.at(&mut lambda, i, c);
            let mut fd = prof.at(&mut lambda, i, d);
            while b - a > TOL {
                if fc >= fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - ratio * (b - a);
                    fc = prof.at(&mut lambda, i, c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + ratio * (b - a);
                    fd = prof.at(&mut lambda, i, d);
                }
            }
            let mut best = (0.5 * (a + b), f64::NEG_INFINITY);
            for cand in [0.5 * (a + b), old, LAMBDA_MIN, LAMBDA_MAX] {
                let f = prof.at(&mut lambda, i, cand);
                if f > best.1 {
                    best = (cand, f);
                }
            }
            prof.at(&mut lambda, i, best.0);
            moved = moved.max((best.0 - old).abs());
        }
        if moved < 1e-6 {
            converged = true;
            break;
        }
    }

    let g = DataMatrix::from_columns(prof.columns)?;
    let mu = column_means(&g);
    let sigma = covariance(&g, &mu);
    cholesky(&sigma).map_err(|e| Error::Fit(format!("degenerate transformed covariance: {e}")))?;
    Ok(BoxCoxParams { lambda, shift, mu, sigma, converged, sweeps })
}

impl BoxCoxParams {
    /// Parameters for fixed exponents: positivity shifts and moments are
    /// estimated from `data`.
    pub fn from_lambda(data: &DataMatrix, lambda: &[f64]) -> Result<Self> {
        if lambda.len() != data.ncols() {
            return Err(Error::Dimension(format!(
                "{} exponents for {} columns",
                lambda.len(),
                data.ncols()
            )));
        }
        data.ensure_finite()?;
        let shift: Vec<f64> = data.columns().map(positivity_shift).collect();
        let logs = shifted_logs(data, &shift)?;
        let g = DataMatrix::from_columns(
            logs.iter().zip(lambda).map(|(l, &lam)| transform_column(l, lam)).collect(),
        )?;
        let mu = column_means(&g);
        let sigma = covariance(&g, &mu);
        Ok(Self { lambda: lambda.to_vec(), shift, mu, sigma, converged: true, sweeps: 0 })
    }
}

/// `Σ^{-1/2} (g(x + shift) - μ)` row by row.
pub fn bcg_transform(params: &BoxCoxParams, data: &DataMatrix) -> Result<DataMatrix> {
    let p = params.lambda.len();
    if data.ncols() != p {
        return Err(Error::Dimension(format!("BCG fitted on {p} columns, data has {}", data.ncols())));
    }
    let logs = shifted_logs(data, &params.shift)?;
    let g = DataMatrix::from_columns(
        logs.iter().zip(&params.lambda).map(|(l, &lam)| transform_column(l, lam)).collect(),
    )?;
    let w = inverse_sqrt_spd(&params.sigma)?;
    Ok(apply_linear(&g, &w, Some(&params.mu)))
}

/// Radial Gaussianization: whiten, then rescale every row so its radius
/// follows the chi distribution with `p` degrees of freedom.
pub fn radial_gaussianize(data: &DataMatrix) -> Result<DataMatrix> {
    let (n, p) = (data.nrows(), data.ncols());
    if p == 0 || n <= p {
        return Err(Error::Input(format!("RG needs n > p >= 1, got n={n}, p={p}")));
    }
    data.ensure_finite()?;
    let mut y = Whitening::fit(data)?.apply(data)?;
    let radii: Vec<f64> = (0..n)
        .map(|r| (0..p).map(|c| y.get(r, c).powi(2)).sum::<f64>().sqrt())
        .collect();
    let ecdf = MarginalModel::fit(&radii)?;
    let dof = DegreesOfFreedom::try_from(p)?;
    for (r, &rad) in radii.iter().enumerate() {
        let scale = if rad > 0.0 { chi_quantile(ecdf.ecdf(rad), dof)? / rad } else { 0.0 };
        for c in 0..p {
            y.set(r, c, y.get(r, c) * scale);
        }
    }
    Ok(y)
}

/// One RBIG iteration: marginal Gaussianization followed by a rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct RbigStage {
    pub marginals: Vec<MarginalModel>,
    /// Orthogonal; rows are principal axes.
    pub rotation: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RbigModel {
    pub stages: Vec<RbigStage>,
}

impl RbigModel {
    pub fn iter_count(&self) -> usize {
        self.stages.len()
    }

    fn dim(&self) -> usize {
        self.stages.first().map_or(0, |s| s.marginals.len())
    }

    /// Applies the fitted stages to new data.
    pub fn transform(&self, data: &DataMatrix) -> Result<DataMatrix> {
        if data.ncols() != self.dim() {
            return Err(Error::Dimension(format!(
                "RBIG fitted on {} columns, data has {}",
                self.dim(),
                data.ncols()
            )));
        }
        let mut x = data.clone();
        for st in &self.stages {
            let g = DataMatrix::from_columns(
                st.marginals.iter().zip(x.columns()).map(|(m, c)| m.gaussianize_all(c)).collect(),
            )?;
            x = apply_linear(&g, &st.rotation, None);
        }
        Ok(x)
    }

    /// Maps Gaussian-domain rows back through the stages, using interpolated
    /// marginal quantiles.
    pub fn inverse(&self, z: &DataMatrix) -> Result<DataMatrix> {
        if z.ncols() != self.dim() {
            return Err(Error::Dimension(format!(
                "RBIG fitted on {} columns, data has {}",
                self.dim(),
                z.ncols()
            )));
        }
        let mut x = z.clone();
        for st in self.stages.iter().rev() {
            let g = apply_linear(&x, &st.rotation.transpose(), None);
            x = DataMatrix::from_columns(
                st.marginals
                    .iter()
                    .zip(g.columns())
                    .map(|(m, c)| c.iter().map(|&v| m.inverse_gaussianize(v, true)).collect())
                    .collect(),
            )?;
        }
        Ok(x)
    }
}

/// Principal axes as rows, each flipped so its largest-magnitude entry is
/// positive.
fn pca_rotation(g: &DataMatrix, iteration: usize) -> Result<DMatrix<f64>> {
    let cov = covariance(g, &column_means(g));
    let (values, mut vectors) = symmetric_eigen_desc(&cov);
    let top = values[0];
    let bottom = values[values.len() - 1];
    if !(bottom > top.abs() * 1e-12) {
        return Err(Error::Fit(format!(
            "RBIG iteration {iteration}: degenerate covariance (smallest eigenvalue {bottom:e})"
        )));
    }
    for mut col in vectors.column_iter_mut() {
        let lead = col.iter().copied().fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
        if lead < 0.0 {
            col.neg_mut();
        }
    }
    Ok(vectors.transpose())
}

/// Runs `max_iters` rounds of marginal Gaussianization and PCA rotation.
pub fn rbig(data: &DataMatrix, max_iters: usize) -> Result<(DataMatrix, RbigModel)> {
    let (n, p) = (data.nrows(), data.ncols());
    if p == 0 || n <= p {
        return Err(Error::Input(format!("RBIG needs n > p >= 1, got n={n}, p={p}")));
    }
    data.ensure_finite()?;
    let mut x = data.clone();
    let mut stages = Vec::with_capacity(max_iters);
    for it in 0..max_iters {
        let marginals = fit_marginals(&x)?;
        let g = DataMatrix::from_columns(
            marginals.iter().zip(x.columns()).map(|(m, c)| m.gaussianize_all(c)).collect(),
        )?;
        let rotation = pca_rotation(&g, it)?;
        x = apply_linear(&g, &rotation, None);
        stages.push(RbigStage { marginals, rotation });
    }
    Ok((x, RbigModel { stages }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluate::{max_abs_cross_correlation, royston_mvn_test, shapiro_wilk};
    use crate::marginal::gaussian_score;
    use crate::sampling::{make_case_dataset, sample_std_normal, CaseSpec};
    use proptest::prelude::*;

    fn exp_column(n: usize, seed: u64) -> DataMatrix {
        let z = sample_std_normal(n, 1, seed);
        DataMatrix::from_columns(vec![z.column(0).iter().map(|v| v.exp()).collect()]).unwrap()
    }

    #[test]
    fn transform_reference_values() {
        assert_eq!(box_cox(3.5, 1.0).unwrap(), 2.5);
        assert!((box_cox(std::f64::consts::E, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((box_cox(4.0, 0.5).unwrap() - 2.0).abs() < 1e-15);
        assert!((box_cox(2.0, 1e-10).unwrap() - 2f64.ln()).abs() < 1e-9);
        assert!(box_cox(0.0, 1.0).is_err());
        assert_eq!(manly(2.5, 0.0), 2.5);
        assert_eq!(manly(0.0, 0.7), 0.0);
        assert!((manly(1.0, 1.0) - (std::f64::consts::E - 1.0)).abs() < 1e-15);
        assert_eq!(generalized_box_cox(3.0, 1.0, 2.0, 0.0).unwrap(), 0.0);
        assert!((generalized_box_cox(5.0, 1.0, 2.0, 2.0).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(generalized_box_cox(2.0, 0.0, 1.0, 0.3).unwrap(), box_cox(2.0, 0.3).unwrap());
        assert!(generalized_box_cox(1.0, 1.0, 2.0, 0.0).is_err());
        assert!(generalized_box_cox(3.0, 1.0, 0.0, 0.0).is_err());
        assert_eq!(arcsinh_box_cox(2.0, 0.4, 0.0).unwrap(), box_cox(2.0, 0.4).unwrap());
        for t in [-1.5, 0.0, 2.0] {
            assert_eq!(arcsinh_box_cox(1.0, 0.7, t).unwrap(), 0.0);
        }
        assert!((arcsinh_box_cox(2.0, 1.0, 1.0).unwrap() - 1f64.sinh()).abs() < 1e-15);
        assert!((arcsinh_box_cox(2.0, 1.0, -1.0).unwrap() - (-1f64).asinh()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn box_cox_is_increasing(a in 1e-3f64..50.0, b in 1e-3f64..50.0, lambda in -2.0f64..2.0) {
            prop_assume!(a < b);
            prop_assert!(box_cox(a, lambda).unwrap() < box_cox(b, lambda).unwrap());
        }
    }

    #[test]
    fn bcg_recovers_log_transform() {
        let data = exp_column(5000, 1);
        let fit = fit_bcg(&data, DEFAULT_BCG_SWEEPS).unwrap();
        assert!(fit.lambda[0].abs() < 0.15, "lambda {}", fit.lambda[0]);
        assert!(fit.converged);
        assert_eq!(fit.shift, vec![0.0]);
        // argmax against a grid oracle
        let best = bcg_log_likelihood(&data, &fit.shift, &fit.lambda).unwrap();
        for k in -20..=20 {
            let l = k as f64 / 10.0;
            assert!(best >= bcg_log_likelihood(&data, &fit.shift, &[l]).unwrap() - 1e-9);
        }
    }

    #[test]
    fn bcg_keeps_normal_data_near_identity() {
        let z = sample_std_normal(2000, 1, 2);
        let data = DataMatrix::from_columns(vec![z.column(0).iter().map(|v| v + 10.0).collect()]).unwrap();
        let fit = fit_bcg(&data, DEFAULT_BCG_SWEEPS).unwrap();
        assert!((0.7..=1.3).contains(&fit.lambda[0]), "lambda {}", fit.lambda[0]);
        let shifted = fit_bcg(&z, DEFAULT_BCG_SWEEPS).unwrap();
        assert!(shifted.shift[0] > 0.0);
        assert!(shifted.lambda.iter().all(|l| (LAMBDA_MIN..=LAMBDA_MAX).contains(l)));
    }

    #[test]
    fn bcg_whitens() {
        let data = make_case_dataset(&CaseSpec::new(2, 1000, 3, 3)).unwrap();
        let fit = fit_bcg(&data, DEFAULT_BCG_SWEEPS).unwrap();
        let out = bcg_transform(&fit, &data).unwrap();
        let cov = covariance(&out, &column_means(&out));
        let bound = 5.0 / 1000f64.sqrt();
        for i in 0..3 {
            for j in 0..3 {
                let t = if i == j { 1.0 } else { 0.0 };
                assert!((cov[(i, j)] - t).abs() < bound);
            }
        }
        let again = Whitening::fit(&out).unwrap().apply(&out).unwrap();
        for c in 0..3 {
            for (a, b) in out.column(c).iter().zip(again.column(c)) {
                assert!((a - b).abs() < 1e-8);
            }
        }
        let bad = DataMatrix::from_columns(vec![vec![-1e9; 3], vec![1.0; 3], vec![1.0; 3]]).unwrap();
        assert!(bcg_transform(&fit, &bad).is_err());
    }

    #[test]
    fn bcg_log_fixes_lognormal() {
        let mut passes = 0;
        for seed in 0..20 {
            let data = exp_column(300, 100 + seed);
            let params = BoxCoxParams::from_lambda(&data, &[0.0]).unwrap();
            let out = bcg_transform(&params, &data).unwrap();
            if shapiro_wilk(out.column(0)).unwrap().pvalue > 0.01 {
                passes += 1;
            }
        }
        assert!(passes >= 19, "{passes}/20");
    }

    #[test]
    fn radial_on_gaussian_data() {
        let data = sample_std_normal(5000, 2, 7);
        let out = radial_gaussianize(&data).unwrap();
        let white = Whitening::fit(&data).unwrap().apply(&data).unwrap();
        let mut rel = 0.0;
        let mut pairs = Vec::new();
        for r in 0..5000 {
            let w = white.row(r);
            let o = out.row(r);
            let rw = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            let ro = o.iter().map(|v| v * v).sum::<f64>().sqrt();
            rel += (ro / rw - 1.0).abs();
            // nonnegative multiple of the whitened row
            let k = ro / rw;
            for c in 0..2 {
                assert!((o[c] - k * w[c]).abs() < 1e-9 * (1.0 + w[c].abs()));
            }
            pairs.push((rw, ro));
        }
        assert!(rel / 5000.0 < 0.05, "mean relative change {}", rel / 5000.0);
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!(pairs.windows(2).all(|w| w[0].1 <= w[1].1));
    }

    #[test]
    fn radial_rejects_singular() {
        let d = DataMatrix::from_columns(vec![vec![1.0, 2.0, 3.0, 4.0], vec![2.0, 4.0, 6.0, 8.0]]).unwrap();
        assert!(radial_gaussianize(&d).is_err());
    }

    #[test]
    #[ignore = "on t-copula data with normal margins both methods usually pass and the ordering is a coin flip"]
    fn radial_beats_box_cox_on_elliptical_data() {
        let mut wins = 0;
        for seed in 0..50 {
            let data = make_case_dataset(&CaseSpec::new(3, 1000, 2, 500 + seed)).unwrap();
            let rg = royston_mvn_test(&radial_gaussianize(&data).unwrap()).unwrap().pvalue;
            let fit = fit_bcg(&data, DEFAULT_BCG_SWEEPS).unwrap();
            let bc = royston_mvn_test(&bcg_transform(&fit, &data).unwrap()).unwrap().pvalue;
            if rg > bc {
                wins += 1;
            }
        }
        assert!(wins > 25, "RG ahead in {wins}/50 seeds");
    }

    #[test]
    fn rbig_null_and_orthogonality() {
        let data = sample_std_normal(2000, 3, 11);
        let (out, model) = rbig(&data, 5).unwrap();
        assert_eq!(model.iter_count(), 5);
        assert!(max_abs_cross_correlation(&out).unwrap() < 3.0 / 2000f64.sqrt());
        for st in &model.stages {
            let rtr = st.rotation.transpose() * &st.rotation;
            assert!((rtr - DMatrix::<f64>::identity(3, 3)).amax() < 1e-10);
        }
        // the marginal step of every stage lands on the score grid
        let grid: Vec<f64> = (1..=2000).map(|k| gaussian_score(k, 2000)).collect();
        let mut x = data.clone();
        for st in &model.stages {
            let g: Vec<Vec<f64>> = st.marginals.iter().zip(x.columns()).map(|(m, c)| m.gaussianize_all(c)).collect();
            for col in &g {
                let mut s = col.clone();
                s.sort_by(f64::total_cmp);
                assert_eq!(s, grid);
            }
            x = apply_linear(&DataMatrix::from_columns(g).unwrap(), &st.rotation, None);
        }
        assert_eq!(x, out);
        assert_eq!(model.transform(&data).unwrap(), out);
    }

    #[test]
    fn rbig_inverse_approximately_recovers_training_data() {
        let data = make_case_dataset(&CaseSpec::new(1, 500, 2, 3)).unwrap();
        let (out, model) = rbig(&data, 10).unwrap();
        let back = model.inverse(&out).unwrap();
        let mut err = 0.0;
        for c in 0..2 {
            for (a, b) in back.column(c).iter().zip(data.column(c)) {
                err += (a - b).abs();
            }
        }
        assert!(err / 1000.0 < 0.1, "mean abs error {}", err / 1000.0);
    }

    #[test]
    fn rbig_case1_passes_royston() {
        let mut passes = 0;
        for seed in 0..50 {
            let data = make_case_dataset(&CaseSpec::new(1, 1000, 2, 900 + seed)).unwrap();
            let (out, _) = rbig(&data, 30).unwrap();
            if royston_mvn_test(&out).unwrap().pvalue > 0.01 {
                passes += 1;
            }
        }
        assert!(passes >= 45, "{passes}/50");
    }

    #[test]
    fn rbig_reports_degenerate_iteration() {
        let z = sample_std_normal(100, 1, 1);
        let d = DataMatrix::from_columns(vec![z.column(0).to_vec(), z.column(0).to_vec()]).unwrap();
        match rbig(&d, 3) {
            Err(Error::Fit(m)) => assert!(m.contains("iteration 0")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
