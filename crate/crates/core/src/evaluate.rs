//! Goodness-of-fit measures: kernel density estimates, Kullback-Leibler
//! divergence to N(0, I), the Shapiro-Wilk and Royston normality tests, and a
//! few dependence statistics used by the experiments.

use rand::Rng;
use serde::Serialize;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, correlation};
use crate::sampling::stream;
use crate::specfn::{chi_square_sf, std_normal_cdf, std_normal_pdf, std_normal_quantile, DegreesOfFreedom};

/// Smallest value returned by [`KdeModel::pdf`].
pub const PDF_FLOOR: f64 = 1e-300;
pub const DEFAULT_KLD_BOX: f64 = 5.0;
pub const DEFAULT_KLD_POINTS: usize = 1000;

/// Product-Gaussian kernel density estimate with Scott-type bandwidths
/// `h_i = 1.06 σ̂_i n^{-1/(p+4)}`.
#[derive(Debug, Clone)]
pub struct KdeModel {
    n: usize,
    p: usize,
    /// Row-major sample, each coordinate divided by its bandwidth.
    scaled: Vec<f64>,
    bandwidths: Vec<f64>,
    norm: f64,
}

impl KdeModel {
    pub fn fit(sample: &DataMatrix) -> Result<Self> {
        let n = sample.nrows();
        let p = sample.ncols();
        if n < 2 || p == 0 {
            return Err(Error::Input(format!("KDE needs n >= 2 and p >= 1, got {n}x{p}")));
        }
        sample.ensure_finite()?;
        let factor = 1.06 * (n as f64).powf(-1.0 / (p as f64 + 4.0));
        let mut bandwidths = Vec::with_capacity(p);
        for (c, col) in sample.columns().enumerate() {
            let m = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            if !(var > 0.0) {
                return Err(Error::Input(format!("KDE: column {c} has zero variance")));
            }
            bandwidths.push(factor * var.sqrt());
        }
        let mut scaled = vec![0.0; n * p];
        for c in 0..p {
            for (r, v) in sample.column(c).iter().enumerate() {
                scaled[r * p + c] = v / bandwidths[c];
            }
        }
        let h_prod: f64 = bandwidths.iter().product();
        let norm = 1.0 / (n as f64 * (2.0 * std::f64::consts::PI).powf(p as f64 / 2.0) * h_prod);
        Ok(Self { n, p, scaled, bandwidths, norm })
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.bandwidths
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    /// Density at `x`, floored at [`PDF_FLOOR`].
    pub fn pdf(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.p {
            return Err(Error::Dimension(format!(
                "KDE has dimension {}, point has {}",
                self.p,
                x.len()
            )));
        }
        let xs: Vec<f64> = x.iter().zip(&self.bandwidths).map(|(v, h)| v / h).collect();
        let mut sum = 0.0;
        for row in self.scaled.chunks_exact(self.p) {
            let d2: f64 = row.iter().zip(&xs).map(|(a, b)| (a - b) * (a - b)).sum();
            sum += (-0.5 * d2).exp();
        }
        Ok((sum * self.norm).max(PDF_FLOOR))
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

pub fn kde_fit(sample: &DataMatrix) -> Result<KdeModel> {
    KdeModel::fit(sample)
}

pub fn kde_pdf(model: &KdeModel, x: &[f64]) -> Result<f64> {
    model.pdf(x)
}

fn std_normal_density(x: &[f64]) -> f64 {
    x.iter().map(|&v| std_normal_pdf(v)).product()
}

/// Monte Carlo estimate of `∫ φ log(φ / q)` over the box `[-b, b]^p` using
/// `n_eval` uniform points, where `φ` is the standard normal density and `q`
/// is supplied by the caller.
pub fn kld_with_density(
    density: impl Fn(&[f64]) -> Result<f64>,
    p: usize,
    n_eval: usize,
    b: f64,
    seed: u64,
) -> Result<f64> {
    if p == 0 || n_eval == 0 || !(b > 0.0 && b.is_finite()) {
        return Err(Error::Input(format!(
            "KLD needs p >= 1, n_eval >= 1 and a positive box, got p={p}, n_eval={n_eval}, b={b}"
        )));
    }
    let mut rng = stream(seed);
    let mut x = vec![0.0; p];
    let mut acc = 0.0;
    for _ in 0..n_eval {
        for v in x.iter_mut() {
            *v = rng.random_range(-b..b);
        }
        let phi = std_normal_density(&x);
        let q = density(&x)?.max(PDF_FLOOR);
        if phi > 0.0 {
            acc += phi * (phi.ln() - q.ln());
        }
    }
    let volume = (2.0 * b).powi(p as i32);
    Ok(volume * acc / n_eval as f64)
}

/// KL divergence from N(0, I) to the KDE of `sample`.
pub fn kld_vs_standard_normal(sample: &DataMatrix, n_eval: usize, b: f64, seed: u64) -> Result<f64> {
    let kde = KdeModel::fit(sample)?;
    kld_with_density(|x| kde.pdf(x), sample.ncols(), n_eval, b, seed)
}

/// Result of a normality test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestResult {
    pub statistic: f64,
    pub pvalue: f64,
}

const SW_SMALL: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
const SW_LARGE: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
const SW_G: [f64; 2] = [-2.273, 0.459];
const SW_C3: [f64; 4] = [0.544, -0.39978, 0.025054, -0.0006714];
const SW_C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
const SW_C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
const SW_C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

/// Shapiro-Wilk coefficients for the upper half of the order statistics.
fn sw_coefficients(n: usize) -> Vec<f64> {
    let half = n / 2;
    let mut a = vec![0.0; half];
    if n == 3 {
        a[0] = std::f64::consts::FRAC_1_SQRT_2;
        return a;
    }
    let an = n as f64;
    let m: Vec<f64> = (1..=half)
        .map(|i| {
            let q = (i as f64 - 0.375) / (an + 0.25);
            std_normal_quantile(q).expect("plotting position in (0, 1)")
        })
        .collect();
    let summ2: f64 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / an.sqrt();
    let a1 = poly(&SW_SMALL, rsn) - m[0] / ssumm2;
    if n > 5 {
        let a2 = -m[1] / ssumm2 + poly(&SW_LARGE, rsn);
        let fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1])
            / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
            .sqrt();
        a[0] = a1;
        a[1] = a2;
        for i in 2..half {
            a[i] = -m[i] / fac;
        }
    } else {
        let fac = ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt();
        a[0] = a1;
        for i in 1..half {
            a[i] = -m[i] / fac;
        }
    }
    a
}

/// Normal score of the W statistic from `w1 = 1 - W`: large values mean
/// departure from normality. Returns `+inf` beyond the small-sample bound.
fn sw_normal_score(w1: f64, n: usize) -> f64 {
    let an = n as f64;
    let y = w1.max(f64::MIN_POSITIVE).ln();
    if n <= 11 {
        let gamma = poly(&SW_G, an);
        if y >= gamma {
            return f64::INFINITY;
        }
        let y = -(gamma - y).ln();
        (y - poly(&SW_C3, an)) / poly(&SW_C4, an).exp()
    } else {
        let x = an.ln();
        (y - poly(&SW_C5, x)) / poly(&SW_C6, x).exp()
    }
}

/// W as the squared correlation between the data and the coefficients.
/// Returns `(W, 1 - W)` with the complement computed without cancellation.
fn sw_statistic(sample: &[f64]) -> Result<(f64, f64)> {
    let n = sample.len();
    if !(3..=5000).contains(&n) {
        return Err(Error::Test(format!("Shapiro-Wilk needs 3 <= n <= 5000, got {n}")));
    }
    if let Some(i) = sample.iter().position(|v| !v.is_finite()) {
        return Err(Error::Test(format!("non-finite value at position {i}")));
    }
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let range = x[n - 1] - x[0];
    if !(range > 0.0) {
        return Err(Error::Test("Shapiro-Wilk: sample has zero range".into()));
    }
    let a = sw_coefficients(n);
    let half = n / 2;
    let full: Vec<f64> = (0..n)
        .map(|i| {
            if i < half {
                -a[i]
            } else if i >= n - half {
                a[n - 1 - i]
            } else {
                0.0
            }
        })
        .collect();
    let an = n as f64;
    let sa = full.iter().sum::<f64>() / an;
    let sx = x.iter().map(|v| v / range).sum::<f64>() / an;
    let (mut ssa, mut ssx, mut sax) = (0.0, 0.0, 0.0);
    for (ai, xi) in full.iter().zip(&x) {
        let da = ai - sa;
        let dx = xi / range - sx;
        ssa += da * da;
        ssx += dx * dx;
        sax += da * dx;
    }
    let root = (ssa * ssx).sqrt();
    let w1 = ((root - sax) * (root + sax) / (ssa * ssx)).max(0.0);
    Ok((1.0 - w1, w1))
}

/// Shapiro-Wilk W test for univariate normality (3 ≤ n ≤ 5000).
pub fn shapiro_wilk(sample: &[f64]) -> Result<TestResult> {
    let n = sample.len();
    let (w, w1) = sw_statistic(sample)?;
    let pvalue = if n == 3 {
        let stqr = std::f64::consts::FRAC_PI_3;
        let pi6 = 6.0 / std::f64::consts::PI;
        (pi6 * (w.sqrt().asin() - stqr)).clamp(0.0, 1.0)
    } else {
        let z = sw_normal_score(w1, n);
        if z.is_infinite() {
            0.0
        } else {
            1.0 - std_normal_cdf(z)
        }
    };
    Ok(TestResult { statistic: w, pvalue })
}

/// Royston's H test for multivariate normality (4 ≤ n ≤ 5000, p ≥ 2).
///
/// Each column's Shapiro-Wilk statistic is turned into a chi-square(1)
/// variate, and their mean is rescaled by an equivalent degrees-of-freedom
/// estimate built from the correlation matrix.
pub fn royston_mvn_test(sample: &DataMatrix) -> Result<TestResult> {
    let n = sample.nrows();
    let p = sample.ncols();
    if !(4..=5000).contains(&n) || p < 2 {
        return Err(Error::Test(format!(
            "Royston test needs 4 <= n <= 5000 and p >= 2, got {n}x{p}"
        )));
    }
    sample.ensure_finite().map_err(|e| Error::Test(e.to_string()))?;
    let corr = correlation(sample).map_err(|e| Error::Test(e.to_string()))?;
    cholesky(&corr).map_err(|_| Error::Test("Royston test: singular covariance".into()))?;

    let mut r_sum = 0.0;
    for col in sample.columns() {
        let (_, w1) = sw_statistic(col)?;
        let z = sw_normal_score(w1, n).min(38.0);
        let half_tail = (std_normal_cdf(-z) / 2.0).max(f64::MIN_POSITIVE);
        let q = std_normal_quantile(half_tail)?;
        r_sum += q * q;
    }

    let ln_n = (n as f64).ln();
    let u = 0.715;
    let v = 0.21364 + 0.015124 * ln_n.powi(2) - 0.0018034 * ln_n.powi(3);
    let mut nc_total = 0.0;
    for i in 0..p {
        for j in 0..p {
            if i == j {
                continue;
            }
            let c = corr[(i, j)];
            nc_total += c.powi(5) * (1.0 - u * (1.0 - c).max(0.0).powf(u) / v);
        }
    }
    let pf = p as f64;
    let mean_c = nc_total / (pf * pf - pf);
    let e = pf / (1.0 + (pf - 1.0) * mean_c);
    let h = e * r_sum / pf;
    let pvalue = chi_square_sf(h, DegreesOfFreedom::new(e)?)?;
    Ok(TestResult { statistic: h, pvalue })
}

/// Largest absolute off-diagonal Pearson correlation.
pub fn max_abs_cross_correlation(sample: &DataMatrix) -> Result<f64> {
    if sample.ncols() < 2 || sample.nrows() < 3 {
        return Err(Error::Input(format!(
            "cross-correlation needs n >= 3 and p >= 2, got {}x{}",
            sample.nrows(),
            sample.ncols()
        )));
    }
    let c = correlation(sample)?;
    let p = c.nrows();
    let mut best: f64 = 0.0;
    for i in 0..p {
        for j in 0..i {
            best = best.max(c[(i, j)].abs());
        }
    }
    Ok(best)
}

/// Kendall's tau-b in O(n log n) (Knight's merge-sort algorithm).
///
/// # Panics
/// If the slices differ in length.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "kendall_tau: length mismatch");
    let n = x.len();
    if n < 2 {
        return f64::NAN;
    }
    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let tie_pairs = |len: u64| len * (len.saturating_sub(1)) / 2;
    let mut x_ties = 0u64;
    let mut xy_ties = 0u64;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && pairs[j].0 == pairs[i].0 {
            j += 1;
        }
        x_ties += tie_pairs((j - i) as u64);
        let mut k = i;
        while k < j {
            let mut m = k + 1;
            while m < j && pairs[m].1 == pairs[k].1 {
                m += 1;
            }
            xy_ties += tie_pairs((m - k) as u64);
            k = m;
        }
        i = j;
    }

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);

    let mut y_ties = 0u64;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && ys[j] == ys[i] {
            j += 1;
        }
        y_ties += tie_pairs((j - i) as u64);
        i = j;
    }

    let total = tie_pairs(n as u64) as f64;
    let s = total - x_ties as f64 - y_ties as f64 + xy_ties as f64 - 2.0 * swaps as f64;
    let denom = ((total - x_ties as f64) * (total - y_ties as f64)).sqrt();
    s / denom
}

/// Sorts `v` and returns the number of strictly inverted pairs.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let (left, right) = v.split_at_mut(mid);
    let mut swaps = merge_count(left, &mut buf[..mid]) + merge_count(right, &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, 0, 0);
    while i < left.len() && j < right.len() {
        if right[j] < left[i] {
            buf[k] = right[j];
            swaps += (left.len() - i) as u64;
            j += 1;
        } else {
            buf[k] = left[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + left.len() - i].copy_from_slice(&left[i..]);
    k += left.len() - i;
    buf[k..k + right.len() - j].copy_from_slice(&right[j..]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// One-sample Kolmogorov-Smirnov distance to U(0, 1).
pub fn ks_uniform(sample: &[f64]) -> f64 {
    let mut u = sample.to_vec();
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    u.iter()
        .enumerate()
        .map(|(i, &v)| {
            let cdf = v.clamp(0.0, 1.0);
            ((i + 1) as f64 / n - cdf).max(cdf - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov-Smirnov distance between empirical CDFs.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Summary of a batch of replications of one method on one case.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub kld_mean: f64,
    pub kld_sd: f64,
    /// Median Royston p-value.
    pub pvalue: f64,
    /// Median Royston statistic.
    pub statistic: f64,
    pub reps: usize,
}

impl EvalReport {
    /// Aggregates per-replication KLD values and test results. The p-value
    /// and statistic are medians; the KLD spread is the sample standard
    /// deviation (0 for a single replication).
    pub fn from_replicates(klds: &[f64], tests: &[TestResult]) -> Result<Self> {
        if klds.is_empty() || tests.is_empty() {
            return Err(Error::Input("no replications to summarize".into()));
        }
        let reps = klds.len();
        let kld_mean = klds.iter().sum::<f64>() / reps as f64;
        let kld_sd = if reps > 1 {
            (klds.iter().map(|k| (k - kld_mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt()
        } else {
            0.0
        };
        Ok(Self {
            kld_mean,
            kld_sd,
            pvalue: median(tests.iter().map(|t| t.pvalue).collect()),
            statistic: median(tests.iter().map(|t| t.statistic).collect()),
            reps,
        })
    }
}

/// Median (mean of the two middle values for even lengths).
pub fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}
