//! Simulation study, figure data and image synthesis.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use copgauss::baselines::{bcg_transform, fit_bcg, radial_gaussianize, rbig, DEFAULT_BCG_SWEEPS, DEFAULT_RBIG_ITERS};
use copgauss::copula_emp::{copula_diagonal, rank_matrix};
use copgauss::evaluate::{
    kld_vs_standard_normal, max_abs_cross_correlation, royston_mvn_test, EvalReport, TestResult,
    DEFAULT_KLD_BOX, DEFAULT_KLD_POINTS,
};
use copgauss::marginal::gaussian_score;
use copgauss::ng::{default_delta_candidates, fit_ng, ng_forward, ng_inverse_training, ng_synthesize, select_delta, CopulaModel};
use copgauss::sampling::{
    derive_seed, make_case_dataset, make_fig2_dataset, sample_copula, sample_std_normal, stream, CaseSpec,
    CopulaSpec, CorrelationMatrix, DEFAULT_T_COPULA_DOF,
};
use copgauss::specfn::{bivariate_normal_cdf, std_normal_quantile};
use copgauss::DataMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::io::{csv_string, fmt_f64, fmt_opt, ImageSet};

/// Seed tag separating evaluation draws from data draws.
const KLD_TAG: u64 = 0x4b4c44;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ng,
    Rbig,
    Bcg,
    Rg,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Ng, Method::Rbig, Method::Bcg, Method::Rg];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ng => "ng",
            Method::Rbig => "rbig",
            Method::Bcg => "bcg",
            Method::Rg => "rg",
        }
    }

    fn tag(self) -> u64 {
        match self {
            Method::Ng => 1,
            Method::Rbig => 2,
            Method::Bcg => 3,
            Method::Rg => 4,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| HarnessError::Usage(format!("unknown method {s:?}; expected ng, rbig, bcg or rg")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub cases: Vec<u8>,
    pub n_list: Vec<usize>,
    pub p: usize,
    pub reps: usize,
    pub methods: Vec<Method>,
    pub master_seed: u64,
    pub kld_points: usize,
    pub kld_box: f64,
    pub bcg_sweeps: usize,
    pub rbig_iters: usize,
    /// Choose NG offsets by Royston p-value instead of all zeros.
    pub select_delta: bool,
    pub t_copula_dof: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            cases: vec![1, 2, 3, 4],
            n_list: vec![1000, 1500, 2000],
            p: 2,
            reps: 50,
            methods: Method::ALL.to_vec(),
            master_seed: 2024,
            kld_points: DEFAULT_KLD_POINTS,
            kld_box: DEFAULT_KLD_BOX,
            bcg_sweeps: DEFAULT_BCG_SWEEPS,
            rbig_iters: DEFAULT_RBIG_ITERS,
            select_delta: false,
            t_copula_dof: DEFAULT_T_COPULA_DOF,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Usage(m));
        if self.reps == 0 {
            return bad("reps must be at least 1".into());
        }
        if self.cases.is_empty() || self.cases.iter().any(|c| !(1..=4).contains(c)) {
            return bad(format!("cases must be a nonempty subset of 1..=4, got {:?}", self.cases));
        }
        if self.p < 2 {
            return bad(format!("p must be at least 2, got {}", self.p));
        }
        if self.n_list.is_empty() || self.n_list.iter().any(|&n| n <= self.p) {
            return bad(format!("every n must exceed p = {}, got {:?}", self.p, self.n_list));
        }
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        if self.kld_points == 0 || !(self.kld_box > 0.0 && self.kld_box.is_finite()) {
            return bad("KLD needs a positive point count and box half-width".into());
        }
        if self.t_copula_dof.is_nan() || self.t_copula_dof <= 0.0 {
            return bad(format!("t-copula degrees of freedom must be positive, got {}", self.t_copula_dof));
        }
        Ok(())
    }

    /// Seed of the dataset for one replication; shared by all methods.
    pub fn data_seed(&self, case: u8, n: usize, rep: usize) -> u64 {
        derive_seed(self.master_seed, &[case as u64, n as u64, self.p as u64, rep as u64])
    }

    fn kld_seed(&self, case: u8, n: usize, method: Method, rep: usize) -> u64 {
        derive_seed(
            self.master_seed,
            &[case as u64, n as u64, self.p as u64, method.tag(), rep as u64, KLD_TAG],
        )
    }
}

/// Applies one Gaussianization method to a dataset.
pub fn apply_method(method: Method, data: &DataMatrix, config: &ExperimentConfig) -> copgauss::Result<DataMatrix> {
    match method {
        Method::Ng => {
            let deltas = if config.select_delta {
                select_delta(data, &default_delta_candidates(data.nrows(), data.ncols()))?
            } else {
                vec![0; data.ncols()]
            };
            let model = fit_ng(data, Some(&deltas))?;
            ng_forward(&model, data)
        }
        Method::Rbig => rbig(data, config.rbig_iters).map(|(out, _)| out),
        Method::Bcg => {
            let params = fit_bcg(data, config.bcg_sweeps)?;
            bcg_transform(&params, data)
        }
        Method::Rg => radial_gaussianize(data),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepMetrics {
    pub statistic: f64,
    pub pvalue: f64,
    pub kld: f64,
    pub max_abs_corr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replicate {
    pub case: u8,
    pub n: usize,
    pub p: usize,
    pub method: Method,
    pub rep: usize,
    pub data_seed: u64,
    pub outcome: std::result::Result<RepMetrics, String>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub case: u8,
    pub n: usize,
    pub p: usize,
    pub method: Method,
    pub reps_ok: usize,
    pub reps_failed: usize,
    /// Absent when every replication failed.
    pub report: Option<EvalReport>,
    pub max_abs_corr_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResults {
    pub replicates: Vec<Replicate>,
    pub summary: Vec<SummaryRow>,
}

fn run_replicate(config: &ExperimentConfig, case: u8, n: usize, method: Method, rep: usize) -> Replicate {
    let start = Instant::now();
    let data_seed = config.data_seed(case, n, rep);
    let outcome = (|| -> copgauss::Result<RepMetrics> {
        let mut spec = CaseSpec::new(case, n, config.p, data_seed);
        spec.t_copula_dof = config.t_copula_dof;
        let data = make_case_dataset(&spec)?;
        let out = apply_method(method, &data, config)?;
        let test = royston_mvn_test(&out)?;
        let kld = kld_vs_standard_normal(
            &out,
            config.kld_points,
            config.kld_box,
            config.kld_seed(case, n, method, rep),
        )?;
        Ok(RepMetrics {
            statistic: test.statistic,
            pvalue: test.pvalue,
            kld,
            max_abs_corr: max_abs_cross_correlation(&out)?,
        })
    })()
    .map_err(|e| e.to_string());
    Replicate {
        case,
        n,
        p: config.p,
        method,
        rep,
        data_seed,
        outcome,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs every (case, n, method, replication) combination. Replications run in
/// parallel; results are kept in a fixed order. Failed replications are
/// recorded with their error message and excluded from the summary.
pub fn run_simulation(config: &ExperimentConfig) -> Result<SimulationResults> {
    config.validate()?;
    let mut tasks = Vec::new();
    for &case in &config.cases {
        for &n in &config.n_list {
            for &method in &config.methods {
                for rep in 0..config.reps {
                    tasks.push((case, n, method, rep));
                }
            }
        }
    }
    let replicates: Vec<Replicate> = tasks
        .par_iter()
        .map(|&(case, n, method, rep)| run_replicate(config, case, n, method, rep))
        .collect();

    let summary = replicates
        .chunks(config.reps)
        .map(|group| {
            let first = &group[0];
            let ok: Vec<&RepMetrics> = group.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
            let klds: Vec<f64> = ok.iter().map(|m| m.kld).collect();
            let tests: Vec<TestResult> =
                ok.iter().map(|m| TestResult { statistic: m.statistic, pvalue: m.pvalue }).collect();
            let report = EvalReport::from_replicates(&klds, &tests).ok();
            let max_abs_corr_mean =
                (!ok.is_empty()).then(|| ok.iter().map(|m| m.max_abs_corr).sum::<f64>() / ok.len() as f64);
            SummaryRow {
                case: first.case,
                n: first.n,
                p: first.p,
                method: first.method,
                reps_ok: ok.len(),
                reps_failed: group.len() - ok.len(),
                report,
                max_abs_corr_mean,
            }
        })
        .collect();
    Ok(SimulationResults { replicates, summary })
}

impl SimulationResults {
    pub fn summary_for(&self, case: u8, n: usize, method: Method) -> Option<&SummaryRow> {
        self.summary.iter().find(|s| s.case == case && s.n == n && s.method == method)
    }

    pub fn replicates_csv(&self) -> Result<String> {
        let rows: Vec<Vec<String>> = self
            .replicates
            .iter()
            .map(|r| {
                let m = r.outcome.as_ref().ok();
                vec![
                    r.case.to_string(),
                    r.n.to_string(),
                    r.p.to_string(),
                    r.method.to_string(),
                    r.rep.to_string(),
                    r.data_seed.to_string(),
                    if m.is_some() { "ok" } else { "failed" }.to_string(),
                    fmt_opt(m.map(|m| m.statistic)),
                    fmt_opt(m.map(|m| m.pvalue)),
                    fmt_opt(m.map(|m| m.kld)),
                    fmt_opt(m.map(|m| m.max_abs_corr)),
                    r.outcome.as_ref().err().cloned().unwrap_or_default(),
                ]
            })
            .collect();
        csv_string(
            &["case", "n", "p", "method", "rep", "data_seed", "status", "royston_h", "pvalue", "kld", "max_abs_corr", "reason"],
            &rows,
        )
    }

    pub fn summary_csv(&self) -> Result<String> {
        let rows: Vec<Vec<String>> = self
            .summary
            .iter()
            .map(|s| {
                let r = s.report.as_ref();
                vec![
                    s.case.to_string(),
                    s.n.to_string(),
                    s.p.to_string(),
                    s.method.to_string(),
                    s.reps_ok.to_string(),
                    s.reps_failed.to_string(),
                    fmt_opt(r.map(|r| r.pvalue)),
                    fmt_opt(r.map(|r| r.statistic)),
                    fmt_opt(r.map(|r| r.kld_mean)),
                    fmt_opt(r.map(|r| r.kld_sd)),
                    fmt_opt(s.max_abs_corr_mean),
                ]
            })
            .collect();
        csv_string(
            &["case", "n", "p", "method", "reps_ok", "reps_failed", "pvalue_median", "royston_h_median", "kld_mean", "kld_sd", "max_abs_corr_mean"],
            &rows,
        )
    }

    /// Wall-clock seconds summed per (case, n, method). Not deterministic, so
    /// kept apart from the primary outputs.
    pub fn timing_csv(&self) -> Result<String> {
        let reps = self.replicates.len() / self.summary.len().max(1);
        let rows: Vec<Vec<String>> = self
            .replicates
            .chunks(reps.max(1))
            .map(|g| {
                vec![
                    g[0].case.to_string(),
                    g[0].n.to_string(),
                    g[0].p.to_string(),
                    g[0].method.to_string(),
                    format!("{:.6}", g.iter().map(|r| r.seconds).sum::<f64>()),
                ]
            })
            .collect();
        csv_string(&["case", "n", "p", "method", "wall_seconds"], &rows)
    }
}

/// One grid point of the copula diagonal comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagonalPoint {
    pub u: f64,
    pub empirical: f64,
    pub truth: f64,
}

pub const FIG1_RHO: f64 = 0.5;

/// Empirical versus true diagonal of the bivariate Gaussian copula with
/// correlation 1/2, on `grid` equally spaced points of `[0, 1]`.
pub fn run_fig1(n: usize, seed: u64, grid: usize) -> Result<Vec<DiagonalPoint>> {
    if n < 10 {
        return Err(HarnessError::Usage(format!("fig1 needs n >= 10, got {n}")));
    }
    let spec = CopulaSpec::Gaussian(CorrelationMatrix::power_decay(2));
    let sample = sample_copula(&spec, n, seed)?;
    let ranks = rank_matrix(&sample)?;
    copula_diagonal(&ranks, grid)?
        .into_iter()
        .map(|(u, empirical)| {
            let truth = if u <= 0.0 {
                0.0
            } else if u >= 1.0 {
                1.0
            } else {
                let q = std_normal_quantile(u)?;
                bivariate_normal_cdf(q, q, FIG1_RHO)?
            };
            Ok(DiagonalPoint { u, empirical, truth })
        })
        .collect::<copgauss::Result<Vec<_>>>()
        .map_err(Into::into)
}

pub fn sup_gap(points: &[DiagonalPoint]) -> f64 {
    points.iter().map(|p| (p.empirical - p.truth).abs()).fold(0.0, f64::max)
}

pub fn diagonal_csv(points: &[DiagonalPoint]) -> Result<String> {
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| vec![fmt_f64(p.u), fmt_f64(p.empirical), fmt_f64(p.truth)])
        .collect();
    csv_string(&["u", "empirical", "true"], &rows)
}

/// Round-trip demonstration on the toy distribution.
#[derive(Debug, Clone)]
pub struct Fig2Report {
    pub training: DataMatrix,
    pub forward: DataMatrix,
    pub royston: TestResult,
    pub roundtrip_max_abs_error: f64,
    /// Every forward column is exactly the Gaussian score grid.
    pub grid_exact: bool,
    pub fresh_gaussian: DataMatrix,
    pub synthesized: DataMatrix,
}

pub fn run_fig2(n: usize, seed: u64) -> Result<Fig2Report> {
    if n < 100 {
        return Err(HarnessError::Usage(format!("fig2 needs n >= 100, got {n}")));
    }
    let training = make_fig2_dataset(n, seed)?;
    let model = fit_ng(&training, Some(&[0, 0]))?;
    let forward = ng_forward(&model, &training)?;
    let royston = royston_mvn_test(&forward)?;
    let back = ng_inverse_training(&model, &forward)?;
    let roundtrip_max_abs_error = (0..2)
        .flat_map(|c| back.column(c).iter().zip(training.column(c)).map(|(a, b)| (a - b).abs()).collect::<Vec<_>>())
        .fold(0.0, f64::max);
    let grid: Vec<f64> = (1..=n).map(|k| gaussian_score(k, n)).collect();
    let grid_exact = forward.columns().all(|c| {
        let mut s = c.to_vec();
        s.sort_by(f64::total_cmp);
        s == grid
    });
    let fresh_gaussian = sample_std_normal(n, 2, derive_seed(seed, &[2]));
    let synthesized = ng_synthesize(&model, &fresh_gaussian)?;
    Ok(Fig2Report { training, forward, royston, roundtrip_max_abs_error, grid_exact, fresh_gaussian, synthesized })
}

/// Fits the copula model to flattened frames and synthesizes `count` new
/// frames from standard normal draws, clamped to `[0, 1]`.
pub fn run_synth(images: &ImageSet, count: usize, seed: u64) -> Result<ImageSet> {
    if images.len() < 2 {
        return Err(HarnessError::Data(format!("synthesis needs at least 2 frames, got {}", images.len())));
    }
    let data = images.to_data_matrix()?;
    let model = CopulaModel::fit(&data)?;
    let z = sample_std_normal(count, data.ncols(), seed);
    let out = model.synthesize(&z, 0)?;
    ImageSet::from_data_matrix(images.height(), images.width(), &out)
}

/// A corpus of `m` frames, each a single Gaussian blob of random position,
/// width and brightness on a dim background, plus pixel noise.
pub fn synthetic_blobs(m: usize, height: usize, width: usize, seed: u64) -> Result<ImageSet> {
    let mut rng = stream(seed);
    let frames = (0..m)
        .map(|_| {
            let cy = rng.random_range(0.25..0.75) * height as f64;
            let cx = rng.random_range(0.25..0.75) * width as f64;
            let s = rng.random_range(0.12..0.3) * height.min(width) as f64;
            let amp = rng.random_range(0.4..0.85);
            let background = rng.random_range(0.05..0.15);
            (0..height * width)
                .map(|k| {
                    let (y, x) = ((k / width) as f64 + 0.5, (k % width) as f64 + 0.5);
                    let d2 = ((y - cy).powi(2) + (x - cx).powi(2)) / (2.0 * s * s);
                    let noise = rng.random_range(-0.03..0.03);
                    (background + amp * (-d2).exp() + noise).clamp(0.0, 1.0)
                })
                .collect()
        })
        .collect();
    ImageSet::new(height, width, frames)
}
