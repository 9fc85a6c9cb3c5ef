//! Seeded generation of the simulation datasets.
//!
//! Every sampler is a pure function of its arguments and a 64-bit seed. The
//! generator is xoshiro256++ seeded through SplitMix64
//! (`Xoshiro256PlusPlus::seed_from_u64`); standard normals use the ziggurat
//! method from `rand_distr`, gamma variates use Marsaglia-Tsang (with the
//! `U^{1/a}` boost for shape below one). Draws are consumed row by row, in
//! column order within a row.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_distr::{ChiSquared, Distribution, Exp1, Gamma, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::linalg::cholesky;
use crate::specfn::{
    std_normal_cdf, std_normal_quantile, student_t_cdf, student_t_quantile, DegreesOfFreedom,
};

/// The random stream used throughout the crate.
pub type Stream = Xoshiro256PlusPlus;

pub fn stream(seed: u64) -> Stream {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent child seed from a master seed and a path of tags,
/// e.g. `(case, n, method, replication)`.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(master), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

const U_MIN: f64 = f64::MIN_POSITIVE;
const U_MAX: f64 = 1.0 - f64::EPSILON / 2.0;

/// Keeps a uniform strictly inside (0, 1).
#[inline]
pub(crate) fn open_unit(u: f64) -> f64 {
    u.clamp(U_MIN, U_MAX)
}

/// Symmetric, unit-diagonal, positive definite correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    entries: DMatrix<f64>,
    factor: DMatrix<f64>,
}

impl CorrelationMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let p = entries.nrows();
        if entries.ncols() != p || p == 0 {
            return Err(Error::Dimension(
                "correlation matrix must be square and nonempty".into(),
            ));
        }
        for i in 0..p {
            if (entries[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::Input(format!(
                    "correlation diagonal entry {i} is {}",
                    entries[(i, i)]
                )));
            }
            for j in 0..i {
                if (entries[(i, j)] - entries[(j, i)]).abs() > 1e-12 {
                    return Err(Error::Input(format!(
                        "correlation matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let factor = cholesky(&entries)?;
        Ok(Self { entries, factor })
    }

    pub fn identity(p: usize) -> Self {
        Self::new(DMatrix::identity(p, p)).expect("identity is a correlation matrix")
    }

    /// `ρ_ab = 2^{-|a-b|}`.
    pub fn power_decay(p: usize) -> Self {
        let m = DMatrix::from_fn(p, p, |a, b| 0.5f64.powi(a.abs_diff(b) as i32));
        Self::new(m).expect("power-decay matrix is positive definite")
    }

    /// Two-dimensional matrix with off-diagonal `rho`.
    pub fn bivariate(rho: f64) -> Result<Self> {
        Self::new(DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Lower Cholesky factor.
    pub fn cholesky(&self) -> &DMatrix<f64> {
        &self.factor
    }

    fn correlate(&self, z: &[f64], out: &mut [f64]) {
        let p = self.dim();
        for i in 0..p {
            out[i] = (0..=i).map(|k| self.factor[(i, k)] * z[k]).sum();
        }
    }
}

/// Copula families used by the simulation cases.
#[derive(Debug, Clone, PartialEq)]
pub enum CopulaSpec {
    Gaussian(CorrelationMatrix),
    StudentT {
        corr: CorrelationMatrix,
        nu: DegreesOfFreedom,
    },
    Clayton {
        theta: f64,
        dim: usize,
    },
}

impl CopulaSpec {
    pub fn dim(&self) -> usize {
        match self {
            Self::Gaussian(c) | Self::StudentT { corr: c, .. } => c.dim(),
            Self::Clayton { dim, .. } => *dim,
        }
    }

    fn validate(&self) -> Result<()> {
        if let Self::Clayton { theta, dim } = self {
            if !(*theta > 0.0) || !theta.is_finite() {
                return Err(Error::Input(format!(
                    "Clayton theta must be positive, got {theta}"
                )));
            }
            if *dim == 0 {
                return Err(Error::Input("Clayton dimension must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Default degrees of freedom for the Student-t copula of case 3.
pub const DEFAULT_T_COPULA_DOF: f64 = 6.0;
/// Clayton parameter of case 4.
pub const CASE4_CLAYTON_THETA: f64 = 3.0;
/// Degrees of freedom of the case 1 Student-t marginals.
pub const CASE1_MARGINAL_DOF: f64 = 6.0;

/// One of the four simulation cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseSpec {
    pub case_id: u8,
    pub n: usize,
    pub p: usize,
    pub seed: u64,
    /// Degrees of freedom of the case 3 Student-t copula.
    pub t_copula_dof: f64,
}

impl CaseSpec {
    pub fn new(case_id: u8, n: usize, p: usize, seed: u64) -> Self {
        Self {
            case_id,
            n,
            p,
            seed,
            t_copula_dof: DEFAULT_T_COPULA_DOF,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.case_id) {
            return Err(Error::Input(format!(
                "unknown case id {}; expected 1..=4",
                self.case_id
            )));
        }
        if self.p < 2 {
            return Err(Error::Input(format!("case needs p >= 2, got {}", self.p)));
        }
        if self.n <= self.p {
            return Err(Error::Input(format!(
                "case needs n > p, got n = {}, p = {}",
                self.n, self.p
            )));
        }
        Ok(())
    }

    pub fn copula(&self) -> Result<CopulaSpec> {
        self.validate()?;
        Ok(match self.case_id {
            1 | 2 => CopulaSpec::Gaussian(CorrelationMatrix::power_decay(self.p)),
            3 => CopulaSpec::StudentT {
                corr: CorrelationMatrix::power_decay(self.p),
                nu: DegreesOfFreedom::new(self.t_copula_dof)?,
            },
            _ => CopulaSpec::Clayton {
                theta: CASE4_CLAYTON_THETA,
                dim: self.p,
            },
        })
    }
}

/// `n x p` matrix of i.i.d. standard normals.
pub fn sample_std_normal(n: usize, p: usize, seed: u64) -> DataMatrix {
    let mut rng = stream(seed);
    let mut out = DataMatrix::zeros(n, p);
    for r in 0..n {
        for c in 0..p {
            out.set(r, c, rng.sample(StandardNormal));
        }
    }
    out
}

/// `n` draws from a copula; each entry lies strictly inside (0, 1).
pub fn sample_copula(spec: &CopulaSpec, n: usize, seed: u64) -> Result<DataMatrix> {
    spec.validate()?;
    let mut rng = stream(seed);
    let p = spec.dim();
    let mut out = DataMatrix::zeros(n, p);
    let mut z = vec![0.0; p];
    let mut x = vec![0.0; p];
    match spec {
        CopulaSpec::Gaussian(corr) => {
            for r in 0..n {
                z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                corr.correlate(&z, &mut x);
                for c in 0..p {
                    out.set(r, c, open_unit(std_normal_cdf(x[c])));
                }
            }
        }
        CopulaSpec::StudentT { corr, nu } => {
            let chi2 = ChiSquared::new(nu.value())
                .map_err(|e| Error::Input(format!("chi-square law: {e}")))?;
            for r in 0..n {
                z.iter_mut().for_each(|v| *v = rng.sample(StandardNormal));
                corr.correlate(&z, &mut x);
                let w: f64 = chi2.sample(&mut rng);
                let scale = (nu.value() / w).sqrt();
                for c in 0..p {
                    out.set(r, c, open_unit(student_t_cdf(x[c] * scale, *nu)));
                }
            }
        }
        CopulaSpec::Clayton { theta, .. } => {
            let gamma = Gamma::new(1.0 / theta, 1.0)
                .map_err(|e| Error::Input(format!("gamma law: {e}")))?;
            for r in 0..n {
                let v: f64 = gamma.sample(&mut rng);
                for c in 0..p {
                    let e: f64 = rng.sample(Exp1);
                    let u = (1.0 + e / v).powf(-1.0 / theta);
                    out.set(r, c, open_unit(u));
                }
            }
        }
    }
    Ok(out)
}

/// Marginal laws used by the simulation cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marginal {
    StudentT(DegreesOfFreedom),
    Exponential,
    StdNormal,
}

impl Marginal {
    pub fn quantile(&self, u: f64) -> Result<f64> {
        match self {
            Self::StudentT(dof) => student_t_quantile(u, *dof),
            Self::Exponential => {
                if !(u > 0.0 && u < 1.0) {
                    return Err(Error::Domain(format!(
                        "exponential quantile needs u in (0, 1), got {u}"
                    )));
                }
                Ok(-(-u).ln_1p())
            }
            Self::StdNormal => std_normal_quantile(u),
        }
    }
}

/// Materializes one of the four simulation cases.
///
/// | case | copula | marginals |
/// |------|--------|-----------|
/// | 1 | Gaussian, `ρ_ab = 2^{-|a-b|}` | Student-t(6) |
/// | 2 | Gaussian, same | Exp(1) |
/// | 3 | Student-t (ν = `t_copula_dof`), same | N(0, 1) |
/// | 4 | Clayton(θ = 3) | Exp(1) |
pub fn make_case_dataset(spec: &CaseSpec) -> Result<DataMatrix> {
    let copula = spec.copula()?;
    let marginal = match spec.case_id {
        1 => Marginal::StudentT(DegreesOfFreedom::new(CASE1_MARGINAL_DOF)?),
        2 | 4 => Marginal::Exponential,
        _ => Marginal::StdNormal,
    };
    let mut data = sample_copula(&copula, spec.n, spec.seed)?;
    for c in 0..spec.p {
        for v in data.column_mut(c) {
            *v = marginal.quantile(*v)?;
        }
    }
    Ok(data)
}

/// Two-dimensional toy data: `X1 ~ U(-1, 1)`, `Z ~ χ²(2)`,
/// `X2 = |Z| sign(X1)`.
pub fn make_fig2_dataset(n: usize, seed: u64) -> Result<DataMatrix> {
    if n < 10 {
        return Err(Error::Input(format!("toy dataset needs n >= 10, got {n}")));
    }
    let mut rng = stream(seed);
    let chi2 = ChiSquared::new(2.0).expect("two degrees of freedom");
    let mut out = DataMatrix::zeros(n, 2);
    for r in 0..n {
        let x1 = loop {
            let x: f64 = rng.random_range(-1.0..1.0);
            if x != 0.0 {
                break x;
            }
        };
        let z: f64 = chi2.sample(&mut rng);
        out.set(r, 0, x1);
        out.set(r, 1, z.abs() * x1.signum());
    }
    Ok(out)
}
