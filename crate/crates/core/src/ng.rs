//! Non-iterative Gaussianization.
//!
//! Forward: marginal Gaussianization of every column, then a cyclic
//! re-ranking that rotates column `i` by a distinct shift so that rows of the
//! output no longer pair up the original observations. Each output column is
//! a permutation of the scores `Φ^{-1}(k/(n+1))`, and the map is exactly
//! invertible on the training sample. New samples are drawn through the
//! empirical (checkerboard) copula of the training ranks.

use crate::copula_emp::{checkerboard_sample, RankMatrix};
use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::evaluate::royston_mvn_test;
use crate::marginal::{fit_marginals, MarginalModel};
use crate::sampling::open_unit;
use crate::specfn::std_normal_cdf;

/// Upper bound on the common offset tried by [`default_delta_candidates`].
pub const MAX_DEFAULT_DELTA: usize = 10;

/// Column shifts of the re-ranking step.
///
/// Column `i` (0-based) is rotated by `s_i = (i + δ_i) mod n`: output row `m`
/// takes input row `(m + s_i) mod n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RerankPlan {
    n: usize,
    deltas: Vec<usize>,
    shifts: Vec<usize>,
}

impl RerankPlan {
    /// Requires `n >= p >= 1`, `δ_0 = 0`, `δ_i <= ⌊n/p⌋` and pairwise
    /// distinct shifts.
    pub fn new(n: usize, p: usize, deltas: &[usize]) -> Result<Self> {
        if p == 0 || n < p {
            return Err(Error::Plan(format!("re-ranking needs n >= p >= 1, got n={n}, p={p}")));
        }
        if deltas.len() != p {
            return Err(Error::Plan(format!("expected {p} offsets, got {}", deltas.len())));
        }
        if deltas[0] != 0 {
            return Err(Error::Plan(format!("first offset must be 0, got {}", deltas[0])));
        }
        let limit = n / p;
        if let Some((i, d)) = deltas.iter().enumerate().find(|(_, &d)| d > limit) {
            return Err(Error::Plan(format!("offset {d} for column {i} exceeds n/p = {limit}")));
        }
        let shifts: Vec<usize> = deltas.iter().enumerate().map(|(i, d)| (i + d) % n).collect();
        let mut seen = vec![usize::MAX; n];
        for (i, &s) in shifts.iter().enumerate() {
            if seen[s] != usize::MAX {
                return Err(Error::Plan(format!(
                    "columns {} and {i} share the shift {s}",
                    seen[s]
                )));
            }
            seen[s] = i;
        }
        Ok(Self { n, deltas: deltas.to_vec(), shifts })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.shifts.len()
    }

    pub fn deltas(&self) -> &[usize] {
        &self.deltas
    }

    pub fn shifts(&self) -> &[usize] {
        &self.shifts
    }

    fn check(&self, m: &DataMatrix) -> Result<()> {
        m.ensure_shape(self.n, self.p())
    }
}

pub fn make_rerank_plan(n: usize, p: usize, deltas: &[usize]) -> Result<RerankPlan> {
    RerankPlan::new(n, p, deltas)
}

/// Applies the column rotations of `plan`.
pub fn rerank(m: &DataMatrix, plan: &RerankPlan) -> Result<DataMatrix> {
    plan.check(m)?;
    let mut out = m.clone();
    for (c, &s) in plan.shifts.iter().enumerate() {
        out.column_mut(c).rotate_left(s);
    }
    Ok(out)
}

/// Undoes [`rerank`].
pub fn unrerank(m: &DataMatrix, plan: &RerankPlan) -> Result<DataMatrix> {
    plan.check(m)?;
    let mut out = m.clone();
    for (c, &s) in plan.shifts.iter().enumerate() {
        out.column_mut(c).rotate_right(s);
    }
    Ok(out)
}

/// Empirical marginals plus training ranks: everything needed to gaussianize
/// new points and to synthesize samples through the checkerboard copula.
#[derive(Debug, Clone, PartialEq)]
pub struct CopulaModel {
    marginals: Vec<MarginalModel>,
    ranks: RankMatrix,
}

impl CopulaModel {
    pub fn fit(data: &DataMatrix) -> Result<Self> {
        data.ensure_finite()?;
        Ok(Self {
            marginals: fit_marginals(data)?,
            ranks: RankMatrix::from_data(data)?,
        })
    }

    pub fn from_parts(marginals: Vec<MarginalModel>, ranks: RankMatrix) -> Result<Self> {
        if marginals.len() != ranks.p() || marginals.iter().any(|m| m.n() != ranks.n()) {
            return Err(Error::Input(format!(
                "marginals ({} columns) do not match a {}x{} rank matrix",
                marginals.len(),
                ranks.n(),
                ranks.p()
            )));
        }
        Ok(Self { marginals, ranks })
    }

    pub fn n(&self) -> usize {
        self.ranks.n()
    }

    pub fn p(&self) -> usize {
        self.ranks.p()
    }

    pub fn marginals(&self) -> &[MarginalModel] {
        &self.marginals
    }

    pub fn ranks(&self) -> &RankMatrix {
        &self.ranks
    }

    /// Column-wise `Φ^{-1}(F̂_i(x))` for any number of rows.
    pub fn gaussianize(&self, data: &DataMatrix) -> Result<DataMatrix> {
        if data.ncols() != self.p() {
            return Err(Error::Dimension(format!(
                "model has {} columns, data has {}",
                self.p(),
                data.ncols()
            )));
        }
        data.ensure_finite()?;
        DataMatrix::from_columns(
            self.marginals
                .iter()
                .zip(data.columns())
                .map(|(m, col)| m.gaussianize_all(col))
                .collect(),
        )
    }

    /// Maps rows of standard normal draws `z` to synthetic observations:
    /// `u = Φ(z)`, a checkerboard-copula draw `v` pivoted on column `pivot`,
    /// then interpolated marginal quantiles.
    pub fn synthesize(&self, z: &DataMatrix, pivot: usize) -> Result<DataMatrix> {
        let p = self.p();
        if z.ncols() != p {
            return Err(Error::Dimension(format!("model has {p} columns, draws have {}", z.ncols())));
        }
        z.ensure_finite()?;
        let m = z.nrows();
        let mut out = DataMatrix::zeros(m, p);
        let mut u = vec![0.0; p];
        for row in 0..m {
            for (c, slot) in u.iter_mut().enumerate() {
                *slot = open_unit(std_normal_cdf(z.get(row, c)));
            }
            let v = checkerboard_sample(&self.ranks, &u, pivot)?;
            for (c, vc) in v.into_iter().enumerate() {
                out.set(row, c, self.marginals[c].quantile(open_unit(vc), true)?);
            }
        }
        Ok(out)
    }
}

/// A fitted non-iterative Gaussianization.
#[derive(Debug, Clone, PartialEq)]
pub struct NgModel {
    copula: CopulaModel,
    plan: RerankPlan,
}

impl NgModel {
    pub fn from_parts(copula: CopulaModel, plan: RerankPlan) -> Result<Self> {
        if plan.n() != copula.n() || plan.p() != copula.p() {
            return Err(Error::Plan(format!(
                "plan is {}x{}, model is {}x{}",
                plan.n(),
                plan.p(),
                copula.n(),
                copula.p()
            )));
        }
        Ok(Self { copula, plan })
    }

    pub fn n(&self) -> usize {
        self.copula.n()
    }

    pub fn p(&self) -> usize {
        self.copula.p()
    }

    pub fn copula(&self) -> &CopulaModel {
        &self.copula
    }

    pub fn plan(&self) -> &RerankPlan {
        &self.plan
    }

    pub fn marginals(&self) -> &[MarginalModel] {
        self.copula.marginals()
    }

    pub fn ranks(&self) -> &RankMatrix {
        self.copula.ranks()
    }
}

/// Offset vectors `(0, c, …, c)` for `c = 0..=min(⌊n/p⌋, 10)`.
pub fn default_delta_candidates(n: usize, p: usize) -> Vec<Vec<usize>> {
    if p == 0 {
        return Vec::new();
    }
    let top = (n / p).min(MAX_DEFAULT_DELTA);
    (0..=top)
        .map(|c| (0..p).map(|i| if i == 0 { 0 } else { c }).collect())
        .collect()
}

/// Picks the offsets whose Gaussianized output has the largest Royston
/// p-value; ties go to the earlier candidate. Invalid candidates are skipped.
pub fn select_delta(data: &DataMatrix, candidates: &[Vec<usize>]) -> Result<Vec<usize>> {
    let (n, p) = (data.nrows(), data.ncols());
    if p == 1 {
        return Ok(vec![0]);
    }
    let gauss = CopulaModel::fit(data)?.gaussianize(data)?;
    let mut best: Option<(f64, &Vec<usize>)> = None;
    let mut last_err = None;
    for cand in candidates {
        let plan = match RerankPlan::new(n, p, cand) {
            Ok(plan) => plan,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        match royston_mvn_test(&rerank(&gauss, &plan)?) {
            Ok(t) => {
                if best.is_none_or(|(b, _)| t.pvalue > b) {
                    best = Some((t.pvalue, cand));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.map(|(_, c)| c.clone()).ok_or_else(|| {
        Error::Selection(match last_err {
            Some(e) => format!("no usable offset candidate: {e}"),
            None => "no offset candidates given".into(),
        })
    })
}

/// Fits the model. With `deltas = None` the offsets are chosen by
/// [`select_delta`] over [`default_delta_candidates`].
pub fn fit_ng(data: &DataMatrix, deltas: Option<&[usize]>) -> Result<NgModel> {
    let (n, p) = (data.nrows(), data.ncols());
    if p == 0 || n <= p {
        return Err(Error::Fit(format!("fit needs n > p >= 1, got n={n}, p={p}")));
    }
    data.ensure_finite()?;
    let chosen = match deltas {
        Some(d) => d.to_vec(),
        None => select_delta(data, &default_delta_candidates(n, p))?,
    };
    let plan = RerankPlan::new(n, p, &chosen)?;
    NgModel::from_parts(CopulaModel::fit(data)?, plan)
}

/// Gaussianizes the training matrix and re-ranks it.
pub fn ng_forward(model: &NgModel, data: &DataMatrix) -> Result<DataMatrix> {
    data.ensure_shape(model.n(), model.p())?;
    rerank(&model.copula.gaussianize(data)?, &model.plan)
}

/// Exact inverse of [`ng_forward`] on the training sample.
pub fn ng_inverse_training(model: &NgModel, pseudo: &DataMatrix) -> Result<DataMatrix> {
    pseudo.ensure_shape(model.n(), model.p())?;
    pseudo.ensure_finite()?;
    let z = unrerank(pseudo, &model.plan)?;
    DataMatrix::from_columns(
        model
            .marginals()
            .iter()
            .zip(z.columns())
            .map(|(m, col)| col.iter().map(|&v| m.inverse_gaussianize(v, false)).collect())
            .collect(),
    )
}

/// Synthesizes one observation per row of `z` (pivot column 0).
pub fn ng_synthesize(model: &NgModel, z: &DataMatrix) -> Result<DataMatrix> {
    model.copula.synthesize(z, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluate::{kendall_tau, ks_two_sample};
    use crate::marginal::gaussian_score;
    use crate::sampling::{make_case_dataset, sample_std_normal, CaseSpec};
    use proptest::prelude::*;

    fn col(v: &[f64]) -> DataMatrix {
        DataMatrix::from_columns(vec![v.to_vec()]).unwrap()
    }

    #[test]
    fn plan_rules() {
        let plan = make_rerank_plan(4, 4, &[0, 0, 0, 0]).unwrap();
        assert_eq!(plan.shifts(), &[0, 1, 2, 3]);
        let plan = make_rerank_plan(10, 2, &[0, 3]).unwrap();
        assert_eq!(plan.shifts(), &[0, 4]);
        assert!(make_rerank_plan(10, 2, &[1, 0]).is_err());
        assert!(make_rerank_plan(10, 2, &[0, 6]).is_err());
        assert!(make_rerank_plan(3, 4, &[0, 0, 0, 0]).is_err());
        assert!(make_rerank_plan(10, 2, &[0]).is_err());
        // (1 + 1) mod 3 collides with (2 + 0) mod 3
        assert!(make_rerank_plan(3, 3, &[0, 1, 0]).is_err());
    }

    #[test]
    fn rerank_rotates_columns() {
        let plan = RerankPlan { n: 3, deltas: vec![1], shifts: vec![1] };
        let out = rerank(&col(&[1.0, 2.0, 3.0]), &plan).unwrap();
        assert_eq!(out.column(0), &[2.0, 3.0, 1.0]);
        assert_eq!(unrerank(&out, &plan).unwrap().column(0), &[1.0, 2.0, 3.0]);
        let plan = make_rerank_plan(3, 1, &[0]).unwrap();
        assert_eq!(rerank(&col(&[1.0, 2.0, 3.0]), &plan).unwrap().column(0), &[1.0, 2.0, 3.0]);
        assert!(rerank(&col(&[1.0, 2.0]), &plan).is_err());
    }

    #[test]
    fn forward_hits_the_score_grid() {
        let data = DataMatrix::from_columns(vec![vec![1., 2., 3., 4., 5., 6., 7., 8., 9.]]).unwrap();
        let model = fit_ng(&data, Some(&[0])).unwrap();
        let out = ng_forward(&model, &data).unwrap();
        assert_eq!(out.get(4, 0), 0.0);
        let data = make_case_dataset(&CaseSpec::new(3, 200, 3, 1)).unwrap();
        let model = fit_ng(&data, Some(&[0, 5, 5])).unwrap();
        let out = ng_forward(&model, &data).unwrap();
        let grid: Vec<f64> = (1..=200).map(|k| gaussian_score(k, 200)).collect();
        for c in 0..3 {
            let mut s = out.column(c).to_vec();
            s.sort_by(f64::total_cmp);
            assert_eq!(s, grid);
        }
    }

    #[test]
    fn inverse_is_exact() {
        let data = make_case_dataset(&CaseSpec::new(4, 300, 4, 9)).unwrap();
        let model = fit_ng(&data, Some(&[0, 2, 7, 1])).unwrap();
        let z = ng_forward(&model, &data).unwrap();
        assert_eq!(ng_inverse_training(&model, &z).unwrap(), data);
        let single = col(&[3.0, -1.0, 2.5, 0.0]);
        let m = fit_ng(&single, Some(&[0])).unwrap();
        let z = ng_forward(&m, &single).unwrap();
        assert_eq!(ng_inverse_training(&m, &z).unwrap(), single);
    }

    #[test]
    fn fit_rejects_bad_input() {
        let d = DataMatrix::from_columns(vec![vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert!(fit_ng(&d, Some(&[0, 0])).is_err());
        let d = DataMatrix::from_columns(vec![vec![1.0, 2.0, f64::NAN], vec![3.0, 4.0, 5.0]]).unwrap();
        assert!(fit_ng(&d, Some(&[0, 0])).is_err());
    }

    #[test]
    fn selection_prefers_first_on_ties() {
        let data = make_case_dataset(&CaseSpec::new(1, 300, 2, 4)).unwrap();
        let cands = default_delta_candidates(300, 2);
        assert_eq!(cands.len(), 11);
        assert_eq!(cands[3], vec![0, 3]);
        let chosen = select_delta(&data, &cands).unwrap();
        assert!(cands.contains(&chosen));
        let model = fit_ng(&data, None).unwrap();
        assert_eq!(model.plan().deltas(), chosen.as_slice());
        let dup = vec![vec![0, 1], vec![0, 1]];
        assert_eq!(select_delta(&data, &dup).unwrap(), vec![0, 1]);
        assert!(select_delta(&data, &[vec![0, 999]]).is_err());
    }

    #[test]
    fn synthesis_follows_training_dependence() {
        let x: Vec<f64> = (0..400).map(|i| (i as f64 * 0.01).exp()).collect();
        let y: Vec<f64> = x.iter().map(|v| v.ln() * 3.0).collect();
        let data = DataMatrix::from_columns(vec![x, y]).unwrap();
        let model = fit_ng(&data, Some(&[0, 0])).unwrap();
        let z = sample_std_normal(5000, 2, 3);
        let s = ng_synthesize(&model, &z).unwrap();
        assert!(kendall_tau(s.column(0), s.column(1)) > 0.95);
        for c in 0..2 {
            let m = &model.marginals()[c];
            assert!(s.column(c).iter().all(|&v| v >= m.min() && v <= m.max()));
            assert!(ks_two_sample(s.column(c), data.column(c)) < 0.05);
        }
        assert!(ng_synthesize(&model, &sample_std_normal(3, 3, 1)).is_err());
    }

    proptest! {
        #[test]
        fn rerank_round_trip(n in 4usize..60, p in 1usize..4, seed in 0u64..1000) {
            prop_assume!(n > p);
            let m = sample_std_normal(n, p, seed);
            let d = (seed as usize) % (n / p + 1);
            let deltas: Vec<usize> = (0..p).map(|i| if i == 0 { 0 } else { d }).collect();
            let plan = make_rerank_plan(n, p, &deltas).unwrap();
            prop_assert_eq!(unrerank(&rerank(&m, &plan).unwrap(), &plan).unwrap(), m);
        }

        #[test]
        fn inverse_round_trip_with_ties(vals in proptest::collection::vec((-4i32..4, -4i32..4), 6..40)) {
            let data = DataMatrix::from_columns(vec![
                vals.iter().map(|v| v.0 as f64).collect(),
                vals.iter().map(|v| v.1 as f64 * 0.5).collect(),
            ]).unwrap();
            let model = fit_ng(&data, Some(&[0, 1])).unwrap();
            let z = ng_forward(&model, &data).unwrap();
            prop_assert_eq!(ng_inverse_training(&model, &z).unwrap(), data);
        }
    }
}
