//! Rank representation of a sample and its empirical copula.

use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};

/// Column-wise ranks `1..=n` of a sample, ties broken by row index, together
/// with the inverse permutation (row holding each rank).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<u32>>", into = "Vec<Vec<u32>>")]
pub struct RankMatrix {
    n: usize,
    p: usize,
    /// Column-major: `ranks[c * n + row]`.
    ranks: Vec<u32>,
    /// Column-major: `rows_by_rank[c * n + rank - 1]`.
    rows_by_rank: Vec<u32>,
}

impl RankMatrix {
    pub fn from_data(data: &DataMatrix) -> Result<Self> {
        let n = data.nrows();
        let p = data.ncols();
        if n < 2 || p == 0 {
            return Err(Error::Input(format!("rank matrix needs n >= 2, p >= 1, got {n}x{p}")));
        }
        if n > u32::MAX as usize {
            return Err(Error::Input(format!("too many rows: {n}")));
        }
        data.ensure_finite()?;
        let mut ranks = vec![0u32; n * p];
        let mut rows_by_rank = vec![0u32; n * p];
        let mut order: Vec<usize> = Vec::with_capacity(n);
        for (c, col) in data.columns().enumerate() {
            order.clear();
            order.extend(0..n);
            order.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
            for (k, &row) in order.iter().enumerate() {
                ranks[c * n + row] = (k + 1) as u32;
                rows_by_rank[c * n + k] = row as u32;
            }
        }
        Ok(Self { n, p, ranks, rows_by_rank })
    }

    /// Builds from per-column rank vectors; each must be a permutation of
    /// `1..=n`.
    pub fn from_columns(columns: Vec<Vec<u32>>) -> Result<Self> {
        let p = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        if n < 2 || p == 0 {
            return Err(Error::Input(format!("rank matrix needs n >= 2, p >= 1, got {n}x{p}")));
        }
        let mut ranks = Vec::with_capacity(n * p);
        let mut rows_by_rank = vec![u32::MAX; n * p];
        for (c, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::Input(format!(
                    "rank column {c} has {} entries, expected {n}",
                    col.len()
                )));
            }
            for (row, &r) in col.iter().enumerate() {
                let slot = (r as usize).wrapping_sub(1);
                if slot >= n || rows_by_rank[c * n + slot] != u32::MAX {
                    return Err(Error::Input(format!(
                        "rank column {c} is not a permutation of 1..={n} (row {row}: {r})"
                    )));
                }
                rows_by_rank[c * n + slot] = row as u32;
            }
            ranks.extend_from_slice(col);
        }
        Ok(Self { n, p, ranks, rows_by_rank })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn rank(&self, row: usize, col: usize) -> u32 {
        self.ranks[col * self.n + row]
    }

    pub fn column(&self, col: usize) -> &[u32] {
        &self.ranks[col * self.n..(col + 1) * self.n]
    }

    /// Row whose entry in `col` has rank `rank` (1-based).
    pub fn row_with_rank(&self, col: usize, rank: usize) -> usize {
        self.rows_by_rank[col * self.n + rank - 1] as usize
    }
}

impl TryFrom<Vec<Vec<u32>>> for RankMatrix {
    type Error = Error;

    fn try_from(columns: Vec<Vec<u32>>) -> Result<Self> {
        Self::from_columns(columns)
    }
}

impl From<RankMatrix> for Vec<Vec<u32>> {
    fn from(r: RankMatrix) -> Self {
        r.ranks.chunks(r.n).map(<[u32]>::to_vec).collect()
    }
}

pub fn rank_matrix(data: &DataMatrix) -> Result<RankMatrix> {
    RankMatrix::from_data(data)
}

/// Rank threshold `⌈u n⌉`; products within 1e-9 of an integer are snapped
/// so grid points `k / n` land on cell `k`.
fn cell(u: f64, n: usize) -> usize {
    let x = u * n as f64;
    let r = x.round();
    let c = if (x - r).abs() < 1e-9 { r } else { x.ceil() };
    c.clamp(0.0, n as f64) as usize
}

fn check_unit(u: &[f64], open: bool) -> Result<()> {
    for (i, &v) in u.iter().enumerate() {
        let ok = if open { v > 0.0 && v < 1.0 } else { (0.0..=1.0).contains(&v) };
        if !ok {
            return Err(Error::Domain(format!("coordinate {i} = {v} outside the unit interval")));
        }
    }
    Ok(())
}

/// `Ĉ(u) = (1/n) #{l : rank_{l,i} <= ⌈u_i n⌉ for all i}`.
pub fn empirical_copula(ranks: &RankMatrix, u: &[f64]) -> Result<f64> {
    if u.len() != ranks.p() {
        return Err(Error::Dimension(format!(
            "copula has dimension {}, point has {}",
            ranks.p(),
            u.len()
        )));
    }
    check_unit(u, false)?;
    let n = ranks.n();
    let thresholds: Vec<u32> = u.iter().map(|&v| cell(v, n) as u32).collect();
    let count = (0..n)
        .filter(|&row| (0..ranks.p()).all(|c| ranks.rank(row, c) <= thresholds[c]))
        .count();
    Ok(count as f64 / n as f64)
}

/// The diagonal `t -> Ĉ(t, …, t)` on `grid` equally spaced points of
/// `[0, 1]`.
pub fn copula_diagonal(ranks: &RankMatrix, grid: usize) -> Result<Vec<(f64, f64)>> {
    if grid < 2 {
        return Err(Error::Input(format!("diagonal grid needs at least 2 points, got {grid}")));
    }
    let n = ranks.n();
    let mut row_max: Vec<u32> = (0..n)
        .map(|row| (0..ranks.p()).map(|c| ranks.rank(row, c)).max().unwrap_or(0))
        .collect();
    row_max.sort_unstable();
    Ok((0..grid)
        .map(|k| {
            let t = k as f64 / (grid - 1) as f64;
            let th = cell(t, n) as u32;
            let count = row_max.partition_point(|&m| m <= th);
            (t, count as f64 / n as f64)
        })
        .collect())
}

/// Draws from the checkerboard copula of `ranks` driven by `u ∈ (0,1)^p`.
///
/// Coordinate `pivot` selects the training row whose rank in that column is
/// `⌈u_pivot n⌉`; every other coordinate is spread uniformly inside that
/// row's rank cell, `v_i = (rank_i - 1 + u_i) / n`.
pub fn checkerboard_sample(ranks: &RankMatrix, u: &[f64], pivot: usize) -> Result<Vec<f64>> {
    let p = ranks.p();
    if u.len() != p {
        return Err(Error::Dimension(format!("copula has dimension {p}, point has {}", u.len())));
    }
    if pivot >= p {
        return Err(Error::Input(format!("pivot column {pivot} out of range for p = {p}")));
    }
    check_unit(u, true)?;
    let n = ranks.n();
    let k = cell(u[pivot], n).clamp(1, n);
    let row = ranks.row_with_rank(pivot, k);
    Ok((0..p)
        .map(|c| {
            if c == pivot {
                u[c]
            } else {
                (ranks.rank(row, c) as f64 - 1.0 + u[c]) / n as f64
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_copula, stream, CopulaSpec, CorrelationMatrix};
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn ranks_and_ties() {
        let d = DataMatrix::from_columns(vec![vec![0.3, 0.1, 0.2], vec![5.0, 5.0, 1.0]]).unwrap();
        let r = rank_matrix(&d).unwrap();
        assert_eq!(r.column(0), &[3, 1, 2]);
        assert_eq!(r.column(1), &[2, 3, 1]);
        assert_eq!(r.row_with_rank(0, 1), 1);
        assert_eq!(r.row_with_rank(1, 3), 1);
        let bad = DataMatrix::from_columns(vec![vec![1.0, f64::NAN]]).unwrap();
        assert!(rank_matrix(&bad).is_err());
        assert!(RankMatrix::from_columns(vec![vec![1, 1]]).is_err());
        assert!(RankMatrix::from_columns(vec![vec![1, 3]]).is_err());
    }

    #[test]
    fn copula_on_comonotone_sample() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let d = DataMatrix::from_columns(vec![x.clone(), x]).unwrap();
        let r = rank_matrix(&d).unwrap();
        assert_eq!(empirical_copula(&r, &[0.3, 0.7]).unwrap(), 0.3);
        assert_eq!(empirical_copula(&r, &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(empirical_copula(&r, &[0.0, 0.5]).unwrap(), 0.0);
        assert!(empirical_copula(&r, &[1.2, 0.5]).is_err());
        for (t, c) in copula_diagonal(&r, 11).unwrap() {
            assert!((c - t).abs() < 1e-12);
        }
    }

    #[test]
    fn checkerboard_comonotone_and_bounds() {
        let x: Vec<f64> = (0..50).map(|i| (i as f64).sqrt()).collect();
        let d = DataMatrix::from_columns(vec![x.clone(), x.clone(), x]).unwrap();
        let r = rank_matrix(&d).unwrap();
        let mut rng = stream(1);
        for _ in 0..1000 {
            let u: Vec<f64> = (0..3).map(|_| rng.random_range(1e-9..1.0 - 1e-9)).collect();
            let v = checkerboard_sample(&r, &u, 0).unwrap();
            assert_eq!(v[0], u[0]);
            for &vi in &v[1..] {
                assert!(vi > 0.0 && vi < 1.0);
                assert!((vi - u[0]).abs() <= 1.0 / 50.0 + 1e-12);
            }
        }
        assert!(checkerboard_sample(&r, &[0.0, 0.5, 0.5], 0).is_err());
        assert!(checkerboard_sample(&r, &[0.5, 0.5, 0.5], 3).is_err());
    }

    #[test]
    fn checkerboard_reproduces_empirical_copula() {
        let spec = CopulaSpec::Gaussian(CorrelationMatrix::bivariate(0.6).unwrap());
        let train = sample_copula(&spec, 300, 4).unwrap();
        let r = rank_matrix(&train).unwrap();
        let mut rng = stream(5);
        let m = 100_000;
        let mut cols = vec![Vec::with_capacity(m), Vec::with_capacity(m)];
        for _ in 0..m {
            let u = [rng.random_range(1e-12..1.0), rng.random_range(1e-12..1.0)];
            let v = checkerboard_sample(&r, &u, 0).unwrap();
            cols[0].push(v[0]);
            cols[1].push(v[1]);
        }
        let draws = rank_matrix(&DataMatrix::from_columns(cols).unwrap()).unwrap();
        let mut gap: f64 = 0.0;
        for i in 0..=10 {
            for j in 0..=10 {
                let u = [i as f64 / 10.0, j as f64 / 10.0];
                let a = empirical_copula(&r, &u).unwrap();
                let b = empirical_copula(&draws, &u).unwrap();
                gap = gap.max((a - b).abs());
            }
        }
        assert!(gap < 0.02, "sup gap {gap}");
    }

    proptest! {
        #[test]
        fn ranks_are_permutations(cols in proptest::collection::vec(proptest::collection::vec(-3i32..3, 12), 1..4)) {
            let d = DataMatrix::from_columns(cols.iter().map(|c| c.iter().map(|&v| v as f64).collect()).collect()).unwrap();
            let r = rank_matrix(&d).unwrap();
            for c in 0..r.p() {
                let mut s = r.column(c).to_vec();
                s.sort_unstable();
                prop_assert_eq!(s, (1..=12).collect::<Vec<u32>>());
                for k in 1..=12 {
                    prop_assert_eq!(r.rank(r.row_with_rank(c, k), c) as usize, k);
                }
            }
            let round: Vec<Vec<u32>> = r.clone().into();
            prop_assert_eq!(RankMatrix::from_columns(round).unwrap(), r);
        }

        #[test]
        fn copula_is_monotone_with_uniform_margins(seed in 0u64..40, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let d = sample_copula(&CopulaSpec::Clayton { theta: 2.0, dim: 2 }, 40, seed).unwrap();
            let r = rank_matrix(&d).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(empirical_copula(&r, &[lo, 0.5]).unwrap() <= empirical_copula(&r, &[hi, 0.5]).unwrap());
            let m = empirical_copula(&r, &[a, 1.0]).unwrap();
            prop_assert!((m - (a * 40.0 - 1e-9).ceil().max(0.0) / 40.0).abs() < 1e-12);
        }
    }
}
