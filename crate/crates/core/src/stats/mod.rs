//! Rank-based hypothesis tests and their post-hoc pairwise comparisons.
//!
//! Ties always receive midranks and every statistic carries the standard tie
//! correction. All tests are two-sided.

mod battery;
pub mod special;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};

pub use battery::{run_battery, AccuracyTable, BatteryEntry, BatteryReport, CellKey, Grouping};

/// Significance threshold used for all flags.
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    /// Degrees of freedom of the chi-square reference.
    pub df: usize,
    /// Total observations (Kruskal-Wallis) or blocks (Friedman).
    pub n: usize,
    /// Set when every observation is tied and the statistic is undefined; the
    /// result is then reported as statistic 0, p 1.
    pub degenerate: bool,
}

impl TestResult {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Adjustment {
    #[default]
    Bonferroni,
    Holm,
}

/// Symmetric table of pairwise comparisons between named groups.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMatrix {
    pub names: Vec<String>,
    /// Test statistic per pair (`z` for Dunn, `q` for Nemenyi), row-major
    /// `k x k`, antisymmetric in sign for Dunn.
    pub statistic: Vec<f64>,
    pub p_raw: Vec<f64>,
    /// Adjusted p-values; the diagonal holds 1.
    pub p_adjusted: Vec<f64>,
}

impl PairwiseMatrix {
    pub fn k(&self) -> usize {
        self.names.len()
    }

    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.p_adjusted[i * self.k() + j]
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.k() {
            return Err(Error::LengthMismatch {
                expected: self.k(),
                found: names.len(),
            });
        }
        self.names = names;
        Ok(self)
    }

    /// Upper-triangle pairs `(i, j, p_adjusted)` with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let k = self.k();
        (0..k).flat_map(move |i| (i + 1..k).map(move |j| (i, j, self.p(i, j))))
    }

    fn from_upper(k: usize, stats: &[(usize, usize, f64, f64)], adjustment: Adjustment) -> Self {
        let m = stats.len();
        let raw: Vec<f64> = stats.iter().map(|s| s.3).collect();
        let adjusted = adjust(&raw, adjustment);
        let mut statistic = vec![0.0; k * k];
        let mut p_raw = vec![1.0; k * k];
        let mut p_adjusted = vec![1.0; k * k];
        for (idx, &(i, j, stat, p)) in stats.iter().enumerate() {
            statistic[i * k + j] = stat;
            statistic[j * k + i] = -stat;
            p_raw[i * k + j] = p;
            p_raw[j * k + i] = p;
            p_adjusted[i * k + j] = adjusted[idx];
            p_adjusted[j * k + i] = adjusted[idx];
        }
        debug_assert_eq!(m, k * (k - 1) / 2);
        Self {
            names: (0..k).map(|i| format!("g{i}")).collect(),
            statistic,
            p_raw,
            p_adjusted,
        }
    }
}

/// Family-wise adjustment of `m` raw p-values, capped at 1.
pub fn adjust(raw: &[f64], adjustment: Adjustment) -> Vec<f64> {
    let m = raw.len() as f64;
    match adjustment {
        Adjustment::Bonferroni => raw.iter().map(|p| (p * m).min(1.0)).collect(),
        Adjustment::Holm => {
            let mut order: Vec<usize> = (0..raw.len()).collect();
            order.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]));
            let mut out = vec![0.0; raw.len()];
            let mut running = 0.0f64;
            for (rank, &i) in order.iter().enumerate() {
                running = running.max(((m - rank as f64) * raw[i]).min(1.0));
                out[i] = running;
            }
            out
        }
    }
}

/// Midranks (1-based) and the tie term `sum(t^3 - t)` over tie groups.
pub fn midranks(values: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        let t = (j - i + 1) as f64;
        ties += t * t * t - t;
        i = j + 1;
    }
    (ranks, ties)
}

struct PooledRanks {
    mean_ranks: Vec<f64>,
    sizes: Vec<usize>,
    n: usize,
    ties: f64,
}

fn pooled_ranks<G: AsRef<[f64]>>(groups: &[G]) -> Result<PooledRanks> {
    if groups.len() < 2 {
        return Err(invalid("at least two groups required"));
    }
    if groups.iter().any(|g| g.as_ref().is_empty()) {
        return Err(Error::Insufficient("every group needs at least one observation".into()));
    }
    let pooled: Vec<f64> = groups.iter().flat_map(|g| g.as_ref().iter().copied()).collect();
    if pooled.len() < 3 {
        return Err(Error::Insufficient("at least three observations required".into()));
    }
    if pooled.iter().any(|v| v.is_nan()) {
        return Err(Error::NonFinite);
    }
    let (ranks, ties) = midranks(&pooled);
    let mut mean_ranks = Vec::with_capacity(groups.len());
    let mut sizes = Vec::with_capacity(groups.len());
    let mut at = 0;
    for g in groups {
        let len = g.as_ref().len();
        mean_ranks.push(ranks[at..at + len].iter().sum::<f64>() / len as f64);
        sizes.push(len);
        at += len;
    }
    Ok(PooledRanks {
        mean_ranks,
        sizes,
        n: pooled.len(),
        ties,
    })
}

/// Kruskal-Wallis `H` with tie correction, referred to chi-square on `k - 1`
/// degrees of freedom.
pub fn kruskal_wallis<G: AsRef<[f64]>>(groups: &[G]) -> Result<TestResult> {
    let pr = pooled_ranks(groups)?;
    let n = pr.n as f64;
    let df = groups.len() - 1;
    let correction = 1.0 - pr.ties / (n * n * n - n);
    if correction <= 0.0 {
        return Ok(TestResult {
            statistic: 0.0,
            p_value: 1.0,
            df,
            n: pr.n,
            degenerate: true,
        });
    }
    let sum: f64 = pr
        .mean_ranks
        .iter()
        .zip(&pr.sizes)
        .map(|(r, &s)| s as f64 * r * r)
        .sum();
    let h = (12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0)) / correction;
    let h = h.max(0.0);
    Ok(TestResult {
        statistic: h,
        p_value: special::chi2_sf(h, df as f64),
        df,
        n: pr.n,
        degenerate: false,
    })
}

/// Dunn's pairwise comparisons of mean ranks after Kruskal-Wallis:
///
/// `z = (Rbar_i - Rbar_j) / sqrt((N(N+1)/12 - T/(12(N-1))) (1/n_i + 1/n_j))`
///
/// with `T` the tie term, two-sided normal p-values and family-wise
/// adjustment over `k(k-1)/2` pairs.
pub fn dunn<G: AsRef<[f64]>>(groups: &[G], adjustment: Adjustment) -> Result<PairwiseMatrix> {
    let pr = pooled_ranks(groups)?;
    let n = pr.n as f64;
    let k = groups.len();
    let base = n * (n + 1.0) / 12.0 - pr.ties / (12.0 * (n - 1.0));
    let mut stats = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            let se = libm::sqrt(base * (1.0 / pr.sizes[i] as f64 + 1.0 / pr.sizes[j] as f64));
            let diff = pr.mean_ranks[i] - pr.mean_ranks[j];
            let (z, p) = if se > 0.0 {
                let z = diff / se;
                (z, (2.0 * special::normal_sf(z.abs())).min(1.0))
            } else {
                (0.0, 1.0)
            };
            stats.push((i, j, z, p));
        }
    }
    Ok(PairwiseMatrix::from_upper(k, &stats, adjustment))
}

struct BlockRanks {
    mean_ranks: Vec<f64>,
    b: usize,
    k: usize,
    ties: f64,
}

fn block_ranks<B: AsRef<[f64]>>(blocks: &[B]) -> Result<BlockRanks> {
    let b = blocks.len();
    if b < 2 {
        return Err(Error::Insufficient("at least two blocks required".into()));
    }
    let k = blocks[0].as_ref().len();
    if k < 2 {
        return Err(invalid("at least two treatments required"));
    }
    let mut sums = vec![0.0; k];
    let mut ties = 0.0;
    for (bi, block) in blocks.iter().enumerate() {
        let row = block.as_ref();
        if row.len() != k || row.iter().any(|v| v.is_nan()) {
            return Err(Error::Insufficient(format!("block {bi} has missing cells")));
        }
        let (ranks, t) = midranks(row);
        ties += t;
        for (s, r) in sums.iter_mut().zip(&ranks) {
            *s += r;
        }
    }
    Ok(BlockRanks {
        mean_ranks: sums.into_iter().map(|s| s / b as f64).collect(),
        b,
        k,
        ties,
    })
}

/// Friedman's `chi2_F = 12b/(k(k+1)) sum_j (Rbar_j - (k+1)/2)^2`, divided by
/// `1 - T / (b (k^3 - k))`, on `k - 1` degrees of freedom. `blocks` is
/// `b x k` (one row per block).
pub fn friedman<B: AsRef<[f64]>>(blocks: &[B]) -> Result<TestResult> {
    let br = block_ranks(blocks)?;
    let (b, k) = (br.b as f64, br.k as f64);
    let df = br.k - 1;
    let correction = 1.0 - br.ties / (b * (k * k * k - k));
    if correction <= 1e-12 {
        return Ok(TestResult {
            statistic: 0.0,
            p_value: 1.0,
            df,
            n: br.b,
            degenerate: true,
        });
    }
    let centre = (k + 1.0) / 2.0;
    let ss: f64 = br.mean_ranks.iter().map(|r| (r - centre) * (r - centre)).sum();
    let stat = (12.0 * b / (k * (k + 1.0)) * ss / correction).max(0.0);
    Ok(TestResult {
        statistic: stat,
        p_value: special::chi2_sf(stat, df as f64),
        df,
        n: br.b,
        degenerate: false,
    })
}

/// Nemenyi pairwise comparisons after Friedman:
/// `q = |Rbar_i - Rbar_j| / sqrt(k(k+1)/(6b))`, `p = P(R > q sqrt(2))` for the
/// range of `k` standard normals. These p-values already control the
/// family-wise rate, so raw and adjusted coincide.
pub fn nemenyi<B: AsRef<[f64]>>(blocks: &[B]) -> Result<PairwiseMatrix> {
    let br = block_ranks(blocks)?;
    let (b, k) = (br.b as f64, br.k);
    let se = libm::sqrt(k as f64 * (k as f64 + 1.0) / (6.0 * b));
    let mut stats = Vec::with_capacity(k * (k - 1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            let q = (br.mean_ranks[i] - br.mean_ranks[j]) / se;
            let p = if q == 0.0 {
                1.0
            } else {
                special::studentized_range_sf(q.abs() * core::f64::consts::SQRT_2, k)
            };
            stats.push((i, j, q, p));
        }
    }
    let mut m = PairwiseMatrix::from_upper(k, &stats, Adjustment::Bonferroni);
    m.p_adjusted = m.p_raw.clone();
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midranks_with_ties() {
        let (r, t) = midranks(&[3.0, 1.0, 3.0, 2.0]);
        assert_eq!(r, vec![3.5, 1.0, 3.5, 2.0]);
        assert_eq!(t, 6.0);
    }

    #[test]
    fn constant_groups_are_degenerate() {
        let g = [vec![2.0; 4], vec![2.0; 4], vec![2.0; 4]];
        let r = kruskal_wallis(&g).unwrap();
        assert_eq!((r.statistic, r.p_value, r.degenerate), (0.0, 1.0, true));
        let d = dunn(&g, Adjustment::Bonferroni).unwrap();
        assert!(d.p_adjusted.iter().all(|&p| p == 1.0));
    }

    #[test]
    fn separated_triplets() {
        let g = [vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![7.0, 8.0, 9.0]];
        let r = kruskal_wallis(&g).unwrap();
        // R = 6, 15, 24; H = 12/90 * (36 + 225 + 576)/3 - 30 = 7.2
        assert!((r.statistic - 7.2).abs() < 1e-12);
        assert_eq!(r.df, 2);
    }

    #[test]
    fn kruskal_argument_errors() {
        assert!(kruskal_wallis(&[vec![1.0, 2.0, 3.0]]).is_err());
        assert!(kruskal_wallis(&[vec![1.0], vec![]]).is_err());
        assert!(kruskal_wallis(&[vec![1.0], vec![2.0]]).is_err());
    }

    #[test]
    fn holm_is_step_down() {
        let adj = adjust(&[0.01, 0.04, 0.03], Adjustment::Holm);
        assert_eq!(adj, vec![0.03, 0.06, 0.06]);
        let bon = adjust(&[0.01, 0.5, 0.03], Adjustment::Bonferroni);
        assert_eq!(bon, vec![0.03, 1.0, 0.09]);
    }

    #[test]
    fn friedman_identical_treatments() {
        let blocks = vec![vec![0.9; 3]; 10];
        let r = friedman(&blocks).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
        let m = nemenyi(&blocks).unwrap();
        assert!(m.p_adjusted.iter().all(|&p| p == 1.0));
    }

    #[test]
    fn friedman_errors() {
        assert!(friedman(&[vec![1.0, 2.0]]).is_err());
        assert!(friedman(&[vec![1.0], vec![2.0]]).is_err());
        assert!(friedman(&[vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(friedman(&[vec![1.0, 2.0], vec![1.0, f64::NAN]]).is_err());
    }

    #[test]
    fn monotone_blocks_order_nemenyi() {
        let blocks: Vec<Vec<f64>> = (0..10)
            .map(|b| vec![b as f64, b as f64 + 1.0, b as f64 + 2.0])
            .collect();
        let r = friedman(&blocks).unwrap();
        assert!((r.statistic - 20.0).abs() < 1e-12);
        let m = nemenyi(&blocks).unwrap();
        let extreme = m.p(0, 2);
        assert!(extreme < m.p(0, 1) && extreme < m.p(1, 2));
    }
}
