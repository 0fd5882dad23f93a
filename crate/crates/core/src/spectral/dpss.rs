//! Discrete prolate spheroidal (Slepian) sequences.
//!
//! The tapers are the eigenvectors of the symmetric tridiagonal matrix that
//! commutes with the time-frequency concentration operator:
//!
//! ```text
//! d[n]   = ((N - 1 - 2n) / 2)^2 * cos(2*pi*W)
//! e[n]   = n * (N - n) / 2          (couples n-1 and n)
//! ```
//!
//! with `W = nw / N`. The `q` largest eigenvalues are isolated by Sturm
//! bisection, eigenvectors come from inverse iteration on a pivoted
//! tridiagonal LU factorisation, and a final modified Gram-Schmidt pass keeps
//! the bank orthonormal to working precision. Concentration ratios are then
//! evaluated against the sinc kernel through the taper autocorrelation.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{invalid, Result};

/// A bank of `q` unit-energy tapers of length `N`, in decreasing order of
/// spectral concentration.
#[derive(Debug, Clone, PartialEq)]
pub struct TaperBank {
    tapers: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
    nw: f64,
}

impl TaperBank {
    /// Wraps a hand-built taper matrix (rows are tapers). No orthogonality is
    /// enforced; eigenvalues are recorded as given.
    pub fn from_parts(tapers: Vec<Vec<f64>>, eigenvalues: Vec<f64>, nw: f64) -> Result<Self> {
        let n = tapers.first().map_or(0, Vec::len);
        if tapers.is_empty() || n == 0 {
            return Err(invalid("taper bank needs at least one non-empty taper"));
        }
        if tapers.iter().any(|t| t.len() != n) {
            return Err(invalid("tapers must share one length"));
        }
        if eigenvalues.len() != tapers.len() {
            return Err(invalid("one eigenvalue per taper required"));
        }
        Ok(Self {
            tapers,
            eigenvalues,
            nw,
        })
    }

    pub fn tapers(&self) -> &[Vec<f64>] {
        &self.tapers
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn nw(&self) -> f64 {
        self.nw
    }

    /// Taper length `N`.
    pub fn len(&self) -> usize {
        self.tapers[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of tapers `q`.
    pub fn count(&self) -> usize {
        self.tapers.len()
    }

    /// Pointwise mean of the tapers. The coherent multitaper average is linear
    /// in the tapers, so it equals a single transform with this window.
    pub fn mean_taper(&self) -> Vec<f64> {
        let q = self.count() as f64;
        let mut mean = vec![0.0; self.len()];
        for taper in &self.tapers {
            for (m, t) in mean.iter_mut().zip(taper) {
                *m += t;
            }
        }
        for m in mean.iter_mut() {
            *m /= q;
        }
        mean
    }
}

/// Slepian taper bank of length `n`, time-bandwidth `nw`, with `q` tapers.
pub fn dpss(n: usize, nw: f64, q: usize) -> Result<TaperBank> {
    if !(nw > 0.0) || !nw.is_finite() {
        return Err(invalid("time-bandwidth product must be positive"));
    }
    if q == 0 {
        return Err(invalid("at least one taper required"));
    }
    if q > n {
        return Err(invalid("more tapers requested than samples"));
    }
    if n == 1 {
        return TaperBank::from_parts(vec![vec![1.0]], vec![1.0], nw);
    }
    let w = nw / n as f64;
    if w >= 0.5 {
        return Err(invalid("half-bandwidth must be below the Nyquist frequency"));
    }

    let cos_w = libm::cos(2.0 * PI * w);
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            let c = (n as f64 - 1.0 - 2.0 * i as f64) / 2.0;
            c * c * cos_w
        })
        .collect();
    // off[i] couples rows i and i + 1
    let off: Vec<f64> = (1..n).map(|i| (i * (n - i)) as f64 / 2.0).collect();

    let mut tapers: Vec<Vec<f64>> = Vec::with_capacity(q);
    for rank in 0..q {
        let lambda = kth_largest_eigenvalue(&diag, &off, rank);
        let mut v = inverse_iteration(&diag, &off, lambda, rank);
        for _ in 0..2 {
            for prev in &tapers {
                let proj = dot(&v, prev);
                for (a, b) in v.iter_mut().zip(prev) {
                    *a -= proj * b;
                }
            }
            normalize(&mut v);
        }
        fix_sign(&mut v, rank);
        tapers.push(v);
    }

    let eigenvalues = tapers.iter().map(|t| concentration(t, w)).collect();
    TaperBank::from_parts(tapers, eigenvalues, nw)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let norm = libm::sqrt(dot(v, v));
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

/// The first taper is oriented so its sum is nonnegative, higher tapers so
/// their first nonzero sample is positive.
fn fix_sign(v: &mut [f64], rank: usize) {
    let flip = if rank == 0 {
        v.iter().sum::<f64>() < 0.0
    } else {
        v.iter().find(|x| **x != 0.0).is_some_and(|x| *x < 0.0)
    };
    if flip {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Number of eigenvalues strictly below `x` (Sturm sequence count).
fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let denom = if q == 0.0 { f64::EPSILON * off[i - 1].abs().max(1.0) } else { q };
        q = diag[i] - x - off[i - 1] * off[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalue of rank `rank` counted from the top (0 = largest).
fn kth_largest_eigenvalue(diag: &[f64], off: &[f64], rank: usize) -> f64 {
    let n = diag.len();
    let target = n - 1 - rank; // ascending index
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    // invariant: count_below(lo) <= target < count_below(hi)
    let pad = (hi - lo).abs() * 1e-12 + 1e-12;
    lo -= pad;
    hi += pad;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(diag, off, mid) > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `(T - shift I) y = b` repeatedly starting from a deterministic
/// vector, returning the normalised iterate.
fn inverse_iteration(diag: &[f64], off: &[f64], shift: f64, rank: usize) -> Vec<f64> {
    let n = diag.len();
    let lu = TridiagLu::factor(diag, off, shift);
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * libm::sin((i as f64 + 1.0) * (rank as f64 + 1.7)))
        .collect();
    normalize(&mut v);
    for _ in 0..4 {
        lu.solve(&mut v);
        normalize(&mut v);
    }
    v
}

/// LU factorisation with partial pivoting of a shifted symmetric tridiagonal
/// matrix, in the layout used by LAPACK's `dgttrf`.
struct TridiagLu {
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    dl: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn factor(diag: &[f64], off: &[f64], shift: f64) -> Self {
        let n = diag.len();
        let scale = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()))
            + off.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        let tiny = f64::EPSILON * scale.max(1.0);
        let mut d: Vec<f64> = diag.iter().map(|x| x - shift).collect();
        let mut dl = off.to_vec();
        let mut du = off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 1 < n - 1 {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        for x in d.iter_mut() {
            if x.abs() < tiny {
                *x = if *x < 0.0 { -tiny } else { tiny };
            }
        }
        Self {
            d,
            du,
            du2,
            dl,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.dl[i] * b[i];
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// Fraction of the taper's energy inside `[-W, W]`:
/// `v^T A v` with `A[n][m] = sin(2*pi*W*(n-m)) / (pi*(n-m))`.
fn concentration(v: &[f64], w: f64) -> f64 {
    let n = v.len();
    let mut total = 2.0 * w * dot(v, v);
    for lag in 1..n {
        let r: f64 = v[..n - lag].iter().zip(&v[lag..]).map(|(a, b)| a * b).sum();
        total += 2.0 * r * libm::sin(2.0 * PI * w * lag as f64) / (PI * lag as f64);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn sign_changes(v: &[f64]) -> usize {
        v.windows(2).filter(|p| p[0] * p[1] < 0.0).count()
    }

    #[test]
    fn gram_matrix_is_identity() {
        let bank = dpss(64, 4.0, 7).unwrap();
        for (i, a) in bank.tapers().iter().enumerate() {
            for (j, b) in bank.tapers().iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot(a, b) - want).abs() < 1e-8, "({i},{j})");
            }
        }
    }

    #[test]
    fn sign_change_counts_follow_order() {
        let bank = dpss(128, 3.0, 5).unwrap();
        for (l, taper) in bank.tapers().iter().enumerate() {
            assert_eq!(sign_changes(taper), l, "taper {l}");
        }
        assert!(bank.tapers()[0].iter().sum::<f64>() > 0.0);
    }

    #[test]
    fn single_taper_has_unit_energy() {
        for n in [1, 2, 17, 256] {
            let bank = dpss(n, 1.0_f64.min(n as f64 / 4.0).max(0.1), 1).unwrap();
            let e: f64 = bank.tapers()[0].iter().map(|x| x * x).sum();
            assert!((e - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn concentrations_decrease_and_lie_in_unit_interval() {
        let bank = dpss(256, 4.0, 7).unwrap();
        let ev = bank.eigenvalues();
        for pair in ev.windows(2) {
            assert!(pair[0] > pair[1]);
        }
        assert!(ev.iter().all(|&l| l > 0.0 && l < 1.0 + 1e-12));
        // first Slepian taper for NW = 4 concentrates essentially all energy
        assert!(ev[0] > 0.999_999);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(dpss(8, 0.0, 1).is_err());
        assert!(dpss(8, 2.0, 9).is_err());
        assert!(dpss(8, 2.0, 0).is_err());
    }
}
