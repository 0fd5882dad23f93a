//! Distribution tails needed by the rank tests.

use core::f64::consts::{PI, SQRT_2};

const MAX_ITER: usize = 1000;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// Regularised lower incomplete gamma by its power series (`x < a + 1`).
fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut sum = 1.0 / a;
    let mut term = sum;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * libm::exp(-x + a * libm::log(x) - libm::lgamma(a))
}

/// Regularised upper incomplete gamma by Lentz's continued fraction
/// (`x >= a + 1`).
fn gamma_q_fraction(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    libm::exp(-x + a * libm::log(x) - libm::lgamma(a)) * h
}

/// `Q(a, x) = Gamma(a, x) / Gamma(a)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        (1.0 - gamma_p_series(a, x)).clamp(0.0, 1.0)
    } else {
        gamma_q_fraction(a, x).clamp(0.0, 1.0)
    }
}

/// Upper tail of the chi-square distribution with `df` degrees of freedom.
pub fn chi2_sf(x: f64, df: f64) -> f64 {
    gamma_q(0.5 * df, 0.5 * x)
}

pub fn normal_pdf(z: f64) -> f64 {
    libm::exp(-0.5 * z * z) / libm::sqrt(2.0 * PI)
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / SQRT_2)
}

pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / SQRT_2)
}

/// `P(R <= q)` for the range `R` of `k` independent standard normals (the
/// studentized range with infinite degrees of freedom):
///
/// `k * integral phi(z) * (Phi(z) - Phi(z - q))^(k-1) dz`
///
/// evaluated by composite Simpson quadrature over `[-12, 12]`.
pub fn studentized_range_cdf(q: f64, k: usize) -> f64 {
    if q <= 0.0 || k < 2 {
        return 0.0;
    }
    const PANELS: usize = 2400;
    let (lo, hi) = (-12.0, 12.0);
    let h = (hi - lo) / PANELS as f64;
    let f = |z: f64| {
        let inner = normal_cdf(z) - normal_cdf(z - q);
        normal_pdf(z) * libm::pow(inner.max(0.0), (k - 1) as f64)
    };
    let mut acc = f(lo) + f(hi);
    for i in 1..PANELS {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + i as f64 * h);
    }
    (k as f64 * acc * h / 3.0).clamp(0.0, 1.0)
}

pub fn studentized_range_sf(q: f64, k: usize) -> f64 {
    (1.0 - studentized_range_cdf(q, k)).clamp(0.0, 1.0)
}

/// Upper `alpha` quantile of the infinite-df studentized range, by bisection.
pub fn studentized_range_critical(alpha: f64, k: usize) -> f64 {
    let (mut lo, mut hi) = (0.0, 20.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if studentized_range_sf(mid, k) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
