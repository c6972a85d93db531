//! Independent oracles shared by the integration tests. Nothing here calls
//! into the counting or estimation code under test.

#![allow(dead_code)]

use std::f64::consts::PI;

use qrenyi::SeriesSample;

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// O(n²) close-pair count.
pub fn brute_pairs(s: &SeriesSample, eps: f64) -> u64 {
    let mut c = 0;
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            if sq_dist(s.point(i), s.point(j)) <= eps * eps {
                c += 1;
            }
        }
    }
    c
}

/// O(n³) enumeration of lag-`h` triples over the index set with exclusions
/// `{i, i + max(h, 1)}` (0-based `i < n - h - 1`).
pub fn brute_triples(s: &SeriesSample, h: usize, eps: f64) -> u64 {
    let n = s.len();
    let partner = h.max(1);
    let close = |a: usize, b: usize| sq_dist(s.point(a), s.point(b)) <= eps * eps;
    let mut c = 0;
    for i in 0..n - h - 1 {
        for j in 0..n {
            if j == i || j == i + partner || !close(i, j) {
                continue;
            }
            for k in 0..n {
                if k == i || k == i + partner || k == j {
                    continue;
                }
                if close(i + h, k) {
                    c += 1;
                }
            }
        }
    }
    c
}

/// Composite Simpson rule on `[a, b]` with `m` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, m: usize) -> f64 {
    let m = m + m % 2;
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// Standard normal density.
pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `E φ(X) φ(Y)` for a standard bivariate normal pair with correlation `rho`,
/// by 2-D Simpson quadrature over `[-9, 9]²`.
pub fn bivariate_phi_product(rho: f64) -> f64 {
    let c = 1.0 / (2.0 * PI * (1.0 - rho * rho).sqrt());
    let joint = |x: f64, y: f64| c * (-(x * x - 2.0 * rho * x * y + y * y) / (2.0 * (1.0 - rho * rho))).exp();
    simpson(
        |x| simpson(|y| phi(x) * phi(y) * joint(x, y), -9.0, 9.0, 600),
        -9.0,
        9.0,
        600,
    )
}

/// Long-run variance of `φ(X_t)` for a unit-variance Gaussian MA path with
/// lag correlations `rhos[h-1]`, `h = 1..=m`.
pub fn gaussian_zeta_oracle(rhos: &[f64]) -> f64 {
    let q2 = simpson(|x| phi(x) * phi(x), -12.0, 12.0, 4000);
    let q3 = simpson(|x| phi(x).powi(3), -12.0, 12.0, 4000);
    let mut z = q3 - q2 * q2;
    for &rho in rhos {
        z += 2.0 * (bivariate_phi_product(rho) - q2 * q2);
    }
    z
}

/// Equal-weight MA(2): θ = (1/√3, 1/√3, 1/√3), lag correlations 2/3 and 1/3.
pub fn ma2_theta() -> Vec<f64> {
    vec![1.0 / 3f64.sqrt(); 3]
}

pub fn ma2_zeta_oracle() -> f64 {
    gaussian_zeta_oracle(&[2.0 / 3.0, 1.0 / 3.0])
}

pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0))
}

/// Sample autocovariance at `lag`.
pub fn autocov(xs: &[f64], lag: usize) -> f64 {
    let n = xs.len();
    let m = xs.iter().sum::<f64>() / n as f64;
    (0..n - lag).map(|t| (xs[t] - m) * (xs[t + lag] - m)).sum::<f64>() / n as f64
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
