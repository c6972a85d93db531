//! Maximum-entropy goodness-of-fit statistic.
//!
//! Among densities with covariance `Σ` the multivariate Pearson type II law
//! maximizes the quadratic Rényi entropy, attaining `e^{h2} = K_d |Σ|^{1/2}`.
//! The statistic `|Σ_n|^{-1/2} exp(H̃_n)` is therefore close to `K_d` under
//! that law and below it otherwise.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{clamped_entropy, estimate_q2};
use crate::geometry::{ln_gamma_half, MAX_DIM};
use crate::sample::SeriesSample;

/// Determinants at or below this are treated as singular.
pub const SINGULAR_DET: f64 = 1e-300;

/// Default relative shortfall `δ` below which the verdict rejects.
pub const DEFAULT_DELTA: f64 = 0.1;

/// `K_d = Γ(3 + d/2) π^{d/2} / (2 Γ(2 + d/2)² β^{d/2})` with `β = 1/(4 + d)`.
pub fn k_d(d: usize) -> Result<f64> {
    if d == 0 || d > MAX_DIM {
        return Err(Error::Domain(format!("dimension must be in 1..={MAX_DIM}, got {d}")));
    }
    let half = d as f64 / 2.0;
    let d32 = d as u32;
    let ln_k = ln_gamma_half(6 + d32) + half * PI.ln() - 2f64.ln() - 2.0 * ln_gamma_half(4 + d32)
        + half * ((4 + d) as f64).ln();
    Ok(ln_k.exp())
}

/// Cholesky factor and determinant (`Π L_ii²`) of a symmetric matrix.
pub fn cholesky_det(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::SingularCovariance("matrix is not positive definite".into()))?;
    let l = chol.l();
    let det: f64 = l.diagonal().iter().map(|x| x * x).product();
    if !(det > SINGULAR_DET) {
        return Err(Error::SingularCovariance(format!(
            "determinant {det:e} is numerically zero"
        )));
    }
    Ok((l, det))
}

/// Mean vector and unbiased covariance matrix.
///
/// Fails with `SingularCovariance` when `n < d + 1` or the matrix is not
/// numerically positive definite.
pub fn sample_covariance(sample: &SeriesSample) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = sample.len();
    let d = sample.dim();
    if n < 2 {
        return Err(Error::TooSmall {
            what: "sample covariance",
            needed: 2,
            got: n,
        });
    }
    let mut mean = vec![0.0; d];
    for p in sample.points() {
        for (m, x) in mean.iter_mut().zip(p) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for p in sample.points() {
        for i in 0..d {
            let di = p[i] - mean[i];
            for j in 0..=i {
                cov[(i, j)] += di * (p[j] - mean[j]);
            }
        }
    }
    for i in 0..d {
        for j in 0..=i {
            let v = cov[(i, j)] / (n - 1) as f64;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    if n < d + 1 {
        return Err(Error::SingularCovariance(format!(
            "{n} points cannot span {d} dimensions"
        )));
    }
    cholesky_det(&cov)?;
    Ok((mean, cov))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofResult {
    pub statistic: f64,
    pub k_d: f64,
    pub ratio: f64,
    pub n: usize,
    pub d: usize,
    pub eps: f64,
    pub h2_hat: f64,
    pub det_sigma_n: f64,
    /// The entropy estimate hit its `ln n` ceiling; the ratio is then unreliable.
    pub clamp_active: bool,
}

impl GofResult {
    /// Rejects the maximum-entropy hypothesis when `ratio < 1 - delta`.
    pub fn rejects(&self, delta: f64) -> bool {
        self.ratio < 1.0 - delta
    }
}

/// `|Σ_n|^{-1/2} exp(H̃_n)` and its ratio to `K_d`.
pub fn gof_statistic(sample: &SeriesSample, eps: f64) -> Result<GofResult> {
    let n = sample.len();
    let d = sample.dim();
    let (_, cov) = sample_covariance(sample)?;
    let (_, det) = cholesky_det(&cov)?;
    let (_, q2) = estimate_q2(sample, eps)?;
    let floor = 1.0 / n as f64;
    let h2_hat = clamped_entropy(q2, n);
    let statistic = h2_hat.exp() / det.sqrt();
    let k = k_d(d)?;
    Ok(GofResult {
        statistic,
        k_d: k,
        ratio: statistic / k,
        n,
        d,
        eps,
        h2_hat,
        det_sigma_n: det,
        clamp_active: q2 < floor,
    })
}
