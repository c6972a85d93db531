//! Limit-law approximations and confidence intervals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::EstimateReport;
use crate::geometry::{ball_volume, unit_ball_volume};
use crate::paircount::min_interpoint_distance;
use crate::sample::SeriesSample;
use crate::special::{exp1_quantile, normal_quantile};

/// Poisson law `Po(μ_n)` approximating the ε-close pair count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoissonApprox {
    pub mu_n: f64,
    pub p_zero: f64,
}

impl PoissonApprox {
    pub fn new(mu_n: f64) -> Result<Self> {
        if !(mu_n >= 0.0) || !mu_n.is_finite() {
            return Err(Error::Domain(format!(
                "Poisson mean must be finite and >= 0, got {mu_n}"
            )));
        }
        Ok(Self {
            mu_n,
            p_zero: (-mu_n).exp(),
        })
    }

    /// `μ_n = C(n,2) b_ε(d) q2`.
    pub fn for_pairs(n: usize, d: usize, eps: f64, q2: f64) -> Result<Self> {
        if !(q2 >= 0.0) || !q2.is_finite() {
            return Err(Error::Domain(format!("q2 must be finite and >= 0, got {q2}")));
        }
        let pairs = n as f64 * (n as f64 - 1.0) / 2.0;
        Self::new(pairs * ball_volume(d, eps)? * q2)
    }

    /// `½ b_1(d) q2 n² ε^d`, the limit parameterization.
    pub fn limit_mean(n: usize, d: usize, eps: f64, q2: f64) -> Result<Self> {
        let nf = n as f64;
        Self::new(0.5 * unit_ball_volume(d)? * q2 * nf * nf * eps.powi(d as i32))
    }

    pub fn pmf(&self, k: u64) -> f64 {
        if self.mu_n == 0.0 {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        let lnfact: f64 = (1..=k).map(|j| (j as f64).ln()).sum();
        (-self.mu_n + k as f64 * self.mu_n.ln() - lnfact).exp()
    }

    /// Smallest `k` with `P(N > k) < 1e-12`.
    pub fn k_max(&self) -> u64 {
        let mut k = 0u64;
        let mut p = self.p_zero;
        let mut cdf = p;
        while 1.0 - cdf >= 1e-12 && k < 1_000_000 {
            k += 1;
            p *= self.mu_n / k as f64;
            cdf += p;
            if p == 0.0 && k as f64 > self.mu_n {
                break;
            }
        }
        k
    }

    /// Total-variation distance between an empirical pmf (index = count) and this law.
    pub fn tv_distance(&self, empirical: &[f64]) -> f64 {
        let mut covered = 0.0;
        let mut diff = 0.0;
        for (k, &p) in empirical.iter().enumerate() {
            let q = self.pmf(k as u64);
            covered += q;
            diff += (p - q).abs();
        }
        0.5 * (diff + (1.0 - covered).max(0.0))
    }
}

/// Approximate probability of no ε-close pair, `exp(-C(n,2) b_ε(d) q2)`.
pub fn poisson_p_key(n: usize, d: usize, eps: f64, q2: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::TooSmall {
            what: "poisson key probability",
            needed: 2,
            got: n,
        });
    }
    Ok(PoissonApprox::for_pairs(n, d, eps, q2)?.p_zero)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntervalMethod {
    ExpPivot,
    NormalQ2,
    NormalH2,
    NormalQ2LowEps,
    NormalH2LowEps,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    pub method: IntervalMethod,
}

impl ConfidenceInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!(
            "confidence level must be in (0, 1), got {level}"
        )));
    }
    Ok(())
}

/// Equal-tailed Exp(1) quantiles `(c_1, c_2)` for the given level.
pub fn exp_pivot_constants(level: f64) -> Result<(f64, f64)> {
    check_level(level)?;
    Ok((exp1_quantile((1.0 - level) / 2.0), exp1_quantile((1.0 + level) / 2.0)))
}

/// Interval for `q2` from the minimum inter-point distance `y`.
///
/// `c n² Y_n^d` with `c = ½ b_1(d) q2` is asymptotically Exp(1); inverting
/// gives `[2c_1, 2c_2] / (n² b_1(d) Y_n^d)`.
pub fn exp_pivot_ci_from_min_distance(n: usize, d: usize, y: f64, level: f64) -> Result<ConfidenceInterval> {
    let (c1, c2) = exp_pivot_constants(level)?;
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::DegenerateSample(format!(
            "minimum inter-point distance is {y}; duplicate points"
        )));
    }
    let nf = n as f64;
    let denom = nf * nf * unit_ball_volume(d)? * y.powi(d as i32);
    Ok(ConfidenceInterval {
        lower: 2.0 * c1 / denom,
        upper: 2.0 * c2 / denom,
        level,
        method: IntervalMethod::ExpPivot,
    })
}

pub fn exp_pivot_ci(sample: &SeriesSample, level: f64) -> Result<ConfidenceInterval> {
    check_level(level)?;
    let y = min_interpoint_distance(sample)?;
    exp_pivot_ci_from_min_distance(sample.len(), sample.dim(), y, level)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Q2,
    H2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `√n` rate, scaler `w_{r,n}`
    Sqrtn,
    /// `n ε^{d/2}` rate, scaler `u_n`
    Neps,
}

/// Normal-theory interval inverting the pivotal residuals.
///
/// The entropy intervals divide the half-width by `Q̃_n`, matching the
/// residual `rate · Q̃ (H̃ - h2) / scale`.
pub fn normal_ci(report: &EstimateReport, target: Target, regime: Regime, level: f64) -> Result<ConfidenceInterval> {
    check_level(level)?;
    let z = normal_quantile((1.0 + level) / 2.0);
    let n = report.n as f64;
    let (rate, scale) = match regime {
        Regime::Sqrtn => (n.sqrt(), report.w_hat),
        Regime::Neps => (n * report.eps.powf(report.d as f64 / 2.0), report.u_hat),
    };
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::DegenerateVariance(format!("interval scaler is {scale}")));
    }
    let (center, half, method) = match (target, regime) {
        (Target::Q2, Regime::Sqrtn) => (report.q2_hat, z * scale / rate, IntervalMethod::NormalQ2),
        (Target::Q2, Regime::Neps) => (report.q2_hat, z * scale / rate, IntervalMethod::NormalQ2LowEps),
        (Target::H2, _) => {
            if !(report.q2_hat > 0.0) {
                return Err(Error::DegenerateVariance(
                    "entropy interval needs a positive quadratic estimate".into(),
                ));
            }
            let method = if regime == Regime::Sqrtn {
                IntervalMethod::NormalH2
            } else {
                IntervalMethod::NormalH2LowEps
            };
            (report.h2_hat, z * scale / (rate * report.q2_hat), method)
        }
    };
    Ok(ConfidenceInterval {
        lower: center - half,
        upper: center + half,
        level,
        method,
    })
}
