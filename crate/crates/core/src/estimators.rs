//! Point and variance estimators built from ε-close counts.
//!
//! * `Q̃_n = N_n / (C(n,2) b_ε(d))` estimates the quadratic functional `∫p²`.
//! * `H̃_n = -ln max(Q̃_n, 1/n)` estimates the quadratic Rényi entropy.
//! * `U_{h,n}` estimates `E p(X_1) p(X_{1+h})` from lag-`h` triples at radius `ε0`.
//! * `z_{1,r,n}`, `w_{r,n}`, `u_n` are the variance ingredients of the
//!   pivotal residuals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ball_volume, unit_ball_volume};
use crate::paircount::{close_pair_count, triple_set_size, NeighborLists};
use crate::sample::SeriesSample;

/// Tuning knobs: `eps` for `Q̃_n`, `eps0` for `U_{h,n}`, and the dependence bound `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig {
    pub eps: f64,
    pub eps0: f64,
    pub r: usize,
}

impl EstimateConfig {
    /// `eps0` defaults to `eps`.
    pub fn new(eps: f64, r: usize) -> Self {
        Self { eps, eps0: eps, r }
    }

    pub fn with_eps0(mut self, eps0: f64) -> Self {
        self.eps0 = eps0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eps", self.eps), ("eps0", self.eps0)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Opt-in radius schedule `ε = ĉ n^{-2/(4α+d)}` with `ĉ` the sample standard
/// deviation (root mean coordinate variance when `d > 1`).
pub fn heuristic_eps(sample: &SeriesSample, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "smoothness alpha must be in (0, 1], got {alpha}"
        )));
    }
    let n = sample.len();
    if n < 2 {
        return Err(Error::TooSmall {
            what: "heuristic eps",
            needed: 2,
            got: n,
        });
    }
    let d = sample.dim();
    let mut var_sum = 0.0;
    for k in 0..d {
        let mean = sample.points().map(|p| p[k]).sum::<f64>() / n as f64;
        var_sum += sample.points().map(|p| (p[k] - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    }
    let c = (var_sum / d as f64).sqrt();
    if !(c > 0.0) {
        return Err(Error::DegenerateSample("zero spread; cannot scale eps".into()));
    }
    Ok(c * (n as f64).powf(-2.0 / (4.0 * alpha + d as f64)))
}

fn binom2(n: usize) -> f64 {
    n as f64 * (n as f64 - 1.0) / 2.0
}

/// `(Q_n, Q̃_n)`: the raw close-pair fraction and its volume-normalized version.
pub fn estimate_q2(sample: &SeriesSample, eps: f64) -> Result<(f64, f64)> {
    let count = close_pair_count(sample, eps)?;
    let qn = count as f64 / binom2(sample.len());
    Ok((qn, qn / ball_volume(sample.dim(), eps)?))
}

/// `-ln max(q2, 1/n)`. The clamped branch returns `ln n` itself, so it is
/// exact rather than `-ln(1/n)` rounded twice.
pub fn clamped_entropy(q2: f64, n: usize) -> f64 {
    let nf = n as f64;
    if q2 < 1.0 / nf {
        nf.ln()
    } else {
        -q2.ln()
    }
}

pub fn estimate_h2(sample: &SeriesSample, eps: f64) -> Result<f64> {
    let (_, q2) = estimate_q2(sample, eps)?;
    Ok(clamped_entropy(q2, sample.len()))
}

/// `U_{h,n}`: lag-`h` triple count over `M_{h,n} b_{ε0}(d)²`.
pub fn estimate_u3(sample: &SeriesSample, h: usize, eps0: f64) -> Result<f64> {
    let lists = NeighborLists::build(sample, eps0)?;
    u3_from_lists(&lists, sample.dim(), h, eps0)
}

fn u3_from_lists(lists: &NeighborLists, d: usize, h: usize, eps0: f64) -> Result<f64> {
    let count = lists.uh_triples(h)?;
    let m = triple_set_size(lists.len(), h)?;
    let b = ball_volume(d, eps0)?;
    Ok(count as f64 / (m as f64 * b * b))
}

/// `U_{0,n}, …, U_{r,n}` from a single neighbour-list pass.
pub fn estimate_u3_all(sample: &SeriesSample, r: usize, eps0: f64) -> Result<Vec<f64>> {
    if sample.len() < r + 4 {
        return Err(Error::TooSmall {
            what: "lag triple estimator",
            needed: r + 4,
            got: sample.len(),
        });
    }
    let lists = NeighborLists::build(sample, eps0)?;
    (0..=r).map(|h| u3_from_lists(&lists, sample.dim(), h, eps0)).collect()
}

/// Cubic Rényi entropy estimate `-(1/2) ln max(U_{0,n}, 1/n)`.
pub fn estimate_h3(sample: &SeriesSample, eps0: f64) -> Result<f64> {
    let u0 = estimate_u3(sample, 0, eps0)?;
    Ok(cubic_entropy(u0, sample.len()))
}

pub fn cubic_entropy(u0: f64, n: usize) -> f64 {
    0.5 * clamped_entropy(u0, n)
}

/// `U_0 - Q̃² + 2 Σ_{h=1}^{r} (U_h - Q̃²)`, where `r = u3.len() - 1`. Not clamped.
pub fn zeta_from_parts(u3: &[f64], q2: f64) -> f64 {
    let q2sq = q2 * q2;
    let lagged: f64 = u3.iter().skip(1).map(|u| u - q2sq).sum();
    u3[0] - q2sq + 2.0 * lagged
}

/// `sqrt(2 Q̃ / (n b_ε) + 4 max(z, 1/n))`.
pub fn w_from_parts(q2: f64, zeta: f64, n: usize, ball: f64) -> f64 {
    let nf = n as f64;
    (2.0 * q2 / (nf * ball) + 4.0 * zeta.max(1.0 / nf)).sqrt()
}

/// `sqrt(2 max(Q̃, 1/n) / b_1(d))`.
pub fn u_from_parts(q2: f64, n: usize, unit_ball: f64) -> f64 {
    (2.0 * q2.max(1.0 / n as f64) / unit_ball).sqrt()
}

pub fn estimate_zeta(sample: &SeriesSample, config: &EstimateConfig) -> Result<f64> {
    config.validate()?;
    let (_, q2) = estimate_q2(sample, config.eps)?;
    let u3 = estimate_u3_all(sample, config.r, config.eps0)?;
    Ok(zeta_from_parts(&u3, q2))
}

pub fn estimate_w(sample: &SeriesSample, config: &EstimateConfig) -> Result<f64> {
    config.validate()?;
    let (_, q2) = estimate_q2(sample, config.eps)?;
    let u3 = estimate_u3_all(sample, config.r, config.eps0)?;
    let zeta = zeta_from_parts(&u3, q2);
    Ok(w_from_parts(
        q2,
        zeta,
        sample.len(),
        ball_volume(sample.dim(), config.eps)?,
    ))
}

pub fn estimate_u(sample: &SeriesSample, eps: f64) -> Result<f64> {
    let (_, q2) = estimate_q2(sample, eps)?;
    Ok(u_from_parts(q2, sample.len(), unit_ball_volume(sample.dim())?))
}

/// Every estimator output for one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub n: usize,
    pub d: usize,
    pub eps: f64,
    pub eps0: f64,
    pub r: usize,
    pub n_pairs_close: u64,
    pub qn_raw: f64,
    pub q2_hat: f64,
    pub h2_hat: f64,
    pub u3_hat: Vec<f64>,
    pub h3_hat: f64,
    pub zeta_hat: f64,
    pub w_hat: f64,
    pub u_hat: f64,
    /// `true` when `Q̃_n < 1/n` and the entropy clamp is in effect.
    pub h2_clamped: bool,
}

impl EstimateReport {
    pub fn ball_volume(&self) -> f64 {
        ball_volume(self.d, self.eps).expect("report holds a validated radius")
    }
}

/// Computes the full report. Needs `n >= r + 4`.
pub fn estimate(sample: &SeriesSample, config: &EstimateConfig) -> Result<EstimateReport> {
    config.validate()?;
    let n = sample.len();
    let d = sample.dim();
    if n < config.r + 4 {
        return Err(Error::InvalidConfig(format!(
            "dependence bound r = {} needs n >= r + 4, got n = {n}",
            config.r
        )));
    }
    let count = close_pair_count(sample, config.eps)?;
    let ball = ball_volume(d, config.eps)?;
    let qn_raw = count as f64 / binom2(n);
    let q2_hat = qn_raw / ball;
    let u3_hat = estimate_u3_all(sample, config.r, config.eps0)?;
    let zeta_hat = zeta_from_parts(&u3_hat, q2_hat);
    Ok(EstimateReport {
        n,
        d,
        eps: config.eps,
        eps0: config.eps0,
        r: config.r,
        n_pairs_close: count,
        qn_raw,
        q2_hat,
        h2_hat: clamped_entropy(q2_hat, n),
        h3_hat: cubic_entropy(u3_hat[0], n),
        u3_hat,
        zeta_hat,
        w_hat: w_from_parts(q2_hat, zeta_hat, n, ball),
        u_hat: u_from_parts(q2_hat, n, unit_ball_volume(d)?),
        h2_clamped: q2_hat < 1.0 / n as f64,
    })
}

/// Normalized residual forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResidualKind {
    /// `√n (Q̃ - q2) / w`
    #[serde(rename = "Q_sqrtn")]
    QSqrtN,
    /// `√n Q̃ (H̃ - h2) / w`
    #[serde(rename = "H_sqrtn")]
    HSqrtN,
    /// `n ε^{d/2} (Q̃ - q2) / u`
    #[serde(rename = "Q_neps")]
    QNeps,
    /// `n ε^{d/2} Q̃ (H̃ - h2) / u`
    #[serde(rename = "H_neps")]
    HNeps,
}

impl ResidualKind {
    /// Whether the truth is an entropy (otherwise a quadratic functional).
    pub fn targets_entropy(self) -> bool {
        matches!(self, ResidualKind::HSqrtN | ResidualKind::HNeps)
    }

    pub fn needs_w(self) -> bool {
        matches!(self, ResidualKind::QSqrtN | ResidualKind::HSqrtN)
    }
}

impl std::str::FromStr for ResidualKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Q_sqrtn" => Ok(ResidualKind::QSqrtN),
            "H_sqrtn" => Ok(ResidualKind::HSqrtN),
            "Q_neps" => Ok(ResidualKind::QNeps),
            "H_neps" => Ok(ResidualKind::HNeps),
            other => Err(Error::InvalidConfig(format!("unknown residual kind {other:?}"))),
        }
    }
}

/// Residual from already computed components. `scale` is `w` or `u`
/// depending on the kind; `eps` and `d` only matter for the `neps` forms.
#[allow(clippy::too_many_arguments)]
pub fn residual_from_parts(
    kind: ResidualKind,
    q2_hat: f64,
    h2_hat: f64,
    truth: f64,
    scale: f64,
    n: usize,
    eps: f64,
    d: usize,
) -> Result<f64> {
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::DegenerateVariance(format!("residual scaler is {scale}")));
    }
    let nf = n as f64;
    let rate = match kind {
        ResidualKind::QSqrtN | ResidualKind::HSqrtN => nf.sqrt(),
        ResidualKind::QNeps | ResidualKind::HNeps => nf * eps.powf(d as f64 / 2.0),
    };
    let centered = if kind.targets_entropy() {
        q2_hat * (h2_hat - truth)
    } else {
        q2_hat - truth
    };
    Ok(rate * centered / scale)
}

/// Pivotal residual for a sample with known truth (`q2` or `h2`, by kind).
///
/// The `neps` kinds skip the triple counts, so `config.r` and `config.eps0`
/// only matter for the `sqrtn` kinds.
pub fn residual(sample: &SeriesSample, config: &EstimateConfig, truth: f64, kind: ResidualKind) -> Result<f64> {
    config.validate()?;
    let n = sample.len();
    let d = sample.dim();
    let (_, q2) = estimate_q2(sample, config.eps)?;
    let h2 = clamped_entropy(q2, n);
    let scale = if kind.needs_w() {
        let u3 = estimate_u3_all(sample, config.r, config.eps0)?;
        w_from_parts(q2, zeta_from_parts(&u3, q2), n, ball_volume(d, config.eps)?)
    } else {
        u_from_parts(q2, n, unit_ball_volume(d)?)
    };
    residual_from_parts(kind, q2, h2, truth, scale, n, config.eps, d)
}
