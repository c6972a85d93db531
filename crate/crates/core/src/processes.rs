//! Reference generators for stationary m-dependent sequences with known
//! marginal functionals.
//!
//! Gaussian innovations come from the inverse normal CDF applied to stream
//! uniforms, so every series is a pure function of `(spec, n, seed, stream)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gof::k_d;
use crate::rng::RngStream;
use crate::sample::SeriesSample;
use crate::special::{normal_cdf, normal_quantile};

/// One-dimensional marginal laws with closed-form functionals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist")]
pub enum Marginal {
    Normal {
        mean: f64,
        sd: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    LogNormal {
        mu: f64,
        sigma: f64,
    },
    Cauchy {
        location: f64,
        scale: f64,
    },
    /// Maximum quadratic entropy law on `|x - mean| <= √5 sd` with variance `sd²`.
    PearsonII {
        mean: f64,
        sd: f64,
    },
}

const SQRT5: f64 = 2.236_067_977_499_79;

impl Marginal {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Marginal::Normal { mean, sd } => mean.is_finite() && sd > 0.0 && sd.is_finite(),
            Marginal::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && hi > lo,
            Marginal::LogNormal { mu, sigma } => mu.is_finite() && sigma > 0.0 && sigma.is_finite(),
            Marginal::Cauchy { location, scale } => location.is_finite() && scale > 0.0 && scale.is_finite(),
            Marginal::PearsonII { mean, sd } => mean.is_finite() && sd > 0.0 && sd.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid marginal parameters: {self:?}")))
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Marginal::Normal { mean, sd } => normal_cdf((x - mean) / sd),
            Marginal::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Marginal::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    normal_cdf((x.ln() - mu) / sigma)
                }
            }
            Marginal::Cauchy { location, scale } => 0.5 + ((x - location) / scale).atan() / PI,
            Marginal::PearsonII { mean, sd } => pearson2_std_cdf((x - mean) / sd),
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            Marginal::Normal { mean, sd } => mean + sd * normal_quantile(p),
            Marginal::Uniform { lo, hi } => lo + (hi - lo) * p,
            Marginal::LogNormal { mu, sigma } => (mu + sigma * normal_quantile(p)).exp(),
            Marginal::Cauchy { location, scale } => location + scale * (PI * (p - 0.5)).tan(),
            Marginal::PearsonII { mean, sd } => mean + sd * pearson2_std_quantile(p),
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        match *self {
            Marginal::Normal { mean, sd } => {
                let z = (x - mean) / sd;
                (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt())
            }
            Marginal::Uniform { lo, hi } => {
                if (lo..=hi).contains(&x) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            Marginal::LogNormal { mu, sigma } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let z = (x.ln() - mu) / sigma;
                (-0.5 * z * z).exp() / (x * sigma * (2.0 * PI).sqrt())
            }
            Marginal::Cauchy { location, scale } => {
                let z = (x - location) / scale;
                1.0 / (PI * scale * (1.0 + z * z))
            }
            Marginal::PearsonII { mean, sd } => {
                let z = (x - mean) / sd;
                if z.abs() <= SQRT5 {
                    3.0 / (4.0 * SQRT5 * sd) * (1.0 - z * z / 5.0)
                } else {
                    0.0
                }
            }
        }
    }

    /// `∫ p²`.
    pub fn q2(&self) -> f64 {
        match *self {
            Marginal::Normal { sd, .. } => 1.0 / (2.0 * sd * PI.sqrt()),
            Marginal::Uniform { lo, hi } => 1.0 / (hi - lo),
            Marginal::LogNormal { mu, sigma } => (sigma * sigma / 4.0 - mu).exp() / (2.0 * sigma * PI.sqrt()),
            Marginal::Cauchy { scale, .. } => 1.0 / (2.0 * PI * scale),
            Marginal::PearsonII { sd, .. } => 1.0 / (k_d(1).expect("d = 1 is valid") * sd),
        }
    }

    /// `∫ p³`.
    pub fn q3(&self) -> f64 {
        match *self {
            Marginal::Normal { sd, .. } => 1.0 / (2.0 * PI * 3f64.sqrt() * sd * sd),
            Marginal::Uniform { lo, hi } => 1.0 / ((hi - lo) * (hi - lo)),
            Marginal::LogNormal { mu, sigma } => {
                (2.0 * sigma * sigma / 3.0 - 2.0 * mu).exp() / (2.0 * PI * sigma * sigma * 3f64.sqrt())
            }
            Marginal::Cauchy { scale, .. } => 3.0 / (8.0 * PI * PI * scale * scale),
            Marginal::PearsonII { sd, .. } => 27.0 / (350.0 * sd * sd),
        }
    }
}

/// CDF of the unit-variance Pearson type II law on `[-√5, √5]`.
pub fn pearson2_std_cdf(z: f64) -> f64 {
    if z <= -SQRT5 {
        0.0
    } else if z >= SQRT5 {
        1.0
    } else {
        0.5 + 3.0 / (4.0 * SQRT5) * (z - z * z * z / 15.0)
    }
}

/// Inverse of [`pearson2_std_cdf`] by safeguarded Newton iteration.
pub fn pearson2_std_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return -SQRT5;
    }
    if p >= 1.0 {
        return SQRT5;
    }
    let (mut lo, mut hi) = (-SQRT5, SQRT5);
    let mut z = 0.0;
    for _ in 0..200 {
        let f = pearson2_std_cdf(z) - p;
        if f == 0.0 {
            return z;
        }
        if f < 0.0 {
            lo = z;
        } else {
            hi = z;
        }
        let slope = 3.0 / (4.0 * SQRT5) * (1.0 - z * z / 5.0);
        let mut next = z - f / slope;
        if !(next > lo && next < hi) || slope <= 0.0 {
            next = 0.5 * (lo + hi);
        }
        if (next - z).abs() <= 1e-16 * (1.0 + z.abs()) || hi - lo <= 1e-15 {
            return next;
        }
        z = next;
    }
    z
}

/// Bivariate copula used to glue consecutive uniforms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Copula {
    Independence,
    Clayton { theta: f64 },
}

impl Copula {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Copula::Independence => Ok(()),
            Copula::Clayton { theta } if theta > 0.0 && theta.is_finite() => Ok(()),
            Copula::Clayton { theta } => Err(Error::InvalidConfig(format!(
                "Clayton parameter must be positive, got {theta}"
            ))),
        }
    }

    /// Inverse conditional distribution `C^{-1}_{2|1}(v | u)`.
    pub fn conditional_inverse(&self, v: f64, u: f64) -> f64 {
        match *self {
            Copula::Independence => v,
            Copula::Clayton { theta } => {
                let inner = (v.powf(-theta / (1.0 + theta)) - 1.0) * u.powf(-theta) + 1.0;
                inner.powf(-1.0 / theta)
            }
        }
    }
}

/// Declarative description of a generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum ProcessSpec {
    IID {
        marginal: Marginal,
    },
    GaussianMA {
        theta: Vec<f64>,
    },
    LogNormalMA {
        theta: Vec<f64>,
    },
    CauchyRatio,
    CopulaOneDep {
        copula: Copula,
        marginal: Marginal,
    },
    PearsonTypeII {
        mu: Vec<f64>,
        sigma: Vec<Vec<f64>>,
        m: usize,
    },
}

/// Known functionals of a process's marginal law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub q2: f64,
    pub h2: f64,
    /// `∫ p³`, when available in closed form.
    pub q3: Option<f64>,
    /// Long-run variance `Var p(X_1) + 2 Σ Cov(p(X_1), p(X_{1+h}))`, when available.
    pub zeta: Option<f64>,
}

impl ProcessSpec {
    pub fn dim(&self) -> usize {
        match self {
            ProcessSpec::PearsonTypeII { mu, .. } => mu.len(),
            _ => 1,
        }
    }

    /// Dependence range `m`.
    pub fn dependence_range(&self) -> usize {
        match self {
            ProcessSpec::IID { .. } => 0,
            ProcessSpec::GaussianMA { theta } | ProcessSpec::LogNormalMA { theta } => theta.len().saturating_sub(1),
            ProcessSpec::CauchyRatio | ProcessSpec::CopulaOneDep { .. } => 1,
            ProcessSpec::PearsonTypeII { m, .. } => *m,
        }
    }

    /// One-dimensional marginal, when the family has one.
    pub fn marginal(&self) -> Option<Marginal> {
        match self {
            ProcessSpec::IID { marginal } | ProcessSpec::CopulaOneDep { marginal, .. } => Some(*marginal),
            ProcessSpec::GaussianMA { theta } => Some(Marginal::Normal {
                mean: 0.0,
                sd: ma_sd(theta),
            }),
            ProcessSpec::LogNormalMA { theta } => Some(Marginal::LogNormal {
                mu: 0.0,
                sigma: ma_sd(theta),
            }),
            ProcessSpec::CauchyRatio => Some(Marginal::Cauchy {
                location: 0.0,
                scale: 1.0,
            }),
            ProcessSpec::PearsonTypeII { mu, sigma, .. } if mu.len() == 1 => Some(Marginal::PearsonII {
                mean: mu[0],
                sd: sigma[0][0].sqrt(),
            }),
            ProcessSpec::PearsonTypeII { .. } => None,
        }
    }

    pub fn truth(&self) -> Result<Truth> {
        self.validate()?;
        if let ProcessSpec::PearsonTypeII { sigma, .. } = self {
            let d = sigma.len();
            let det = crate::gof::cholesky_det(&to_matrix(sigma)?)?.1;
            let q2 = 1.0 / (k_d(d)? * det.sqrt());
            return Ok(Truth {
                q2,
                h2: -q2.ln(),
                q3: self.marginal().map(|m| m.q3()),
                zeta: None,
            });
        }
        let marginal = self.marginal().expect("one-dimensional family");
        let q2 = marginal.q2();
        let q3 = marginal.q3();
        let zeta = match self {
            ProcessSpec::IID { .. } => Some(q3 - q2 * q2),
            ProcessSpec::GaussianMA { theta } => Some(gaussian_ma_zeta(theta)),
            ProcessSpec::CopulaOneDep {
                copula: Copula::Independence,
                ..
            } => Some(q3 - q2 * q2),
            _ => None,
        };
        Ok(Truth {
            q2,
            h2: -q2.ln(),
            q3: Some(q3),
            zeta,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ProcessSpec::IID { marginal } => marginal.validate(),
            ProcessSpec::GaussianMA { theta } | ProcessSpec::LogNormalMA { theta } => check_theta(theta),
            ProcessSpec::CauchyRatio => Ok(()),
            ProcessSpec::CopulaOneDep { copula, marginal } => {
                copula.validate()?;
                marginal.validate()
            }
            ProcessSpec::PearsonTypeII { mu, sigma, m } => {
                let s = to_matrix(sigma)?;
                check_pearson(mu, &s, *m).map(|_| ())
            }
        }
    }
}

fn ma_sd(theta: &[f64]) -> f64 {
    theta.iter().map(|t| t * t).sum::<f64>().sqrt()
}

/// Closed-form long-run variance of `p(X_t)` for a Gaussian MA path.
///
/// For a standardized bivariate normal pair with correlation `ρ`,
/// `E φ_σ(X) φ_σ(Y) = 1 / (2π σ² √(4 - ρ²))`.
pub fn gaussian_ma_zeta(theta: &[f64]) -> f64 {
    let var: f64 = theta.iter().map(|t| t * t).sum();
    let q2sq = 1.0 / (4.0 * PI * var);
    let cross = |rho: f64| 1.0 / (2.0 * PI * var * (4.0 - rho * rho).sqrt()) - q2sq;
    let m = theta.len() - 1;
    let mut zeta = cross(1.0);
    for h in 1..=m {
        let gamma: f64 = (0..=m - h).map(|k| theta[k] * theta[k + h]).sum();
        zeta += 2.0 * cross(gamma / var);
    }
    zeta
}

fn check_theta(theta: &[f64]) -> Result<()> {
    if theta.is_empty() {
        return Err(Error::InvalidConfig("moving-average coefficients are empty".into()));
    }
    if theta.iter().any(|t| !t.is_finite()) || theta.iter().all(|&t| t == 0.0) {
        return Err(Error::InvalidConfig(
            "moving-average coefficients must be finite and not all zero".into(),
        ));
    }
    Ok(())
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::TooSmall {
            what: "generated series",
            needed: 1,
            got: 0,
        });
    }
    Ok(())
}

fn ma_path(theta: &[f64], n: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
    check_theta(theta)?;
    check_len(n)?;
    let m = theta.len() - 1;
    // z[t + m] holds Z_t for t = 1-m ..= n (shifted to 0-based)
    let z = rng.normals(n + m);
    Ok((0..n)
        .map(|t| theta.iter().enumerate().map(|(k, th)| th * z[t + m - k]).sum())
        .collect())
}

/// `X_t = Σ_k θ_k Z_{t-k}` with iid standard normal innovations.
pub fn gen_gaussian_ma(theta: &[f64], n: usize, rng: &mut RngStream) -> Result<SeriesSample> {
    SeriesSample::from_scalars(&ma_path(theta, n, rng)?)
}

/// `X_t = exp(Σ_k θ_k Z_{t-k})`.
pub fn gen_lognormal_ma(theta: &[f64], n: usize, rng: &mut RngStream) -> Result<SeriesSample> {
    let path: Vec<f64> = ma_path(theta, n, rng)?.into_iter().map(f64::exp).collect();
    SeriesSample::from_scalars(&path)
}

/// `X_t = Z_t / Z_{t+1}`: a 1-dependent sequence with standard Cauchy marginal.
pub fn gen_cauchy_ratio(n: usize, rng: &mut RngStream) -> Result<SeriesSample> {
    check_len(n)?;
    let z = rng.normals(n + 1);
    let x: Vec<f64> = z.windows(2).map(|w| w[0] / w[1]).collect();
    SeriesSample::from_scalars(&x)
}

/// Iid draws by inverse transform.
pub fn gen_iid(marginal: &Marginal, n: usize, rng: &mut RngStream) -> Result<SeriesSample> {
    marginal.validate()?;
    check_len(n)?;
    let x: Vec<f64> = (0..n).map(|_| marginal.quantile(rng.uniform())).collect();
    SeriesSample::from_scalars(&x)
}

/// `Y_t = F^{-1}(C^{-1}_{2|1}(U_{t+1} | U_t))` over iid uniforms: a stationary
/// 1-dependent sequence with marginal quantile function `quantile`.
pub fn gen_copula_onedep<Q>(quantile: Q, copula: &Copula, n: usize, rng: &mut RngStream) -> Result<SeriesSample>
where
    Q: Fn(f64) -> f64,
{
    copula.validate()?;
    check_len(n)?;
    check_monotone(&quantile)?;
    let u: Vec<f64> = (0..=n).map(|_| rng.uniform()).collect();
    let y: Vec<f64> = u
        .windows(2)
        .map(|w| {
            quantile(
                copula
                    .conditional_inverse(w[1], w[0])
                    .clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0),
            )
        })
        .collect();
    SeriesSample::from_scalars(&y)
}

fn check_monotone<Q: Fn(f64) -> f64>(quantile: &Q) -> Result<()> {
    let mut prev = f64::NEG_INFINITY;
    for k in 0..=256 {
        let p = (k as f64 + 0.5) / 257.0;
        let x = quantile(p);
        if !x.is_finite() || x < prev {
            return Err(Error::InvalidConfig(format!(
                "quantile function is not finite and non-decreasing near p = {p:.4}"
            )));
        }
        prev = x;
    }
    Ok(())
}

fn to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let d = rows.len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidConfig("scale matrix must be square and non-empty".into()));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
}

fn check_pearson(mu: &[f64], sigma: &DMatrix<f64>, m: usize) -> Result<DMatrix<f64>> {
    let d = mu.len();
    if d == 0 || sigma.nrows() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: sigma.nrows(),
        });
    }
    if !(1..=d + 3).contains(&m) {
        return Err(Error::InvalidConfig(format!(
            "dependence order m must be in 1..={}, got {m}",
            d + 3
        )));
    }
    let asym = (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).any(|(i, j)| {
        (sigma[(i, j)] - sigma[(j, i)]).abs() > 1e-12 * (sigma[(i, j)].abs() + sigma[(j, i)].abs() + 1.0)
    });
    if asym {
        return Err(Error::InvalidConfig("scale matrix is not symmetric".into()));
    }
    let chol = sigma
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidConfig("scale matrix is not positive definite".into()))?;
    Ok(chol.l())
}

/// Innovation layout for a Pearson type II sequence of dependence order `m`.
///
/// Returns `(stride, offsets)`: `X_t` reads innovations `stride·t + offset`
/// for each of the `d + 4` offsets. Offsets are `0..=d+2` plus `m·stride`,
/// so the widest gap is exactly `m·stride`; `X_t` and `X_{t+m}` share one
/// innovation and `X_t`, `X_{t+k}` share none for `k > m`. For `m = d + 3`
/// this is the contiguous window with stride 1.
pub fn pearson2_layout(d: usize, m: usize) -> (usize, Vec<usize>) {
    let stride = (d + 3).div_ceil(m);
    let mut offsets: Vec<usize> = (0..d + 3).collect();
    offsets.push(m * stride);
    (stride, offsets)
}

/// Stationary m-dependent sequence with Pearson type II (maximum quadratic
/// entropy) marginal, mean `mu` and covariance `sigma`.
///
/// Each point is `μ + √(d+4) L z / ‖(z, z')‖` where `L` is the Cholesky factor
/// of `sigma`, `z` holds `d` innovations and `z'` four more; points share
/// innovations according to [`pearson2_layout`].
pub fn gen_pearson2(mu: &[f64], sigma: &[Vec<f64>], m: usize, n: usize, rng: &mut RngStream) -> Result<SeriesSample> {
    check_len(n)?;
    let l = check_pearson(mu, &to_matrix(sigma)?, m)?;
    let d = mu.len();
    let (stride, offsets) = pearson2_layout(d, m);
    let total = (n - 1) * stride + offsets[offsets.len() - 1] + 1;
    let z = rng.normals(total);
    let scale = ((d + 4) as f64).sqrt();
    let mut data = Vec::with_capacity(n * d);
    let mut window = vec![0.0; d + 4];
    for t in 0..n {
        for (w, &o) in window.iter_mut().zip(&offsets) {
            *w = z[t * stride + o];
        }
        let norm = window.iter().map(|v| v * v).sum::<f64>().sqrt();
        for i in 0..d {
            let lz: f64 = (0..=i).map(|j| l[(i, j)] * window[j]).sum();
            data.push(mu[i] + scale * lz / norm);
        }
    }
    SeriesSample::from_flat(d, data)
}

/// A generated path with the identifiers needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedSeries {
    pub sample: SeriesSample,
    pub spec: ProcessSpec,
    pub seed: u64,
    pub stream_id: u64,
}

/// Draws `n` observations of `spec` from `rng`.
pub fn generate_sample(spec: &ProcessSpec, n: usize, rng: &mut RngStream) -> Result<SeriesSample> {
    match spec {
        ProcessSpec::IID { marginal } => gen_iid(marginal, n, rng),
        ProcessSpec::GaussianMA { theta } => gen_gaussian_ma(theta, n, rng),
        ProcessSpec::LogNormalMA { theta } => gen_lognormal_ma(theta, n, rng),
        ProcessSpec::CauchyRatio => gen_cauchy_ratio(n, rng),
        ProcessSpec::CopulaOneDep { copula, marginal } => {
            marginal.validate()?;
            gen_copula_onedep(|p| marginal.quantile(p), copula, n, rng)
        }
        ProcessSpec::PearsonTypeII { mu, sigma, m } => gen_pearson2(mu, sigma, *m, n, rng),
    }
}

pub fn generate(spec: &ProcessSpec, n: usize, seed: u64, stream_id: u64) -> Result<GeneratedSeries> {
    let mut rng = RngStream::new(seed, stream_id);
    Ok(GeneratedSeries {
        sample: generate_sample(spec, n, &mut rng)?,
        spec: spec.clone(),
        seed,
        stream_id,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_quantile_inverts_cdf() {
        for k in 1..1000 {
            let p = k as f64 / 1000.0;
            let z = pearson2_std_quantile(p);
            assert!((pearson2_std_cdf(z) - p).abs() < 1e-13, "p={p}");
        }
        assert_eq!(pearson2_std_quantile(0.5), 0.0);
        assert_eq!(pearson2_std_quantile(0.0), -SQRT5);
    }

    #[test]
    fn clayton_inverse_solves_conditional_cdf() {
        let theta: f64 = 2.0;
        let c = Copula::Clayton { theta };
        for &(u, v) in &[(0.1, 0.3), (0.5, 0.5), (0.9, 0.05), (0.33, 0.97)] {
            let w: f64 = c.conditional_inverse(v, u);
            // ∂C/∂u at (u, w)
            let s = u.powf(-theta - 1.0) * (u.powf(-theta) + w.powf(-theta) - 1.0).powf(-1.0 / theta - 1.0);
            assert!((s - v).abs() < 1e-12);
        }
        assert_eq!(Copula::Independence.conditional_inverse(0.3, 0.9), 0.3);
        assert!(Copula::Clayton { theta: -1.0 }.validate().is_err());
    }

    #[test]
    fn layout_has_exact_range() {
        for d in 1..=6 {
            for m in 1..=d + 3 {
                let (s, offs) = pearson2_layout(d, m);
                assert_eq!(offs.len(), d + 4);
                let mut sorted = offs.clone();
                sorted.dedup();
                assert_eq!(sorted.len(), d + 4, "offsets distinct");
                let max_gap = offs.iter().max().unwrap() - offs.iter().min().unwrap();
                assert!(max_gap >= m * s && max_gap < (m + 1) * s, "d={d} m={m}");
                // lag m shares an innovation
                assert!(offs.iter().any(|&a| offs.contains(&(a + m * s))));
            }
        }
        assert_eq!(pearson2_layout(2, 5), (1, vec![0, 1, 2, 3, 4, 5]));
    }

    #[test]
    fn spec_validation() {
        assert!(gen_gaussian_ma(&[], 10, &mut RngStream::new(0, 0)).is_err());
        let bad = ProcessSpec::PearsonTypeII {
            mu: vec![0.0, 0.0],
            sigma: vec![vec![1.0, 2.0], vec![2.0, 1.0]],
            m: 2,
        };
        assert!(bad.validate().is_err());
        let bad_m = ProcessSpec::PearsonTypeII {
            mu: vec![0.0],
            sigma: vec![vec![1.0]],
            m: 5,
        };
        assert!(bad_m.validate().is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = ProcessSpec::CopulaOneDep {
            copula: Copula::Clayton { theta: 2.0 },
            marginal: Marginal::Uniform { lo: 0.0, hi: 1.0 },
        };
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<ProcessSpec>(&text).unwrap(), spec);
        let ma: ProcessSpec = serde_json::from_str(r#"{"family":"GaussianMA","theta":[1.0,0.5]}"#).unwrap();
        assert_eq!(ma.dependence_range(), 1);
    }

    #[test]
    fn gaussian_zeta_reduces_to_iid_variance() {
        let z = gaussian_ma_zeta(&[1.0]);
        let m = Marginal::Normal { mean: 0.0, sd: 1.0 };
        assert!((z - (m.q3() - m.q2() * m.q2())).abs() < 1e-15);
    }

    #[test]
    fn truths() {
        let t = ProcessSpec::LogNormalMA {
            theta: vec![3f64.sqrt() / 2.0, -0.5],
        }
        .truth()
        .unwrap();
        assert!((t.q2 - 0.25f64.exp() / (2.0 * PI.sqrt())).abs() < 1e-15);
        assert!((t.q2 - 0.3622).abs() < 1e-4);
        let c = ProcessSpec::CauchyRatio.truth().unwrap();
        assert!((c.q2 - 0.15915).abs() < 1e-5);
        let p = ProcessSpec::PearsonTypeII {
            mu: vec![0.0],
            sigma: vec![vec![1.0]],
            m: 4,
        }
        .truth()
        .unwrap();
        assert!((p.q2 * 3.7268 - 1.0).abs() < 1e-4);
    }
}
