//! Replicated simulation studies.
//!
//! Replicate `i` of a study draws its series from stream `i` of the plan's
//! seed, so results do not depend on scheduling and any replicate can be
//! rerun alone. Replicates run on a rayon pool capped by `RENYI_THREADS`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{exp_pivot_ci_from_min_distance, PoissonApprox, Target};
use crate::discrete::{bin_probabilities, discrete_residual, quantize};
use crate::error::{Error, Result};
use crate::estimators::{residual, EstimateConfig, ResidualKind};
use crate::geometry::unit_ball_volume;
use crate::paircount::{close_pair_count, min_interpoint_distance};
use crate::processes::{generate_sample, ProcessSpec};
use crate::rng::RngStream;
use crate::sample::SeriesSample;
use crate::special::{exp1_cdf, kolmogorov_sf, normal_cdf};

/// Seed used when a plan or command does not name one.
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "RENYI_THREADS";

fn default_seed() -> u64 {
    DEFAULT_SEED
}

/// Builds the worker pool, honouring `RENYI_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let threads: usize =
            value.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
                Error::InvalidConfig(format!("{THREADS_ENV} must be a positive integer, got {value:?}"))
            })?;
        builder = builder.num_threads(threads);
    }
    builder
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))
}

/// Runs `f(i)` for `i in 0..n_sim` in parallel and returns results in index
/// order. The first failing replicate (by index) is reported.
pub fn run_replicates<T, F>(n_sim: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    if n_sim == 0 {
        return Err(Error::InvalidConfig("n_sim must be at least 1".into()));
    }
    let pool = thread_pool()?;
    let results: Vec<Result<T>> = pool.install(|| (0..n_sim as u64).into_par_iter().map(&f).collect());
    results
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| Error::Replicate {
                replicate: i as u64,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Draws the series of replicate `replicate`.
pub fn replicate_sample(spec: &ProcessSpec, n: usize, seed: u64, replicate: u64) -> Result<SeriesSample> {
    generate_sample(spec, n, &mut RngStream::new(seed, replicate))
}

/// Reference distributions for the one-sample KS test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum ReferenceCdf {
    StdNormal,
    Exp1,
    Uniform01,
    /// Piecewise-linear CDF through `(x[k], cdf[k])`; 0 left of the first knot, 1 right of the last.
    Tabulated {
        x: Vec<f64>,
        cdf: Vec<f64>,
    },
}

impl ReferenceCdf {
    fn validate(&self) -> Result<()> {
        if let ReferenceCdf::Tabulated { x, cdf } = self {
            if x.is_empty() || x.len() != cdf.len() {
                return Err(Error::InvalidConfig(
                    "tabulated CDF needs matching, non-empty knots".into(),
                ));
            }
            if x.windows(2).any(|w| !(w[0] < w[1])) || cdf.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::InvalidConfig("tabulated CDF knots must increase".into()));
            }
            if cdf.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::InvalidConfig("tabulated CDF values must lie in [0, 1]".into()));
            }
        }
        Ok(())
    }

    pub fn cdf(&self, t: f64) -> f64 {
        match self {
            ReferenceCdf::StdNormal => normal_cdf(t),
            ReferenceCdf::Exp1 => exp1_cdf(t),
            ReferenceCdf::Uniform01 => t.clamp(0.0, 1.0),
            ReferenceCdf::Tabulated { x, cdf } => {
                let k = x.partition_point(|&v| v <= t);
                if k == 0 {
                    0.0
                } else if k == x.len() {
                    1.0
                } else {
                    let w = (t - x[k - 1]) / (x[k] - x[k - 1]);
                    cdf[k - 1] + w * (cdf[k] - cdf[k - 1])
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// One-sample Kolmogorov–Smirnov test with the asymptotic p-value.
pub fn ks_test(data: &[f64], reference: &ReferenceCdf) -> Result<KsResult> {
    reference.validate()?;
    ks_test_with(data, |t| reference.cdf(t))
}

/// KS test against an arbitrary continuous CDF.
pub fn ks_test_with<F: Fn(f64) -> f64>(data: &[f64], cdf: F) -> Result<KsResult> {
    if data.is_empty() {
        return Err(Error::TooSmall {
            what: "KS test",
            needed: 1,
            got: 0,
        });
    }
    if data.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("KS test input contains NaN".into()));
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf(n.sqrt() * d),
        n: sorted.len(),
    })
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

/// Additional experiments run alongside (or instead of) the residual study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Probe {
    /// Empirical law of `N_n` against `Po(½ b_1 q2 n² ε^d)`.
    Poisson { eps: f64 },
    /// `N_n` standardized by its empirical moments, KS against N(0,1).
    NormalCount { eps: f64 },
    /// Empirical mean and variance of `N_n` against their asymptotes.
    /// `zeta` overrides the process's closed-form long-run variance.
    Moments {
        eps: f64,
        #[serde(default)]
        zeta: Option<f64>,
    },
    /// `½ b_1 q2 n² Y_n^d` against Exp(1) and coverage of the pivot interval.
    ExpPivot { level: f64 },
}

/// A replicated study of one process at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationPlan {
    pub spec: ProcessSpec,
    pub n: usize,
    pub n_sim: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Residual form; `None` runs only the probes.
    #[serde(default)]
    pub kind: Option<ResidualKind>,
    #[serde(default)]
    pub config: Option<EstimateConfig>,
    /// `q2` or `h2` according to `kind`; defaults to the process's closed form.
    #[serde(default)]
    pub truth: Option<f64>,
    /// Overrides the closed-form `q2` used by probes.
    #[serde(default)]
    pub q2: Option<f64>,
    #[serde(default)]
    pub probes: Vec<Probe>,
}

impl SimulationPlan {
    pub fn residual_study(
        spec: ProcessSpec,
        n: usize,
        n_sim: usize,
        config: EstimateConfig,
        kind: ResidualKind,
    ) -> Self {
        Self {
            spec,
            n,
            n_sim,
            seed: DEFAULT_SEED,
            kind: Some(kind),
            config: Some(config),
            truth: None,
            q2: None,
            probes: Vec::new(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.n_sim == 0 {
            return Err(Error::InvalidConfig("n_sim must be at least 1".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!("n must be at least 2, got {}", self.n)));
        }
        if self.kind.is_some() {
            let config = self
                .config
                .ok_or_else(|| Error::InvalidConfig("a residual study needs an estimator config".into()))?;
            config.validate()?;
            if self.n < config.r + 4 {
                return Err(Error::InvalidConfig(format!(
                    "dependence bound r = {} needs n >= r + 4, got n = {}",
                    config.r, self.n
                )));
            }
        }
        if self.kind.is_none() && self.probes.is_empty() {
            return Err(Error::InvalidConfig(
                "plan requests neither residuals nor probes".into(),
            ));
        }
        Ok(())
    }

    /// The `q2` or `h2` truth the residuals are centred on.
    pub fn resolved_truth(&self) -> Result<f64> {
        if let Some(t) = self.truth {
            return Ok(t);
        }
        let truth = self.spec.truth()?;
        Ok(match self.kind {
            Some(k) if k.targets_entropy() => truth.h2,
            _ => truth.q2,
        })
    }

    fn probe_q2(&self) -> Result<f64> {
        match self.q2 {
            Some(q) => Ok(q),
            None => Ok(self.spec.truth()?.q2),
        }
    }
}

/// Residual batch and its normality check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationOutcome {
    pub n_sim: usize,
    pub truth: f64,
    pub residuals: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
}

impl SimulationOutcome {
    fn from_residuals(truth: f64, residuals: Vec<f64>) -> Result<Self> {
        let ks = ks_test(&residuals, &ReferenceCdf::StdNormal)?;
        let (mean, var) = mean_var(&residuals);
        Ok(Self {
            n_sim: residuals.len(),
            truth,
            residuals,
            mean,
            sd: var.sqrt(),
            ks_statistic: ks.statistic,
            ks_p_value: ks.p_value,
        })
    }

    /// Writes `replicate,residual` rows.
    pub fn write_residuals_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["replicate", "residual"])?;
        for (i, r) in self.residuals.iter().enumerate() {
            w.write_record([i.to_string(), format!("{r:?}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Generates `n_sim` series and KS-tests their pivotal residuals against N(0,1).
pub fn run_residual_study(plan: &SimulationPlan) -> Result<SimulationOutcome> {
    plan.validate()?;
    let kind = plan
        .kind
        .ok_or_else(|| Error::InvalidConfig("plan has no residual kind".into()))?;
    let config = plan.config.expect("validated");
    let truth = plan.resolved_truth()?;
    let residuals = run_replicates(plan.n_sim, |i| {
        let sample = replicate_sample(&plan.spec, plan.n, plan.seed, i)?;
        residual(&sample, &config, truth, kind)
    })?;
    SimulationOutcome::from_residuals(truth, residuals)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonProbe {
    pub eps: f64,
    pub mu: f64,
    pub counts_mean: f64,
    pub counts_var: f64,
    /// Empirical pmf of `N_n`, indexed by count.
    pub pmf: Vec<f64>,
    pub tv_distance: f64,
    pub zero_fraction: f64,
}

fn replicate_counts(spec: &ProcessSpec, n: usize, eps: f64, n_sim: usize, seed: u64) -> Result<Vec<u64>> {
    run_replicates(n_sim, |i| close_pair_count(&replicate_sample(spec, n, seed, i)?, eps))
}

/// Empirical law of `N_n` in the Poisson regime.
pub fn probe_poisson_regime(
    spec: &ProcessSpec,
    n: usize,
    eps: f64,
    n_sim: usize,
    q2: f64,
    seed: u64,
) -> Result<PoissonProbe> {
    let approx = PoissonApprox::limit_mean(n, spec.dim(), eps, q2)?;
    let counts = replicate_counts(spec, n, eps, n_sim, seed)?;
    let max = *counts.iter().max().expect("n_sim >= 1") as usize;
    let mut pmf = vec![0.0; max + 1];
    for &c in &counts {
        pmf[c as usize] += 1.0 / n_sim as f64;
    }
    let as_f64: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let (mean, var) = mean_var(&as_f64);
    Ok(PoissonProbe {
        eps,
        mu: approx.mu_n,
        counts_mean: mean,
        counts_var: var,
        tv_distance: approx.tv_distance(&pmf),
        zero_fraction: pmf[0],
        pmf,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalCountProbe {
    pub eps: f64,
    pub counts_mean: f64,
    pub counts_sd: f64,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
}

/// `N_n` standardized by its empirical mean and standard deviation.
///
/// Exact centring constants are not available in closed form at finite
/// `n`, so the batch moments stand in for them.
pub fn probe_normal_regime(
    spec: &ProcessSpec,
    n: usize,
    eps: f64,
    n_sim: usize,
    seed: u64,
) -> Result<NormalCountProbe> {
    let counts: Vec<f64> = replicate_counts(spec, n, eps, n_sim, seed)?
        .into_iter()
        .map(|c| c as f64)
        .collect();
    let (mean, var) = mean_var(&counts);
    let sd = var.sqrt();
    if !(sd > 0.0) {
        return Err(Error::DegenerateVariance(
            "pair counts do not vary across replicates".into(),
        ));
    }
    let z: Vec<f64> = counts.iter().map(|c| (c - mean) / sd).collect();
    let ks = ks_test(&z, &ReferenceCdf::StdNormal)?;
    Ok(NormalCountProbe {
        eps,
        counts_mean: mean,
        counts_sd: sd,
        ks_statistic: ks.statistic,
        ks_p_value: ks.p_value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentProbe {
    pub eps: f64,
    pub mean_count: f64,
    pub var_count: f64,
    pub mean_asymptote: f64,
    pub var_asymptote: f64,
    pub mean_ratio: f64,
    pub var_ratio: f64,
}

/// Empirical `E N_n`, `Var N_n` over their asymptotes
/// `½ b_1 q2 n² ε^d` and `½ b_1 q2 n² ε^d + b_1² ζ n³ ε^{2d}`.
pub fn probe_moments(
    spec: &ProcessSpec,
    n: usize,
    eps: f64,
    n_sim: usize,
    q2: f64,
    zeta: f64,
    seed: u64,
) -> Result<MomentProbe> {
    let counts: Vec<f64> = replicate_counts(spec, n, eps, n_sim, seed)?
        .into_iter()
        .map(|c| c as f64)
        .collect();
    let (mean, var) = mean_var(&counts);
    let b1 = unit_ball_volume(spec.dim())?;
    let nf = n as f64;
    let ed = eps.powi(spec.dim() as i32);
    let mean_asymptote = 0.5 * b1 * q2 * nf * nf * ed;
    let var_asymptote = mean_asymptote + b1 * b1 * zeta * nf.powi(3) * ed * ed;
    Ok(MomentProbe {
        eps,
        mean_count: mean,
        var_count: var,
        mean_asymptote,
        var_asymptote,
        mean_ratio: mean / mean_asymptote,
        var_ratio: var / var_asymptote,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpPivotProbe {
    pub level: f64,
    /// `½ b_1 q2 n² Y_n^d` per replicate.
    pub pivots: Vec<f64>,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
    /// Fraction of replicates whose interval contains `q2`.
    pub coverage: f64,
}

/// Minimum-distance pivot: Exp(1) fit and interval coverage.
pub fn probe_exp_pivot(
    spec: &ProcessSpec,
    n: usize,
    n_sim: usize,
    q2: f64,
    level: f64,
    seed: u64,
) -> Result<ExpPivotProbe> {
    let d = spec.dim();
    let c = 0.5 * unit_ball_volume(d)? * q2;
    let nf = n as f64;
    let rows = run_replicates(n_sim, |i| {
        let sample = replicate_sample(spec, n, seed, i)?;
        let y = min_interpoint_distance(&sample)?;
        let ci = exp_pivot_ci_from_min_distance(n, d, y, level)?;
        Ok((c * nf * nf * y.powi(d as i32), ci.contains(q2)))
    })?;
    let pivots: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let ks = ks_test(&pivots, &ReferenceCdf::Exp1)?;
    Ok(ExpPivotProbe {
        level,
        coverage: rows.iter().filter(|r| r.1).count() as f64 / n_sim as f64,
        pivots,
        ks_statistic: ks.statistic,
        ks_p_value: ks.p_value,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum ProbeOutcome {
    Poisson(PoissonProbe),
    NormalCount(NormalCountProbe),
    Moments(MomentProbe),
    ExpPivot(ExpPivotProbe),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanOutcome {
    pub residuals: Option<SimulationOutcome>,
    pub probes: Vec<ProbeOutcome>,
}

/// Runs the residual study (if requested) and every probe of a plan.
pub fn run_plan(plan: &SimulationPlan) -> Result<PlanOutcome> {
    plan.validate()?;
    let residuals = match plan.kind {
        Some(_) => Some(run_residual_study(plan)?),
        None => None,
    };
    let mut probes = Vec::with_capacity(plan.probes.len());
    for probe in &plan.probes {
        let (spec, n, n_sim, seed) = (&plan.spec, plan.n, plan.n_sim, plan.seed);
        probes.push(match *probe {
            Probe::Poisson { eps } => {
                ProbeOutcome::Poisson(probe_poisson_regime(spec, n, eps, n_sim, plan.probe_q2()?, seed)?)
            }
            Probe::NormalCount { eps } => ProbeOutcome::NormalCount(probe_normal_regime(spec, n, eps, n_sim, seed)?),
            Probe::Moments { eps, zeta } => {
                let zeta = match zeta {
                    Some(z) => z,
                    None => spec.truth()?.zeta.ok_or_else(|| {
                        Error::InvalidConfig("no closed-form long-run variance for this process; set zeta".into())
                    })?,
                };
                ProbeOutcome::Moments(probe_moments(spec, n, eps, n_sim, plan.probe_q2()?, zeta, seed)?)
            }
            Probe::ExpPivot { level } => {
                ProbeOutcome::ExpPivot(probe_exp_pivot(spec, n, n_sim, plan.probe_q2()?, level, seed)?)
            }
        });
    }
    Ok(PlanOutcome { residuals, probes })
}

/// Residual study for a quantized (discrete) version of a one-dimensional process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretePlan {
    pub spec: ProcessSpec,
    /// Bin edges applied to each generated value.
    pub cuts: Vec<f64>,
    pub n: usize,
    pub n_sim: usize,
    pub r: usize,
    pub target: Target,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl DiscretePlan {
    /// Symbol probabilities implied by the process marginal and the cuts.
    pub fn symbol_probabilities(&self) -> Result<Vec<f64>> {
        let marginal = self
            .spec
            .marginal()
            .ok_or_else(|| Error::InvalidConfig("discrete study needs a one-dimensional process".into()))?;
        bin_probabilities(|x| marginal.cdf(x), &self.cuts)
    }

    pub fn truth(&self) -> Result<f64> {
        let q2: f64 = self.symbol_probabilities()?.iter().map(|p| p * p).sum();
        Ok(match self.target {
            Target::Q2 => q2,
            Target::H2 => -q2.ln(),
        })
    }
}

pub fn run_discrete_study(plan: &DiscretePlan) -> Result<SimulationOutcome> {
    plan.spec.validate()?;
    let truth = plan.truth()?;
    let residuals = run_replicates(plan.n_sim, |i| {
        let sample = quantize(&replicate_sample(&plan.spec, plan.n, plan.seed, i)?, &plan.cuts)?;
        discrete_residual(&sample, plan.r, truth, plan.target)
    })?;
    SimulationOutcome::from_residuals(truth, residuals)
}
