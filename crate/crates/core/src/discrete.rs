//! Estimators for sequences over a discrete alphabet.
//!
//! Closeness becomes exact equality of integer symbols, so every count is a
//! function of symbol frequencies and runs in `O(n)` after interning.

use std::collections::HashMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::asymptotics::Target;
use crate::error::{Error, Result};
use crate::estimators::clamped_entropy;
use crate::sample::{read_rows, SeriesSample};

/// Time-ordered sequence of integer tuples of a fixed dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscreteSample {
    dim: usize,
    data: Vec<i64>,
}

impl DiscreteSample {
    pub fn from_flat(dim: usize, data: Vec<i64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("symbol dimension must be positive".into()));
        }
        if data.is_empty() {
            return Err(Error::TooSmall {
                what: "discrete sample",
                needed: 1,
                got: 0,
            });
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: data.len() % dim,
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_symbols(symbols: &[i64]) -> Result<Self> {
        Self::from_flat(1, symbols.to_vec())
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn symbol(&self, i: usize) -> &[i64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Reads integer CSV (one symbol per row). A non-integer first row is a
    /// header; decimal points or exponents anywhere else are rejected.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut dim = None;
        let mut data = Vec::new();
        for (line, fields) in read_rows(reader)? {
            let parsed: std::result::Result<Vec<i64>, _> = fields.iter().map(|f| f.trim().parse::<i64>()).collect();
            let values = match parsed {
                Ok(v) => v,
                Err(_) if data.is_empty() && line == 1 && fields.iter().any(|f| f.parse::<f64>().is_err()) => continue,
                Err(_) => {
                    return Err(Error::Parse {
                        line,
                        message: format!(
                            "expected integer symbols, found {fields:?}; quantize floating-point data first"
                        ),
                    })
                }
            };
            match dim {
                None => dim = Some(values.len()),
                Some(d) if d != values.len() => {
                    return Err(Error::Parse {
                        line,
                        message: format!("ragged row: expected {d} columns, found {}", values.len()),
                    })
                }
                _ => {}
            }
            data.extend(values);
        }
        let dim = dim.ok_or(Error::TooSmall {
            what: "discrete csv sample",
            needed: 1,
            got: 0,
        })?;
        Self::from_flat(dim, data)
    }

    /// Dense symbol ids in order of first appearance, with their frequencies.
    fn intern(&self) -> (Vec<usize>, Vec<u64>) {
        let mut ids: HashMap<&[i64], usize> = HashMap::new();
        let mut freq = Vec::new();
        let labels = (0..self.len())
            .map(|i| {
                let next = ids.len();
                let id = *ids.entry(self.symbol(i)).or_insert(next);
                if id == freq.len() {
                    freq.push(0);
                }
                freq[id] += 1;
                id
            })
            .collect();
        (labels, freq)
    }
}

/// Bins a one-dimensional sample: symbol `k` is the number of cut points
/// strictly below the value. Cut points must be strictly increasing.
pub fn quantize(sample: &SeriesSample, cuts: &[f64]) -> Result<DiscreteSample> {
    if sample.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: sample.dim(),
        });
    }
    check_cuts(cuts)?;
    let symbols: Vec<i64> = sample
        .as_flat()
        .iter()
        .map(|&x| cuts.partition_point(|&c| c < x) as i64)
        .collect();
    DiscreteSample::from_symbols(&symbols)
}

fn check_cuts(cuts: &[f64]) -> Result<()> {
    if cuts.iter().any(|c| !c.is_finite()) || cuts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(
            "cut points must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Bin probabilities of [`quantize`] under a continuous marginal CDF.
pub fn bin_probabilities<F: Fn(f64) -> f64>(cdf: F, cuts: &[f64]) -> Result<Vec<f64>> {
    check_cuts(cuts)?;
    let mut probs = Vec::with_capacity(cuts.len() + 1);
    let mut prev = 0.0;
    for &c in cuts {
        let f = cdf(c);
        probs.push(f - prev);
        prev = f;
    }
    probs.push(1.0 - prev);
    Ok(probs)
}

fn need(n: usize, needed: usize, what: &'static str) -> Result<()> {
    if n < needed {
        return Err(Error::TooSmall { what, needed, got: n });
    }
    Ok(())
}

fn binom2(k: u64) -> f64 {
    k as f64 * (k as f64 - 1.0) / 2.0
}

/// `Q_n`: the fraction of index pairs carrying equal symbols.
pub fn discrete_q2(sample: &DiscreteSample) -> Result<f64> {
    need(sample.len(), 2, "discrete Q_n")?;
    let (_, freq) = sample.intern();
    Ok(freq.iter().map(|&f| binom2(f)).sum::<f64>() / binom2(sample.len() as u64))
}

/// `H_n = -ln max(Q_n, 1/n)`.
pub fn discrete_h2(sample: &DiscreteSample) -> Result<f64> {
    Ok(clamped_entropy(discrete_q2(sample)?, sample.len()))
}

fn triple_count(labels: &[usize], freq: &[u64], h: usize) -> u64 {
    let n = labels.len();
    let mut total = 0u64;
    for i in 0..n - h - 1 {
        let x = labels[i];
        if h == 0 {
            let a = freq[x] - 1 - (labels[i + 1] == x) as u64;
            total += a * a.saturating_sub(1);
        } else {
            let y = labels[i + h];
            let same = (x == y) as u64;
            let a = freq[x] - 1 - same;
            let b = freq[y] - 1 - same;
            // j = k is only possible when both targets are the same symbol
            total += a * b - same * a;
        }
    }
    total
}

/// `U_{h,n}`: the fraction of lag-`h` triples `(i, j, k)` with `X_j = X_i`
/// and `X_k = X_{i+h}`, over the same index set as the continuous estimator.
pub fn discrete_u3(sample: &DiscreteSample, h: usize) -> Result<f64> {
    let n = sample.len();
    need(n, h + 4, "discrete lag triple estimator")?;
    let (labels, freq) = sample.intern();
    Ok(triple_count(&labels, &freq, h) as f64 / triple_norm(n, h))
}

fn triple_norm(n: usize, h: usize) -> f64 {
    (n - h - 1) as f64 * (n - 2) as f64 * (n - 3) as f64
}

/// `U_{0,n}, …, U_{r,n}`.
pub fn discrete_u3_all(sample: &DiscreteSample, r: usize) -> Result<Vec<f64>> {
    let n = sample.len();
    need(n, r + 4, "discrete lag triple estimator")?;
    let (labels, freq) = sample.intern();
    Ok((0..=r)
        .map(|h| triple_count(&labels, &freq, h) as f64 / triple_norm(n, h))
        .collect())
}

/// `s²_{r,n} = U_0 - Q_n² + 2 Σ_{h=1}^r (U_h - Q_n²)`, unclamped.
pub fn discrete_s2(sample: &DiscreteSample, r: usize) -> Result<f64> {
    let u = discrete_u3_all(sample, r)?;
    let q = discrete_q2(sample)?;
    Ok(crate::estimators::zeta_from_parts(&u, q))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteReport {
    pub n: usize,
    pub d: usize,
    pub r: usize,
    pub n_equal_pairs: u64,
    pub q2_hat: f64,
    pub h2_hat: f64,
    pub u3_hat: Vec<f64>,
    pub s2_hat: f64,
    /// `√n / (2 s_{r,n})`, absent when `s²_{r,n} <= 0`.
    pub residual_scale: Option<f64>,
    pub h2_clamped: bool,
}

pub fn discrete_report(sample: &DiscreteSample, r: usize) -> Result<DiscreteReport> {
    let n = sample.len();
    need(n, r + 4, "discrete report")?;
    let (labels, freq) = sample.intern();
    let pairs: u64 = freq.iter().map(|&f| f * (f - 1) / 2).sum();
    let q2_hat = pairs as f64 / binom2(n as u64);
    let u3_hat: Vec<f64> = (0..=r)
        .map(|h| triple_count(&labels, &freq, h) as f64 / triple_norm(n, h))
        .collect();
    let s2_hat = crate::estimators::zeta_from_parts(&u3_hat, q2_hat);
    Ok(DiscreteReport {
        n,
        d: sample.dim(),
        r,
        n_equal_pairs: pairs,
        q2_hat,
        h2_hat: clamped_entropy(q2_hat, n),
        u3_hat,
        s2_hat,
        residual_scale: (s2_hat > 0.0).then(|| (n as f64).sqrt() / (2.0 * s2_hat.sqrt())),
        h2_clamped: q2_hat < 1.0 / n as f64,
    })
}

/// Residual from report values: `√n (Q_n - q2) / (2s)` or `√n Q_n (H_n - h2) / (2s)`.
pub fn discrete_residual_from_parts(
    target: Target,
    q2_hat: f64,
    h2_hat: f64,
    s2: f64,
    truth: f64,
    n: usize,
) -> Result<f64> {
    if !(s2 > 0.0) {
        return Err(Error::DegenerateVariance(format!(
            "s2 = {s2} is not positive; the pivot needs a non-uniform marginal"
        )));
    }
    let centered = match target {
        Target::Q2 => q2_hat - truth,
        Target::H2 => q2_hat * (h2_hat - truth),
    };
    Ok((n as f64).sqrt() * centered / (2.0 * s2.sqrt()))
}

pub fn discrete_residual(sample: &DiscreteSample, r: usize, truth: f64, target: Target) -> Result<f64> {
    let rep = discrete_report(sample, r)?;
    discrete_residual_from_parts(target, rep.q2_hat, rep.h2_hat, rep.s2_hat, truth, rep.n)
}
