//! Approximate ε-keys: attribute subsets whose projected records have no
//! ε-close pair.
//!
//! For a subset `A`, the number of close pairs `N_n(A)` is approximately
//! Poisson with mean `C(n,2) b_ε(|A|) q2(A)`, so `exp(-μ_n(A))` estimates the
//! chance that `A` is an exact key, and the best candidates of a fixed size
//! minimize `q2`. Column indices are 0-based.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::poisson_p_key;
use crate::error::{Error, Result};
use crate::geometry::ball_volume;
use crate::montecarlo::thread_pool;
use crate::paircount::close_pair_count;
use crate::sample::SeriesSample;

/// Upper bound on enumerated subsets.
pub const MAX_SUBSETS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyCandidate {
    pub attributes: Vec<usize>,
    pub d: usize,
    pub q2_hat: f64,
    pub p_key: f64,
    pub n_close_pairs: u64,
}

impl KeyCandidate {
    /// No two projected records are within `eps` of each other.
    pub fn is_exact_key(&self) -> bool {
        self.n_close_pairs == 0
    }
}

pub fn evaluate_subset(table: &SeriesSample, attributes: &[usize], eps: f64) -> Result<KeyCandidate> {
    if attributes.is_empty() {
        return Err(Error::InvalidConfig("attribute subset is empty".into()));
    }
    let mut sorted = attributes.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidConfig(format!(
            "attribute subset {attributes:?} repeats a column"
        )));
    }
    let n = table.len();
    if n < 2 {
        return Err(Error::TooSmall {
            what: "key evaluation",
            needed: 2,
            got: n,
        });
    }
    let projected = table.project(attributes)?;
    let d = attributes.len();
    let count = close_pair_count(&projected, eps)?;
    let pairs = n as f64 * (n as f64 - 1.0) / 2.0;
    let q2_hat = count as f64 / (pairs * ball_volume(d, eps)?);
    Ok(KeyCandidate {
        attributes: attributes.to_vec(),
        d,
        q2_hat,
        p_key: poisson_p_key(n, d, eps, q2_hat)?,
        n_close_pairs: count,
    })
}

/// Evaluates every subset and sorts by ascending `q2_hat`, breaking ties by
/// the lexicographic order of the attribute lists.
pub fn rank_candidates(table: &SeriesSample, subsets: &[Vec<usize>], eps: f64) -> Result<Vec<KeyCandidate>> {
    let d = subsets
        .first()
        .ok_or_else(|| Error::InvalidConfig("no candidate subsets given".into()))?
        .len();
    if let Some(s) = subsets.iter().find(|s| s.len() != d) {
        return Err(Error::InvalidConfig(format!(
            "all subsets must have size {d}; {s:?} has size {}",
            s.len()
        )));
    }
    if subsets.len() > MAX_SUBSETS {
        return Err(Error::InvalidConfig(format!(
            "{} subsets exceed the limit of {MAX_SUBSETS}",
            subsets.len()
        )));
    }
    let pool = thread_pool()?;
    let results: Vec<Result<KeyCandidate>> =
        pool.install(|| subsets.par_iter().map(|s| evaluate_subset(table, s, eps)).collect());
    let mut ranked = results.into_iter().collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| {
        a.q2_hat
            .total_cmp(&b.q2_hat)
            .then_with(|| a.attributes.cmp(&b.attributes))
    });
    Ok(ranked)
}

/// All `size`-element subsets of `0..k` in lexicographic order.
pub fn all_subsets(k: usize, size: usize) -> Result<Vec<Vec<usize>>> {
    if size == 0 || size > k {
        return Err(Error::InvalidConfig(format!(
            "subset size must be in 1..={k}, got {size}"
        )));
    }
    let mut total = 1u128;
    for i in 0..size {
        total = total * (k - i) as u128 / (i + 1) as u128;
        if total > MAX_SUBSETS as u128 * 1_000_000 {
            break;
        }
    }
    if total > MAX_SUBSETS as u128 {
        return Err(Error::InvalidConfig(format!(
            "C({k}, {size}) subsets exceed the limit of {MAX_SUBSETS}"
        )));
    }
    let mut out = Vec::with_capacity(total as usize);
    let mut current: Vec<usize> = (0..size).collect();
    loop {
        out.push(current.clone());
        let Some(pos) = (0..size).rev().find(|&i| current[i] < k - size + i) else {
            break;
        };
        current[pos] += 1;
        for j in pos + 1..size {
            current[j] = current[j - 1] + 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_is_a_key_and_constant_is_not() {
        let rows: Vec<[f64; 2]> = (0..20).map(|i| [i as f64 * 0.5, 3.0]).collect();
        let table = SeriesSample::from_points(&rows).unwrap();
        let ramp = evaluate_subset(&table, &[0], 0.1).unwrap();
        assert!(ramp.is_exact_key());
        assert_eq!(ramp.p_key, 1.0);
        let constant = evaluate_subset(&table, &[1], 0.1).unwrap();
        assert_eq!(constant.n_close_pairs, 190);
        // μ = C(20,2) · 0.2 · 5 = 190
        assert!((constant.p_key.ln() + 190.0).abs() < 1e-9);
    }

    #[test]
    fn subset_errors() {
        let table = SeriesSample::from_points(&[[0.0, 1.0], [1.0, 2.0]]).unwrap();
        assert!(evaluate_subset(&table, &[], 0.1).is_err());
        assert!(evaluate_subset(&table, &[2], 0.1).is_err());
        assert!(evaluate_subset(&table, &[0, 0], 0.1).is_err());
        assert!(rank_candidates(&table, &[vec![0], vec![0, 1]], 0.1).is_err());
    }

    #[test]
    fn enumeration() {
        assert_eq!(
            all_subsets(4, 2).unwrap(),
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(all_subsets(3, 3).unwrap(), vec![vec![0, 1, 2]]);
        assert!(all_subsets(3, 4).is_err());
        assert!(all_subsets(64, 10).is_err());
    }
}
