//! Exact ε-close pair statistics.
//!
//! Pairs are enumerated with a hashed uniform grid of cell side `eps`: two
//! points within distance `eps` always sit in the same or adjacent cells, so
//! each occupied cell is compared against itself and half of its `3^d - 1`
//! neighbours. When the grid cannot beat a plain double loop (high `d`,
//! coordinates too large to bucket, or more cell lookups than pairs) the
//! O(n²) scan is used instead. Closeness is the inclusive test
//! `||x - y||² <= eps²`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::squared_distance;
use crate::sample::SeriesSample;

/// Dimensions above this always use the O(n²) scan.
pub const GRID_MAX_DIM: usize = 12;

/// Pair enumeration strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Grid when it is cheaper than the scan, otherwise scan.
    Auto,
    /// Grid whenever the coordinates can be bucketed.
    Grid,
    /// Double loop over all pairs.
    Scan,
}

/// `N_n` and `Y_n` for one sample and radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCountResult {
    /// Number of pairs `i < j` with `||X_i - X_j|| <= eps`.
    pub n_pairs_close: u64,
    /// Minimum inter-point distance over all pairs.
    pub min_distance: f64,
    pub n: usize,
    pub eps: f64,
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Domain(format!("radius must be positive and finite, got {eps}")));
    }
    Ok(())
}

fn check_pairs(sample: &SeriesSample, what: &'static str) -> Result<()> {
    if sample.len() < 2 {
        return Err(Error::TooSmall {
            what,
            needed: 2,
            got: sample.len(),
        });
    }
    Ok(())
}

/// Counts ε-close pairs and finds the minimum inter-point distance.
pub fn count_close_pairs(sample: &SeriesSample, eps: f64) -> Result<PairCountResult> {
    count_close_pairs_with(sample, eps, Strategy::Auto)
}

pub fn count_close_pairs_with(sample: &SeriesSample, eps: f64, strategy: Strategy) -> Result<PairCountResult> {
    check_eps(eps)?;
    check_pairs(sample, "pair count")?;
    let mut count = 0u64;
    for_each_close_pair(sample, eps, strategy, |_, _, _| count += 1);
    Ok(PairCountResult {
        n_pairs_close: count,
        min_distance: min_interpoint_distance(sample)?,
        n: sample.len(),
        eps,
    })
}

/// Counts ε-close pairs only, skipping the minimum-distance sweep.
pub fn close_pair_count(sample: &SeriesSample, eps: f64) -> Result<u64> {
    check_eps(eps)?;
    check_pairs(sample, "pair count")?;
    let mut count = 0u64;
    for_each_close_pair(sample, eps, Strategy::Auto, |_, _, _| count += 1);
    Ok(count)
}

/// Minimum of `||X_i - X_j||` over all `i < j`.
///
/// Sweep along the first coordinate: after sorting, a candidate `j` whose
/// first-coordinate gap already reaches the best distance ends the scan
/// for `i`.
pub fn min_interpoint_distance(sample: &SeriesSample) -> Result<f64> {
    check_pairs(sample, "minimum distance")?;
    let n = sample.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sample.point(a)[0].total_cmp(&sample.point(b)[0]));
    let mut best = f64::INFINITY;
    for (pos, &i) in order.iter().enumerate() {
        let xi = sample.point(i);
        for &j in &order[pos + 1..] {
            let xj = sample.point(j);
            let gap = xj[0] - xi[0];
            if gap * gap >= best {
                break;
            }
            let sq = squared_distance(xi, xj);
            if sq < best {
                best = sq;
            }
        }
        if best == 0.0 {
            break;
        }
    }
    Ok(best.sqrt())
}

/// Calls `f(i, j, squared_distance)` once for every close pair, with `i < j`.
///
/// Visiting order is deterministic for a given sample and strategy.
pub fn for_each_close_pair<F>(sample: &SeriesSample, eps: f64, strategy: Strategy, mut f: F)
where
    F: FnMut(usize, usize, f64),
{
    let eps_sq = eps * eps;
    if strategy != Strategy::Scan && sample.dim() <= GRID_MAX_DIM || strategy == Strategy::Grid {
        if let Some(grid) = Grid::build(sample, eps) {
            let scan_cost = sample.len() as u128 * (sample.len() as u128 - 1) / 2;
            if strategy == Strategy::Grid || grid.lookup_cost() < scan_cost {
                grid.visit_pairs(sample, eps_sq, &mut f);
                return;
            }
        }
    }
    scan_pairs(sample, eps_sq, &mut f);
}

fn scan_pairs<F: FnMut(usize, usize, f64)>(sample: &SeriesSample, eps_sq: f64, f: &mut F) {
    let n = sample.len();
    for i in 0..n {
        let xi = sample.point(i);
        for j in i + 1..n {
            let sq = squared_distance(xi, sample.point(j));
            if sq <= eps_sq {
                f(i, j, sq);
            }
        }
    }
}

struct Grid {
    dim: usize,
    /// cell coordinates, `n × dim`, in original point order
    keys: Vec<i64>,
    /// point indices sorted by cell key
    order: Vec<usize>,
    /// `(start, end)` ranges into `order`, one per occupied cell
    cells: Vec<(usize, usize)>,
    offsets: Vec<Vec<i64>>,
}

impl Grid {
    fn build(sample: &SeriesSample, eps: f64) -> Option<Grid> {
        let dim = sample.dim();
        if dim > GRID_MAX_DIM {
            return None;
        }
        let inv = 1.0 / eps;
        const LIMIT: f64 = (1u64 << 52) as f64;
        let mut keys = Vec::with_capacity(sample.as_flat().len());
        for &x in sample.as_flat() {
            let c = (x * inv).floor();
            if !c.is_finite() || c.abs() >= LIMIT {
                return None;
            }
            keys.push(c as i64);
        }
        let key = |i: usize| &keys[i * dim..(i + 1) * dim];
        let mut order: Vec<usize> = (0..sample.len()).collect();
        order.sort_by(|&a, &b| key(a).cmp(key(b)).then(a.cmp(&b)));
        let mut cells = Vec::new();
        let mut start = 0;
        for pos in 1..=order.len() {
            if pos == order.len() || key(order[pos]) != key(order[start]) {
                cells.push((start, pos));
                start = pos;
            }
        }
        Some(Grid {
            dim,
            keys,
            order,
            cells,
            offsets: half_offsets(dim),
        })
    }

    fn lookup_cost(&self) -> u128 {
        self.cells.len() as u128 * (self.offsets.len() as u128 + 1)
    }

    fn key(&self, i: usize) -> &[i64] {
        &self.keys[i * self.dim..(i + 1) * self.dim]
    }

    fn visit_pairs<F: FnMut(usize, usize, f64)>(&self, sample: &SeriesSample, eps_sq: f64, f: &mut F) {
        let index: HashMap<&[i64], usize> = self
            .cells
            .iter()
            .enumerate()
            .map(|(c, &(s, _))| (self.key(self.order[s]), c))
            .collect();
        let mut probe = vec![0i64; self.dim];
        let mut emit = |a: usize, b: usize| {
            let sq = squared_distance(sample.point(a), sample.point(b));
            if sq <= eps_sq {
                if a < b {
                    f(a, b, sq)
                } else {
                    f(b, a, sq)
                }
            }
        };
        for &(s, e) in &self.cells {
            let members = &self.order[s..e];
            for (k, &a) in members.iter().enumerate() {
                for &b in &members[k + 1..] {
                    emit(a, b);
                }
            }
            let base = self.key(members[0]);
            for off in &self.offsets {
                for ((p, &b), &o) in probe.iter_mut().zip(base).zip(off) {
                    *p = b + o;
                }
                if let Some(&c) = index.get(probe.as_slice()) {
                    let (s2, e2) = self.cells[c];
                    for &a in members {
                        for &b in &self.order[s2..e2] {
                            emit(a, b);
                        }
                    }
                }
            }
        }
    }
}

/// Offsets in `{-1, 0, 1}^d` whose first nonzero entry is `+1`.
fn half_offsets(dim: usize) -> Vec<Vec<i64>> {
    let total = 3usize.pow(dim as u32);
    let mut out = Vec::with_capacity(total / 2);
    for code in 0..total {
        let mut c = code;
        let off: Vec<i64> = (0..dim)
            .map(|_| {
                let v = (c % 3) as i64 - 1;
                c /= 3;
                v
            })
            .collect();
        if off.iter().find(|&&v| v != 0) == Some(&1) {
            out.push(off);
        }
    }
    out
}

/// Per-index neighbour counts `c_i` at a fixed radius.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborCounts {
    pub counts: Vec<u64>,
}

impl NeighborCounts {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// `c_i = |{ j ≠ i, j ∉ excluded : ||X_i - X_j|| <= eps0 }|` for every `i`.
///
/// Indices are 0-based.
pub fn neighbor_counts(sample: &SeriesSample, eps0: f64, excluded: Option<(usize, usize)>) -> Result<NeighborCounts> {
    check_eps(eps0)?;
    check_pairs(sample, "neighbour counts")?;
    let is_excluded = |k: usize| excluded.is_some_and(|(a, b)| k == a || k == b);
    let mut counts = vec![0u64; sample.len()];
    for_each_close_pair(sample, eps0, Strategy::Auto, |i, j, _| {
        if !is_excluded(j) {
            counts[i] += 1;
        }
        if !is_excluded(i) {
            counts[j] += 1;
        }
    });
    Ok(NeighborCounts { counts })
}

/// Sorted adjacency lists of the ε-closeness graph (compressed rows).
#[derive(Debug, Clone)]
pub struct NeighborLists {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl NeighborLists {
    pub fn build(sample: &SeriesSample, eps: f64) -> Result<Self> {
        check_eps(eps)?;
        check_pairs(sample, "neighbour lists")?;
        let n = sample.len();
        if n > u32::MAX as usize {
            return Err(Error::Domain("sample too large for neighbour lists".into()));
        }
        let mut pairs = Vec::new();
        for_each_close_pair(sample, eps, Strategy::Auto, |i, j, _| pairs.push((i as u32, j as u32)));
        let mut degree = vec![0usize; n + 1];
        for &(i, j) in &pairs {
            degree[i as usize + 1] += 1;
            degree[j as usize + 1] += 1;
        }
        for k in 1..=n {
            degree[k] += degree[k - 1];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let mut neighbors = vec![0u32; offsets[n]];
        for &(i, j) in &pairs {
            neighbors[fill[i as usize]] = j;
            fill[i as usize] += 1;
            neighbors[fill[j as usize]] = i;
            fill[j as usize] += 1;
        }
        for i in 0..n {
            neighbors[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        Ok(Self { offsets, neighbors })
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> u64 {
        (self.offsets[i + 1] - self.offsets[i]) as u64
    }

    pub fn are_close(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&(j as u32)).is_ok()
    }

    /// Number of pairs in the graph.
    pub fn pair_count(&self) -> u64 {
        self.neighbors.len() as u64 / 2
    }

    /// `|N(i) ∩ N(j)|` by merging the two sorted lists.
    pub fn common_neighbors(&self, i: usize, j: usize) -> u64 {
        let (a, b) = (self.neighbors(i), self.neighbors(j));
        let (mut x, mut y, mut common) = (0, 0, 0u64);
        while x < a.len() && y < b.len() {
            match a[x].cmp(&b[y]) {
                std::cmp::Ordering::Less => x += 1,
                std::cmp::Ordering::Greater => y += 1,
                std::cmp::Ordering::Equal => {
                    common += 1;
                    x += 1;
                    y += 1;
                }
            }
        }
        common
    }

    /// Lag-`h` triple count; see [`count_uh_triples`].
    pub fn uh_triples(&self, h: usize) -> Result<u64> {
        let n = self.len();
        check_triple_size(n, h)?;
        let partner = h.max(1);
        let mut total = 0u64;
        for i in 0..n - h - 1 {
            if h == 0 {
                let a = self.degree(i) - self.are_close(i, i + partner) as u64;
                total += a * a.saturating_sub(1);
            } else {
                let shared = self.are_close(i, i + h) as u64;
                let a = self.degree(i) - shared;
                let b = self.degree(i + h) - shared;
                // i ∉ N(i) and i+h ∉ N(i+h), so the intersection already
                // avoids both excluded indices
                total += a * b - self.common_neighbors(i, i + h);
            }
        }
        Ok(total)
    }
}

/// Size of the triple index set for lag `h`, `(n - (h+1))(n - 2)(n - 3)`.
pub fn triple_set_size(n: usize, h: usize) -> Result<u64> {
    check_triple_size(n, h)?;
    Ok((n - h - 1) as u64 * (n - 2) as u64 * (n - 3) as u64)
}

fn check_triple_size(n: usize, h: usize) -> Result<()> {
    if n < h + 4 {
        return Err(Error::TooSmall {
            what: "lag triple count",
            needed: h + 4,
            got: n,
        });
    }
    Ok(())
}

/// Counts triples `(i, j, k)` with `X_j` near `X_i` and `X_k` near `X_{i+h}`.
///
/// The index set is `1 <= i <= n - (h+1)`, `j, k ∉ {i, i + max(h, 1)}`,
/// `j ≠ k` (1-based), which has exactly `(n - (h+1))(n - 2)(n - 3)` members
/// for every `h`. The sum factorizes per `i` as `a_i b_i - overlap_i`, where
/// `a_i`, `b_i` are the neighbour counts of `X_i`, `X_{i+h}` outside the
/// excluded indices and `overlap_i` removes the `j = k` diagonal.
pub fn count_uh_triples(sample: &SeriesSample, h: usize, eps0: f64) -> Result<u64> {
    check_triple_size(sample.len(), h)?;
    NeighborLists::build(sample, eps0)?.uh_triples(h)
}
