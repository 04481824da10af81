//! Attribute similarity, similarity-preserving cyclic ordering and the
//! circular generalized-barycentric embedding of samples.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::NormalizedTable;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LayoutError {
    #[error("correlation distance needs at least 2 samples, got {0}")]
    TooFewRows(usize),
    #[error("ordering needs at least 3 attributes, got {0}")]
    TooFewAttributes(usize),
    #[error("order is not a permutation of 0..{0}")]
    InvalidOrder(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMetric {
    /// `1 − |r|` with Pearson `r`; constant columns have `r = 0`.
    #[default]
    OneMinusAbsCorr,
    /// Euclidean distance between columns, scaled by the largest one.
    ColumnEuclidean,
}

/// Symmetric, zero-diagonal `n × n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds from a full row-major matrix, symmetrizing by averaging and
    /// zeroing the diagonal.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (rows[i][j] + rows[j][i]);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        Self { n, d }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    /// Sum of distances between cyclically adjacent entries of `order`.
    pub fn cycle_cost(&self, order: &[usize]) -> f64 {
        let n = order.len();
        (0..n).map(|k| self.get(order[k], order[(k + 1) % n])).sum()
    }
}

pub fn attribute_distances(
    norm: &NormalizedTable,
    metric: DistanceMetric,
) -> Result<DistanceMatrix, LayoutError> {
    let n = norm.n_attributes();
    let m = norm.n_samples();
    let columns: Vec<Vec<f64>> = (0..n).map(|i| norm.column(i)).collect();
    let mut d = vec![0.0; n * n];
    match metric {
        DistanceMetric::OneMinusAbsCorr => {
            if m < 2 {
                return Err(LayoutError::TooFewRows(m));
            }
            let centered: Vec<(Vec<f64>, f64)> = columns
                .iter()
                .map(|c| {
                    let mean = c.iter().sum::<f64>() / m as f64;
                    let dev: Vec<f64> = c.iter().map(|v| v - mean).collect();
                    let ss = dev.iter().map(|v| v * v).sum::<f64>();
                    (dev, ss)
                })
                .collect();
            for i in 0..n {
                for j in (i + 1)..n {
                    let (a, saa) = &centered[i];
                    let (b, sbb) = &centered[j];
                    let r = if *saa > 0.0 && *sbb > 0.0 {
                        let sab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                        (sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0)
                    } else {
                        0.0
                    };
                    let v = 1.0 - r.abs();
                    d[i * n + j] = v;
                    d[j * n + i] = v;
                }
            }
        }
        DistanceMetric::ColumnEuclidean => {
            let mut max = 0.0f64;
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = columns[i]
                        .iter()
                        .zip(&columns[j])
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum::<f64>()
                        .sqrt();
                    d[i * n + j] = v;
                    d[j * n + i] = v;
                    max = max.max(v);
                }
            }
            if max > 0.0 {
                d.iter_mut().for_each(|v| *v /= max);
            }
        }
    }
    Ok(DistanceMatrix { n, d })
}

/// A cyclic attribute order together with its adjacency cost.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CyclicOrder {
    pub order: Vec<usize>,
    pub cost: f64,
}

const IMPROVEMENT_EPS: f64 = 1e-12;

/// Largest attribute count [`order_attributes`] solves exactly.
pub const EXACT_MAX_ATTRIBUTES: usize = 12;
/// Above this, an explicit `Exact` request falls back to `Refined`; the
/// dynamic program's tables grow as `n·2^n`.
const EXACT_HARD_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderingStrategy {
    /// Nearest-neighbour tour from the closest pair, unrefined.
    Greedy,
    /// Greedy tour refined by 2-opt and Or-opt to a local optimum.
    Refined,
    /// Held–Karp over all cyclic orders; `Refined` above 16 attributes.
    Exact,
}

/// Orders attributes around the circle so similar attributes are adjacent.
///
/// Exact for up to [`EXACT_MAX_ATTRIBUTES`] attributes, local search above.
/// The result is rotated to start at attribute 0 and oriented so
/// `order[1] < order[n-1]`.
pub fn order_attributes(d: &DistanceMatrix) -> Result<CyclicOrder, LayoutError> {
    let strategy = if d.len() <= EXACT_MAX_ATTRIBUTES { OrderingStrategy::Exact } else { OrderingStrategy::Refined };
    order_attributes_with(d, strategy)
}

/// Like [`order_attributes`] with an explicit strategy. `Refined` also
/// refines the identity order and keeps it if cheaper, so its cost never
/// exceeds the identity's. Ties go to the lowest attribute index.
pub fn order_attributes_with(d: &DistanceMatrix, strategy: OrderingStrategy) -> Result<CyclicOrder, LayoutError> {
    let n = d.len();
    if n < 3 {
        return Err(LayoutError::TooFewAttributes(n));
    }
    let mut order = match strategy {
        OrderingStrategy::Greedy => nearest_neighbour_tour(d),
        OrderingStrategy::Refined => {
            let mut greedy = nearest_neighbour_tour(d);
            let mut identity: Vec<usize> = (0..n).collect();
            local_search(d, &mut greedy);
            local_search(d, &mut identity);
            if d.cycle_cost(&identity) < d.cycle_cost(&greedy) - IMPROVEMENT_EPS {
                identity
            } else {
                greedy
            }
        }
        OrderingStrategy::Exact if n <= EXACT_HARD_LIMIT => held_karp(d),
        OrderingStrategy::Exact => return order_attributes_with(d, OrderingStrategy::Refined),
    };
    canonicalize(&mut order);
    let cost = d.cycle_cost(&order);
    Ok(CyclicOrder { order, cost })
}

/// Minimum-cost Hamiltonian cycle through all attributes, starting at 0.
fn held_karp(d: &DistanceMatrix) -> Vec<usize> {
    let n = d.len();
    let k = n - 1;
    let full = (1usize << k) - 1;
    // cost[mask * k + j]: cheapest path from 0 through `mask`, ending at node j+1.
    let mut cost = vec![f64::INFINITY; (full + 1) * k];
    let mut prev = vec![usize::MAX; (full + 1) * k];
    for j in 0..k {
        cost[(1 << j) * k + j] = d.get(0, j + 1);
    }
    for mask in 1..=full {
        for j in 0..k {
            let c = cost[mask * k + j];
            if mask & (1 << j) == 0 || !c.is_finite() {
                continue;
            }
            for t in 0..k {
                if mask & (1 << t) != 0 {
                    continue;
                }
                let next = mask | (1 << t);
                let cand = c + d.get(j + 1, t + 1);
                if cand < cost[next * k + t] {
                    cost[next * k + t] = cand;
                    prev[next * k + t] = j;
                }
            }
        }
    }
    let mut last = 0;
    let mut best = f64::INFINITY;
    for j in 0..k {
        let c = cost[full * k + j] + d.get(j + 1, 0);
        if c < best {
            best = c;
            last = j;
        }
    }
    let mut tour = Vec::with_capacity(n);
    let mut mask = full;
    let mut j = last;
    while j != usize::MAX {
        tour.push(j + 1);
        let p = prev[mask * k + j];
        mask &= !(1 << j);
        j = p;
    }
    tour.push(0);
    tour.reverse();
    tour
}

fn nearest_neighbour_tour(d: &DistanceMatrix) -> Vec<usize> {
    let n = d.len();
    let mut seed = (0, 1);
    for i in 0..n {
        for j in (i + 1)..n {
            if d.get(i, j) < d.get(seed.0, seed.1) {
                seed = (i, j);
            }
        }
    }
    let mut visited = vec![false; n];
    let mut tour = vec![seed.0, seed.1];
    visited[seed.0] = true;
    visited[seed.1] = true;
    while tour.len() < n {
        let last = *tour.last().unwrap();
        let next = (0..n)
            .filter(|&k| !visited[k])
            .min_by(|&a, &b| d.get(last, a).total_cmp(&d.get(last, b)))
            .unwrap();
        visited[next] = true;
        tour.push(next);
    }
    tour
}

/// Alternates 2-opt and Or-opt until neither improves the tour.
fn local_search(d: &DistanceMatrix, tour: &mut Vec<usize>) {
    loop {
        two_opt(d, tour);
        if !or_opt(d, tour) {
            break;
        }
    }
}

/// Best-improvement 2-opt on a closed tour.
fn two_opt(d: &DistanceMatrix, tour: &mut [usize]) {
    let n = tour.len();
    loop {
        let mut best = -IMPROVEMENT_EPS;
        let mut mv = None;
        for i in 0..n - 1 {
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (a, b) = (tour[i], tour[i + 1]);
                let (c, e) = (tour[j], tour[(j + 1) % n]);
                let delta = d.get(a, c) + d.get(b, e) - d.get(a, b) - d.get(c, e);
                if delta < best {
                    best = delta;
                    mv = Some((i + 1, j));
                }
            }
        }
        match mv {
            Some((lo, hi)) => tour[lo..=hi].reverse(),
            None => break,
        }
    }
}

/// Moves one segment of up to three attributes, possibly reversed, to the
/// best other gap. Returns whether the tour changed.
fn or_opt(d: &DistanceMatrix, tour: &mut Vec<usize>) -> bool {
    let n = tour.len();
    let mut best = -IMPROVEMENT_EPS;
    let mut mv = None;
    for len in 1..=3.min(n - 2) {
        for start in 0..n {
            let seg: Vec<usize> = (0..len).map(|k| tour[(start + k) % n]).collect();
            let before = tour[(start + n - 1) % n];
            let after = tour[(start + len) % n];
            let removed = d.get(before, seg[0]) + d.get(seg[len - 1], after) - d.get(before, after);
            // Gaps (a, b) of the remaining path `after ..= before`.
            for g in 0..(n - len - 1) {
                let a = tour[(start + len + g) % n];
                let b = tour[(start + len + g + 1) % n];
                for reversed in [false, true] {
                    let (first, last) = if reversed { (seg[len - 1], seg[0]) } else { (seg[0], seg[len - 1]) };
                    let delta = d.get(a, first) + d.get(last, b) - d.get(a, b) - removed;
                    if delta < best {
                        best = delta;
                        mv = Some((start, len, g, reversed));
                    }
                }
            }
        }
    }
    let Some((start, len, g, reversed)) = mv else { return false };
    let mut seg: Vec<usize> = (0..len).map(|k| tour[(start + k) % n]).collect();
    if reversed {
        seg.reverse();
    }
    let mut rest: Vec<usize> = (0..(n - len)).map(|k| tour[(start + len + k) % n]).collect();
    rest.splice(g + 1..g + 1, seg);
    *tour = rest;
    true
}

fn canonicalize(order: &mut [usize]) {
    let n = order.len();
    let start = order.iter().position(|&v| v == 0).unwrap_or(0);
    order.rotate_left(start);
    if n > 2 && order[1] > order[n - 1] {
        order[1..].reverse();
    }
}

/// Attribute order, vertex placement and embedded sample positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutModel {
    /// `order[k]` is the attribute placed at the k-th vertex.
    pub order: Vec<usize>,
    /// Angle of each attribute's vertex, indexed by attribute.
    pub vertex_angles: Vec<f64>,
    pub points: Vec<[f64; 2]>,
}

impl LayoutModel {
    pub fn vertex(&self, attribute: usize) -> [f64; 2] {
        let a = self.vertex_angles[attribute];
        [a.cos(), a.sin()]
    }

    pub fn vertices(&self) -> Vec<[f64; 2]> {
        (0..self.vertex_angles.len()).map(|i| self.vertex(i)).collect()
    }
}

/// Vertex angle of each attribute: the attribute at position `k` of the
/// cyclic order sits at `2πk/n`.
pub fn vertex_angles(order: &[usize]) -> Result<Vec<f64>, LayoutError> {
    let n = order.len();
    let mut angles = vec![f64::NAN; n];
    for (k, &attr) in order.iter().enumerate() {
        if attr >= n || !angles[attr].is_nan() {
            return Err(LayoutError::InvalidOrder(n));
        }
        angles[attr] = TAU * k as f64 / n as f64;
    }
    Ok(angles)
}

/// Places each sample at the weighted mean of the attribute vertices, using
/// its normalized values as weights. Rows summing to zero go to the origin.
pub fn gbc_embed(norm: &NormalizedTable, order: &[usize]) -> Result<LayoutModel, LayoutError> {
    let n = norm.n_attributes();
    if order.len() != n {
        return Err(LayoutError::InvalidOrder(n));
    }
    let vertex_angles = vertex_angles(order)?;
    let vertices: Vec<[f64; 2]> = vertex_angles.iter().map(|a| [a.cos(), a.sin()]).collect();
    let rows: Vec<&[f64]> = norm.rows().collect();
    let points = rows.par_iter().map(|row| barycenter(row, &vertices)).collect();
    Ok(LayoutModel { order: order.to_vec(), vertex_angles, points })
}

/// `Σ w_i v_i / Σ w_i`, summed in attribute-index order.
pub fn barycenter(weights: &[f64], vertices: &[[f64; 2]]) -> [f64; 2] {
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sw = 0.0;
    for (w, v) in weights.iter().zip(vertices) {
        sx += w * v[0];
        sy += w * v[1];
        sw += w;
    }
    if sw == 0.0 {
        [0.0, 0.0]
    } else {
        [sx / sw, sy / sw]
    }
}
