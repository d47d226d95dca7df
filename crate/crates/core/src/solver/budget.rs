//! Start-node selection, stage count and per-stage budget allocation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Result, WasoError};
use crate::graph::{NodeId, SocialGraph};
use crate::solver::gaussian::gaussian_exceed_probability;
use crate::solver::StartNodeStats;

#[derive(PartialEq)]
struct Ranked {
    sum: f64,
    id: NodeId,
}

impl Eq for Ranked {}

impl Ord for Ranked {
    // Greater is better: larger sum, then smaller id.
    fn cmp(&self, other: &Self) -> Ordering {
        self.sum
            .total_cmp(&other.sum)
            .then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The `m` nodes with the largest interest-plus-incident-tightness sums, ties to the
/// lowest id, returned in ascending id order.
pub fn select_start_nodes(graph: &SocialGraph, m: usize) -> Result<Vec<NodeId>> {
    select_among(graph, m, |_| true)
}

/// As [`select_start_nodes`] but only over nodes whose component can hold `k` nodes.
pub fn select_feasible_start_nodes(graph: &SocialGraph, m: usize, k: usize) -> Result<Vec<NodeId>> {
    let skipped = (0..graph.n()).filter(|&v| graph.component_size(v) < k).count();
    if skipped > 0 {
        log::warn!("{skipped} nodes lie in components smaller than k = {k} and cannot start a sample");
    }
    if skipped == graph.n() {
        return Err(WasoError::Infeasible(format!(
            "no connected component holds k = {k} nodes"
        )));
    }
    select_among(graph, m.min(graph.n() - skipped), |v| graph.component_size(v) >= k)
}

fn select_among(graph: &SocialGraph, m: usize, keep: impl Fn(NodeId) -> bool) -> Result<Vec<NodeId>> {
    if m == 0 || m > graph.n() {
        return Err(WasoError::InvalidArgument(format!(
            "start count {m} must lie in [1, {}]",
            graph.n()
        )));
    }
    let mut heap: BinaryHeap<Ranked> = (0..graph.n())
        .filter(|&v| keep(v))
        .map(|id| Ranked { sum: graph.node_sum(id), id })
        .collect();
    let mut picked: Vec<NodeId> = std::iter::from_fn(|| heap.pop().map(|r| r.id))
        .take(m)
        .collect();
    picked.sort_unstable();
    Ok(picked)
}

/// Number of allocation stages implied by the confidence target `pb` and closeness `alpha`.
///
/// Returns `fallback` when the bound is not usable (n/k <= 1 or the log argument
/// leaves (0, 1)).
pub fn stage_count(t: usize, m: usize, pb: f64, alpha: f64, k: usize, n: usize, fallback: usize) -> usize {
    let _ = m;
    if k == 0 || n == 0 {
        return fallback;
    }
    let ratio = n as f64 / k as f64;
    let arg = 2.0 * (1.0 - pb) / (ratio - 1.0);
    if ratio <= 1.0 || !(arg > 0.0 && arg < 1.0) || !(alpha > 0.0 && alpha < 1.0) {
        return fallback;
    }
    let r = (t as f64 * k as f64 * alpha.ln()) / (n as f64 * arg.ln());
    if !r.is_finite() {
        return fallback;
    }
    (r.floor() as usize).max(1)
}

/// Splits `total` proportionally to `weights` with largest-remainder rounding.
/// Ties in the fractional part go to the lower index. All-zero weights yield zeros.
pub fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || sum <= 0.0 {
        return vec![0; weights.len()];
    }
    let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut out: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = out.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut left = total.saturating_sub(assigned);
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        out[i] += 1;
        left -= 1;
    }
    out
}

/// Even split with the remainder going to the first entries.
pub fn split_evenly(total: usize, parts: usize) -> Vec<usize> {
    if parts == 0 {
        return Vec::new();
    }
    let base = total / parts;
    let extra = total % parts;
    (0..parts).map(|i| base + usize::from(i < extra)).collect()
}

/// Allocation for one stage: samples per start and which starts are newly pruned.
#[derive(Clone, Debug, PartialEq)]
pub struct Allocation {
    pub budgets: Vec<usize>,
    pub pruned: Vec<bool>,
    /// Index of the start holding the best sample so far.
    pub best: usize,
    /// Unnormalized weights the budgets were derived from.
    pub weights: Vec<f64>,
}

fn best_index(stats: &[StartNodeStats]) -> Result<usize> {
    let mut best: Option<usize> = None;
    for (i, s) in stats.iter().enumerate() {
        if s.pruned || s.samples == 0 {
            continue;
        }
        best = match best {
            Some(b) if stats[b].d > s.d || (stats[b].d == s.d && stats[b].start <= s.start) => Some(b),
            _ => Some(i),
        };
    }
    best.ok_or_else(|| WasoError::InvalidArgument("no unpruned start with samples".into()))
}

fn finish(stats: &[StartNodeStats], weights: Vec<f64>, stage_budget: usize, best: usize) -> Allocation {
    let live: Vec<bool> = stats.iter().map(|s| !s.pruned && s.samples > 0).collect();
    let budgets = if weights.iter().all(|&w| w <= 0.0) {
        let mut b = vec![0; stats.len()];
        b[best] = stage_budget;
        b
    } else {
        largest_remainder(&weights, stage_budget)
    };
    let pruned = stats
        .iter()
        .enumerate()
        .map(|(i, s)| s.pruned || (live[i] && budgets[i] == 0 && stage_budget > 0))
        .collect();
    Allocation { budgets, pruned, best, weights }
}

/// Splits `stage_budget` across starts with weights `((d_i - c_b)/(d_b - c_b))^{N_b}`,
/// where `b` holds the best sample. Starts with `d_i <= c_b` get nothing; any start
/// rounded down to zero is pruned. When `d_b == c_b` the split is uniform.
pub fn allocate_budget(stats: &[StartNodeStats], stage_budget: usize) -> Result<Allocation> {
    let b = best_index(stats)?;
    let (cb, db, nb) = (stats[b].c, stats[b].d, stats[b].samples);
    let live = |s: &StartNodeStats| !s.pruned && s.samples > 0;
    let weights: Vec<f64> = if db == cb {
        stats.iter().map(|s| if live(s) { 1.0 } else { 0.0 }).collect()
    } else {
        stats
            .iter()
            .map(|s| {
                if !live(s) || s.d <= cb {
                    0.0
                } else {
                    ((s.d - cb) / (db - cb)).powf(nb as f64)
                }
            })
            .collect()
    };
    Ok(finish(stats, weights, stage_budget, b))
}

/// Gaussian variant: start `i` is weighted by the probability that its best sample
/// beats the best start's, both modelled as maxima of normal draws; the best start
/// itself is weighted one half.
pub fn allocate_budget_gaussian(stats: &[StartNodeStats], stage_budget: usize) -> Result<Allocation> {
    const SIGMA_FLOOR: f64 = 1e-9;
    let b = best_index(stats)?;
    let sb = &stats[b];
    let mut weights = Vec::with_capacity(stats.len());
    for (i, s) in stats.iter().enumerate() {
        let w = if s.pruned || s.samples == 0 {
            0.0
        } else if i == b {
            0.5
        } else {
            gaussian_exceed_probability(
                sb.mean(),
                sb.std_dev().max(SIGMA_FLOOR),
                sb.samples,
                s.mean(),
                s.std_dev().max(SIGMA_FLOOR),
                s.samples,
            )?
        };
        weights.push(w);
    }
    Ok(finish(stats, weights, stage_budget, b))
}
