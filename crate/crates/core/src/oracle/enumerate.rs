//! Exhaustive search over connected (or arbitrary) k-subsets.

use rayon::prelude::*;

use crate::error::{Result, WasoError};
use crate::graph::{NodeId, SocialGraph, WeightMode};
use crate::solution::{rank, Solution};

/// Refuses exhaustive work above a node count or subset count unless disabled.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaleGuard {
    pub max_nodes: usize,
    pub max_subsets: f64,
    pub enabled: bool,
}

impl Default for ScaleGuard {
    fn default() -> Self {
        ScaleGuard {
            max_nodes: 25,
            max_subsets: 1e7,
            enabled: true,
        }
    }
}

impl ScaleGuard {
    pub fn disabled() -> Self {
        ScaleGuard {
            enabled: false,
            ..Self::default()
        }
    }

    pub fn check(&self, n: usize, k: usize) -> Result<()> {
        if !self.enabled {
            return Ok(());
        }
        if n > self.max_nodes {
            return Err(WasoError::ScaleGuard(format!(
                "{n} nodes exceeds the exhaustive-search limit of {}",
                self.max_nodes
            )));
        }
        let subsets = binomial(n, k);
        if subsets > self.max_subsets {
            return Err(WasoError::ScaleGuard(format!(
                "C({n}, {k}) = {subsets:.3e} subsets exceeds {:.0e}",
                self.max_subsets
            )));
        }
        Ok(())
    }
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn check_k(graph: &SocialGraph, k: usize) -> Result<()> {
    if k == 0 || k > graph.n() {
        return Err(WasoError::InvalidArgument(format!(
            "k = {k} must lie in [1, {}]",
            graph.n()
        )));
    }
    Ok(())
}

// Extension step of the anchored enumeration. `ext` holds candidates larger than
// the anchor; `near[u] > 0` marks nodes in or adjacent to the current subset so
// each new candidate is added by exactly one member.
fn extend(
    graph: &SocialGraph,
    anchor: NodeId,
    k: usize,
    sub: &mut Vec<NodeId>,
    mut ext: Vec<NodeId>,
    near: &mut [u32],
    visit: &mut dyn FnMut(&[NodeId]),
) {
    if sub.len() == k {
        visit(sub);
        return;
    }
    while let Some(w) = ext.pop() {
        let mut next = ext.clone();
        for &u in graph.neighbors(w) {
            if u > anchor && near[u] == 0 {
                next.push(u);
            }
        }
        for &u in graph.neighbors(w) {
            near[u] += 1;
        }
        sub.push(w);
        extend(graph, anchor, k, sub, next, near, visit);
        sub.pop();
        for &u in graph.neighbors(w) {
            near[u] -= 1;
        }
    }
}

fn enumerate_anchor(graph: &SocialGraph, anchor: NodeId, k: usize, visit: &mut dyn FnMut(&[NodeId])) {
    let mut near = vec![0u32; graph.n()];
    near[anchor] += 1;
    for &u in graph.neighbors(anchor) {
        near[u] += 1;
    }
    let ext: Vec<NodeId> = graph.neighbors(anchor).iter().copied().filter(|&u| u > anchor).collect();
    let mut sub = vec![anchor];
    extend(graph, anchor, k, &mut sub, ext, &mut near, visit);
}

/// Calls `visit` once for every connected k-subset, anchored on its minimum id.
/// The slice passed to `visit` is unsorted.
pub fn enumerate_connected(graph: &SocialGraph, k: usize, mut visit: impl FnMut(&[NodeId])) -> Result<()> {
    check_k(graph, k)?;
    for anchor in 0..graph.n() {
        enumerate_anchor(graph, anchor, k, &mut visit);
    }
    Ok(())
}

pub fn count_connected(graph: &SocialGraph, k: usize) -> Result<usize> {
    let mut count = 0;
    enumerate_connected(graph, k, |_| count += 1)?;
    Ok(count)
}

fn keep_best(best: &mut Option<(f64, Vec<NodeId>)>, w: f64, members: &[NodeId]) {
    let better = match best {
        None => true,
        Some((bw, bm)) => rank(w, members, *bw, bm).is_lt(),
    };
    if better {
        *best = Some((w, members.to_vec()));
    }
}

fn merge(a: Option<(f64, Vec<NodeId>)>, b: Option<(f64, Vec<NodeId>)>) -> Option<(f64, Vec<NodeId>)> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if rank(y.0, &y.1, x.0, &x.1).is_lt() { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Best connected k-subset under the default scale guard.
pub fn brute_force(graph: &SocialGraph, k: usize) -> Result<Solution> {
    brute_force_with(graph, k, WeightMode::Unweighted, ScaleGuard::default())
}

/// Best connected k-subset; ties go to the lexicographically smallest member list.
pub fn brute_force_with(graph: &SocialGraph, k: usize, mode: WeightMode, guard: ScaleGuard) -> Result<Solution> {
    check_k(graph, k)?;
    guard.check(graph.n(), k)?;
    let best = (0..graph.n())
        .into_par_iter()
        .map(|anchor| {
            let mut best = None;
            let mut sorted = Vec::with_capacity(k);
            enumerate_anchor(graph, anchor, k, &mut |sub| {
                sorted.clear();
                sorted.extend_from_slice(sub);
                sorted.sort_unstable();
                let w = graph.willingness_sorted(&sorted, mode);
                keep_best(&mut best, w, &sorted);
            });
            best
        })
        .reduce(|| None, merge);
    let (_, members) = best.ok_or_else(|| {
        WasoError::Infeasible(format!("no connected component holds k = {k} nodes"))
    })?;
    Solution::evaluate(graph, &members, mode)
}

/// Calls `visit` with every k-subset in lexicographic order.
pub fn enumerate_subsets(n: usize, k: usize, mut visit: impl FnMut(&[NodeId])) {
    if k > n {
        return;
    }
    let mut idx: Vec<NodeId> = (0..k).collect();
    loop {
        visit(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Best k-subset with no connectivity requirement, under the default guard.
pub fn brute_force_dis(graph: &SocialGraph, k: usize) -> Result<Solution> {
    brute_force_dis_with(graph, k, WeightMode::Unweighted, ScaleGuard::default())
}

pub fn brute_force_dis_with(graph: &SocialGraph, k: usize, mode: WeightMode, guard: ScaleGuard) -> Result<Solution> {
    check_k(graph, k)?;
    guard.check(graph.n(), k)?;
    let mut best = None;
    enumerate_subsets(graph.n(), k, |s| {
        let w = graph.willingness_sorted(s, mode);
        keep_best(&mut best, w, s);
    });
    let (_, members) = best.expect("k <= n gives at least one subset");
    Solution::evaluate(graph, &members, mode)
}
