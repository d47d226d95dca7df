use crate::error::{Result, WasoError};
use crate::graph::{NodeId, SocialGraph, WeightMode};
use crate::sampler::{Policy, RandomExpander};
use crate::solution::Solution;
use crate::solver::budget::{select_feasible_start_nodes, split_evenly};
use crate::solver::engine::{draw_stage, finalize, Job};
use crate::solver::{with_workers, SolveReport, SolverConfig, StartNodeStats};

/// Deterministic greedy: start from the highest-interest node that can reach `k`
/// nodes, then repeatedly add the frontier node with the largest willingness
/// increment. Ties go to the lowest id.
pub fn dgreedy(graph: &SocialGraph, k: usize, mode: WeightMode) -> Result<Solution> {
    if k == 0 || k > graph.n() {
        return Err(WasoError::InvalidArgument(format!(
            "k = {k} must lie in [1, {}]",
            graph.n()
        )));
    }
    let start = (0..graph.n())
        .filter(|&v| graph.component_size(v) >= k)
        .fold(None, |best: Option<NodeId>, v| match best {
            Some(b) if graph.interest(b) >= graph.interest(v) => Some(b),
            _ => Some(v),
        })
        .ok_or_else(|| WasoError::Infeasible(format!("no connected component holds k = {k} nodes")))?;

    let mut in_set = vec![false; graph.n()];
    let mut on_frontier = vec![false; graph.n()];
    let mut frontier: Vec<NodeId> = Vec::new();
    let mut members = Vec::with_capacity(k);
    let mut add = |v: NodeId, in_set: &mut Vec<bool>, frontier: &mut Vec<NodeId>| {
        in_set[v] = true;
        members.push(v);
        for &u in graph.neighbors(v) {
            if !in_set[u] && !on_frontier[u] {
                on_frontier[u] = true;
                frontier.push(u);
            }
        }
    };
    add(start, &mut in_set, &mut frontier);
    for _ in 1..k {
        let mut best: Option<(f64, NodeId, usize)> = None;
        for (pos, &v) in frontier.iter().enumerate() {
            let g = graph.gain(v, |j| in_set[j], mode);
            best = match best {
                Some((bg, bv, _)) if bg > g || (bg == g && bv < v) => best,
                _ => Some((g, v, pos)),
            };
        }
        let (_, v, pos) = best.ok_or_else(|| WasoError::Infeasible("frontier exhausted".into()))?;
        frontier.swap_remove(pos);
        add(v, &mut in_set, &mut frontier);
    }
    Solution::evaluate(graph, &members, mode)
}

/// Randomized greedy: every start node is grown `T/m` times, each step drawing the
/// next node with probability proportional to the willingness it would produce.
pub fn rgreedy(graph: &SocialGraph, config: &SolverConfig) -> Result<SolveReport> {
    config.validate(graph.n())?;
    let m = config.start_count(graph.n());
    let starts = select_feasible_start_nodes(graph, m, config.k)?;
    let mut stats: Vec<StartNodeStats> = starts.iter().map(|&s| StartNodeStats::new(s, vec![s])).collect();
    let budgets = split_evenly(config.budget, stats.len());
    let jobs: Vec<Job> = budgets
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, &count)| Job { slot: i, count, first_index: 0 })
        .collect();
    let expander = RandomExpander { seed: config.seed };
    let drawn = with_workers(config.workers, || {
        draw_stage(graph, config.k, config.mode, &stats, &jobs, 0, &expander, |_| Policy::Greedy)
    })??;
    let mut best_so_far = Vec::new();
    for (slot, samples) in drawn {
        stats[slot].absorb(&samples);
    }
    best_so_far.push(stats.iter().map(|s| s.d).fold(f64::NEG_INFINITY, f64::max));
    finalize(graph, config.mode, stats, best_so_far, vec![budgets])
}
