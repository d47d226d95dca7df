//! Staged sampling shared by the budget-allocation solvers.
//!
//! Phase one picks start nodes. Phase two runs `r` stages: the first splits its
//! budget evenly, later ones reallocate by the running best/worst statistics (or
//! the normal model). The cross-entropy variant also refits a selection vector per
//! start after each stage. Within a stage all samples are drawn in parallel; the
//! stage boundary is a barrier because allocation needs every start's statistics.

use rayon::prelude::*;

use crate::error::{Result, WasoError};
use crate::graph::{NodeId, SocialGraph, WeightMode};
use crate::sampler::{ExpandRequest, Expander, Policy, RandomExpander, SampleKey, SampleVector, Scratch};
use crate::solution::{rank, Solution};
use crate::solver::budget::{
    allocate_budget, allocate_budget_gaussian, select_feasible_start_nodes, split_evenly, stage_count,
};
use crate::solver::cross_entropy::{backtrack_check, init_for_partial, smooth, update_selection_probability};
use crate::solver::{with_workers, Distribution, SolveReport, SolverConfig, StartNodeStats};

/// Samples to draw for one start within a stage.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Job {
    pub slot: usize,
    pub count: usize,
    pub first_index: usize,
}

/// Draws every job of a stage in parallel. Output is grouped per job, in job order,
/// with samples in index order, whatever the worker count.
#[allow(clippy::too_many_arguments)]
pub(crate) fn draw_stage<'p, E, F>(
    graph: &SocialGraph,
    k: usize,
    mode: WeightMode,
    stats: &[StartNodeStats],
    jobs: &[Job],
    stage: usize,
    expander: &E,
    policy_for: F,
) -> Result<Vec<(usize, Vec<SampleVector>)>>
where
    E: Expander + ?Sized,
    F: Fn(usize) -> Policy<'p> + Sync,
{
    let tasks: Vec<(usize, usize)> = jobs
        .iter()
        .enumerate()
        .flat_map(|(j, job)| (job.first_index..job.first_index + job.count).map(move |i| (j, i)))
        .collect();
    let samples = tasks
        .par_iter()
        .map_init(Scratch::new, |scratch, &(j, index)| {
            let st = &stats[jobs[j].slot];
            let req = ExpandRequest {
                graph,
                initial: &st.initial,
                k,
                key: SampleKey { start: st.start, stage, index },
                policy: policy_for(jobs[j].slot),
                mode,
            };
            expander.expand(&req, scratch)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out: Vec<(usize, Vec<SampleVector>)> =
        jobs.iter().map(|j| (j.slot, Vec::with_capacity(j.count))).collect();
    for (&(j, _), s) in tasks.iter().zip(samples) {
        out[j].1.push(s);
    }
    Ok(out)
}

pub(crate) fn finalize(
    graph: &SocialGraph,
    mode: WeightMode,
    stats: Vec<StartNodeStats>,
    stage_best: Vec<f64>,
    allocations: Vec<Vec<usize>>,
) -> Result<SolveReport> {
    let mut winner: Option<(f64, &Vec<NodeId>)> = None;
    for s in &stats {
        if let Some(best) = &s.best {
            if winner.is_none_or(|(w, m)| rank(s.d, best, w, m).is_lt()) {
                winner = Some((s.d, best));
            }
        }
    }
    let (_, members) = winner.ok_or_else(|| WasoError::Infeasible("no sample was drawn".into()))?;
    let solution = Solution::evaluate(graph, members, mode)?;
    let samples_used = stats.iter().map(|s| s.samples).sum();
    Ok(SolveReport {
        solution,
        starts: stats,
        stage_best,
        allocations,
        samples_used,
    })
}

/// Which staged algorithm to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StagedVariant {
    pub cross_entropy: bool,
    pub distribution: Distribution,
}

/// Stage sizes: `T / r` each, the last stage also taking the remainder.
pub fn stage_budgets(total: usize, stages: usize) -> Vec<usize> {
    let stages = stages.max(1);
    let mut out = vec![total / stages; stages];
    *out.last_mut().expect("at least one stage") += total % stages;
    out
}

/// Effective stage count for `m` starts: at least one, and small enough that the
/// first stage gives every start a sample.
pub fn effective_stages(config: &SolverConfig, n: usize, m: usize) -> usize {
    let t = config.budget;
    let r = if config.stages > 0 {
        config.stages
    } else {
        stage_count(t, m, config.confidence, config.alpha, config.k, n, config.fallback_stages)
    };
    if t < m {
        log::warn!("budget {t} is below the start count {m}; running one uniform stage");
        return 1;
    }
    r.clamp(1, (t / m).max(1))
}

/// The staged sampler behind CBAS, CBAS-ND and the Gaussian variant.
///
/// With `initial = Some(partial)` start selection is skipped and a single start
/// grows from `partial` (used for replanning).
pub fn run_staged<E: Expander + ?Sized>(
    graph: &SocialGraph,
    config: &SolverConfig,
    variant: StagedVariant,
    expander: &E,
    initial: Option<&[NodeId]>,
) -> Result<SolveReport> {
    config.validate(graph.n())?;
    let k = config.k;
    let mut stats: Vec<StartNodeStats> = match initial {
        Some(partial) => {
            let mut sorted = partial.to_vec();
            sorted.sort_unstable();
            let start = *sorted
                .first()
                .ok_or_else(|| WasoError::InvalidArgument("empty initial partial".into()))?;
            vec![StartNodeStats::new(start, sorted)]
        }
        None => {
            let m = config.start_count(graph.n());
            select_feasible_start_nodes(graph, m, k)?
                .into_iter()
                .map(|s| StartNodeStats::new(s, vec![s]))
                .collect()
        }
    };
    if variant.cross_entropy {
        for s in &mut stats {
            s.p = Some(init_for_partial(graph.n(), &s.initial, k)?);
        }
    }
    let r = effective_stages(config, graph.n(), stats.len());
    let budgets = stage_budgets(config.budget, r);
    let mut stage_best = Vec::with_capacity(r);
    let mut allocations = Vec::with_capacity(r);

    for (t, &stage_budget) in budgets.iter().enumerate() {
        let stage = t + 1;
        let alloc = if stage == 1 {
            split_evenly(stage_budget, stats.len())
        } else {
            let a = match variant.distribution {
                Distribution::Uniform => allocate_budget(&stats, stage_budget)?,
                Distribution::Gaussian => allocate_budget_gaussian(&stats, stage_budget)?,
            };
            for (s, &p) in stats.iter_mut().zip(&a.pruned) {
                s.pruned = p;
            }
            a.budgets
        };
        let jobs: Vec<Job> = alloc
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c > 0)
            .map(|(slot, &count)| Job { slot, count, first_index: 0 })
            .collect();
        let drawn = draw_stage(graph, k, config.mode, &stats, &jobs, stage, expander, |slot| {
            match &stats[slot].p {
                Some(p) => Policy::Weighted(p),
                None => Policy::Uniform,
            }
        })?;
        for (slot, samples) in drawn {
            let st = &mut stats[slot];
            st.absorb(&samples);
            if variant.cross_entropy {
                let old = st.p.take().expect("initialized above");
                let (fitted, gamma) = update_selection_probability(&samples, config.rho, st.gamma, &old)?;
                let next = smooth(&fitted, &old, config.smooth)?;
                st.gamma = Some(gamma);
                st.p = Some(if backtrack_check(&next, &old, config.backtrack)? {
                    log::debug!("start {} stalled in stage {stage}; keeping previous vector", st.start);
                    old
                } else {
                    next
                });
            }
        }
        stage_best.push(stats.iter().map(|s| s.d).fold(f64::NEG_INFINITY, f64::max));
        allocations.push(alloc);
    }
    finalize(graph, config.mode, stats, stage_best, allocations)
}

fn run_random(graph: &SocialGraph, config: &SolverConfig, variant: StagedVariant) -> Result<SolveReport> {
    let expander = RandomExpander { seed: config.seed };
    with_workers(config.workers, || run_staged(graph, config, variant, &expander, None))?
}

/// Staged allocation with uniform expansion.
pub fn cbas(graph: &SocialGraph, config: &SolverConfig) -> Result<SolveReport> {
    let variant = StagedVariant { cross_entropy: false, distribution: config.distribution };
    run_random(graph, config, variant)
}

/// Staged allocation with cross-entropy guided expansion.
pub fn cbas_nd(graph: &SocialGraph, config: &SolverConfig) -> Result<SolveReport> {
    let variant = StagedVariant { cross_entropy: true, distribution: config.distribution };
    run_random(graph, config, variant)
}

/// Cross-entropy expansion with normal-model budget allocation.
pub fn cbas_nd_g(graph: &SocialGraph, config: &SolverConfig) -> Result<SolveReport> {
    let variant = StagedVariant { cross_entropy: true, distribution: Distribution::Gaussian };
    run_random(graph, config, variant)
}

/// Re-solves after RSVPs: declined nodes leave the graph and confirmed nodes seed
/// every sample, so the result always contains them.
pub fn online_replan(
    graph: &SocialGraph,
    previous: &Solution,
    confirmed: &[NodeId],
    declined: &[NodeId],
    config: &SolverConfig,
) -> Result<Solution> {
    let mut confirmed = confirmed.to_vec();
    confirmed.sort_unstable();
    confirmed.dedup();
    let mut declined = declined.to_vec();
    declined.sort_unstable();
    declined.dedup();
    for &v in confirmed.iter().chain(&declined) {
        if v >= graph.n() {
            return Err(WasoError::InvalidMember(v));
        }
    }
    if let Some(&v) = confirmed.iter().find(|v| !previous.contains(**v)) {
        return Err(WasoError::InvalidArgument(format!(
            "confirmed node {v} is not in the current group"
        )));
    }
    if let Some(&v) = confirmed.iter().find(|v| declined.binary_search(v).is_ok()) {
        return Err(WasoError::InvalidArgument(format!("node {v} both confirmed and declined")));
    }
    if declined.is_empty() && confirmed == previous.members {
        return Ok(previous.clone());
    }

    let keep: Vec<NodeId> = (0..graph.n()).filter(|v| declined.binary_search(v).is_err()).collect();
    let (sub, map) = graph.induced_subgraph(&keep)?;
    if config.k > sub.n() {
        return Err(WasoError::Infeasible(format!(
            "only {} nodes remain for a group of {}",
            sub.n(),
            config.k
        )));
    }
    let local: Vec<NodeId> = confirmed
        .iter()
        .map(|v| map.binary_search(v).expect("confirmed nodes are kept"))
        .collect();
    let mut cfg = config.clone();
    cfg.starts = None;
    let report = if local.is_empty() {
        cbas_nd(&sub, &cfg)?
    } else {
        if !sub.is_connected(&local)? {
            return Err(WasoError::InvalidArgument(
                "confirmed attendees are not connected".into(),
            ));
        }
        let reach = sub.component_size(local[0]);
        if reach < config.k {
            return Err(WasoError::Infeasible(format!(
                "confirmed attendees reach only {reach} nodes, fewer than k = {}",
                config.k
            )));
        }
        cfg.starts = Some(1);
        let variant = StagedVariant { cross_entropy: true, distribution: config.distribution };
        let expander = RandomExpander { seed: config.seed };
        with_workers(config.workers, || run_staged(&sub, &cfg, variant, &expander, Some(&local)))??
    };
    let members: Vec<NodeId> = report.solution.members.iter().map(|&v| map[v]).collect();
    Solution::evaluate(graph, &members, config.mode)
}
