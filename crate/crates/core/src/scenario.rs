//! Graph transforms for common planning situations, and the reduction that lets
//! the connected solvers handle groups with no connectivity requirement.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WasoError};
use crate::graph::{GraphBuilder, NodeId, NodeRecord, SocialGraph, WeightMode};
use crate::solution::Solution;
use crate::solver::{solve, SolverConfig};

pub const DEFAULT_EPSILON: f64 = 1.0;

/// A scenario as it appears in configuration: `{"kind": ..., "params": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ScenarioSpec {
    /// Each pair attends together and is treated as a single node.
    CoupleMerge { pairs: Vec<(NodeId, NodeId)> },
    /// Each pair must not attend together.
    Foe {
        pairs: Vec<(NodeId, NodeId)>,
        #[serde(default)]
        penalty: Option<f64>,
    },
    /// A host invites friends; only the host's neighbours are candidates and they
    /// weigh interest alone.
    Invitation { host: NodeId },
    /// Interest only.
    Exhibition,
    /// Tightness only.
    Party,
    /// The group may split into disconnected parts.
    SeparateGroups {
        #[serde(default)]
        epsilon: Option<f64>,
    },
}

impl ScenarioSpec {
    pub fn validate(&self, n: usize) -> Result<()> {
        let check = |v: NodeId| if v < n { Ok(()) } else { Err(WasoError::InvalidMember(v)) };
        match self {
            ScenarioSpec::CoupleMerge { pairs } | ScenarioSpec::Foe { pairs, .. } => {
                for &(i, j) in pairs {
                    check(i)?;
                    check(j)?;
                    if i == j {
                        return Err(WasoError::InvalidArgument(format!("pair ({i}, {i}) repeats a node")));
                    }
                }
            }
            ScenarioSpec::Invitation { host } => check(*host)?,
            ScenarioSpec::Exhibition | ScenarioSpec::Party => {}
            ScenarioSpec::SeparateGroups { .. } => {}
        }
        if let ScenarioSpec::Foe { penalty: Some(m), .. } = self {
            if !(m.is_finite() && *m > 0.0) {
                return Err(WasoError::InvalidArgument(format!("foe penalty {m} must be positive")));
            }
        }
        if let ScenarioSpec::SeparateGroups { epsilon: Some(e) } = self {
            if !(e.is_finite() && *e > 0.0) {
                return Err(WasoError::InvalidArgument(format!("epsilon {e} must be positive")));
            }
        }
        Ok(())
    }
}

/// Replaces `i` and `j` by one node whose interest and tightness are the sums of
/// theirs; the edges between them are dropped.
///
/// The merged node takes the smaller id, the larger id is removed and later ids
/// shift down by one. Returns the new graph and, for each old id, its new id.
/// Group sizes now count the couple once, so `k` usually needs lowering by one.
pub fn merge_couple(graph: &SocialGraph, i: NodeId, j: NodeId) -> Result<(SocialGraph, Vec<NodeId>)> {
    for v in [i, j] {
        if v >= graph.n() {
            return Err(WasoError::InvalidMember(v));
        }
    }
    if i == j {
        return Err(WasoError::InvalidArgument(format!("cannot merge node {i} with itself")));
    }
    warn!("merging nodes {i} and {j}: the group size k counts the couple as one node");
    let (keep, gone) = (i.min(j), i.max(j));
    let map: Vec<NodeId> = (0..graph.n())
        .map(|v| match v {
            v if v == gone => keep,
            v if v > gone => v - 1,
            v => v,
        })
        .collect();
    let mut b = GraphBuilder::new();
    for v in 0..graph.n() {
        if v == gone {
            continue;
        }
        if v == keep {
            let rec = NodeRecord {
                interest: graph.interest(i) + graph.interest(j),
                lambda: (graph.lambda(i) + graph.lambda(j)) / 2.0,
            };
            b.add_labeled_node(format!("{}+{}", graph.label(keep), graph.label(gone)), rec);
        } else {
            b.add_labeled_node(graph.label(v), *graph.node(v));
        }
    }
    for u in 0..graph.n() {
        for &(v, t) in graph.out_edges(u) {
            let (a, c) = (map[u], map[v]);
            if a == c {
                continue;
            }
            let sum = b.tightness(a, c).unwrap_or(0.0) + t;
            b.set_tightness(a, c, sum)?;
        }
    }
    Ok((b.build()?, map))
}

/// Default foe penalty: one more than the absolute score mass of everything except
/// the pairs themselves, so the default does not move when applied twice.
pub fn default_foe_penalty(graph: &SocialGraph, pairs: &[(NodeId, NodeId)]) -> f64 {
    let is_pair = |a: NodeId, b: NodeId| pairs.iter().any(|&(i, j)| (a, b) == (i, j) || (a, b) == (j, i));
    let mut s: f64 = graph.nodes().iter().map(|r| r.interest.abs()).sum();
    for u in 0..graph.n() {
        for &(v, t) in graph.out_edges(u) {
            if !is_pair(u, v) {
                s += t.abs();
            }
        }
    }
    1.0 + s
}

/// Sets `tau(i, j) = tau(j, i) = -penalty` for every pair.
pub fn mark_foes(graph: &SocialGraph, pairs: &[(NodeId, NodeId)], penalty: Option<f64>) -> Result<SocialGraph> {
    let m = penalty.unwrap_or_else(|| default_foe_penalty(graph, pairs));
    if !(m.is_finite() && m > 0.0) {
        return Err(WasoError::InvalidArgument(format!("foe penalty {m} must be positive")));
    }
    let mut b = graph.to_builder();
    for &(i, j) in pairs {
        b.set_tightness(i, j, -m)?;
        b.set_tightness(j, i, -m)?;
    }
    b.build()
}

pub fn mark_foe(graph: &SocialGraph, i: NodeId, j: NodeId, penalty: Option<f64>) -> Result<SocialGraph> {
    mark_foes(graph, &[(i, j)], penalty)
}

/// Host plus neighbours, with every neighbour's lambda set to 1. Returns the
/// subgraph and the original id of each of its nodes.
pub fn invitation(graph: &SocialGraph, host: NodeId) -> Result<(SocialGraph, Vec<NodeId>)> {
    if host >= graph.n() {
        return Err(WasoError::InvalidMember(host));
    }
    if graph.neighbors(host).is_empty() {
        return Err(WasoError::EmptyCandidates(host));
    }
    let mut keep = graph.neighbors(host).to_vec();
    keep.push(host);
    let (sub, original) = graph.induced_subgraph(&keep)?;
    let mut b = sub.to_builder();
    for (new, &old) in original.iter().enumerate() {
        if old != host {
            b.set_lambda(new, 1.0)?;
        }
    }
    Ok((b.build()?, original))
}

pub fn with_uniform_lambda(graph: &SocialGraph, lambda: f64) -> Result<SocialGraph> {
    let mut b = graph.to_builder();
    for v in 0..graph.n() {
        b.set_lambda(v, lambda)?;
    }
    b.build()
}

/// Adds a node with zero tightness to and from every node and interest
/// `epsilon` plus the graph's absolute score mass, so that any optimal group of
/// size `k + 1` contains it. Returns the graph and the new node's id.
pub fn add_virtual_node(graph: &SocialGraph, epsilon: f64) -> Result<(SocialGraph, NodeId)> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(WasoError::InvalidArgument(format!("epsilon {epsilon} must be positive")));
    }
    let mut b = graph.to_builder();
    let v = b.add_labeled_node("virtual", NodeRecord { interest: epsilon + graph.total_abs_score(), lambda: 1.0 });
    for u in 0..graph.n() {
        b.set_tightness(v, u, 0.0)?;
        b.set_tightness(u, v, 0.0)?;
    }
    Ok((b.build()?, v))
}

/// Best `k`-node group without a connectivity requirement, found by solving the
/// connected problem for `k + 1` nodes on the graph with a virtual node added.
///
/// If a heuristic misses the virtual node, the member whose removal costs the
/// least is dropped instead. Willingness is reported on the original graph.
pub fn solve_waso_dis(graph: &SocialGraph, config: &SolverConfig, epsilon: f64) -> Result<Solution> {
    if config.k == 0 || config.k > graph.n() {
        return Err(WasoError::InvalidArgument(format!(
            "k = {} must lie in [1, {}]",
            config.k,
            graph.n()
        )));
    }
    let (aug, v) = add_virtual_node(graph, epsilon)?;
    let mut cfg = config.clone();
    cfg.k += 1;
    let report = solve(&aug, &cfg)?;
    let mut members = report.solution.members;
    if let Some(pos) = members.iter().position(|&u| u == v) {
        members.remove(pos);
    } else {
        let drop = (0..members.len())
            .map(|pos| {
                let rest: Vec<NodeId> = members.iter().enumerate().filter(|&(p, _)| p != pos).map(|(_, &u)| u).collect();
                (graph.willingness_sorted(&rest, config.mode), pos)
            })
            .fold(None, |best: Option<(f64, usize)>, c| match best {
                Some(b) if b.0 >= c.0 => Some(b),
                _ => Some(c),
            })
            .map(|(_, pos)| pos)
            .expect("k + 1 >= 2 members");
        members.remove(drop);
    }
    Solution::evaluate(graph, &members, config.mode)
}

/// A transformed graph plus what is needed to read results back.
#[derive(Clone, Debug)]
pub struct ScenarioGraph {
    pub graph: SocialGraph,
    pub mode: WeightMode,
    /// For each node of `graph`, the original nodes it stands for.
    pub origin: Vec<Vec<NodeId>>,
    /// Set for the separate-groups scenario: solve through the virtual-node reduction.
    pub epsilon: Option<f64>,
}

impl ScenarioGraph {
    pub fn identity(graph: SocialGraph, mode: WeightMode) -> Self {
        let origin = (0..graph.n()).map(|v| vec![v]).collect();
        ScenarioGraph { graph, mode, origin, epsilon: None }
    }

    /// Original ids behind a set of transformed ids, sorted.
    pub fn original_members(&self, members: &[NodeId]) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = members.iter().flat_map(|&v| self.origin[v].iter().copied()).collect();
        out.sort_unstable();
        out
    }
}

/// Applies a scenario. `mode` is the caller's choice and is overridden to
/// lambda weighting by the invitation, exhibition and party profiles.
pub fn apply_scenario(graph: &SocialGraph, spec: &ScenarioSpec, mode: WeightMode) -> Result<ScenarioGraph> {
    spec.validate(graph.n())?;
    match spec {
        ScenarioSpec::CoupleMerge { pairs } => {
            let mut current = ScenarioGraph::identity(graph.clone(), mode);
            // Track where each original node currently lives so later pairs can
            // name original ids.
            let mut at: Vec<NodeId> = (0..graph.n()).collect();
            for &(i, j) in pairs {
                let (a, b) = (at[i], at[j]);
                if a == b {
                    return Err(WasoError::InvalidArgument(format!("nodes {i} and {j} are already merged")));
                }
                let (g, map) = merge_couple(&current.graph, a, b)?;
                let mut origin = vec![Vec::new(); g.n()];
                for (old, members) in current.origin.into_iter().enumerate() {
                    origin[map[old]].extend(members);
                }
                for list in &mut origin {
                    list.sort_unstable();
                }
                for pos in &mut at {
                    *pos = map[*pos];
                }
                current = ScenarioGraph { graph: g, mode, origin, epsilon: None };
            }
            Ok(current)
        }
        ScenarioSpec::Foe { pairs, penalty } => Ok(ScenarioGraph::identity(mark_foes(graph, pairs, *penalty)?, mode)),
        ScenarioSpec::Invitation { host } => {
            let (g, original) = invitation(graph, *host)?;
            Ok(ScenarioGraph {
                graph: g,
                mode: WeightMode::LambdaWeighted,
                origin: original.into_iter().map(|v| vec![v]).collect(),
                epsilon: None,
            })
        }
        ScenarioSpec::Exhibition => {
            Ok(ScenarioGraph::identity(with_uniform_lambda(graph, 1.0)?, WeightMode::LambdaWeighted))
        }
        ScenarioSpec::Party => Ok(ScenarioGraph::identity(with_uniform_lambda(graph, 0.0)?, WeightMode::LambdaWeighted)),
        ScenarioSpec::SeparateGroups { epsilon } => {
            let mut sg = ScenarioGraph::identity(graph.clone(), mode);
            sg.epsilon = Some(epsilon.unwrap_or(DEFAULT_EPSILON));
            Ok(sg)
        }
    }
}

/// Result of solving under a scenario.
#[derive(Clone, Debug, Serialize)]
pub struct ScenarioOutcome {
    /// Solution in the transformed graph's ids.
    pub solution: Solution,
    /// The same group in original ids.
    pub members: Vec<NodeId>,
}

pub fn solve_scenario(graph: &SocialGraph, spec: &ScenarioSpec, config: &SolverConfig) -> Result<ScenarioOutcome> {
    let sg = apply_scenario(graph, spec, config.mode)?;
    let mut cfg = config.clone();
    cfg.mode = sg.mode;
    let solution = match sg.epsilon {
        Some(eps) => solve_waso_dis(&sg.graph, &cfg, eps)?,
        None => solve(&sg.graph, &cfg)?.solution,
    };
    let members = sg.original_members(&solution.members);
    Ok(ScenarioOutcome { solution, members })
}
