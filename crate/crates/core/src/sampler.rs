//! Random growth of a partial solution into a connected k-node sample.
//!
//! Every sample owns an RNG stream derived from `(seed, start, stage, index)`, so
//! results do not depend on how samples are spread across worker threads.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Result, WasoError};
use crate::graph::{NodeId, SocialGraph, WeightMode};
use crate::probability::SelectionProbabilityVector;
use crate::solution::rank;

/// A sampled group: sorted members plus willingness.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleVector {
    pub members: Vec<NodeId>,
    pub willingness: f64,
}

impl SampleVector {
    pub fn contains(&self, v: NodeId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    /// Bernoulli membership vector of length `n`.
    pub fn to_bits(&self, n: usize) -> Vec<bool> {
        let mut bits = vec![false; n];
        for &v in &self.members {
            bits[v] = true;
        }
        bits
    }
}

/// Identifies one sample: which start, which stage, which slot within the stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SampleKey {
    pub start: NodeId,
    pub stage: usize,
    pub index: usize,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn stream_seed(seed: u64, key: SampleKey) -> u64 {
    let mut h = splitmix64(seed);
    for part in [key.start as u64, key.stage as u64, key.index as u64] {
        h = splitmix64(h ^ part);
    }
    h
}

pub fn stream_rng(seed: u64, key: SampleKey) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, key))
}

/// How the next node is drawn from the frontier.
#[derive(Clone, Copy, Debug)]
pub enum Policy<'a> {
    Uniform,
    /// Proportional to the selection probability, restricted to the frontier.
    Weighted(&'a SelectionProbabilityVector),
    /// Proportional to the willingness of the partial solution plus the candidate.
    Greedy,
}

/// Reusable per-worker buffers. Membership uses epoch stamps so nothing is cleared
/// between samples.
#[derive(Default)]
pub struct Scratch {
    epoch: u32,
    member: Vec<u32>,
    in_frontier: Vec<u32>,
    gain: Vec<f64>,
    frontier: Vec<NodeId>,
    members: Vec<NodeId>,
    weights: Vec<f64>,
}

impl Scratch {
    pub fn new() -> Self {
        Self::default()
    }

    fn reset(&mut self, n: usize) {
        if self.member.len() != n || self.epoch == u32::MAX {
            self.member = vec![0; n];
            self.in_frontier = vec![0; n];
            self.gain = vec![0.0; n];
            self.epoch = 0;
        }
        self.epoch += 1;
        self.frontier.clear();
        self.members.clear();
    }

    fn is_member(&self, v: NodeId) -> bool {
        self.member[v] == self.epoch
    }
}

/// One expansion request.
#[derive(Clone, Copy, Debug)]
pub struct ExpandRequest<'a> {
    pub graph: &'a SocialGraph,
    /// Initial partial solution: the start node, or confirmed attendees when replanning.
    pub initial: &'a [NodeId],
    pub k: usize,
    pub key: SampleKey,
    pub policy: Policy<'a>,
    pub mode: WeightMode,
}

/// Produces samples. Implemented by the seeded random expander and by the
/// scripted replay used to pin worked examples.
pub trait Expander: Sync {
    fn expand(&self, req: &ExpandRequest<'_>, scratch: &mut Scratch) -> Result<SampleVector>;
}

#[derive(Clone, Copy, Debug)]
pub struct RandomExpander {
    pub seed: u64,
}

impl Expander for RandomExpander {
    fn expand(&self, req: &ExpandRequest<'_>, scratch: &mut Scratch) -> Result<SampleVector> {
        let mut rng = stream_rng(self.seed, req.key);
        expand_with(req, &mut rng, scratch)
    }
}

fn check_feasible(graph: &SocialGraph, initial: &[NodeId], k: usize) -> Result<()> {
    let start = *initial.first().ok_or_else(|| {
        WasoError::InvalidArgument("expansion needs a nonempty initial partial".into())
    })?;
    if let Some(&bad) = initial.iter().find(|&&v| v >= graph.n()) {
        return Err(WasoError::InvalidMember(bad));
    }
    if k < initial.len() {
        return Err(WasoError::InvalidArgument(format!(
            "initial partial of {} nodes exceeds k = {k}",
            initial.len()
        )));
    }
    let component = graph.component_size(start);
    if component < k {
        return Err(WasoError::InfeasibleStart { start, component, k });
    }
    Ok(())
}

/// Grows `req.initial` to `req.k` nodes, drawing each addition per `req.policy`.
pub fn expand_with<R: Rng + ?Sized>(
    req: &ExpandRequest<'_>,
    rng: &mut R,
    scratch: &mut Scratch,
) -> Result<SampleVector> {
    let g = req.graph;
    check_feasible(g, req.initial, req.k)?;
    scratch.reset(g.n());
    let greedy = matches!(req.policy, Policy::Greedy);
    let mut current = 0.0;
    for &v in req.initial {
        if scratch.is_member(v) {
            return Err(WasoError::InvalidArgument(format!(
                "node {v} repeated in initial partial"
            )));
        }
        if greedy {
            current += g.gain(v, |j| scratch.member[j] == scratch.epoch, req.mode);
        }
        if scratch.in_frontier[v] == scratch.epoch {
            let pos = scratch.frontier.iter().position(|&u| u == v).expect("tracked");
            scratch.frontier.swap_remove(pos);
        }
        add_member(g, v, scratch, greedy, req.mode);
    }
    while scratch.members.len() < req.k {
        if scratch.frontier.is_empty() {
            return Err(WasoError::Infeasible(format!(
                "partial solution cannot reach {} nodes",
                req.k
            )));
        }
        let pos = match req.policy {
            Policy::Uniform => rng.random_range(0..scratch.frontier.len()),
            Policy::Weighted(p) => {
                scratch.weights.clear();
                scratch
                    .weights
                    .extend(scratch.frontier.iter().map(|&v| p.get(v)));
                pick_weighted(&scratch.weights, rng)
            }
            Policy::Greedy => {
                scratch.weights.clear();
                let mut lo = f64::INFINITY;
                for &v in &scratch.frontier {
                    let s = current + scratch.gain[v];
                    lo = lo.min(s);
                    scratch.weights.push(s);
                }
                if lo <= 0.0 {
                    let shift = 1.0 - lo;
                    for w in &mut scratch.weights {
                        *w += shift;
                    }
                }
                pick_weighted(&scratch.weights, rng)
            }
        };
        let v = scratch.frontier.swap_remove(pos);
        if greedy {
            current += scratch.gain[v];
        }
        add_member(g, v, scratch, greedy, req.mode);
    }
    let mut members = scratch.members.clone();
    members.sort_unstable();
    let willingness = g.willingness_sorted(&members, req.mode);
    Ok(SampleVector {
        members,
        willingness,
    })
}

fn add_member(g: &SocialGraph, v: NodeId, scratch: &mut Scratch, greedy: bool, mode: WeightMode) {
    let epoch = scratch.epoch;
    scratch.member[v] = epoch;
    scratch.members.push(v);
    if greedy {
        // Update gains of nodes already tracked; fresh frontier nodes are computed
        // from scratch below, after `v` is a member.
        let lam_v = g.lambda(v);
        for &(j, t) in g.out_edges(v) {
            if scratch.in_frontier[j] == epoch && scratch.member[j] != epoch {
                scratch.gain[j] += match mode {
                    WeightMode::Unweighted => t,
                    WeightMode::LambdaWeighted => (1.0 - lam_v) * t,
                };
            }
        }
        for &(j, t) in g.in_edges(v) {
            if scratch.in_frontier[j] == epoch && scratch.member[j] != epoch {
                scratch.gain[j] += match mode {
                    WeightMode::Unweighted => t,
                    WeightMode::LambdaWeighted => (1.0 - g.lambda(j)) * t,
                };
            }
        }
    }
    for &u in g.neighbors(v) {
        if scratch.member[u] != epoch && scratch.in_frontier[u] != epoch {
            if greedy {
                scratch.gain[u] = g.gain(u, |j| scratch.member[j] == epoch, mode);
            }
            scratch.in_frontier[u] = epoch;
            scratch.frontier.push(u);
        }
    }
}

// Categorical draw over nonnegative weights; uniform when the total mass is zero.
fn pick_weighted<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 || !total.is_finite() {
        return rng.random_range(0..weights.len());
    }
    let mut target = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if target < w {
            return i;
        }
        target -= w;
    }
    // Rounding left a sliver past the end; take the last positive weight.
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
}

/// Uniform expansion from a single start node.
pub fn expand_uniform<R: Rng + ?Sized>(
    graph: &SocialGraph,
    start: NodeId,
    k: usize,
    mode: WeightMode,
    rng: &mut R,
) -> Result<SampleVector> {
    let req = ExpandRequest {
        graph,
        initial: &[start],
        k,
        key: SampleKey { start, stage: 0, index: 0 },
        policy: Policy::Uniform,
        mode,
    };
    expand_with(&req, rng, &mut Scratch::new())
}

/// Expansion weighted by a selection probability vector.
pub fn expand_weighted<R: Rng + ?Sized>(
    graph: &SocialGraph,
    start: NodeId,
    k: usize,
    p: &SelectionProbabilityVector,
    mode: WeightMode,
    rng: &mut R,
) -> Result<SampleVector> {
    if p.len() != graph.n() {
        return Err(WasoError::LengthMismatch { left: p.len(), right: graph.n() });
    }
    let req = ExpandRequest {
        graph,
        initial: &[start],
        k,
        key: SampleKey { start, stage: 0, index: 0 },
        policy: Policy::Weighted(p),
        mode,
    };
    expand_with(&req, rng, &mut Scratch::new())
}

/// Replays fixed node sequences keyed by sample.
///
/// Each sequence lists the nodes added after the initial partial, in order. Every
/// addition is checked against the live frontier so a script cannot describe a
/// sample the random expander could never produce.
#[derive(Clone, Debug, Default)]
pub struct ScriptedExpander {
    script: HashMap<SampleKey, Vec<NodeId>>,
}

impl ScriptedExpander {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: SampleKey, additions: Vec<NodeId>) -> &mut Self {
        self.script.insert(key, additions);
        self
    }
}

impl Expander for ScriptedExpander {
    fn expand(&self, req: &ExpandRequest<'_>, scratch: &mut Scratch) -> Result<SampleVector> {
        let g = req.graph;
        check_feasible(g, req.initial, req.k)?;
        let additions = self.script.get(&req.key).ok_or_else(|| {
            WasoError::InvalidArgument(format!("no scripted sample for {:?}", req.key))
        })?;
        if req.initial.len() + additions.len() != req.k {
            return Err(WasoError::InvalidArgument(format!(
                "scripted sample {:?} has {} additions, expected {}",
                req.key,
                additions.len(),
                req.k - req.initial.len()
            )));
        }
        scratch.reset(g.n());
        for &v in req.initial {
            add_member(g, v, scratch, false, req.mode);
        }
        for &v in additions {
            if v >= g.n() {
                return Err(WasoError::InvalidMember(v));
            }
            if scratch.in_frontier[v] != scratch.epoch || scratch.is_member(v) {
                return Err(WasoError::InvalidArgument(format!(
                    "scripted node {v} is not on the frontier in {:?}",
                    req.key
                )));
            }
            add_member(g, v, scratch, false, req.mode);
        }
        let mut members = scratch.members.clone();
        members.sort_unstable();
        let willingness = g.willingness_sorted(&members, req.mode);
        Ok(SampleVector {
            members,
            willingness,
        })
    }
}

/// Samples from one start within one stage, with their worst, best and argmax.
#[derive(Clone, Debug)]
pub struct Batch {
    pub samples: Vec<SampleVector>,
    pub c: f64,
    pub d: f64,
    pub best: SampleVector,
}

impl Batch {
    pub fn from_samples(samples: Vec<SampleVector>) -> Option<Batch> {
        let mut it = samples.iter();
        let first = it.next()?.clone();
        let (mut c, mut d, mut best) = (first.willingness, first.willingness, first);
        for s in it {
            c = c.min(s.willingness);
            d = d.max(s.willingness);
            if rank(s.willingness, &s.members, best.willingness, &best.members).is_lt() {
                best = s.clone();
            }
        }
        Some(Batch { samples, c, d, best })
    }
}

/// Draws `count` samples for `(initial, stage)` with slot indices `first_index..`.
#[allow(clippy::too_many_arguments)]
pub fn sample_batch<E: Expander + ?Sized>(
    graph: &SocialGraph,
    initial: &[NodeId],
    k: usize,
    count: usize,
    policy: Policy<'_>,
    mode: WeightMode,
    expander: &E,
    stage: usize,
    first_index: usize,
) -> Result<Batch> {
    if count == 0 {
        return Err(WasoError::InvalidArgument("batch count must be at least 1".into()));
    }
    let start = *initial.first().ok_or_else(|| {
        WasoError::InvalidArgument("batch needs a nonempty initial partial".into())
    })?;
    let samples = (first_index..first_index + count)
        .into_par_iter()
        .map_init(Scratch::new, |scratch, index| {
            let req = ExpandRequest {
                graph,
                initial,
                k,
                key: SampleKey { start, stage, index },
                policy,
                mode,
            };
            expander.expand(&req, scratch)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Batch::from_samples(samples).expect("count >= 1"))
}
