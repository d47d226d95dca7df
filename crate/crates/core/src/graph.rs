//! Scored social graph: per-node interest and lambda, directed tightness on edges.
//!
//! Node ids are dense `0..n`. Tightness is stored per direction; an undirected
//! edge of weight `t` is stored as `t/2` in both directions so that the directed
//! double sum in the willingness objective counts the undirected weight once.
//! The graph is immutable once built and can be shared freely across threads.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Result, WasoError};

pub type NodeId = usize;

/// Default lambda for nodes whose weighting is not given explicitly.
pub const DEFAULT_LAMBDA: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub interest: f64,
    pub lambda: f64,
}

impl NodeRecord {
    pub fn new(interest: f64) -> Self {
        NodeRecord {
            interest,
            lambda: DEFAULT_LAMBDA,
        }
    }
}

/// Which objective to evaluate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    /// Sum of interest plus all member-to-member tightness.
    #[default]
    Unweighted,
    /// Per-node blend `lambda * interest + (1 - lambda) * tightness`.
    LambdaWeighted,
}

#[derive(Clone, Debug)]
pub struct SocialGraph {
    nodes: Vec<NodeRecord>,
    labels: Vec<String>,
    out_edges: Vec<Vec<(NodeId, f64)>>,
    in_edges: Vec<Vec<(NodeId, f64)>>,
    neighbors: Vec<Vec<NodeId>>,
    component: Vec<usize>,
    component_sizes: Vec<usize>,
}

/// Accumulates nodes and directed tightness entries, then validates them into a graph.
///
/// Setting the same directed pair twice overwrites the earlier value.
#[derive(Clone, Debug, Default)]
pub struct GraphBuilder {
    nodes: Vec<NodeRecord>,
    labels: Vec<String>,
    edges: BTreeMap<(NodeId, NodeId), f64>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_nodes(n: usize) -> Self {
        let mut b = Self::new();
        for _ in 0..n {
            b.add_node(0.0);
        }
        b
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn add_node(&mut self, interest: f64) -> NodeId {
        let id = self.nodes.len();
        self.add_labeled_node(id.to_string(), NodeRecord::new(interest))
    }

    pub fn add_labeled_node(&mut self, label: impl Into<String>, record: NodeRecord) -> NodeId {
        self.nodes.push(record);
        self.labels.push(label.into());
        self.nodes.len() - 1
    }

    pub fn set_interest(&mut self, v: NodeId, interest: f64) -> Result<()> {
        self.check(v)?;
        self.nodes[v].interest = interest;
        Ok(())
    }

    pub fn set_lambda(&mut self, v: NodeId, lambda: f64) -> Result<()> {
        self.check(v)?;
        self.nodes[v].lambda = lambda;
        Ok(())
    }

    pub fn set_label(&mut self, v: NodeId, label: impl Into<String>) -> Result<()> {
        self.check(v)?;
        self.labels[v] = label.into();
        Ok(())
    }

    /// Sets the directed tightness `from -> to`.
    pub fn set_tightness(&mut self, from: NodeId, to: NodeId, t: f64) -> Result<()> {
        self.check(from)?;
        self.check(to)?;
        if from == to {
            return Err(WasoError::InvalidArgument(format!(
                "self-loop on node {from}"
            )));
        }
        self.edges.insert((from, to), t);
        Ok(())
    }

    /// Stores an undirected edge of weight `t` as `t/2` in each direction.
    pub fn add_undirected(&mut self, a: NodeId, b: NodeId, t: f64) -> Result<()> {
        self.set_tightness(a, b, t / 2.0)?;
        self.set_tightness(b, a, t / 2.0)
    }

    pub fn remove_edge(&mut self, from: NodeId, to: NodeId) {
        self.edges.remove(&(from, to));
    }

    pub fn tightness(&self, from: NodeId, to: NodeId) -> Option<f64> {
        self.edges.get(&(from, to)).copied()
    }

    fn check(&self, v: NodeId) -> Result<()> {
        if v < self.nodes.len() {
            Ok(())
        } else {
            Err(WasoError::InvalidMember(v))
        }
    }

    pub fn build(self) -> Result<SocialGraph> {
        let n = self.nodes.len();
        for (i, rec) in self.nodes.iter().enumerate() {
            if !rec.interest.is_finite() {
                return Err(WasoError::InvalidArgument(format!(
                    "interest of node {i} is not finite"
                )));
            }
            if !(0.0..=1.0).contains(&rec.lambda) {
                return Err(WasoError::InvalidArgument(format!(
                    "lambda of node {i} is {} (must lie in [0, 1])",
                    rec.lambda
                )));
            }
        }
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        let mut neighbors = vec![Vec::new(); n];
        // BTreeMap iteration keeps out lists sorted by target and in lists by source.
        for (&(from, to), &t) in &self.edges {
            if !t.is_finite() {
                return Err(WasoError::InvalidArgument(format!(
                    "tightness {from}->{to} is not finite"
                )));
            }
            out_edges[from].push((to, t));
            in_edges[to].push((from, t));
            neighbors[from].push(to);
            neighbors[to].push(from);
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        let (component, component_sizes) = components(&neighbors);
        Ok(SocialGraph {
            nodes: self.nodes,
            labels: self.labels,
            out_edges,
            in_edges,
            neighbors,
            component,
            component_sizes,
        })
    }
}

fn components(neighbors: &[Vec<NodeId>]) -> (Vec<usize>, Vec<usize>) {
    let n = neighbors.len();
    let mut comp = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        comp[s] = id;
        queue.push_back(s);
        let mut size = 0;
        while let Some(u) = queue.pop_front() {
            size += 1;
            for &v in &neighbors[u] {
                if comp[v] == usize::MAX {
                    comp[v] = id;
                    queue.push_back(v);
                }
            }
        }
        sizes.push(size);
    }
    (comp, sizes)
}

impl SocialGraph {
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    /// Number of stored directed tightness entries.
    pub fn edge_count(&self) -> usize {
        self.out_edges.iter().map(Vec::len).sum()
    }

    pub fn node(&self, v: NodeId) -> &NodeRecord {
        &self.nodes[v]
    }

    pub fn nodes(&self) -> &[NodeRecord] {
        &self.nodes
    }

    pub fn interest(&self, v: NodeId) -> f64 {
        self.nodes[v].interest
    }

    pub fn lambda(&self, v: NodeId) -> f64 {
        self.nodes[v].lambda
    }

    pub fn label(&self, v: NodeId) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn find_label(&self, label: &str) -> Option<NodeId> {
        self.labels.iter().position(|l| l == label)
    }

    /// Directed edges leaving `v`, sorted by target.
    pub fn out_edges(&self, v: NodeId) -> &[(NodeId, f64)] {
        &self.out_edges[v]
    }

    /// Directed edges entering `v`, sorted by source.
    pub fn in_edges(&self, v: NodeId) -> &[(NodeId, f64)] {
        &self.in_edges[v]
    }

    /// Nodes adjacent to `v` in either direction, sorted.
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.neighbors[v].len()
    }

    /// Stored tightness `from -> to`, or 0 when the directed edge is absent.
    pub fn tightness(&self, from: NodeId, to: NodeId) -> f64 {
        self.edge(from, to).unwrap_or(0.0)
    }

    pub fn edge(&self, from: NodeId, to: NodeId) -> Option<f64> {
        let list = &self.out_edges[from];
        list.binary_search_by_key(&to, |&(j, _)| j)
            .ok()
            .map(|idx| list[idx].1)
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v < self.nodes.len()
    }

    /// Size of the connected component (undirected reachability) containing `v`.
    pub fn component_size(&self, v: NodeId) -> usize {
        self.component_sizes[self.component[v]]
    }

    pub fn component_id(&self, v: NodeId) -> usize {
        self.component[v]
    }

    /// Interest plus every incident tightness in both directions; ranks start nodes.
    pub fn node_sum(&self, v: NodeId) -> f64 {
        let out: f64 = self.out_edges[v].iter().map(|&(_, t)| t).sum();
        let inc: f64 = self.in_edges[v].iter().map(|&(_, t)| t).sum();
        self.nodes[v].interest + out + inc
    }

    /// Sum of absolute interest and tightness over the whole graph.
    pub fn total_abs_score(&self) -> f64 {
        let eta: f64 = self.nodes.iter().map(|r| r.interest.abs()).sum();
        let tau: f64 = self
            .out_edges
            .iter()
            .flat_map(|l| l.iter().map(|&(_, t)| t.abs()))
            .sum();
        eta + tau
    }

    /// Sum of interest plus all stored tightness (the willingness of the full node set).
    pub fn total_mass(&self) -> f64 {
        let mut total = 0.0;
        for v in 0..self.n() {
            total += self.nodes[v].interest;
            for &(_, t) in &self.out_edges[v] {
                total += t;
            }
        }
        total
    }

    pub(crate) fn validate_members(&self, members: &[NodeId]) -> Result<Vec<NodeId>> {
        let mut sorted = members.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if let Some(&bad) = sorted.iter().find(|&&v| v >= self.n()) {
            return Err(WasoError::InvalidMember(bad));
        }
        Ok(sorted)
    }

    /// Willingness of a member set.
    ///
    /// Summation runs over members in increasing id order, adding each member's
    /// interest term and then its outgoing tightness towards other members in
    /// adjacency order, so the same set always yields bit-identical values.
    pub fn willingness(&self, members: &[NodeId], mode: WeightMode) -> Result<f64> {
        let sorted = self.validate_members(members)?;
        Ok(self.willingness_sorted(&sorted, mode))
    }

    /// As [`willingness`](Self::willingness) for members already sorted, deduplicated and in range.
    pub fn willingness_sorted(&self, sorted: &[NodeId], mode: WeightMode) -> f64 {
        let mut total = 0.0;
        for &i in sorted {
            let rec = &self.nodes[i];
            let social = self.social_sum(i, sorted);
            match mode {
                WeightMode::Unweighted => {
                    total += rec.interest;
                    total += social;
                }
                WeightMode::LambdaWeighted => {
                    total += rec.lambda * rec.interest + (1.0 - rec.lambda) * social;
                }
            }
        }
        total
    }

    // Tightness from `i` to members, summed in ascending target order. Both branches
    // visit the same terms in the same order, so the result does not depend on
    // which one runs.
    fn social_sum(&self, i: NodeId, sorted: &[NodeId]) -> f64 {
        let list = &self.out_edges[i];
        let mut social = 0.0;
        if list.len() <= sorted.len() {
            for &(j, t) in list {
                if sorted.binary_search(&j).is_ok() {
                    social += t;
                }
            }
        } else {
            for &j in sorted {
                if let Ok(idx) = list.binary_search_by_key(&j, |&(x, _)| x) {
                    social += list[idx].1;
                }
            }
        }
        social
    }

    /// Increase in willingness from adding `v` to the set described by `in_set`.
    pub fn gain(&self, v: NodeId, in_set: impl Fn(NodeId) -> bool, mode: WeightMode) -> f64 {
        let rec = &self.nodes[v];
        match mode {
            WeightMode::Unweighted => {
                let mut g = rec.interest;
                for &(j, t) in &self.out_edges[v] {
                    if in_set(j) {
                        g += t;
                    }
                }
                for &(j, t) in &self.in_edges[v] {
                    if in_set(j) {
                        g += t;
                    }
                }
                g
            }
            WeightMode::LambdaWeighted => {
                let mut social = 0.0;
                for &(j, t) in &self.out_edges[v] {
                    if in_set(j) {
                        social += t;
                    }
                }
                let mut g = rec.lambda * rec.interest + (1.0 - rec.lambda) * social;
                for &(j, t) in &self.in_edges[v] {
                    if in_set(j) {
                        g += (1.0 - self.nodes[j].lambda) * t;
                    }
                }
                g
            }
        }
    }

    /// True iff the members induce a connected subgraph under undirected reachability.
    pub fn is_connected(&self, members: &[NodeId]) -> Result<bool> {
        let sorted = self.validate_members(members)?;
        if sorted.is_empty() {
            return Err(WasoError::InvalidArgument(
                "connectivity of an empty set is undefined".into(),
            ));
        }
        Ok(self.is_connected_sorted(&sorted))
    }

    pub(crate) fn is_connected_sorted(&self, sorted: &[NodeId]) -> bool {
        if sorted.len() <= 1 {
            return true;
        }
        let mut seen = vec![false; sorted.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut reached = 1;
        while let Some(pos) = stack.pop() {
            for &w in &self.neighbors[sorted[pos]] {
                if let Ok(wp) = sorted.binary_search(&w) {
                    if !seen[wp] {
                        seen[wp] = true;
                        reached += 1;
                        stack.push(wp);
                    }
                }
            }
        }
        reached == sorted.len()
    }

    /// Nodes outside `partial` adjacent (either direction) to some member, sorted.
    pub fn frontier(&self, partial: &[NodeId]) -> Result<Vec<NodeId>> {
        let sorted = self.validate_members(partial)?;
        if sorted.is_empty() {
            return Err(WasoError::InvalidArgument(
                "frontier of an empty partial solution".into(),
            ));
        }
        let mut out: Vec<NodeId> = sorted
            .iter()
            .flat_map(|&u| self.neighbors[u].iter().copied())
            .filter(|v| sorted.binary_search(v).is_err())
            .collect();
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    /// Copy of the graph restricted to `keep`, with ids renumbered in the order given.
    ///
    /// Returns the subgraph and, for each new id, the original id.
    pub fn induced_subgraph(&self, keep: &[NodeId]) -> Result<(SocialGraph, Vec<NodeId>)> {
        let sorted = self.validate_members(keep)?;
        let mut new_id = vec![usize::MAX; self.n()];
        let mut b = GraphBuilder::new();
        for &old in &sorted {
            new_id[old] = b.add_labeled_node(self.labels[old].clone(), self.nodes[old]);
        }
        for &old in &sorted {
            for &(j, t) in &self.out_edges[old] {
                if new_id[j] != usize::MAX {
                    b.set_tightness(new_id[old], new_id[j], t)?;
                }
            }
        }
        Ok((b.build()?, sorted))
    }

    /// A builder pre-populated with this graph's nodes and edges.
    pub fn to_builder(&self) -> GraphBuilder {
        let mut edges = BTreeMap::new();
        for (i, list) in self.out_edges.iter().enumerate() {
            for &(j, t) in list {
                edges.insert((i, j), t);
            }
        }
        GraphBuilder {
            nodes: self.nodes.clone(),
            labels: self.labels.clone(),
            edges,
        }
    }

    /// Multiplies every interest and tightness score by `factor`.
    pub fn scaled(&self, factor: f64) -> SocialGraph {
        let mut g = self.clone();
        for rec in &mut g.nodes {
            rec.interest *= factor;
        }
        for list in g.out_edges.iter_mut().chain(g.in_edges.iter_mut()) {
            for e in list.iter_mut() {
                e.1 *= factor;
            }
        }
        g
    }

    /// Min-max normalizes interest scores and tightness scores (separately) into [0, 1].
    ///
    /// A constant score vector maps to all ones when positive, zeros otherwise.
    pub fn normalized(&self) -> SocialGraph {
        fn rescale(values: impl Iterator<Item = f64> + Clone) -> impl Fn(f64) -> f64 {
            let lo = values.clone().fold(f64::INFINITY, f64::min);
            let hi = values.fold(f64::NEG_INFINITY, f64::max);
            move |x| {
                if hi > lo {
                    (x - lo) / (hi - lo)
                } else if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
        let eta = rescale(self.nodes.iter().map(|r| r.interest));
        let tau = rescale(self.out_edges.iter().flat_map(|l| l.iter().map(|e| e.1)));
        let mut g = self.clone();
        for rec in &mut g.nodes {
            rec.interest = eta(rec.interest);
        }
        for list in g.out_edges.iter_mut().chain(g.in_edges.iter_mut()) {
            for e in list.iter_mut() {
                e.1 = tau(e.1);
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> SocialGraph {
        let mut b = GraphBuilder::with_nodes(3);
        b.add_undirected(0, 1, 1.0).unwrap();
        b.add_undirected(1, 2, 1.0).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn empty_set_has_zero_willingness() {
        let g = path3();
        assert_eq!(g.willingness(&[], WeightMode::Unweighted).unwrap(), 0.0);
        assert_eq!(g.willingness(&[], WeightMode::LambdaWeighted).unwrap(), 0.0);
    }

    #[test]
    fn unknown_member_is_rejected() {
        let g = path3();
        assert_eq!(
            g.willingness(&[0, 7], WeightMode::Unweighted),
            Err(WasoError::InvalidMember(7))
        );
        assert!(g.is_connected(&[9]).is_err());
    }

    #[test]
    fn undirected_edge_counted_once() {
        let mut b = GraphBuilder::with_nodes(2);
        b.set_interest(0, 0.8).unwrap();
        b.set_interest(1, 0.9).unwrap();
        b.add_undirected(0, 1, 0.4).unwrap();
        let g = b.build().unwrap();
        let w = g.willingness(&[0, 1], WeightMode::Unweighted).unwrap();
        assert!((w - 2.1).abs() < 1e-12);
        assert_eq!(g.tightness(0, 1), 0.2);
        assert_eq!(g.tightness(1, 0), 0.2);
    }

    #[test]
    fn asymmetric_tightness_counts_both_directions() {
        let mut b = GraphBuilder::with_nodes(2);
        b.set_tightness(0, 1, 0.7).unwrap();
        let g = b.build().unwrap();
        assert_eq!(g.willingness(&[0, 1], WeightMode::Unweighted).unwrap(), 0.7);
        assert_eq!(g.tightness(1, 0), 0.0);
        // Reverse direction absent, yet the pair is adjacent for connectivity.
        assert!(g.is_connected(&[0, 1]).unwrap());
    }

    #[test]
    fn lambda_weighted_blends_terms() {
        let mut b = GraphBuilder::new();
        b.add_labeled_node("a", NodeRecord { interest: 1.0, lambda: 0.25 });
        b.add_labeled_node("b", NodeRecord { interest: 2.0, lambda: 1.0 });
        b.set_tightness(0, 1, 4.0).unwrap();
        b.set_tightness(1, 0, 8.0).unwrap();
        let g = b.build().unwrap();
        // a: 0.25*1 + 0.75*4 = 3.25; b: 1*2 + 0*8 = 2
        let w = g.willingness(&[0, 1], WeightMode::LambdaWeighted).unwrap();
        assert!((w - 5.25).abs() < 1e-12);
    }

    #[test]
    fn connectivity_examples() {
        let g = path3();
        assert!(g.is_connected(&[1]).unwrap());
        assert!(!g.is_connected(&[0, 2]).unwrap());
        assert!(g.is_connected(&[0, 1, 2]).unwrap());
        assert!(g.is_connected(&[]).is_err());

        let b = GraphBuilder::with_nodes(2);
        assert!(!b.build().unwrap().is_connected(&[0, 1]).unwrap());
    }

    #[test]
    fn frontier_examples() {
        let g = path3();
        assert!(g.frontier(&[0, 1, 2]).unwrap().is_empty());
        let mut b = GraphBuilder::with_nodes(5);
        for leaf in 1..5 {
            b.add_undirected(0, leaf, 1.0).unwrap();
        }
        let star = b.build().unwrap();
        assert_eq!(star.frontier(&[0]).unwrap(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn self_loops_rejected() {
        let mut b = GraphBuilder::with_nodes(2);
        assert!(b.set_tightness(1, 1, 1.0).is_err());
    }

    #[test]
    fn lambda_out_of_range_rejected() {
        let mut b = GraphBuilder::new();
        b.add_labeled_node("x", NodeRecord { interest: 0.0, lambda: 1.5 });
        assert!(b.build().is_err());
    }

    #[test]
    fn gain_matches_willingness_difference() {
        let mut b = GraphBuilder::new();
        for (i, l) in [0.1, 0.6, 0.9, 0.3].iter().enumerate() {
            b.add_labeled_node(i.to_string(), NodeRecord { interest: i as f64 + 0.5, lambda: *l });
        }
        b.set_tightness(0, 1, 0.3).unwrap();
        b.set_tightness(1, 0, 0.2).unwrap();
        b.set_tightness(2, 1, 1.1).unwrap();
        b.set_tightness(3, 2, -0.4).unwrap();
        b.set_tightness(0, 3, 0.9).unwrap();
        let g = b.build().unwrap();
        for mode in [WeightMode::Unweighted, WeightMode::LambdaWeighted] {
            let base = [0, 2];
            let before = g.willingness(&base, mode).unwrap();
            for v in [1, 3] {
                let after = g.willingness(&[0, 2, v], mode).unwrap();
                let gain = g.gain(v, |j| base.contains(&j), mode);
                assert!((after - before - gain).abs() < 1e-12, "{mode:?} {v}");
            }
        }
    }

    #[test]
    fn induced_subgraph_keeps_internal_edges() {
        let g = path3();
        let (sub, map) = g.induced_subgraph(&[1, 2]).unwrap();
        assert_eq!(map, vec![1, 2]);
        assert_eq!(sub.n(), 2);
        assert_eq!(sub.edge_count(), 2);
        assert_eq!(sub.label(0), "1");
    }

    #[test]
    fn normalization_maps_into_unit_interval() {
        let mut b = GraphBuilder::with_nodes(3);
        b.set_interest(0, -2.0).unwrap();
        b.set_interest(1, 3.0).unwrap();
        b.set_interest(2, 0.5).unwrap();
        b.add_undirected(0, 1, 4.0).unwrap();
        b.add_undirected(1, 2, 1.0).unwrap();
        let g = b.build().unwrap().normalized();
        assert_eq!(g.interest(0), 0.0);
        assert_eq!(g.interest(1), 1.0);
        assert_eq!(g.interest(2), 0.5);
        assert_eq!(g.tightness(0, 1), 1.0);
        assert_eq!(g.tightness(2, 1), 0.0);
    }

    #[test]
    fn components_are_tracked() {
        let mut b = GraphBuilder::with_nodes(5);
        b.add_undirected(0, 1, 1.0).unwrap();
        b.add_undirected(1, 2, 1.0).unwrap();
        b.add_undirected(3, 4, 1.0).unwrap();
        let g = b.build().unwrap();
        assert_eq!(g.component_size(0), 3);
        assert_eq!(g.component_size(4), 2);
    }
}
