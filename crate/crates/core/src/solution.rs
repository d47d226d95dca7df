use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WasoError};
use crate::graph::{NodeId, SocialGraph, WeightMode};

/// A selected group together with its willingness and connectivity.
///
/// Members are kept sorted; `willingness` is always produced by
/// [`SocialGraph::willingness`] so cached and recomputed values agree bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub members: Vec<NodeId>,
    pub willingness: f64,
    pub connected: bool,
}

impl Solution {
    pub fn evaluate(graph: &SocialGraph, members: &[NodeId], mode: WeightMode) -> Result<Self> {
        let mut sorted = members.to_vec();
        sorted.sort_unstable();
        let before = sorted.len();
        sorted.dedup();
        if sorted.len() != before {
            return Err(WasoError::InvalidArgument(
                "solution members contain duplicates".into(),
            ));
        }
        let willingness = graph.willingness(&sorted, mode)?;
        let connected = !sorted.is_empty() && graph.is_connected_sorted(&sorted);
        Ok(Solution {
            members: sorted,
            willingness,
            connected,
        })
    }

    pub fn k(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    /// Checks the cached fields against a fresh evaluation (1e-9 relative on willingness).
    pub fn is_consistent(&self, graph: &SocialGraph, mode: WeightMode) -> bool {
        match Solution::evaluate(graph, &self.members, mode) {
            Ok(fresh) => {
                let tol = 1e-9 * fresh.willingness.abs().max(1.0);
                fresh.members == self.members
                    && fresh.connected == self.connected
                    && (fresh.willingness - self.willingness).abs() <= tol
            }
            Err(_) => false,
        }
    }

    /// Ranking used wherever one winner is needed: higher willingness first,
    /// then the lexicographically smaller member list.
    pub fn rank(&self, other: &Solution) -> Ordering {
        rank(self.willingness, &self.members, other.willingness, &other.members)
    }

    pub fn is_better_than(&self, other: &Solution) -> bool {
        self.rank(other) == Ordering::Less
    }
}

/// How one member's own interest enters the objective.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberTerm {
    pub node: NodeId,
    /// `interest`, or `lambda * interest` under lambda weighting.
    pub contribution: f64,
}

/// Tightness between two members, both directions together.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairTerm {
    pub a: NodeId,
    pub b: NodeId,
    pub contribution: f64,
}

/// Willingness split into per-member and per-pair terms. The terms add up to
/// the willingness up to rounding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Breakdown {
    pub members: Vec<MemberTerm>,
    /// Member pairs with a nonzero tie, `a < b`.
    pub pairs: Vec<PairTerm>,
}

pub fn breakdown(graph: &SocialGraph, members: &[NodeId], mode: WeightMode) -> Result<Breakdown> {
    let sorted = graph.validate_members(members)?;
    let weight = |v: NodeId| match mode {
        WeightMode::Unweighted => 1.0,
        WeightMode::LambdaWeighted => 1.0 - graph.lambda(v),
    };
    let member_terms = sorted
        .iter()
        .map(|&v| MemberTerm {
            node: v,
            contribution: match mode {
                WeightMode::Unweighted => graph.interest(v),
                WeightMode::LambdaWeighted => graph.lambda(v) * graph.interest(v),
            },
        })
        .collect();
    let mut pairs = Vec::new();
    for (x, &a) in sorted.iter().enumerate() {
        for &b in &sorted[x + 1..] {
            let (ab, ba) = (graph.edge(a, b), graph.edge(b, a));
            if ab.is_none() && ba.is_none() {
                continue;
            }
            let contribution = weight(a) * ab.unwrap_or(0.0) + weight(b) * ba.unwrap_or(0.0);
            pairs.push(PairTerm { a, b, contribution });
        }
    }
    Ok(Breakdown { members: member_terms, pairs })
}

/// `Less` means `(wa, a)` wins over `(wb, b)`.
pub fn rank(wa: f64, a: &[NodeId], wb: f64, b: &[NodeId]) -> Ordering {
    wb.partial_cmp(&wa).unwrap_or(Ordering::Equal).then_with(|| a.cmp(b))
}
