//! Rendering of a single solve for the command line.

use serde::Serialize;
use waso_core::solution::{breakdown, Breakdown};
use waso_core::solver::Algorithm;
use waso_core::{NodeId, SocialGraph, Solution, WeightMode};

use crate::error::Result;

#[derive(Clone, Debug, Serialize)]
pub struct SolveOutput {
    pub algorithm: Algorithm,
    pub k: usize,
    pub willingness: f64,
    pub connected: bool,
    /// Dense ids in the loaded graph.
    pub members: Vec<NodeId>,
    pub labels: Vec<String>,
    /// Samples drawn, when the solver reports it.
    pub samples: Option<usize>,
    /// Terms of the objective in the graph that was solved, which differs from
    /// the input graph under scenarios that merge or add nodes.
    pub breakdown: Breakdown,
    #[serde(skip)]
    term_labels: Vec<String>,
}

impl SolveOutput {
    /// `solution` lives in `solved`; `members` are the same people as ids of `input`.
    pub fn new(
        input: &SocialGraph,
        solved: &SocialGraph,
        algorithm: Algorithm,
        solution: &Solution,
        members: Vec<NodeId>,
        mode: WeightMode,
        samples: Option<usize>,
    ) -> Result<Self> {
        Ok(SolveOutput {
            algorithm,
            k: solution.members.len(),
            willingness: solution.willingness,
            connected: solution.connected,
            labels: members.iter().map(|&v| input.label(v).to_string()).collect(),
            breakdown: breakdown(solved, &solution.members, mode)?,
            term_labels: solution.members.iter().map(|&v| solved.label(v).to_string()).collect(),
            members,
            samples,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per member of the solved graph: id, label, interest term and
    /// half of each tie it shares.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["node", "label", "interest", "social"])?;
        for (m, label) in self.breakdown.members.iter().zip(&self.term_labels) {
            let social: f64 = self
                .breakdown
                .pairs
                .iter()
                .filter(|p| p.a == m.node || p.b == m.node)
                .map(|p| p.contribution / 2.0)
                .sum();
            w.write_record([m.node.to_string(), label.clone(), m.contribution.to_string(), social.to_string()])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
