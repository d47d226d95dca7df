//! Planning sessions and their state transitions.
//!
//! The graph and configuration of a session never change. Everything that does
//! (current group, RSVP answers) lives in [`SessionState`], and every
//! transition computes a fresh state from the current one without touching it.
//! The caller commits the result only when the transition succeeded, so a failed
//! replan leaves the session exactly as it was.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use uuid::Uuid;
use waso_core::solver::{online_replan, solve, SolverConfig};
use waso_core::{GraphBuilder, NodeId, NodeRecord, SocialGraph, Solution, WasoError};

use crate::error::{Result, ServiceError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RsvpStatus {
    Pending,
    Confirmed,
    Declined,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub solution: Option<Solution>,
    /// Answers received so far. Members without an entry are pending. Declined
    /// nodes stay listed after a replan so later replans keep them out.
    pub rsvp: BTreeMap<NodeId, RsvpStatus>,
}

impl SessionState {
    fn with(&self, status: RsvpStatus) -> Vec<NodeId> {
        self.rsvp.iter().filter(|(_, &s)| s == status).map(|(&v, _)| v).collect()
    }

    pub fn confirmed(&self) -> Vec<NodeId> {
        self.with(RsvpStatus::Confirmed)
    }

    pub fn declined(&self) -> Vec<NodeId> {
        self.with(RsvpStatus::Declined)
    }
}

/// Graph with ids spelled out, so a session reads back with the same ids its
/// solution and answers refer to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphData {
    pub labels: Vec<String>,
    pub nodes: Vec<NodeRecord>,
    /// Directed tightness entries `(from, to, t)`.
    pub edges: Vec<(NodeId, NodeId, f64)>,
}

impl GraphData {
    pub fn of(g: &SocialGraph) -> Self {
        GraphData {
            labels: g.labels().to_vec(),
            nodes: g.nodes().to_vec(),
            edges: (0..g.n()).flat_map(|i| g.out_edges(i).iter().map(move |&(j, t)| (i, j, t))).collect(),
        }
    }

    pub fn build(&self) -> waso_core::Result<SocialGraph> {
        if self.labels.len() != self.nodes.len() {
            return Err(WasoError::LengthMismatch { left: self.labels.len(), right: self.nodes.len() });
        }
        let mut b = GraphBuilder::new();
        for (label, rec) in self.labels.iter().zip(&self.nodes) {
            b.add_labeled_node(label.clone(), *rec);
        }
        for &(i, j, t) in &self.edges {
            b.set_tightness(i, j, t)?;
        }
        b.build()
    }
}

#[derive(Clone, Debug)]
pub struct Session {
    pub id: Uuid,
    pub graph: Arc<SocialGraph>,
    pub config: SolverConfig,
    pub state: SessionState,
}

/// On-disk form of a session.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub id: Uuid,
    pub graph: GraphData,
    pub config: SolverConfig,
    pub state: SessionState,
}

impl Session {
    pub fn new(graph: SocialGraph, config: SolverConfig) -> Result<Self> {
        config.validate(graph.n())?;
        Ok(Session { id: Uuid::new_v4(), graph: Arc::new(graph), config, state: SessionState::default() })
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            id: self.id,
            graph: GraphData::of(&self.graph),
            config: self.config.clone(),
            state: self.state.clone(),
        }
    }

    pub fn restore(snap: Snapshot) -> Result<Self> {
        let graph = snap.graph.build()?;
        snap.config.validate(graph.n())?;
        Ok(Session { id: snap.id, graph: Arc::new(graph), config: snap.config, state: snap.state })
    }

    fn solution(&self) -> Result<&Solution> {
        self.state.solution.as_ref().ok_or(ServiceError::NotSolved)
    }

    /// Runs the configured solver from scratch. Earlier RSVP answers referred to
    /// the old group and are dropped.
    pub fn solve(&self) -> Result<SessionState> {
        let report = solve(&self.graph, &self.config)?;
        Ok(SessionState { solution: Some(report.solution), rsvp: BTreeMap::new() })
    }

    /// Records one answer. Only members of the current group can answer.
    pub fn rsvp(&self, node: NodeId, status: RsvpStatus) -> Result<SessionState> {
        if !self.solution()?.contains(node) {
            return Err(ServiceError::NotMember(node));
        }
        let mut next = self.state.clone();
        match status {
            RsvpStatus::Pending => next.rsvp.remove(&node),
            s => next.rsvp.insert(node, s),
        };
        Ok(next)
    }

    /// Replaces declined members, keeping every confirmed one. Needs at least
    /// one member who declined since the last plan, unless forced.
    pub fn replan(&self, force: bool) -> Result<SessionState> {
        let previous = self.solution()?;
        let declined = self.state.declined();
        if !force && !declined.iter().any(|&v| previous.contains(v)) {
            return Err(ServiceError::NothingToReplan);
        }
        let confirmed = self.state.confirmed();
        let solution = online_replan(&self.graph, previous, &confirmed, &declined, &self.config)?;
        Ok(SessionState { solution: Some(solution), rsvp: self.state.rsvp.clone() })
    }
}
