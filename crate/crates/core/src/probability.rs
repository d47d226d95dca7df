use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WasoError};
use crate::graph::NodeId;

/// Per-node selection probabilities for one start node.
///
/// Stored sparsely: a background value shared by every node without an explicit
/// entry. At 50k nodes and thousands of starts a dense layout would not fit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SelectionProbabilityVector {
    n: usize,
    background: f64,
    entries: BTreeMap<NodeId, f64>,
}

fn check_prob(x: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(WasoError::InvalidArgument(format!(
            "probability {x} outside [0, 1]"
        )))
    }
}

impl SelectionProbabilityVector {
    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Ok(SelectionProbabilityVector {
            n,
            background: check_prob(value)?,
            entries: BTreeMap::new(),
        })
    }

    pub fn from_dense(values: &[f64]) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (j, &x) in values.iter().enumerate() {
            if x != 0.0 {
                entries.insert(j, check_prob(x)?);
            }
        }
        Ok(SelectionProbabilityVector {
            n: values.len(),
            background: 0.0,
            entries,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn background(&self) -> f64 {
        self.background
    }

    pub fn get(&self, j: NodeId) -> f64 {
        self.entries.get(&j).copied().unwrap_or(self.background)
    }

    pub fn set(&mut self, j: NodeId, value: f64) -> Result<()> {
        if j >= self.n {
            return Err(WasoError::InvalidMember(j));
        }
        self.entries.insert(j, check_prob(value)?);
        Ok(())
    }

    /// Nodes carrying an explicit entry, ascending.
    pub fn explicit(&self) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.entries.iter().map(|(&j, &p)| (j, p))
    }

    pub fn to_dense(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.get(j)).collect()
    }

    /// Builds from a background plus explicit entries; used by the update rules.
    pub(crate) fn from_parts(n: usize, background: f64, entries: BTreeMap<NodeId, f64>) -> Self {
        SelectionProbabilityVector {
            n,
            background,
            entries,
        }
    }

    pub(crate) fn entries(&self) -> &BTreeMap<NodeId, f64> {
        &self.entries
    }
}

impl PartialEq for SelectionProbabilityVector {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && (0..self.n).all(|j| self.get(j) == other.get(j))
    }
}
