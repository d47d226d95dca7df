//! Synthetic topologies and score synthesis: power-law interest, tightness from
//! common-neighbour counts.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WasoError};
use crate::graph::{GraphBuilder, NodeId, SocialGraph};

pub const DEFAULT_BETA: f64 = 2.5;
pub const DEFAULT_FLOOR: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// Preferential attachment.
    Ba,
    /// Uniform random edges.
    Er,
}

impl std::str::FromStr for Topology {
    type Err = WasoError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ba" => Ok(Topology::Ba),
            "er" => Ok(Topology::Er),
            other => Err(WasoError::InvalidArgument(format!("unknown topology '{other}' (expected ba or er)"))),
        }
    }
}

/// Everything needed to regenerate a synthetic scored graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub nodes: usize,
    pub topology: Topology,
    /// Edges added per arriving node (`ba`) or expected degree (`er`).
    pub degree: usize,
    pub beta: f64,
    pub floor: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            nodes: 1000,
            topology: Topology::Ba,
            degree: 2,
            beta: DEFAULT_BETA,
            floor: DEFAULT_FLOOR,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn generate(&self) -> Result<SocialGraph> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let edges = match self.topology {
            Topology::Ba => barabasi_albert(self.nodes, self.degree, &mut rng)?,
            Topology::Er => {
                let p = if self.nodes > 1 {
                    (self.degree as f64 / (self.nodes - 1) as f64).min(1.0)
                } else {
                    0.0
                };
                erdos_renyi(self.nodes, p, &mut rng)?
            }
        };
        synthesize_scores(self.nodes, &edges, self.beta, self.floor, &mut rng)
    }
}

/// Undirected edge list `(a, b)` with `a < b`, sorted.
pub type EdgeList = Vec<(NodeId, NodeId)>;

/// Starts from a clique on `m + 1` nodes; each later node links to `m` distinct
/// existing nodes chosen with probability proportional to degree.
pub fn barabasi_albert<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<EdgeList> {
    if m == 0 {
        return Err(WasoError::InvalidArgument("attachment count must be at least 1".into()));
    }
    let core = (m + 1).min(n);
    let mut edges = BTreeSet::new();
    // Each endpoint appears once per incident edge, so uniform picks are degree-weighted.
    let mut ends: Vec<NodeId> = Vec::new();
    for a in 0..core {
        for b in a + 1..core {
            edges.insert((a, b));
            ends.push(a);
            ends.push(b);
        }
    }
    let mut targets = Vec::with_capacity(m);
    for v in core..n {
        targets.clear();
        while targets.len() < m {
            let t = ends[rng.random_range(0..ends.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.insert((t, v));
            ends.push(t);
            ends.push(v);
        }
    }
    Ok(edges.into_iter().collect())
}

/// Each pair is an edge independently with probability `p`; skips over absent
/// pairs geometrically so sparse graphs cost time linear in their size.
pub fn erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<EdgeList> {
    if !(0.0..=1.0).contains(&p) {
        return Err(WasoError::InvalidArgument(format!("edge probability {p} outside [0, 1]")));
    }
    let mut edges = Vec::new();
    if p == 0.0 || n < 2 {
        return Ok(edges);
    }
    if p == 1.0 {
        for a in 0..n {
            for b in a + 1..n {
                edges.push((a, b));
            }
        }
        return Ok(edges);
    }
    let log_q = (1.0 - p).ln();
    let (mut v, mut w) = (1usize, -1i64);
    while v < n {
        let r: f64 = 1.0 - rng.random::<f64>();
        w += 1 + (r.ln() / log_q).floor() as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            edges.push((w as usize, v));
        }
    }
    edges.sort_unstable();
    Ok(edges)
}

/// Inverse-CDF draw from a Pareto law with minimum 1 and density exponent `beta`.
pub fn sample_power_law<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    u.powf(-1.0 / (beta - 1.0))
}

/// Scores a topology: interest is a power-law draw min-max normalized to [0, 1];
/// the undirected tightness of an edge is its common-neighbour count over the
/// largest such count, or `floor` when that is zero.
pub fn synthesize_scores<R: Rng + ?Sized>(
    n: usize,
    edges: &[(NodeId, NodeId)],
    beta: f64,
    floor: f64,
    rng: &mut R,
) -> Result<SocialGraph> {
    if !(beta > 1.0) {
        return Err(WasoError::InvalidArgument(format!("power-law exponent {beta} must exceed 1")));
    }
    let raw: Vec<f64> = (0..n).map(|_| sample_power_law(beta, rng)).collect();
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut adj: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for &(a, b) in edges {
        if a >= n || b >= n {
            return Err(WasoError::InvalidMember(a.max(b)));
        }
        adj[a].push(b);
        adj[b].push(a);
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    let common: Vec<usize> = edges.iter().map(|&(a, b)| sorted_overlap(&adj[a], &adj[b])).collect();
    let max_common = common.iter().copied().max().unwrap_or(0);
    let mut g = GraphBuilder::with_nodes(n);
    for (v, &x) in raw.iter().enumerate() {
        g.set_interest(v, if hi > lo { (x - lo) / (hi - lo) } else { 1.0 })?;
    }
    for (&(a, b), &c) in edges.iter().zip(&common) {
        let t = if c == 0 { floor } else { c as f64 / max_common as f64 };
        g.add_undirected(a, b, t)?;
    }
    g.build()
}

fn sorted_overlap(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Small random instance: an Erdős–Rényi graph with expected degree `degree`
/// and synthesized scores, seeded.
pub fn random_instance(n: usize, degree: f64, seed: u64) -> Result<SocialGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = if n > 1 { (degree / (n - 1) as f64).min(1.0) } else { 0.0 };
    let edges = erdos_renyi(n, p, &mut rng)?;
    synthesize_scores(n, &edges, DEFAULT_BETA, DEFAULT_FLOOR, &mut rng)
}
