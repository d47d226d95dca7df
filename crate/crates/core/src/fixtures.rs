//! Small hand-built instances with known answers, shared by tests, the CLI
//! demo and the service examples.
//!
//! Node ids are zero-based; labels are `v1..vn`.

use crate::graph::{GraphBuilder, NodeId, SocialGraph};
use crate::sampler::{SampleKey, ScriptedExpander};
use crate::solver::{Algorithm, SolverConfig};

pub const EXAMPLE_K: usize = 5;
pub const EXAMPLE_BUDGET: usize = 20;

/// Ten people, group size five. `v3` and `v10` tie for the largest score sum
/// (4.2); the best group is `{v3, v4, v5, v6, v7}` with willingness 9.7.
pub fn example_graph() -> SocialGraph {
    let eta = [1.0, 0.0, 0.8, 1.0, 0.7, 0.9, 0.9, 1.0, 0.2, 0.9];
    let edges = [
        (1, 3, 0.6),
        (2, 3, 0.5),
        (3, 4, 0.9),
        (3, 5, 1.0),
        (3, 6, 0.4),
        (6, 10, 0.6),
        (7, 10, 1.0),
        (8, 10, 0.9),
        (9, 10, 0.8),
        (1, 2, 0.8),
        (1, 4, 0.6),
        (4, 5, 1.0),
        (4, 7, 0.1),
        (5, 7, 1.0),
        (6, 7, 1.0),
        (6, 8, 0.6),
        (8, 9, 0.1),
    ];
    labeled(&eta, &edges)
}

/// Four people, group size three, where growing greedily from the most
/// interested person gives 27 but the best group gives 30.
pub fn greedy_trap() -> SocialGraph {
    labeled(&[10.0, 5.0, 6.0, 5.0], &[(1, 2, 2.0), (2, 3, 4.0), (2, 4, 4.0), (3, 4, 6.0)])
}

// One-based endpoints; undirected weights.
fn labeled(eta: &[f64], edges: &[(usize, usize, f64)]) -> SocialGraph {
    let mut b = GraphBuilder::with_nodes(eta.len());
    for (i, &e) in eta.iter().enumerate() {
        b.set_interest(i, e).expect("in range");
        b.set_label(i, format!("v{}", i + 1)).expect("in range");
    }
    for &(a, c, t) in edges {
        b.add_undirected(a - 1, c - 1, t).expect("valid edge");
    }
    b.build().expect("valid fixture")
}

/// Solver settings of the worked example: two starts, two stages of ten
/// samples, half the samples elite, smoothing weight 0.6.
pub fn example_config(algorithm: Algorithm) -> SolverConfig {
    let mut cfg = SolverConfig::new(EXAMPLE_K, EXAMPLE_BUDGET);
    cfg.algorithm = algorithm;
    cfg.starts = Some(2);
    cfg.confidence = 0.7;
    cfg.alpha = 0.9;
    cfg.rho = 0.5;
    cfg.smooth = 0.6;
    cfg
}

fn zero_based(seq: &[usize]) -> Vec<NodeId> {
    seq.iter().map(|v| v - 1).collect()
}

/// First-stage samples of the example, as the order in which nodes join each
/// sample (one-based labels). Start `v3` comes first, then `v10`.
pub const STAGE_ONE_V3: [[usize; 4]; 5] = [[6, 1, 4, 5], [1, 2, 4, 5], [2, 5, 6, 8], [2, 4, 5, 7], [5, 6, 7, 10]];
pub const STAGE_ONE_V10: [[usize; 4]; 5] = [[6, 7, 8, 9], [7, 4, 5, 8], [6, 7, 5, 9], [6, 3, 1, 4], [6, 3, 1, 5]];

// Second-stage samples that never beat 9.2 (plain sampling stalls there).
const STAGE_TWO_V3_PLAIN: [[usize; 4]; 7] =
    [[5, 6, 7, 10], [1, 2, 4, 5], [6, 1, 4, 5], [2, 4, 5, 7], [4, 1, 2, 5], [6, 7, 10, 8], [5, 4, 1, 2]];
// Second-stage samples once the selection vector concentrates: the third one is the optimum.
const STAGE_TWO_V3_GUIDED: [[usize; 4]; 7] =
    [[5, 6, 7, 10], [6, 1, 4, 5], [4, 5, 7, 6], [1, 4, 5, 6], [5, 4, 7, 6], [4, 1, 5, 6], [5, 6, 7, 4]];
const STAGE_TWO_V10: [[usize; 4]; 4] = [[6, 7, 8, 9], [7, 4, 5, 8], [6, 7, 5, 9], [7, 6, 8, 9]];

fn push_stage(script: &mut ScriptedExpander, start: usize, stage: usize, samples: &[[usize; 4]]) {
    for (index, seq) in samples.iter().enumerate() {
        script.push(SampleKey { start: start - 1, stage, index }, zero_based(seq));
    }
}

/// Replays the example under plain staged sampling; the best group found is 9.2.
pub fn example_plain_script() -> ScriptedExpander {
    let mut s = ScriptedExpander::new();
    push_stage(&mut s, 3, 1, &STAGE_ONE_V3);
    push_stage(&mut s, 10, 1, &STAGE_ONE_V10);
    push_stage(&mut s, 3, 2, &STAGE_TWO_V3_PLAIN);
    push_stage(&mut s, 10, 2, &STAGE_TWO_V10);
    s
}

/// Replays the example under cross-entropy guided sampling; the second stage
/// reaches the optimum 9.7 from `v3`.
pub fn example_guided_script() -> ScriptedExpander {
    let mut s = ScriptedExpander::new();
    push_stage(&mut s, 3, 1, &STAGE_ONE_V3);
    push_stage(&mut s, 10, 1, &STAGE_ONE_V10);
    push_stage(&mut s, 3, 2, &STAGE_TWO_V3_GUIDED);
    push_stage(&mut s, 10, 2, &STAGE_TWO_V10);
    s
}
