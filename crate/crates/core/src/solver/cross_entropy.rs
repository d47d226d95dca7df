//! Cross-entropy refit of node selection probabilities.

use std::collections::BTreeMap;

use crate::error::{Result, WasoError};
use crate::graph::NodeId;
use crate::probability::SelectionProbabilityVector;
use crate::sampler::SampleVector;

/// Start node at probability 1, every other node at `(k-1)/(n-1)`.
pub fn init_selection_probability(n: usize, start: NodeId, k: usize) -> Result<SelectionProbabilityVector> {
    init_for_partial(n, &[start], k)
}

/// Nodes of the initial partial at 1, the rest share the remaining `k - |partial|`
/// slots evenly.
pub fn init_for_partial(n: usize, partial: &[NodeId], k: usize) -> Result<SelectionProbabilityVector> {
    if partial.is_empty() || k > n || k < partial.len() {
        return Err(WasoError::InvalidArgument(format!(
            "cannot initialize selection probabilities for {} fixed nodes, k = {k}, n = {n}",
            partial.len()
        )));
    }
    let rest = n - partial.len();
    let bg = if rest == 0 {
        0.0
    } else {
        (k - partial.len()) as f64 / rest as f64
    };
    let mut p = SelectionProbabilityVector::constant(n, bg)?;
    for &v in partial {
        p.set(v, 1.0)?;
    }
    Ok(p)
}

/// Index (1-based) of the elite threshold among `count` samples sorted descending.
pub fn elite_rank(rho: f64, count: usize) -> usize {
    // The small slack keeps products like 0.3 * 10 from rounding up past an integer.
    let r = (rho * count as f64 - 1e-9).ceil();
    (r.max(1.0) as usize).min(count)
}

/// Refits selection probabilities to the elite samples.
///
/// The threshold is the `ceil(rho * N)`-th largest willingness, never lower than
/// `gamma_prev`. Entry `j` becomes the fraction of elite samples containing node `j`.
/// If nothing reaches the threshold the previous vector is returned unchanged.
pub fn update_selection_probability(
    samples: &[SampleVector],
    rho: f64,
    gamma_prev: Option<f64>,
    prev: &SelectionProbabilityVector,
) -> Result<(SelectionProbabilityVector, f64)> {
    if samples.is_empty() {
        return Err(WasoError::InvalidArgument("no samples to refit".into()));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(WasoError::InvalidArgument(format!("rho = {rho} must lie in (0, 1)")));
    }
    let mut values: Vec<f64> = samples.iter().map(|s| s.willingness).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    let candidate = values[elite_rank(rho, values.len()) - 1];
    let gamma = match gamma_prev {
        Some(g) if g > candidate => g,
        _ => candidate,
    };
    let elite: Vec<&SampleVector> = samples.iter().filter(|s| s.willingness >= gamma).collect();
    if elite.is_empty() {
        return Ok((prev.clone(), gamma));
    }
    let mut counts: BTreeMap<NodeId, usize> = BTreeMap::new();
    for s in &elite {
        for &v in &s.members {
            if v >= prev.len() {
                return Err(WasoError::InvalidMember(v));
            }
            *counts.entry(v).or_default() += 1;
        }
    }
    let total = elite.len() as f64;
    let entries = counts
        .into_iter()
        .map(|(v, c)| (v, c as f64 / total))
        .collect();
    Ok((SelectionProbabilityVector::from_parts(prev.len(), 0.0, entries), gamma))
}

/// `w * p_new + (1 - w) * p_old`, elementwise.
pub fn smooth(
    p_new: &SelectionProbabilityVector,
    p_old: &SelectionProbabilityVector,
    w: f64,
) -> Result<SelectionProbabilityVector> {
    if p_new.len() != p_old.len() {
        return Err(WasoError::LengthMismatch { left: p_new.len(), right: p_old.len() });
    }
    if !(0.0..=1.0).contains(&w) {
        return Err(WasoError::InvalidArgument(format!("smoothing weight {w} outside [0, 1]")));
    }
    let mix = |a: f64, b: f64| (w * a + (1.0 - w) * b).clamp(0.0, 1.0);
    let background = mix(p_new.background(), p_old.background());
    let mut entries = BTreeMap::new();
    for &j in p_new.entries().keys().chain(p_old.entries().keys()) {
        entries
            .entry(j)
            .or_insert_with(|| mix(p_new.get(j), p_old.get(j)));
    }
    Ok(SelectionProbabilityVector::from_parts(p_new.len(), background, entries))
}

/// Squared Euclidean distance between two selection vectors.
pub fn selection_distance(a: &SelectionProbabilityVector, b: &SelectionProbabilityVector) -> Result<f64> {
    if a.len() != b.len() {
        return Err(WasoError::LengthMismatch { left: a.len(), right: b.len() });
    }
    let mut keys: Vec<NodeId> = a.entries().keys().chain(b.entries().keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    let mut z: f64 = keys.iter().map(|&j| (a.get(j) - b.get(j)).powi(2)).sum();
    let implicit = a.len() - keys.len();
    z += implicit as f64 * (a.background() - b.background()).powi(2);
    Ok(z)
}

/// True when the vector moved less than `z_t` (squared distance), which signals a
/// stalled search that should restart from the previous vector.
pub fn backtrack_check(
    p_t: &SelectionProbabilityVector,
    p_prev: &SelectionProbabilityVector,
    z_t: f64,
) -> Result<bool> {
    Ok(selection_distance(p_t, p_prev)? < z_t)
}
