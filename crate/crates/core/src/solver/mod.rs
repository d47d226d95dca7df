//! Heuristic solvers and the pieces they are built from.

pub mod budget;
pub mod cross_entropy;
pub mod engine;
pub mod gaussian;
pub mod greedy;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WasoError};
use crate::graph::{NodeId, SocialGraph, WeightMode};
use crate::probability::SelectionProbabilityVector;
use crate::sampler::SampleVector;
use crate::solution::Solution;

pub use budget::{allocate_budget, select_start_nodes, stage_count, Allocation};
pub use cross_entropy::{
    backtrack_check, init_selection_probability, smooth, update_selection_probability,
};
pub use engine::{cbas, cbas_nd, cbas_nd_g, online_replan, run_staged, StagedVariant};
pub use gaussian::gaussian_exceed_probability;
pub use greedy::{dgreedy, rgreedy};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    #[serde(rename = "dgreedy")]
    DGreedy,
    #[serde(rename = "rgreedy")]
    RGreedy,
    Cbas,
    #[default]
    CbasNd,
    CbasNdG,
    Brute,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::DGreedy,
        Algorithm::RGreedy,
        Algorithm::Cbas,
        Algorithm::CbasNd,
        Algorithm::CbasNdG,
        Algorithm::Brute,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::DGreedy => "dgreedy",
            Algorithm::RGreedy => "rgreedy",
            Algorithm::Cbas => "cbas",
            Algorithm::CbasNd => "cbas-nd",
            Algorithm::CbasNdG => "cbas-nd-g",
            Algorithm::Brute => "brute",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = WasoError;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.tag() == s)
            .ok_or_else(|| WasoError::InvalidArgument(format!("unknown algorithm `{s}`")))
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// How later stages split their budget across start nodes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Distribution {
    /// Ratio of best-versus-worst powers.
    #[default]
    Uniform,
    /// Ratio of normal exceed probabilities.
    Gaussian,
}

/// All solver knobs. Zero or `None` fields fall back to instance-dependent defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub k: usize,
    /// Total sample budget T.
    pub budget: usize,
    /// Start-node count m; `None` means `ceil(n / k)`.
    pub starts: Option<usize>,
    /// Stage count r; 0 derives it from the confidence target.
    pub stages: usize,
    /// Elite fraction.
    pub rho: f64,
    /// Smoothing weight.
    pub smooth: f64,
    /// Closeness ratio used by the stage-count formula.
    pub alpha: f64,
    /// Confidence target used by the stage-count formula.
    pub confidence: f64,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub distribution: Distribution,
    /// Backtracking threshold on the squared change of the selection vector; 0 disables it.
    pub backtrack: f64,
    pub mode: WeightMode,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
    /// Stage count used when the formula is not applicable.
    pub fallback_stages: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            k: 5,
            budget: 1000,
            starts: None,
            stages: 0,
            rho: 0.3,
            smooth: 0.9,
            alpha: 0.99,
            confidence: 0.9,
            seed: 0,
            algorithm: Algorithm::CbasNd,
            distribution: Distribution::Uniform,
            backtrack: 0.0,
            mode: WeightMode::Unweighted,
            workers: None,
            fallback_stages: 2,
        }
    }
}

impl SolverConfig {
    pub fn new(k: usize, budget: usize) -> Self {
        SolverConfig {
            k,
            budget,
            ..Self::default()
        }
    }

    /// Start-node count for a graph of `n` nodes.
    pub fn start_count(&self, n: usize) -> usize {
        self.starts.unwrap_or_else(|| n.div_ceil(self.k.max(1)))
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(WasoError::InvalidArgument(msg));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.k > n {
            return bad(format!("k = {} exceeds the {n} nodes of the graph", self.k));
        }
        let m = self.start_count(n);
        if m == 0 || m > n {
            return bad(format!("start count {m} must lie in [1, {n}]"));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return bad(format!("rho = {} must lie in (0, 1)", self.rho));
        }
        if !(0.0..=1.0).contains(&self.smooth) {
            return bad(format!("smoothing weight {} must lie in [0, 1]", self.smooth));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha = {} must lie in (0, 1)", self.alpha));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return bad(format!("confidence = {} must lie in (0, 1)", self.confidence));
        }
        if !(self.backtrack >= 0.0 && self.backtrack.is_finite()) {
            return bad(format!("backtrack threshold {} must be >= 0", self.backtrack));
        }
        if self.workers == Some(0) {
            return bad("worker count must be at least 1".into());
        }
        if self.fallback_stages == 0 {
            return bad("fallback stage count must be at least 1".into());
        }
        Ok(())
    }
}

/// Sampling record of one start node.
#[derive(Clone, Debug, Serialize)]
pub struct StartNodeStats {
    pub start: NodeId,
    /// Initial partial solution the samples grow from.
    pub initial: Vec<NodeId>,
    /// Cumulative sample count.
    pub samples: usize,
    /// Worst willingness seen.
    pub c: f64,
    /// Best willingness seen.
    pub d: f64,
    pub best: Option<Vec<NodeId>>,
    pub pruned: bool,
    #[serde(skip)]
    pub p: Option<SelectionProbabilityVector>,
    pub gamma: Option<f64>,
    // Running mean and sum of squared deviations of sampled willingness.
    #[serde(skip)]
    pub(crate) mean: f64,
    #[serde(skip)]
    pub(crate) m2: f64,
}

impl StartNodeStats {
    pub fn new(start: NodeId, initial: Vec<NodeId>) -> Self {
        StartNodeStats {
            start,
            initial,
            samples: 0,
            c: f64::INFINITY,
            d: f64::NEG_INFINITY,
            best: None,
            pruned: false,
            p: None,
            gamma: None,
            mean: 0.0,
            m2: 0.0,
        }
    }

    /// Folds a batch of samples into the running statistics.
    pub fn absorb(&mut self, samples: &[SampleVector]) {
        for s in samples {
            self.samples += 1;
            self.c = self.c.min(s.willingness);
            let better = match &self.best {
                None => true,
                Some(b) => crate::solution::rank(s.willingness, &s.members, self.d, b).is_lt(),
            };
            if better {
                self.best = Some(s.members.clone());
            }
            self.d = self.d.max(s.willingness);
            let delta = s.willingness - self.mean;
            self.mean += delta / self.samples as f64;
            self.m2 += delta * (s.willingness - self.mean);
        }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Bessel-corrected standard deviation of the sampled willingness.
    pub fn std_dev(&self) -> f64 {
        if self.samples < 2 {
            0.0
        } else {
            (self.m2 / (self.samples - 1) as f64).sqrt()
        }
    }
}

/// Outcome of a solver run with enough detail to audit it.
#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub solution: Solution,
    pub starts: Vec<StartNodeStats>,
    /// Best willingness found so far after each stage.
    pub stage_best: Vec<f64>,
    /// Per stage, samples assigned to each entry of `starts`.
    pub allocations: Vec<Vec<usize>>,
    pub samples_used: usize,
}

/// Runs the algorithm named in `config`.
pub fn solve(graph: &SocialGraph, config: &SolverConfig) -> Result<SolveReport> {
    match config.algorithm {
        Algorithm::DGreedy => {
            config.validate(graph.n())?;
            let solution = dgreedy(graph, config.k, config.mode)?;
            Ok(SolveReport::single(solution, 0))
        }
        Algorithm::RGreedy => rgreedy(graph, config),
        Algorithm::Cbas => cbas(graph, config),
        Algorithm::CbasNd => cbas_nd(graph, config),
        Algorithm::CbasNdG => cbas_nd_g(graph, config),
        Algorithm::Brute => {
            config.validate(graph.n())?;
            let solution = crate::oracle::brute_force_with(
                graph,
                config.k,
                config.mode,
                crate::oracle::ScaleGuard::default(),
            )?;
            Ok(SolveReport::single(solution, 0))
        }
    }
}

impl SolveReport {
    pub(crate) fn single(solution: Solution, samples_used: usize) -> Self {
        SolveReport {
            solution,
            starts: Vec::new(),
            stage_best: Vec::new(),
            allocations: Vec::new(),
            samples_used,
        }
    }
}

/// Runs `f` on a dedicated pool when a worker count is configured.
pub(crate) fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| WasoError::InvalidArgument(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
