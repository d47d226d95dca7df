//! Parameter sweeps over one or more solvers.
//!
//! A spec is read from JSON, the graph is loaded or generated once, and every
//! (axis value, solver, repetition) triple runs as an independent job. Rows come
//! back in a fixed order whatever the scheduling, so the CSV only depends on the
//! spec. Wall time is the one nondeterministic column and is written as zero
//! unless `timing` is switched on.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use waso_core::io::{load_graph, LoadOptions};
use waso_core::solver::{solve, Algorithm, SolverConfig};
use waso_core::synth::SynthSpec;
use waso_core::SocialGraph;

use crate::error::{HarnessError, Result};

pub const CSV_HEADER: [&str; 8] = ["axis", "solver", "rep", "seed", "willingness", "time_ms", "samples", "error"];

/// The solver parameter being swept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    K,
    #[serde(alias = "T")]
    Budget,
    #[serde(alias = "m")]
    Starts,
    Stages,
    Rho,
    #[serde(alias = "w")]
    Smooth,
}

impl Axis {
    fn integral(self) -> bool {
        matches!(self, Axis::K | Axis::Budget | Axis::Starts | Axis::Stages)
    }

    fn apply(self, cfg: &mut SolverConfig, value: f64) {
        match self {
            Axis::K => cfg.k = value as usize,
            Axis::Budget => cfg.budget = value as usize,
            Axis::Starts => cfg.starts = Some(value as usize),
            Axis::Stages => cfg.stages = value as usize,
            Axis::Rho => cfg.rho = value,
            Axis::Smooth => cfg.smooth = value,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum GraphSource {
    /// Edge list plus optional score file; relative paths resolve against the spec file.
    File {
        edges: PathBuf,
        #[serde(default)]
        scores: Option<PathBuf>,
        #[serde(default)]
        normalize: bool,
    },
    Synthetic(SynthSpec),
}

impl GraphSource {
    pub fn load(&self) -> Result<SocialGraph> {
        Ok(match self {
            GraphSource::File { edges, scores, normalize } => {
                load_graph(edges, scores.as_deref(), LoadOptions { normalize: *normalize })?
            }
            GraphSource::Synthetic(spec) => spec.generate()?,
        })
    }

    fn rebase(&mut self, dir: &Path) {
        if let GraphSource::File { edges, scores, .. } = self {
            *edges = dir.join(&*edges);
            if let Some(s) = scores {
                *s = dir.join(&*s);
            }
        }
    }
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub graph: GraphSource,
    pub axis: Axis,
    pub values: Vec<f64>,
    #[serde(default = "one")]
    pub repetitions: usize,
    /// Repetition `r` uses `seed + r` unless `seeds` lists one seed per repetition.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub seeds: Vec<u64>,
    pub solvers: Vec<Algorithm>,
    /// Settings shared by every run; the axis and the seed override their fields.
    #[serde(default)]
    pub config: SolverConfig,
    /// CSV destination; `None` writes to standard output.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Record solver wall time. Off by default so the CSV is reproducible byte for byte.
    #[serde(default)]
    pub timing: bool,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Reads a spec file, resolving relative paths against its directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut spec = Self::from_json(&std::fs::read_to_string(path)?)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        spec.graph.rebase(dir);
        if let Some(out) = &mut spec.output {
            *out = dir.join(&*out);
        }
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Spec(m));
        if self.values.is_empty() {
            return bad("axis values must not be empty".into());
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if self.solvers.is_empty() {
            return bad("at least one solver is required".into());
        }
        if !self.seeds.is_empty() && self.seeds.len() != self.repetitions {
            return bad(format!("{} seeds given for {} repetitions", self.seeds.len(), self.repetitions));
        }
        for &v in &self.values {
            if !v.is_finite() || (self.axis.integral() && (v < 0.0 || v.fract() != 0.0)) {
                return bad(format!("value {v} is not valid for axis {:?}", self.axis));
            }
        }
        Ok(())
    }

    pub fn seed_for(&self, rep: usize) -> u64 {
        self.seeds.get(rep).copied().unwrap_or_else(|| self.seed.wrapping_add(rep as u64))
    }
}

/// One solver run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub axis: f64,
    pub solver: Algorithm,
    pub rep: usize,
    pub seed: u64,
    /// `None` when the run failed.
    pub willingness: Option<f64>,
    pub time_ms: f64,
    pub samples: usize,
    /// Error code and message of a failed run.
    pub error: Option<String>,
    #[serde(skip)]
    order: (usize, usize),
}

/// Runs every job of the spec against one graph. Per-run solver errors end up
/// in the row; only graph loading fails the whole experiment.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let graph = spec.graph.load()?;
    Ok(run_on_graph(spec, &graph))
}

pub fn run_on_graph(spec: &ExperimentSpec, graph: &SocialGraph) -> Vec<ResultRow> {
    let jobs: Vec<(usize, usize, usize)> = (0..spec.values.len())
        .flat_map(|v| (0..spec.solvers.len()).flat_map(move |s| (0..spec.repetitions).map(move |r| (v, s, r))))
        .collect();
    let mut rows: Vec<ResultRow> = jobs
        .into_par_iter()
        .map(|(v, s, rep)| {
            let value = spec.values[v];
            let solver = spec.solvers[s];
            let seed = spec.seed_for(rep);
            let mut cfg = spec.config.clone();
            spec.axis.apply(&mut cfg, value);
            cfg.algorithm = solver;
            cfg.seed = seed;
            let clock = Instant::now();
            let outcome = solve(graph, &cfg);
            let elapsed = clock.elapsed().as_secs_f64() * 1e3;
            let time_ms = if spec.timing { elapsed } else { 0.0 };
            let mut row = ResultRow {
                axis: value,
                solver,
                rep,
                seed,
                willingness: None,
                time_ms,
                samples: 0,
                error: None,
                order: (v, s),
            };
            match outcome {
                Ok(report) => {
                    row.willingness = Some(report.solution.willingness);
                    row.samples = report.samples_used;
                }
                Err(e) => {
                    log::warn!("{solver} at {value} rep {rep}: {e}");
                    row.error = Some(format!("{}: {e}", e.code()));
                }
            }
            row
        })
        .collect();
    rows.sort_by_key(|r| (r.order, r.rep));
    rows
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.axis.to_string(),
            r.solver.tag().to_string(),
            r.rep.to_string(),
            r.seed.to_string(),
            r.willingness.map(|x| x.to_string()).unwrap_or_default(),
            format!("{:.3}", r.time_ms),
            r.samples.to_string(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(rows: &[ResultRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Aggregate over the repetitions of one (axis value, solver) cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub axis: f64,
    pub solver: Algorithm,
    pub runs: usize,
    pub failures: usize,
    pub mean: f64,
    /// Sample standard deviation; zero with fewer than two successful runs.
    pub stdev: f64,
    pub mean_time_ms: f64,
}

/// Rows must be in the order `run_experiment` returns them.
pub fn summarize(rows: &[ResultRow]) -> Vec<Summary> {
    rows.chunk_by(|a, b| a.order == b.order)
        .map(|cell| {
            let ok: Vec<f64> = cell.iter().filter_map(|r| r.willingness).collect();
            let n = ok.len() as f64;
            let mean = if ok.is_empty() { f64::NAN } else { ok.iter().sum::<f64>() / n };
            let stdev = if ok.len() < 2 {
                0.0
            } else {
                (ok.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            };
            Summary {
                axis: cell[0].axis,
                solver: cell[0].solver,
                runs: cell.len(),
                failures: cell.len() - ok.len(),
                mean,
                stdev,
                mean_time_ms: cell.iter().map(|r| r.time_ms).sum::<f64>() / cell.len() as f64,
            }
        })
        .collect()
}
