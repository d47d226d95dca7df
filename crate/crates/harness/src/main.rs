use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use waso_core::io::{load_graph, write_edge_list, write_scores, LoadOptions};
use waso_core::oracle::{export_ilp, PathLink};
use waso_core::scenario::{apply_scenario, solve_waso_dis, ScenarioGraph, ScenarioSpec};
use waso_core::solver::{solve, Algorithm, Distribution, SolverConfig};
use waso_core::synth::{SynthSpec, Topology, DEFAULT_BETA, DEFAULT_FLOOR};
use waso_core::WeightMode;
use waso_harness::experiment::{run_experiment, summarize, write_csv, ExperimentSpec};
use waso_harness::{HarnessError, Result, SolveOutput};

#[derive(Parser)]
#[command(name = "waso", version, about = "Pick a connected group of k people with the highest willingness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance.
    Solve(SolveArgs),
    /// Run an experiment spec and write its CSV.
    Bench {
        #[arg(long)]
        spec: PathBuf,
        /// Overrides the spec's output path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print per-cell mean and standard deviation to stderr.
        #[arg(long)]
        summary: bool,
    },
    /// Generate a synthetic scored graph as PREFIX.edges and PREFIX.scores.
    Synth {
        #[arg(long, default_value_t = 1000)]
        nodes: usize,
        #[arg(long, default_value = "ba")]
        topology: Topology,
        /// Edges per new node (ba) or expected degree (er).
        #[arg(long, default_value_t = 2)]
        degree: usize,
        #[arg(long, default_value_t = DEFAULT_BETA)]
        beta: f64,
        #[arg(long, default_value_t = DEFAULT_FLOOR)]
        floor: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Link {
    Tight,
    Loose,
}

#[derive(Args)]
struct SolveArgs {
    /// Edge list, one `u v [t]` per line.
    #[arg(long)]
    graph: PathBuf,
    /// Score file, one `v eta [lambda]` per line.
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Min-max normalize scores after loading.
    #[arg(long)]
    normalize: bool,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value = "cbas-nd")]
    algo: Algorithm,
    #[arg(long, default_value_t = 1000)]
    budget: usize,
    #[arg(long)]
    starts: Option<usize>,
    /// 0 derives the stage count from --pb and --alpha.
    #[arg(long, default_value_t = 0)]
    stages: usize,
    #[arg(long, default_value_t = 0.3)]
    rho: f64,
    #[arg(long, default_value_t = 0.9)]
    smooth: f64,
    #[arg(long, default_value_t = 0.99)]
    alpha: f64,
    /// Target probability of sampling the best start's optimum.
    #[arg(long, default_value_t = 0.9)]
    pb: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
    /// Backtracking threshold; 0 disables it.
    #[arg(long, default_value_t = 0.0)]
    backtrack: f64,
    /// Scenario as JSON `{"kind": ..., "params": ...}`, or `@FILE`. Node references are dense ids.
    #[arg(long)]
    scenario: Option<String>,
    /// Blend interest and tightness per node with its lambda.
    #[arg(long)]
    weighted_lambda: bool,
    /// Also write the integer program of the instance in LP format.
    #[arg(long)]
    export_lp: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "tight")]
    path_link: Link,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

impl SolveArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            k: self.k,
            budget: self.budget,
            starts: self.starts,
            stages: self.stages,
            rho: self.rho,
            smooth: self.smooth,
            alpha: self.alpha,
            confidence: self.pb,
            seed: self.seed,
            algorithm: self.algo,
            distribution: Distribution::Uniform,
            backtrack: self.backtrack,
            mode: if self.weighted_lambda { WeightMode::LambdaWeighted } else { WeightMode::Unweighted },
            workers: self.workers,
            ..SolverConfig::default()
        }
    }
}

fn read_scenario(arg: &str) -> Result<ScenarioSpec> {
    let text = match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path)?,
        None => arg.to_string(),
    };
    Ok(serde_json::from_str(&text)?)
}

fn run_solve(args: &SolveArgs) -> Result<String> {
    let graph = load_graph(&args.graph, args.scores.as_deref(), LoadOptions { normalize: args.normalize })?;
    let mut cfg = args.config();
    let sg = match &args.scenario {
        Some(s) => apply_scenario(&graph, &read_scenario(s)?, cfg.mode)?,
        None => ScenarioGraph::identity(graph.clone(), cfg.mode),
    };
    cfg.mode = sg.mode;

    if let Some(path) = &args.export_lp {
        if cfg.mode == WeightMode::LambdaWeighted {
            log::warn!("the exported model uses the unweighted objective");
        }
        let link = match args.path_link {
            Link::Tight => PathLink::Tight,
            Link::Loose => PathLink::Loose,
        };
        fs::write(path, export_ilp(&sg.graph, cfg.k, link)?.to_lp())?;
    }

    let (solution, samples) = match sg.epsilon {
        Some(eps) => (solve_waso_dis(&sg.graph, &cfg, eps)?, None),
        None => {
            let report = solve(&sg.graph, &cfg)?;
            (report.solution, Some(report.samples_used))
        }
    };
    let members = sg.original_members(&solution.members);
    let out = SolveOutput::new(&graph, &sg.graph, cfg.algorithm, &solution, members, cfg.mode, samples)?;
    match args.format {
        Format::Json => out.to_json().map(|mut s| {
            s.push('\n');
            s
        }),
        Format::Csv => out.to_csv(),
    }
}

fn run_bench(spec_path: &Path, out: Option<PathBuf>, summary: bool) -> Result<()> {
    let mut spec = ExperimentSpec::from_file(spec_path)?;
    if out.is_some() {
        spec.output = out;
    }
    let rows = run_experiment(&spec)?;
    match &spec.output {
        Some(path) => write_csv(&rows, fs::File::create(path)?)?,
        None => write_csv(&rows, std::io::stdout().lock())?,
    }
    if summary {
        let mut err = std::io::stderr().lock();
        writeln!(err, "{:>10} {:>10} {:>5} {:>5} {:>14} {:>12} {:>12}", "axis", "solver", "runs", "fail", "mean", "stdev", "time_ms")?;
        for s in summarize(&rows) {
            writeln!(
                err,
                "{:>10} {:>10} {:>5} {:>5} {:>14.4} {:>12.4} {:>12.3}",
                s.axis, s.solver.tag(), s.runs, s.failures, s.mean, s.stdev, s.mean_time_ms
            )?;
        }
    }
    Ok(())
}

fn run_synth(spec: SynthSpec, out: &Path) -> Result<()> {
    if !(spec.beta > 1.0) {
        return Err(HarnessError::Spec(format!("beta = {} must exceed 1", spec.beta)));
    }
    let g = spec.generate()?;
    let prefix = out.as_os_str().to_string_lossy();
    fs::write(format!("{prefix}.edges"), write_edge_list(&g))?;
    fs::write(format!("{prefix}.scores"), write_scores(&g))?;
    eprintln!("wrote {} nodes and {} directed entries to {prefix}.edges / {prefix}.scores", g.n(), g.edge_count());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve(args) => {
            let text = run_solve(&args)?;
            std::io::stdout().lock().write_all(text.as_bytes())?;
        }
        Command::Bench { spec, out, summary } => run_bench(&spec, out, summary)?,
        Command::Synth { nodes, topology, degree, beta, floor, seed, out } => {
            run_synth(SynthSpec { nodes, topology, degree, beta, floor, seed }, &out)?
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            ExitCode::FAILURE
        }
    }
}
