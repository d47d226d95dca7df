//! Acceptance gate. Runs every criterion, prints one line each, and exits
//! nonzero if any fails. Criteria that need hardware this machine lacks are
//! reported as NOT RUN together with what was measured.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use waso_core::fixtures::{example_config, example_graph, example_guided_script, example_plain_script, greedy_trap};
use waso_core::oracle::{
    binomial, brute_force, brute_force_dis, enumerate_connected, export_ilp, PathLink, SubstitutionChecker,
};
use waso_core::sampler::{sample_batch, Policy, SampleVector};
use waso_core::scenario::{solve_waso_dis, DEFAULT_EPSILON};
use waso_core::solver::budget::{allocate_budget, select_start_nodes, stage_count};
use waso_core::solver::cross_entropy::{init_selection_probability, smooth, update_selection_probability};
use waso_core::solver::{
    cbas, cbas_nd, dgreedy, gaussian_exceed_probability, run_staged, solve, Algorithm, Distribution, SolverConfig,
    StagedVariant, StartNodeStats,
};
use waso_core::synth::{random_instance, SynthSpec, Topology};
use waso_core::{SocialGraph, WeightMode};

enum Outcome {
    Pass(String),
    Fail(String),
    NotRun(String),
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<T>(r: waso_core::Result<T>) -> Result<T, String> {
    r.map_err(|err| err.to_string())
}

fn stats_from(start: usize, batch: &[SampleVector]) -> StartNodeStats {
    let mut s = StartNodeStats::new(start, vec![start]);
    s.absorb(batch);
    s
}

fn stage_one(g: &SocialGraph, start: usize) -> Result<Vec<SampleVector>, String> {
    let script = example_plain_script();
    let batch = e(sample_batch(g, &[start], 5, 5, Policy::Uniform, WeightMode::Unweighted, &script, 1, 0))?;
    Ok(batch.samples)
}

fn tenths(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

fn example_one() -> Check {
    let g = example_graph();
    let starts = e(select_start_nodes(&g, 2))?;
    ensure(starts == vec![2, 9], || format!("start nodes {starts:?}"))?;
    let sums = (g.node_sum(2), g.node_sum(9));
    ensure((sums.0 - 4.2).abs() < 1e-12 && (sums.1 - 4.2).abs() < 1e-12, || format!("sums {sums:?}"))?;
    let v3 = stats_from(2, &stage_one(&g, 2)?);
    let mut v10 = stats_from(9, &stage_one(&g, 9)?);
    let cd = [tenths(v3.c), tenths(v3.d), tenths(v10.c), tenths(v10.d)];
    ensure(cd == [5.9, 9.2, 6.9, 8.9], || format!("c/d {cd:?}"))?;
    let faithful = e(allocate_budget(&[v3.clone(), v10.clone()], 10))?;
    ensure(faithful.budgets == vec![6, 4], || format!("8.9 reading {:?}", faithful.budgets))?;
    v10.d = 8.8;
    let printed = e(allocate_budget(&[v3, v10], 10))?;
    ensure(printed.budgets == vec![7, 3], || format!("8.8 reading {:?}", printed.budgets))?;
    ensure((printed.weights[1] - 0.524).abs() < 5e-4, || format!("ratio {}", printed.weights[1]))?;
    // End to end with plain sampling.
    let cfg = example_config(Algorithm::Cbas);
    let variant = StagedVariant { cross_entropy: false, distribution: Distribution::Uniform };
    let r = e(run_staged(&g, &cfg, variant, &example_plain_script(), None))?;
    ensure(r.allocations == vec![vec![5, 5], vec![6, 4]], || format!("allocations {:?}", r.allocations))?;
    ensure(tenths(r.solution.willingness) == 9.2, || format!("plain best {}", r.solution.willingness))?;
    Ok(format!(
        "starts v3,v10 (4.2/4.2); c3=5.9 d3=9.2 c10=6.9 d10=8.9; budgets (6,4) at 8.9, (7,3) at 8.8 (ratio {:.3})",
        printed.weights[1]
    ))
}

fn example_two() -> Check {
    let g = example_graph();
    let batch = stage_one(&g, 2)?;
    let prev = e(init_selection_probability(10, 2, 5))?;
    let (p, gamma) = e(update_selection_probability(&batch, 0.5, None, &prev))?;
    ensure(tenths(gamma) == 8.9, || format!("gamma {gamma}"))?;
    let third = |c: f64| c / 3.0;
    let expect = [2.0, 1.0, 3.0, 2.0, 3.0, 2.0, 1.0, 0.0, 0.0, 1.0].map(third);
    ensure(p.to_dense() == expect, || format!("p {:?}", p.to_dense()))?;
    let s = e(smooth(&p, &prev, 0.6))?;
    ensure((s.get(0) - 5.2 / 9.0).abs() <= 1e-12, || format!("p[1] {}", s.get(0)))?;
    ensure((s.get(4) - 7.0 / 9.0).abs() <= 1e-12, || format!("p[5] {}", s.get(4)))?;
    // End to end: the guided second stage reaches the optimum and v10's vector
    // matches the printed one.
    let cfg = example_config(Algorithm::CbasNd);
    let variant = StagedVariant { cross_entropy: true, distribution: Distribution::Uniform };
    let r = e(run_staged(&g, &cfg, variant, &example_guided_script(), None))?;
    ensure(r.solution.members == vec![2, 3, 4, 5, 6], || format!("guided best {:?}", r.solution.members))?;
    ensure(tenths(r.solution.willingness) == 9.7, || format!("guided W {}", r.solution.willingness))?;
    ensure(tenths(r.starts[1].d) == 8.9, || format!("v10 best {}", r.starts[1].d))?;
    let v10 = stats_from(9, &stage_one(&g, 9)?);
    let prev10 = e(init_selection_probability(10, 9, 5))?;
    let (p10, _) = e(update_selection_probability(&stage_one(&g, 9)?, 0.5, None, &prev10))?;
    let p10 = e(smooth(&p10, &prev10, 0.6))?;
    let printed = [1.6, 1.6, 1.6, 3.4, 5.2, 5.2, 7.0, 5.2, 5.2, 9.0].map(|x| x / 9.0);
    let gap = p10.to_dense().iter().zip(printed).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(gap <= 1e-12, || format!("p10 gap {gap}"))?;
    ensure(tenths(v10.d) == 8.9, || "v10 stage one".into())?;
    Ok("gamma 8.9; p = <2/3,1/3,1,2/3,1,2/3,1/3,0,0,1/3>; smoothed 5.2/9 and 7/9; guided run reaches 9.7".into())
}

fn stage_count_example() -> Check {
    let r = stage_count(20, 2, 0.7, 0.9, 5, 10, 2);
    ensure(r == 2, || format!("r = {r}"))?;
    Ok("r = 2".into())
}

fn instance_with_component(n: usize, k: usize, degree: f64, seed: u64) -> SocialGraph {
    (0..)
        .map(|bump| random_instance(n, degree, seed * 1000 + bump).expect("valid instance"))
        .find(|g| (0..g.n()).any(|v| g.component_size(v) >= k))
        .expect("some seed gives a large enough component")
}

fn oracle_dominance() -> Check {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|x| x.to_string())?;
    let started = Instant::now();
    let (hits_nd, hits_cbas, total) = pool.install(|| -> Result<(usize, usize, usize), String> {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let (mut nd, mut plain) = (0, 0);
        for inst in 0..100u64 {
            let n = rng.random_range(8..=12);
            let k = rng.random_range(3..=5);
            let g = instance_with_component(n, k, 3.0, inst);
            let best = e(brute_force(&g, k))?;
            let mut cfg = SolverConfig::new(k, 2000);
            cfg.seed = inst;
            let mut results = vec![("dgreedy", e(dgreedy(&g, k, WeightMode::Unweighted))?)];
            for algo in [Algorithm::RGreedy, Algorithm::Cbas, Algorithm::CbasNd, Algorithm::CbasNdG] {
                cfg.algorithm = algo;
                results.push((algo.tag(), e(solve(&g, &cfg))?.solution));
            }
            for (name, s) in &results {
                ensure(best.willingness >= s.willingness, || {
                    format!("instance {inst}: {name} {} beats brute force {}", s.willingness, best.willingness)
                })?;
                ensure(s.connected && s.k() == k, || format!("instance {inst}: {name} returned an invalid group"))?;
            }
            let hit = |name: &str| results.iter().any(|(t, s)| *t == name && s.willingness == best.willingness);
            nd += hit("cbas-nd") as usize;
            plain += hit("cbas") as usize;
        }
        Ok((nd, plain, 100))
    })?;
    let secs = started.elapsed().as_secs_f64();
    let detail = format!("CBAS-ND optimal on {hits_nd}/{total}, CBAS on {hits_cbas}/{total}, {secs:.1}s on one thread");
    ensure(hits_nd * 100 >= 95 * total, || detail.clone())?;
    ensure(hits_cbas * 100 >= 85 * total, || detail.clone())?;
    ensure(secs < 300.0, || detail.clone())?;
    Ok(detail)
}

fn guided_beats_plain() -> Check {
    let (mut nd_sum, mut cbas_sum) = (0.0, 0.0);
    let (mut wins, mut losses) = (0u32, 0u32);
    for inst in 0..200u64 {
        let spec = SynthSpec { nodes: 100, topology: Topology::Ba, degree: 2, seed: inst, ..SynthSpec::default() };
        let g = e(spec.generate())?;
        let mut cfg = SolverConfig::new(10, 500);
        cfg.stages = 5;
        cfg.seed = inst;
        let a = e(cbas_nd(&g, &cfg))?.solution.willingness;
        let b = e(cbas(&g, &cfg))?.solution.willingness;
        nd_sum += a;
        cbas_sum += b;
        if a > b {
            wins += 1;
        } else if a < b {
            losses += 1;
        }
    }
    let trials = wins + losses;
    let p: f64 = (wins..=trials).map(|i| binomial(trials as usize, i as usize)).sum::<f64>() / 2f64.powi(trials as i32);
    let detail = format!(
        "mean CBAS-ND {:.4} vs CBAS {:.4}; {wins} wins, {losses} losses, sign test p = {p:.2e}",
        nd_sum / 200.0,
        cbas_sum / 200.0
    );
    ensure(nd_sum >= cbas_sum && p < 0.05, || detail.clone())?;
    Ok(detail)
}

fn greedy_trap_check() -> Check {
    let g = greedy_trap();
    let d = e(dgreedy(&g, 3, WeightMode::Unweighted))?;
    let b = e(brute_force(&g, 3))?;
    ensure(d.willingness == 27.0 && b.willingness == 30.0, || format!("dgreedy {} brute {}", d.willingness, b.willingness))?;
    Ok("dgreedy 27, brute force 30".into())
}

fn virtual_node_reduction() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut disconnected = 0;
    for inst in 0..100u64 {
        let n = rng.random_range(4..=10);
        let k = rng.random_range(1..=4.min(n));
        let g = e(random_instance(n, 1.5, inst))?;
        let mut cfg = SolverConfig::new(k, 100);
        cfg.algorithm = Algorithm::Brute;
        let via = e(solve_waso_dis(&g, &cfg, DEFAULT_EPSILON))?;
        let direct = e(brute_force_dis(&g, k))?;
        ensure(via.willingness == direct.willingness, || {
            format!("instance {inst}: reduction {} vs direct {}", via.willingness, direct.willingness)
        })?;
        disconnected += (!direct.connected) as usize;
    }
    Ok(format!("100/100 exact matches ({disconnected} optima disconnected)"))
}

fn ilp_semantics() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut feasible_total = 0;
    for inst in 0..50u64 {
        let n = rng.random_range(3..=7);
        let k = rng.random_range(1..=4.min(n));
        let g = e(random_instance(n, 2.5, inst))?;
        let model = e(export_ilp(&g, k, PathLink::Tight))?;
        let checker = SubstitutionChecker::new(&model);
        let mut admitted = Vec::new();
        for mask in 0u32..(1 << n) {
            let sel: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
            if let Some(obj) = checker.check(&sel) {
                let members: Vec<usize> = (0..n).filter(|&i| sel[i]).collect();
                let w = e(g.willingness(&members, WeightMode::Unweighted))?;
                ensure(obj == w, || format!("instance {inst}: objective {obj} vs willingness {w} for {members:?}"))?;
                admitted.push(members);
            }
        }
        let mut connected = Vec::new();
        e(enumerate_connected(&g, k, |s| {
            let mut v = s.to_vec();
            v.sort_unstable();
            connected.push(v);
        }))?;
        admitted.sort();
        connected.sort();
        ensure(admitted == connected, || format!("instance {inst}: model admits {admitted:?}, connected {connected:?}"))?;
        feasible_total += admitted.len();
    }
    Ok(format!("50/50 instances match ({feasible_total} feasible groups checked)"))
}

fn gaussian() -> Check {
    let same = e(gaussian_exceed_probability(3.0, 0.7, 1, 3.0, 0.7, 1))?;
    ensure((same - 0.5).abs() <= 1e-6, || format!("identical starts give {same}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let draws = 1_000_000;
    let mut worst: f64 = 0.0;
    for set in 0..20 {
        let (mu_b, sigma_b, n_b) = (rng.random_range(5.0..8.0), rng.random_range(0.3..2.0), rng.random_range(1..=6));
        let (mu_i, sigma_i, n_i) = (rng.random_range(4.0..8.0), rng.random_range(0.3..2.0), rng.random_range(1..=6));
        let exact = e(gaussian_exceed_probability(mu_b, sigma_b, n_b, mu_i, sigma_i, n_i))?;
        let mut max_of = |mu: f64, sigma: f64, count: usize| {
            (0..count).map(|_| mu + sigma * rng.sample::<f64, _>(StandardNormal)).fold(f64::NEG_INFINITY, f64::max)
        };
        let mut hits = 0usize;
        for _ in 0..draws {
            let b = max_of(mu_b, sigma_b, n_b);
            let i = max_of(mu_i, sigma_i, n_i);
            hits += (i > b) as usize;
        }
        let est = hits as f64 / draws as f64;
        let se = (exact * (1.0 - exact) / draws as f64).sqrt().max(1e-12);
        let z = (est - exact).abs() / se;
        worst = worst.max(z);
        ensure(z <= 3.0, || format!("set {set}: quadrature {exact:.6} vs Monte Carlo {est:.6} ({z:.2} SE)"))?;
    }
    Ok(format!("symmetric case {same:.9}; 20 sets within {worst:.2} SE of 10^6-draw Monte Carlo"))
}

fn determinism_and_speedup() -> Vec<(String, Outcome)> {
    let mut out = Vec::new();
    let spec = SynthSpec { nodes: 50_000, topology: Topology::Ba, degree: 2, seed: 5, ..SynthSpec::default() };
    let g = match spec.generate() {
        Ok(g) => g,
        Err(err) => {
            out.push(("determinism".to_string(), Outcome::Fail(err.to_string())));
            return out;
        }
    };
    let mut cfg = SolverConfig::new(30, 5000);
    cfg.seed = 17;
    let mut runs = Vec::new();
    for w in [1, 4, 8] {
        cfg.workers = Some(w);
        let t = Instant::now();
        match cbas_nd(&g, &cfg) {
            Ok(r) => runs.push((w, r.solution, t.elapsed().as_secs_f64())),
            Err(err) => {
                out.push(("determinism".to_string(), Outcome::Fail(err.to_string())));
                return out;
            }
        }
    }
    let same = runs.iter().all(|r| r.1 == runs[0].1);
    let det = format!(
        "identical solution (W = {:.4}) at 1, 4 and 8 workers on 50k nodes, k = 30, T = 5000",
        runs[0].1.willingness
    );
    out.push((
        "determinism".to_string(),
        if same { Outcome::Pass(det) } else { Outcome::Fail("solutions differ across worker counts".into()) },
    ));
    let cores = std::thread::available_parallelism().map(|c| c.get()).unwrap_or(1);
    let ratio = runs[2].2 / runs[0].2;
    let timing = format!("1 worker {:.2}s, 8 workers {:.2}s, ratio {ratio:.2}", runs[0].2, runs[2].2);
    let speed = if cores < 8 {
        Outcome::NotRun(format!("{cores} core(s) available, 8 required; measured {timing}"))
    } else if ratio <= 0.25 {
        Outcome::Pass(timing)
    } else {
        Outcome::Fail(timing)
    };
    out.push(("parallel speedup".to_string(), speed));
    out
}

fn scaling() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for inst in 0..50u64 {
        let n = rng.random_range(4..=10);
        let k = rng.random_range(1..=4.min(n));
        let g = instance_with_component(n, k, 3.0, 500 + inst);
        let a = e(brute_force(&g, k))?;
        let b = e(brute_force(&g.scaled(3.7), k))?;
        ensure(a.members == b.members, || format!("instance {inst}: {:?} vs {:?}", a.members, b.members))?;
    }
    Ok("50/50 optimal groups unchanged under x3.7".into())
}

fn main() -> ExitCode {
    let checks: Vec<(&str, fn() -> Check)> = vec![
        ("worked example: start nodes and budget allocation", example_one),
        ("worked example: selection probability update", example_two),
        ("stage count", stage_count_example),
        ("oracle dominance and convergence", oracle_dominance),
        ("guided sampling beats plain sampling", guided_beats_plain),
        ("greedy trap", greedy_trap_check),
        ("disconnected groups via virtual node", virtual_node_reduction),
        ("integer program semantics", ilp_semantics),
        ("normal-model allocation", gaussian),
    ];
    let mut results: Vec<(String, Outcome)> = Vec::new();
    for (name, f) in checks {
        let outcome = match f() {
            Ok(detail) => Outcome::Pass(detail),
            Err(detail) => Outcome::Fail(detail),
        };
        report(name, &outcome);
        results.push((name.to_string(), outcome));
    }
    for (name, outcome) in determinism_and_speedup() {
        report(&name, &outcome);
        results.push((name, outcome));
    }
    let outcome = match scaling() {
        Ok(d) => Outcome::Pass(d),
        Err(d) => Outcome::Fail(d),
    };
    report("scale invariance", &outcome);
    results.push(("scale invariance".into(), outcome));

    let failed = results.iter().filter(|r| matches!(r.1, Outcome::Fail(_))).count();
    let not_run = results.iter().filter(|r| matches!(r.1, Outcome::NotRun(_))).count();
    println!(
        "acceptance: {} passed, {failed} failed, {not_run} not run",
        results.len() - failed - not_run
    );
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn report(name: &str, outcome: &Outcome) {
    match outcome {
        Outcome::Pass(d) => println!("PASS     {name}: {d}"),
        Outcome::Fail(d) => println!("FAIL     {name}: {d}"),
        Outcome::NotRun(d) => println!("NOT RUN  {name}: {d}"),
    }
}
