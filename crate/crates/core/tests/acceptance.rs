//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. The full-scale run is skipped unless
//! `--ignored` or `--include-ignored` is passed.

use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use svc_cache::catalog::{bps_to_mbps, mbps_to_bps, ClusterConfig, Library, OpLadder, Video};
use svc_cache::channel::ChannelParams;
use svc_cache::cli::{
    cmd_simulate, cmd_solve, evaluate_strategies, solve_proposed, Experiment, ExperimentConfig, SolverOverrides,
    Strategy,
};
use svc_cache::placement::{
    solve_bruteforce, solve_mckp, solve_mckp_with, verify_staircase, CacheOption, CachingState, EfficientStateSet,
    PlacementSolution,
};
use svc_cache::qoe::{delivery_distribution, expected_qoe, ladder_mos, QoeModel};
use svc_cache::simulate::{hit_ratio_analytic, SimOptions, Simulator};
use svc_cache::strategies::{BaselineKind, BaselineSpec};

const TB: f64 = 1.0e12;

// criterion 1
const EXACT_INSTANCES: u64 = 200;
const EXACT_BUDGET: Duration = Duration::from_secs(10);
// criteria 2 and 3
const MC_TRIALS: u64 = 1_000_000;
const MC_SIGMAS: f64 = 3.0;
const MC_PASS_FRACTION: f64 = 0.95;
const MC_BUDGET: Duration = Duration::from_secs(120);
const MASS_TOL: f64 = 1e-12;
// criteria 4 to 7
const REDUCED_M: usize = 2000;
const REDUCED_QUANTUM: u32 = 10;
const STAIRCASE_BUDGET: Duration = Duration::from_secs(300);
const HIT_RATIO_TOL: f64 = 0.02;
const SWEEP_TRIALS: u64 = 200_000;
const SWEEP_SIGMAS: f64 = 3.0;
const SWEEP_BUDGET: Duration = Duration::from_secs(900);
// criterion 9
const FULL_BUDGET: Duration = Duration::from_secs(1800);
const FULL_MEMORY_BYTES: u64 = 2 << 30;

type Criterion = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }

    fn fail(detail: impl Into<String>) -> Self {
        Self::new(false, detail)
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let full = args.iter().any(|a| a == "--ignored" || a == "--include-ignored");

    let criteria: [Criterion; 8] = [
        (1, "solver exactness", solver_exactness),
        (2, "analytic vs Monte Carlo QoE", analytic_vs_monte_carlo),
        (3, "delivery mass telescoping", mass_telescoping),
        (4, "staircase structure", staircase),
        (5, "caching state shape by popularity", caching_state_shape),
        (6, "QoE and hit ratio trends", qoe_and_hit_ratio_trends),
        (7, "baseline comparison over SBS SNR", baseline_comparison),
        (8, "determinism", determinism),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        failed += report(id, name, run);
    }
    if full {
        failed += report(9, "full-scale run", full_scale);
    } else {
        println!("criterion 9 SKIP full-scale run: pass --ignored to run it");
    }
    if failed > 0 {
        println!("acceptance: {failed} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}

fn report(id: u32, name: &str, run: fn() -> Outcome) -> usize {
    let start = Instant::now();
    let outcome = run();
    println!(
        "criterion {id} {} {name}: {} [{:.1} s]",
        if outcome.pass { "PASS" } else { "FAIL" },
        outcome.detail,
        start.elapsed().as_secs_f64()
    );
    usize::from(!outcome.pass)
}

fn reduced_config(n_sbs: u32, cache_bytes: f64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.library.m = REDUCED_M;
    cfg.solver.quantum_mult = REDUCED_QUANTUM;
    cfg.cluster.n_sbs = n_sbs;
    cfg.cluster.cache_bytes = cache_bytes;
    cfg
}

fn relaxed_solution(exp: &Experiment) -> PlacementSolution {
    let cs = EfficientStateSet::from_table(&exp.table, &exp.cost).unwrap();
    solve_mckp_with(&exp.library, &cs, exp.capacity_units(), &exp.solver).unwrap()
}

fn random_library(rng: &mut ChaCha8Rng, m: usize) -> Library {
    // coarse weights so that equal popularities occur
    let mut raw: Vec<f64> = (0..m).map(|_| rng.random_range(1..6) as f64).collect();
    raw.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = raw.iter().sum();
    Library::new(
        raw.iter()
            .enumerate()
            .map(|(i, w)| Video {
                id: i + 1,
                popularity: w / total,
                duration_s: 3600.0,
            })
            .collect(),
    )
    .unwrap()
}

fn random_choice_set(rng: &mut ChaCha8Rng, v: usize) -> EfficientStateSet {
    let mbs = 2.0;
    // quarter-step QoE and small costs so that ties occur
    let options = (0..v)
        .map(|i| CacheOption {
            state: CachingState {
                n: rng.random_range(1..4),
                rate_bps: 100_000 * (i as u64 + 1),
            },
            qoe: mbs + 0.25 * rng.random_range(1..9) as f64,
            cost: rng.random_range(1..9),
        })
        .collect();
    EfficientStateSet::from_options_unfiltered(options, mbs)
}

fn solver_exactness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    for instance in 0..EXACT_INSTANCES {
        let m = rng.random_range(1..=6);
        let lib = random_library(&mut rng, m);
        let v = rng.random_range(1..=4);
        let cs = random_choice_set(&mut rng, v);
        let cap = rng.random_range(0..=20);
        let dp = solve_mckp(&lib, &cs, cap).unwrap();
        let bf = solve_bruteforce(&lib, &cs, cap).unwrap();
        if dp.objective.to_bits() != bf.objective.to_bits() {
            return Outcome::fail(format!("instance {instance}: objective {} vs {}", dp.objective, bf.objective));
        }
        if dp.assignments != bf.assignments {
            return Outcome::fail(format!("instance {instance}: assignments differ"));
        }
    }
    let elapsed = start.elapsed();
    Outcome::new(
        elapsed < EXACT_BUDGET,
        format!("{EXACT_INSTANCES} instances identical, {:.2} s (budget {} s)", elapsed.as_secs_f64(), EXACT_BUDGET.as_secs()),
    )
}

fn grid_channels() -> [ChannelParams; 2] {
    [ChannelParams::new(10.0, 5.0e6).unwrap(), ChannelParams::new(3.0, 2.0e6).unwrap()]
}

fn analytic_vs_monte_carlo() -> Outcome {
    let start = Instant::now();
    let ladder = OpLadder::table_default();
    let model = QoeModel::default();
    let single = Library::new(vec![Video {
        id: 1,
        popularity: 1.0,
        duration_s: 3600.0,
    }])
    .unwrap();
    let scores = ladder_mos(&ladder, &model);
    let (mut cells, mut hits) = (0usize, 0usize);
    let mut worst = 0.0f64;
    for (c, channel) in grid_channels().into_iter().enumerate() {
        let cfg = ClusterConfig::new(5, 0, channel, channel).unwrap();
        for n in 1..=5u32 {
            for (l, &rate) in ladder.rates_bps().iter().enumerate() {
                let state = CachingState { n, rate_bps: rate };
                let q = expected_qoe(state, &ladder, &channel, &model).unwrap();
                let solution = PlacementSolution {
                    assignments: vec![Some(CacheOption { state, qoe: q, cost: 0 })],
                    mbs_qoe: 0.0,
                    objective: q,
                    capacity_units: 0,
                    used_units: 0,
                    per_sbs: None,
                    demotions: Vec::new(),
                };
                let report = Simulator::new(&solution, &single, &ladder, &cfg, &model)
                    .unwrap()
                    .estimate(&SimOptions {
                        trials: MC_TRIALS,
                        seed: 1000 * c as u64 + 100 * n as u64 + l as u64,
                        per_rank: false,
                    })
                    .unwrap();
                let se = standard_error(n, rate, &ladder, &channel, &scores, q);
                let z = (report.avg_qoe - q).abs() / se;
                cells += 1;
                if z <= MC_SIGMAS {
                    hits += 1;
                } else {
                    worst = worst.max(z);
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let fraction = hits as f64 / cells as f64;
    Outcome::new(
        fraction >= MC_PASS_FRACTION && elapsed < MC_BUDGET,
        format!(
            "{hits}/{cells} cells within {MC_SIGMAS} exact SE at {MC_TRIALS} trials (need {:.0}%), worst miss {worst:.2} SE, {:.1} s",
            100.0 * MC_PASS_FRACTION,
            elapsed.as_secs_f64()
        ),
    )
}

/// Standard error of a `MC_TRIALS`-sample mean, from the exact score
/// distribution. The sample estimate collapses to zero when deviations
/// from the modal score are rarer than one per run.
fn standard_error(n: u32, rate: u64, ladder: &OpLadder, channel: &ChannelParams, scores: &[f64], q: f64) -> f64 {
    let d = delivery_distribution(n, rate, ladder, channel).unwrap();
    let spread: f64 = d.per_op.iter().zip(scores).map(|(p, s)| p * (s - q) * (s - q)).sum();
    ((spread + d.stall * q * q) / MC_TRIALS as f64).sqrt()
}

fn mass_telescoping() -> Outcome {
    let ladder = OpLadder::table_default();
    let mut worst = 0.0f64;
    for channel in grid_channels() {
        for n in 1..=5 {
            for &rate in ladder.rates_bps() {
                let d = delivery_distribution(n, rate, &ladder, &channel).unwrap();
                worst = worst.max((d.total_mass() - 1.0).abs());
            }
        }
    }
    Outcome::new(worst <= MASS_TOL, format!("max |mass - 1| = {worst:.2e} over 100 cells (tol {MASS_TOL:e})"))
}

fn staircase() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for n_sbs in [3, 5] {
        for tb in [1.0, 2.0] {
            let start = Instant::now();
            let exp = Experiment::from_config(&reduced_config(n_sbs, tb * TB)).unwrap();
            let sol = relaxed_solution(&exp);
            let elapsed = start.elapsed();
            let ok = verify_staircase(&sol, &exp.library);
            pass &= ok.is_ok() && elapsed < STAIRCASE_BUDGET;
            notes.push(match ok {
                Ok(()) => format!("N={n_sbs} C={tb}TB ok m_hat={} {:.1}s", sol.m_hat(), elapsed.as_secs_f64()),
                Err(v) => format!("N={n_sbs} C={tb}TB violation at video {} ({:?})", v.video, v.metric),
            });
        }
    }
    Outcome::new(pass, notes.join("; "))
}

/// Reduced-scale cache per SBS. Scales the reference 2 TB with the library
/// so that caching stays as scarce as in the full-size scenario.
fn scaled_cache(tb_at_full_scale: f64) -> f64 {
    tb_at_full_scale * TB * REDUCED_M as f64 / 10_000.0
}

fn caching_state_shape() -> Outcome {
    let exp = Experiment::from_config(&reduced_config(3, scaled_cache(2.0))).unwrap();
    let sol = solve_proposed(&exp).unwrap();
    shape_check(&sol, &exp.ladder)
}

fn shape_check(sol: &PlacementSolution, ladder: &OpLadder) -> Outcome {
    let cached: Vec<CacheOption> = sol.assignments.iter().flatten().copied().collect();
    let Some(first) = sol.assignments[0] else {
        return Outcome::fail("most popular video not cached");
    };
    let diverse = cached.iter().filter(|o| o.state.n >= 2).count();
    let single = cached.iter().filter(|o| o.state.n == 1).count();
    // copies beyond one occur only on a popularity prefix
    let diverse_prefix = sol.assignments[..diverse].iter().all(|a| a.is_some_and(|o| o.state.n >= 2));
    let rates_nonincreasing = cached.windows(2).all(|w| w[0].state.rate_bps >= w[1].state.rate_bps);
    let top_index = ladder.index_of(first.state.rate_bps).unwrap();
    let near_top = top_index + 1 >= ladder.len() - 1;
    let pass = first.state.n >= 2 && diverse_prefix && 2 * single > cached.len() && rates_nonincreasing && near_top;
    Outcome::new(
        pass,
        format!(
            "{} cached: top {diverse} with n>=2 (prefix {diverse_prefix}), {single} with n=1; rates nonincreasing {rates_nonincreasing}; top video n={} at {} Mbps",
            cached.len(),
            first.state.n,
            bps_to_mbps(first.state.rate_bps)
        ),
    )
}

fn qoe_and_hit_ratio_trends() -> Outcome {
    let ns = [1u32, 2, 3, 5, 6, 10];
    let cs = [1.0, 2.0];
    let mut objective = vec![vec![0.0; cs.len()]; ns.len()];
    let mut hit = vec![vec![0.0; cs.len()]; ns.len()];
    let mut mbs_only = f64::NAN;
    for (i, &n) in ns.iter().enumerate() {
        for (j, &c) in cs.iter().enumerate() {
            let exp = Experiment::from_config(&reduced_config(n, scaled_cache(c))).unwrap();
            let sol = solve_proposed(&exp).unwrap();
            objective[i][j] = sol.objective;
            hit[i][j] = hit_ratio_analytic(&sol, &exp.library);
            mbs_only = Strategy::MbsOnly.place(&exp).unwrap().objective;
        }
    }
    let mut problems = Vec::new();
    for j in 0..cs.len() {
        for i in 1..ns.len() {
            if objective[i][j] < objective[i - 1][j] {
                problems.push(format!("QoE drops from N={} to N={} at C={}", ns[i - 1], ns[i], cs[j]));
            }
        }
    }
    for i in 0..ns.len() {
        if objective[i][1] < objective[i][0] {
            problems.push(format!("QoE drops with C at N={}", ns[i]));
        }
    }
    let lowest = objective.iter().flatten().fold(f64::INFINITY, |a, &b| a.min(b));
    if mbs_only >= lowest {
        problems.push(format!("MBS-only {mbs_only} not below {lowest}"));
    }
    // equal total cache: (N, 2C) against (2N, C)
    let mut worst_gap = 0.0f64;
    for (a, b) in [(0, 1), (2, 4), (3, 5)] {
        let gap = (hit[a][1] - hit[b][0]).abs();
        worst_gap = worst_gap.max(gap);
        if gap > HIT_RATIO_TOL {
            problems.push(format!("hit ratio N={} C={} vs N={} C={}: gap {gap:.4}", ns[a], cs[1], ns[b], cs[0]));
        }
    }
    let summary = format!(
        "QoE {:.4}..{:.4} over N in {ns:?}, MBS-only {mbs_only:.4}; hit-ratio gap at equal total {worst_gap:.4} (tol {HIT_RATIO_TOL})",
        lowest,
        objective.iter().flatten().fold(f64::NEG_INFINITY, |a, &b| a.max(b)),
    );
    if problems.is_empty() {
        Outcome::new(true, summary)
    } else {
        Outcome::fail(format!("{summary}; {}", problems.join("; ")))
    }
}

fn baseline_comparison() -> Outcome {
    let start = Instant::now();
    let rates: Vec<u64> = [4.8, 7.2, 10.4].iter().map(|&r| mbps_to_bps(r)).collect();
    let mut strategies = vec![Strategy::Proposed];
    for &rate_bps in &rates {
        for kind in [BaselineKind::Dmp, BaselineKind::Mhr] {
            strategies.push(Strategy::Baseline(BaselineSpec { kind, rate_bps }));
        }
    }
    let snrs: Vec<f64> = (0..=14).map(f64::from).collect();
    let mut problems = Vec::new();
    // (MHR - DMP) objective per rate and SNR
    let mut advantage = vec![Vec::new(); rates.len()];
    let mut min_margin = f64::INFINITY;
    for &snr in &snrs {
        let mut cfg = reduced_config(3, 2.0 * TB);
        cfg.cluster.sbs_snr_db = snr;
        let exp = Experiment::from_config(&cfg).unwrap();
        let rows = evaluate_strategies(&exp, &strategies, SWEEP_TRIALS, 7).unwrap();
        let (_, prop_obj, prop_sim) = &rows[0];
        for (s, obj, sim) in &rows[1..] {
            min_margin = min_margin.min(prop_obj - obj);
            if prop_obj < obj {
                problems.push(format!("{s} objective above proposed at {snr} dB"));
            }
            let slack = SWEEP_SIGMAS * prop_sim.avg_qoe_se.hypot(sim.avg_qoe_se);
            if prop_sim.avg_qoe < sim.avg_qoe - slack {
                problems.push(format!("{s} simulated above proposed at {snr} dB"));
            }
        }
        for (k, pair) in rows[1..].chunks(2).enumerate() {
            advantage[k].push(pair[1].1 - pair[0].1);
        }
    }
    let crossovers: Vec<String> = rates
        .iter()
        .zip(&advantage)
        .filter_map(|(&r, adv)| {
            let switch = adv.iter().position(|&d| d > 0.0)?;
            let clean = switch > 0 && adv[..switch].iter().all(|&d| d < 0.0) && adv[switch..].iter().all(|&d| d > 0.0);
            clean.then(|| format!("{} Mbps between {} and {} dB", bps_to_mbps(r), snrs[switch - 1], snrs[switch]))
        })
        .collect();
    if crossovers.is_empty() {
        problems.push("no DMP/MHR crossover for any rate".into());
    }
    let elapsed = start.elapsed();
    if elapsed > SWEEP_BUDGET {
        problems.push(format!("took {:.0} s", elapsed.as_secs_f64()));
    }
    let summary = format!(
        "{} SNR points, min proposed margin {min_margin:.4}; crossover: {}",
        snrs.len(),
        if crossovers.is_empty() { "none".into() } else { crossovers.join(", ") }
    );
    if problems.is_empty() {
        Outcome::new(true, summary)
    } else {
        Outcome::fail(format!("{summary}; {}", problems.join("; ")))
    }
}

fn solve_and_simulate(dir: &Path, tag: &str, config: &Path) -> (Vec<u8>, Vec<u8>, Vec<u8>) {
    let solution = dir.join(format!("solution-{tag}.json"));
    let csv = dir.join(format!("solution-{tag}.csv"));
    let sim = dir.join(format!("sim-{tag}.json"));
    cmd_solve(config, &solution, Some(&csv), SolverOverrides::default()).unwrap();
    cmd_simulate(config, &solution, Some(50_000), Some(11), &sim).unwrap();
    let read = |p: &Path| std::fs::read(p).unwrap();
    (read(&solution), read(&csv), read(&sim))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    let cfg = reduced_config(3, scaled_cache(2.0));
    std::fs::write(&config, serde_json::to_string(&cfg).unwrap()).unwrap();
    let mut runs = Vec::new();
    for (tag, threads) in [("a", 1), ("b", 1), ("c", 4), ("d", 3)] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        runs.push(pool.install(|| solve_and_simulate(dir.path(), tag, &config)));
    }
    let identical = runs.windows(2).all(|w| w[0] == w[1]);
    Outcome::new(
        identical,
        format!("{} runs on 1, 1, 4 and 3 threads byte-identical: {identical}", runs.len()),
    )
}

/// Peak resident set size of this process, if the platform reports it.
fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

fn full_scale() -> Outcome {
    let start = Instant::now();
    let exp = Experiment::from_config(&ExperimentConfig::default()).unwrap();
    let relaxed = relaxed_solution(&exp);
    let staircase = verify_staircase(&relaxed, &exp.library);
    let packed = solve_proposed(&exp).unwrap();
    let shape = shape_check(&packed, &exp.ladder);
    let elapsed = start.elapsed();
    let rss = peak_rss_bytes();
    let memory_ok = rss.is_none_or(|b| b < FULL_MEMORY_BYTES);
    Outcome::new(
        staircase.is_ok() && shape.pass && elapsed < FULL_BUDGET && memory_ok,
        format!(
            "M=10000 N=3 C=2TB: staircase {}, {}; {:.0} s, peak RSS {}",
            if staircase.is_ok() { "ok" } else { "violated" },
            shape.detail,
            elapsed.as_secs_f64(),
            rss.map_or("unknown".into(), |b| format!("{} MB", b >> 20)),
        ),
    )
}
