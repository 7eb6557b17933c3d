use std::path::PathBuf;

use clap::Args;
use richardson_core::laplacian_jacobi_rho;
use richardson_core::runtime::{
    run_parallel_sync, run_repetitions, timing_curve, write_aggregate_csv, write_runs_csv,
    write_timing_csv, AggregateStats, AsyncConfig, PartitionMode, RunRecord, TimingPoint,
    YieldPolicy,
};
use richardson_core::sync::{first_order, second_order};
use richardson_core::{IterParams, SplittingSystem};

use crate::config::Settings;
use crate::error::{usage, CliResult};
use crate::problem::{create, laplace_system, output, resolve_params, sibling};
use crate::{OutFlag, ParamFlags, ProblemFlags};

const KEYS: &[&str] = &[
    "mode",
    "m",
    "threads",
    "reps",
    "target_updates",
    "alpha",
    "beta",
    "partition",
    "seed",
    "out",
    "sync_iterations",
    "t_values",
    "tests",
    "yield",
    "pin",
];

/// Residual-versus-time workloads (average updates per component) used when
/// `t_values` is not configured.
const DEFAULT_T_VALUES: &str = "25,50,100,200,300,400,500";

/// `table1` (first order, alpha 1), `table2` (optimal second order),
/// `table3` (alpha 1, beta 0.9) or `timing` (residual against wall time on
/// balanced and unbalanced partitions).
#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    mode: Option<String>,
    #[command(flatten)]
    problem: ProblemFlags,
    #[command(flatten)]
    params: ParamFlags,
    /// Thread counts, e.g. `1,2,4` or `1-20`.
    #[arg(long)]
    threads: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    target_updates: Option<u64>,
    /// `balanced` or `unbalanced:R`.
    #[arg(long)]
    partition: Option<String>,
    /// Iterations of the synchronous baseline (default: target updates).
    #[arg(long)]
    sync_iterations: Option<usize>,
    /// Workloads of the timing mode, e.g. `50,100,500`.
    #[arg(long)]
    t_values: Option<String>,
    /// Runs per workload in the timing mode.
    #[arg(long)]
    tests: Option<usize>,
    /// `auto`, `always` or `never`.
    #[arg(long = "yield")]
    yield_policy: Option<String>,
    /// Pin workers to cores.
    #[arg(long)]
    pin: bool,
    #[command(flatten)]
    out: OutFlag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Table1,
    Table2,
    Table3,
    Timing,
}

/// Everything an experiment needs, validated before the first run.
struct Plan {
    mode: Mode,
    m: usize,
    seed: u64,
    threads: Vec<usize>,
    params: IterParams,
    config: AsyncConfig,
    sync_iterations: usize,
    t_values: Vec<u64>,
    tests: usize,
    out: Option<PathBuf>,
}

fn plan(args: ExperimentArgs) -> CliResult<Plan> {
    let mut s = Settings::load(args.config.as_deref(), KEYS)?;
    s.set("mode", args.mode);
    s.set("m", args.problem.m);
    s.set("seed", args.problem.seed);
    s.set("alpha", args.params.alpha);
    s.set("beta", args.params.beta_setting());
    s.set("threads", args.threads);
    s.set("reps", args.reps);
    s.set("target_updates", args.target_updates);
    s.set("partition", args.partition);
    s.set("sync_iterations", args.sync_iterations);
    s.set("t_values", args.t_values);
    s.set("tests", args.tests);
    s.set("yield", args.yield_policy);
    if args.pin {
        s.set("pin", Some(true));
    }
    s.set("out", args.out.out.map(|p| p.display().to_string()));

    let mode = match s.raw("mode").unwrap_or("table1") {
        "table1" => Mode::Table1,
        "table2" => Mode::Table2,
        "table3" => Mode::Table3,
        "timing" => Mode::Timing,
        other => return Err(usage(format!("invalid value '{other}' for key 'mode'"))),
    };
    let (default_m, default_threads) = match mode {
        Mode::Timing => (300, "10"),
        _ => (100, "1,2,4,8,12,16,20"),
    };
    let m: usize = s.get_or("m", default_m)?;
    if m == 0 {
        return Err(usage("key 'm' must be positive"));
    }
    match mode {
        Mode::Table1 if s.raw("beta").is_none() => s.set("beta", Some("0")),
        Mode::Table3 if s.raw("beta").is_none() => s.set("beta", Some("0.9")),
        _ => {}
    }
    let default_beta = if mode == Mode::Table2 { "optimal" } else { "0" };
    let params = resolve_params(&s, laplacian_jacobi_rho(m), default_beta)?;

    let threads: Vec<usize> = match s.list("threads")? {
        Some(t) => t.into_iter().map(|p| p as usize).collect(),
        None => crate::config::parse_list(default_threads)
            .unwrap()
            .into_iter()
            .map(|p| p as usize)
            .collect(),
    };
    if threads.contains(&0) {
        return Err(usage("key 'threads' must list positive counts"));
    }
    let partition: PartitionMode = match s.raw("partition") {
        None => PartitionMode::Balanced,
        Some(p) => p
            .parse()
            .map_err(|e| usage(format!("invalid value for key 'partition': {e}")))?,
    };
    let yield_policy = match s.raw("yield").unwrap_or("auto") {
        "auto" => YieldPolicy::Auto,
        "always" => YieldPolicy::Always,
        "never" => YieldPolicy::Never,
        other => return Err(usage(format!("invalid value '{other}' for key 'yield'"))),
    };
    let target: u64 = s.get_or("target_updates", 500)?;
    let reps: usize = s.get_or("reps", 100)?;
    let seed: u64 = s.get_or("seed", 0)?;
    let config = AsyncConfig {
        num_threads: threads[0],
        partition_mode: partition,
        target_avg_updates: target,
        params: params.clone(),
        seed,
        repetitions: reps,
        yield_policy,
        pin_threads: s.flag("pin")?,
    };
    config
        .validate()
        .map_err(|e| usage(format!("invalid experiment configuration: {e}")))?;
    if threads.iter().any(|&p| p > m * m) {
        return Err(usage(format!("more threads than the {} unknowns", m * m)));
    }
    let t_values = s
        .list("t_values")?
        .unwrap_or_else(|| crate::config::parse_list(DEFAULT_T_VALUES).unwrap());
    if t_values.contains(&0) {
        return Err(usage("key 't_values' must list positive workloads"));
    }
    let tests: usize = s.get_or("tests", 20)?;
    if tests == 0 {
        return Err(usage("key 'tests' must be at least 1"));
    }
    Ok(Plan {
        mode,
        m,
        seed,
        threads,
        params,
        config,
        sync_iterations: s.get_or("sync_iterations", target as usize)?,
        t_values,
        tests,
        out: s.raw("out").map(PathBuf::from),
    })
}

pub fn run(args: ExperimentArgs) -> CliResult<()> {
    let plan = plan(args)?;
    let sys = laplace_system(plan.m, plan.seed)?;
    eprintln!(
        "{:?}: m = {}, alpha = {}, beta = {}, {} repetitions, {} updates per component",
        plan.mode,
        plan.m,
        plan.params.alpha,
        plan.params.beta,
        plan.config.repetitions,
        plan.config.target_avg_updates
    );
    match plan.mode {
        Mode::Timing => run_timing(&plan, &sys),
        _ => run_table(&plan, &sys),
    }
}

fn run_table(plan: &Plan, sys: &SplittingSystem) -> CliResult<()> {
    let x0 = vec![0.0; sys.dim()];
    let sync = if plan.params.beta == 0.0 {
        first_order(sys, &x0, &plan.params, plan.sync_iterations)?
    } else {
        second_order(sys, &x0, &plan.params, plan.sync_iterations)?
    };
    eprintln!(
        "synchronous: relative residual {:e} after {} iterations",
        sync.final_residual(),
        plan.sync_iterations
    );
    eprintln!("threads  avg_range  avg_rel_resid  failures  async_time  sync_time");

    let mut rows = Vec::with_capacity(plan.threads.len());
    let mut records = Vec::new();
    for &p in &plan.threads {
        let cfg = AsyncConfig {
            num_threads: p,
            ..plan.config.clone()
        };
        let runs = run_repetitions(sys, &cfg)?;
        let sync_run = run_parallel_sync(
            sys,
            &plan.params,
            p,
            cfg.partition_mode,
            plan.sync_iterations,
        )?;
        let mut agg = AggregateStats::from_runs(p, &runs);
        agg.sync_time = Some(sync_run.wall_time);
        eprintln!(
            "{p:7}  {:9.1}  {:13.6e}  {:8}  {:10.6}  {:9.6}",
            agg.avg_range, agg.avg_rel_resid, agg.failures, agg.avg_time, sync_run.wall_time
        );
        records.extend(
            runs.iter()
                .enumerate()
                .map(|(i, r)| RunRecord::from_stats(p, i, plan.seed, r)),
        );
        rows.push(agg);
    }
    write_aggregate_csv(&rows, output(plan.out.as_deref())?)?;
    if let Some(out) = &plan.out {
        let runs_path = sibling(out, "runs");
        write_runs_csv(&records, create(&runs_path)?)?;
        eprintln!("wrote {} and {}", out.display(), runs_path.display());
    }
    Ok(())
}

fn run_timing(plan: &Plan, sys: &SplittingSystem) -> CliResult<()> {
    let unbalanced = match plan.config.partition_mode {
        PartitionMode::Balanced => PartitionMode::Unbalanced(2.0 / 3.0),
        mode => mode,
    };
    let mut points = Vec::new();
    for &p in &plan.threads {
        for mode in [PartitionMode::Balanced, unbalanced] {
            let cfg = AsyncConfig {
                num_threads: p,
                partition_mode: mode,
                ..plan.config.clone()
            };
            points.extend(timing_curve(sys, &cfg, &plan.t_values, plan.tests)?);
        }
    }
    write_timing_csv(&points, output(plan.out.as_deref())?)?;

    eprintln!("threads  partition         t  mean_time  mean_rel_resid");
    for &p in &plan.threads {
        for &t in &plan.t_values {
            let mean = |partition: &str| {
                let sel: Vec<&TimingPoint> = points
                    .iter()
                    .filter(|q| q.threads == p && q.target_updates == t && q.partition == partition)
                    .collect();
                let n = sel.len() as f64;
                (
                    sel.iter().map(|q| q.wall_time).sum::<f64>() / n,
                    sel.iter().map(|q| q.rel_resid).sum::<f64>() / n,
                )
            };
            let bal = mean(&PartitionMode::Balanced.to_string());
            let unb = mean(&unbalanced.to_string());
            eprintln!(
                "{p:7}  {:<14}  {t:4}  {:9.6}  {:14.6e}",
                "balanced", bal.0, bal.1
            );
            eprintln!(
                "{p:7}  {:<14}  {t:4}  {:9.6}  {:14.6e}",
                unbalanced.to_string(),
                unb.0,
                unb.1
            );
            eprintln!(
                "         unbalanced/balanced: time x{:.3}, residual x{:.3}",
                unb.0 / bal.0,
                unb.1 / bal.1
            );
        }
    }
    Ok(())
}
