use std::path::PathBuf;

use clap::Args;
use richardson_core::laplacian_jacobi_rho;
use richardson_core::sim::{
    asynchrony_sweep, divergence_frequency, simulate_first_order, simulate_second_order,
    write_realization, write_sweep_csv, Schedule, SimOptions, SweepSettings,
};

use crate::config::Settings;
use crate::error::{usage, CliResult};
use crate::problem::{create, laplace_system, output, resolve_params};
use crate::{OutFlag, ParamFlags, ProblemFlags};

const KEYS: &[&str] = &[
    "m",
    "seed",
    "alpha",
    "beta",
    "order",
    "schedule",
    "max_delay",
    "update_prob",
    "schedule_seed",
    "delays",
    "seeds",
    "horizon",
    "stride",
    "stop_below",
    "out",
    "dump_schedule",
];

/// A single trace for `schedule`, or a sweep table when `delays` is set.
#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// `key = value` file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    problem: ProblemFlags,
    #[command(flatten)]
    params: ParamFlags,
    /// `first` or `second` (default: second when beta is nonzero).
    #[arg(long)]
    order: Option<String>,
    /// `synchronous`, `cyclic` or `bounded`.
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    max_delay: Option<usize>,
    #[arg(long)]
    update_prob: Option<f64>,
    #[arg(long)]
    schedule_seed: Option<u64>,
    /// Delay bounds of a sweep, e.g. `0,20,200`.
    #[arg(long)]
    delays: Option<String>,
    /// Schedule seeds of a sweep, e.g. `0-9`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    stop_below: Option<f64>,
    /// Write the schedule realization as `k;J_k;delays` lines.
    #[arg(long)]
    dump_schedule: Option<PathBuf>,
    #[command(flatten)]
    out: OutFlag,
}

pub fn run(args: SimulateArgs) -> CliResult<()> {
    let mut s = Settings::load(args.config.as_deref(), KEYS)?;
    s.set("m", args.problem.m);
    s.set("seed", args.problem.seed);
    s.set("alpha", args.params.alpha);
    s.set("beta", args.params.beta_setting());
    s.set("order", args.order);
    s.set("schedule", args.schedule);
    s.set("max_delay", args.max_delay);
    s.set("update_prob", args.update_prob);
    s.set("schedule_seed", args.schedule_seed);
    s.set("delays", args.delays);
    s.set("seeds", args.seeds);
    s.set("horizon", args.horizon);
    s.set("stride", args.stride);
    s.set("stop_below", args.stop_below);
    s.set(
        "dump_schedule",
        args.dump_schedule.map(|p| p.display().to_string()),
    );
    s.set("out", args.out.out.map(|p| p.display().to_string()));

    let m: usize = s.get("m")?.ok_or_else(|| usage("key 'm' is required"))?;
    let params = resolve_params(&s, laplacian_jacobi_rho(m), "0")?;
    let second = match s.raw("order") {
        None => params.beta != 0.0,
        Some("first") => false,
        Some("second") => true,
        Some(o) => return Err(usage(format!("invalid value '{o}' for key 'order'"))),
    };
    let horizon: usize = s.get_or("horizon", 1000)?;
    let stride: usize = s.get_or("stride", if horizon <= 1000 { 1 } else { 10 })?;
    if stride == 0 {
        return Err(usage("key 'stride' must be at least 1"));
    }
    let update_prob: f64 = s.get_or("update_prob", 0.5)?;
    let options = SimOptions {
        stride,
        stop_below: s.get("stop_below")?,
        ..SimOptions::default()
    };
    let delays = s.list("delays")?;
    let seeds = s.list("seeds")?.unwrap_or_else(|| (0..10).collect());
    let schedule_kind = s.raw("schedule").unwrap_or("synchronous").to_string();
    let max_delay: usize = s.get_or("max_delay", 20)?;
    let schedule_seed: u64 = s.get_or("schedule_seed", 0)?;
    let out: Option<PathBuf> = s.raw("out").map(PathBuf::from);
    let dump: Option<PathBuf> = s.raw("dump_schedule").map(PathBuf::from);
    let sys = laplace_system(m, s.get_or("seed", 0)?)?;

    if let Some(delays) = delays {
        if !second {
            return Err(usage(
                "delay sweeps run the second-order simulation; set a nonzero beta",
            ));
        }
        let delays: Vec<usize> = delays.into_iter().map(|d| d as usize).collect();
        let settings = SweepSettings {
            update_prob,
            horizon,
            options,
        };
        let rows = asynchrony_sweep(&sys, &params, &delays, &seeds, &settings)?;
        write_sweep_csv(&rows, output(out.as_deref())?)?;
        for (b, diverged, runs) in divergence_frequency(&rows) {
            eprintln!("B = {b}: {diverged} of {runs} runs diverged");
        }
        return Ok(());
    }

    let schedule = match schedule_kind.as_str() {
        "synchronous" => Schedule::synchronous(horizon),
        "cyclic" => Schedule::cyclic(horizon),
        "bounded" => Schedule::bounded_random(max_delay, update_prob, schedule_seed, horizon),
        other => return Err(usage(format!("invalid value '{other}' for key 'schedule'"))),
    };
    if let Some(path) = dump {
        let dim = if second { 2 * sys.dim() } else { sys.dim() };
        let instants: Vec<_> = schedule.instants(dim)?.collect();
        write_realization(&instants, create(&path)?)?;
    }
    let trace = if second {
        simulate_second_order(&sys, &params, &schedule, &options)?
    } else {
        simulate_first_order(&sys, &params, &schedule, &options)?
    };
    trace.write_csv(output(out.as_deref())?)?;
    eprintln!(
        "{} instants, relative residual {:e}{}",
        trace.instants,
        trace.final_residual(),
        if trace.diverged { ", diverged" } else { "" }
    );
    Ok(())
}
