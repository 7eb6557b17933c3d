use clap::{Args, ValueEnum};
use richardson_core::laplacian_jacobi_rho;
use richardson_core::sync::SyncSolver;

use crate::config::Settings;
use crate::error::{usage, CliResult};
use crate::problem::{laplace_system, output, resolve_params};
use crate::{OutFlag, ParamFlags, ProblemFlags};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    /// `x <- x + r`.
    Jacobi,
    First,
    Second,
    /// In-place sweeps, damped by alpha.
    Gs,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    problem: ProblemFlags,
    #[command(flatten)]
    params: ParamFlags,
    /// Defaults to `second` when a beta is given, `first` otherwise.
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[arg(long, default_value_t = 500)]
    iterations: usize,
    /// Record every `stride` iterations (default 1 up to 1000 iterations, else 10).
    #[arg(long)]
    stride: Option<usize>,
    #[command(flatten)]
    out: OutFlag,
}

pub fn run(args: SolveArgs) -> CliResult<()> {
    let m = args.problem.m.ok_or_else(|| usage("--m is required"))?;
    let sys = laplace_system(m, args.problem.seed.unwrap_or(0))?;
    let mut settings = Settings::default();
    settings.set("alpha", args.params.alpha);
    settings.set("beta", args.params.beta_setting());
    let params = resolve_params(&settings, laplacian_jacobi_rho(m), "0")?;
    let method = args.method.unwrap_or(if params.beta != 0.0 {
        Method::Second
    } else {
        Method::First
    });

    let mut solver = SyncSolver::new(&sys);
    if let Some(s) = args.stride {
        solver = solver.stride(s);
    }
    let x0 = vec![0.0; sys.dim()];
    let trace = match method {
        Method::Jacobi => solver.standard(&x0, args.iterations)?,
        Method::First => solver.first_order(&x0, &params, args.iterations)?,
        Method::Second => solver.second_order(&x0, &params, args.iterations)?,
        Method::Gs => solver.damped_gauss_seidel(&x0, params.alpha, args.iterations)?,
    };
    trace.write_csv(output(args.out.out.as_deref())?)?;
    eprintln!(
        "{method:?} alpha {} beta {}: relative residual {:e} after {} iterations",
        params.alpha,
        params.beta,
        trace.final_residual(),
        trace.iterations
    );
    Ok(())
}
