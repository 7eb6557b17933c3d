use std::path::PathBuf;

use clap::Args;
use richardson_core::mtx::load_matrix_market;
use richardson_core::spectral::{
    async_condition_holds, beta_upper_bound, error_bound_factor, optimal_first_order_alpha,
    optimal_second_order, power_iteration_radius, second_order_async_radius,
    second_order_sync_radius, AbsOperator, IterParams, SpectrumBounds, DEFAULT_SPECTRUM_SAMPLES,
};
use richardson_core::{jacobi_split, laplacian_2d, laplacian_jacobi_rho, Error};

use crate::error::{usage, CliError, CliResult};
use crate::ParamFlags;

#[derive(Debug, Args)]
pub struct SpectraArgs {
    /// Jacobi-split m x m five-point Laplacian.
    #[arg(long, conflicts_with_all = ["mtx", "rho"])]
    m: Option<usize>,
    /// Matrix Market file with the unpreconditioned matrix.
    #[arg(long, conflicts_with = "rho")]
    mtx: Option<PathBuf>,
    /// Report for a given rho(T) without a matrix.
    #[arg(long)]
    rho: Option<f64>,
    #[command(flatten)]
    params: ParamFlags,
    /// Relative-change tolerance of the power iteration.
    #[arg(long, default_value_t = 1e-12)]
    power_tol: f64,
    /// Steps for the error bound factor.
    #[arg(long, default_value_t = 500)]
    bound_steps: usize,
}

pub fn run(args: SpectraArgs) -> CliResult<()> {
    let rho = match (&args.m, &args.mtx, args.rho) {
        (_, _, Some(rho)) => rho,
        (&Some(m), _, _) => {
            let sys = jacobi_split(&laplacian_2d(m)?, &vec![0.0; m * m])?;
            println!("n = {}", m * m);
            println!("rho_exact = {}", laplacian_jacobi_rho(m));
            measured_rho(&sys, args.power_tol)?
        }
        (None, Some(path), _) => {
            let a = load_matrix_market(path).map_err(|e| match e {
                Error::Io(io) => CliError::Io(format!("{}: {io}", path.display())),
                e => e.into(),
            })?;
            if !a.is_square() {
                return Err(usage(format!("{} is not square", path.display())));
            }
            let sys = jacobi_split(&a, &vec![0.0; a.nrows()])?;
            println!("n = {}", a.nrows());
            measured_rho(&sys, args.power_tol)?
        }
        (None, None, None) => return Err(usage("one of --m, --mtx or --rho is required")),
    };
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Assumption(format!("rho(T) = {rho}; rho(T) < 1 required")).into());
    }

    let bounds = SpectrumBounds::from_rho(rho)?;
    let opt = optimal_second_order(bounds);
    println!("rho = {rho}");
    println!("a = {}", bounds.a());
    println!("b = {}", bounds.b());
    println!("alpha_first_order = {}", optimal_first_order_alpha(bounds));
    println!("alpha_opt = {}", opt.alpha);
    println!("beta_opt = {}", opt.beta);
    println!("q = {}", opt.q);
    println!(
        "bound_factor_{} = {:e}",
        args.bound_steps,
        error_bound_factor(opt.q, args.bound_steps)
    );
    let alpha = args.params.alpha.unwrap_or(1.0);
    match beta_upper_bound(alpha, rho)? {
        Some(b) => println!("async_beta_upper_bound = {b}  (alpha = {alpha})"),
        None => println!("async_beta_upper_bound = none  (alpha = {alpha})"),
    }

    if args.params.alpha.is_some() || args.params.beta.is_some() || args.params.optimal_beta {
        let params = if args.params.optimal_beta {
            IterParams::second_order(args.params.alpha.unwrap_or(opt.alpha), opt.beta)
        } else {
            IterParams::second_order(alpha, args.params.beta.unwrap_or(0.0))
        };
        params.validate()?;
        let holds = async_condition_holds(&params, rho);
        println!("params = alpha {} beta {}", params.alpha, params.beta);
        println!(
            "sync_radius = {}",
            second_order_sync_radius(&params, bounds, DEFAULT_SPECTRUM_SAMPLES)?
        );
        if params.alpha > 0.0 {
            println!(
                "async_radius = {}",
                second_order_async_radius(&params, rho)?
            );
        }
        println!(
            "async_condition = {}",
            if holds { "holds" } else { "violated" }
        );
    }
    Ok(())
}

/// Power-iteration rho(|T|) after checking T >= 0.
fn measured_rho(sys: &richardson_core::SplittingSystem, tol: f64) -> CliResult<f64> {
    sys.require_nonnegative_splitting()?;
    let t = AbsOperator::first_order(sys.matrix(), 1.0)?;
    let n = sys.dim();
    let est = power_iteration_radius(&t, tol, 100 * n + 10_000);
    println!("rho_power = {}", est.value);
    println!("power_iterations = {}", est.iterations);
    if !est.converged {
        eprintln!("warning: power iteration did not reach tolerance {tol}");
    }
    Ok(est.value)
}
