//! Multithreaded shared-memory asynchronous Richardson solvers.
//!
//! Each worker owns a contiguous block of unknowns and sweeps it repeatedly,
//! reading the other blocks from shared memory without any synchronization.
//! Component values live in `AtomicU64` cells holding `f64` bits and are
//! accessed with relaxed ordering, so reads are never torn but may be stale
//! by an arbitrary amount. Workers stop once a shared counter of component
//! updates, bumped once per local sweep, reaches `n * target_avg_updates`.
//!
//! First order updates in place, so a single worker performs exactly damped
//! Gauss-Seidel sweeps. Second order computes a whole block from the shared
//! state into a local buffer and then publishes it, writing `prev` before
//! `cur` for every component; a single worker therefore reproduces the
//! synchronous three-term recurrence bit for bit.

mod partition;
mod report;
mod shared;

use std::ops::Range;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Barrier;
use std::thread;
use std::time::Instant;

pub use partition::{partition_unknowns, Partition, PartitionMode};
pub use report::{
    read_aggregate_csv, read_runs_csv, validate_report, write_aggregate_csv, write_runs_csv,
    write_timing_csv, RunRecord, TimingPoint,
};

use crate::error::{Error, Result};
use crate::spectral::IterParams;
use crate::sync::{first_order_update, second_order_update};
use crate::system::SplittingSystem;
use shared::SharedVec;

/// When workers call `yield_now` between sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YieldPolicy {
    Never,
    Always,
    /// Yield only when there are more workers than hardware threads, so that
    /// oversubscribed workers interleave at sweep granularity instead of
    /// running whole scheduler time slices alone.
    Auto,
}

impl YieldPolicy {
    fn resolve(self, num_threads: usize) -> bool {
        match self {
            YieldPolicy::Never => false,
            YieldPolicy::Always => true,
            YieldPolicy::Auto => {
                let hw = thread::available_parallelism().map_or(1, |n| n.get());
                num_threads > hw
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct AsyncConfig {
    pub num_threads: usize,
    pub partition_mode: PartitionMode,
    pub target_avg_updates: u64,
    pub params: IterParams,
    /// Seed of the right-hand side, recorded with every run.
    pub seed: u64,
    pub repetitions: usize,
    pub yield_policy: YieldPolicy,
    /// Pin worker `t` to core `t mod cores` where the platform allows it.
    pub pin_threads: bool,
}

impl AsyncConfig {
    pub fn new(num_threads: usize, params: IterParams) -> Self {
        AsyncConfig {
            num_threads,
            partition_mode: PartitionMode::Balanced,
            target_avg_updates: 500,
            params,
            seed: 0,
            repetitions: 1,
            yield_policy: YieldPolicy::Auto,
            pin_threads: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_threads == 0 {
            return Err(Error::invalid("num_threads must be at least 1"));
        }
        if self.target_avg_updates == 0 {
            return Err(Error::invalid("target_avg_updates must be at least 1"));
        }
        if self.repetitions == 0 {
            return Err(Error::invalid("repetitions must be at least 1"));
        }
        self.partition_mode.validate()?;
        self.params.validate()
    }

    /// Second order unless `beta == 0`.
    pub fn is_second_order(&self) -> bool {
        self.params.beta != 0.0
    }
}

/// Outcome of one asynchronous run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    /// Updates applied to each component.
    pub update_counts: Vec<u64>,
    /// Local sweeps completed by each worker.
    pub thread_sweeps: Vec<u64>,
    pub range: u64,
    /// `|c - A x| / |c - A x^0|`; `+inf` when the final iterate is not finite.
    pub rel_resid: f64,
    pub failed: bool,
    /// Seconds from spawning the workers until all have stopped.
    pub wall_time: f64,
    pub final_x: Vec<f64>,
}

impl RunStats {
    pub fn total_updates(&self) -> u64 {
        self.update_counts.iter().sum()
    }

    pub fn min_updates(&self) -> u64 {
        self.update_counts.iter().copied().min().unwrap_or(0)
    }

    pub fn max_updates(&self) -> u64 {
        self.update_counts.iter().copied().max().unwrap_or(0)
    }
}

/// Averages over repeated runs, failed runs included.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateStats {
    pub threads: usize,
    pub runs: usize,
    pub avg_range: f64,
    pub avg_rel_resid: f64,
    pub failures: usize,
    pub avg_time: f64,
    /// Wall time of the synchronous method on the same thread count, if measured.
    pub sync_time: Option<f64>,
}

impl AggregateStats {
    pub fn from_runs(threads: usize, runs: &[RunStats]) -> Self {
        let records: Vec<RunRecord> = runs
            .iter()
            .enumerate()
            .map(|(i, r)| RunRecord::from_stats(threads, i, 0, r))
            .collect();
        Self::from_records(threads, &records)
    }

    pub fn from_records(threads: usize, runs: &[RunRecord]) -> Self {
        let count = runs.len() as f64;
        let mean = |f: &dyn Fn(&RunRecord) -> f64| runs.iter().map(f).sum::<f64>() / count;
        AggregateStats {
            threads,
            runs: runs.len(),
            avg_range: mean(&|r| r.range as f64),
            avg_rel_resid: mean(&|r| r.rel_resid),
            failures: runs.iter().filter(|r| r.failed).count(),
            avg_time: mean(&|r| r.wall_time),
            sync_time: None,
        }
    }
}

/// Runs the first- or second-order solver according to `config.params`.
pub fn run_async(sys: &SplittingSystem, config: &AsyncConfig) -> Result<RunStats> {
    if config.is_second_order() {
        run_async_second_order(sys, config)
    } else {
        run_async_first_order(sys, config)
    }
}

pub fn run_async_first_order(sys: &SplittingSystem, config: &AsyncConfig) -> Result<RunStats> {
    run_workers(sys, config, false)
}

pub fn run_async_second_order(sys: &SplittingSystem, config: &AsyncConfig) -> Result<RunStats> {
    if config.params.alpha_schedule.is_some() {
        return Err(Error::invalid("second order takes a single alpha"));
    }
    run_workers(sys, config, true)
}

/// `config.repetitions` independent runs from `x^0 = 0`.
pub fn run_repetitions(sys: &SplittingSystem, config: &AsyncConfig) -> Result<Vec<RunStats>> {
    config.validate()?;
    (0..config.repetitions)
        .map(|_| run_async(sys, config))
        .collect()
}

pub fn repeat_runs(sys: &SplittingSystem, config: &AsyncConfig) -> Result<AggregateStats> {
    let runs = run_repetitions(sys, config)?;
    Ok(AggregateStats::from_runs(config.num_threads, &runs))
}

fn run_workers(
    sys: &SplittingSystem,
    config: &AsyncConfig,
    second_order: bool,
) -> Result<RunStats> {
    config.validate()?;
    sys.require_unit_diagonal()?;
    let n = sys.dim();
    let partition = partition_unknowns(n, config.num_threads, config.partition_mode)?;
    let x0 = vec![0.0; n];
    let x = SharedVec::from_slice(&x0);
    let counter = AtomicU64::new(0);
    let goal = n as u64 * config.target_avg_updates;
    let yield_each = config.yield_policy.resolve(config.num_threads);
    let cores = pinning_cores(config.pin_threads);

    let start = Instant::now();
    let thread_sweeps: Vec<u64> = thread::scope(|s| {
        let handles: Vec<_> = partition
            .ranges
            .iter()
            .enumerate()
            .map(|(t, range)| {
                let worker = Worker {
                    sys,
                    x: &x,
                    counter: &counter,
                    goal,
                    range: range.clone(),
                    params: &config.params,
                    yield_each,
                };
                let core = cores.as_ref().map(|c| c[t % c.len()]);
                let x0 = &x0;
                s.spawn(move || {
                    if let Some(core) = core {
                        core_affinity::set_for_current(core);
                    }
                    if second_order {
                        worker.second_order(x0)
                    } else {
                        worker.first_order()
                    }
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let wall_time = start.elapsed().as_secs_f64();

    let final_x = x.to_vec();
    let rel_resid = relative_residual(sys, &final_x, &x0)?;
    let mut update_counts = vec![0; n];
    for (range, &sweeps) in partition.ranges.iter().zip(&thread_sweeps) {
        update_counts[range.clone()].fill(sweeps);
    }
    let range = update_counts.iter().max().unwrap() - update_counts.iter().min().unwrap();
    Ok(RunStats {
        update_counts,
        thread_sweeps,
        range,
        rel_resid,
        failed: rel_resid > 1.0,
        wall_time,
        final_x,
    })
}

fn pinning_cores(pin: bool) -> Option<Vec<core_affinity::CoreId>> {
    if !pin {
        return None;
    }
    core_affinity::get_core_ids().filter(|c| !c.is_empty())
}

fn relative_residual(sys: &SplittingSystem, x: &[f64], x0: &[f64]) -> Result<f64> {
    let r = sys.residual_norm(x)?;
    let r0 = sys.residual_norm(x0)?;
    let rel = if r0 > 0.0 { r / r0 } else { r };
    Ok(if rel.is_finite() { rel } else { f64::INFINITY })
}

struct Worker<'a> {
    sys: &'a SplittingSystem,
    x: &'a SharedVec,
    counter: &'a AtomicU64,
    goal: u64,
    range: Range<usize>,
    params: &'a IterParams,
    yield_each: bool,
}

impl Worker<'_> {
    /// Adds one sweep to the shared counter; true once the goal is reached.
    fn finish_sweep(&self) -> bool {
        let len = self.range.len() as u64;
        let total = self.counter.fetch_add(len, Ordering::Relaxed) + len;
        if total >= self.goal {
            return true;
        }
        if self.yield_each {
            thread::yield_now();
        }
        false
    }

    fn first_order(&self) -> u64 {
        let x = self.x;
        let mut sweeps = 0;
        loop {
            let alpha = self.params.alpha_at(sweeps as usize);
            for i in self.range.clone() {
                let r = self.sys.residual_at_by(i, |j| x.load(j));
                x.store(i, first_order_update(x.load(i), r, alpha));
            }
            sweeps += 1;
            if self.finish_sweep() {
                return sweeps;
            }
        }
    }

    fn second_order(&self, x0: &[f64]) -> u64 {
        let x = self.x;
        let (alpha, beta) = (self.params.alpha, self.params.beta);
        let lo = self.range.start;
        let mut prev = x0[self.range.clone()].to_vec();
        let mut next = vec![0.0; self.range.len()];
        let mut sweeps = 0;
        loop {
            for i in self.range.clone() {
                let r = self.sys.residual_at_by(i, |j| x.load(j));
                let cur = x.load(i);
                next[i - lo] = if sweeps == 0 {
                    first_order_update(cur, r, alpha)
                } else {
                    second_order_update(cur, prev[i - lo], r, alpha, beta)
                };
            }
            // Under oversubscription, yielding here lets every worker compute
            // from the same published generation, as on separate cores.
            // Yielding only after publishing would serialize the blocks into
            // a block Gauss-Seidel order.
            if self.yield_each {
                thread::yield_now();
            }
            for i in self.range.clone() {
                prev[i - lo] = x.load(i);
                x.store(i, next[i - lo]);
            }
            sweeps += 1;
            if self.finish_sweep() {
                return sweeps;
            }
        }
    }
}

/// Outcome of [`run_parallel_sync`].
#[derive(Debug, Clone, PartialEq)]
pub struct SyncRun {
    pub final_x: Vec<f64>,
    pub rel_resid: f64,
    pub wall_time: f64,
}

/// The synchronous iteration split over `num_threads` workers with a barrier
/// after every step; used for the synchronous timing column. Iterates are
/// bitwise those of the sequential solvers in [`crate::sync`].
pub fn run_parallel_sync(
    sys: &SplittingSystem,
    params: &IterParams,
    num_threads: usize,
    mode: PartitionMode,
    iterations: usize,
) -> Result<SyncRun> {
    params.validate()?;
    let n = sys.dim();
    let partition = partition_unknowns(n, num_threads, mode)?;
    let second_order = params.beta != 0.0;
    if second_order && params.alpha_schedule.is_some() {
        return Err(Error::invalid("second order takes a single alpha"));
    }
    let x0 = vec![0.0; n];
    let nbuf = if second_order { 3 } else { 2 };
    let bufs: Vec<SharedVec> = (0..nbuf).map(|_| SharedVec::from_slice(&x0)).collect();
    let barrier = Barrier::new(num_threads);

    let start = Instant::now();
    thread::scope(|s| {
        for range in &partition.ranges {
            let (bufs, barrier) = (&bufs, &barrier);
            s.spawn(move || {
                for k in 0..iterations {
                    let cur = &bufs[k % nbuf];
                    let out = &bufs[(k + 1) % nbuf];
                    let prev = &bufs[(k + nbuf - 1) % nbuf];
                    let alpha = params.alpha_at(k);
                    for i in range.clone() {
                        let r = sys.residual_at_by(i, |j| cur.load(j));
                        let v = if second_order && k > 0 {
                            second_order_update(cur.load(i), prev.load(i), r, alpha, params.beta)
                        } else {
                            first_order_update(cur.load(i), r, alpha)
                        };
                        out.store(i, v);
                    }
                    barrier.wait();
                }
            });
        }
    });
    let wall_time = start.elapsed().as_secs_f64();
    let final_x = bufs[iterations % nbuf].to_vec();
    let rel_resid = relative_residual(sys, &final_x, &x0)?;
    Ok(SyncRun {
        final_x,
        rel_resid,
        wall_time,
    })
}

/// Wall time and residual for each workload size `t` (average updates per
/// component), repeated `tests` times.
pub fn timing_curve(
    sys: &SplittingSystem,
    config: &AsyncConfig,
    t_values: &[u64],
    tests: usize,
) -> Result<Vec<TimingPoint>> {
    let mut points = Vec::with_capacity(t_values.len() * tests);
    for &t in t_values {
        let cfg = AsyncConfig {
            target_avg_updates: t,
            ..config.clone()
        };
        for test in 0..tests {
            let run = run_async(sys, &cfg)?;
            points.push(TimingPoint {
                threads: cfg.num_threads,
                partition: cfg.partition_mode.to_string(),
                target_updates: t,
                test,
                wall_time: run.wall_time,
                rel_resid: run.rel_resid,
            });
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::laplacian_2d;
    use crate::sync::{damped_gauss_seidel, first_order, second_order};
    use crate::system::{jacobi_split, uniform_rhs};

    fn laplace(m: usize) -> SplittingSystem {
        jacobi_split(&laplacian_2d(m).unwrap(), &uniform_rhs(m * m, 11)).unwrap()
    }

    fn config(p: usize, params: IterParams, target: u64) -> AsyncConfig {
        AsyncConfig {
            target_avg_updates: target,
            ..AsyncConfig::new(p, params)
        }
    }

    #[test]
    fn single_thread_first_order_is_gauss_seidel() {
        let sys = laplace(8);
        for alpha in [1.0, 0.8] {
            let run = run_async_first_order(&sys, &config(1, IterParams::first_order(alpha), 40))
                .unwrap();
            let gs = damped_gauss_seidel(&sys, &[0.0; 64], alpha, 40).unwrap();
            assert_eq!(run.final_x, gs.final_x);
            assert_eq!(run.rel_resid, gs.final_residual());
            assert_eq!(run.range, 0);
            assert_eq!(run.total_updates(), 64 * 40);
        }
    }

    #[test]
    fn single_thread_second_order_is_synchronous() {
        let sys = laplace(8);
        let params = IterParams::second_order(1.0, 0.5);
        let run = run_async_second_order(&sys, &config(1, params.clone(), 30)).unwrap();
        let sync = second_order(&sys, &[0.0; 64], &params, 30).unwrap();
        assert_eq!(run.final_x, sync.final_x);
    }

    #[test]
    fn termination_bounds() {
        let sys = laplace(10);
        let cfg = config(4, IterParams::first_order(1.0), 50);
        let part = partition_unknowns(100, 4, PartitionMode::Balanced).unwrap();
        let run = run_async(&sys, &cfg).unwrap();
        let total = run.total_updates();
        assert!(total >= 100 * 50);
        assert!(total <= 100 * 50 + 4 * part.max_block() as u64);
        assert_eq!(run.range, run.max_updates() - run.min_updates());
        assert_eq!(run.failed, run.rel_resid > 1.0);
    }

    #[test]
    fn parallel_sync_matches_sequential() {
        let sys = laplace(7);
        let first = IterParams::first_order(0.9);
        let a = run_parallel_sync(&sys, &first, 3, PartitionMode::Balanced, 25).unwrap();
        let b = first_order(&sys, &[0.0; 49], &first, 25).unwrap();
        assert_eq!(a.final_x, b.final_x);

        let second = IterParams::second_order(1.0, 0.4);
        let a = run_parallel_sync(&sys, &second, 4, PartitionMode::Unbalanced(0.5), 25).unwrap();
        let b = second_order(&sys, &[0.0; 49], &second, 25).unwrap();
        assert_eq!(a.final_x, b.final_x);
    }

    #[test]
    fn aggregate_counts_failures() {
        let mk = |range, rel_resid: f64| RunStats {
            update_counts: vec![],
            thread_sweeps: vec![],
            range,
            rel_resid,
            failed: rel_resid > 1.0,
            wall_time: 1.0,
            final_x: vec![],
        };
        let agg = AggregateStats::from_runs(2, &[mk(2, 0.5), mk(4, 3.5)]);
        assert_eq!(agg.failures, 1);
        assert_eq!(agg.avg_range, 3.0);
        assert_eq!(agg.avg_rel_resid, 2.0);
        assert_eq!(agg.runs, 2);
    }

    #[test]
    fn config_validation() {
        let mut cfg = AsyncConfig::new(1, IterParams::first_order(1.0));
        assert!(cfg.validate().is_ok());
        cfg.repetitions = 0;
        assert!(cfg.validate().is_err());
        cfg.repetitions = 1;
        cfg.target_avg_updates = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn non_unit_diagonal_is_rejected() {
        let sys = SplittingSystem::new(laplacian_2d(3).unwrap(), vec![1.0; 9]).unwrap();
        assert!(run_async(&sys, &AsyncConfig::new(1, IterParams::first_order(1.0))).is_err());
    }
}
