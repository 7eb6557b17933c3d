//! Deterministic single-threaded realization of the asynchronous iteration
//! model: at instant `k` the components in `J_k` are recomputed from
//! `x_j^{s_j(k)}` with `s_j(k) = k - 1 - d_j(k)`, all others are carried
//! over.
//!
//! Second order runs the same model on the doubled state `(x, x_prev)`. The
//! first update of each `x` component applies the first-order start rule, so
//! a synchronous schedule reproduces [`crate::sync::second_order`] exactly.

mod schedule;

use std::io::Write;

pub use schedule::{
    read_realization, validate_realization, write_realization, Delays, Instant, Realization,
    Schedule, ScheduleKind,
};

use crate::error::{Error, Result};
use crate::spectral::IterParams;
use crate::sync::{first_order_update, second_order_update};
use crate::system::SplittingSystem;

pub const DEFAULT_DIVERGENCE_CAP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Sample the residual every `stride` instants (and at the last one).
    pub stride: usize,
    /// Relative residual above which a run counts as diverged and stops.
    pub divergence_cap: f64,
    /// Stop early once a sampled relative residual falls below this.
    pub stop_below: Option<f64>,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            stride: 1,
            divergence_cap: DEFAULT_DIVERGENCE_CAP,
            stop_below: None,
        }
    }
}

impl SimOptions {
    pub fn with_stride(stride: usize) -> Self {
        SimOptions {
            stride: stride.max(1),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    /// Instants at which the residual was sampled, starting with 0.
    pub steps: Vec<usize>,
    /// Relative residual norms at `steps`.
    pub residual_norms: Vec<f64>,
    pub diverged: bool,
    /// Instants actually simulated.
    pub instants: usize,
    /// Final `x` (the current block for second order).
    pub final_x: Vec<f64>,
    /// Updates applied to each simulated component.
    pub update_counts: Vec<u64>,
}

impl SimTrace {
    pub fn final_residual(&self) -> f64 {
        *self.residual_norms.last().unwrap()
    }

    /// Difference between the most and least updated components.
    pub fn range(&self) -> u64 {
        let max = self.update_counts.iter().max().copied().unwrap_or(0);
        let min = self.update_counts.iter().min().copied().unwrap_or(0);
        max - min
    }

    /// CSV `k,rel_resid`, the layout of [`crate::sync::IterationTrace::write_csv`].
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "rel_resid"])?;
        for (k, r) in self.steps.iter().zip(&self.residual_norms) {
            w.write_record([k.to_string(), format!("{r:e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn simulate_first_order(
    sys: &SplittingSystem,
    params: &IterParams,
    schedule: &Schedule,
    options: &SimOptions,
) -> Result<SimTrace> {
    let instants = schedule.instants(sys.dim())?;
    replay_first_order(sys, params, instants, schedule.max_delay(), options)
}

pub fn simulate_second_order(
    sys: &SplittingSystem,
    params: &IterParams,
    schedule: &Schedule,
    options: &SimOptions,
) -> Result<SimTrace> {
    let instants = schedule.instants(2 * sys.dim())?;
    replay_second_order(sys, params, instants, schedule.max_delay(), options)
}

/// Runs first order along an explicit realization, for example one read
/// back from a dump. Delays beyond `max_delay` are an error.
pub fn replay_first_order<I: IntoIterator<Item = Instant>>(
    sys: &SplittingSystem,
    params: &IterParams,
    instants: I,
    max_delay: usize,
    options: &SimOptions,
) -> Result<SimTrace> {
    params.validate()?;
    let n = sys.dim();
    let mut engine = Engine::new(sys, n, max_delay, options)?;
    for inst in instants {
        let alpha = params.alpha_at(inst.k - 1);
        let done = engine.step(&inst, |_, i, read| {
            let r = sys.residual_at_by(i, read);
            first_order_update(read(i), r, alpha)
        })?;
        if done {
            break;
        }
    }
    Ok(engine.finish())
}

/// Second-order counterpart of [`replay_first_order`] on `2n` components:
/// `0..n` hold `x`, `n..2n` hold `x_prev`.
pub fn replay_second_order<I: IntoIterator<Item = Instant>>(
    sys: &SplittingSystem,
    params: &IterParams,
    instants: I,
    max_delay: usize,
    options: &SimOptions,
) -> Result<SimTrace> {
    params.validate()?;
    if params.alpha_schedule.is_some() {
        return Err(Error::invalid("second order takes a single alpha"));
    }
    let (alpha, beta) = (params.alpha, params.beta);
    let n = sys.dim();
    let mut engine = Engine::new(sys, 2 * n, max_delay, options)?;
    for inst in instants {
        let done = engine.step(&inst, |counts, i, read| {
            if i >= n {
                return read(i - n);
            }
            let r = sys.residual_at_by(i, read);
            if counts[i] == 0 {
                first_order_update(read(i), r, alpha)
            } else {
                second_order_update(read(i), read(n + i), r, alpha, beta)
            }
        })?;
        if done {
            break;
        }
    }
    Ok(engine.finish())
}

/// Ring of the last `max_delay + 1` iterates plus residual sampling.
struct Engine<'a> {
    sys: &'a SplittingSystem,
    options: SimOptions,
    history: Vec<Vec<f64>>,
    k: usize,
    pending: Vec<(usize, f64)>,
    update_counts: Vec<u64>,
    scale: f64,
    steps: Vec<usize>,
    residual_norms: Vec<f64>,
    diverged: bool,
}

impl<'a> Engine<'a> {
    fn new(
        sys: &'a SplittingSystem,
        dim: usize,
        max_delay: usize,
        options: &SimOptions,
    ) -> Result<Self> {
        if options.stride == 0 {
            return Err(Error::invalid("stride must be at least 1"));
        }
        let x0 = vec![0.0; dim];
        let r0 = sys.residual_norm(&x0[..sys.dim()])?;
        Ok(Engine {
            sys,
            options: *options,
            history: vec![x0; max_delay + 1],
            k: 0,
            pending: Vec::new(),
            update_counts: vec![0; dim],
            scale: if r0 > 0.0 { r0 } else { 1.0 },
            steps: vec![0],
            residual_norms: vec![1.0],
            diverged: false,
        })
    }

    fn slot(&self, k: usize) -> usize {
        k % self.history.len()
    }

    /// Applies one instant; true when the run should stop.
    fn step<F>(&mut self, inst: &Instant, mut update: F) -> Result<bool>
    where
        F: FnMut(&[u64], usize, &dyn Fn(usize) -> f64) -> f64,
    {
        let k = self.k + 1;
        if inst.k != k {
            return Err(Error::Schedule(format!(
                "expected instant {k}, got {}",
                inst.k
            )));
        }
        let depth = self.history.len();
        let dim = self.update_counts.len();
        if let Delays::PerSource(d) = &inst.delays {
            if d.len() != dim {
                return Err(Error::Schedule(format!(
                    "instant {k}: {} delays for {dim} components",
                    d.len()
                )));
            }
            if let Some(j) = d.iter().position(|&dj| dj >= depth || dj > k - 1) {
                return Err(Error::Schedule(format!(
                    "instant {k}: delay {} of component {j} is beyond the stored history",
                    d[j]
                )));
            }
        }
        if inst.updates.iter().any(|&i| i >= dim) {
            return Err(Error::Schedule(format!(
                "instant {k}: component out of range"
            )));
        }

        self.pending.clear();
        {
            let history = &self.history;
            let delays = &inst.delays;
            let read = |j: usize| history[(k - 1 - delays.get(j)) % depth][j];
            for &i in &inst.updates {
                self.pending
                    .push((i, update(&self.update_counts, i, &read)));
            }
        }
        let (prev, cur) = (self.slot(k - 1), self.slot(k));
        if prev != cur {
            let (src, dst) = two_mut(&mut self.history, prev, cur);
            dst.copy_from_slice(src);
        }
        let x = &mut self.history[cur];
        for &(i, v) in &self.pending {
            x[i] = v;
            self.update_counts[i] += 1;
        }
        self.k = k;
        Ok(self.sample(false))
    }

    fn sample(&mut self, last: bool) -> bool {
        if !self.k.is_multiple_of(self.options.stride) && !last {
            return false;
        }
        if self.steps.last() == Some(&self.k) {
            return false;
        }
        let n = self.sys.dim();
        let x = &self.history[self.slot(self.k)][..n];
        let r = self.sys.residual_norm(x).expect("length checked") / self.scale;
        self.steps.push(self.k);
        self.residual_norms.push(r);
        if !(r <= self.options.divergence_cap) {
            self.diverged = true;
            return true;
        }
        self.options.stop_below.is_some_and(|t| r < t)
    }

    fn finish(mut self) -> SimTrace {
        self.sample(true);
        let n = self.sys.dim();
        SimTrace {
            final_x: self.history[self.slot(self.k)][..n].to_vec(),
            steps: self.steps,
            residual_norms: self.residual_norms,
            diverged: self.diverged,
            instants: self.k,
            update_counts: self.update_counts,
        }
    }
}

fn two_mut(v: &mut [Vec<f64>], a: usize, b: usize) -> (&Vec<f64>, &mut Vec<f64>) {
    if a < b {
        let (lo, hi) = v.split_at_mut(b);
        (&lo[a], &mut hi[0])
    } else {
        let (lo, hi) = v.split_at_mut(a);
        (&hi[0], &mut lo[b])
    }
}

/// One cell of an asynchrony sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub max_delay: usize,
    pub seed: u64,
    pub final_resid: f64,
    pub diverged: bool,
    pub instants: usize,
    /// Observed range of per-component update counts.
    pub range: u64,
}

/// Settings shared by every cell of [`asynchrony_sweep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSettings {
    pub update_prob: f64,
    pub horizon: usize,
    pub options: SimOptions,
}

/// Second-order simulation over every `(B, seed)` pair; `B = 0` is the
/// synchronous schedule.
pub fn asynchrony_sweep(
    sys: &SplittingSystem,
    params: &IterParams,
    max_delays: &[usize],
    seeds: &[u64],
    settings: &SweepSettings,
) -> Result<Vec<SweepRow>> {
    if max_delays.is_empty() {
        return Err(Error::invalid("no delay bounds given"));
    }
    let mut rows = Vec::with_capacity(max_delays.len() * seeds.len());
    for &b in max_delays {
        for &seed in seeds {
            let schedule = if b == 0 {
                Schedule::synchronous(settings.horizon)
            } else {
                Schedule::bounded_random(b, settings.update_prob, seed, settings.horizon)
            };
            let trace = simulate_second_order(sys, params, &schedule, &settings.options)?;
            rows.push(SweepRow {
                max_delay: b,
                seed,
                final_resid: trace.final_residual(),
                diverged: trace.diverged,
                instants: trace.instants,
                range: trace.range(),
            });
        }
    }
    Ok(rows)
}

/// `(B, diverged runs, runs)` per delay bound, in order of first appearance.
pub fn divergence_frequency(rows: &[SweepRow]) -> Vec<(usize, usize, usize)> {
    let mut out: Vec<(usize, usize, usize)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|e| e.0 == r.max_delay) {
            Some(e) => {
                e.1 += usize::from(r.diverged);
                e.2 += 1;
            }
            None => out.push((r.max_delay, usize::from(r.diverged), 1)),
        }
    }
    out
}

/// CSV `max_delay,seed,final_resid,diverged,instants,range`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "max_delay",
        "seed",
        "final_resid",
        "diverged",
        "instants",
        "range",
    ])?;
    for r in rows {
        w.write_record([
            r.max_delay.to_string(),
            r.seed.to_string(),
            format!("{:e}", r.final_resid),
            u8::from(r.diverged).to_string(),
            r.instants.to_string(),
            r.range.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::laplacian_2d;
    use crate::sync::{first_order, gauss_seidel, second_order};
    use crate::system::{jacobi_split, uniform_rhs};

    fn laplace(m: usize) -> SplittingSystem {
        jacobi_split(&laplacian_2d(m).unwrap(), &uniform_rhs(m * m, 5)).unwrap()
    }

    #[test]
    fn synchronous_matches_sync_first_order() {
        let sys = laplace(6);
        let params = IterParams::first_order(0.9);
        let sim = simulate_first_order(
            &sys,
            &params,
            &Schedule::synchronous(40),
            &SimOptions::default(),
        )
        .unwrap();
        let sync = first_order(&sys, &[0.0; 36], &params, 40).unwrap();
        assert_eq!(sim.residual_norms, sync.residual_norms);
        assert_eq!(sim.final_x, sync.final_x);
        assert!(!sim.diverged);
    }

    #[test]
    fn synchronous_matches_sync_second_order() {
        let sys = laplace(6);
        let params = IterParams::second_order(1.0, 0.6);
        let sim = simulate_second_order(
            &sys,
            &params,
            &Schedule::synchronous(40),
            &SimOptions::default(),
        )
        .unwrap();
        let sync = second_order(&sys, &[0.0; 36], &params, 40).unwrap();
        assert_eq!(sim.residual_norms, sync.residual_norms);
        assert_eq!(sim.final_x, sync.final_x);
    }

    #[test]
    fn cyclic_sweep_is_gauss_seidel() {
        let sys = laplace(5);
        let params = IterParams::first_order(1.0);
        let sim = simulate_first_order(
            &sys,
            &params,
            &Schedule::cyclic(3 * 25),
            &SimOptions::with_stride(25),
        )
        .unwrap();
        let gs = gauss_seidel(&sys, &[0.0; 25], 3).unwrap();
        assert_eq!(sim.final_x, gs.final_x);
        assert_eq!(sim.steps, vec![0, 25, 50, 75]);
    }

    #[test]
    fn bounded_random_first_order_converges() {
        let sys = laplace(10);
        let options = SimOptions {
            stop_below: Some(1e-7),
            stride: 100,
            ..SimOptions::default()
        };
        let s = Schedule::bounded_random(20, 0.5, 1, 5000 * 100);
        let trace =
            simulate_first_order(&sys, &IterParams::first_order(1.0), &s, &options).unwrap();
        assert!(!trace.diverged);
        assert!(trace.final_residual() < 1e-6, "{}", trace.final_residual());
    }

    #[test]
    fn stride_beyond_horizon_samples_once() {
        let sys = laplace(3);
        let trace = simulate_first_order(
            &sys,
            &IterParams::first_order(1.0),
            &Schedule::synchronous(5),
            &SimOptions::with_stride(100),
        )
        .unwrap();
        assert_eq!(trace.steps, vec![0, 5]);
    }

    #[test]
    fn delay_beyond_history_is_an_error() {
        let sys = laplace(2);
        let inst = vec![
            Instant {
                k: 1,
                updates: vec![0],
                delays: Delays::Zero,
            },
            Instant {
                k: 2,
                updates: vec![0],
                delays: Delays::PerSource(vec![1, 0, 0, 0]),
            },
        ];
        let opts = SimOptions::default();
        let params = IterParams::first_order(1.0);
        assert!(replay_first_order(&sys, &params, inst.clone(), 0, &opts).is_err());
        assert!(replay_first_order(&sys, &params, inst, 1, &opts).is_ok());
    }

    #[test]
    fn divergence_is_detected() {
        // alpha = 3 makes |1 - alpha| = 2 on the scalar problem.
        let sys = SplittingSystem::new(crate::SparseMatrix::identity(1), vec![1.0]).unwrap();
        let trace = simulate_first_order(
            &sys,
            &IterParams::first_order(3.0),
            &Schedule::synchronous(100),
            &SimOptions::default(),
        )
        .unwrap();
        assert!(trace.diverged);
        assert!(trace.instants < 100);
    }

    #[test]
    fn sweep_rows_and_frequency() {
        let sys = laplace(4);
        let settings = SweepSettings {
            update_prob: 0.5,
            horizon: 200,
            options: SimOptions::with_stride(50),
        };
        let params = IterParams::second_order(1.0, 0.2);
        let rows = asynchrony_sweep(&sys, &params, &[0, 4], &[1, 2, 3], &settings).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(divergence_frequency(&rows), vec![(0, 0, 3), (4, 0, 3)]);
        assert!(asynchrony_sweep(&sys, &params, &[0], &[], &settings)
            .unwrap()
            .is_empty());
        assert!(asynchrony_sweep(&sys, &params, &[], &[1], &settings).is_err());
    }
}
