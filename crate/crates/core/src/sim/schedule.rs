use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleKind {
    /// Every component at every instant, no delay.
    Synchronous,
    /// One component per instant in index order, no delay.
    Cyclic,
    /// Each component joins an instant with probability `update_prob` and is
    /// forced in after `max_delay` idle instants; every source component is
    /// read with a delay uniform on `0..=min(max_delay, k - 1)`.
    BoundedRandom {
        max_delay: usize,
        update_prob: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub kind: ScheduleKind,
    /// Number of instants to simulate.
    pub horizon: usize,
}

impl Schedule {
    pub fn synchronous(horizon: usize) -> Self {
        Schedule {
            kind: ScheduleKind::Synchronous,
            horizon,
        }
    }

    pub fn cyclic(horizon: usize) -> Self {
        Schedule {
            kind: ScheduleKind::Cyclic,
            horizon,
        }
    }

    pub fn bounded_random(max_delay: usize, update_prob: f64, seed: u64, horizon: usize) -> Self {
        Schedule {
            kind: ScheduleKind::BoundedRandom {
                max_delay,
                update_prob,
                seed,
            },
            horizon,
        }
    }

    /// Largest read delay the schedule can produce.
    pub fn max_delay(&self) -> usize {
        match self.kind {
            ScheduleKind::BoundedRandom { max_delay, .. } => max_delay,
            _ => 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let ScheduleKind::BoundedRandom { update_prob, .. } = self.kind {
            if !(update_prob > 0.0 && update_prob <= 1.0) {
                return Err(Error::Schedule(format!(
                    "update probability must lie in (0, 1], got {update_prob}"
                )));
            }
        }
        Ok(())
    }

    /// Realization over `dim` components.
    pub fn instants(&self, dim: usize) -> Result<Realization> {
        self.validate()?;
        if dim == 0 {
            return Err(Error::Schedule("schedule over zero components".into()));
        }
        let rng = match self.kind {
            ScheduleKind::BoundedRandom { seed, .. } => {
                Some(Xoshiro256PlusPlus::seed_from_u64(seed))
            }
            _ => None,
        };
        Ok(Realization {
            schedule: *self,
            dim,
            k: 0,
            last_update: vec![0; dim],
            rng,
        })
    }
}

/// Update set and read delays of one instant `k >= 1`.
///
/// Component `i` in `updates` is recomputed from `x_j^{k-1-delays[j]}`;
/// every other component keeps its value from instant `k - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instant {
    pub k: usize,
    pub updates: Vec<usize>,
    pub delays: Delays,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Delays {
    Zero,
    PerSource(Vec<usize>),
}

impl Delays {
    #[inline]
    pub fn get(&self, j: usize) -> usize {
        match self {
            Delays::Zero => 0,
            Delays::PerSource(d) => d[j],
        }
    }
}

/// Iterator over the instants of a schedule.
pub struct Realization {
    schedule: Schedule,
    dim: usize,
    k: usize,
    last_update: Vec<usize>,
    rng: Option<Xoshiro256PlusPlus>,
}

impl Iterator for Realization {
    type Item = Instant;

    fn next(&mut self) -> Option<Instant> {
        if self.k >= self.schedule.horizon {
            return None;
        }
        self.k += 1;
        let k = self.k;
        let n = self.dim;
        let instant = match self.schedule.kind {
            ScheduleKind::Synchronous => Instant {
                k,
                updates: (0..n).collect(),
                delays: Delays::Zero,
            },
            ScheduleKind::Cyclic => Instant {
                k,
                updates: vec![(k - 1) % n],
                delays: Delays::Zero,
            },
            ScheduleKind::BoundedRandom {
                max_delay,
                update_prob,
                ..
            } => {
                let rng = self.rng.as_mut().expect("seeded");
                let mut updates = Vec::new();
                for i in 0..n {
                    let forced = k - self.last_update[i] > max_delay;
                    if forced || rng.random::<f64>() < update_prob {
                        updates.push(i);
                        self.last_update[i] = k;
                    }
                }
                let bound = max_delay.min(k - 1);
                let delays = (0..n).map(|_| rng.random_range(0..=bound)).collect();
                Instant {
                    k,
                    updates,
                    delays: Delays::PerSource(delays),
                }
            }
        };
        Some(instant)
    }
}

/// Checks a realization against the model: instants numbered from 1, sorted
/// distinct update sets, delays with `s_j(k) = k - 1 - d_j >= 0`, and, when
/// `max_delay` is given, delays at most `max_delay` and every component
/// updated at least once in every `max_delay + 1` consecutive instants.
pub fn validate_realization(
    instants: &[Instant],
    dim: usize,
    max_delay: Option<usize>,
) -> Result<()> {
    let mut last_update = vec![0usize; dim];
    for (idx, inst) in instants.iter().enumerate() {
        let k = inst.k;
        if k != idx + 1 {
            return Err(Error::Schedule(format!(
                "instant {k} found at position {}",
                idx + 1
            )));
        }
        if inst.updates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Schedule(format!(
                "instant {k}: update set not sorted and distinct"
            )));
        }
        if inst.updates.last().is_some_and(|&i| i >= dim) {
            return Err(Error::Schedule(format!(
                "instant {k}: component out of range"
            )));
        }
        if let Delays::PerSource(d) = &inst.delays {
            if d.len() != dim {
                return Err(Error::Schedule(format!(
                    "instant {k}: {} delays for {dim} components",
                    d.len()
                )));
            }
            if let Some(j) = d.iter().position(|&dj| dj > k - 1) {
                return Err(Error::Schedule(format!(
                    "instant {k}: component {j} read from before instant 0"
                )));
            }
            if let Some(b) = max_delay {
                if let Some(j) = d.iter().position(|&dj| dj > b) {
                    return Err(Error::Schedule(format!(
                        "instant {k}: delay {} of component {j} exceeds {b}",
                        d[j]
                    )));
                }
            }
        }
        for &i in &inst.updates {
            last_update[i] = k;
        }
        if let Some(b) = max_delay {
            if let Some(i) = last_update.iter().position(|&l| k - l > b) {
                return Err(Error::Schedule(format!(
                    "component {i} idle for more than {b} instants at instant {k}"
                )));
            }
        }
    }
    Ok(())
}

/// Writes one line `k;J_k;delays` per instant, lists comma-separated; an
/// all-zero delay vector is written as `0`.
pub fn write_realization<W: Write>(instants: &[Instant], mut out: W) -> Result<()> {
    let mut line = String::new();
    for inst in instants {
        line.clear();
        write!(line, "{};", inst.k).unwrap();
        join(&mut line, &inst.updates);
        line.push(';');
        match &inst.delays {
            Delays::Zero => line.push('0'),
            Delays::PerSource(d) => join(&mut line, d),
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn join(line: &mut String, values: &[usize]) {
    for (idx, v) in values.iter().enumerate() {
        if idx > 0 {
            line.push(',');
        }
        write!(line, "{v}").unwrap();
    }
}

pub fn read_realization<R: BufRead>(input: R) -> Result<Vec<Instant>> {
    let mut instants = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = |what: &str| Error::Schedule(format!("line {}: {what}", idx + 1));
        let mut parts = line.split(';');
        let (Some(k), Some(updates), Some(delays), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(bad("expected k;J_k;delays"));
        };
        let k = k.trim().parse().map_err(|_| bad("bad instant"))?;
        let updates = parse_list(updates).ok_or_else(|| bad("bad update set"))?;
        let delays = match delays.trim() {
            "0" => Delays::Zero,
            d => Delays::PerSource(parse_list(d).ok_or_else(|| bad("bad delays"))?),
        };
        instants.push(Instant { k, updates, delays });
    }
    Ok(instants)
}

fn parse_list(s: &str) -> Option<Vec<usize>> {
    let s = s.trim();
    if s.is_empty() {
        return Some(Vec::new());
    }
    s.split(',').map(|v| v.trim().parse().ok()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_visits_in_order() {
        let inst: Vec<_> = Schedule::cyclic(5).instants(3).unwrap().collect();
        let order: Vec<usize> = inst.iter().map(|i| i.updates[0]).collect();
        assert_eq!(order, vec![0, 1, 2, 0, 1]);
    }

    #[test]
    fn bounded_random_is_admissible() {
        for b in [0, 1, 5, 20] {
            let s = Schedule::bounded_random(b, 0.3, 9, 400);
            let inst: Vec<_> = s.instants(12).unwrap().collect();
            validate_realization(&inst, 12, Some(b)).unwrap();
        }
    }

    #[test]
    fn zero_delay_bound_updates_everything() {
        let s = Schedule::bounded_random(0, 0.1, 1, 10);
        for inst in s.instants(4).unwrap() {
            assert_eq!(inst.updates, vec![0, 1, 2, 3]);
            assert!((0..4).all(|j| inst.delays.get(j) == 0));
        }
    }

    #[test]
    fn same_seed_same_realization() {
        let s = Schedule::bounded_random(3, 0.5, 42, 50);
        let a: Vec<_> = s.instants(6).unwrap().collect();
        let b: Vec<_> = s.instants(6).unwrap().collect();
        assert_eq!(a, b);
    }

    #[test]
    fn dump_round_trip() {
        let s = Schedule::bounded_random(2, 0.5, 3, 30);
        let inst: Vec<_> = s.instants(5).unwrap().collect();
        let mut buf = Vec::new();
        write_realization(&inst, &mut buf).unwrap();
        assert_eq!(read_realization(buf.as_slice()).unwrap(), inst);

        let sync: Vec<_> = Schedule::synchronous(2).instants(2).unwrap().collect();
        let mut buf = Vec::new();
        write_realization(&sync, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "1;0,1;0\n2;0,1;0\n"
        );
        assert_eq!(read_realization(buf.as_slice()).unwrap(), sync);
    }

    #[test]
    fn validator_rejects_violations() {
        let ok = |updates: Vec<usize>, delays| Instant {
            k: 1,
            updates,
            delays,
        };
        assert!(
            validate_realization(&[ok(vec![0], Delays::PerSource(vec![1, 0]))], 2, None).is_err()
        );
        assert!(validate_realization(&[ok(vec![1, 0], Delays::Zero)], 2, None).is_err());
        assert!(validate_realization(&[ok(vec![2], Delays::Zero)], 2, None).is_err());
        // Component 1 never updated with a bound of 0.
        assert!(validate_realization(&[ok(vec![0], Delays::Zero)], 2, Some(0)).is_err());
        assert!(validate_realization(&[ok(vec![0, 1], Delays::Zero)], 2, Some(0)).is_ok());
    }

    #[test]
    fn bad_probability() {
        assert!(Schedule::bounded_random(2, 0.0, 1, 5).instants(3).is_err());
        assert!(Schedule::bounded_random(2, 1.5, 1, 5).instants(3).is_err());
    }
}
