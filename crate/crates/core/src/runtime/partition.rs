use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::error::{Error, Result};

/// How unknowns are divided among worker threads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PartitionMode {
    /// Blocks of `floor(n/p)` or `ceil(n/p)` unknowns.
    Balanced,
    /// The first `ceil(p/2)` blocks are `ratio` times the balanced size; the
    /// rest share the remaining unknowns evenly.
    Unbalanced(f64),
}

impl PartitionMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PartitionMode::Balanced => Ok(()),
            PartitionMode::Unbalanced(r) if r > 0.0 && r < 1.0 => Ok(()),
            PartitionMode::Unbalanced(r) => Err(Error::invalid(format!(
                "unbalanced ratio must lie in (0, 1), got {r}"
            ))),
        }
    }
}

impl fmt::Display for PartitionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionMode::Balanced => f.write_str("balanced"),
            PartitionMode::Unbalanced(r) => write!(f, "unbalanced:{r}"),
        }
    }
}

/// Parses `balanced`, `unbalanced` (ratio 2/3), `unbalanced:R` where `R` is
/// a decimal or a fraction such as `2/3`.
impl FromStr for PartitionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mode = match s.split_once(':') {
            None if s == "balanced" => PartitionMode::Balanced,
            None if s == "unbalanced" => PartitionMode::Unbalanced(2.0 / 3.0),
            Some(("unbalanced", r)) => PartitionMode::Unbalanced(parse_ratio(r)?),
            _ => return Err(Error::invalid(format!("unknown partition mode '{s}'"))),
        };
        mode.validate()?;
        Ok(mode)
    }
}

fn parse_ratio(r: &str) -> Result<f64> {
    let bad = || Error::invalid(format!("bad partition ratio '{r}'"));
    match r.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| bad())?;
            let den: f64 = den.trim().parse().map_err(|_| bad())?;
            Ok(num / den)
        }
        None => r.trim().parse().map_err(|_| bad()),
    }
}

/// Contiguous ownership of unknowns by threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub owner: Vec<usize>,
    pub ranges: Vec<Range<usize>>,
}

impl Partition {
    pub fn num_threads(&self) -> usize {
        self.ranges.len()
    }

    pub fn max_block(&self) -> usize {
        self.ranges.iter().map(|r| r.len()).max().unwrap_or(0)
    }

    fn from_sizes(sizes: &[usize]) -> Self {
        let mut ranges = Vec::with_capacity(sizes.len());
        let mut owner = Vec::with_capacity(sizes.iter().sum());
        let mut start = 0;
        for (t, &len) in sizes.iter().enumerate() {
            ranges.push(start..start + len);
            owner.extend(std::iter::repeat_n(t, len));
            start += len;
        }
        Partition { owner, ranges }
    }
}

pub fn partition_unknowns(n: usize, num_threads: usize, mode: PartitionMode) -> Result<Partition> {
    mode.validate()?;
    if num_threads == 0 {
        return Err(Error::invalid("at least one thread is required"));
    }
    if n < num_threads {
        return Err(Error::invalid(format!(
            "cannot split {n} unknowns among {num_threads} threads"
        )));
    }
    let sizes = match mode {
        PartitionMode::Balanced => even_sizes(n, num_threads),
        PartitionMode::Unbalanced(_) if num_threads == 1 => vec![n],
        PartitionMode::Unbalanced(ratio) => {
            let p = num_threads;
            let small_count = p.div_ceil(2);
            let large_count = p - small_count;
            let small = (ratio * n as f64 / p as f64).round() as usize;
            // Each large block needs at least one unknown.
            let small = small.clamp(1, (n - large_count) / small_count);
            let mut sizes = vec![small; small_count];
            sizes.extend(even_sizes(n - small * small_count, large_count));
            sizes
        }
    };
    Ok(Partition::from_sizes(&sizes))
}

fn even_sizes(n: usize, p: usize) -> Vec<usize> {
    let (q, r) = (n / p, n % p);
    (0..p).map(|t| q + usize::from(t < r)).collect()
}
