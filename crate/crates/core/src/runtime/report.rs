//! CSV output of asynchronous experiments and a validator that recomputes
//! every derived column from the raw per-run rows.

use std::io::{Read, Write};

use crate::error::{Error, Result};

use super::{AggregateStats, RunStats};

/// One raw run as written to the per-run CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub threads: usize,
    pub run: usize,
    /// Seed of the right-hand side.
    pub seed: u64,
    pub min_updates: u64,
    pub max_updates: u64,
    pub range: u64,
    pub rel_resid: f64,
    pub failed: bool,
    pub wall_time: f64,
}

impl RunRecord {
    pub fn from_stats(threads: usize, run: usize, seed: u64, stats: &RunStats) -> Self {
        RunRecord {
            threads,
            run,
            seed,
            min_updates: stats.min_updates(),
            max_updates: stats.max_updates(),
            range: stats.range,
            rel_resid: stats.rel_resid,
            failed: stats.failed,
            wall_time: stats.wall_time,
        }
    }
}

const RUNS_HEADER: [&str; 9] = [
    "threads",
    "run",
    "seed",
    "min_updates",
    "max_updates",
    "range",
    "rel_resid",
    "failed",
    "wall_time",
];

const AGGREGATE_HEADER: [&str; 6] = [
    "threads",
    "avg_range",
    "avg_rel_resid",
    "failures",
    "async_time",
    "sync_time",
];

pub fn write_runs_csv<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUNS_HEADER)?;
    for r in records {
        w.write_record([
            r.threads.to_string(),
            r.run.to_string(),
            r.seed.to_string(),
            r.min_updates.to_string(),
            r.max_updates.to_string(),
            r.range.to_string(),
            format!("{:e}", r.rel_resid),
            u8::from(r.failed).to_string(),
            r.wall_time.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Averages are written exactly; times with 6 decimals.
pub fn write_aggregate_csv<W: Write>(rows: &[AggregateStats], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGGREGATE_HEADER)?;
    for a in rows {
        w.write_record([
            a.threads.to_string(),
            a.avg_range.to_string(),
            format!("{:e}", a.avg_rel_resid),
            a.failures.to_string(),
            format!("{:.6}", a.avg_time),
            a.sync_time.map(|t| format!("{t:.6}")).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One point of a residual-versus-time curve.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingPoint {
    pub threads: usize,
    pub partition: String,
    pub target_updates: u64,
    pub test: usize,
    pub wall_time: f64,
    pub rel_resid: f64,
}

pub fn write_timing_csv<W: Write>(points: &[TimingPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "threads",
        "partition",
        "target_updates",
        "test",
        "wall_time",
        "rel_resid",
    ])?;
    for p in points {
        w.write_record([
            p.threads.to_string(),
            p.partition.clone(),
            p.target_updates.to_string(),
            p.test.to_string(),
            format!("{:.6}", p.wall_time),
            format!("{:e}", p.rel_resid),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn rows<R: Read>(input: R, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let found: Vec<&str> = r.headers()?.iter().collect();
    if found != header {
        return Err(Error::invalid(format!(
            "unexpected CSV header {found:?}, expected {header:?}"
        )));
    }
    r.records().map(|rec| Ok(rec?)).collect()
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, name: &str) -> Result<T> {
    let raw = rec.get(idx).unwrap_or("");
    raw.parse().map_err(|_| {
        let line = rec.position().map_or(0, |p| p.line());
        Error::invalid(format!("line {line}: bad {name} value '{raw}'"))
    })
}

pub fn read_runs_csv<R: Read>(input: R) -> Result<Vec<RunRecord>> {
    rows(input, &RUNS_HEADER)?
        .iter()
        .map(|rec| {
            let failed: u8 = field(rec, 7, "failed")?;
            if failed > 1 {
                return Err(Error::invalid(format!("bad failed flag {failed}")));
            }
            Ok(RunRecord {
                threads: field(rec, 0, "threads")?,
                run: field(rec, 1, "run")?,
                seed: field(rec, 2, "seed")?,
                min_updates: field(rec, 3, "min_updates")?,
                max_updates: field(rec, 4, "max_updates")?,
                range: field(rec, 5, "range")?,
                rel_resid: field(rec, 6, "rel_resid")?,
                failed: failed == 1,
                wall_time: field(rec, 8, "wall_time")?,
            })
        })
        .collect()
}

pub fn read_aggregate_csv<R: Read>(input: R) -> Result<Vec<AggregateStats>> {
    rows(input, &AGGREGATE_HEADER)?
        .iter()
        .map(|rec| {
            let sync_time = match rec.get(5).unwrap_or("") {
                "" => None,
                _ => Some(field(rec, 5, "sync_time")?),
            };
            Ok(AggregateStats {
                threads: field(rec, 0, "threads")?,
                runs: 0,
                avg_range: field(rec, 1, "avg_range")?,
                avg_rel_resid: field(rec, 2, "avg_rel_resid")?,
                failures: field(rec, 3, "failures")?,
                avg_time: field(rec, 4, "async_time")?,
                sync_time,
            })
        })
        .collect()
}

/// Checks per-run `range` and `failed` against the raw columns and every
/// aggregate row against the runs with the same thread count. Returns the
/// number of runs checked.
pub fn validate_report(aggregates: &[AggregateStats], runs: &[RunRecord]) -> Result<usize> {
    for r in runs {
        if r.max_updates < r.min_updates || r.range != r.max_updates - r.min_updates {
            return Err(Error::invalid(format!(
                "threads {} run {}: range {} does not match {} - {}",
                r.threads, r.run, r.range, r.max_updates, r.min_updates
            )));
        }
        if r.failed != (r.rel_resid > 1.0) {
            return Err(Error::invalid(format!(
                "threads {} run {}: failed flag disagrees with rel_resid {}",
                r.threads, r.run, r.rel_resid
            )));
        }
    }
    for a in aggregates {
        let group: Vec<RunRecord> = runs
            .iter()
            .filter(|r| r.threads == a.threads)
            .cloned()
            .collect();
        if group.is_empty() {
            return Err(Error::invalid(format!("no runs for {} threads", a.threads)));
        }
        let expect = AggregateStats::from_records(a.threads, &group);
        let same = |x: f64, y: f64| x == y || (x.is_nan() && y.is_nan());
        let ok = same(expect.avg_range, a.avg_range)
            && same(expect.avg_rel_resid, a.avg_rel_resid)
            && expect.failures == a.failures
            && format!("{:.6}", expect.avg_time) == format!("{:.6}", a.avg_time);
        if !ok {
            return Err(Error::invalid(format!(
                "aggregate row for {} threads does not match its runs: {a:?} vs {expect:?}",
                a.threads
            )));
        }
    }
    Ok(runs.len())
}
