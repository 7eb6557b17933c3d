use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn richardson(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_richardson"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Value of `key = value` in a spectra report.
fn report_value(report: &str, key: &str) -> f64 {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("{key} missing from\n{report}"))
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

#[test]
fn spectra_for_the_hundred_grid() {
    let out = richardson(&["spectra", "--m", "100"]);
    assert!(out.status.success());
    let report = stdout(&out);
    let beta = report_value(&report, "beta_opt");
    assert!((0.93958..=0.93978).contains(&beta), "{beta}");
    assert!((report_value(&report, "q") - 0.96936).abs() < 5e-5);
    assert_eq!(report_value(&report, "alpha_opt"), 1.0);
    let bound = report_value(&report, "bound_factor_500");
    assert!((bound - 2.9e-6).abs() < 0.05e-6, "{bound}");
}

#[test]
fn spectra_for_the_identity() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("id.mtx");
    write(
        &path,
        "%%MatrixMarket matrix coordinate real general\n3 3 3\n1 1 2\n2 2 2\n3 3 2\n",
    );
    let out = richardson(&["spectra", "--mtx", path.to_str().unwrap()]);
    assert!(out.status.success());
    let report = stdout(&out);
    assert_eq!(report_value(&report, "alpha_opt"), 1.0);
    assert_eq!(report_value(&report, "beta_opt"), 0.0);
    assert_eq!(report_value(&report, "q"), 0.0);
}

#[test]
fn spectra_reports_violated_splitting() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pos.mtx");
    write(
        &path,
        "%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 1 1\n2 2 1\n2 1 0.5\n",
    );
    let out = richardson(&["spectra", "--mtx", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("T >= 0"));
}

#[test]
fn spectra_checks_given_params() {
    let out = richardson(&[
        "spectra", "--rho", "0.9", "--alpha", "1", "--beta", "0.3929",
    ]);
    let report = stdout(&out);
    assert!(report.contains("async_condition = violated"));
    assert!(report_value(&report, "async_radius") > 1.0);
}

#[test]
fn exit_codes() {
    assert_eq!(richardson(&["spectra"]).status.code(), Some(1));
    assert_eq!(richardson(&["solve", "--bogus"]).status.code(), Some(1));
    assert_eq!(
        richardson(&["spectra", "--mtx", "/no/such/file.mtx"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(richardson(&["--help"]).status.code(), Some(0));
}

#[test]
fn contour_files() {
    let dir = tempfile::tempdir().unwrap();
    let small = dir.path().join("small.csv");
    let out = richardson(&[
        "contour",
        "--rho",
        "0.5",
        "--resolution",
        "2",
        "--out",
        small.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(&small).unwrap().lines().count(), 5);

    let out = richardson(&[
        "contour",
        "--rho",
        "0.5",
        "--alpha-range",
        "0.9:1.1",
        "--beta-range",
        "0.0618:0.0818",
        "--resolution",
        "11",
    ]);
    let near_opt = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| {
            l.split(',')
                .map(|v| v.parse::<f64>().unwrap_or(f64::NAN))
                .collect::<Vec<_>>()
        })
        .any(|v| (v[0] - 1.0).abs() < 1e-9 && (v[1] - 0.0718).abs() < 1e-9 && v[2] < 0.27);
    assert!(near_opt);

    let out = richardson(&[
        "contour",
        "--rho",
        "0.9",
        "--alpha-range",
        "1:1",
        "--beta-range",
        "0.3929:0.3929",
        "--resolution",
        "2",
    ]);
    let row: Vec<f64> = stdout(&out)
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!(row[3] > 1.0);
}

#[test]
fn simulate_synchronous_matches_solve() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.cfg");
    write(&cfg, "# synchronous reduction\nm = 6\nalpha = 1\nbeta = 0.4\nschedule = synchronous\nhorizon = 60\n");
    let sim = richardson(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert!(
        sim.status.success(),
        "{}",
        String::from_utf8_lossy(&sim.stderr)
    );
    let solve = richardson(&[
        "solve",
        "--m",
        "6",
        "--alpha",
        "1",
        "--beta",
        "0.4",
        "--iterations",
        "60",
    ]);
    assert!(solve.status.success());
    assert_eq!(stdout(&sim), stdout(&solve));
}

#[test]
fn simulate_stride_beyond_horizon() {
    let out = richardson(&["simulate", "--m", "4", "--horizon", "5", "--stride", "50"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let steps: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(steps, vec!["0", "5"]);
}

#[test]
fn simulate_sweep_finds_divergence() {
    let out = richardson(&[
        "simulate",
        "--m",
        "10",
        "--beta",
        "0.9",
        "--delays",
        "0,20",
        "--seeds",
        "0-2",
        "--horizon",
        "3000",
        "--stride",
        "100",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().filter(|r| r[0] == "0").all(|r| r[3] == "0"));
    assert!(rows.iter().any(|r| r[0] == "20" && r[3] == "1"));
}

#[test]
fn simulate_dumps_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("schedule.txt");
    let out = richardson(&[
        "simulate",
        "--m",
        "3",
        "--schedule",
        "bounded",
        "--max-delay",
        "2",
        "--horizon",
        "7",
        "--dump-schedule",
        dump.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&dump).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.starts_with("1;"));
}

#[test]
fn experiment_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    write(&cfg, "m = 10\ngrid = 4\n");
    let out = richardson(&["experiment", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid"));

    let out = richardson(&["experiment", "--m", "10", "--reps", "0"]);
    assert_eq!(out.status.code(), Some(1));

    write(&cfg, "partition = lopsided\n");
    let out = richardson(&["experiment", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("partition"));
}

#[test]
fn experiment_round_trips_through_validate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("t3.cfg");
    write(
        &cfg,
        "mode = table3\nm = 20\nthreads = 1,3\nreps = 4\ntarget_updates = 50\n",
    );
    let agg = dir.path().join("t3.csv");
    let out = richardson(&[
        "experiment",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        agg.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&agg).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "threads,avg_range,avg_rel_resid,failures,async_time,sync_time"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1..].iter().all(|l| l.split(',').nth(3) == Some("0")));

    let runs = dir.path().join("t3.runs.csv");
    let ok = richardson(&[
        "validate",
        "--aggregate",
        agg.to_str().unwrap(),
        "--runs",
        runs.to_str().unwrap(),
    ]);
    assert!(
        ok.status.success(),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );

    // Bump the range column of the first run so it no longer equals max - min.
    let text = fs::read_to_string(&runs).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut fields: Vec<String> = lines[1].split(',').map(String::from).collect();
    fields[5] = (fields[5].parse::<u64>().unwrap() + 1).to_string();
    lines[1] = fields.join(",");
    fs::write(&runs, lines.join("\n") + "\n").unwrap();
    let bad = richardson(&[
        "validate",
        "--aggregate",
        agg.to_str().unwrap(),
        "--runs",
        runs.to_str().unwrap(),
    ]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn experiment_timing_mode() {
    let out = richardson(&[
        "experiment",
        "--mode",
        "timing",
        "--m",
        "12",
        "--threads",
        "4",
        "--t-values",
        "5,10",
        "--tests",
        "2",
        "--beta",
        "0.2",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert_eq!(
        text.lines().next(),
        Some("threads,partition,target_updates,test,wall_time,rel_resid")
    );
    // Two partitions, two workloads, two tests each.
    assert_eq!(text.lines().count(), 1 + 8);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unbalanced/balanced"));
}

#[test]
fn generate_writes_matrix_market() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lap.mtx");
    let out = richardson(&["generate", "--m", "3", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("%%MatrixMarket matrix coordinate real general"));
    let spectra = richardson(&["spectra", "--mtx", path.to_str().unwrap()]);
    let rho = report_value(&stdout(&spectra), "rho");
    assert!((rho - (std::f64::consts::PI / 4.0).cos()).abs() < 1e-9);
}
