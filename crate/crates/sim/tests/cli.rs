//! End-to-end runs of the `hsr-sim` binary.

use std::path::Path;
use std::process::{Command, Output};

fn hsr_sim(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsr-sim"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn simulate_writes_records_stats_and_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.json");
    std::fs::write(
        &config,
        r#"{"runs": 5, "seed": 11, "handover": {"offset_db": 3}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let res = hsr_sim(
        &[
            "simulate",
            "--config",
            config.to_str().unwrap(),
            "--speed",
            "500",
            "--env",
            "viaduct",
        ],
        &out,
    );
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );

    let stats = read(&out.join("stats.csv"));
    let lines: Vec<&str> = stats.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("500,viaduct,3,5,"), "{}", lines[1]);
    assert!(lines[1].ends_with(",120,3"), "{}", lines[1]);

    let records = read(&out.join("records.csv"));
    assert!(records.starts_with(
        "run_id,speed_kmh,environment,offset_db,trigger_tick,report_tick,command_tick,\
         completion_tick,start_position_m,delay_ms,outcome\n"
    ));
    assert!(records
        .lines()
        .skip(1)
        .all(|l| l.contains(",500,viaduct,3,")));
    let hist = read(&out.join("start_points.csv"));
    let total: f64 = hist
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-4, "histogram sums to {total}");
}

#[test]
fn trace_dumps_one_row_per_tick() {
    let dir = tempfile::tempdir().unwrap();
    let res = hsr_sim(&["trace", "--run", "3", "--speed", "500"], dir.path());
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let trace = read(&dir.path().join("trace.csv"));
    let mut lines = trace.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 7 + 4 * 5);
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 5196 / 5 + 1);
    // interrupted ticks carry zero throughput, the others do not
    for row in &rows {
        assert_eq!(row[5] == "1", row[6] == "0", "{row:?}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"runs": 0}"#).unwrap();
    let code = |args: &[&str]| hsr_sim(args, &dir.path().join("o")).status.code();

    assert_eq!(
        code(&["simulate", "--config", bad.to_str().unwrap()]),
        Some(2)
    );
    std::fs::write(&bad, "{not json").unwrap();
    assert_eq!(
        code(&["simulate", "--config", bad.to_str().unwrap()]),
        Some(2)
    );
    assert_eq!(code(&["simulate", "--ttt-ms", "50"]), Some(2));
    assert_eq!(code(&["simulate", "--speed", "-3"]), Some(2));
    assert_eq!(code(&["sweep", "--speeds", "100"]), Some(2));
    assert_eq!(
        code(&["simulate", "--config", "/definitely/missing.json"]),
        Some(3)
    );

    // output directory blocked by a regular file
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let res = hsr_sim(&["simulate", "--runs", "1"], &blocker.join("sub"));
    assert_eq!(res.status.code(), Some(3));
}
