//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use hsr_handover::channel::{
    shadowing_db, small_scale_power_gain, EnvironmentProfile, FadingState,
};
use hsr_handover::doppler::{
    doppler_spread_hz, effective_sinr_linear, ici_power_lower, ici_power_upper, IciParams,
};
use hsr_handover::geometry::{kmh_to_mps, EnvironmentId};
use hsr_handover::handover::{
    a3_condition, classify_postponement, HandoverConfig, HandoverFsm, Outcome, Postponement,
    TickInput,
};
use hsr_handover::harness::{simulate_run, RunConfig};
use hsr_handover::measurement::{l1_filter, l3_filter, L1Config, L3Config};
use hsr_handover_sim::runner::{monte_carlo, thread_pool, ConfigResult};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::ThreadPool;

type Check = Result<String, String>;
type Criterion<'a> = (&'a str, Box<dyn Fn() -> Check + 'a>);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn run_mc(cfg: &RunConfig, pool: &ThreadPool) -> Result<ConfigResult, String> {
    monte_carlo(cfg, pool).map_err(|e| e.to_string())
}

/// Weighted start point of one environment at `kmh` and `h0`.
fn wsp(env: EnvironmentId, kmh: f64, h0: f64, pool: &ThreadPool) -> Result<f64, String> {
    let cfg = RunConfig::default()
        .with_environment(Some(env))
        .with_speed_kmh(kmh)
        .with_offset_db(h0);
    run_mc(&cfg, pool)?
        .stats
        .weighted_start_point
        .ok_or_else(|| format!("{env} {kmh} km/h H0={h0}: no successful handover"))
}

fn c1_delay(pool: &ThreadPool) -> Check {
    let started = Instant::now();
    let mut parts = Vec::new();
    for kmh in [100.0, 300.0, 500.0] {
        let cfg = RunConfig::default().with_speed_kmh(kmh);
        let result = run_mc(&cfg, pool)?;
        let s = &result.stats;
        ensure(s.runs == 500, "expected 500 runs")?;
        ensure(
            s.successes > 0,
            format!("{kmh} km/h: no successful handover"),
        )?;
        for rec in result.runs.iter().flatten() {
            if rec.outcome == Outcome::Success {
                let d = rec.total_delay.unwrap_or(f64::NAN);
                ensure(
                    (d - 0.120).abs() < 1e-12,
                    format!("{kmh} km/h: delay {d} s"),
                )?;
            }
        }
        ensure(
            s.delay_in_samples == Some(3),
            format!("{kmh} km/h: {:?} samples", s.delay_in_samples),
        )?;
        parts.push(format!("{kmh} km/h: {} successes", s.successes));
    }
    let secs = started.elapsed().as_secs_f64();
    ensure(secs < 60.0, format!("took {secs:.1} s"))?;
    Ok(format!(
        "120 ms = 3 samples ({}; {secs:.1} s)",
        parts.join(", ")
    ))
}

fn c2_offset_monotone(pool: &ThreadPool) -> Check {
    let mut parts = Vec::new();
    for env in EnvironmentId::ALL {
        let values = [0.0, 2.0, 4.0, 6.0]
            .iter()
            .map(|&h0| wsp(env, 300.0, h0, pool))
            .collect::<Result<Vec<_>, _>>()?;
        ensure(
            values.windows(2).all(|w| w[1] >= w[0]),
            format!("{env}: {values:?}"),
        )?;
        let shown: Vec<String> = values.iter().map(|v| format!("{v:.0}")).collect();
        parts.push(format!("{env} {}", shown.join("/")));
    }
    Ok(format!("wsp(H0=0/2/4/6) m: {}", parts.join("; ")))
}

fn c3_speed_trend(pool: &ThreadPool) -> Check {
    let mut parts = Vec::new();
    for env in EnvironmentId::ALL {
        let snapshot = RunConfig::default().kinematics.snapshot_interval;
        let slow = wsp(env, 100.0, 2.0, pool)?;
        let fast = wsp(env, 500.0, 2.0, pool)?;
        ensure(
            fast >= slow - snapshot,
            format!("{env}: {fast} < {slow} - 1"),
        )?;
        parts.push(format!("{env} {slow:.0}->{fast:.0}"));
    }
    Ok(format!("wsp 100->500 km/h m: {}", parts.join("; ")))
}

fn c4_ici() -> Check {
    // every tick of a simulated run
    let cfg = RunConfig::default().with_speed_kmh(500.0);
    let out = simulate_run(&cfg, 0).map_err(|e| e.to_string())?;
    let mut ticks = 0;
    for sample in &out.trace {
        for cell in &sample.cells {
            ensure(
                cell.downlink.effective_snr_db <= cell.snr_no_ici_db,
                format!("tick {}: ICI raised SINR", sample.tick),
            )?;
            ticks += 1;
        }
    }
    // pinned fading: identical positions and random streams at both speeds
    let mut pinned = RunConfig::default();
    pinned.kinematics.snapshot_interval = 6.0;
    let slow = simulate_run(&pinned.clone().with_speed_kmh(100.0), 0).map_err(|e| e.to_string())?;
    let fast = simulate_run(&pinned.with_speed_kmh(500.0), 0).map_err(|e| e.to_string())?;
    ensure(
        slow.trace.len() == fast.trace.len(),
        "pinned traces differ in length",
    )?;
    for (a, b) in slow.trace.iter().zip(&fast.trace) {
        ensure(a.position == b.position, "pinned positions differ")?;
        for (ca, cb) in a.cells.iter().zip(&b.cells) {
            ensure(
                ca.snr_no_ici_db == cb.snr_no_ici_db,
                "pinned fading differs",
            )?;
            ensure(
                cb.downlink.effective_snr_db < ca.downlink.effective_snr_db,
                format!("tick {}: 500 km/h not below 100 km/h", a.tick),
            )?;
        }
    }
    // Eq. (1) gap at pr = 10 and 500 km/h
    let ici = IciParams::default();
    let p = ici_power_upper(
        doppler_spread_hz(kmh_to_mps(500.0), ici.carrier_frequency),
        &ici,
    );
    let gap = 10.0 * effective_sinr_linear(10.0, p).log10() - 10.0;
    let expected = 10.0 * (10.0 / (10.0 * p + 1.0)).log10() - 10.0;
    ensure((p - 4.3190).abs() < 1e-3, format!("p_ici = {p}"))?;
    ensure(
        (gap - expected).abs() < 1e-6,
        format!("gap {gap} vs {expected}"),
    )?;
    Ok(format!(
        "{ticks} cell-ticks degraded; pinned 100 vs 500 km/h ordered; p = {p:.4}, gap = {gap:.4} dB"
    ))
}

fn c5_bounds() -> Check {
    let ici = IciParams::default();
    let n = 10_000;
    for i in 0..n {
        let fd = 2000.0 * i as f64 / (n - 1) as f64;
        let (lo, hi) = (ici_power_lower(fd, &ici), ici_power_upper(fd, &ici));
        ensure(lo <= hi, format!("fd = {fd}: lower {lo} > upper {hi}"))?;
    }
    Ok(format!("{n} points on [0, 2000] Hz"))
}

fn c6_classify() -> Check {
    // margins and offsets on a half-dB grid so equality cases occur
    let grid: Vec<f64> = (0..20).map(|i| -5.0 + 0.5 * i as f64).collect();
    let mut cases = 0;
    for &h_a in &grid {
        for &h_b in &grid {
            for &h0 in &grid {
                let got = classify_postponement(h_a, h_b, h0);
                if h_a >= h_b {
                    ensure(got.is_err(), "h_a >= h_b accepted")?;
                    continue;
                }
                // scan the margin from A to B for the first point where A3 holds
                let steps = 1000;
                let first = (0..=steps).find(|&k| {
                    let margin = if k == steps {
                        h_b
                    } else {
                        h_a + (h_b - h_a) * k as f64 / steps as f64
                    };
                    a3_condition(margin, 0.0, h0)
                });
                let oracle = match first {
                    Some(0) => Postponement::HandoverAtB,
                    Some(_) => Postponement::Postponed,
                    None => Postponement::NoHandover,
                };
                ensure(
                    got == Ok(oracle),
                    format!("({h_a}, {h_b}, {h0}): {got:?} vs {oracle:?}"),
                )?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} ordered cases match the oracle"))
}

fn c7_filters() -> Check {
    let mut gen = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let len = gen.random_range(1..200);
        let stream: Vec<f64> = (0..len)
            .map(|_| 10f64.powf(gen.random_range(-3.0..3.0)))
            .collect();
        let stride = gen.random_range(1..6);
        let cfg = L1Config {
            window: 0.04 * gen.random_range(1..8) as f64,
            ..L1Config::default()
        };
        let noise_seed = gen.random::<u64>();
        let got = l1_filter(
            &stream,
            &cfg,
            stride,
            &mut ChaCha8Rng::seed_from_u64(noise_seed),
        )
        .map_err(|e| e.to_string())?;

        // direct reimplementation
        let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
        let n_win = (cfg.window / cfg.sample_period).round() as usize;
        let sampled: Vec<f64> = stream.iter().step_by(stride).copied().collect();
        let limit = cfg.noise_cutoff * cfg.meas_noise_sigma_db;
        let want: Vec<f64> = (0..sampled.len())
            .map(|k| {
                let lo = (k + 1).saturating_sub(n_win);
                let win = &sampled[lo..=k];
                let mean = win.iter().sum::<f64>() / win.len() as f64;
                let z: f64 = rng.sample(StandardNormal);
                10.0 * mean.log10() + (z * cfg.meas_noise_sigma_db).clamp(-limit, limit)
            })
            .collect();
        ensure(got.len() == want.len(), "l1 length mismatch")?;
        for (g, w) in got.iter().zip(&want) {
            worst = worst.max((g - w).abs());
        }

        let a = gen.random_range(0.01..=1.0);
        let l3 = l3_filter(
            &got,
            &L3Config {
                filter_coefficient_a: a,
            },
        )
        .map_err(|e| e.to_string())?;
        let mut state = got[0];
        let (lo, hi) = got
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        for (n, (&m, &f)) in got.iter().zip(&l3).enumerate() {
            if n > 0 {
                state = (1.0 - a) * state + a * m;
            }
            worst = worst.max((f - state).abs());
            ensure(
                f >= lo && f <= hi,
                format!("l3 value {f} outside [{lo}, {hi}]"),
            )?;
        }
    }
    ensure(worst <= 1e-12, format!("max deviation {worst:e} dB"))?;
    Ok(format!("1000 streams, max deviation {worst:e} dB"))
}

fn c8_ttt() -> Check {
    let mut gen = ChaCha8Rng::seed_from_u64(8);
    let period = 0.04;
    let (mut reports, mut violations) = (0u64, 0u64);
    for _ in 0..10_000 {
        let cells = gen.random_range(2..5);
        let len = gen.random_range(5..60);
        let cfg = HandoverConfig {
            hysteresis_h0: gen.random_range(0.0..6.0),
            ttt: period * gen.random_range(0..6) as f64,
            ..HandoverConfig::default()
        };
        let mut fsm = HandoverFsm::new(cfg, period, 0, 0).map_err(|e| e.to_string())?;
        let n = fsm.timing().ttt_ticks;
        let mut history: Vec<Vec<f64>> = Vec::with_capacity(len);
        let mut l3: Vec<f64> = (0..cells).map(|_| gen.random_range(-10.0..10.0)).collect();
        for tick in 0..len as u32 {
            for v in &mut l3 {
                *v += gen.random_range(-3.0..3.0);
            }
            let dl: Vec<f64> = (0..cells).map(|_| gen.random_range(-14.0..20.0)).collect();
            let ul: Vec<f64> = (0..cells).map(|_| gen.random_range(-14.0..20.0)).collect();
            history.push(l3.clone());
            let input = TickInput {
                l3_db: &l3,
                dl_snr_db: &dl,
                ul_snr_db: &ul,
            };
            let Some(rec) = fsm.step(tick, &input).map_err(|e| e.to_string())? else {
                continue;
            };
            let Some(report) = rec.report_tick else {
                continue;
            };
            reports += 1;
            let ok = rec.trigger_tick == report.checked_sub(n)
                && (report - n..=report).all(|t| {
                    let row = &history[t as usize];
                    a3_condition(
                        row[rec.target_cell],
                        row[rec.serving_cell],
                        cfg.hysteresis_h0,
                    )
                });
            if !ok {
                if violations == 0 {
                    eprintln!("n={n} h0={} rec={rec:?}", cfg.hysteresis_h0);
                    for (t, row) in history.iter().enumerate() {
                        eprintln!("  {t}: {row:?}");
                    }
                }
                violations += 1;
            }
        }
    }
    ensure(reports > 1000, format!("only {reports} reports exercised"))?;
    ensure(
        violations == 0,
        format!("{violations} violations in {reports} reports"),
    )?;
    Ok(format!("10000 traces, {reports} reports, 0 violations"))
}

fn c9_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |threads: &str| -> Result<Vec<Vec<u8>>, String> {
        let out = dir.path().join(format!("t{threads}"));
        let status = Command::new(env!("CARGO_BIN_EXE_hsr-sim"))
            .args(["sweep", "--speeds", "100,300,500", "--offsets", "0,2,4"])
            .args(["--envs", "viaduct,mixed", "--runs", "24", "--seed", "99"])
            .args(["--threads", threads, "--out"])
            .arg(&out)
            .stdout(std::process::Stdio::null())
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), format!("sweep exited with {status}"))?;
        ["records.csv", "stats.csv", "start_points.csv"]
            .iter()
            .map(|f| std::fs::read(out.join(f)).map_err(|e| e.to_string()))
            .collect()
    };
    let one = run("1")?;
    let four = run("4")?;
    ensure(one == four, "outputs differ between 1 and 4 threads")?;
    let bytes: usize = one.iter().map(Vec::len).sum();
    Ok(format!(
        "1 vs 4 threads: {bytes} bytes identical across 3 CSV files"
    ))
}

fn c10_moments() -> Check {
    let mut parts = Vec::new();
    for env in EnvironmentId::ALL {
        let profile = EnvironmentProfile::for_environment(env);
        // positions 1 km apart are far beyond the decorrelation distance
        let mut state = FadingState::new(ChaCha8Rng::seed_from_u64(100 + env as u64));
        let n = 100_000;
        let draws: Vec<f64> = (0..n)
            .map(|i| shadowing_db(&mut state, &profile, 1000.0 * i as f64))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let std = var.sqrt();
        ensure(
            (std - 6.0).abs() <= 0.1,
            format!("{env}: shadowing std {std}"),
        )?;

        let mut rng = ChaCha8Rng::seed_from_u64(200 + env as u64);
        let m = 1_000_000;
        let mut sum = 0.0;
        for _ in 0..m {
            sum += small_scale_power_gain(&profile, 200.0, &mut rng).map_err(|e| e.to_string())?;
        }
        let power = sum / m as f64;
        ensure(
            (power - 1.0).abs() <= 0.01,
            format!("{env}: E|h|^2 = {power}"),
        )?;
        parts.push(format!("{env} std {std:.3} dB, E|h|^2 {power:.4}"));
    }
    Ok(parts.join("; "))
}

fn main() -> ExitCode {
    let pool = thread_pool(None).expect("thread pool");
    let criteria: Vec<Criterion> = vec![
        (
            "1 delay is 120 ms at every speed",
            Box::new(|| c1_delay(&pool)),
        ),
        (
            "2 start point non-decreasing in H0",
            Box::new(|| c2_offset_monotone(&pool)),
        ),
        (
            "3 start point at 500 >= 100 km/h - 1 snapshot",
            Box::new(|| c3_speed_trend(&pool)),
        ),
        ("4 ICI never improves SINR; Eq. (1) gap", Box::new(c4_ici)),
        ("5 ICI lower bound <= upper bound", Box::new(c5_bounds)),
        (
            "6 postponement classification vs A3 oracle",
            Box::new(c6_classify),
        ),
        (
            "7 L1/L3 filters vs direct implementation",
            Box::new(c7_filters),
        ),
        ("8 TTT precedes every report", Box::new(c8_ttt)),
        (
            "9 sweep output independent of threads",
            Box::new(c9_determinism),
        ),
        ("10 shadowing and fading moments", Box::new(c10_moments)),
    ];

    let mut failed = 0;
    for (name, check) in &criteria {
        let started = Instant::now();
        let result = check();
        let secs = started.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {name} [{secs:.1} s]: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name} [{secs:.1} s]: {why}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
