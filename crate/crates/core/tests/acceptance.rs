//! Acceptance criteria 1–10, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines always reach stdout.

use std::time::{Duration, Instant};

use palprender_core::characterization::{
    eval_inverse, fit_bubble_powerlaw, fit_platform_poly, invert_bubble, BubbleModel, PlatformModel,
};
use palprender_core::config::Config;
use palprender_core::metrics::{
    augmentation_report, classify_lump_plans, classify_lump_traces, tracking_report, LumpChoice,
};
use palprender_core::recording::{
    resample_to_100hz, synth_profile, synth_trial, total_force, ForceGrid, SampleRate,
};
use palprender_core::reference;
use palprender_core::rendering::{
    hertz_force, plan_hybrid_a, plan_hybrid_b, plan_platform_only, position_mapping, HertzParams,
    HybridBMode, RenderPlan, Strategy,
};
use palprender_core::segmentation::segment_pokes;
use palprender_core::simulator::{run_simulation, write_trace, SimConfig, SimTrace};
use palprender_core::{recording::TrialRecording, TICK_S};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cfg() -> Config {
    Config::reference()
}

fn plan(strategy: Strategy, trial: &TrialRecording, mode: HybridBMode) -> RenderPlan {
    let c = cfg();
    let m = reference::device_models();
    match strategy {
        Strategy::PlatformOnly => plan_platform_only(trial),
        Strategy::HybridA => plan_hybrid_a(trial, &m, &c.hertz, &c.render).unwrap(),
        Strategy::HybridB => {
            let events = segment_pokes(trial, &c.segmentation).unwrap();
            plan_hybrid_b(trial, &m, &c.hertz, &c.render, &events, mode).unwrap()
        }
    }
}

fn simulate(p: &RenderPlan, sim: &SimConfig) -> SimTrace {
    run_simulation(p, &reference::device_models(), sim, 7).unwrap()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn c1_platform_only_tracking() -> Check {
    let session = reference::session().unwrap();
    let (trace, dt) = timed(|| {
        simulate(
            &plan(Strategy::PlatformOnly, &session, HybridBMode::Preloaded),
            &cfg().sim,
        )
    });
    let r = tracking_report(&trace).unwrap();
    ensure(
        r.rmse <= 0.30 && r.pearson_r >= 0.99 && dt.as_secs_f64() < 1.0,
        format!(
            "rmse={:.4} N r={:.4} runtime={:.3} s",
            r.rmse,
            r.pearson_r,
            dt.as_secs_f64()
        ),
    )
}

fn c2_hybrid_position_tracking() -> Check {
    let session = reference::session().unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for s in [Strategy::HybridA, Strategy::HybridB] {
        let (trace, dt) =
            timed(|| simulate(&plan(s, &session, HybridBMode::Preloaded), &cfg().sim));
        let r = tracking_report(&trace).unwrap();
        ok &= r.rmse <= 1.31 && r.pearson_r >= 0.93 && dt.as_secs_f64() < 1.0;
        parts.push(format!(
            "{s}: rmse={:.4} mm r={:.4} runtime={:.3} s",
            r.rmse,
            r.pearson_r,
            dt.as_secs_f64()
        ));
    }
    ensure(ok, parts.join("; "))
}

fn c3_augmentation() -> Check {
    let session = reference::session().unwrap();
    let sim = cfg().sim;
    let off = SimConfig {
        bubble_enabled: false,
        ..sim
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for s in [Strategy::HybridA, Strategy::HybridB] {
        let p = plan(s, &session, HybridBMode::Preloaded);
        let a = augmentation_report(&simulate(&p, &sim), &simulate(&p, &off)).unwrap();
        ok &= (a.baseline_peak - 1.79).abs() <= 0.05
            && a.augmented_peak >= 2.60
            && (0.85..=1.05).contains(&a.bubble_contribution);
        parts.push(format!(
            "{s}: baseline={:.3} N augmented={:.3} N contribution={:.3} N",
            a.baseline_peak, a.augmented_peak, a.bubble_contribution
        ));
    }
    ensure(ok, parts.join("; "))
}

/// Ticks from each rise of the bubble command above zero to the first tick
/// where the bubble pressure starts climbing.
fn onset_lags(trace: &SimTrace) -> Vec<usize> {
    let rows = &trace.rows;
    let mut lags = Vec::new();
    for i in 1..rows.len() {
        if rows[i].bubble_cmd_kpa > 0.0 && rows[i - 1].bubble_cmd_kpa == 0.0 {
            if let Some(k) =
                (i..rows.len()).position(|j| rows[j].bubble_kpa > rows[j - 1].bubble_kpa)
            {
                lags.push(k);
            }
        }
    }
    lags
}

fn c4_latency() -> Check {
    let expected = (0.16465f64 / TICK_S).round() as usize;
    let session = reference::session().unwrap();
    let mut ok = expected == 16;
    let mut parts = vec![format!("expected {expected} ticks")];
    for s in [Strategy::HybridA, Strategy::HybridB] {
        let lags = onset_lags(&simulate(
            &plan(s, &session, HybridBMode::Preloaded),
            &cfg().sim,
        ));
        ok &= !lags.is_empty() && lags.iter().all(|l| *l == expected);
        parts.push(format!("{s}: lags {lags:?}"));
    }
    ensure(ok, parts.join("; "))
}

fn c5_fit_quality() -> Check {
    let mut ok = true;
    let mut worst_poly: f64 = 1.0;
    let mut worst_pow: f64 = 1.0;
    for seed in 0..10 {
        worst_poly = worst_poly.min(
            fit_platform_poly(&reference::platform_samples(seed))
                .unwrap()
                .r_squared,
        );
        worst_pow = worst_pow.min(
            fit_bubble_powerlaw(&reference::bubble_samples(seed))
                .unwrap()
                .r_squared,
        );
    }
    ok &= worst_poly >= 0.998 && worst_pow >= 0.998;

    let rel = |a: f64, b: f64| {
        if b == 0.0 {
            a.abs()
        } else {
            ((a - b) / b).abs()
        }
    };
    let mut worst_rec: f64 = 0.0;
    let xs: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
    for (k2, k1, k0) in [
        (0.01, 0.858, 0.0),
        (0.08, 0.2, 0.0),
        (-0.02, 1.3, 0.4),
        (0.0, 0.5, 0.1),
    ] {
        let m = PlatformModel::new(k2, k1, k0);
        let s: Vec<(f64, f64)> = xs.iter().map(|x| (*x, m.force(*x))).collect();
        let f = fit_platform_poly(&s).unwrap().model;
        for (got, want) in [(f.k2, k2), (f.k1, k1), (f.k0, k0)] {
            // zero coefficients compare absolutely
            worst_rec = worst_rec.max(if want == 0.0 {
                got.abs()
            } else {
                rel(got, want)
            });
        }
    }
    let ps: Vec<f64> = (1..=20).map(|i| i as f64 * 41.0 / 20.0).collect();
    for (a, b, c2) in [
        (1.175 / 41f64.powf(1.2), 1.2, 0.0),
        (0.03, 1.2, 0.033),
        (0.2, 0.5, 0.01),
        (0.001, 2.0, 0.0),
    ] {
        let m = BubbleModel::new(a, b, c2);
        let s: Vec<(f64, f64)> = ps.iter().map(|p| (*p, m.force(*p))).collect();
        let f = fit_bubble_powerlaw(&s).unwrap().model;
        for (got, want) in [(f.a, a), (f.b, b), (f.c2, c2)] {
            worst_rec = worst_rec.max(if want == 0.0 {
                got.abs()
            } else {
                rel(got, want)
            });
        }
    }
    ok &= worst_rec <= 1e-6;
    ensure(
        ok,
        format!("min R² poly={worst_poly:.5} power={worst_pow:.5}; worst noiseless recovery error={worst_rec:.2e}"),
    )
}

fn c6_segmentation() -> Check {
    let c = cfg();
    let mut worst: i64 = 0;
    let mut ok = true;
    let mut seeds = 0;
    for seed in 0..20u64 {
        for lump in [false, true] {
            let params = reference::trial_params(lump, seed);
            let profile = synth_profile(&params).unwrap();
            let trial = synth_trial(&params).unwrap();
            let events = segment_pokes(&trial, &c.segmentation).unwrap();
            if events.len() != 3 {
                ok = false;
                continue;
            }
            for (e, k) in events.iter().zip(&profile.knots) {
                let rest = profile.rest_depth;
                let speed_in = (k.peak_depth - rest) / (k.reach - k.start);
                let speed_out = (k.peak_depth - rest) / (k.end - k.leave);
                let t_in = k.start + (c.segmentation.d_contact - rest) / speed_in;
                let t_out = k.leave + (k.peak_depth - c.segmentation.d_contact) / speed_out;
                let truth = [
                    (t_in / TICK_S).ceil() as i64,
                    (k.reach / TICK_S).round() as i64,
                    (k.leave / TICK_S).round() as i64,
                    (t_out / TICK_S).floor() as i64,
                ];
                let Some((s0, s1)) = e.sustain else {
                    ok = false;
                    continue;
                };
                let got = [
                    e.start_index as i64,
                    s0 as i64,
                    s1 as i64,
                    e.end_index as i64,
                ];
                for (g, t) in got.iter().zip(truth) {
                    worst = worst.max((g - t).abs());
                }
            }
            let p = plan_hybrid_b(
                &trial,
                &reference::device_models(),
                &c.hertz,
                &c.render,
                &events,
                HybridBMode::Preloaded,
            )
            .unwrap();
            for e in &events {
                let vals: Vec<f64> = p.ticks[e.start_index..=e.end_index]
                    .iter()
                    .map(|t| t.bubble.value())
                    .collect();
                ok &= vals.iter().all(|v| *v == vals[0]);
            }
            seeds += 1;
        }
    }
    ok &= worst <= 1 && seeds == 40;
    ensure(
        ok,
        format!("{seeds}/40 trials with 3 events; worst boundary error {worst} samples; Hybrid B piecewise constant"),
    )
}

fn c7_position_mapping_contract() -> Check {
    let c = cfg();
    let m = reference::device_models();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut bad = 0;
    let mut worst_hom: f64 = 0.0;
    for _ in 0..10_000 {
        let d: f64 = rng.random_range(-10.0..10.0);
        let e_star: f64 = rng.random_range(0.005..0.5);
        let p = HertzParams::new(e_star);
        let x = position_mapping(d, &m.inverse, &p, &c.render).value;
        if d <= 0.0 {
            bad += usize::from(x != -6.0);
        } else {
            let full = eval_inverse(&m.inverse, hertz_force(&p, d)).value.max(0.0);
            let want = (c.render.attenuation * full).clamp(c.render.x_retract, c.render.x_max);
            bad += usize::from(x != want);
            let ratio = hertz_force(&p, 2.0 * d) / hertz_force(&p, d);
            worst_hom = worst_hom.max((ratio - 2f64.powf(1.5)).abs());
        }
    }
    bad += usize::from(position_mapping(0.0, &m.inverse, &c.hertz, &c.render).value != -6.0);
    ensure(
        bad == 0 && worst_hom <= 1e-9,
        format!("10000 depths, {bad} branch violations, worst homogeneity error {worst_hom:.1e}"),
    )
}

fn c8_determinism() -> Check {
    let session = reference::session().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    for s in Strategy::ALL {
        let p = plan(s, &session, HybridBMode::Preloaded);
        let mut paths = Vec::new();
        for run in 0..2 {
            let path = dir.path().join(format!("{s}-{run}.csv"));
            let trace = simulate(&p, &cfg().sim);
            write_trace(&trace, std::fs::File::create(&path).unwrap()).unwrap();
            paths.push(path);
        }
        ok &= std::fs::read(&paths[0]).unwrap() == std::fs::read(&paths[1]).unwrap();
    }
    ensure(
        ok,
        "trace files byte-identical across runs for all strategies".into(),
    )
}

fn c9_lump_classification() -> Check {
    let c = cfg();
    let m = reference::device_models();
    let mut correct = [0usize; 2];
    for seed in 0..50u64 {
        let (lump, clean) = reference::trial_pair(seed).unwrap();
        for (k, s) in [Strategy::HybridA, Strategy::HybridB]
            .into_iter()
            .enumerate()
        {
            let ev_l = segment_pokes(&lump, &c.segmentation).unwrap();
            let ev_c = segment_pokes(&clean, &c.segmentation).unwrap();
            let pl = plan(s, &lump, HybridBMode::Preloaded);
            let pc = plan(s, &clean, HybridBMode::Preloaded);
            // alternate presentation order
            let (first, second, want) = if seed % 2 == 0 {
                ((&pl, &ev_l[..]), (&pc, &ev_c[..]), LumpChoice::First)
            } else {
                ((&pc, &ev_c[..]), (&pl, &ev_l[..]), LumpChoice::Second)
            };
            let d = classify_lump_plans(first, second, &m.bubble, 0.1).unwrap();
            correct[k] += usize::from(d.choice == want);
        }
    }
    let lump = synth_trial(&reference::clean_trial_params(true)).unwrap();
    let clean = synth_trial(&reference::clean_trial_params(false)).unwrap();
    let sim = cfg().sim;
    let d = classify_lump_traces(
        &simulate(
            &plan(Strategy::PlatformOnly, &lump, HybridBMode::Preloaded),
            &sim,
        ),
        &simulate(
            &plan(Strategy::PlatformOnly, &clean, HybridBMode::Preloaded),
            &sim,
        ),
        0.1,
    )
    .unwrap();
    ensure(
        correct.iter().all(|n| *n * 100 >= 95 * 50)
            && d.choice == LumpChoice::First
            && (d.margin - 2.8).abs() <= 0.3,
        format!(
            "hybrid-a {}/50, hybrid-b {}/50 correct; platform-only peak margin {:.3} N",
            correct[0], correct[1], d.margin
        ),
    )
}

fn c10_round_trips_and_invariants() -> Check {
    let m = reference::device_models();
    let mut parts = Vec::new();
    let mut ok = true;

    let worst_inv = (0..=1000)
        .map(|i| {
            let x = i as f64 * 0.01;
            let f = m.platform.force(x);
            (m.platform.force(eval_inverse(&m.inverse, f).value) - f).abs()
        })
        .fold(0.0, f64::max);
    let worst_bub = (0..=410)
        .map(|i| {
            let p = i as f64 * 0.1;
            (invert_bubble(&m.bubble, m.bubble.force(p)).value - p).abs()
        })
        .fold(0.0, f64::max);
    ok &= worst_inv <= 0.02 && worst_bub <= 1e-9;
    parts.push(format!(
        "platform round trip {worst_inv:.4} N, bubble round trip {worst_bub:.1e} kPa"
    ));

    let mut params = reference::trial_params(true, 3);
    params.rate = SampleRate::Irregular {
        min_hz: 60.0,
        max_hz: 140.0,
    };
    let raw = synth_trial(&params).unwrap();
    let once = resample_to_100hz(&raw).unwrap();
    let twice = resample_to_100hz(&once).unwrap();
    ok &= once == twice;
    parts.push("resampling idempotent".into());

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut perm_ok = true;
    for _ in 0..1000 {
        let mut cells: Vec<f64> = (0..16).map(|_| rng.random_range(0.0..2.0)).collect();
        let a = total_force(&ForceGrid::from_row_major(&cells).unwrap());
        for i in (1..16).rev() {
            let j = rng.random_range(0..=i);
            cells.swap(i, j);
        }
        let b = total_force(&ForceGrid::from_row_major(&cells).unwrap());
        perm_ok &= (a - b).abs() <= 1e-12 * a.max(1.0);
    }
    ok &= perm_ok;
    parts.push("total-force permutation invariant".into());

    let session = reference::session().unwrap();
    let sim = cfg().sim;
    let mut teleport = 0;
    for s in Strategy::ALL {
        let trace = simulate(&plan(s, &session, HybridBMode::Preloaded), &sim);
        teleport += trace
            .rows
            .windows(2)
            .filter(|w| {
                (w[1].platform_mm - w[0].platform_mm).abs()
                    > sim.platform.max_speed * sim.dt + 1e-12
            })
            .count();
        teleport += trace
            .rows
            .iter()
            .filter(|r| r.total_n != r.platform_n + r.bubble_n)
            .count();
    }
    ok &= teleport == 0;
    parts.push(format!("{teleport} teleport/composition violations"));
    ensure(ok, parts.join("; "))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("platform-only force tracking", c1_platform_only_tracking),
        ("hybrid position tracking", c2_hybrid_position_tracking),
        ("bubble force augmentation", c3_augmentation),
        ("pneumatic latency", c4_latency),
        ("characterization fit quality", c5_fit_quality),
        ("segmentation and Hybrid B levels", c6_segmentation),
        ("position mapping contract", c7_position_mapping_contract),
        ("simulation determinism", c8_determinism),
        ("lump classification", c9_lump_classification),
        ("round trips and invariants", c10_round_trips_and_invariants),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag}  {name}: {detail}", i + 1);
    }
    let total = start.elapsed().as_secs_f64();
    println!(
        "acceptance: {} passed, {failed} failed in {total:.2} s",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
