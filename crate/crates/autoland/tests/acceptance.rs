//! End-to-end acceptance checks, one PASS/FAIL line per criterion.

mod common;

use std::process::Command;
use std::time::Instant;

use autoland::parallel;
use autoland::report::failure_extremity;
use autoland::trace_io::{load_trace, save_trace};
use autoland_core::control::{
    lateral_control, longitudinal_control, ControllerMemory, LateralFeedback, LateralGains, LongitudinalFeedback,
    LongitudinalGains,
};
use autoland_core::falsify::{
    falsify_random, replay, Candidate, Channel, FalsifierConfig, RandomSearch, SweepConfig, ToleranceResult,
};
use autoland_core::guidance::glideslope_altitude;
use autoland_core::perception::{CameraModel, EstimatorConfig, PoseEstimate, VisionEstimator};
use autoland_core::specs::{eval_final_approach, SpecParams, SpecSample};
use autoland_core::trace::compute_error_stats;
use autoland_core::{run_landing, simulate, AircraftState, FeedbackSource, RunwayGeometry, Scenario, SpecId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn nominal_landing() -> Outcome {
    let start = Instant::now();
    let landing = run_landing(&Scenario::default()).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let v = &landing.verdict;
    check(v.holds, "approach requirements not satisfied")?;
    check(v.robustness > 0.0, format!("robustness {}", v.robustness))?;
    check(secs < 10.0, format!("took {secs:.2} s"))?;
    Ok(format!("robustness {:.4}, {:.3} s", v.robustness, secs))
}

fn controller_arithmetic() -> Outcome {
    let lat = LateralGains::default();
    let lon = LongitudinalGains::default();
    let mut m = ControllerMemory::default();
    let (dr, _) = lateral_control(&LateralFeedback { psi: 2.0, y: 4.0, phi: 0.0 }, &mut m, &lat).unwrap();
    check((dr + 4.0).abs() < 1e-9, format!("rudder {dr}"))?;
    let nominal = LongitudinalFeedback {
        u: 50.0,
        theta: 0.0,
        q: 0.0,
        x: 600.0,
        h: glideslope_altitude(600.0, lon.h_threshold, lon.gamma),
    };
    let mut m = ControllerMemory::default();
    let (dt, de) = longitudinal_control(&nominal, &mut m, &lon).unwrap();
    check((dt - 5000.0).abs() < 1e-9 && de.abs() < 1e-9, format!("thrust {dt}, elevator {de}"))?;
    let mut m = ControllerMemory::default();
    let high = LongitudinalFeedback { h: nominal.h + 1.0, ..nominal };
    let (_, de) = longitudinal_control(&high, &mut m, &lon).unwrap();
    check((de + 2.4).abs() < 1e-9, format!("elevator {de} for 1 m high"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut m = ControllerMemory::default();
    let wide = |rng: &mut ChaCha8Rng| rng.random_range(-1.0..1.0) * 10f64.powi(rng.random_range(-2..5));
    for _ in 0..100_000 {
        let (dr, da) = lateral_control(
            &LateralFeedback { psi: wide(&mut rng), y: wide(&mut rng), phi: wide(&mut rng) },
            &mut m,
            &lat,
        )
        .unwrap();
        let fb = LongitudinalFeedback {
            u: wide(&mut rng),
            theta: wide(&mut rng),
            q: wide(&mut rng),
            x: wide(&mut rng),
            h: wide(&mut rng),
        };
        let (dt, de) = longitudinal_control(&fb, &mut m, &lon).unwrap();
        check(lat.rudder.contains(dr) && lat.aileron.contains(da), "lateral command left its limits")?;
        check(lon.thrust.contains(dt) && lon.elevator.contains(de), "longitudinal command left its limits")?;
    }
    Ok("hand examples exact, 1e5 random inputs within limits".into())
}

fn glideslope_formula() -> Outcome {
    let g = LongitudinalGains::default();
    let h0 = g.commanded_altitude(0.0);
    check(h0 == 259.51, format!("h_c(0) = {h0}"))?;
    let slope = 3.0f64.to_radians().tan();
    for (a, b) in [(0.0, 800.0), (150.0, 2000.0), (-30.0, 40.0)] {
        let d = g.commanded_altitude(b) - g.commanded_altitude(a);
        check((d - (b - a) * slope).abs() <= 1e-12 * (b - a).abs().max(1.0) * 10.0, format!("slope off by {}", d - (b - a) * slope))?;
    }
    Ok(format!("h_c(0) = {h0} m"))
}

fn direct(s: &SpecSample, p: &SpecParams) -> bool {
    let t = |d: f64| d.to_radians().tan();
    let c = p.u_c * p.v_so.unwrap();
    (c - p.u_l..=c + p.u_u).contains(&s.u)
        && s.v.abs() <= p.delta_v
        && p.w_l <= s.w
        && s.w <= p.w_u * t(p.alpha) * s.u
        && s.y.abs() <= (s.x + p.d_r) * t(p.beta)
        && (s.x + p.d - p.t_range) * t(p.alpha - p.alpha_h) <= s.h_agl
        && s.h_agl <= (s.x + p.d + p.t_range) * t(p.alpha + p.alpha_h)
}

fn monitor_soundness() -> Outcome {
    let p = Scenario::default().specs;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let start = Instant::now();
    let mut compared = 0;
    for _ in 0..1000 {
        let h0 = rng.random_range(0.0..60.0);
        let h1 = rng.random_range(-5.0..40.0);
        let x0 = rng.random_range(100.0..800.0);
        let trace: Vec<SpecSample> = (0..50)
            .map(|k| {
                let f = k as f64 / 49.0;
                SpecSample {
                    time: 0.05 * k as f64,
                    u: rng.random_range(46.5..56.0),
                    v: rng.random_range(-1.6..1.6),
                    w: rng.random_range(-0.05..5.6),
                    x: x0 * (1.0 - f),
                    y: rng.random_range(-20.0..20.0),
                    h_agl: h0 + (h1 - h0) * f + rng.random_range(-2.0..2.0),
                }
            })
            .collect();
        let v = eval_final_approach(&trace, &p).map_err(|e| e.to_string())?;
        let oracle = (0..trace.len()).any(|k| trace[k].h_agl <= p.h_f && trace[..k].iter().all(|s| direct(s, &p)));
        if v.robustness != 0.0 {
            compared += 1;
            check((v.robustness > 0.0) == oracle, format!("sign disagrees at robustness {}", v.robustness))?;
        }
        check(v.holds == oracle, "boolean verdict disagrees")?;
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 5.0, format!("took {secs:.2} s"))?;
    Ok(format!("{compared} signs agree, {secs:.3} s"))
}

fn pose_error(e: &PoseEstimate, s: &AircraftState) -> f64 {
    [e.x - s.x, e.y - s.y, e.h - s.h, e.theta - s.theta, e.phi - s.phi, e.psi - s.psi]
        .iter()
        .fold(0.0, |m, v| m.max(v.abs()))
}

fn glideslope_state(rng: &mut ChaCha8Rng, x: f64) -> AircraftState {
    let r = RunwayGeometry::default();
    AircraftState {
        u: 50.0,
        phi: rng.random_range(-4.0..4.0),
        theta: rng.random_range(-3.0..2.0),
        psi: rng.random_range(-4.0..4.0),
        x,
        y: rng.random_range(-8.0..8.0),
        h: r.h_threshold() + x * r.gamma.to_radians().tan() + rng.random_range(-4.0..4.0),
        ..Default::default()
    }
}

fn perception_round_trip() -> Outcome {
    let r = RunwayGeometry::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for k in 0..30 {
        let s = glideslope_state(&mut rng, 20.0 + 780.0 * k as f64 / 29.0);
        let mut est = VisionEstimator::new(CameraModel::default(), r, EstimatorConfig::default(), 0.05);
        let e = est.perceive::<ChaCha8Rng>(&s, None, None).map_err(|e| format!("x = {:.0}: {e}", s.x))?;
        worst = worst.max(pose_error(&e, &s));
    }
    check(worst <= 1e-6, format!("noiseless error {worst:e}"))?;

    let sigmas = [0.1, 0.5, 1.0, 2.0, 4.0];
    let mut medians = Vec::new();
    for &sigma in &sigmas {
        let cam = CameraModel { pixel_sigma: sigma, ..CameraModel::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        let mut errs = Vec::with_capacity(100);
        for _ in 0..100 {
            let x = rng.random_range(20.0..800.0);
            let s = glideslope_state(&mut rng, x);
            let mut est = VisionEstimator::new(cam, r, EstimatorConfig::default(), 0.05);
            if let Ok(e) = est.perceive(&s, None, Some(&mut rng)) {
                errs.push(((e.x - s.x).powi(2) + (e.y - s.y).powi(2) + (e.h - s.h).powi(2)).sqrt());
            }
        }
        errs.sort_by(f64::total_cmp);
        medians.push(errs[errs.len() / 2]);
    }
    let rank = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|a, b| v[*a].total_cmp(&v[*b]));
        let mut r = vec![0.0; v.len()];
        idx.into_iter().enumerate().for_each(|(k, i)| r[i] = k as f64);
        r
    };
    let rm = rank(&medians);
    let n = rm.len() as f64;
    let d2: f64 = rm.iter().enumerate().map(|(i, r)| (r - i as f64).powi(2)).sum();
    let rho = 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
    check(medians.windows(2).all(|w| w[1] >= w[0]), format!("medians not monotone: {medians:?}"))?;
    check(rho > 0.0, format!("Spearman rho {rho}"))?;
    Ok(format!(
        "worst noiseless error {worst:.1e}, position medians {:?} m, rho {rho:.2}",
        medians.iter().map(|m| (m * 1000.0).round() / 1000.0).collect::<Vec<_>>()
    ))
}

fn barometer_direction() -> Outcome {
    let mut parts = Vec::new();
    for seed in 0..4 {
        let err = |f: FeedbackSource| -> Result<f64, String> {
            let s = Scenario::default().with_feedback(f).with_seed(seed);
            let flight = simulate(&s, None).map_err(|e| e.to_string())?;
            Ok(compute_error_stats(&flight.trace).map_err(|e| e.to_string())?.h.mean)
        };
        let vision = err(FeedbackSource::Vision)?;
        let baro = err(FeedbackSource::VisionBaro)?;
        check(baro <= vision, format!("seed {seed}: baro {baro:.4} m > vision {vision:.4} m"))?;
        parts.push(format!("{vision:.3} -> {baro:.3}"));
    }
    Ok(format!("h mean abs error (m) by seed: {}", parts.join(", ")))
}

fn expected_spec(c: Channel) -> SpecId {
    match c {
        Channel::U => SpecId::Phi1,
        Channel::Y | Channel::Phi | Channel::Psi => SpecId::Phi2,
        _ => SpecId::Phi3,
    }
}

fn spec_channel_mapping(results: &mut Vec<ToleranceResult>) -> Outcome {
    let start = Instant::now();
    *results = parallel::tolerance_searches(&Scenario::default(), &Channel::ALL, &FalsifierConfig::default())
        .map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let mut matched = 0;
    let mut parts = Vec::new();
    for r in results.iter() {
        let ok = r.first_failed == Some(expected_spec(r.channel));
        matched += ok as usize;
        parts.push(format!(
            "{}->{}{}",
            r.channel,
            r.first_failed.map_or("none".to_string(), |s| s.to_string()),
            if ok { "" } else { "(x)" }
        ));
    }
    check(matched >= 6, format!("only {matched}/8 match: {}", parts.join(" ")))?;
    check(secs < 900.0, format!("took {secs:.0} s"))?;
    Ok(format!("{matched}/8 match [{}], {secs:.1} s", parts.join(" ")))
}

fn ic_sweep_criterion() -> Outcome {
    let cfg = SweepConfig::default();
    let start = Instant::now();
    let truth = parallel::ic_sweep(&Scenario::default(), &cfg).map_err(|e| e.to_string())?;
    let t_truth = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let vision = parallel::ic_sweep(&Scenario::default().with_feedback(FeedbackSource::Vision), &cfg)
        .map_err(|e| e.to_string())?;
    let t_vision = start.elapsed().as_secs_f64();
    check(truth.cells.len() == 441, format!("{} cells", truth.cells.len()))?;
    check(t_truth < 600.0 && t_vision < 600.0, format!("took {t_truth:.0} s and {t_vision:.0} s"))?;
    let centre = truth
        .cells
        .iter()
        .find(|c| c.dy_req == 0.0 && c.dh_req == 0.0)
        .ok_or("no centre cell")?;
    check(centre.overall, "centre cell falsified")?;
    let (nt, nv) = (truth.satisfied_count(), vision.satisfied_count());
    check(nv <= nt, format!("vision {nv} > ground truth {nt}"))?;
    for (map, name) in [(&truth, "ground truth"), (&vision, "vision")] {
        for (spec, lateral) in [(SpecId::Phi2, true), (SpecId::Phi3, false)] {
            if let (Some(fail), Some(pass)) = failure_extremity(map, spec, lateral) {
                check(fail > pass, format!("{name}: {spec} failing cells not at the extremes ({fail:.2} vs {pass:.2})"))?;
            }
        }
    }
    let (f2, p2) = failure_extremity(&truth, SpecId::Phi2, true);
    let (f3, p3) = failure_extremity(&truth, SpecId::Phi3, false);
    check(f2.is_some() && f3.is_some(), "no phi2 or phi3 failures to locate")?;
    Ok(format!(
        "satisfied {nt} ground truth, {nv} vision; mean |dy| phi2 fail/pass {:.1}/{:.1}, mean |dh| phi3 fail/pass {:.1}/{:.1}; {t_truth:.1} s + {t_vision:.1} s",
        f2.unwrap(),
        p2.unwrap_or(0.0),
        f3.unwrap(),
        p3.unwrap_or(0.0)
    ))
}

fn reproducibility(results: &[ToleranceResult]) -> Outcome {
    let s = Scenario::default();
    let mut replayed = 0;
    for r in results {
        if let Some(cex) = &r.counterexample {
            let again = replay(&s, &cex.candidate).map_err(|e| e.to_string())?;
            check(again == cex.evaluation, format!("{} counterexample changed on replay", r.channel))?;
            check(again.robustness.to_bits() == cex.evaluation.robustness.to_bits(), "robustness bits differ")?;
            replayed += 1;
        }
    }
    let search = RandomSearch { seed: 11, budget: 6, control_points: 5, offsets: Some(((-6.0, 6.0), (-6.0, 6.0))) };
    let vis = s.clone().with_feedback(FeedbackSource::VisionBaro);
    let report = falsify_random(&vis, &[(Channel::Psi, 1.0), (Channel::H, 0.1)], &search).map_err(|e| e.to_string())?;
    let again = falsify_random(&vis, &[(Channel::Psi, 1.0), (Channel::H, 0.1)], &search).map_err(|e| e.to_string())?;
    check(report == again, "random search differs between runs")?;
    check(replay(&vis, &report.best).map_err(|e| e.to_string())? == report.best_evaluation, "vision replay differs")?;
    let cell = Candidate { noise: None, dy: 7.0, dh: -9.0, seed: 5 };
    check(
        replay(&vis, &cell).map_err(|e| e.to_string())? == replay(&vis, &cell).map_err(|e| e.to_string())?,
        "cell replay differs",
    )?;
    Ok(format!("{replayed} tolerance counterexamples and a vision random search replayed bit-exactly"))
}

fn trace_round_trip() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for k in 0..100 {
        let t = common::random_trace(&mut rng);
        let path = dir.path().join(format!("t{k}.csv"));
        save_trace(&path, &t, None).map_err(|e| e.to_string())?;
        let back = load_trace(&path).map_err(|e| e.to_string())?.into_flight_trace().map_err(|e| e.to_string())?;
        check(back == t, format!("trace {k} changed on reload"))?;
    }
    let bin = env!("CARGO_BIN_EXE_autoland");
    let run = |args: &[&str]| {
        Command::new(bin).args(args).current_dir(dir.path()).output().map_err(|e| e.to_string())
    };
    let mut embedded = Vec::new();
    for (feedback, dy) in [("ground_truth", "0"), ("vision_baro", "3"), ("ground_truth", "-9")] {
        let sim = run(&["simulate", "--feedback", feedback, "--dy", dy, "--out", "sim"])?;
        let mon = run(&["monitor-trace", "sim/trace.csv", "--out", "mon"])?;
        let text = String::from_utf8_lossy(&mon.stdout);
        check(text.contains("reproduced"), format!("{feedback} dy {dy}: verdict not reproduced"))?;
        check(sim.status.code() == mon.status.code(), "exit codes differ")?;
        embedded.push(format!("{feedback}/dy {dy}: exit {}", mon.status.code().unwrap_or(-1)));
    }
    Ok(format!("100 random traces identical; monitor reproduces {}", embedded.join(", ")))
}

fn main() {
    let mut tolerance = Vec::new();
    let outcomes: Vec<(&str, Outcome)> = vec![
        ("nominal landing", nominal_landing()),
        ("controller arithmetic", controller_arithmetic()),
        ("glideslope formula", glideslope_formula()),
        ("monitor soundness", monitor_soundness()),
        ("perception round trip", perception_round_trip()),
        ("barometer fusion direction", barometer_direction()),
        ("spec-to-channel mapping", spec_channel_mapping(&mut tolerance)),
        ("initial-condition sweep", ic_sweep_criterion()),
        ("reproducibility", reproducibility(&tolerance)),
        ("trace round trip", trace_round_trip()),
    ];
    let mut failed = 0;
    for (k, (name, outcome)) in outcomes.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
