use autoland_core::airframe::{
    derivatives, dcm_to_euler, euler_to_dcm, step, trim, AircraftState, AirframeParams, ControlInput, GRAVITY,
};
use autoland_core::Error;
use proptest::prelude::*;

fn approach_trim() -> (AircraftState, ControlInput) {
    trim(&AirframeParams::default(), 50.0, -3.0).unwrap()
}

fn max_abs(d: &AircraftState) -> f64 {
    d.to_array().iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

// Independent residual: body forces rebuilt from wind-axis lift and drag.
fn wind_axis_residual(p: &AirframeParams, s: &AircraftState, i: &ControlInput) -> (f64, f64, f64) {
    let c = &p.aero;
    let v = (s.u * s.u + s.w * s.w).sqrt();
    let alpha = s.w.atan2(s.u);
    let de = i.delta_e.to_radians();
    let qbar_s = 0.5 * p.air_density * v * v * p.wing_area;
    let lift = qbar_s * (c.cl_0 + c.cl_alpha * alpha + c.cl_de * de);
    let drag = qbar_s * (c.cd_0 + c.cd_alpha * alpha);
    let gamma = (s.theta.to_radians()) - alpha;
    // Along and normal to the flight path.
    let along = i.delta_t * alpha.cos() - drag - p.mass * GRAVITY * gamma.sin();
    let normal = lift + i.delta_t * alpha.sin() - p.mass * GRAVITY * gamma.cos();
    let pitch = qbar_s * p.chord * (c.cm_0 + c.cm_alpha * alpha + c.cm_de * de);
    (along, normal, pitch)
}

#[test]
fn approach_trim_balances_forces_independently() {
    let p = AirframeParams::default();
    let (s, i) = approach_trim();
    let (along, normal, pitch) = wind_axis_residual(&p, &s, &i);
    assert!(along.abs() < 1e-5, "along-path force {along}");
    assert!(normal.abs() < 1e-5, "normal force {normal}");
    assert!(pitch.abs() < 1e-5, "pitching moment {pitch}");
    assert!(max_abs(&derivatives(&s, &i, &p).unwrap().0.with_position_zeroed()) < 1e-6);
}

trait ZeroPos {
    fn with_position_zeroed(self) -> Self;
}

impl ZeroPos for AircraftState {
    fn with_position_zeroed(self) -> Self {
        AircraftState { x: 0.0, y: 0.0, h: 0.0, ..self }
    }
}

#[test]
fn approach_trim_flies_the_glideslope() {
    let p = AirframeParams::default();
    let (s, i) = approach_trim();
    assert!((s.airspeed() - 50.0).abs() < 1e-9);
    let d = derivatives(&s, &i, &p).unwrap().0;
    // Flight path angle from the navigation rates.
    let fpa = (d.h / -d.x).atan().to_degrees();
    assert!((fpa + 3.0).abs() < 1e-6, "flight path {fpa}");
    assert!(i.is_within(&p.limits));
    assert_eq!((s.v, s.p, s.r, s.phi, s.psi), (0.0, 0.0, 0.0, 0.0, 0.0));
    assert_eq!((i.delta_a, i.delta_r), (0.0, 0.0));
}

#[test]
fn level_trim_has_no_climb_rate() {
    let p = AirframeParams::default();
    let (s, i) = trim(&p, 50.0, 0.0).unwrap();
    let d = derivatives(&s, &i, &p).unwrap().0;
    assert!(d.h.abs() < 1e-6);
    assert!(max_abs(&d.with_position_zeroed()) < 1e-6);
}

#[test]
fn unreachable_trim_reports_failure() {
    let p = AirframeParams::default();
    assert!(matches!(trim(&p, 50.0, 25.0), Err(Error::TrimNotFound { .. })));
}

#[test]
fn symmetric_state_has_no_lateral_rates() {
    let p = AirframeParams::default();
    let s = AircraftState {
        u: 48.0,
        w: 4.0,
        q: 1.5,
        theta: 2.0,
        x: 900.0,
        h: 300.0,
        ..Default::default()
    };
    let i = ControlInput {
        delta_t: 4000.0,
        delta_e: 2.0,
        ..Default::default()
    };
    let d = derivatives(&s, &i, &p).unwrap().0;
    assert_eq!([d.v, d.p, d.r, d.phi, d.psi, d.y], [0.0; 6]);
}

#[test]
fn more_thrust_accelerates() {
    let p = AirframeParams::default();
    let (s, i) = approach_trim();
    let a = derivatives(&s, &i, &p).unwrap().0.u;
    let doubled = ControlInput {
        delta_t: 2.0 * i.delta_t,
        ..i
    };
    assert!(derivatives(&s, &doubled, &p).unwrap().0.u > a);
}

fn perturbed() -> (AircraftState, ControlInput) {
    let (mut s, mut i) = approach_trim();
    s.v = 1.0;
    s.p = 3.0;
    s.r = -2.0;
    s.q = 1.0;
    s.phi = 5.0;
    s.psi = 2.0;
    s.x = 1500.0;
    s.h = 340.0;
    i.delta_a = 3.0;
    i.delta_r = -2.0;
    i.delta_e = 1.0;
    (s, i)
}

fn diff(a: &AircraftState, b: &AircraftState) -> f64 {
    a.to_array()
        .iter()
        .zip(b.to_array())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn euler_consistency_is_second_order() {
    let p = AirframeParams::default();
    let (s, i) = perturbed();
    let d = derivatives(&s, &i, &p).unwrap().0;
    let defect = |dt: f64| {
        let n = step(&s, &i, &p, dt).unwrap();
        let mut e = 0.0f64;
        for ((a, b), k) in n.to_array().iter().zip(s.to_array()).zip(d.to_array()) {
            e = e.max((a - b - dt * k).abs());
        }
        e
    };
    let ratio = defect(0.02) / defect(0.01);
    assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
}

#[test]
fn rk4_local_error_is_fifth_order() {
    let p = AirframeParams::default();
    let (s, i) = perturbed();
    let gap = |dt: f64| {
        let full = step(&s, &i, &p, dt).unwrap();
        let half = step(&step(&s, &i, &p, dt / 2.0).unwrap(), &i, &p, dt / 2.0).unwrap();
        diff(&full, &half)
    };
    let ratio = gap(0.08) / gap(0.04);
    // Local error O(dt^5): halving dt shrinks the gap by about 32.
    assert!(ratio > 20.0 && ratio < 45.0, "ratio {ratio}");
}

#[test]
fn trim_holds_open_loop() {
    let p = AirframeParams::default();
    let (s0, i) = approach_trim();
    let mut s = s0;
    for _ in 0..1000 {
        s = step(&s, &i, &p, 0.01).unwrap();
    }
    assert!((s.u - s0.u).abs() < 0.1 && (s.w - s0.w).abs() < 0.1 && (s.v - s0.v).abs() < 0.1);
    for (a, b) in [(s.theta, s0.theta), (s.phi, s0.phi), (s.psi, s0.psi)] {
        assert!((a - b).abs() < 0.1);
    }
}

#[test]
fn integration_is_deterministic() {
    let p = AirframeParams::default();
    let (s0, i) = perturbed();
    let run = || {
        let mut s = s0;
        let mut out = Vec::new();
        for _ in 0..200 {
            s = step(&s, &i, &p, 0.05).unwrap();
            out.push(s);
        }
        out
    };
    assert_eq!(run(), run());
}

#[test]
fn mirrored_trajectory() {
    let p = AirframeParams::default();
    let (s0, i) = perturbed();
    let (mut a, mut b) = (s0, s0.mirrored());
    let im = i.mirrored();
    for _ in 0..200 {
        a = step(&a, &i, &p, 0.05).unwrap();
        b = step(&b, &im, &p, 0.05).unwrap();
        assert!(diff(&a.mirrored(), &b) < 1e-9);
    }
}

#[test]
fn unpowered_flight_loses_energy() {
    let p = AirframeParams::default();
    let (mut s, mut i) = approach_trim();
    i.delta_t = 0.0;
    s.h = 600.0;
    let energy = |s: &AircraftState| {
        let v2 = s.u * s.u + s.v * s.v + s.w * s.w;
        let rot = 0.5 * (p.ixx * s.p.to_radians().powi(2) + p.iyy * s.q.to_radians().powi(2) + p.izz * s.r.to_radians().powi(2));
        0.5 * p.mass * v2 + rot + p.mass * GRAVITY * s.h
    };
    let dt = 0.05;
    for _ in 0..400 {
        let n = step(&s, &i, &p, dt).unwrap();
        let (e0, e1) = (energy(&s), energy(&n));
        assert!(e1 <= e0 * (1.0 + 1e-3 * dt), "energy rose from {e0} to {e1}");
        s = n;
    }
}

#[test]
fn rejects_bad_inputs() {
    let p = AirframeParams::default();
    let (s, i) = approach_trim();
    assert!(matches!(step(&s, &i, &p, 0.0), Err(Error::InvalidArg(_))));
    assert!(matches!(step(&s, &i, &p, 0.11), Err(Error::InvalidArg(_))));
    let nan = AircraftState { u: f64::NAN, ..s };
    assert!(matches!(derivatives(&nan, &i, &p), Err(Error::Numerical(_))));
    let bad = AirframeParams { mass: 0.0, ..p };
    assert!(matches!(trim(&bad, 50.0, -3.0), Err(Error::Config(_))));
}

proptest! {
    #[test]
    fn dcm_is_rotation_and_inverts(phi in -85.0f64..85.0, theta in -85.0f64..85.0, psi in -179.9f64..179.9) {
        let c = euler_to_dcm(phi, theta, psi);
        prop_assert!((c.determinant() - 1.0).abs() < 1e-12);
        prop_assert!((c * c.transpose() - nalgebra::Matrix3::identity()).amax() < 1e-12);
        let (a, b, g) = dcm_to_euler(&c);
        prop_assert!((a - phi).abs() < 1e-8 && (b - theta).abs() < 1e-8 && (g - psi).abs() < 1e-8);
    }

    #[test]
    fn derivatives_commute_with_mirroring(
        v in -3.0f64..3.0, p in -10.0f64..10.0, r in -10.0f64..10.0,
        phi in -30.0f64..30.0, psi in -20.0f64..20.0, y in -50.0f64..50.0,
        da in -20.0f64..20.0, dr in -27.0f64..27.0,
    ) {
        let params = AirframeParams::default();
        let (mut s, mut i) = approach_trim();
        s.v = v; s.p = p; s.r = r; s.phi = phi; s.psi = psi; s.y = y;
        i.delta_a = da; i.delta_r = dr;
        let a = derivatives(&s, &i, &params).unwrap().0;
        let b = derivatives(&s.mirrored(), &i.mirrored(), &params).unwrap().0;
        prop_assert!(diff(&a.mirrored(), &b) < 1e-9);
    }

    #[test]
    fn step_output_stays_in_attitude_envelope(dt in 0.001f64..0.1) {
        let params = AirframeParams::default();
        let (s, i) = perturbed();
        let n = step(&s, &i, &params, dt).unwrap();
        prop_assert!(n.is_finite());
        prop_assert!(n.psi >= -180.0 && n.psi < 180.0);
    }
}
