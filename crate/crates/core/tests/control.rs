use autoland_core::control::{
    lateral_control, longitudinal_control, saturate, Autopilot, ControllerMemory, Feedback, LateralFeedback,
    LateralGains, LongitudinalFeedback, LongitudinalGains,
};
use autoland_core::Error;
use proptest::prelude::*;

fn nominal_long(g: &LongitudinalGains) -> LongitudinalFeedback {
    LongitudinalFeedback {
        u: 50.0,
        theta: 0.0,
        q: 0.0,
        x: 600.0,
        h: g.commanded_altitude(600.0),
    }
}

#[test]
fn saturation_examples() {
    assert_eq!(saturate(5.0, -27.0, 27.0).unwrap(), 5.0);
    assert_eq!(saturate(-50.0, -20.0, 20.0).unwrap(), -20.0);
    assert_eq!(saturate(27.0, -27.0, 27.0).unwrap(), 27.0);
    assert!(matches!(saturate(1.0, 2.0, 1.0), Err(Error::InvalidArg(_))));
}

#[test]
fn lateral_examples() {
    let g = LateralGains::default();
    let mut m = ControllerMemory::default();
    assert_eq!(lateral_control(&LateralFeedback::default(), &mut m, &g).unwrap(), (0.0, 0.0));

    let mut m = ControllerMemory::default();
    let fb = LateralFeedback {
        psi: 2.0,
        y: 4.0,
        phi: 0.0,
    };
    let (dr, da) = lateral_control(&fb, &mut m, &g).unwrap();
    assert!((dr - -4.0).abs() < 1e-9);
    assert_eq!(da, 0.0);

    let mut m = ControllerMemory::default();
    let far = LateralFeedback {
        y: 1000.0,
        ..Default::default()
    };
    assert_eq!(lateral_control(&far, &mut m, &g).unwrap().0, -27.0);
}

#[test]
fn longitudinal_examples() {
    let g = LongitudinalGains::default();
    let mut m = ControllerMemory::default();
    let (dt, de) = longitudinal_control(&nominal_long(&g), &mut m, &g).unwrap();
    assert!((dt - 5000.0).abs() < 1e-9);
    assert!(de.abs() < 1e-9);

    let mut m = ControllerMemory::default();
    let fast = LongitudinalFeedback {
        u: 200.0,
        ..nominal_long(&g)
    };
    assert_eq!(longitudinal_control(&fast, &mut m, &g).unwrap().0, 0.0);

    let mut m = ControllerMemory::default();
    let mut high = nominal_long(&g);
    high.h += 1.0;
    let (_, de) = longitudinal_control(&high, &mut m, &g).unwrap();
    assert!((de - -2.4).abs() < 1e-9, "{de}");
}

#[test]
fn sums_accumulate_every_sample() {
    let g = LongitudinalGains::default();
    let mut m = ControllerMemory::default();
    let mut fb = nominal_long(&g);
    fb.u = 49.0;
    fb.h += 2.0;
    for k in 1..=5 {
        longitudinal_control(&fb, &mut m, &g).unwrap();
        assert!((m.sum_u - -(k as f64)).abs() < 1e-12);
        assert!((m.sum_h - 2.0 * k as f64).abs() < 1e-9);
    }
}

#[test]
fn sums_keep_growing_under_saturation() {
    let g = LateralGains::default();
    let mut m = ControllerMemory::default();
    let fb = LateralFeedback {
        y: 500.0,
        ..Default::default()
    };
    for _ in 0..10 {
        assert_eq!(lateral_control(&fb, &mut m, &g).unwrap().0, -27.0);
    }
    assert_eq!(m.sum_y, 5000.0);
}

#[test]
fn non_finite_feedback_is_numerical_error() {
    let g = LongitudinalGains::default();
    let mut m = ControllerMemory::default();
    let fb = LongitudinalFeedback {
        q: f64::INFINITY,
        ..nominal_long(&g)
    };
    assert!(matches!(longitudinal_control(&fb, &mut m, &g), Err(Error::Numerical(_))));
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6f64..1e6, -1e3f64..1e3, -10.0f64..10.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100_000))]
    #[test]
    fn outputs_respect_limits(
        u in finite(), q in finite(), x in finite(), y in finite(), h in finite(),
        theta in finite(), phi in finite(), psi in finite(), steps in 1usize..4,
    ) {
        let mut ap = Autopilot::new(LateralGains::default(), LongitudinalGains::default());
        let fb = Feedback { u, q, x, y, h, theta, phi, psi };
        for _ in 0..steps {
            let c = ap.command(&fb).unwrap();
            prop_assert!((0.0..=10_000.0).contains(&c.delta_t));
            prop_assert!((-15.0..=30.0).contains(&c.delta_e));
            prop_assert!((-20.0..=20.0).contains(&c.delta_a));
            prop_assert!((-27.0..=27.0).contains(&c.delta_r));
        }
    }
}

proptest! {
    #[test]
    fn proportional_only_is_linear(
        a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0,
        d in -2.0f64..2.0, e in -2.0f64..2.0, f in -2.0f64..2.0,
    ) {
        let g = LateralGains { k_psi_i: 0.0, k_y_i: 0.0, k_phi_i: 0.0, ..Default::default() };
        let run = |psi: f64, y: f64, phi: f64| {
            let mut m = ControllerMemory::default();
            // Memory must not matter once the integral gains vanish.
            m.sum_psi = 123.0;
            lateral_control(&LateralFeedback { psi, y, phi }, &mut m, &g).unwrap()
        };
        let s1 = run(a, b, c);
        let s2 = run(d, e, f);
        let s = run(a + d, b + e, c + f);
        prop_assert!((s.0 - (s1.0 + s2.0)).abs() < 1e-12);
        prop_assert!((s.1 - (s1.1 + s2.1)).abs() < 1e-12);
    }

    #[test]
    fn deterministic(seq in proptest::collection::vec((-5.0f64..5.0, -20.0f64..20.0, -5.0f64..5.0), 1..30)) {
        let run = || {
            let mut ap = Autopilot::new(LateralGains::default(), LongitudinalGains::default());
            seq.iter().map(|(psi, y, phi)| {
                let fb = Feedback { u: 50.0, x: 500.0, h: 285.0, psi: *psi, y: *y, phi: *phi, ..Default::default() };
                ap.command(&fb).unwrap()
            }).collect::<Vec<_>>()
        };
        prop_assert_eq!(run(), run());
    }
}
