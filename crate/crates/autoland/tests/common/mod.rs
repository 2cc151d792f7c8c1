//! Helpers shared by the integration tests.

use autoland_core::perception::PoseEstimate;
use autoland_core::trace::{FlightTrace, TraceSample};
use autoland_core::{AircraftState, ControlInput, Feedback};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Trace with values spread over many magnitudes and optional columns
/// randomly present.
pub fn random_trace(rng: &mut ChaCha8Rng) -> FlightTrace {
    let mut t = FlightTrace::new(0.05, rng.random_range(0.0..500.0), 800.0);
    let n = rng.random_range(1..40);
    let r = |rng: &mut ChaCha8Rng| rng.random_range(-1e4..1e4) * 10f64.powi(rng.random_range(-8..3));
    for k in 0..n {
        let mut a = [0.0; 12];
        a.iter_mut().for_each(|v| *v = r(rng));
        let estimate = rng.random_bool(0.5).then(|| PoseEstimate {
            x: r(rng),
            y: r(rng),
            h: r(rng),
            theta: r(rng),
            phi: r(rng),
            psi: r(rng),
            reprojection_rms: r(rng).abs(),
            valid: rng.random_bool(0.7),
        });
        let margins = rng.random_bool(0.5).then(|| [r(rng), r(rng), r(rng), r(rng), r(rng)]);
        t.samples.push(TraceSample {
            time: k as f64 * 0.05,
            state: AircraftState::from_array(a),
            input: ControlInput {
                delta_t: r(rng),
                delta_e: r(rng),
                delta_a: r(rng),
                delta_r: -0.0,
            },
            feedback: Feedback {
                u: r(rng),
                q: r(rng),
                x: r(rng),
                y: r(rng),
                h: r(rng),
                theta: r(rng),
                phi: r(rng),
                psi: f64::MIN_POSITIVE,
            },
            estimate,
            margins,
        });
    }
    t
}
