//! Closed-loop approach simulation: plant, sensors, autopilot and monitor.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::airframe::{self, AircraftState, AirframeParams, ControlInput};
use crate::control::{Autopilot, Feedback, LateralGains, LongitudinalGains};
use crate::error::{Error, InvalidReason, Result};
use crate::falsify::{derive_seed, NoiseSignal};
use crate::guidance::RunwayGeometry;
use crate::perception::{
    BaroCompensator, Barometer, BarometerModel, CameraModel, EstimatorConfig, PoseEstimate, VisionEstimator,
};
use crate::specs::{eval_final_approach, margins, SpecParams, SpecSample, SpecVerdict};
use crate::trace::{FlightTrace, TraceSample};

/// Where the autopilot's position and attitude feedback comes from inside the monitored window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackSource {
    #[default]
    GroundTruth,
    Vision,
    VisionBaro,
}

impl FeedbackSource {
    pub fn name(self) -> &'static str {
        match self {
            FeedbackSource::GroundTruth => "ground_truth",
            FeedbackSource::Vision => "vision",
            FeedbackSource::VisionBaro => "vision_baro",
        }
    }

    pub fn uses_vision(self) -> bool {
        !matches!(self, FeedbackSource::GroundTruth)
    }
}

impl core::str::FromStr for FeedbackSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ground_truth" => Ok(FeedbackSource::GroundTruth),
            "vision" => Ok(FeedbackSource::Vision),
            "vision_baro" | "vision+baro" => Ok(FeedbackSource::VisionBaro),
            _ => Err(Error::Config("unknown feedback source")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub feedback: FeedbackSource,
    /// Start distance, m.
    pub x_far: f64,
    /// Start of the monitored window, m.
    pub x_0: f64,
    /// Initial cross-track and vertical offsets from the glideslope, held until `x_0`, m.
    pub dy: f64,
    pub dh: f64,
    /// s
    pub dt: f64,
    /// s
    pub horizon: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            feedback: FeedbackSource::GroundTruth,
            x_far: 2000.0,
            x_0: 800.0,
            dy: 0.0,
            dh: 0.0,
            dt: 0.05,
            horizon: 120.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Gains {
    pub lateral: LateralGains,
    pub longitudinal: LongitudinalGains,
}

/// Everything one closed-loop run depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario {
    pub airframe: AirframeParams,
    pub runway: RunwayGeometry,
    pub gains: Gains,
    pub specs: SpecParams,
    pub camera: CameraModel,
    pub perception: EstimatorConfig,
    pub barometer: BarometerModel,
    pub scenario: ScenarioConfig,
}

/// Stall speed assumed for the default airframe in landing configuration, m/s.
pub const DEFAULT_V_SO: f64 = 38.5;

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            airframe: AirframeParams::default(),
            runway: RunwayGeometry::default(),
            gains: Gains::default(),
            specs: SpecParams {
                v_so: Some(DEFAULT_V_SO),
                ..SpecParams::default()
            },
            camera: CameraModel::default(),
            perception: EstimatorConfig::default(),
            barometer: BarometerModel::default(),
            scenario: ScenarioConfig::default(),
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.airframe.validate()?;
        self.runway.validate()?;
        self.gains.lateral.validate()?;
        self.gains.longitudinal.validate()?;
        self.specs.validate()?;
        self.specs.stall_speed()?;
        self.camera.validate()?;
        self.barometer.validate()?;
        let c = &self.scenario;
        if !(c.x_far > c.x_0 && c.x_0 > 0.0) {
            return Err(Error::Config("need x_far > x_0 > 0"));
        }
        if !(c.dt > 0.0 && c.dt <= 0.1) {
            return Err(Error::Config("time step must lie in (0, 0.1] s"));
        }
        if !(c.horizon > 0.0) || !c.dy.is_finite() || !c.dh.is_finite() {
            return Err(Error::Config("horizon must be positive and offsets finite"));
        }
        Ok(())
    }

    pub fn with_feedback(mut self, feedback: FeedbackSource) -> Self {
        self.scenario.feedback = feedback;
        self
    }

    pub fn with_offsets(mut self, dy: f64, dh: f64) -> Self {
        self.scenario.dy = dy;
        self.scenario.dh = dh;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.scenario.seed = seed;
        self
    }

    /// Approach trim at the autopilot's speed, placed at `x_far` on the
    /// autopilot's glideslope plus the configured offsets.
    pub fn initial_condition(&self) -> Result<(AircraftState, ControlInput)> {
        let g = &self.gains.longitudinal;
        let (mut state, input) = airframe::trim(&self.airframe, g.u_des, -g.gamma)?;
        let c = &self.scenario;
        state.x = c.x_far;
        state.y = c.dy;
        state.h = g.commanded_altitude(c.x_far) + c.dh;
        Ok((state, input))
    }
}

/// A finished run, including one cut short by divergence.
#[derive(Debug, Clone, PartialEq)]
pub struct Flight {
    pub trace: FlightTrace,
    /// Verdict over the monitored window; `None` when the window was never entered.
    pub verdict: Option<SpecVerdict>,
    /// No perception dropout occurred.
    pub perception_valid: bool,
    pub invalid_frames: usize,
    /// Time and cause of every perception dropout.
    pub dropouts: alloc::vec::Vec<(f64, InvalidReason)>,
    /// Cross-track and vertical deviation from the glideslope on entering the window.
    pub deviation_at_x0: Option<(f64, f64)>,
    pub diverged: Option<(f64, &'static str)>,
}

impl Flight {
    /// The approach satisfied every requirement and no part of the run failed.
    pub fn satisfied(&self) -> bool {
        self.diverged.is_none() && self.verdict.as_ref().is_some_and(|v| v.holds)
    }

    pub fn robustness(&self) -> f64 {
        match (&self.diverged, &self.verdict) {
            (None, Some(v)) => v.robustness,
            _ => f64::NEG_INFINITY,
        }
    }
}

/// A run that completed normally.
#[derive(Debug, Clone, PartialEq)]
pub struct Landing {
    pub trace: FlightTrace,
    pub verdict: SpecVerdict,
    pub perception_valid: bool,
    pub deviation_at_x0: (f64, f64),
}

impl Flight {
    pub fn into_landing(self) -> Result<Landing> {
        if let Some((time, cause)) = self.diverged {
            return Err(Error::SimulationDiverged { time, cause });
        }
        match (self.verdict, self.deviation_at_x0) {
            (Some(verdict), Some(dev)) => Ok(Landing {
                trace: self.trace,
                verdict,
                perception_valid: self.perception_valid,
                deviation_at_x0: dev,
            }),
            _ => Err(Error::EmptyTrace),
        }
    }
}

pub fn run_landing(scenario: &Scenario) -> Result<Landing> {
    simulate(scenario, None)?.into_landing()
}

pub fn run_with_noise(scenario: &Scenario, noise: &NoiseSignal) -> Result<Landing> {
    simulate(scenario, Some(noise))?.into_landing()
}

fn truth_feedback(s: &AircraftState) -> Feedback {
    Feedback {
        u: s.u,
        q: s.q,
        x: s.x,
        y: s.y,
        h: s.h,
        theta: s.theta,
        phi: s.phi,
        psi: s.psi,
    }
}

fn estimate_feedback(s: &AircraftState, e: &PoseEstimate) -> Feedback {
    Feedback {
        u: s.u,
        q: s.q,
        x: e.x,
        y: e.y,
        h: e.h,
        theta: e.theta,
        phi: e.phi,
        psi: e.psi,
    }
}

/// Flies the scenario from `x_far` until the height drops to the
/// end-of-approach height inside the monitored window, or the horizon ends.
///
/// Configuration errors are returned; numerical failure of the plant or
/// autopilot ends the run and is reported in [`Flight::diverged`].
pub fn simulate(scenario: &Scenario, noise: Option<&NoiseSignal>) -> Result<Flight> {
    scenario.validate()?;
    let c = &scenario.scenario;
    let field = scenario.runway.field_elevation;
    let (mut state, _) = scenario.initial_condition()?;
    let mut autopilot = Autopilot::new(scenario.gains.lateral, scenario.gains.longitudinal);
    let mut pixel_rng = ChaCha8Rng::seed_from_u64(c.seed);
    let mut baro_rng = ChaCha8Rng::seed_from_u64(derive_seed(c.seed, 0xBA20, 0, 0));
    let mut baro = Barometer::new(scenario.barometer, c.dt);
    let mut baro_filter = BaroCompensator::new(scenario.barometer, c.dt);
    let mut vision = VisionEstimator::new(scenario.camera, scenario.runway, scenario.perception, c.dt);
    let mut last_estimate: Option<PoseEstimate> = None;

    let mut trace = FlightTrace::new(c.dt, field, c.x_0);
    let mut monitored: alloc::vec::Vec<SpecSample> = alloc::vec::Vec::new();
    let mut perception_valid = true;
    let mut invalid_frames = 0usize;
    let mut dropouts = alloc::vec::Vec::new();
    let mut deviation_at_x0 = None;
    let mut diverged = None;
    let steps = math_ceil(c.horizon / c.dt);

    for k in 0..=steps {
        let time = k as f64 * c.dt;
        let in_window = state.x < c.x_0;
        let baro_h = baro_filter.update(baro.read(state.h, &mut baro_rng));

        let mut estimate = None;
        let mut fb = truth_feedback(&state);
        if in_window && c.feedback.uses_vision() {
            let baro_alt = (c.feedback == FeedbackSource::VisionBaro).then_some(baro_h);
            match vision.perceive(&state, baro_alt, Some(&mut pixel_rng)) {
                Ok(e) => {
                    last_estimate = Some(e);
                    estimate = Some(e);
                    fb = estimate_feedback(&state, &e);
                }
                Err(Error::InvalidEstimate(reason)) => {
                    perception_valid = false;
                    invalid_frames += 1;
                    dropouts.push((time, reason));
                    if let Some(e) = last_estimate {
                        estimate = Some(e.invalidated());
                        fb = estimate_feedback(&state, &e);
                    }
                }
                Err(e) => return Err(e),
            }
        }
        if !in_window {
            fb.y -= c.dy;
            fb.h -= c.dh;
        } else if let Some(n) = noise {
            n.apply(&mut fb, c.x_0, field);
        }

        let input = match autopilot.command(&fb) {
            Ok(i) => i,
            Err(_) => {
                diverged = Some((time, "autopilot feedback became non-finite"));
                break;
            }
        };

        let mut sample_margins = None;
        if in_window {
            let s = SpecSample {
                time,
                u: state.u,
                v: state.v,
                w: state.w,
                x: state.x,
                y: state.y,
                h_agl: state.h - field,
            };
            sample_margins = Some(margins(&s, &scenario.specs)?);
            if deviation_at_x0.is_none() {
                let g = &scenario.gains.longitudinal;
                deviation_at_x0 = Some((state.y, state.h - g.commanded_altitude(state.x)));
            }
            monitored.push(s);
        }
        trace.samples.push(TraceSample {
            time,
            state,
            input,
            feedback: fb,
            estimate,
            margins: sample_margins,
        });
        if in_window && state.h - field <= scenario.specs.h_f {
            break;
        }
        if k == steps {
            break;
        }
        match airframe::step(&state, &input, &scenario.airframe, c.dt) {
            Ok(next) => state = next,
            Err(Error::Numerical(cause)) => {
                diverged = Some((time, cause));
                break;
            }
            Err(e) => return Err(e),
        }
    }

    let verdict = if monitored.is_empty() {
        None
    } else {
        Some(eval_final_approach(&monitored, &scenario.specs)?)
    };
    Ok(Flight {
        trace,
        verdict,
        perception_valid,
        invalid_frames,
        dropouts,
        deviation_at_x0,
        diverged,
    })
}

fn math_ceil(v: f64) -> usize {
    let f = crate::math::floor(v);
    (if f < v { f + 1.0 } else { f }) as usize
}
