#![no_std]
//! Fixed-wing automatic landing: flight dynamics, glideslope guidance, PI
//! autopilot, synthetic vision, approach-requirement monitoring and
//! noise/initial-condition falsification.

extern crate alloc;

pub mod airframe;
pub mod control;
pub mod error;
pub mod falsify;
pub mod guidance;
pub mod math;
pub mod perception;
pub mod sim;
pub mod specs;
pub mod trace;

pub use airframe::{AircraftState, AirframeParams, ControlInput};
pub use control::{Autopilot, Feedback, LateralGains, LongitudinalGains};
pub use error::{Error, InvalidReason, Result};
pub use guidance::RunwayGeometry;
pub use specs::{eval_final_approach, SpecId, SpecParams, SpecSample, SpecVerdict};
pub use falsify::{Channel, NoiseSignal};
pub use sim::{run_landing, run_with_noise, simulate, FeedbackSource, Scenario, ScenarioConfig};
pub use trace::{compute_error_stats, ErrorStats, FlightTrace, TraceSample};
