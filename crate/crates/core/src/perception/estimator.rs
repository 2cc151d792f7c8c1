//! End-to-end synthetic vision: landmark choice, noisy projection, pixel
//! tracking, planar pose and conversion to controller feedback states.

use alloc::vec::Vec;

use nalgebra::{Vector2, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::camera::{project, BodyPose, CameraModel, Pixel};
use super::homography::estimate_homography;
use super::pose::{planar_pose, pose_params, refine_body_pose, PoseParams};
use super::tracking::{PixelTrackFilter, TrackerConfig};
use crate::airframe::AircraftState;
use crate::error::{Error, InvalidReason, Result};
use crate::guidance::{RunwayGeometry, WorldPoint};

/// Farthest distance at which the runway is usable for vision, m.
pub const VISION_MAX_DISTANCE: f64 = 800.0;
/// Below this distance the corners leave the view and the aiming points take over, m.
pub const AIMING_POINT_DISTANCE: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LandmarkKind {
    Corners,
    AimingPoints,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandmarkSet {
    pub kind: LandmarkKind,
    pub points: [WorldPoint; 4],
}

impl LandmarkSet {
    /// Landmarks in the approach frame (forward, right, down from the threshold center).
    pub fn approach_points(&self, runway: &RunwayGeometry) -> [Vector3<f64>; 4] {
        self.points.map(|p| world_to_approach(runway, &p))
    }
}

pub fn world_to_approach(runway: &RunwayGeometry, p: &WorldPoint) -> Vector3<f64> {
    let r = runway.to_runway_frame(p);
    Vector3::new(-r.x, -r.y, runway.field_elevation - r.h)
}

pub fn select_landmarks(distance: f64, runway: &RunwayGeometry) -> Result<LandmarkSet> {
    if !(distance >= 0.0) {
        return Err(Error::InvalidArg("distance to the runway must be non-negative"));
    }
    if distance > VISION_MAX_DISTANCE {
        return Err(Error::OutOfEnvelope(distance));
    }
    Ok(if distance >= AIMING_POINT_DISTANCE {
        LandmarkSet {
            kind: LandmarkKind::Corners,
            points: runway.corners(),
        }
    } else {
        LandmarkSet {
            kind: LandmarkKind::AimingPoints,
            points: runway.aiming_points(),
        }
    })
}

/// Body pose in the approach frame for a flight state.
pub fn state_pose(state: &AircraftState, runway: &RunwayGeometry) -> BodyPose {
    BodyPose {
        position: Vector3::new(-state.x, state.y, runway.field_elevation - state.h),
        attitude: state.body_to_approach(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseEstimate {
    pub x: f64,
    pub y: f64,
    pub h: f64,
    pub theta: f64,
    pub phi: f64,
    pub psi: f64,
    pub reprojection_rms: f64,
    pub valid: bool,
}

impl PoseEstimate {
    fn from_params(p: &PoseParams, runway: &RunwayGeometry, rms: f64, valid: bool) -> Self {
        PoseEstimate {
            x: -p[0],
            y: p[1],
            h: runway.field_elevation - p[2],
            phi: p[3],
            theta: p[4],
            psi: p[5],
            reprojection_rms: rms,
            valid,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.x, self.y, self.h, self.theta, self.phi, self.psi, self.reprojection_rms]
            .iter()
            .all(|v| v.is_finite())
    }

    /// Copy flagged invalid, used to hold the last estimate through a dropout.
    pub fn invalidated(&self) -> Self {
        PoseEstimate { valid: false, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    pub tracker: TrackerConfig,
    /// Largest acceptable reprojection RMS after refinement, px.
    pub reprojection_gate: f64,
    pub refine_iterations: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            tracker: TrackerConfig::default(),
            reprojection_gate: 25.0,
            refine_iterations: 20,
        }
    }
}

/// Episode-local perception state.
#[derive(Debug, Clone, PartialEq)]
pub struct VisionEstimator {
    pub camera: CameraModel,
    pub runway: RunwayGeometry,
    pub config: EstimatorConfig,
    pub dt: f64,
    tracker: Option<(LandmarkKind, PixelTrackFilter)>,
    previous: Option<PoseParams>,
}

fn invalid(reason: InvalidReason) -> Error {
    Error::InvalidEstimate(reason)
}

impl VisionEstimator {
    pub fn new(camera: CameraModel, runway: RunwayGeometry, config: EstimatorConfig, dt: f64) -> Self {
        VisionEstimator {
            camera,
            runway,
            config,
            dt,
            tracker: None,
            previous: None,
        }
    }

    /// One frame of the pipeline for the true state.
    ///
    /// With `baro_altitude` the vertical position is taken from the
    /// barometer and only the remaining pose parameters are solved for.
    /// Pass `rng = None` for noiseless pixels.
    pub fn perceive<R: Rng + ?Sized>(
        &mut self,
        state: &AircraftState,
        baro_altitude: Option<f64>,
        rng: Option<&mut R>,
    ) -> Result<PoseEstimate> {
        let set = select_landmarks(state.x.max(0.0), &self.runway)?;
        let world = set.approach_points(&self.runway);
        let truth = state_pose(state, &self.runway);
        let detection = match project(&self.camera, &truth, &world, rng) {
            Ok(p) if p.in_frame => Some(p.pixels),
            Ok(_) => None,
            Err(Error::BehindCamera(_)) => {
                self.coast();
                return Err(invalid(InvalidReason::BehindCamera));
            }
            Err(e) => return Err(e),
        };
        let Some(detection) = detection else {
            self.coast();
            return Err(invalid(InvalidReason::OutOfFrame));
        };
        let pixels = self.track(set.kind, &detection)?;
        let (est, p) = self.solve_from(&pixels, &world, baro_altitude, self.previous.as_ref())?;
        self.previous = Some(p);
        Ok(est)
    }

    fn coast(&mut self) {
        if let Some((_, f)) = self.tracker.as_mut() {
            f.track(None);
        }
    }

    fn track(&mut self, kind: LandmarkKind, detection: &[Pixel]) -> Result<Vec<Pixel>> {
        match self.tracker.as_mut() {
            Some((k, f)) if *k == kind => {
                let out = f.track(Some(detection));
                if !out.valid {
                    return Err(invalid(InvalidReason::GateStreak));
                }
                Ok(out.pixels)
            }
            _ => {
                let f = PixelTrackFilter::new(self.config.tracker, self.dt, self.camera.pixel_sigma, detection)?;
                self.tracker = Some((kind, f));
                Ok(detection.to_vec())
            }
        }
    }

    /// Pose from already-tracked pixels of approach-frame landmarks.
    pub fn solve(&self, pixels: &[Pixel], world: &[Vector3<f64>], baro_altitude: Option<f64>) -> Result<PoseEstimate> {
        self.solve_from(pixels, world, baro_altitude, None).map(|(e, _)| e)
    }

    /// Refines from the homography pose and, when given, from `warm`; keeps
    /// the better fit. The warm start matters at grazing angles where the
    /// landmark quadrilateral is only a few pixels tall.
    fn solve_from(
        &self,
        pixels: &[Pixel],
        world: &[Vector3<f64>],
        baro_altitude: Option<f64>,
        warm: Option<&PoseParams>,
    ) -> Result<(PoseEstimate, PoseParams)> {
        let fixed_down = baro_altitude.map(|a| self.runway.field_elevation - a);
        let refine = |init: &PoseParams| {
            refine_body_pose(&self.camera, init, pixels, world, fixed_down, self.config.refine_iterations).ok()
        };
        let plane: Vec<Vector2<f64>> = world.iter().map(|p| Vector2::new(p.x, p.y)).collect();
        let from_homography = estimate_homography(pixels, &plane)
            .and_then(|h| planar_pose(&h, &self.camera, pixels, &plane))
            .ok()
            .and_then(|planar| refine(&pose_params(&self.camera.body_pose(&planar.camera))));
        let from_warm = warm.and_then(|w| refine(w));
        let best = match (from_homography, from_warm) {
            (Some(a), Some(b)) => Some(if b.1 < a.1 { b } else { a }),
            (a, b) => a.or(b),
        };
        let Some((p, rms)) = best else {
            return Err(invalid(InvalidReason::Degenerate));
        };
        let est = PoseEstimate::from_params(&p, &self.runway, rms, true);
        if !est.is_finite() {
            return Err(invalid(InvalidReason::Degenerate));
        }
        if rms > self.config.reprojection_gate {
            return Err(invalid(InvalidReason::Reprojection));
        }
        Ok((est, p))
    }
}
