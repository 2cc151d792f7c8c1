//! Constant-velocity Kalman tracking of landmark pixels with distance gating.
//!
//! A detection inside the gate of its prediction corrects the track. A
//! detection outside the gate, or a missing one, is discarded and the
//! prediction stands in for it.

use alloc::vec::Vec;

use nalgebra::{Matrix2x4, Matrix4, Vector2, Vector4};
use serde::{Deserialize, Serialize};

use super::camera::Pixel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackerConfig {
    /// Gate on the distance between prediction and detection, px.
    pub gate: f64,
    /// Consecutive rejected frames after which the output is invalid.
    pub max_rejections: u32,
    /// White-noise acceleration density of the pixel motion, px/s^2.
    pub accel_sigma: f64,
    /// Prior standard deviation of the pixel velocity at initialization, px/s.
    pub initial_velocity_sigma: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            gate: 20.0,
            max_rejections: 15,
            accel_sigma: 50.0,
            initial_velocity_sigma: 200.0,
        }
    }
}

/// Outcome of one landmark in one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrackUpdate {
    /// Predicted then corrected with the detection.
    Corrected,
    /// Detection rejected or absent; prediction used.
    Predicted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandmarkTrack {
    /// (u, v, du/dt, dv/dt)
    pub state: Vector4<f64>,
    pub covariance: Matrix4<f64>,
    pub rejections: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PixelTrackFilter {
    pub config: TrackerConfig,
    pub dt: f64,
    /// Measurement noise standard deviation, px.
    pub measurement_sigma: f64,
    pub tracks: Vec<LandmarkTrack>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackOutput {
    pub pixels: Vec<Pixel>,
    pub updates: Vec<TrackUpdate>,
    /// False once any landmark exceeded its rejection streak.
    pub valid: bool,
}

fn observation() -> Matrix2x4<f64> {
    Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0)
}

impl PixelTrackFilter {
    /// Starts one track per detected landmark, at rest.
    pub fn new(config: TrackerConfig, dt: f64, measurement_sigma: f64, detection: &[Pixel]) -> Result<Self> {
        if !(dt > 0.0) || !(measurement_sigma >= 0.0) || !(config.gate > 0.0) {
            return Err(Error::InvalidArg("tracker needs positive dt and gate"));
        }
        let var_p = measurement_sigma * measurement_sigma;
        let var_v = config.initial_velocity_sigma * config.initial_velocity_sigma;
        let tracks = detection
            .iter()
            .map(|px| LandmarkTrack {
                state: Vector4::new(px.x, px.y, 0.0, 0.0),
                covariance: Matrix4::from_diagonal(&Vector4::new(var_p, var_p, var_v, var_v)),
                rejections: 0,
            })
            .collect();
        Ok(PixelTrackFilter {
            config,
            dt,
            measurement_sigma,
            tracks,
        })
    }

    fn transition(&self) -> Matrix4<f64> {
        let dt = self.dt;
        Matrix4::new(
            1.0, 0.0, dt, 0.0, //
            0.0, 1.0, 0.0, dt, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        )
    }

    fn process_noise(&self) -> Matrix4<f64> {
        let dt = self.dt;
        let q = self.config.accel_sigma * self.config.accel_sigma;
        let a = q * dt * dt * dt * dt / 4.0;
        let b = q * dt * dt * dt / 2.0;
        let c = q * dt * dt;
        Matrix4::new(
            a, 0.0, b, 0.0, //
            0.0, a, 0.0, b, //
            b, 0.0, c, 0.0, //
            0.0, b, 0.0, c,
        )
    }

    pub fn predictions(&self) -> Vec<Pixel> {
        let f = self.transition();
        self.tracks
            .iter()
            .map(|t| {
                let s = f * t.state;
                Vector2::new(s.x, s.y)
            })
            .collect()
    }

    /// Advances every track one frame and folds in `detection` where it passes the gate.
    pub fn track(&mut self, detection: Option<&[Pixel]>) -> TrackOutput {
        let f = self.transition();
        let q = self.process_noise();
        let hm = observation();
        let r_var = self.measurement_sigma * self.measurement_sigma;
        let gate = self.config.gate;
        let mut pixels = Vec::with_capacity(self.tracks.len());
        let mut updates = Vec::with_capacity(self.tracks.len());
        for (i, t) in self.tracks.iter_mut().enumerate() {
            let x_pred = f * t.state;
            let p_pred = f * t.covariance * f.transpose() + q;
            let z = detection.and_then(|d| d.get(i)).copied();
            let pred_px = Vector2::new(x_pred.x, x_pred.y);
            match z.filter(|z| (z - pred_px).norm() <= gate) {
                Some(z) => {
                    let s = hm * p_pred * hm.transpose() + nalgebra::Matrix2::identity() * r_var;
                    let gain = match s.try_inverse() {
                        Some(s_inv) => p_pred * hm.transpose() * s_inv,
                        None => nalgebra::Matrix4x2::zeros(),
                    };
                    let innovation = z - pred_px;
                    t.state = x_pred + gain * innovation;
                    // Joseph form keeps the covariance symmetric positive semi-definite.
                    let ikh = Matrix4::identity() - gain * hm;
                    let p = ikh * p_pred * ikh.transpose()
                        + gain * nalgebra::Matrix2::identity() * r_var * gain.transpose();
                    t.covariance = 0.5 * (p + p.transpose());
                    t.rejections = 0;
                    updates.push(TrackUpdate::Corrected);
                }
                None => {
                    t.state = x_pred;
                    t.covariance = 0.5 * (p_pred + p_pred.transpose());
                    t.rejections += 1;
                    updates.push(TrackUpdate::Predicted);
                }
            }
            pixels.push(Vector2::new(t.state.x, t.state.y));
        }
        let valid = self.tracks.iter().all(|t| t.rejections <= self.config.max_rejections);
        TrackOutput {
            pixels,
            updates,
            valid,
        }
    }
}
