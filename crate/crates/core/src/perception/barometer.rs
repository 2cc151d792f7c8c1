//! Delayed, noisy barometric altitude and its Kalman delay compensation.

use alloc::collections::VecDeque;

use nalgebra::{Matrix2, RowVector2, Vector2};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BarometerModel {
    /// Transport delay, s.
    pub delay: f64,
    /// Additive reading noise, m.
    pub noise_sigma: f64,
    /// Acceleration density of the constant-rate altitude model, m/s^2.
    pub accel_sigma: f64,
}

impl Default for BarometerModel {
    fn default() -> Self {
        BarometerModel {
            delay: 0.5,
            noise_sigma: 0.1,
            accel_sigma: 0.5,
        }
    }
}

impl BarometerModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.delay >= 0.0 && self.noise_sigma >= 0.0 && self.accel_sigma > 0.0) {
            return Err(Error::Config("barometer delay and noise must be non-negative"));
        }
        Ok(())
    }
}

/// The sensor: reports the true altitude from `delay` seconds ago plus noise.
#[derive(Debug, Clone, PartialEq)]
pub struct Barometer {
    model: BarometerModel,
    history: VecDeque<f64>,
    lag_samples: usize,
}

impl Barometer {
    pub fn new(model: BarometerModel, dt: f64) -> Self {
        let lag_samples = math::round(model.delay / dt) as usize;
        Barometer {
            model,
            history: VecDeque::with_capacity(lag_samples + 1),
            lag_samples,
        }
    }

    pub fn read<R: Rng + ?Sized>(&mut self, true_altitude: f64, rng: &mut R) -> f64 {
        if self.history.is_empty() {
            for _ in 0..self.lag_samples {
                self.history.push_back(true_altitude);
            }
        }
        self.history.push_back(true_altitude);
        let delayed = self.history.pop_front().unwrap_or(true_altitude);
        if self.model.noise_sigma > 0.0 {
            let n = Normal::new(0.0, self.model.noise_sigma).expect("validated sigma");
            delayed + n.sample(rng)
        } else {
            delayed
        }
    }
}

/// Constant-velocity Kalman filter over the delayed reading, extrapolated
/// forward by the known delay.
#[derive(Debug, Clone, PartialEq)]
pub struct BaroCompensator {
    model: BarometerModel,
    dt: f64,
    state: Option<(Vector2<f64>, Matrix2<f64>)>,
}

impl BaroCompensator {
    pub fn new(model: BarometerModel, dt: f64) -> Self {
        BaroCompensator { model, dt, state: None }
    }

    /// Estimated altitude rate, m/s.
    pub fn rate(&self) -> Option<f64> {
        self.state.map(|(x, _)| x.y)
    }

    pub fn update(&mut self, reading: f64) -> f64 {
        let dt = self.dt;
        let r = (self.model.noise_sigma * self.model.noise_sigma).max(1e-12);
        let (x, p) = match self.state {
            None => {
                let x = Vector2::new(reading, 0.0);
                let p = Matrix2::new(r, 0.0, 0.0, 25.0);
                self.state = Some((x, p));
                return reading;
            }
            Some(s) => s,
        };
        let f = Matrix2::new(1.0, dt, 0.0, 1.0);
        let qa = self.model.accel_sigma * self.model.accel_sigma;
        let q = Matrix2::new(
            qa * dt * dt * dt * dt / 4.0,
            qa * dt * dt * dt / 2.0,
            qa * dt * dt * dt / 2.0,
            qa * dt * dt,
        );
        let x = f * x;
        let p = f * p * f.transpose() + q;
        let h = RowVector2::new(1.0, 0.0);
        let s = (h * p * h.transpose())[(0, 0)] + r;
        let k = p * h.transpose() / s;
        let x = x + k * (reading - x.x);
        let ikh = Matrix2::identity() - k * h;
        let p = ikh * p * ikh.transpose() + k * k.transpose() * r;
        self.state = Some((x, 0.5 * (p + p.transpose())));
        x.x + x.y * self.model.delay
    }
}

/// Runs the compensator over a reading stream, returning every estimate.
pub fn compensate_barometer(model: &BarometerModel, dt: f64, readings: &[f64]) -> alloc::vec::Vec<f64> {
    let mut c = BaroCompensator::new(*model, dt);
    readings.iter().map(|r| c.update(*r)).collect()
}
