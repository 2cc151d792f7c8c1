//! Discrete-time PI autopilot: a lateral loop on yaw, cross-track deviation
//! and roll, and a longitudinal loop on speed, pitch and altitude.
//!
//! Integral terms are running sums over previous samples, evaluated at the
//! simulation rate. Sums keep accumulating while an actuator is saturated.

use serde::{Deserialize, Serialize};

use crate::airframe::{ControlInput, Range};
use crate::error::{Error, Result};
use crate::guidance::{glideslope_altitude, Glideslope};

/// `max(lo, min(hi, x))`.
pub fn saturate(x: f64, lo: f64, hi: f64) -> Result<f64> {
    if !(lo <= hi) {
        return Err(Error::InvalidArg("saturation bounds out of order"));
    }
    Ok(lo.max(hi.min(x)))
}

fn clamp_to(x: f64, r: &Range) -> f64 {
    r.lo.max(r.hi.min(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LateralGains {
    /// deg/deg
    pub k_psi_p: f64,
    /// deg/m
    pub k_y_p: f64,
    /// deg/deg
    pub k_phi_p: f64,
    pub k_psi_i: f64,
    pub k_y_i: f64,
    pub k_phi_i: f64,
    pub rudder: Range,
    pub aileron: Range,
}

impl Default for LateralGains {
    fn default() -> Self {
        LateralGains {
            k_psi_p: 1.0,
            k_y_p: 0.5,
            k_phi_p: 1.0,
            k_psi_i: 0.1,
            k_y_i: 0.01,
            k_phi_i: 0.1,
            rudder: Range::new(-27.0, 27.0),
            aileron: Range::new(-20.0, 20.0),
        }
    }
}

impl LateralGains {
    pub fn validate(&self) -> Result<()> {
        let g = [self.k_psi_p, self.k_y_p, self.k_phi_p, self.k_psi_i, self.k_y_i, self.k_phi_i];
        if g.iter().any(|k| !(*k >= 0.0)) {
            return Err(Error::Config("lateral gains must be non-negative"));
        }
        if !(self.rudder.lo <= self.rudder.hi && self.aileron.lo <= self.aileron.hi) {
            return Err(Error::Config("lateral actuator limits out of order"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LongitudinalGains {
    /// m/s
    pub u_des: f64,
    /// N
    pub k_t: f64,
    /// m MSL
    pub h_threshold: f64,
    /// deg
    pub gamma: f64,
    /// N/(m/s)
    pub k_u_p: f64,
    /// deg/deg
    pub k_theta_p: f64,
    /// deg/(deg/s)
    pub k_q_p: f64,
    /// deg/m
    pub k_h_p: f64,
    pub k_u_i: f64,
    pub k_h_i: f64,
    pub thrust: Range,
    pub elevator: Range,
}

impl Default for LongitudinalGains {
    fn default() -> Self {
        LongitudinalGains {
            u_des: 50.0,
            k_t: 5000.0,
            h_threshold: 259.51,
            gamma: 3.0,
            k_u_p: 70.0,
            k_theta_p: 8.0,
            k_q_p: 0.05,
            k_h_p: 0.3,
            k_u_i: 2.0,
            k_h_i: 0.01,
            thrust: Range::new(0.0, 10_000.0),
            elevator: Range::new(-15.0, 30.0),
        }
    }
}

impl LongitudinalGains {
    pub fn validate(&self) -> Result<()> {
        let g = [self.k_u_p, self.k_theta_p, self.k_q_p, self.k_h_p, self.k_u_i, self.k_h_i];
        if g.iter().any(|k| !(*k >= 0.0)) {
            return Err(Error::Config("longitudinal gains must be non-negative"));
        }
        if !(self.u_des > 0.0) {
            return Err(Error::Config("desired speed must be positive"));
        }
        if !(self.thrust.lo <= self.thrust.hi && self.elevator.lo <= self.elevator.hi) {
            return Err(Error::Config("longitudinal actuator limits out of order"));
        }
        Ok(())
    }

    pub fn glideslope(&self) -> Glideslope {
        Glideslope {
            h_threshold: self.h_threshold,
            gamma: self.gamma,
        }
    }

    /// Commanded altitude `h_c` at distance `x`.
    pub fn commanded_altitude(&self, x: f64) -> f64 {
        glideslope_altitude(x, self.h_threshold, self.gamma)
    }
}

/// Running sums of the integral terms.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControllerMemory {
    pub sum_psi: f64,
    pub sum_y: f64,
    pub sum_phi: f64,
    pub sum_u: f64,
    pub sum_h: f64,
}

impl ControllerMemory {
    pub fn is_finite(&self) -> bool {
        [self.sum_psi, self.sum_y, self.sum_phi, self.sum_u, self.sum_h]
            .iter()
            .all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LateralFeedback {
    pub psi: f64,
    pub y: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LongitudinalFeedback {
    pub u: f64,
    pub theta: f64,
    pub q: f64,
    pub h: f64,
    pub x: f64,
}

fn require_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical("non-finite controller feedback"))
    }
}

/// Rudder and aileron commands `(delta_r, delta_a)` in degrees.
pub fn lateral_control(
    fb: &LateralFeedback,
    mem: &mut ControllerMemory,
    gains: &LateralGains,
) -> Result<(f64, f64)> {
    require_finite(&[fb.psi, fb.y, fb.phi])?;
    let g = gains;
    let u_r = -g.k_psi_p * fb.psi - g.k_y_p * fb.y - g.k_psi_i * mem.sum_psi - g.k_y_i * mem.sum_y;
    let u_a = -g.k_phi_p * fb.phi - g.k_phi_i * mem.sum_phi;
    mem.sum_psi += fb.psi;
    mem.sum_y += fb.y;
    mem.sum_phi += fb.phi;
    Ok((clamp_to(u_r, &g.rudder), clamp_to(u_a, &g.aileron)))
}

/// Thrust (N) and elevator (deg) commands `(delta_t, delta_e)`.
pub fn longitudinal_control(
    fb: &LongitudinalFeedback,
    mem: &mut ControllerMemory,
    gains: &LongitudinalGains,
) -> Result<(f64, f64)> {
    require_finite(&[fb.u, fb.theta, fb.q, fb.h, fb.x])?;
    let g = gains;
    let h_err = fb.h - g.commanded_altitude(fb.x);
    let u_err = fb.u - g.u_des;
    let theta_c = -g.k_h_p * h_err - g.k_h_i * mem.sum_h;
    let u_t = -g.k_u_p * u_err - g.k_u_i * mem.sum_u + g.k_t;
    let u_e = -g.k_theta_p * (fb.theta - theta_c) - g.k_q_p * fb.q;
    mem.sum_u += u_err;
    mem.sum_h += h_err;
    Ok((clamp_to(u_t, &g.thrust), clamp_to(u_e, &g.elevator)))
}

/// The eight states the autopilot consumes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Feedback {
    pub u: f64,
    pub q: f64,
    pub x: f64,
    pub y: f64,
    pub h: f64,
    pub theta: f64,
    pub phi: f64,
    pub psi: f64,
}

/// Both loops and their episode-local memory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Autopilot {
    pub lateral: LateralGains,
    pub longitudinal: LongitudinalGains,
    pub memory: ControllerMemory,
}

impl Autopilot {
    pub fn new(lateral: LateralGains, longitudinal: LongitudinalGains) -> Self {
        Autopilot {
            lateral,
            longitudinal,
            memory: ControllerMemory::default(),
        }
    }

    pub fn command(&mut self, fb: &Feedback) -> Result<ControlInput> {
        let (delta_r, delta_a) = lateral_control(
            &LateralFeedback {
                psi: fb.psi,
                y: fb.y,
                phi: fb.phi,
            },
            &mut self.memory,
            &self.lateral,
        )?;
        let (delta_t, delta_e) = longitudinal_control(
            &LongitudinalFeedback {
                u: fb.u,
                theta: fb.theta,
                q: fb.q,
                h: fb.h,
                x: fb.x,
            },
            &mut self.memory,
            &self.longitudinal,
        )?;
        if !self.memory.is_finite() {
            return Err(Error::Numerical("controller memory overflowed"));
        }
        Ok(ControlInput {
            delta_t,
            delta_e,
            delta_a,
            delta_r,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saturate_cases() {
        assert_eq!(saturate(5.0, -27.0, 27.0).unwrap(), 5.0);
        assert_eq!(saturate(-50.0, -20.0, 20.0).unwrap(), -20.0);
        assert_eq!(saturate(27.0, -27.0, 27.0).unwrap(), 27.0);
        assert!(matches!(saturate(0.0, 1.0, -1.0), Err(Error::InvalidArg(_))));
    }

    #[test]
    fn non_finite_feedback_rejected() {
        let mut mem = ControllerMemory::default();
        let fb = LateralFeedback {
            psi: f64::NAN,
            ..Default::default()
        };
        assert!(matches!(
            lateral_control(&fb, &mut mem, &LateralGains::default()),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn memory_accumulates_after_output() {
        let mut mem = ControllerMemory::default();
        let g = LateralGains::default();
        let fb = LateralFeedback {
            psi: 1.0,
            y: 0.0,
            phi: 0.0,
        };
        let (r0, _) = lateral_control(&fb, &mut mem, &g).unwrap();
        let (r1, _) = lateral_control(&fb, &mut mem, &g).unwrap();
        assert_eq!(r0, -1.0);
        assert!((r1 - (-1.1)).abs() < 1e-12);
        assert_eq!(mem.sum_psi, 2.0);
    }

    #[test]
    fn bad_gains_rejected() {
        let g = LongitudinalGains {
            u_des: 0.0,
            ..Default::default()
        };
        assert!(g.validate().is_err());
        let g = LateralGains {
            k_y_p: -0.1,
            ..Default::default()
        };
        assert!(g.validate().is_err());
    }
}
