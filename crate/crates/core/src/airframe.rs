//! Flat-earth six-degree-of-freedom rigid-body model of a light twin.
//!
//! Body axes are X forward, Y right, Z down. Euler angles follow the
//! yaw-pitch-roll sequence relative to an approach frame whose first axis
//! points along the landing direction, second to the right of the extended
//! centerline and third down. Angles and rates are carried in degrees.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{self, deg, rad};

pub const GRAVITY: f64 = 9.80665;

/// The twelve flight-dynamics states.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AircraftState {
    /// Body-axis velocity, m/s.
    pub u: f64,
    pub v: f64,
    pub w: f64,
    /// Body angular rates, deg/s.
    pub p: f64,
    pub q: f64,
    pub r: f64,
    /// Euler angles, deg.
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
    /// Distance to the runway threshold, m. Positive on the approach side.
    pub x: f64,
    /// Cross-track deviation from the extended centerline, m. Positive to the
    /// right when looking along the landing direction.
    pub y: f64,
    /// Altitude above mean sea level, m.
    pub h: f64,
}

impl AircraftState {
    pub fn to_array(&self) -> [f64; 12] {
        [
            self.u, self.v, self.w, self.p, self.q, self.r, self.phi, self.theta, self.psi, self.x,
            self.y, self.h,
        ]
    }

    pub fn from_array(a: [f64; 12]) -> Self {
        AircraftState {
            u: a[0],
            v: a[1],
            w: a[2],
            p: a[3],
            q: a[4],
            r: a[5],
            phi: a[6],
            theta: a[7],
            psi: a[8],
            x: a[9],
            y: a[10],
            h: a[11],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn airspeed(&self) -> f64 {
        math::sqrt(self.u * self.u + self.v * self.v + self.w * self.w)
    }

    /// Direction cosine matrix mapping body-axis vectors into the approach frame.
    pub fn body_to_approach(&self) -> Matrix3<f64> {
        euler_to_dcm(self.phi, self.theta, self.psi)
    }

    /// Lateral mirror image: negates every antisymmetric state.
    pub fn mirrored(&self) -> Self {
        AircraftState {
            v: -self.v,
            p: -self.p,
            r: -self.r,
            phi: -self.phi,
            psi: -self.psi,
            y: -self.y,
            ..*self
        }
    }
}

/// Body-to-approach DCM for yaw-pitch-roll Euler angles in degrees.
pub fn euler_to_dcm(phi: f64, theta: f64, psi: f64) -> Matrix3<f64> {
    let (sf, cf) = (math::sin(rad(phi)), math::cos(rad(phi)));
    let (st, ct) = (math::sin(rad(theta)), math::cos(rad(theta)));
    let (ss, cs) = (math::sin(rad(psi)), math::cos(rad(psi)));
    Matrix3::new(
        ct * cs,
        sf * st * cs - cf * ss,
        cf * st * cs + sf * ss,
        ct * ss,
        sf * st * ss + cf * cs,
        cf * st * ss - sf * cs,
        -st,
        sf * ct,
        cf * ct,
    )
}

/// Inverse of [`euler_to_dcm`]; returns `(phi, theta, psi)` in degrees.
pub fn dcm_to_euler(c: &Matrix3<f64>) -> (f64, f64, f64) {
    let theta = -math::asin(c[(2, 0)].clamp(-1.0, 1.0));
    let phi = math::atan2(c[(2, 1)], c[(2, 2)]);
    let psi = math::atan2(c[(1, 0)], c[(0, 0)]);
    (deg(phi), deg(theta), math::wrap_deg(deg(psi)))
}

/// Field-wise time derivatives of an [`AircraftState`] (per second).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateDerivative(pub AircraftState);

/// Actuator commands.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInput {
    /// Thrust, N.
    pub delta_t: f64,
    /// Elevator, deg. Positive pitches the nose up.
    pub delta_e: f64,
    /// Aileron, deg. Positive rolls right wing down.
    pub delta_a: f64,
    /// Rudder, deg. Positive yaws the nose right.
    pub delta_r: f64,
}

impl ControlInput {
    pub fn mirrored(&self) -> Self {
        ControlInput {
            delta_a: -self.delta_a,
            delta_r: -self.delta_r,
            ..*self
        }
    }

    pub fn is_within(&self, limits: &ActuatorLimits) -> bool {
        limits.thrust.contains(self.delta_t)
            && limits.elevator.contains(self.delta_e)
            && limits.aileron.contains(self.delta_a)
            && limits.rudder.contains(self.delta_r)
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Range { lo, hi }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuatorLimits {
    pub thrust: Range,
    pub elevator: Range,
    pub aileron: Range,
    pub rudder: Range,
}

impl Default for ActuatorLimits {
    fn default() -> Self {
        ActuatorLimits {
            thrust: Range::new(0.0, 10_000.0),
            elevator: Range::new(-15.0, 30.0),
            aileron: Range::new(-20.0, 20.0),
            rudder: Range::new(-27.0, 27.0),
        }
    }
}

/// Nondimensional stability and control derivatives, per radian.
///
/// Rates enter normalized: `p b / 2V`, `q c / 2V`, `r b / 2V`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AeroCoefficients {
    pub cl_0: f64,
    pub cl_alpha: f64,
    pub cl_q: f64,
    pub cl_de: f64,
    pub cd_0: f64,
    pub cd_alpha: f64,
    pub cy_beta: f64,
    pub cy_p: f64,
    pub cy_r: f64,
    pub cy_dr: f64,
    pub croll_beta: f64,
    pub croll_p: f64,
    pub croll_r: f64,
    pub croll_da: f64,
    pub croll_dr: f64,
    pub cm_0: f64,
    pub cm_alpha: f64,
    pub cm_q: f64,
    pub cm_de: f64,
    pub cn_beta: f64,
    pub cn_p: f64,
    pub cn_r: f64,
    pub cn_da: f64,
    pub cn_dr: f64,
}

impl Default for AeroCoefficients {
    // Landing configuration. Sized so that the 50 m/s, -3 deg trim sits at
    // alpha = 3 deg with zero elevator and about 5000 N of thrust.
    fn default() -> Self {
        AeroCoefficients {
            cl_0: 0.63529,
            cl_alpha: 5.0,
            cl_q: 4.0,
            cl_de: -0.2,
            cd_0: 0.20627,
            cd_alpha: 0.5,
            cy_beta: -1.0,
            cy_p: 0.0,
            cy_r: 0.3,
            cy_dr: -0.15,
            croll_beta: -0.08,
            croll_p: -0.5,
            croll_r: 0.1,
            croll_da: 0.1,
            croll_dr: 0.005,
            cm_0: 0.041888,
            cm_alpha: -0.8,
            cm_q: -30.0,
            cm_de: 0.4,
            cn_beta: 0.1,
            cn_p: -0.03,
            cn_r: -0.4,
            cn_da: -0.005,
            cn_dr: 0.08,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AirframeParams {
    /// kg
    pub mass: f64,
    /// Principal moments of inertia, kg m^2.
    pub ixx: f64,
    pub iyy: f64,
    pub izz: f64,
    /// m^2
    pub wing_area: f64,
    /// m
    pub span: f64,
    /// Mean aerodynamic chord, m.
    pub chord: f64,
    /// kg/m^3
    pub air_density: f64,
    /// Thrust line offset below the center of gravity, m.
    pub thrust_offset_z: f64,
    pub aero: AeroCoefficients,
    pub limits: ActuatorLimits,
}

impl Default for AirframeParams {
    fn default() -> Self {
        AirframeParams {
            mass: 2500.0,
            ixx: 4000.0,
            iyy: 5000.0,
            izz: 7000.0,
            wing_area: 18.0,
            span: 11.5,
            chord: 1.57,
            air_density: 1.2,
            thrust_offset_z: 0.0,
            aero: AeroCoefficients::default(),
            limits: ActuatorLimits::default(),
        }
    }
}

impl AirframeParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.mass,
            self.ixx,
            self.iyy,
            self.izz,
            self.wing_area,
            self.span,
            self.chord,
            self.air_density,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config("airframe mass, inertia and geometry must be positive"));
        }
        let l = &self.limits;
        for r in [l.thrust, l.elevator, l.aileron, l.rudder] {
            if !(r.lo <= r.hi) {
                return Err(Error::Config("actuator limits must be ordered"));
            }
        }
        Ok(())
    }

    /// Stall speed for a given maximum lift coefficient, m/s.
    pub fn stall_speed(&self, cl_max: f64) -> f64 {
        math::sqrt(2.0 * self.mass * GRAVITY / (self.air_density * self.wing_area * cl_max))
    }
}

/// Aerodynamic and propulsive force and moment in body axes.
fn forces_and_moments(
    s: &AircraftState,
    input: &ControlInput,
    params: &AirframeParams,
) -> Result<(Vector3<f64>, Vector3<f64>)> {
    let c = &params.aero;
    let airspeed = s.airspeed();
    if !(airspeed > 1e-3) {
        return Err(Error::Numerical("airspeed vanished"));
    }
    let alpha = math::atan2(s.w, s.u);
    let beta = math::asin((s.v / airspeed).clamp(-1.0, 1.0));
    let (p, q, r) = (rad(s.p), rad(s.q), rad(s.r));
    let p_hat = p * params.span / (2.0 * airspeed);
    let q_hat = q * params.chord / (2.0 * airspeed);
    let r_hat = r * params.span / (2.0 * airspeed);
    let (de, da, dr) = (rad(input.delta_e), rad(input.delta_a), rad(input.delta_r));

    let cl = c.cl_0 + c.cl_alpha * alpha + c.cl_q * q_hat + c.cl_de * de;
    let cd = c.cd_0 + c.cd_alpha * alpha;
    let cy = c.cy_beta * beta + c.cy_p * p_hat + c.cy_r * r_hat + c.cy_dr * dr;
    let croll =
        c.croll_beta * beta + c.croll_p * p_hat + c.croll_r * r_hat + c.croll_da * da + c.croll_dr * dr;
    let cm = c.cm_0 + c.cm_alpha * alpha + c.cm_q * q_hat + c.cm_de * de;
    let cn = c.cn_beta * beta + c.cn_p * p_hat + c.cn_r * r_hat + c.cn_da * da + c.cn_dr * dr;

    let qbar_s = 0.5 * params.air_density * airspeed * airspeed * params.wing_area;
    let (sa, ca) = (math::sin(alpha), math::cos(alpha));
    let force = Vector3::new(
        qbar_s * (-cd * ca + cl * sa) + input.delta_t,
        qbar_s * cy,
        qbar_s * (-cd * sa - cl * ca),
    );
    let moment = Vector3::new(
        qbar_s * params.span * croll,
        qbar_s * params.chord * cm + params.thrust_offset_z * input.delta_t,
        qbar_s * params.span * cn,
    );
    Ok((force, moment))
}

/// Time derivatives of all twelve states.
pub fn derivatives(
    state: &AircraftState,
    input: &ControlInput,
    params: &AirframeParams,
) -> Result<StateDerivative> {
    let s = state;
    let (force, moment) = forces_and_moments(s, input, params)?;
    let m = params.mass;
    let (p, q, r) = (rad(s.p), rad(s.q), rad(s.r));
    let (phi, theta) = (rad(s.phi), rad(s.theta));
    let (sf, cf) = (math::sin(phi), math::cos(phi));
    let (st, ct) = (math::sin(theta), math::cos(theta));
    if ct.abs() < 1e-6 {
        return Err(Error::Numerical("pitch attitude reached the Euler singularity"));
    }

    let u_dot = r * s.v - q * s.w + force.x / m - GRAVITY * st;
    let v_dot = p * s.w - r * s.u + force.y / m + GRAVITY * sf * ct;
    let w_dot = q * s.u - p * s.v + force.z / m + GRAVITY * cf * ct;

    let p_dot = (moment.x + (params.iyy - params.izz) * q * r) / params.ixx;
    let q_dot = (moment.y + (params.izz - params.ixx) * p * r) / params.iyy;
    let r_dot = (moment.z + (params.ixx - params.iyy) * p * q) / params.izz;

    let phi_dot = p + (st / ct) * (q * sf + r * cf);
    let theta_dot = q * cf - r * sf;
    let psi_dot = (q * sf + r * cf) / ct;

    let v_nav = s.body_to_approach() * Vector3::new(s.u, s.v, s.w);

    let d = AircraftState {
        u: u_dot,
        v: v_dot,
        w: w_dot,
        p: deg(p_dot),
        q: deg(q_dot),
        r: deg(r_dot),
        phi: deg(phi_dot),
        theta: deg(theta_dot),
        psi: deg(psi_dot),
        x: -v_nav.x,
        y: v_nav.y,
        h: -v_nav.z,
    };
    if !d.is_finite() {
        return Err(Error::Numerical("non-finite state derivative"));
    }
    Ok(StateDerivative(d))
}

fn axpy(base: &[f64; 12], k: &[f64; 12], h: f64) -> AircraftState {
    let mut out = [0.0; 12];
    for i in 0..12 {
        out[i] = base[i] + h * k[i];
    }
    AircraftState::from_array(out)
}

/// Fourth-order Runge-Kutta step with a zero-order hold on `input`.
pub fn step(
    state: &AircraftState,
    input: &ControlInput,
    params: &AirframeParams,
    dt: f64,
) -> Result<AircraftState> {
    if !(dt > 0.0 && dt <= 0.1) {
        return Err(Error::InvalidArg("integration step must lie in (0, 0.1] s"));
    }
    let y0 = state.to_array();
    let k1 = derivatives(state, input, params)?.0.to_array();
    let k2 = derivatives(&axpy(&y0, &k1, 0.5 * dt), input, params)?.0.to_array();
    let k3 = derivatives(&axpy(&y0, &k2, 0.5 * dt), input, params)?.0.to_array();
    let k4 = derivatives(&axpy(&y0, &k3, dt), input, params)?.0.to_array();
    let mut out = [0.0; 12];
    for i in 0..12 {
        out[i] = y0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    let mut next = AircraftState::from_array(out);
    next.psi = math::wrap_deg(next.psi);
    if !next.is_finite() {
        return Err(Error::Numerical("non-finite state after integration"));
    }
    if next.theta.abs() >= 89.0 || next.phi.abs() >= 89.0 {
        return Err(Error::Numerical("attitude left the (-90, 90) deg envelope"));
    }
    Ok(next)
}

const TRIM_TOLERANCE: f64 = 1e-10;
const TRIM_ITERATIONS: usize = 50;

fn trim_candidate(airspeed: f64, fpa: f64, z: &[f64; 3]) -> (AircraftState, ControlInput) {
    let alpha = z[0];
    let state = AircraftState {
        u: airspeed * math::cos(rad(alpha)),
        w: airspeed * math::sin(rad(alpha)),
        theta: alpha + fpa,
        ..AircraftState::default()
    };
    let input = ControlInput {
        delta_t: z[2],
        delta_e: z[1],
        ..ControlInput::default()
    };
    (state, input)
}

fn trim_residual(
    params: &AirframeParams,
    airspeed: f64,
    fpa: f64,
    z: &[f64; 3],
) -> Result<Vector3<f64>> {
    let (s, i) = trim_candidate(airspeed, fpa, z);
    let d = derivatives(&s, &i, params)?.0;
    Ok(Vector3::new(d.u, d.w, d.q))
}

/// Symmetric wings-level trim at `airspeed` (m/s) along flight-path angle
/// `flight_path_angle` (deg, negative descending).
///
/// Newton iteration over angle of attack, elevator and thrust. The returned
/// state sits at the origin of the approach frame; callers place it.
pub fn trim(
    params: &AirframeParams,
    airspeed: f64,
    flight_path_angle: f64,
) -> Result<(AircraftState, ControlInput)> {
    if !(airspeed > 0.0) || !flight_path_angle.is_finite() {
        return Err(Error::InvalidArg("trim needs a positive airspeed and finite flight path"));
    }
    params.validate()?;
    let mut z = [3.0, 0.0, 0.5 * (params.limits.thrust.lo + params.limits.thrust.hi)];
    let scale = [1e-5, 1e-5, 1e-2];
    let mut residual = f64::INFINITY;
    for _ in 0..TRIM_ITERATIONS {
        let f = trim_residual(params, airspeed, flight_path_angle, &z)?;
        residual = f.amax();
        if residual < TRIM_TOLERANCE {
            let (state, input) = trim_candidate(airspeed, flight_path_angle, &z);
            if !input.is_within(&params.limits) {
                break;
            }
            return Ok((state, input));
        }
        let mut jac = Matrix3::zeros();
        for j in 0..3 {
            let mut zp = z;
            let mut zm = z;
            zp[j] += scale[j];
            zm[j] -= scale[j];
            let df = (trim_residual(params, airspeed, flight_path_angle, &zp)?
                - trim_residual(params, airspeed, flight_path_angle, &zm)?)
                / (2.0 * scale[j]);
            jac.set_column(j, &df);
        }
        let Some(delta) = jac.lu().solve(&(-f)) else {
            break;
        };
        for j in 0..3 {
            z[j] += delta[j];
        }
        if !(z[0].abs() < 30.0) {
            break;
        }
    }
    Err(Error::TrimNotFound {
        iterations: TRIM_ITERATIONS,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dcm_round_trip() {
        let c = euler_to_dcm(12.0, -7.5, 140.0);
        let (phi, theta, psi) = dcm_to_euler(&c);
        assert!((phi - 12.0).abs() < 1e-10);
        assert!((theta + 7.5).abs() < 1e-10);
        assert!((psi - 140.0).abs() < 1e-10);
        assert!((c.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn step_rejects_bad_dt() {
        let p = AirframeParams::default();
        let (s, i) = trim(&p, 50.0, 0.0).unwrap();
        assert!(matches!(step(&s, &i, &p, 0.0), Err(Error::InvalidArg(_))));
        assert!(matches!(step(&s, &i, &p, 0.2), Err(Error::InvalidArg(_))));
    }

    #[test]
    fn zero_airspeed_is_numerical_error() {
        let p = AirframeParams::default();
        let s = AircraftState::default();
        assert!(matches!(
            derivatives(&s, &ControlInput::default(), &p),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn unreachable_trim_is_reported() {
        let p = AirframeParams::default();
        // Climbing at 20 deg needs more than the thrust limit.
        assert!(matches!(trim(&p, 50.0, 20.0), Err(Error::TrimNotFound { .. })));
    }

    #[test]
    fn invalid_params_rejected() {
        let p = AirframeParams {
            mass: -1.0,
            ..AirframeParams::default()
        };
        assert!(matches!(p.validate(), Err(Error::Config(_))));
    }
}
