//! Runway geometry, glideslope reference and threshold-frame transforms.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{self, rad, tan_deg};

/// A point in the local metric world frame: east, north, and altitude MSL.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WorldPoint {
    pub east: f64,
    pub north: f64,
    pub up: f64,
}

/// A point in the runway threshold frame: `x` backward along the runway
/// axis, `y` to the left, `h` altitude MSL.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RunwayPoint {
    pub x: f64,
    pub y: f64,
    pub h: f64,
}

/// Straight glide path through `h_threshold` at the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Glideslope {
    /// m MSL
    pub h_threshold: f64,
    /// deg
    pub gamma: f64,
}

impl Glideslope {
    /// Reference altitude at distance `x` from the threshold. The line is
    /// extended past the threshold (negative `x`) so the approach can run
    /// on to the end-of-approach height.
    pub fn altitude(&self, x: f64) -> f64 {
        glideslope_altitude(x, self.h_threshold, self.gamma)
    }
}

/// `h_threshold + x tan(gamma)`.
pub fn glideslope_altitude(x: f64, h_threshold: f64, gamma_deg: f64) -> f64 {
    h_threshold + x * tan_deg(gamma_deg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub x: f64,
    pub y: f64,
    pub h: f64,
}

/// Waypoints from `x_start` down to the threshold every `spacing` meters.
pub fn generate_waypoints(glideslope: &Glideslope, x_start: f64, spacing: f64) -> Result<Vec<Waypoint>> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::InvalidArg("waypoint spacing must be positive"));
    }
    if !(x_start > 0.0) || !x_start.is_finite() {
        return Err(Error::InvalidArg("waypoint start must be positive"));
    }
    let eps = 1e-9 * x_start;
    let mut out = Vec::new();
    let mut k = 0usize;
    loop {
        let x = x_start - (k as f64) * spacing;
        if x <= eps {
            break;
        }
        out.push(Waypoint {
            x,
            y: 0.0,
            h: glideslope.altitude(x),
        });
        k += 1;
    }
    out.push(Waypoint {
        x: 0.0,
        y: 0.0,
        h: glideslope.altitude(0.0),
    });
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunwayGeometry {
    /// Threshold center in the world frame, m.
    pub threshold_east: f64,
    pub threshold_north: f64,
    /// True heading of the landing direction, deg clockwise from north.
    pub heading: f64,
    pub length: f64,
    pub width: f64,
    /// Glideslope angle, deg.
    pub gamma: f64,
    /// Threshold crossing height, m.
    pub tch: f64,
    /// Touchdown-zone (field) elevation, m MSL.
    pub field_elevation: f64,
    /// Distance from the threshold to the near edge of the aiming-point markings, m.
    pub aiming_point_distance: f64,
    /// Length of the aiming-point markings along the runway, m.
    pub aiming_point_length: f64,
    /// Lateral offset of the outer edge of the aiming-point markings, m.
    pub aiming_point_offset: f64,
}

impl Default for RunwayGeometry {
    /// Ann Arbor (KARB) runway 06.
    fn default() -> Self {
        RunwayGeometry {
            threshold_east: 0.0,
            threshold_north: 0.0,
            heading: 59.0,
            length: 1068.0,
            width: 22.9,
            gamma: 3.0,
            tch: 6.1,
            field_elevation: 253.0,
            aiming_point_distance: 305.0,
            aiming_point_length: 45.0,
            aiming_point_offset: 9.0,
        }
    }
}

impl RunwayGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 6.0) {
            return Err(Error::Config("glideslope angle must lie in (0, 6) deg"));
        }
        if !(self.length > 0.0 && self.width > 0.0 && self.tch >= 0.0) {
            return Err(Error::Config("runway length, width and TCH must be positive"));
        }
        if !(self.aiming_point_length > 0.0 && self.aiming_point_offset > 0.0) {
            return Err(Error::Config("aiming-point markings need positive size"));
        }
        Ok(())
    }

    pub fn h_threshold(&self) -> f64 {
        self.field_elevation + self.tch
    }

    pub fn glideslope(&self) -> Glideslope {
        Glideslope {
            h_threshold: self.h_threshold(),
            gamma: self.gamma,
        }
    }

    fn axes(&self) -> ((f64, f64), (f64, f64)) {
        let (s, c) = (math::sin(rad(self.heading)), math::cos(rad(self.heading)));
        // (east, north) components of the landing direction and of its left.
        ((s, c), (-c, s))
    }

    pub fn to_runway_frame(&self, p: &WorldPoint) -> RunwayPoint {
        let (fwd, left) = self.axes();
        let de = p.east - self.threshold_east;
        let dn = p.north - self.threshold_north;
        RunwayPoint {
            x: -(de * fwd.0 + dn * fwd.1),
            y: de * left.0 + dn * left.1,
            h: p.up,
        }
    }

    pub fn from_runway_frame(&self, p: &RunwayPoint) -> WorldPoint {
        let (fwd, left) = self.axes();
        WorldPoint {
            east: self.threshold_east - p.x * fwd.0 + p.y * left.0,
            north: self.threshold_north - p.x * fwd.1 + p.y * left.1,
            up: p.h,
        }
    }

    fn runway_plane_point(&self, along: f64, left: f64) -> WorldPoint {
        self.from_runway_frame(&RunwayPoint {
            x: -along,
            y: left,
            h: self.field_elevation,
        })
    }

    /// Threshold-left, threshold-right, far-right, far-left.
    pub fn corners(&self) -> [WorldPoint; 4] {
        let half = 0.5 * self.width;
        [
            self.runway_plane_point(0.0, half),
            self.runway_plane_point(0.0, -half),
            self.runway_plane_point(self.length, -half),
            self.runway_plane_point(self.length, half),
        ]
    }

    /// Outer corners of the aiming-point marking pair, same ordering as [`Self::corners`].
    pub fn aiming_points(&self) -> [WorldPoint; 4] {
        let near = self.aiming_point_distance;
        let far = near + self.aiming_point_length;
        let off = self.aiming_point_offset;
        [
            self.runway_plane_point(near, off),
            self.runway_plane_point(near, -off),
            self.runway_plane_point(far, -off),
            self.runway_plane_point(far, off),
        ]
    }
}
