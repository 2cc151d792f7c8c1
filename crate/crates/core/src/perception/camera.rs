//! Pinhole camera rigidly mounted on the airframe.

use alloc::vec::Vec;

use nalgebra::{Matrix3, Vector2, Vector3};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{self, rad};

pub type Pixel = Vector2<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraModel {
    /// Focal lengths, px.
    pub fx: f64,
    pub fy: f64,
    /// Principal point, px.
    pub cx: f64,
    pub cy: f64,
    pub width: f64,
    pub height: f64,
    /// Standard deviation of additive pixel noise per coordinate, px.
    pub pixel_sigma: f64,
    /// Camera center in body axes (forward, right, down), m.
    pub mount_offset: [f64; 3],
    /// Depression of the optical axis below the body X axis, deg.
    pub mount_pitch_down: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        CameraModel {
            fx: 1100.0,
            fy: 1100.0,
            cx: 960.0,
            cy: 540.0,
            width: 1920.0,
            height: 1080.0,
            pixel_sigma: 1.0,
            mount_offset: [-5.0, 0.0, -1.2],
            mount_pitch_down: 6.0,
        }
    }
}

/// Position and attitude of the aircraft body in the approach frame
/// (forward along the landing direction, right, down; origin at the
/// threshold center on the runway plane).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyPose {
    pub position: Vector3<f64>,
    /// Body-to-approach rotation.
    pub attitude: Matrix3<f64>,
}

/// Camera extrinsics: `X_cam = rotation * X_world + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl CameraPose {
    /// Camera center in world coordinates.
    pub fn center(&self) -> Vector3<f64> {
        -(self.rotation.transpose() * self.translation)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub pixels: Vec<Pixel>,
    /// Every pixel lies inside the image.
    pub in_frame: bool,
}

impl CameraModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::Config("focal lengths must be positive"));
        }
        if !(self.cx > 0.0 && self.cx < self.width && self.cy > 0.0 && self.cy < self.height) {
            return Err(Error::Config("principal point must lie inside the image"));
        }
        if !(self.pixel_sigma >= 0.0) {
            return Err(Error::Config("pixel noise must be non-negative"));
        }
        Ok(())
    }

    pub fn intrinsics(&self) -> Matrix3<f64> {
        Matrix3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0)
    }

    /// Rotation from body axes to camera axes (x right, y down, z optical axis).
    pub fn body_to_camera(&self) -> Matrix3<f64> {
        let e = rad(self.mount_pitch_down);
        let (s, c) = (math::sin(e), math::cos(e));
        Matrix3::new(0.0, 1.0, 0.0, -s, 0.0, c, c, 0.0, s)
    }

    pub fn mount(&self) -> Vector3<f64> {
        Vector3::from(self.mount_offset)
    }

    pub fn camera_pose(&self, body: &BodyPose) -> CameraPose {
        let rotation = self.body_to_camera() * body.attitude.transpose();
        let center = body.position + body.attitude * self.mount();
        CameraPose {
            rotation,
            translation: -(rotation * center),
        }
    }

    pub fn body_pose(&self, cam: &CameraPose) -> BodyPose {
        let attitude = cam.rotation.transpose() * self.body_to_camera();
        let position = cam.center() - attitude * self.mount();
        BodyPose { position, attitude }
    }

    pub fn in_image(&self, px: &Pixel) -> bool {
        px.x >= 0.0 && px.x <= self.width && px.y >= 0.0 && px.y <= self.height
    }

    /// Ideal projection of world points through a camera pose.
    pub fn project_camera(&self, cam: &CameraPose, points: &[Vector3<f64>]) -> Result<Vec<Pixel>> {
        points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let c = cam.rotation * p + cam.translation;
                if !(c.z > 1e-9) {
                    return Err(Error::BehindCamera(i));
                }
                Ok(Pixel::new(self.fx * c.x / c.z + self.cx, self.fy * c.y / c.z + self.cy))
            })
            .collect()
    }
}

/// Projects world points seen from `pose`, optionally adding i.i.d.
/// Gaussian noise of `camera.pixel_sigma` to each coordinate.
pub fn project<R: Rng + ?Sized>(
    camera: &CameraModel,
    pose: &BodyPose,
    points: &[Vector3<f64>],
    rng: Option<&mut R>,
) -> Result<Projection> {
    let mut pixels = camera.project_camera(&camera.camera_pose(pose), points)?;
    if let Some(rng) = rng {
        if camera.pixel_sigma > 0.0 {
            let normal = Normal::new(0.0, camera.pixel_sigma)
                .map_err(|_| Error::Config("invalid pixel noise"))?;
            for px in pixels.iter_mut() {
                px.x += normal.sample(rng);
                px.y += normal.sample(rng);
            }
        }
    }
    let in_frame = pixels.iter().all(|px| camera.in_image(px));
    Ok(Projection { pixels, in_frame })
}
