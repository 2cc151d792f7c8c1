//! Camera pose from a plane-to-image homography, and reprojection-error
//! refinement of the aircraft pose.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, Matrix3, Vector2, Vector3};

use super::camera::{BodyPose, CameraModel, CameraPose, Pixel};
use crate::airframe::{dcm_to_euler, euler_to_dcm};
use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarPose {
    pub camera: CameraPose,
    /// Root-mean-square reprojection error, px.
    pub reprojection_rms: f64,
}

fn plane_to_world(p: &Vector2<f64>) -> Vector3<f64> {
    Vector3::new(p.x, p.y, 0.0)
}

pub fn reprojection_rms(
    camera: &CameraModel,
    pose: &CameraPose,
    pixels: &[Pixel],
    world: &[Vector3<f64>],
) -> Result<f64> {
    let proj = camera.project_camera(pose, world)?;
    let sq: f64 = proj.iter().zip(pixels).map(|(a, b)| (a - b).norm_squared()).sum();
    Ok(math::sqrt(sq / pixels.len().max(1) as f64))
}

fn nearest_rotation(m: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let svd = m.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Numerical("rotation SVD failed")),
    };
    let mut r = u * v_t;
    if r.determinant() < 0.0 {
        let mut u = u;
        u.column_mut(2).neg_mut();
        r = u * v_t;
    }
    Ok(r)
}

/// Decomposes `K^-1 H` into rotation and translation.
///
/// Both signs of the scale are tried; candidates placing the camera below
/// the plane or any point behind the camera are discarded, and the most
/// consistent remaining one (lowest reprojection error) is returned.
/// `plane` holds the points' coordinates on the plane `z = 0`.
pub fn planar_pose(
    h: &Matrix3<f64>,
    camera: &CameraModel,
    pixels: &[Pixel],
    plane: &[Vector2<f64>],
) -> Result<PlanarPose> {
    let k_inv = camera
        .intrinsics()
        .try_inverse()
        .ok_or(Error::Numerical("singular intrinsics"))?;
    let m = k_inv * h;
    let (m1, m2, m3) = (m.column(0).into_owned(), m.column(1).into_owned(), m.column(2).into_owned());
    let n1 = m1.norm();
    let n2 = m2.norm();
    if !(n1 > 1e-15 && n2 > 1e-15) {
        return Err(Error::Numerical("rank-deficient homography"));
    }
    let lambda = 2.0 / (n1 + n2);
    let world: Vec<Vector3<f64>> = plane.iter().map(plane_to_world).collect();

    let mut best: Option<PlanarPose> = None;
    for sign in [1.0, -1.0] {
        let l = sign * lambda;
        let r1 = m1 * l;
        let r2 = m2 * l;
        let r3 = r1.cross(&r2);
        let rotation = nearest_rotation(&Matrix3::from_columns(&[r1, r2, r3]))?;
        let pose = CameraPose {
            rotation,
            translation: m3 * l,
        };
        if !(pose.center().z < 0.0) {
            continue;
        }
        let Ok(rms) = reprojection_rms(camera, &pose, pixels, &world) else {
            continue;
        };
        if best.map_or(true, |b| rms < b.reprojection_rms) {
            best = Some(PlanarPose {
                camera: pose,
                reprojection_rms: rms,
            });
        }
    }
    best.ok_or(Error::Numerical("no planar pose candidate in front of the camera"))
}

/// Body position (forward, right, down) and Euler angles (deg).
pub type PoseParams = [f64; 6];

pub fn pose_params(body: &BodyPose) -> PoseParams {
    let (phi, theta, psi) = dcm_to_euler(&body.attitude);
    [body.position.x, body.position.y, body.position.z, phi, theta, psi]
}

pub fn params_pose(p: &PoseParams) -> BodyPose {
    BodyPose {
        position: Vector3::new(p[0], p[1], p[2]),
        attitude: euler_to_dcm(p[3], p[4], p[5]),
    }
}

fn residuals(camera: &CameraModel, p: &PoseParams, pixels: &[Pixel], world: &[Vector3<f64>]) -> Result<DVector<f64>> {
    let proj = camera.project_camera(&camera.camera_pose(&params_pose(p)), world)?;
    let mut r = DVector::zeros(2 * pixels.len());
    for (i, (a, b)) in proj.iter().zip(pixels).enumerate() {
        r[2 * i] = a.x - b.x;
        r[2 * i + 1] = a.y - b.y;
    }
    Ok(r)
}

/// Levenberg-Marquardt refinement of the body pose against observed pixels.
///
/// With `fixed_down` the vertical position is pinned to the given value and
/// only the remaining five parameters move.
pub fn refine_body_pose(
    camera: &CameraModel,
    initial: &PoseParams,
    pixels: &[Pixel],
    world: &[Vector3<f64>],
    fixed_down: Option<f64>,
    iterations: usize,
) -> Result<(PoseParams, f64)> {
    let mut p = *initial;
    if let Some(d) = fixed_down {
        p[2] = d;
    }
    let free: Vec<usize> = (0..6).filter(|i| !(fixed_down.is_some() && *i == 2)).collect();
    let mut r = residuals(camera, &p, pixels, world)?;
    let mut cost = r.norm_squared();
    let mut mu = 1e-3;
    let steps = [1e-4, 1e-4, 1e-4, 1e-6, 1e-6, 1e-6];
    for _ in 0..iterations {
        if cost < 1e-24 {
            break;
        }
        let mut jac = DMatrix::zeros(r.len(), free.len());
        for (c, &i) in free.iter().enumerate() {
            let step = steps[i] * (1.0 + p[i].abs());
            let mut pp = p;
            let mut pm = p;
            pp[i] += step;
            pm[i] -= step;
            let d = (residuals(camera, &pp, pixels, world)? - residuals(camera, &pm, pixels, world)?) / (2.0 * step);
            jac.set_column(c, &d);
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        let mut improved = false;
        for _ in 0..8 {
            let mut a = jtj.clone();
            for d in 0..free.len() {
                a[(d, d)] += mu * (1.0 + jtj[(d, d)]);
            }
            let Some(delta) = a.cholesky().map(|c| c.solve(&(-&jtr))) else {
                mu *= 10.0;
                continue;
            };
            let mut trial = p;
            for (c, &i) in free.iter().enumerate() {
                trial[i] += delta[c];
            }
            match residuals(camera, &trial, pixels, world) {
                Ok(rt) if rt.norm_squared() < cost => {
                    let small = delta.amax() < 1e-12;
                    p = trial;
                    r = rt;
                    cost = r.norm_squared();
                    mu = (mu * 0.3).max(1e-9);
                    improved = !small;
                    break;
                }
                _ => mu *= 10.0,
            }
        }
        if !improved {
            break;
        }
    }
    p[5] = math::wrap_deg(p[5]);
    Ok((p, math::sqrt(cost / pixels.len().max(1) as f64)))
}
