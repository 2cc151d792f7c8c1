//! Plane-to-image homography by normalized direct linear transform.

use nalgebra::{DMatrix, Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};
use crate::math;

/// Relative triangle area below which three points count as collinear.
const COLLINEAR_TOLERANCE: f64 = 1e-9;

fn has_collinear_triple(points: &[Vector2<f64>]) -> bool {
    let n = points.len();
    let scale = points
        .iter()
        .flat_map(|a| points.iter().map(move |b| (a - b).norm()))
        .fold(0.0, f64::max);
    if !(scale > 0.0) {
        return true;
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let a = points[j] - points[i];
                let b = points[k] - points[i];
                let area = (a.x * b.y - a.y * b.x).abs();
                if area <= COLLINEAR_TOLERANCE * scale * scale {
                    return true;
                }
            }
        }
    }
    false
}

/// Similarity that moves the centroid to the origin and the mean distance to sqrt(2).
fn normalizer(points: &[Vector2<f64>]) -> Matrix3<f64> {
    let n = points.len() as f64;
    let c = points.iter().fold(Vector2::zeros(), |acc, p| acc + p) / n;
    let mean = points.iter().map(|p| (p - c).norm()).sum::<f64>() / n;
    let s = math::sqrt(2.0) / mean;
    Matrix3::new(s, 0.0, -s * c.x, 0.0, s, -s * c.y, 0.0, 0.0, 1.0)
}

fn apply(t: &Matrix3<f64>, p: &Vector2<f64>) -> Vector2<f64> {
    let v = t * Vector3::new(p.x, p.y, 1.0);
    Vector2::new(v.x / v.z, v.y / v.z)
}

/// Maps a plane point through `h` into the image.
pub fn transfer(h: &Matrix3<f64>, p: &Vector2<f64>) -> Vector2<f64> {
    apply(h, p)
}

/// Estimates `H` with `pixel ~ H [plane; 1]` from four or more correspondences.
///
/// The result has unit Frobenius norm and positive determinant.
pub fn estimate_homography(pixels: &[Vector2<f64>], plane: &[Vector2<f64>]) -> Result<Matrix3<f64>> {
    let n = pixels.len();
    if n < 4 || plane.len() != n {
        return Err(Error::InvalidArg("homography needs at least four matched points"));
    }
    if has_collinear_triple(plane) {
        return Err(Error::DegenerateConfiguration);
    }
    let tp = normalizer(plane);
    let ti = normalizer(pixels);
    let rows = (2 * n).max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for k in 0..n {
        let x = apply(&tp, &plane[k]);
        let u = apply(&ti, &pixels[k]);
        let r = 2 * k;
        a[(r, 0)] = -x.x;
        a[(r, 1)] = -x.y;
        a[(r, 2)] = -1.0;
        a[(r, 6)] = u.x * x.x;
        a[(r, 7)] = u.x * x.y;
        a[(r, 8)] = u.x;
        a[(r + 1, 3)] = -x.x;
        a[(r + 1, 4)] = -x.y;
        a[(r + 1, 5)] = -1.0;
        a[(r + 1, 6)] = u.y * x.x;
        a[(r + 1, 7)] = u.y * x.y;
        a[(r + 1, 8)] = u.y;
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.ok_or(Error::Numerical("homography SVD failed"))?;
    let sv = &svd.singular_values;
    let (imin, _) = sv
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(Error::Numerical("homography SVD failed"))?;
    // A second vanishing singular value means the solution is not unique.
    let mut sorted: alloc::vec::Vec<f64> = sv.iter().copied().collect();
    sorted.sort_by(f64::total_cmp);
    if sorted[1] <= 1e-12 * sorted[sorted.len() - 1] {
        return Err(Error::DegenerateConfiguration);
    }
    let h = v_t.row(imin);
    let hn = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let ti_inv = ti.try_inverse().ok_or(Error::Numerical("singular image normalizer"))?;
    let mut out = ti_inv * hn * tp;
    let norm = out.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::Numerical("homography vanished"));
    }
    out /= norm;
    if out.determinant() < 0.0 {
        out = -out;
    }
    Ok(out)
}
