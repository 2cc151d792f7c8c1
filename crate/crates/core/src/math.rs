//! Scalar helpers over `libm` so the crate stays `no_std`.

pub const DEG: f64 = core::f64::consts::PI / 180.0;

#[inline]
pub fn rad(deg: f64) -> f64 {
    deg * DEG
}

#[inline]
pub fn deg(rad: f64) -> f64 {
    rad / DEG
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn tan(x: f64) -> f64 {
    libm::tan(x)
}

#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub fn asin(x: f64) -> f64 {
    libm::asin(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

/// Tangent of an angle given in degrees.
#[inline]
pub fn tan_deg(x: f64) -> f64 {
    libm::tan(x * DEG)
}

/// Wraps an angle in degrees into `[-180, 180)`.
pub fn wrap_deg(a: f64) -> f64 {
    if (-180.0..180.0).contains(&a) {
        return a;
    }
    let w = a - 360.0 * floor((a + 180.0) / 360.0);
    if w >= 180.0 {
        w - 360.0
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_into_half_open_range() {
        assert_eq!(wrap_deg(0.0), 0.0);
        assert_eq!(wrap_deg(180.0), -180.0);
        assert_eq!(wrap_deg(-180.0), -180.0);
        assert!((wrap_deg(190.0) + 170.0).abs() < 1e-12);
        assert!((wrap_deg(-190.0) - 170.0).abs() < 1e-12);
        assert!((wrap_deg(725.0) - 5.0).abs() < 1e-12);
    }
}
