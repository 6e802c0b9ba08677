//! Pinhole camera model and the angular quantities derived from it.
//!
//! Camera frame convention: `z` is the optical axis (boresight), `x` and `y`
//! run along the sensor rows and columns. Pixel coordinates follow the usual
//! intrinsics matrix `[fx 0 cx; 0 fy cy; 0 0 1]`, with the principal point on
//! a pixel vertex at the sensor centre.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arc minutes per degree; one arc minute of latitude is one nautical mile.
const NM_PER_DEGREE: f64 = 60.0;

/// Intrinsics of an ideal, distortion-free square sensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    /// Pixels along one side of the sensor.
    pub pixels: u32,
    /// Full horizontal (and vertical) angle of view, radians.
    pub fov: f64,
}

impl CameraIntrinsics {
    /// Square sensor with `pixels` × `pixels` elements and a centred principal
    /// point, such that the sensor edge sits exactly at `fov / 2` off axis.
    pub fn from_fov(fov: f64, pixels: u32) -> Result<Self> {
        check_fov(fov)?;
        check_pixels(pixels)?;
        let u = f64::from(pixels);
        let f = u / (2.0 * (fov / 2.0).tan());
        Ok(Self {
            fx: f,
            fy: f,
            cx: u / 2.0,
            cy: u / 2.0,
            pixels,
            fov,
        })
    }
}

/// Worst-case angle subtended by one pixel, with its sea-distance equivalent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularResolution {
    pub theta_res: f64,
    pub nm_equivalent: f64,
}

impl AngularResolution {
    pub fn new(fov: f64, pixels: u32) -> Result<Self> {
        let theta_res = max_angular_resolution(fov, pixels)?;
        Ok(Self {
            theta_res,
            nm_equivalent: resolution_to_nautical_miles(theta_res),
        })
    }
}

fn check_fov(fov: f64) -> Result<()> {
    if fov > 0.0 && fov < std::f64::consts::PI {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "field of view must lie in (0, pi) radians, got {fov}"
        )))
    }
}

fn check_pixels(pixels: u32) -> Result<()> {
    if pixels > 0 && pixels % 2 == 0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "pixel count must be even and positive, got {pixels}"
        )))
    }
}

/// Projects a camera-frame direction onto the sensor.
pub fn project_to_pixel(s_c: &Vector3<f64>, cam: &CameraIntrinsics) -> Result<(f64, f64)> {
    if !(s_c.z > 0.0) {
        return Err(Error::BehindCamera(s_c.z));
    }
    let u = cam.fx * (s_c.x / s_c.z) + cam.cx;
    let v = cam.fy * (s_c.y / s_c.z) + cam.cy;
    Ok((u, v))
}

/// Back-projects a pixel coordinate to a unit direction in the camera frame.
pub fn pixel_to_unit(u: f64, v: f64, cam: &CameraIntrinsics) -> Vector3<f64> {
    let un = (u - cam.cx) / cam.fx;
    let vn = (v - cam.cy) / cam.fy;
    Vector3::new(un, vn, 1.0) / (un * un + vn * vn + 1.0).sqrt()
}

/// Largest angle subtended by a single pixel: `atan(2 tan(fov/2) / U)`.
///
/// The worst pixel is the one with a vertex on the principal point, so this
/// bounds the per-pixel subtense everywhere on the sensor.
pub fn max_angular_resolution(fov: f64, pixels: u32) -> Result<f64> {
    check_fov(fov)?;
    check_pixels(pixels)?;
    Ok((2.0 * (fov / 2.0).tan() / f64::from(pixels)).atan())
}

pub fn resolution_to_nautical_miles(theta: f64) -> f64 {
    theta.to_degrees() * NM_PER_DEGREE
}

/// Great-circle angle between two unit vectors, in `[0, pi]`.
#[inline]
pub fn angular_distance(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    a.dot(b).clamp(-1.0, 1.0).acos()
}

/// Whether a camera-frame direction falls strictly inside the square field of view.
pub fn in_fov(s_c: &Vector3<f64>, fov: f64) -> bool {
    if !(s_c.z > 0.0) {
        return false;
    }
    let half = (fov / 2.0).tan();
    (s_c.x / s_c.z).abs() < half && (s_c.y / s_c.z).abs() < half
}

/// Corner-to-corner angle of a square field of view; the largest separation
/// two stars in one frame can have.
pub fn fov_diagonal(fov: f64) -> f64 {
    2.0 * (std::f64::consts::SQRT_2 * (fov / 2.0).tan()).atan()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    fn cam(fov_deg: f64) -> CameraIntrinsics {
        CameraIntrinsics::from_fov(fov_deg.to_radians(), 1024).unwrap()
    }

    #[test]
    fn boresight_projects_to_principal_point() {
        let c = cam(20.0);
        let (u, v) = project_to_pixel(&Vector3::z(), &c).unwrap();
        assert_eq!((u, v), (c.cx, c.cy));
    }

    #[test]
    fn fov_edge_projects_to_sensor_edge() {
        let c = cam(20.0);
        let s = Vector3::new((c.fov / 2.0).tan(), 0.0, 1.0).normalize();
        let (u, _) = project_to_pixel(&s, &c).unwrap();
        assert!((u - 1024.0).abs() < 1e-9, "u = {u}");
    }

    #[test]
    fn behind_camera_is_an_error() {
        let c = cam(20.0);
        assert!(matches!(
            project_to_pixel(&-Vector3::z(), &c),
            Err(Error::BehindCamera(_))
        ));
        assert!(project_to_pixel(&Vector3::x(), &c).is_err());
    }

    #[test]
    fn pixel_to_unit_fixed_points() {
        let c = cam(40.0);
        let s = pixel_to_unit(c.cx, c.cy, &c);
        assert!((s - Vector3::z()).norm() < 1e-15);
        let s = pixel_to_unit(c.cx + c.fx, c.cy, &c);
        let expected = Vector3::new(1.0, 0.0, 1.0) / SQRT_2;
        assert!((s - expected).norm() < 1e-15);
    }

    #[test]
    fn projection_round_trip() {
        let c = cam(80.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let half = (c.fov / 2.0).tan();
        for _ in 0..1000 {
            let s = Vector3::new(
                rng.random_range(-half..half),
                rng.random_range(-half..half),
                1.0,
            )
            .normalize();
            let (u, v) = project_to_pixel(&s, &c).unwrap();
            let back = pixel_to_unit(u, v, &c);
            assert!((s - back).norm() < 1e-12);
        }
    }

    #[test]
    fn resolution_rejects_bad_inputs() {
        assert!(max_angular_resolution(0.0, 1024).is_err());
        assert!(max_angular_resolution(PI, 1024).is_err());
        assert!(max_angular_resolution(0.3, 1023).is_err());
        assert!(max_angular_resolution(0.3, 0).is_err());
        assert!(CameraIntrinsics::from_fov(-0.1, 1024).is_err());
    }

    #[test]
    fn resolution_vanishes_with_fov() {
        let r = max_angular_resolution(1e-9, 1024).unwrap();
        assert!(r < 1e-11);
    }

    #[test]
    fn resolution_reference_values() {
        // Frozen from a 40-digit mpmath evaluation of atan(2 tan(fov/2) / U).
        let r20 = max_angular_resolution(20f64.to_radians(), 1024).unwrap();
        assert!((r20 - 3.443_886_205_809_855_6e-4).abs() / r20 < 1e-12);
        assert!((resolution_to_nautical_miles(r20) - 1.183_920_868_297_362_8).abs() < 1e-10);
        let r80 = max_angular_resolution(80f64.to_radians(), 1024).unwrap();
        assert!((r80 - 1.638_864_999_877_466_1e-3).abs() / r80 < 1e-12);
        assert!((resolution_to_nautical_miles(r80) - 5.634_002_861_081_219).abs() < 1e-10);
        let r40 = max_angular_resolution(40f64.to_radians(), 1024).unwrap();
        assert!(resolution_to_nautical_miles(r40) > resolution_to_nautical_miles(r20));
    }

    #[test]
    fn nautical_mile_definition() {
        assert!((resolution_to_nautical_miles(PI / 180.0 / 60.0) - 1.0).abs() < 1e-12);
        assert_eq!(resolution_to_nautical_miles(0.0), 0.0);
        let r = AngularResolution::new(20f64.to_radians(), 1024).unwrap();
        assert!((r.nm_equivalent - r.theta_res.to_degrees() * 60.0).abs() < 1e-15);
    }

    #[test]
    fn per_pixel_subtense_is_bounded() {
        for &fov in &[5.0, 20.0, 80.0] {
            let c = CameraIntrinsics::from_fov(f64::to_radians(fov), 64).unwrap();
            let bound = max_angular_resolution(c.fov, 64).unwrap();
            for i in 0..64 {
                for j in 0..64 {
                    let (u, v) = (i as f64, j as f64);
                    let s = pixel_to_unit(u, v, &c);
                    let right = pixel_to_unit(u + 1.0, v, &c);
                    let down = pixel_to_unit(u, v + 1.0, &c);
                    assert!(angular_distance(&s, &right) <= bound + 1e-15);
                    assert!(angular_distance(&s, &down) <= bound + 1e-15);
                }
            }
        }
    }

    #[test]
    fn angular_distance_axes() {
        let (x, y) = (Vector3::x(), Vector3::y());
        assert_eq!(angular_distance(&x, &x), 0.0);
        assert!((angular_distance(&x, &y) - FRAC_PI_2).abs() < 1e-15);
        assert!((angular_distance(&x, &-x) - PI).abs() < 1e-15);
    }

    #[test]
    fn fov_membership() {
        let fov = 20f64.to_radians();
        assert!(in_fov(&Vector3::z(), fov));
        assert!(!in_fov(&-Vector3::z(), fov));
        let t = (fov / 2.0).tan();
        assert!(!in_fov(&Vector3::new(t, t, 1.0), fov));
        assert!(!in_fov(&Vector3::new(-t, 0.0, 1.0), fov));
        assert!(in_fov(
            &Vector3::new(-0.99 * t, 0.99 * t, 1.0).normalize(),
            fov
        ));
    }

    #[test]
    fn diagonal_values() {
        assert_eq!(fov_diagonal(0.0), 0.0);
        // 2 atan(sqrt(2) tan 40deg) = 99.758519582914...deg (mpmath)
        assert!(
            (fov_diagonal(80f64.to_radians()).to_degrees() - 99.758_519_582_914_03).abs() < 1e-10
        );
        let mut last = 0.0;
        for d in 1..179 {
            let v = fov_diagonal(f64::from(d).to_radians());
            assert!(v > last);
            last = v;
        }
    }
}
