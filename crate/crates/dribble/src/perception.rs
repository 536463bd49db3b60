//! Equidistant fisheye geometry (`r = f·θ`) and the two ball position models.
//!
//! Camera frame: optical axis `+z`, image `u` along `+x`, image `v` along `+y`.
//! Body frame: `x` forward, `y` left, `z` up, origin at the body centre.
//! The body-ground frame shares `x`, `y` with the body frame and has its origin
//! on the ground below the body.

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::Vec2;

pub type Vec3 = Vector3<f64>;

pub const BALL_DIAMETER: f64 = 0.18;
/// 210 degrees.
pub const DEFAULT_FOV: f64 = 210.0 * std::f64::consts::PI / 180.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
    pub confidence: f64,
}

impl BoundingBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64, confidence: f64) -> Result<Self> {
        let b = Self { x_min, y_min, x_max, y_max, confidence };
        b.validate()?;
        Ok(b)
    }

    fn validate(&self) -> Result<()> {
        ensure_finite("bounding box", &[self.x_min, self.y_min, self.x_max, self.y_max, self.confidence])?;
        if self.x_max <= self.x_min || self.y_max <= self.y_min {
            return Err(Error::InvalidInput("degenerate bounding box".into()));
        }
        Ok(())
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CameraModel {
    pub focal: f64,
    pub principal_point: Vec2,
    pub mount_position: Vec3,
    /// Camera to body rotation.
    pub mount_orientation: Rotation3<f64>,
    pub fov: f64,
}

impl CameraModel {
    pub fn new(focal: f64, principal_point: Vec2, mount_position: Vec3, mount_orientation: Rotation3<f64>, fov: f64) -> Result<Self> {
        ensure_finite("camera", &[focal, fov, principal_point.x, principal_point.y])?;
        ensure_finite("camera mount", mount_position.as_slice())?;
        if focal <= 0.0 {
            return Err(Error::InvalidInput(format!("focal must be positive, got {focal}")));
        }
        if !(fov > 0.0 && fov < 2.0 * std::f64::consts::PI) {
            return Err(Error::InvalidInput(format!("fov must lie in (0, 2π), got {fov}")));
        }
        Ok(Self { focal, principal_point, mount_position, mount_orientation, fov })
    }

    /// Optical axis along body `x` tilted down by `pitch`; image right is body right.
    pub fn pitched(focal: f64, principal_point: Vec2, mount_position: Vec3, pitch: f64) -> Result<Self> {
        let (s, c) = pitch.sin_cos();
        let z = Vec3::new(c, 0.0, -s);
        let x = Vec3::new(0.0, -1.0, 0.0);
        let y = z.cross(&x);
        let rot = Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[x, y, z]));
        Self::new(focal, principal_point, mount_position, rot, DEFAULT_FOV)
    }

    pub fn with_fov(self, fov: f64) -> Result<Self> {
        Self::new(self.focal, self.principal_point, self.mount_position, self.mount_orientation, fov)
    }

    pub fn forward(focal: f64, principal_point: Vec2, mount_position: Vec3) -> Result<Self> {
        Self::pitched(focal, principal_point, mount_position, 0.0)
    }

    pub fn downward(focal: f64, principal_point: Vec2, mount_position: Vec3) -> Result<Self> {
        Self::pitched(focal, principal_point, mount_position, std::f64::consts::FRAC_PI_2)
    }

    pub fn to_body(&self, p_cam: Vec3) -> Vec3 {
        self.mount_position + self.mount_orientation * p_cam
    }

    pub fn to_camera(&self, p_body: Vec3) -> Vec3 {
        self.mount_orientation.inverse() * (p_body - self.mount_position)
    }
}

pub fn bbox_diameter(b: &BoundingBox) -> Result<f64> {
    b.validate()?;
    Ok(((b.x_max - b.x_min) * (b.y_max - b.y_min)).sqrt())
}

/// Distance from the camera to the ball centre from the box's angular size.
pub fn viewing_angle_distance(b: &BoundingBox, cam: &CameraModel, ball_diameter: f64) -> Result<f64> {
    let dtheta = bbox_diameter(b)? / cam.focal;
    if !(dtheta > 0.0 && dtheta < std::f64::consts::PI) {
        return Err(Error::Geometry(format!("angular diameter {dtheta} outside (0, π)")));
    }
    Ok(ball_diameter / (2.0 * (dtheta / 2.0).sin()))
}

pub fn pixel_to_ray(pixel: Vec2, cam: &CameraModel) -> Result<Vec3> {
    ensure_finite("pixel", &[pixel.x, pixel.y])?;
    let off = pixel - cam.principal_point;
    let theta = off.norm() / cam.focal;
    let limit = cam.fov / 2.0;
    if theta > limit {
        return Err(Error::OutOfView { theta, limit });
    }
    let alpha = off.y.atan2(off.x);
    let (st, ct) = theta.sin_cos();
    Ok(Vec3::new(st * alpha.cos(), st * alpha.sin(), ct))
}

/// Ball centre in the body frame from box size and box centre direction.
pub fn viewing_angle_position(b: &BoundingBox, cam: &CameraModel, ball_diameter: f64) -> Result<Vec3> {
    let d = viewing_angle_distance(b, cam, ball_diameter)?;
    let ray = pixel_to_ray(b.center(), cam)?;
    Ok(cam.to_body(d * ray))
}

/// Horizontal ball position in the body-ground frame, where the box centre
/// ray meets the plane `z = ball_radius`.
pub fn projection_intersection(pixel: Vec2, cam: &CameraModel, body_height: f64, ball_radius: f64) -> Result<Vec2> {
    ensure_finite("projection inputs", &[body_height, ball_radius])?;
    let dir = cam.mount_orientation * pixel_to_ray(pixel, cam)?;
    let origin = cam.mount_position + Vec3::new(0.0, 0.0, body_height);
    if dir.z.abs() < 1e-12 {
        return Err(Error::NoIntersection);
    }
    let t = (ball_radius - origin.z) / dir.z;
    if t <= 0.0 {
        return Err(Error::NoIntersection);
    }
    let hit = origin + t * dir;
    Ok(Vec2::new(hit.x, hit.y))
}

/// Forward model: the box a noiseless detector would report for a ball at
/// `ball_center` (body frame). `None` when the centre is outside the fov.
pub fn synthetic_bbox(ball_center: Vec3, cam: &CameraModel, ball_diameter: f64, confidence: f64) -> Result<Option<BoundingBox>> {
    ensure_finite("ball centre", ball_center.as_slice())?;
    let p = cam.to_camera(ball_center);
    let dist = p.norm();
    if dist <= ball_diameter / 2.0 {
        return Err(Error::Geometry(format!("ball centre {dist} m from the camera centre")));
    }
    let theta = (p.z / dist).clamp(-1.0, 1.0).acos();
    if theta > cam.fov / 2.0 {
        return Ok(None);
    }
    let alpha = p.y.atan2(p.x);
    let center = cam.principal_point + cam.focal * theta * Vec2::new(alpha.cos(), alpha.sin());
    let half = cam.focal * (ball_diameter / (2.0 * dist)).asin();
    Ok(Some(BoundingBox { x_min: center.x - half, y_min: center.y - half, x_max: center.x + half, y_max: center.y + half, confidence }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_4;

    fn cam(f: f64) -> CameraModel {
        CameraModel::forward(f, Vec2::new(320.0, 240.0), Vec3::zeros()).unwrap()
    }

    #[test]
    fn diameter_examples() {
        let b = BoundingBox::new(0.0, 0.0, 40.0, 40.0, 1.0).unwrap();
        assert_eq!(bbox_diameter(&b).unwrap(), 40.0);
        let b = BoundingBox::new(100.0, 100.0, 140.0, 130.0, 1.0).unwrap();
        assert!((bbox_diameter(&b).unwrap() - 1200f64.sqrt()).abs() < 1e-12);
        let flat = BoundingBox { x_min: 5.0, y_min: 5.0, x_max: 5.0, y_max: 9.0, confidence: 1.0 };
        assert!(bbox_diameter(&flat).is_err());
        assert!(BoundingBox::new(1.0, 1.0, 1.0, 2.0, 0.5).is_err());
    }

    #[test]
    fn viewing_angle_examples() {
        let c = cam(200.0);
        let b = BoundingBox::new(0.0, 0.0, 36.0, 36.0, 1.0).unwrap();
        let d = viewing_angle_distance(&b, &c, BALL_DIAMETER).unwrap();
        assert!((d - 0.09 / 0.09f64.sin()).abs() < 1e-12);
        assert!((d - 1.00135).abs() < 1e-5);

        // small angle regime
        let b = BoundingBox::new(0.0, 0.0, 8.0, 8.0, 1.0).unwrap();
        let d = viewing_angle_distance(&b, &c, BALL_DIAMETER).unwrap();
        assert!((d - 200.0 * 0.18 / 8.0).abs() / d < 1e-3);

        let side = 200.0 * std::f64::consts::PI;
        let b = BoundingBox::new(0.0, 0.0, side, side, 1.0).unwrap();
        assert!(matches!(viewing_angle_distance(&b, &c, BALL_DIAMETER), Err(Error::Geometry(_))));
    }

    #[test]
    fn ray_examples() {
        let c = cam(200.0);
        assert_eq!(pixel_to_ray(c.principal_point, &c).unwrap(), Vec3::new(0.0, 0.0, 1.0));
        let r = pixel_to_ray(c.principal_point + Vec2::new(100.0, 0.0), &c).unwrap();
        assert!((r - Vec3::new(0.5f64.sin(), 0.0, 0.5f64.cos())).norm() < 1e-12);
        let r = pixel_to_ray(c.principal_point + Vec2::new(0.0, 100.0), &c).unwrap();
        assert!((r - Vec3::new(0.0, 0.5f64.sin(), 0.5f64.cos())).norm() < 1e-12);
        let far = c.principal_point + Vec2::new(200.0 * 1.9, 0.0);
        assert!(matches!(pixel_to_ray(far, &c), Err(Error::OutOfView { .. })));
    }

    #[test]
    fn projection_examples() {
        let down = CameraModel::downward(200.0, Vec2::new(320.0, 240.0), Vec3::zeros()).unwrap();
        let p = projection_intersection(down.principal_point, &down, 0.3, 0.09).unwrap();
        assert!(p.norm() < 1e-12);

        // 45 degrees below horizontal, straight ahead
        let fwd = cam(200.0);
        let px = fwd.principal_point + Vec2::new(0.0, 200.0 * FRAC_PI_4);
        let p = projection_intersection(px, &fwd, 0.3, 0.09).unwrap();
        assert!((p - Vec2::new(0.21, 0.0)).norm() < 1e-12);

        let up = fwd.principal_point - Vec2::new(0.0, 200.0 * FRAC_PI_4);
        assert_eq!(projection_intersection(up, &fwd, 0.3, 0.09), Err(Error::NoIntersection));
        assert_eq!(projection_intersection(fwd.principal_point, &fwd, 0.3, 0.09), Err(Error::NoIntersection));
    }

    #[test]
    fn synthetic_examples() {
        let c = cam(250.0);
        let b = synthetic_bbox(Vec3::new(2.0, 0.0, 0.0), &c, BALL_DIAMETER, 1.0).unwrap().unwrap();
        assert!((b.center() - c.principal_point).norm() < 1e-12);
        let d = viewing_angle_distance(&b, &c, BALL_DIAMETER).unwrap();
        assert!((d - 2.0).abs() < 1e-9);
        assert_eq!(synthetic_bbox(Vec3::new(-2.0, 0.0, 0.0), &c, BALL_DIAMETER, 1.0).unwrap(), None);
        assert!(synthetic_bbox(Vec3::zeros(), &c, BALL_DIAMETER, 1.0).is_err());
    }

    #[test]
    fn camera_frames_are_rotations() {
        for pitch in [0.0, 0.4, std::f64::consts::FRAC_PI_2] {
            let c = CameraModel::pitched(200.0, Vec2::zeros(), Vec3::zeros(), pitch).unwrap();
            let m = c.mount_orientation.matrix();
            assert!((m.transpose() * m - Matrix3::identity()).norm() < 1e-12);
            assert!((m.determinant() - 1.0).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn distance_decreases_with_size(a in 1.0..300.0f64, b in 1.0..300.0f64) {
            prop_assume!((a - b).abs() > 1e-6);
            let c = cam(200.0);
            let d = |s: f64| viewing_angle_distance(&BoundingBox::new(0.0, 0.0, s, s, 1.0).unwrap(), &c, BALL_DIAMETER).unwrap();
            prop_assert_eq!(a < b, d(a) > d(b));
        }

        #[test]
        fn round_trip(dist in 0.3..5.0f64, polar in 0.0..1.745f64, az in -std::f64::consts::PI..std::f64::consts::PI, pitch in 0.0..1.6f64) {
            let c = CameraModel::pitched(280.0, Vec2::new(640.0, 400.0), Vec3::new(0.25, 0.0, 0.05), pitch).unwrap();
            let dir = Vec3::new(polar.sin() * az.cos(), polar.sin() * az.sin(), polar.cos());
            let truth = c.to_body(dist * dir);
            let b = synthetic_bbox(truth, &c, BALL_DIAMETER, 1.0).unwrap().unwrap();
            let got = viewing_angle_position(&b, &c, BALL_DIAMETER).unwrap();
            prop_assert!((got - truth).norm() < 1e-6);
        }
    }
}
