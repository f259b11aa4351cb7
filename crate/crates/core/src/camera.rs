//! Pinhole and thin-lens cameras, ray generation, and matrix export.
//!
//! Camera space follows the usual graphics convention: the camera looks
//! down −z with +y up and +x right. Image space has its origin at the top
//! left corner with +y pointing down; pixel `(x, y)` covers `[x, x+1) × [y, y+1)`.

use crate::math::Mat4;
use crate::sampling::concentric_disk;
use crate::{Mat3f, Mat4f, Rayf, Vec2f, Vec3f};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum CameraError {
    #[error("field of view must lie in (0, pi) radians, got {0}")]
    FieldOfView(f64),
    #[error("{0} must be positive and finite")]
    NonPositive(&'static str),
    #[error("aperture radius must be non-negative and finite")]
    Aperture,
    #[error("far clip must exceed near clip")]
    ClipRange,
}

/// Camera component. Ray generation takes the aspect ratio from the image
/// resolution (square pixels); `aspect` is kept for export only.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Camera {
    field_of_view_y: f64,
    aspect: f64,
    aperture_radius: f64,
    focus_distance: f64,
    near: f64,
    far: f64,
}

impl Default for Camera {
    fn default() -> Self {
        Self {
            field_of_view_y: std::f64::consts::FRAC_PI_4,
            aspect: 1.0,
            aperture_radius: 0.0,
            focus_distance: 1.0,
            near: 0.01,
            far: 1000.0,
        }
    }
}

impl Camera {
    pub fn new(field_of_view_y: f64) -> Result<Self, CameraError> {
        let mut c = Self::default();
        c.set_field_of_view_y(field_of_view_y)?;
        Ok(c)
    }

    pub fn field_of_view_y(&self) -> f64 {
        self.field_of_view_y
    }

    pub fn aspect(&self) -> f64 {
        self.aspect
    }

    pub fn aperture_radius(&self) -> f64 {
        self.aperture_radius
    }

    pub fn focus_distance(&self) -> f64 {
        self.focus_distance
    }

    pub fn near(&self) -> f64 {
        self.near
    }

    pub fn far(&self) -> f64 {
        self.far
    }

    pub fn set_field_of_view_y(&mut self, fov: f64) -> Result<(), CameraError> {
        if !(fov > 0.0 && fov < std::f64::consts::PI) {
            return Err(CameraError::FieldOfView(fov));
        }
        self.field_of_view_y = fov;
        Ok(())
    }

    pub fn set_aspect(&mut self, aspect: f64) -> Result<(), CameraError> {
        self.aspect = positive(aspect, "aspect")?;
        Ok(())
    }

    pub fn set_aperture_radius(&mut self, r: f64) -> Result<(), CameraError> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(CameraError::Aperture);
        }
        self.aperture_radius = r;
        Ok(())
    }

    pub fn set_focus_distance(&mut self, d: f64) -> Result<(), CameraError> {
        self.focus_distance = positive(d, "focus distance")?;
        Ok(())
    }

    pub fn set_clip(&mut self, near: f64, far: f64) -> Result<(), CameraError> {
        let near = positive(near, "near clip")?;
        let far = positive(far, "far clip")?;
        if far <= near {
            return Err(CameraError::ClipRange);
        }
        self.near = near;
        self.far = far;
        Ok(())
    }

    pub fn with_aperture(mut self, radius: f64, focus_distance: f64) -> Result<Self, CameraError> {
        self.set_aperture_radius(radius)?;
        self.set_focus_distance(focus_distance)?;
        Ok(self)
    }

    /// Focal length in pixels for an image `height` pixels tall.
    pub fn focal_pixels(&self, height: u32) -> f64 {
        0.5 * height as f64 / (0.5 * self.field_of_view_y).tan()
    }

    /// Pinhole direction in camera space through image point `(px, py)`
    /// (continuous pixel coordinates), with z = −1.
    pub fn camera_direction(&self, width: u32, height: u32, px: f64, py: f64) -> Vec3f {
        let f = self.focal_pixels(height);
        Vec3f::new((px - 0.5 * width as f64) / f, (0.5 * height as f64 - py) / f, -1.0)
    }

    /// Camera ray through pixel `(x, y)` offset by `jitter`, with lens sample
    /// `lens` and shutter time `time`. `world_from_camera` is the camera pose
    /// at that time.
    #[allow(clippy::too_many_arguments)]
    pub fn generate_ray(
        &self,
        world_from_camera: &Mat4f,
        width: u32,
        height: u32,
        x: u32,
        y: u32,
        jitter: [f64; 2],
        lens: [f64; 2],
        time: f64,
    ) -> Rayf {
        let d = self.camera_direction(width, height, x as f64 + jitter[0], y as f64 + jitter[1]);
        let (origin, dir) = if self.aperture_radius > 0.0 {
            let focus = d * self.focus_distance;
            let l = concentric_disk(lens) * self.aperture_radius;
            let o = Vec3f::new(l.x, l.y, 0.0);
            (o, focus - o)
        } else {
            (Vec3f::zero(), d)
        };
        Rayf::new(
            world_from_camera.transform_point(origin),
            world_from_camera.transform_direction(dir).normalize(),
            time,
        )
    }

    /// Pinhole intrinsics `K` in pixels. `K` maps points in the
    /// right/down/forward camera frame (the −z-forward frame with y and z
    /// negated) to homogeneous pixel coordinates.
    pub fn intrinsics(&self, width: u32, height: u32) -> Mat3f {
        let f = self.focal_pixels(height);
        Mat3f::from_rows([
            [f, 0.0, 0.5 * width as f64],
            [0.0, f, 0.5 * height as f64],
            [0.0, 0.0, 1.0],
        ])
    }

    /// OpenGL-style perspective projection using the near and far clips,
    /// with the aspect ratio of the given resolution.
    pub fn projection(&self, width: u32, height: u32) -> Mat4f {
        let t = 1.0 / (0.5 * self.field_of_view_y).tan();
        let a = width as f64 / height as f64;
        let (n, f) = (self.near, self.far);
        Mat4::from_rows([
            [t / a, 0.0, 0.0, 0.0],
            [0.0, t, 0.0, 0.0],
            [0.0, 0.0, (f + n) / (n - f), 2.0 * f * n / (n - f)],
            [0.0, 0.0, -1.0, 0.0],
        ])
    }

    /// Projects a camera-space point to continuous pixel coordinates and its
    /// depth along the view axis. `None` when the point is not in front.
    pub fn project_camera(&self, width: u32, height: u32, p: Vec3f) -> Option<(Vec2f, f64)> {
        let z = -p.z;
        if !(z > 0.0) {
            return None;
        }
        let f = self.focal_pixels(height);
        Some((
            Vec2f::new(0.5 * width as f64 + f * p.x / z, 0.5 * height as f64 - f * p.y / z),
            z,
        ))
    }

    /// Inverse of [`Camera::project_camera`].
    pub fn unproject_camera(&self, width: u32, height: u32, pixel: Vec2f, depth: f64) -> Vec3f {
        self.camera_direction(width, height, pixel.x, pixel.y) * depth
    }

    /// Projects a world point given the camera pose.
    pub fn project(&self, world_from_camera: &Mat4f, width: u32, height: u32, p: Vec3f) -> Option<(Vec2f, f64)> {
        let camera_from_world = world_from_camera.inverse().ok()?;
        self.project_camera(width, height, camera_from_world.transform_point(p))
    }

    pub fn unproject(&self, world_from_camera: &Mat4f, width: u32, height: u32, pixel: Vec2f, depth: f64) -> Vec3f {
        world_from_camera.transform_point(self.unproject_camera(width, height, pixel, depth))
    }
}

fn positive(v: f64, what: &'static str) -> Result<f64, CameraError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CameraError::NonPositive(what))
    }
}
