use super::{scalar, Mat3, Mat4, MathError, Quat, Real, Vec3};

/// Translation, rotation, and positive scale, with a second key holding the
/// pose at the previous frame. The two keys bracket the camera shutter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transform<T> {
    translation: Vec3<T>,
    rotation: Quat<T>,
    scale: Vec3<T>,
    prev_translation: Vec3<T>,
    prev_rotation: Quat<T>,
    prev_scale: Vec3<T>,
}

impl<T: Real> Default for Transform<T> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<T: Real> Transform<T> {
    pub fn identity() -> Self {
        Self::from_trs(Vec3::zero(), Quat::identity(), Vec3::one())
            .expect("identity transform is valid")
    }

    /// Static transform (previous key equals current key).
    pub fn from_trs(t: Vec3<T>, r: Quat<T>, s: Vec3<T>) -> Result<Self, MathError> {
        check_scale(s)?;
        let r = r.normalize();
        Ok(Self {
            translation: t,
            rotation: r,
            scale: s,
            prev_translation: t,
            prev_rotation: r,
            prev_scale: s,
        })
    }

    pub fn translation(&self) -> Vec3<T> {
        self.translation
    }

    pub fn rotation(&self) -> Quat<T> {
        self.rotation
    }

    pub fn scale(&self) -> Vec3<T> {
        self.scale
    }

    pub fn prev_translation(&self) -> Vec3<T> {
        self.prev_translation
    }

    pub fn prev_rotation(&self) -> Quat<T> {
        self.prev_rotation
    }

    pub fn prev_scale(&self) -> Vec3<T> {
        self.prev_scale
    }

    pub fn set_translation(&mut self, t: Vec3<T>) {
        self.translation = t;
    }

    pub fn set_rotation(&mut self, r: Quat<T>) {
        self.rotation = r.normalize();
    }

    pub fn set_scale(&mut self, s: Vec3<T>) -> Result<(), MathError> {
        check_scale(s)?;
        self.scale = s;
        Ok(())
    }

    /// Overrides the previous-frame key, e.g. to author motion blur directly.
    pub fn set_previous(&mut self, t: Vec3<T>, r: Quat<T>, s: Vec3<T>) -> Result<(), MathError> {
        check_scale(s)?;
        self.prev_translation = t;
        self.prev_rotation = r.normalize();
        self.prev_scale = s;
        Ok(())
    }

    /// Copies the current key into the previous key.
    pub fn commit_motion(&mut self) {
        self.prev_translation = self.translation;
        self.prev_rotation = self.rotation;
        self.prev_scale = self.scale;
    }

    pub fn is_static(&self) -> bool {
        self.prev_translation == self.translation
            && self.prev_rotation == self.rotation
            && self.prev_scale == self.scale
    }

    pub fn to_matrix(&self) -> Mat4<T> {
        Mat4::from_trs(self.translation, self.rotation, self.scale)
    }

    pub fn prev_matrix(&self) -> Mat4<T> {
        Mat4::from_trs(self.prev_translation, self.prev_rotation, self.prev_scale)
    }

    /// Pose at shutter parameter `s` (clamped to `[0, 1]`): 0 is the previous
    /// key, 1 the current one.
    pub fn interpolate(&self, s: T) -> Mat4<T> {
        interpolate_keys(
            (self.prev_translation, self.prev_rotation, self.prev_scale),
            (self.translation, self.rotation, self.scale),
            s,
        )
    }

    /// Places the transform at `eye` and orients it so the local −z axis
    /// points at `at`, with local +y as close to `up` as possible. Scale and
    /// the previous key are left untouched.
    pub fn look_at(&mut self, eye: Vec3<T>, at: Vec3<T>, up: Vec3<T>) -> Result<(), MathError> {
        self.rotation = look_at_rotation(eye, at, up)?;
        self.translation = eye;
        Ok(())
    }

    /// Static transform at `eye` looking at `at`; see [`Transform::look_at`].
    pub fn looking_at(eye: Vec3<T>, at: Vec3<T>, up: Vec3<T>) -> Result<Self, MathError> {
        Self::from_trs(eye, look_at_rotation(eye, at, up)?, Vec3::one())
    }

    /// Unit vector the local −z axis maps to.
    pub fn forward(&self) -> Vec3<T> {
        -self.rotation.rotate(Vec3::unit_z())
    }
}

fn check_scale<T: Real>(s: Vec3<T>) -> Result<(), MathError> {
    if s.x > T::zero() && s.y > T::zero() && s.z > T::zero() && s.is_finite() {
        Ok(())
    } else {
        Err(MathError::NonPositiveScale)
    }
}

fn interpolate_keys<T: Real>(
    prev: (Vec3<T>, Quat<T>, Vec3<T>),
    curr: (Vec3<T>, Quat<T>, Vec3<T>),
    s: T,
) -> Mat4<T> {
    let s = scalar::clamp(s, T::zero(), T::one());
    if s == T::zero() {
        return Mat4::from_trs(prev.0, prev.1, prev.2);
    }
    if s == T::one() {
        return Mat4::from_trs(curr.0, curr.1, curr.2);
    }
    Mat4::from_trs(
        prev.0.lerp(curr.0, s),
        prev.1.slerp(curr.1, s),
        prev.2.lerp(curr.2, s),
    )
}

/// Rotation taking local (+x, +y, −z) to (right, up, forward).
pub fn look_at_rotation<T: Real>(eye: Vec3<T>, at: Vec3<T>, up: Vec3<T>) -> Result<Quat<T>, MathError> {
    let forward = (at - eye).try_normalize().ok_or(MathError::DegenerateLookAt)?;
    let up = up.try_normalize().ok_or(MathError::DegenerateLookAt)?;
    let side = forward.cross(up);
    if side.length() <= T::lit(1e-6) {
        return Err(MathError::DegenerateLookAt);
    }
    let right = side.normalize();
    let true_up = right.cross(forward);
    Ok(Quat::from_mat3(&Mat3::from_cols(right, true_up, -forward)))
}
