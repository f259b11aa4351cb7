use std::ops::Mul;

use super::{MathError, Quat, Real, Vec3};

/// Row-major 3×3 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3<T> {
    pub rows: [[T; 3]; 3],
}

/// Row-major 4×4 matrix acting on column vectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat4<T> {
    pub rows: [[T; 4]; 4],
}

impl<T: Real> Mat3<T> {
    pub fn from_rows(rows: [[T; 3]; 3]) -> Self {
        Self { rows }
    }

    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self::from_rows([[o, z, z], [z, o, z], [z, z, o]])
    }

    pub fn from_cols(c0: Vec3<T>, c1: Vec3<T>, c2: Vec3<T>) -> Self {
        Self::from_rows([[c0.x, c1.x, c2.x], [c0.y, c1.y, c2.y], [c0.z, c1.z, c2.z]])
    }

    pub fn col(&self, j: usize) -> Vec3<T> {
        Vec3::new(self.rows[0][j], self.rows[1][j], self.rows[2][j])
    }

    pub fn transpose(&self) -> Self {
        let r = &self.rows;
        Self::from_rows([
            [r[0][0], r[1][0], r[2][0]],
            [r[0][1], r[1][1], r[2][1]],
            [r[0][2], r[1][2], r[2][2]],
        ])
    }

    pub fn determinant(&self) -> T {
        let r = &self.rows;
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
            - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    }

    pub fn inverse(&self) -> Result<Self, MathError> {
        let r = &self.rows;
        let det = self.determinant();
        let scale = self.max_abs();
        if !det.is_finite() || det.abs() <= T::epsilon() * scale * scale * scale {
            return Err(MathError::Singular);
        }
        let inv = T::one() / det;
        Ok(Self::from_rows([
            [
                (r[1][1] * r[2][2] - r[1][2] * r[2][1]) * inv,
                (r[0][2] * r[2][1] - r[0][1] * r[2][2]) * inv,
                (r[0][1] * r[1][2] - r[0][2] * r[1][1]) * inv,
            ],
            [
                (r[1][2] * r[2][0] - r[1][0] * r[2][2]) * inv,
                (r[0][0] * r[2][2] - r[0][2] * r[2][0]) * inv,
                (r[0][2] * r[1][0] - r[0][0] * r[1][2]) * inv,
            ],
            [
                (r[1][0] * r[2][1] - r[1][1] * r[2][0]) * inv,
                (r[0][1] * r[2][0] - r[0][0] * r[2][1]) * inv,
                (r[0][0] * r[1][1] - r[0][1] * r[1][0]) * inv,
            ],
        ]))
    }

    fn max_abs(&self) -> T {
        self.rows
            .iter()
            .flatten()
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn mul_vec(&self, v: Vec3<T>) -> Vec3<T> {
        let r = &self.rows;
        Vec3::new(
            r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
            r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
            r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z,
        )
    }
}

impl<T: Real> Mul for Mat3<T> {
    type Output = Self;

    fn mul(self, o: Self) -> Self {
        let mut rows = [[T::zero(); 3]; 3];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).fold(T::zero(), |acc, k| acc + self.rows[i][k] * o.rows[k][j]);
            }
        }
        Self::from_rows(rows)
    }
}

impl<T: Real> Mat4<T> {
    pub fn from_rows(rows: [[T; 4]; 4]) -> Self {
        Self { rows }
    }

    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self::from_rows([[o, z, z, z], [z, o, z, z], [z, z, o, z], [z, z, z, o]])
    }

    /// Affine matrix `[linear | translation]`.
    pub fn from_linear_translation(linear: &Mat3<T>, t: Vec3<T>) -> Self {
        let l = &linear.rows;
        let (z, o) = (T::zero(), T::one());
        Self::from_rows([
            [l[0][0], l[0][1], l[0][2], t.x],
            [l[1][0], l[1][1], l[1][2], t.y],
            [l[2][0], l[2][1], l[2][2], t.z],
            [z, z, z, o],
        ])
    }

    pub fn from_translation(t: Vec3<T>) -> Self {
        Self::from_linear_translation(&Mat3::identity(), t)
    }

    /// `translate · rotate · scale`.
    pub fn from_trs(t: Vec3<T>, r: Quat<T>, s: Vec3<T>) -> Self {
        let rot = r.to_mat3();
        let scale = Mat3::from_rows([
            [s.x, T::zero(), T::zero()],
            [T::zero(), s.y, T::zero()],
            [T::zero(), T::zero(), s.z],
        ]);
        Self::from_linear_translation(&(rot * scale), t)
    }

    pub fn linear(&self) -> Mat3<T> {
        let r = &self.rows;
        Mat3::from_rows([
            [r[0][0], r[0][1], r[0][2]],
            [r[1][0], r[1][1], r[1][2]],
            [r[2][0], r[2][1], r[2][2]],
        ])
    }

    pub fn translation(&self) -> Vec3<T> {
        Vec3::new(self.rows[0][3], self.rows[1][3], self.rows[2][3])
    }

    pub fn is_affine(&self) -> bool {
        let r = &self.rows[3];
        r[0] == T::zero() && r[1] == T::zero() && r[2] == T::zero() && r[3] == T::one()
    }

    pub fn transpose(&self) -> Self {
        let mut rows = [[T::zero(); 4]; 4];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.rows[j][i];
            }
        }
        Self::from_rows(rows)
    }

    /// Inverse of an affine matrix.
    pub fn inverse(&self) -> Result<Self, MathError> {
        if !self.is_affine() {
            return Err(MathError::NotAffine);
        }
        let inv = self.linear().inverse()?;
        let t = inv.mul_vec(self.translation());
        Ok(Self::from_linear_translation(&inv, -t))
    }

    #[inline]
    pub fn transform_point(&self, p: Vec3<T>) -> Vec3<T> {
        let r = &self.rows;
        Vec3::new(
            r[0][0] * p.x + r[0][1] * p.y + r[0][2] * p.z + r[0][3],
            r[1][0] * p.x + r[1][1] * p.y + r[1][2] * p.z + r[1][3],
            r[2][0] * p.x + r[2][1] * p.y + r[2][2] * p.z + r[2][3],
        )
    }

    /// Applies the linear part only; the result is not renormalized.
    #[inline]
    pub fn transform_direction(&self, d: Vec3<T>) -> Vec3<T> {
        let r = &self.rows;
        Vec3::new(
            r[0][0] * d.x + r[0][1] * d.y + r[0][2] * d.z,
            r[1][0] * d.x + r[1][1] * d.y + r[1][2] * d.z,
            r[2][0] * d.x + r[2][1] * d.y + r[2][2] * d.z,
        )
    }

    /// Matrix that maps surface normals: the inverse-transpose of the linear part.
    pub fn normal_matrix(&self) -> Result<Mat3<T>, MathError> {
        Ok(self.linear().inverse()?.transpose())
    }

    /// Transforms a normal and renormalizes it.
    pub fn transform_normal(&self, n: Vec3<T>) -> Result<Vec3<T>, MathError> {
        let m = self.normal_matrix()?;
        m.mul_vec(n).try_normalize().ok_or(MathError::Singular)
    }
}

impl<T: Real> Mul for Mat4<T> {
    type Output = Self;

    fn mul(self, o: Self) -> Self {
        let mut rows = [[T::zero(); 4]; 4];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..4).fold(T::zero(), |acc, k| acc + self.rows[i][k] * o.rows[k][j]);
            }
        }
        Self::from_rows(rows)
    }
}
