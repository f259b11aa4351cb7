use crate::math::{Real, Vec3};

/// Two-sided Möller–Trumbore test. Returns `(t, u, v)` with `t` in
/// `[t_min, t_max]` measured in units of `dir`, and barycentrics clamped
/// into the triangle.
///
/// Barycentric bounds are relaxed by a few ulps so a ray through an edge
/// shared by two triangles always reports at least one of them.
#[inline]
pub fn intersect_triangle<T: Real>(
    origin: Vec3<T>,
    dir: Vec3<T>,
    p0: Vec3<T>,
    p1: Vec3<T>,
    p2: Vec3<T>,
    t_min: T,
    t_max: T,
) -> Option<(T, T, T)> {
    let e1 = p1 - p0;
    let e2 = p2 - p0;
    let pvec = dir.cross(e2);
    let det = e1.dot(pvec);
    if det == T::zero() || !det.is_finite() {
        return None;
    }
    let inv = T::one() / det;
    let tol = T::epsilon() * T::lit(16.0);
    let tvec = origin - p0;
    let u = tvec.dot(pvec) * inv;
    if u < -tol || u > T::one() + tol {
        return None;
    }
    let qvec = tvec.cross(e1);
    let v = dir.dot(qvec) * inv;
    if v < -tol || u + v > T::one() + tol {
        return None;
    }
    let t = e2.dot(qvec) * inv;
    if !(t >= t_min && t <= t_max) {
        return None;
    }
    let u = u.max(T::zero()).min(T::one());
    let v = v.max(T::zero()).min(T::one() - u);
    Some((t, u, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hits_front_and_back() {
        let (a, b, c) = (Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0));
        let down = intersect_triangle(Vec3::new(0.2, 0.2, 1.0), -Vec3::unit_z(), a, b, c, 0.0, f64::INFINITY);
        let up = intersect_triangle(Vec3::new(0.2, 0.2, -1.0), Vec3::unit_z(), a, b, c, 0.0, f64::INFINITY);
        let (t, u, v) = down.unwrap();
        assert_eq!(t, 1.0);
        assert!((u - 0.2).abs() < 1e-15 && (v - 0.2).abs() < 1e-15);
        assert_eq!(up.unwrap().0, 1.0);
    }

    #[test]
    fn respects_range_and_misses() {
        let (a, b, c) = (Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0));
        assert!(intersect_triangle(Vec3::new(0.2, 0.2, 1.0), -Vec3::unit_z(), a, b, c, 0.0, 0.5).is_none());
        assert!(intersect_triangle(Vec3::new(0.8, 0.8, 1.0), -Vec3::unit_z(), a, b, c, 0.0, 2.0).is_none());
        assert!(intersect_triangle(Vec3::new(0.2, 0.2, 1.0), Vec3::unit_x(), a, b, c, 0.0, 2.0).is_none());
    }
}
