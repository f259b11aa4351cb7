use std::f64::consts::FRAC_PI_2;

use proptest::prelude::*;
use vistrace::camera::Camera;
use vistrace::math::{Quat, Transform};
use vistrace::{Vec2f, Vec3f};

#[test]
fn ninety_degree_intrinsics() {
    let k = Camera::new(FRAC_PI_2).unwrap().intrinsics(512, 512).rows;
    assert!((k[1][1] - 256.0).abs() < 1e-9);
    assert!((k[0][0] - 256.0).abs() < 1e-9);
    assert_eq!((k[0][2], k[1][2]), (256.0, 256.0));
}

fn pose() -> impl Strategy<Value = Transform<f64>> {
    (
        prop::array::uniform3(-5.0f64..5.0),
        prop::array::uniform3(-3.2f64..3.2),
    )
        .prop_map(|(t, e)| {
            Transform::from_trs(Vec3f::new(t[0], t[1], t[2]), Quat::from_euler_xyz(e[0], e[1], e[2]), Vec3f::one()).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn project_unproject_round_trip(
        fov in 0.3f64..2.5,
        pose in pose(),
        px in 0.0f64..320.0,
        py in 0.0f64..240.0,
        depth in 0.05f64..200.0,
    ) {
        let cam = Camera::new(fov).unwrap();
        let m = pose.to_matrix();
        let p = cam.unproject(&m, 320, 240, Vec2f::new(px, py), depth);
        let (pixel, z) = cam.project(&m, 320, 240, p).unwrap();
        prop_assert!((pixel.x - px).abs() <= 1e-4 && (pixel.y - py).abs() <= 1e-4);
        prop_assert!((z - depth).abs() <= 1e-4 * depth.max(1.0));
        let back = cam.unproject(&m, 320, 240, pixel, z);
        prop_assert!((back - p).length() <= 1e-4 * p.length().max(1.0));
    }

    #[test]
    fn thin_lens_rays_meet_on_the_focus_plane(
        pose in pose(),
        x in 0u32..64,
        y in 0u32..48,
        lens in prop::array::uniform2(0.0f64..1.0),
        aperture in 0.01f64..0.5,
        focus in 0.5f64..20.0,
    ) {
        let cam = Camera::new(0.8).unwrap().with_aperture(aperture, focus).unwrap();
        let m = pose.to_matrix();
        let pinhole = Camera::new(0.8).unwrap().generate_ray(&m, 64, 48, x, y, [0.5, 0.5], lens, 0.0);
        let target = pinhole.origin + pinhole.direction * (focus / -cam.camera_direction(64, 48, x as f64 + 0.5, y as f64 + 0.5).normalize().z);
        let ray = cam.generate_ray(&m, 64, 48, x, y, [0.5, 0.5], lens, 0.0);
        let t = (target - ray.origin).dot(ray.direction);
        prop_assert!((ray.at(t) - target).length() <= 1e-5 * focus.max(1.0));
    }

    #[test]
    fn points_behind_the_camera_do_not_project(pose in pose(), p in prop::array::uniform3(-1.0f64..1.0), back in 0.0f64..10.0) {
        let cam = Camera::default();
        let m = pose.to_matrix();
        let local = Vec3f::new(p[0], p[1], back);
        prop_assert!(cam.project(&m, 64, 64, m.transform_point(local)).is_none());
    }
}
