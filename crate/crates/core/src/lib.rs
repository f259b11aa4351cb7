//! Headless path tracer with ground-truth annotation passes.
//!
//! Math and geometry are generic over the scalar type ([`math::Real`]);
//! shading, lights, volumes, and rendering run on [`Float`].

pub mod aov;
pub mod camera;
pub mod geometry;
pub mod io;
pub mod lights;
pub mod materials;
pub mod math;
pub mod render;
pub mod sampling;
pub mod scene;
pub mod volumes;

pub type Float = f64;
pub type Vec2f = math::Vec2<Float>;
pub type Vec3f = math::Vec3<Float>;
/// Linear-light RGB triple.
pub type Rgb = math::Vec3<Float>;
pub type Mat3f = math::Mat3<Float>;
pub type Mat4f = math::Mat4<Float>;
pub type Quatf = math::Quat<Float>;
pub type Rayf = math::Ray<Float>;
pub type Framef = math::Frame<Float>;
pub type Transformf = math::Transform<Float>;
pub type Aabbf = geometry::Aabb<Float>;
pub type Meshf = geometry::Mesh<Float>;
pub type Blasf = geometry::Blas<Float>;
pub type Instancef = geometry::Instance<Float>;
pub type Iasf = geometry::Ias<Float>;
pub type Hitf = geometry::Hit<Float>;
