//! Isotropic GGX distribution, Smith masking, Fresnel terms, and tabulated
//! directional albedo used for energy-preserving diffuse coupling.
//!
//! All directions are in the local shading frame (normal = +z).

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::Vec3f;

/// Below this α a lobe is treated as a perfect (delta) reflector/refractor.
pub const DELTA_ALPHA: f64 = 1e-3;

#[inline]
pub fn roughness_to_alpha(roughness: f64) -> f64 {
    roughness * roughness
}

#[inline]
pub fn ggx_d(h: Vec3f, alpha: f64) -> f64 {
    if h.z <= 0.0 {
        return 0.0;
    }
    let c2 = h.z * h.z;
    let a2 = alpha * alpha;
    let d = c2 * (a2 - 1.0) + 1.0;
    a2 / (PI * d * d)
}

#[inline]
fn lambda(w: Vec3f, alpha: f64) -> f64 {
    let c2 = w.z * w.z;
    if c2 <= 0.0 {
        return f64::INFINITY;
    }
    let tan2 = ((1.0 - c2).max(0.0)) / c2;
    0.5 * (-1.0 + (1.0 + alpha * alpha * tan2).sqrt())
}

#[inline]
pub fn smith_g1(w: Vec3f, alpha: f64) -> f64 {
    1.0 / (1.0 + lambda(w, alpha))
}

/// Height-correlated masking-shadowing.
#[inline]
pub fn smith_g2(wo: Vec3f, wi: Vec3f, alpha: f64) -> f64 {
    1.0 / (1.0 + lambda(wo, alpha) + lambda(wi, alpha))
}

/// Density of visible normals as seen from `wo` (`wo.z > 0`).
#[inline]
pub fn vndf_pdf(wo: Vec3f, h: Vec3f, alpha: f64) -> f64 {
    let cos_oh = wo.dot(h);
    if cos_oh <= 0.0 || wo.z <= 0.0 {
        return 0.0;
    }
    smith_g1(wo, alpha) * cos_oh * ggx_d(h, alpha) / wo.z
}

/// Samples a visible normal for `wo` in the upper hemisphere (Heitz 2018).
pub fn sample_vndf(wo: Vec3f, alpha: f64, u: [f64; 2]) -> Vec3f {
    let vh = Vec3f::new(alpha * wo.x, alpha * wo.y, wo.z).normalize();
    let lensq = vh.x * vh.x + vh.y * vh.y;
    let t1 = if lensq > 0.0 {
        Vec3f::new(-vh.y, vh.x, 0.0) / lensq.sqrt()
    } else {
        Vec3f::unit_x()
    };
    let t2 = vh.cross(t1);
    let r = u[0].sqrt();
    let phi = 2.0 * PI * u[1];
    let p1 = r * phi.cos();
    let mut p2 = r * phi.sin();
    let s = 0.5 * (1.0 + vh.z);
    p2 = (1.0 - s) * (1.0 - p1 * p1).max(0.0).sqrt() + s * p2;
    let nh = t1 * p1 + t2 * p2 + vh * (1.0 - p1 * p1 - p2 * p2).max(0.0).sqrt();
    Vec3f::new(alpha * nh.x, alpha * nh.y, nh.z.max(1e-9)).normalize()
}

#[inline]
pub fn reflect(w: Vec3f, n: Vec3f) -> Vec3f {
    n * (2.0 * w.dot(n)) - w
}

/// Refracts `w` through the interface with normal `n` and relative index
/// `eta` (transmitted over incident side when `w·n > 0`). Returns the
/// transmitted direction and the effective relative index.
pub fn refract(w: Vec3f, n: Vec3f, eta: f64) -> Option<(Vec3f, f64)> {
    let (mut cos_i, mut eta, mut n) = (w.dot(n), eta, n);
    if cos_i < 0.0 {
        eta = 1.0 / eta;
        cos_i = -cos_i;
        n = -n;
    }
    let sin2_i = (1.0 - cos_i * cos_i).max(0.0);
    let sin2_t = sin2_i / (eta * eta);
    if sin2_t >= 1.0 {
        return None;
    }
    let cos_t = (1.0 - sin2_t).sqrt();
    Some((-w / eta + n * (cos_i / eta - cos_t), eta))
}

#[inline]
pub fn schlick_weight(cos: f64) -> f64 {
    let m = (1.0 - cos).clamp(0.0, 1.0);
    let m2 = m * m;
    m2 * m2 * m
}

#[inline]
pub fn fresnel_schlick(f0: f64, cos: f64) -> f64 {
    f0 + (1.0 - f0) * schlick_weight(cos)
}

/// Normal-incidence reflectance of a dielectric interface.
#[inline]
pub fn dielectric_f0(ior: f64) -> f64 {
    let r = (ior - 1.0) / (ior + 1.0);
    r * r
}

/// Unpolarized Fresnel reflectance of a dielectric; `cos_i` may be negative
/// (incidence from the inside).
pub fn fresnel_dielectric(cos_i: f64, eta: f64) -> f64 {
    let (mut cos_i, mut eta) = (cos_i.clamp(-1.0, 1.0), eta);
    if cos_i < 0.0 {
        eta = 1.0 / eta;
        cos_i = -cos_i;
    }
    let sin2_t = (1.0 - cos_i * cos_i) / (eta * eta);
    if sin2_t >= 1.0 {
        return 1.0;
    }
    let cos_t = (1.0 - sin2_t).max(0.0).sqrt();
    let r_parl = (eta * cos_i - cos_t) / (eta * cos_i + cos_t);
    let r_perp = (cos_i - eta * cos_t) / (cos_i + eta * cos_t);
    0.5 * (r_parl * r_parl + r_perp * r_perp)
}

const TABLE_N: usize = 32;
const TABLE_SQRT_SAMPLES: usize = 64;

/// Directional albedo of single-scattering GGX reflection, split so that
/// for a Schlick Fresnel with reflectance `f0`,
/// `E(μ) = f0·E₁(μ) + (1 − f0)·Eₛ(μ)`.
struct AlbedoTable {
    e1: [[f64; TABLE_N]; TABLE_N],
    es: [[f64; TABLE_N]; TABLE_N],
    e1_avg: [f64; TABLE_N],
    es_avg: [f64; TABLE_N],
}

fn table_mu(i: usize) -> f64 {
    (i as f64 + 0.5) / TABLE_N as f64
}

fn table_roughness(j: usize) -> f64 {
    j as f64 / (TABLE_N - 1) as f64
}

fn albedo_table() -> &'static AlbedoTable {
    static TABLE: OnceLock<AlbedoTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = AlbedoTable {
            e1: [[0.0; TABLE_N]; TABLE_N],
            es: [[0.0; TABLE_N]; TABLE_N],
            e1_avg: [0.0; TABLE_N],
            es_avg: [0.0; TABLE_N],
        };
        let m = TABLE_SQRT_SAMPLES;
        for j in 0..TABLE_N {
            let alpha = roughness_to_alpha(table_roughness(j)).max(DELTA_ALPHA);
            for i in 0..TABLE_N {
                let mu = table_mu(i);
                let wo = Vec3f::new((1.0 - mu * mu).sqrt(), 0.0, mu);
                let (mut s1, mut ss) = (0.0, 0.0);
                for a in 0..m {
                    for b in 0..m {
                        let u = [(a as f64 + 0.5) / m as f64, (b as f64 + 0.5) / m as f64];
                        let h = sample_vndf(wo, alpha, u);
                        let wi = reflect(wo, h);
                        if wi.z <= 0.0 {
                            continue;
                        }
                        let w = smith_g2(wo, wi, alpha) / smith_g1(wo, alpha);
                        s1 += w;
                        ss += w * schlick_weight(wo.dot(h));
                    }
                }
                let n = (m * m) as f64;
                t.e1[j][i] = s1 / n;
                t.es[j][i] = ss / n;
            }
            for i in 0..TABLE_N {
                let w = 2.0 * table_mu(i) / TABLE_N as f64;
                t.e1_avg[j] += t.e1[j][i] * w;
                t.es_avg[j] += t.es[j][i] * w;
            }
        }
        t
    })
}

fn lerp_row(row: &[f64; TABLE_N], mu: f64) -> f64 {
    let x = (mu * TABLE_N as f64 - 0.5).clamp(0.0, (TABLE_N - 1) as f64);
    let i = (x as usize).min(TABLE_N - 2);
    let f = x - i as f64;
    row[i] * (1.0 - f) + row[i + 1] * f
}

fn roughness_coords(roughness: f64) -> (usize, f64) {
    let y = roughness.clamp(0.0, 1.0) * (TABLE_N - 1) as f64;
    let j = (y as usize).min(TABLE_N - 2);
    (j, y - j as f64)
}

/// Directional albedo of the GGX reflection lobe with Schlick reflectance
/// `f0` at cosine `mu`. Delta lobes use the exact Fresnel value.
pub fn ggx_albedo(roughness: f64, f0: f64, mu: f64) -> f64 {
    if roughness_to_alpha(roughness) < DELTA_ALPHA {
        return fresnel_schlick(f0, mu);
    }
    let t = albedo_table();
    let (j, f) = roughness_coords(roughness);
    let e = |tab: &[[f64; TABLE_N]; TABLE_N]| lerp_row(&tab[j], mu) * (1.0 - f) + lerp_row(&tab[j + 1], mu) * f;
    f0 * e(&t.e1) + (1.0 - f0) * e(&t.es)
}

/// Cosine-weighted hemispherical average `2∫E(μ)μ dμ` of [`ggx_albedo`].
pub fn ggx_albedo_avg(roughness: f64, f0: f64) -> f64 {
    if roughness_to_alpha(roughness) < DELTA_ALPHA {
        // 2∫(1−μ)⁵μ dμ = 1/21
        return f0 + (1.0 - f0) / 21.0;
    }
    let t = albedo_table();
    let (j, f) = roughness_coords(roughness);
    let e1 = t.e1_avg[j] * (1.0 - f) + t.e1_avg[j + 1] * f;
    let es = t.es_avg[j] * (1.0 - f) + t.es_avg[j + 1] * f;
    f0 * e1 + (1.0 - f0) * es
}
