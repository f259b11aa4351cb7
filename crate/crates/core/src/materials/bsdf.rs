//! Layered mixture BSDF: coupled Lambert + GGX plastic, GGX conductor, and
//! rough/smooth dielectric. Lobe weights follow the metallic/transmission
//! blend: plastic `(1−m)(1−t)`, metal `m`, glass `(1−m)t`.

use std::f64::consts::FRAC_1_PI;

use crate::math::Frame;
use crate::sampling::{cosine_hemisphere, Sampler};
use crate::{Rgb, Vec3f};

use super::microfacet::*;

/// Shading parameters after texture resolution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BsdfParams {
    pub base_color: Rgb,
    pub roughness: f64,
    pub metallic: f64,
    pub transmission: f64,
    pub ior: f64,
}

impl Default for BsdfParams {
    fn default() -> Self {
        Self {
            base_color: Rgb::splat(0.8),
            roughness: 0.5,
            metallic: 0.0,
            transmission: 0.0,
            ior: 1.45,
        }
    }
}

impl BsdfParams {
    pub fn lambert(base_color: Rgb) -> Self {
        Self {
            base_color,
            roughness: 1.0,
            ..Self::default()
        }
    }

    /// Whether any lobe can send light through the surface.
    pub fn transmits(&self) -> bool {
        self.metallic < 1.0 && self.transmission > 0.0
    }

    /// Whether every lobe is a delta distribution (NEE is useless).
    pub fn is_pure_delta(&self) -> bool {
        let delta = roughness_to_alpha(self.roughness) < DELTA_ALPHA;
        delta && (self.metallic >= 1.0 || self.transmission >= 1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BsdfSample {
    pub wi: Vec3f,
    /// `f·|cosθᵢ|/pdf`.
    pub weight: Rgb,
    /// Solid-angle density of the whole mixture; 1 for delta lobes.
    pub pdf: f64,
    pub is_specular: bool,
}

struct Lobes {
    plastic: f64,
    spec: f64,
    metal: f64,
    glass: f64,
    alpha: f64,
    delta: bool,
    f0: f64,
}

impl Lobes {
    fn new(p: &BsdfParams) -> Self {
        let m = p.metallic.clamp(0.0, 1.0);
        let t = p.transmission.clamp(0.0, 1.0);
        let alpha = roughness_to_alpha(p.roughness);
        Self {
            plastic: (1.0 - m) * (1.0 - t),
            spec: 1.0 - p.roughness,
            metal: m,
            glass: (1.0 - m) * t,
            alpha,
            delta: alpha < DELTA_ALPHA,
            f0: dielectric_f0(p.ior),
        }
    }

    /// Lobe selection probabilities for `wo`: diffuse, plastic specular,
    /// metal, glass.
    fn probabilities(&self, p: &BsdfParams, wo: Vec3f) -> [f64; 4] {
        let mu = wo.z.abs();
        let c = p.base_color.average();
        let mut w = [0.0; 4];
        if mu > 0.0 {
            let e = self.spec * ggx_albedo(p.roughness, self.f0, mu);
            w[0] = self.plastic * c * (1.0 - e);
            w[1] = self.plastic * e;
            w[2] = self.metal * ggx_albedo(p.roughness, c, mu);
            let f = fresnel_dielectric(wo.z, p.ior);
            w[3] = self.glass * (f + (1.0 - f) * c);
        }
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            w.map(|x| x / total)
        } else {
            [0.0; 4]
        }
    }
}

#[inline]
fn schlick_rgb(f0: Rgb, cos: f64) -> Rgb {
    let w = schlick_weight(cos);
    f0 + (Rgb::one() - f0) * w
}

/// Unit half vector in the upper hemisphere for a reflection pair.
#[inline]
fn half_vector(wo: Vec3f, wi: Vec3f) -> Option<Vec3f> {
    let h = (wo + wi).try_normalize()?;
    Some(if h.z < 0.0 { -h } else { h })
}

/// Mirrors a pair so that `wo` is in the upper hemisphere (opaque lobes are
/// two-sided).
#[inline]
fn to_upper(wo: Vec3f, wi: Vec3f) -> (Vec3f, Vec3f) {
    if wo.z < 0.0 {
        (Vec3f::new(wo.x, wo.y, -wo.z), Vec3f::new(wi.x, wi.y, -wi.z))
    } else {
        (wo, wi)
    }
}

/// Mixture value and non-delta pdf in the local frame.
fn eval_local(p: &BsdfParams, l: &Lobes, wo: Vec3f, wi: Vec3f) -> (Rgb, f64) {
    let probs = l.probabilities(p, wo);
    let mut f = Rgb::zero();
    let mut pdf = 0.0;

    let (o, i) = to_upper(wo, wi);
    if o.z > 0.0 && i.z > 0.0 {
        if l.plastic > 0.0 {
            let e_o = l.spec * ggx_albedo(p.roughness, l.f0, o.z);
            let e_i = l.spec * ggx_albedo(p.roughness, l.f0, i.z);
            let e_avg = l.spec * ggx_albedo_avg(p.roughness, l.f0);
            let coupling = (1.0 - e_o) * (1.0 - e_i) / (1.0 - e_avg);
            f += p.base_color * (l.plastic * FRAC_1_PI * coupling);
            pdf += probs[0] * i.z * FRAC_1_PI;
        }
        if !l.delta && (l.plastic * l.spec > 0.0 || l.metal > 0.0) {
            if let Some(h) = half_vector(o, i) {
                let micro = ggx_d(h, l.alpha) * smith_g2(o, i, l.alpha) / (4.0 * o.z * i.z);
                let cos_oh = o.dot(h);
                let lobe_pdf = vndf_pdf(o, h, l.alpha) / (4.0 * cos_oh);
                if l.plastic * l.spec > 0.0 {
                    f += Rgb::splat(l.plastic * l.spec * micro * fresnel_schlick(l.f0, cos_oh));
                    pdf += probs[1] * lobe_pdf;
                }
                if l.metal > 0.0 {
                    f += schlick_rgb(p.base_color, cos_oh) * (l.metal * micro);
                    pdf += probs[2] * lobe_pdf;
                }
            }
        }
    }

    if l.glass > 0.0 && !l.delta {
        if let Some((fg, pg)) = eval_rough_dielectric(p, l.alpha, wo, wi) {
            f += fg * l.glass;
            pdf += probs[3] * pg;
        }
    }
    (f, pdf)
}

/// Rough dielectric value and pdf (reflection and transmission combined).
fn eval_rough_dielectric(p: &BsdfParams, alpha: f64, wo: Vec3f, wi: Vec3f) -> Option<(Rgb, f64)> {
    let (cos_o, cos_i) = (wo.z, wi.z);
    if cos_o == 0.0 || cos_i == 0.0 {
        return None;
    }
    let reflect = cos_o * cos_i > 0.0;
    let etap = if reflect {
        1.0
    } else if cos_o > 0.0 {
        p.ior
    } else {
        1.0 / p.ior
    };
    let mut wm = (wi * etap + wo).try_normalize()?;
    if wm.z < 0.0 {
        wm = -wm;
    }
    let (dot_i, dot_o) = (wi.dot(wm), wo.dot(wm));
    if dot_i * cos_i < 0.0 || dot_o * cos_o < 0.0 {
        return None;
    }
    let r = fresnel_dielectric(dot_o, p.ior);
    let d = ggx_d(wm, alpha);
    let g = smith_g2(wo, wi, alpha);
    let visible = smith_g1(wo, alpha) / cos_o.abs() * d * dot_o.abs();
    if reflect {
        let f = d * g * r / (4.0 * cos_i * cos_o).abs();
        let pdf = visible / (4.0 * dot_o.abs()) * r;
        Some((Rgb::splat(f), pdf))
    } else {
        let denom = {
            let s = dot_i + dot_o / etap;
            s * s
        };
        if denom == 0.0 {
            return None;
        }
        let f = d * (1.0 - r) * g * (dot_i * dot_o / (denom * cos_i * cos_o)).abs();
        let pdf = visible * dot_i.abs() / denom * (1.0 - r);
        Some((p.base_color * f, pdf))
    }
}

/// BSDF value `f(wo, wi)` and the density with which [`sample_bsdf`]
/// produces `wi`. Delta lobes contribute nothing here.
pub fn eval_bsdf(p: &BsdfParams, wo: Vec3f, wi: Vec3f, frame: &Frame<f64>) -> (Rgb, f64) {
    let l = Lobes::new(p);
    eval_local(p, &l, frame.to_local(wo), frame.to_local(wi))
}

/// Draws an incident direction. Consumes one 1D and one 2D sample.
pub fn sample_bsdf<S: Sampler + ?Sized>(
    p: &BsdfParams,
    wo: Vec3f,
    frame: &Frame<f64>,
    sampler: &mut S,
) -> Option<BsdfSample> {
    let u_lobe = sampler.next_1d();
    let u = sampler.next_2d();
    let l = Lobes::new(p);
    let wo_l = frame.to_local(wo);
    let probs = l.probabilities(p, wo_l);

    let mut acc = 0.0;
    let mut lobe = usize::MAX;
    let mut u_remap = 0.0;
    for (k, &pk) in probs.iter().enumerate() {
        if pk > 0.0 && u_lobe < acc + pk {
            lobe = k;
            u_remap = ((u_lobe - acc) / pk).clamp(0.0, 1.0 - f64::EPSILON);
            break;
        }
        acc += pk;
    }
    if lobe == usize::MAX {
        // rounding at the top of the range
        lobe = probs.iter().rposition(|&pk| pk > 0.0)?;
        u_remap = 0.5;
    }
    let pk = probs[lobe];
    let flip = wo_l.z < 0.0;
    let unflip = |w: Vec3f| if flip { Vec3f::new(w.x, w.y, -w.z) } else { w };
    let o = unflip(wo_l);
    let mirror = Vec3f::new(-wo_l.x, -wo_l.y, wo_l.z);

    let specular = |wi_l: Vec3f, weight: Rgb| {
        Some(BsdfSample {
            wi: frame.to_world(wi_l),
            weight,
            pdf: 1.0,
            is_specular: true,
        })
    };

    let wi_l = match lobe {
        0 => unflip(cosine_hemisphere(u)),
        1 | 2 if l.delta => {
            let mu = o.z;
            let weight = if lobe == 1 {
                Rgb::splat(l.plastic * l.spec * fresnel_schlick(l.f0, mu))
            } else {
                schlick_rgb(p.base_color, mu) * l.metal
            };
            return specular(mirror, weight / pk);
        }
        1 | 2 => {
            let h = sample_vndf(o, l.alpha, u);
            let wi = reflect(o, h);
            if wi.z <= 0.0 {
                return None;
            }
            unflip(wi)
        }
        _ if l.delta => {
            let r = fresnel_dielectric(wo_l.z, p.ior);
            if u_remap < r {
                return specular(mirror, Rgb::splat(l.glass / pk));
            }
            let (wt, _) = refract(wo_l, Vec3f::unit_z(), p.ior)?;
            return specular(wt, p.base_color * (l.glass / pk));
        }
        _ => {
            let o_up = if wo_l.z < 0.0 { -wo_l } else { wo_l };
            let wm = sample_vndf(o_up, l.alpha, u);
            let r = fresnel_dielectric(wo_l.dot(wm), p.ior);
            if u_remap < r {
                let wi = reflect(wo_l, wm);
                if wi.z * wo_l.z <= 0.0 {
                    return None;
                }
                wi
            } else {
                let (wi, _) = refract(wo_l, wm, p.ior)?;
                if wi.z * wo_l.z >= 0.0 {
                    return None;
                }
                wi
            }
        }
    };

    let (f, pdf) = eval_local(p, &l, wo_l, wi_l);
    if !(pdf > 0.0) || f.is_zero() {
        return None;
    }
    let weight = f * (wi_l.z.abs() / pdf);
    if !weight.is_finite() {
        return None;
    }
    Some(BsdfSample {
        wi: frame.to_world(wi_l),
        weight,
        pdf,
        is_specular: false,
    })
}
