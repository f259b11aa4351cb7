use rand_chacha::ChaCha8Rng;

use crate::lights::LightSample;
use crate::materials::{apply_normal_map, eval_bsdf, sample_bsdf};
use crate::sampling::{power_heuristic, PixelSampler, Sampler};
use crate::scene::RenderSnapshot;
use crate::volumes::{hg_phase, sample_phase, Collision, MediumEvent};
use crate::{Rayf, Rgb, Vec3f};

use super::{LightStrategy, RenderConfig};

/// Depth at which Russian roulette starts.
pub const RR_START_DEPTH: u32 = 3;
/// Lowest survival probability Russian roulette will use.
pub const RR_MIN_SURVIVAL: f64 = 0.05;

/// Distance to push ray origins off a surface at `p`.
fn offset_scale(p: Vec3f) -> f64 {
    1e-6 * (1.0 + p.abs().max_component())
}

fn spawn(p: Vec3f, ng: Vec3f, dir: Vec3f) -> Vec3f {
    let eps = offset_scale(p);
    if ng.dot(dir) >= 0.0 {
        p + ng * eps
    } else {
        p - ng * eps
    }
}

/// Earliest real collision among the snapshot's volumes along the ray
/// before `t_max`. Independent tracking per volume composes correctly for
/// overlapping media since the minimum of independent free flights
/// follows the summed extinction.
fn volume_collision(snap: &RenderSnapshot, ray: &Rayf, t_max: f64, rng: &mut ChaCha8Rng) -> Option<(Collision, f64)> {
    let mut best: Option<(Collision, f64)> = None;
    for v in &snap.volumes {
        let Ok(inv) = v.matrix_at(ray.time).inverse() else { continue };
        let o = inv.transform_point(ray.origin);
        let d = inv.transform_direction(ray.direction);
        let limit = best.map_or(t_max, |(c, _)| c.t);
        if let Some(c) = v.grid.sample_scatter(o, d, ray.t_min, limit, rng) {
            best = Some((c, v.grid.g()));
        }
    }
    best
}

fn volume_transmittance(snap: &RenderSnapshot, origin: Vec3f, dir: Vec3f, dist: f64, time: f64, rng: &mut ChaCha8Rng) -> f64 {
    let mut tr = 1.0;
    for v in &snap.volumes {
        let Ok(inv) = v.matrix_at(time).inverse() else { continue };
        tr *= v
            .grid
            .transmittance(inv.transform_point(origin), inv.transform_direction(dir), 0.0, dist, rng);
        if tr == 0.0 {
            break;
        }
    }
    tr
}

/// Unoccluded, attenuated radiance of a light sample seen from `p`.
fn shadowed(snap: &RenderSnapshot, p: Vec3f, ls: &LightSample, time: f64, rng: &mut ChaCha8Rng) -> Option<f64> {
    let blocked = if ls.distance.is_finite() {
        snap.ias.occluded(p, ls.point, time)
    } else {
        snap.ias.occluded_ray(&Rayf::new(p, ls.wi, time))
    };
    if blocked {
        return None;
    }
    let tr = if snap.volumes.is_empty() {
        1.0
    } else {
        volume_transmittance(snap, p, ls.wi, ls.distance, time, rng)
    };
    (tr > 0.0).then_some(tr)
}

/// MIS weight for a light-sampled contribution.
fn light_weight(strategy: LightStrategy, pdf_light: f64, pdf_other: f64) -> f64 {
    match strategy {
        LightStrategy::Mis => power_heuristic(pdf_light, pdf_other),
        LightStrategy::LightOnly => 1.0,
        LightStrategy::BsdfOnly => 0.0,
    }
}

/// MIS weight for an emitter reached by BSDF or phase sampling.
fn hit_weight(strategy: LightStrategy, specular: bool, pdf_bsdf: f64, pdf_light: f64) -> f64 {
    if specular {
        return 1.0;
    }
    match strategy {
        LightStrategy::Mis => power_heuristic(pdf_bsdf, pdf_light),
        LightStrategy::LightOnly => 0.0,
        LightStrategy::BsdfOnly => 1.0,
    }
}

fn clamp_contribution(c: Rgb, limit: Option<f64>, depth: u32) -> Rgb {
    match limit {
        Some(l) if depth > 0 => {
            let m = c.max_component();
            if m > l {
                c * (l / m)
            } else {
                c
            }
        }
        _ => c,
    }
}

/// Radiance arriving along `ray`, estimated by a path tracer with next
/// event estimation and power-heuristic MIS.
pub fn trace_path(snap: &RenderSnapshot, ray: Rayf, sampler: &mut PixelSampler, config: &RenderConfig) -> Rgb {
    let mut radiance = Rgb::zero();
    let mut beta = Rgb::one();
    let mut ray = ray;
    let mut specular = true;
    let mut prev_pdf = 0.0;
    let mut prev_point = ray.origin;
    let time = ray.time;
    let lights = &snap.lights;

    // depth counts scattering vertices; the final iteration only gathers
    // emission so that both MIS strategies cover the last connection
    for depth in 0..=config.max_depth {
        let hit = snap.ias.intersect(&ray);
        let t_surface = hit.as_ref().map_or(f64::INFINITY, |h| h.t);

        if !snap.volumes.is_empty() {
            if let Some((c, g)) = volume_collision(snap, &ray, t_surface, sampler.stream()) {
                if c.event == MediumEvent::Absorb || depth == config.max_depth {
                    break;
                }
                beta *= c.weight;
                let p = ray.at(c.t);
                let rng = sampler.stream();
                if config.strategy == LightStrategy::BsdfOnly {
                    rng.next_1d();
                    rng.next_2d();
                } else if let Some(ls) = lights.sample(&snap.ias, p, time, rng) {
                    let phase = hg_phase(ray.direction.dot(ls.wi), g);
                    if let Some(tr) = shadowed(snap, p, &ls, time, rng) {
                        let w = light_weight(config.strategy, ls.pdf, phase);
                        let c = beta * ls.radiance * (phase * tr * w / ls.pdf);
                        radiance += clamp_contribution(c, config.clamp_radiance, depth);
                    }
                }
                let (wi, pdf) = sample_phase(g, ray.direction, [rng_1d(sampler), rng_1d(sampler)]);
                specular = false;
                prev_pdf = pdf;
                prev_point = p;
                ray = Rayf::new(p, wi, time);
                if !roulette(&mut beta, depth, sampler) {
                    break;
                }
                continue;
            }
        }

        let Some(hit) = hit else {
            if let Some(env) = lights.environment() {
                let le = env.radiance(ray.direction);
                let w = hit_weight(config.strategy, specular, prev_pdf, lights.pdf_environment(ray.direction));
                radiance += clamp_contribution(beta * le * w, config.clamp_radiance, depth);
            }
            break;
        };

        let shading = &snap.shading[hit.instance as usize];
        let wo = -ray.direction;
        if shading.is_light {
            if let Some(light) = lights.light_for_instance(hit.instance) {
                let le = light.emission.emitted_radiance(hit.uv, hit.geometric_normal, wo);
                if !le.is_zero() {
                    let w = if specular {
                        1.0
                    } else {
                        let pl = lights.pdf_area(
                            &snap.ias,
                            hit.instance,
                            hit.triangle,
                            prev_point,
                            hit.position,
                            hit.geometric_normal,
                            time,
                        );
                        hit_weight(config.strategy, false, prev_pdf, pl)
                    };
                    radiance += clamp_contribution(beta * le * w, config.clamp_radiance, depth);
                }
            }
        }
        let Some(material) = &shading.material else { break };
        if depth == config.max_depth {
            break;
        }

        let params = material.resolve_params(hit.uv);
        let frame = apply_normal_map(material, hit.shading_normal, hit.dpdu, hit.uv).frame;
        let p = hit.position;
        let ng = hit.geometric_normal;

        // next event estimation
        if !params.is_pure_delta() && config.strategy != LightStrategy::BsdfOnly {
            if let Some(ls) = lights.sample(&snap.ias, p, time, sampler) {
                let (f, pdf_bsdf) = eval_bsdf(&params, wo, ls.wi, &frame);
                let cos = frame.n.dot(ls.wi).abs();
                if !f.is_zero() && cos > 0.0 {
                    let origin = spawn(p, ng, ls.wi);
                    if let Some(tr) = shadowed(snap, origin, &ls, time, sampler.stream()) {
                        let w = light_weight(config.strategy, ls.pdf, pdf_bsdf);
                        let c = beta * f * ls.radiance * (cos * tr * w / ls.pdf);
                        radiance += clamp_contribution(c, config.clamp_radiance, depth);
                    }
                }
            }
        } else {
            // keep the sample dimensions aligned across bounces
            sampler.next_1d();
            sampler.next_2d();
        }

        let Some(s) = sample_bsdf(&params, wo, &frame, sampler) else { break };
        if s.weight.is_zero() {
            break;
        }
        beta *= s.weight;
        specular = s.is_specular;
        prev_pdf = s.pdf;
        prev_point = p;
        ray = Rayf::new(spawn(p, ng, s.wi), s.wi, time);
        if !roulette(&mut beta, depth, sampler) {
            break;
        }
    }
    radiance
}

fn rng_1d(sampler: &mut PixelSampler) -> f64 {
    sampler.stream().next_1d()
}

/// Russian roulette from [`RR_START_DEPTH`]; survival is the largest
/// throughput component, clamped to `[RR_MIN_SURVIVAL, 1]`.
fn roulette(beta: &mut Rgb, depth: u32, sampler: &mut PixelSampler) -> bool {
    let u = sampler.next_1d();
    if depth + 1 < RR_START_DEPTH {
        return true;
    }
    let q = beta.max_component().clamp(RR_MIN_SURVIVAL, 1.0);
    if u >= q {
        return false;
    }
    *beta = *beta / q;
    true
}
