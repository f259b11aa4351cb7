//! Tile-parallel progressive rendering of snapshots.

mod integrator;

use rayon::prelude::*;

pub use integrator::{trace_path, RR_MIN_SURVIVAL, RR_START_DEPTH};

use crate::sampling::{PixelSampler, SamplePattern, Sampler};
use crate::scene::RenderSnapshot;
use crate::Rgb;

/// Edge length of the square tiles handed to workers.
pub const TILE_SIZE: u32 = 32;
/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "VISTRACE_WORKERS";
pub const DEFAULT_MAX_DEPTH: u32 = 8;
pub const DEFAULT_CLAMP: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RenderError {
    #[error("image dimensions must be at least 1x1")]
    EmptyImage,
    #[error("samples per pixel must be at least 1")]
    NoSamples,
    #[error("max depth must be at least 1")]
    NoDepth,
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

/// How direct light is estimated at each vertex.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LightStrategy {
    /// Light sampling and BSDF sampling combined with the power heuristic.
    #[default]
    Mis,
    /// Light sampling only; emitters found by BSDF sampling are ignored
    /// unless reached through a delta lobe.
    LightOnly,
    /// BSDF sampling only.
    BsdfOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderConfig {
    pub width: u32,
    pub height: u32,
    pub samples_per_pixel: u32,
    /// Maximum number of scattering events along a path.
    pub max_depth: u32,
    pub seed: u64,
    /// Per-contribution cap on indirect radiance; `None` disables it.
    pub clamp_radiance: Option<f64>,
    pub pattern: SamplePattern,
    pub strategy: LightStrategy,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            width: 512,
            height: 512,
            samples_per_pixel: 16,
            max_depth: DEFAULT_MAX_DEPTH,
            seed: 0,
            clamp_radiance: Some(DEFAULT_CLAMP),
            pattern: SamplePattern::Stratified,
            strategy: LightStrategy::Mis,
            workers: None,
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<(), RenderError> {
        if self.width == 0 || self.height == 0 {
            return Err(RenderError::EmptyImage);
        }
        if self.samples_per_pixel == 0 {
            return Err(RenderError::NoSamples);
        }
        if self.max_depth == 0 {
            return Err(RenderError::NoDepth);
        }
        Ok(())
    }
}

/// Worker count from [`WORKERS_ENV`], if set to a positive integer.
pub fn workers_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Mean linear radiance per pixel, row-major from the top-left.
#[derive(Clone, Debug, PartialEq)]
pub struct Framebuffer {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<Rgb>,
    /// Samples discarded for being NaN or infinite.
    pub dropped_samples: u64,
}

impl Framebuffer {
    pub fn pixel(&self, x: u32, y: u32) -> Rgb {
        self.pixels[(y * self.width + x) as usize]
    }
}

/// Tile rectangles `(x0, y0, x1, y1)` in row-major order.
pub fn tiles(width: u32, height: u32) -> Vec<(u32, u32, u32, u32)> {
    let mut out = Vec::new();
    for y0 in (0..height).step_by(TILE_SIZE as usize) {
        for x0 in (0..width).step_by(TILE_SIZE as usize) {
            out.push((x0, y0, (x0 + TILE_SIZE).min(width), (y0 + TILE_SIZE).min(height)));
        }
    }
    out
}

/// Runs `f` on each tile in parallel and scatters the per-pixel results
/// into a row-major buffer. Each pixel is written by exactly one tile.
pub fn par_tiles<T, F>(width: u32, height: u32, workers: Option<usize>, f: F) -> Result<Vec<T>, RenderError>
where
    T: Send + Clone + Default,
    F: Fn(u32, u32) -> T + Sync + Send,
{
    let run = || {
        tiles(width, height)
            .into_par_iter()
            .map(|(x0, y0, x1, y1)| {
                let mut values = Vec::with_capacity(((x1 - x0) * (y1 - y0)) as usize);
                for y in y0..y1 {
                    for x in x0..x1 {
                        values.push(f(x, y));
                    }
                }
                ((x0, y0, x1, y1), values)
            })
            .collect::<Vec<_>>()
    };
    let done = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RenderError::Pool(e.to_string()))?
            .install(run),
        None => run(),
    };
    let mut out = vec![T::default(); (width * height) as usize];
    for ((x0, y0, x1, _), values) in done {
        let w = x1 - x0;
        for (i, v) in values.into_iter().enumerate() {
            let (x, y) = (x0 + i as u32 % w, y0 + i as u32 / w);
            out[(y * width + x) as usize] = v;
        }
    }
    Ok(out)
}

/// Estimates one pixel: box-filtered jitter, lens and shutter sampling,
/// then a path per sample.
pub fn render_pixel(snap: &RenderSnapshot, config: &RenderConfig, x: u32, y: u32) -> (Rgb, u32) {
    let cam = &snap.camera;
    let pixel = y as u64 * config.width as u64 + x as u64;
    let mut sum = Rgb::zero();
    let mut valid = 0u32;
    for s in 0..config.samples_per_pixel {
        let mut sampler = PixelSampler::new(config.seed, pixel, s, config.samples_per_pixel, config.pattern);
        let jitter = sampler.next_2d();
        let lens = sampler.next_2d();
        let time = sampler.next_1d();
        let ray = cam.camera.generate_ray(
            &cam.world_from_camera(time),
            config.width,
            config.height,
            x,
            y,
            jitter,
            lens,
            time,
        );
        let l = trace_path(snap, ray, &mut sampler, config);
        if l.is_finite() {
            sum += l;
            valid += 1;
        }
    }
    let mean = if valid > 0 { sum / valid as f64 } else { Rgb::zero() };
    (mean, config.samples_per_pixel - valid)
}

/// Renders the beauty pass. The result is a pure function of the snapshot
/// and configuration, independent of worker count and scheduling.
pub fn render(snap: &RenderSnapshot, config: &RenderConfig) -> Result<Framebuffer, RenderError> {
    config.validate()?;
    let results = par_tiles(config.width, config.height, config.workers, |x, y| {
        render_pixel(snap, config, x, y)
    })?;
    Ok(Framebuffer {
        width: config.width,
        height: config.height,
        dropped_samples: results.iter().map(|r| r.1 as u64).sum(),
        pixels: results.into_iter().map(|r| r.0).collect(),
    })
}
