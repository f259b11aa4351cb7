//! Random-number plumbing and warping functions.
//!
//! Rendering draws from a [`PixelSampler`]: a counter-based source keyed by
//! `(seed, pixel, sample)`, so every sample's random stream is fixed no
//! matter which worker evaluates it. The leading dimensions of each sample
//! come from correlated multi-jittered patterns (Kensler 2013) for lower
//! variance; later dimensions fall back to a ChaCha stream.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Vec2f, Vec3f};

/// Source of uniform numbers in `[0, 1)`.
pub trait Sampler {
    fn next_1d(&mut self) -> f64;

    fn next_2d(&mut self) -> [f64; 2] {
        [self.next_1d(), self.next_1d()]
    }
}

macro_rules! rng_sampler {
    ($($t:ty),*) => {
        $(
            impl Sampler for $t {
                #[inline]
                fn next_1d(&mut self) -> f64 {
                    self.random::<f64>()
                }
            }
        )*
    };
}

rng_sampler!(ChaCha8Rng, rand::rngs::StdRng, rand::rngs::SmallRng);

/// How the leading sample dimensions are generated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SamplePattern {
    /// Correlated multi-jittered points for the leading dimensions.
    #[default]
    Stratified,
    /// Every dimension independent.
    Independent,
}

/// Dimensions served from stratified patterns before falling back to the stream.
pub const STRATIFIED_DIMS: u32 = 32;

/// Counter-based per-sample random source.
#[derive(Clone, Debug)]
pub struct PixelSampler {
    key: u64,
    sample: u32,
    spp: u32,
    dim: u32,
    pattern: SamplePattern,
    stream: ChaCha8Rng,
}

impl PixelSampler {
    pub fn new(seed: u64, pixel: u64, sample: u32, spp: u32, pattern: SamplePattern) -> Self {
        let mut stream = ChaCha8Rng::seed_from_u64(seed);
        stream.set_stream(pixel);
        stream.set_word_pos((sample as u128) << 32);
        Self {
            key: mix64(seed ^ mix64(pixel.wrapping_add(0x9e37_79b9_7f4a_7c15))),
            sample,
            spp: spp.max(1),
            dim: 0,
            pattern,
            stream,
        }
    }

    /// The independent stream, for consumers with a data-dependent number of draws.
    pub fn stream(&mut self) -> &mut ChaCha8Rng {
        &mut self.stream
    }

    fn pattern_seed(&mut self) -> Option<u32> {
        if self.pattern == SamplePattern::Independent || self.dim >= STRATIFIED_DIMS {
            return None;
        }
        let p = mix64(self.key ^ (self.dim as u64).wrapping_mul(0xd6e8_feb8_6659_fd93)) as u32;
        self.dim += 1;
        Some(p)
    }
}

impl Sampler for PixelSampler {
    fn next_1d(&mut self) -> f64 {
        match self.pattern_seed() {
            Some(p) => {
                let s = permute(self.sample, self.spp, p.wrapping_mul(0x68bc_21eb));
                (s as f64 + rand_unit(self.sample, p.wrapping_mul(0x967a_889b))) / self.spp as f64
            }
            None => self.stream.random::<f64>(),
        }
    }

    fn next_2d(&mut self) -> [f64; 2] {
        match self.pattern_seed() {
            Some(p) => cmj(self.sample, self.spp, p),
            None => [self.stream.random::<f64>(), self.stream.random::<f64>()],
        }
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Pseudo-random permutation of `[0, len)` indexed by `pattern`.
fn permute(mut i: u32, len: u32, p: u32) -> u32 {
    if len <= 1 {
        return 0;
    }
    let mut w = len - 1;
    w |= w >> 1;
    w |= w >> 2;
    w |= w >> 4;
    w |= w >> 8;
    w |= w >> 16;
    loop {
        i ^= p;
        i = i.wrapping_mul(0xe170_893d);
        i ^= p >> 16;
        i ^= (i & w) >> 4;
        i ^= p >> 8;
        i = i.wrapping_mul(0x0929_eb3f);
        i ^= p >> 23;
        i ^= (i & w) >> 1;
        i = i.wrapping_mul(1 | p >> 27);
        i = i.wrapping_mul(0x6935_fa69);
        i ^= (i & w) >> 11;
        i = i.wrapping_mul(0x74dc_b303);
        i ^= (i & w) >> 2;
        i = i.wrapping_mul(0x9e50_1cc3);
        i ^= (i & w) >> 2;
        i = i.wrapping_mul(0xc860_a3df);
        i &= w;
        i ^= i >> 5;
        if i < len {
            break;
        }
    }
    i.wrapping_add(p) % len
}

fn rand_unit(mut i: u32, p: u32) -> f64 {
    i ^= p;
    i ^= i >> 17;
    i ^= i >> 10;
    i = i.wrapping_mul(0xb365_34e5);
    i ^= i >> 12;
    i ^= i >> 21;
    i = i.wrapping_mul(0x93fc_4795);
    i ^= 0xdf6e_307f;
    i ^= i >> 17;
    i = i.wrapping_mul(1 | p >> 18);
    i as f64 / 4_294_967_296.0
}

/// Point `s` of an `n`-point correlated multi-jittered pattern.
fn cmj(s: u32, n: u32, p: u32) -> [f64; 2] {
    let m = ((n as f64).sqrt() as u32).max(1);
    let rows = n.div_ceil(m);
    let s = permute(s, n, p.wrapping_mul(0x5163_3e2d));
    let sx = permute(s % m, m, p.wrapping_mul(0x68bc_21eb));
    let sy = permute(s / m, rows, p.wrapping_mul(0x02e5_be93));
    let jx = rand_unit(s, p.wrapping_mul(0x967a_889b));
    let jy = rand_unit(s, p.wrapping_mul(0x368c_c8b7));
    let x = (sx as f64 + (sy as f64 + jx) / rows as f64) / m as f64;
    let y = (s as f64 + jy) / n as f64;
    [x.min(ONE_MINUS_EPS), y.min(ONE_MINUS_EPS)]
}

const ONE_MINUS_EPS: f64 = 1.0 - f64::EPSILON / 2.0;

/// Cosine-weighted direction about +z; pdf = cosθ/π.
pub fn cosine_hemisphere(u: [f64; 2]) -> Vec3f {
    let d = concentric_disk(u);
    let z = (1.0 - d.x * d.x - d.y * d.y).max(0.0).sqrt();
    Vec3f::new(d.x, d.y, z)
}

/// Uniform direction on the unit sphere; pdf = 1/(4π).
pub fn uniform_sphere(u: [f64; 2]) -> Vec3f {
    let z = 1.0 - 2.0 * u[0];
    let r = (1.0 - z * z).max(0.0).sqrt();
    let phi = TAU * u[1];
    Vec3f::new(r * phi.cos(), r * phi.sin(), z)
}

pub const UNIFORM_SPHERE_PDF: f64 = 1.0 / (4.0 * PI);

/// Shirley–Chiu concentric mapping of the unit square onto the unit disk.
pub fn concentric_disk(u: [f64; 2]) -> Vec2f {
    let a = 2.0 * u[0] - 1.0;
    let b = 2.0 * u[1] - 1.0;
    if a == 0.0 && b == 0.0 {
        return Vec2f::zero();
    }
    let (r, theta) = if a.abs() > b.abs() {
        (a, (PI / 4.0) * (b / a))
    } else {
        (b, PI / 2.0 - (PI / 4.0) * (a / b))
    };
    Vec2f::new(r * theta.cos(), r * theta.sin())
}

/// Uniform barycentrics `(u, v)` on a triangle.
pub fn uniform_triangle(u: [f64; 2]) -> (f64, f64) {
    let su = u[0].sqrt();
    (1.0 - su, u[1] * su)
}

/// Power heuristic with exponent 2: `a² / (a² + b²)`. Both zero yields 0.
#[inline]
pub fn power_heuristic(pdf_a: f64, pdf_b: f64) -> f64 {
    let a = pdf_a * pdf_a;
    let b = pdf_b * pdf_b;
    if a == 0.0 {
        return 0.0;
    }
    if a.is_infinite() {
        return if b.is_infinite() { 0.5 } else { 1.0 };
    }
    a / (a + b)
}

/// Discrete distribution over bins proportional to non-negative weights,
/// with a uniform fallback when every weight is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution1D {
    prob: Vec<f64>,
    cdf: Vec<f64>,
    total: f64,
}

impl Distribution1D {
    /// `weights` must be non-empty; negative and NaN weights count as zero.
    pub fn new(weights: &[f64]) -> Self {
        assert!(!weights.is_empty(), "distribution needs at least one bin");
        let clean: Vec<f64> = weights.iter().map(|&w| if w > 0.0 { w } else { 0.0 }).collect();
        let total: f64 = clean.iter().sum();
        let n = clean.len();
        let prob: Vec<f64> = if total > 0.0 && total.is_finite() {
            clean.iter().map(|w| w / total).collect()
        } else {
            vec![1.0 / n as f64; n]
        };
        let mut cdf = Vec::with_capacity(n + 1);
        cdf.push(0.0);
        let mut acc = 0.0;
        for p in &prob {
            acc += p;
            cdf.push(acc);
        }
        // the last entry is exactly one
        for c in cdf.iter_mut() {
            *c /= acc;
        }
        Self { prob, cdf, total }
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    /// Sum of the clamped input weights (0 when the uniform fallback is in use).
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    #[inline]
    pub fn prob(&self, i: usize) -> f64 {
        self.prob[i]
    }

    /// Picks a bin; returns `(index, probability, u remapped into the bin)`.
    pub fn sample_discrete(&self, u: f64) -> (usize, f64, f64) {
        let n = self.prob.len();
        let mut i = self.cdf.partition_point(|&c| c <= u).saturating_sub(1).min(n - 1);
        while self.prob[i] == 0.0 && i > 0 {
            i -= 1;
        }
        let p = self.prob[i];
        let remapped = if p > 0.0 {
            ((u - self.cdf[i]) / p).clamp(0.0, ONE_MINUS_EPS)
        } else {
            0.0
        };
        (i, p, remapped)
    }

    /// Continuous sample in `[0, 1)` with piecewise-constant density;
    /// returns `(x, density, bin)`.
    pub fn sample_continuous(&self, u: f64) -> (f64, f64, usize) {
        let (i, p, du) = self.sample_discrete(u);
        let n = self.prob.len() as f64;
        (((i as f64 + du) / n).min(ONE_MINUS_EPS), p * n, i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_heuristic_values() {
        assert_eq!(power_heuristic(1.0, 0.0), 1.0);
        assert_eq!(power_heuristic(1.0, 1.0), 0.5);
        assert!((power_heuristic(2.0, 1.0) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn permute_is_a_bijection() {
        for len in [1u32, 2, 7, 64, 100, 1000] {
            let mut seen = vec![false; len as usize];
            for i in 0..len {
                let j = permute(i, len, 0xdead_beef);
                assert!(!seen[j as usize]);
                seen[j as usize] = true;
            }
        }
    }

    #[test]
    fn cmj_is_stratified_in_both_axes() {
        let n = 64;
        let mut rows = vec![0; n as usize];
        let mut cols = vec![0; n as usize];
        for s in 0..n {
            let [x, y] = cmj(s, n, 12345);
            assert!((0.0..1.0).contains(&x) && (0.0..1.0).contains(&y));
            rows[(y * n as f64) as usize] += 1;
            cols[(x * n as f64) as usize] += 1;
        }
        assert!(rows.iter().all(|&c| c == 1));
        assert!(cols.iter().all(|&c| c == 1));
    }

    #[test]
    fn pixel_sampler_is_reproducible() {
        let draw = |pattern| {
            let mut s = PixelSampler::new(7, 123, 5, 16, pattern);
            (0..40).map(|_| s.next_1d()).collect::<Vec<_>>()
        };
        assert_eq!(draw(SamplePattern::Stratified), draw(SamplePattern::Stratified));
        assert_eq!(draw(SamplePattern::Independent), draw(SamplePattern::Independent));
        let mut other = PixelSampler::new(7, 124, 5, 16, SamplePattern::Independent);
        assert_ne!(draw(SamplePattern::Independent)[0], other.next_1d());
    }

    #[test]
    fn stratified_means_are_unbiased() {
        let spp = 256;
        let mut sum = [0.0; 3];
        let pixels = 200;
        for px in 0..pixels {
            for s in 0..spp {
                let mut ps = PixelSampler::new(1, px, s, spp, SamplePattern::Stratified);
                let a = ps.next_1d();
                let [b, c] = ps.next_2d();
                sum[0] += a;
                sum[1] += b;
                sum[2] += c * c;
            }
        }
        let n = (spp as u64 * pixels) as f64;
        assert!((sum[0] / n - 0.5).abs() < 2e-3);
        assert!((sum[1] / n - 0.5).abs() < 2e-3);
        assert!((sum[2] / n - 1.0 / 3.0).abs() < 2e-3);
    }

    #[test]
    fn warps_stay_on_their_domains() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let u = rng.next_2d();
            assert!((uniform_sphere(u).length() - 1.0).abs() < 1e-12);
            let c = cosine_hemisphere(u);
            assert!(c.z >= 0.0 && (c.length() - 1.0).abs() < 1e-12);
            assert!(concentric_disk(u).length() <= 1.0 + 1e-12);
            let (a, b) = uniform_triangle(u);
            assert!(a >= 0.0 && b >= 0.0 && a + b <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn distribution_matches_weights() {
        let d = Distribution1D::new(&[1.0, 0.0, 3.0]);
        assert_eq!(d.cdf(), &[0.0, 0.25, 0.25, 1.0]);
        assert_eq!(d.sample_discrete(0.1).0, 0);
        assert_eq!(d.sample_discrete(0.25).0, 2);
        assert_eq!(d.sample_discrete(0.999_999).0, 2);
        let (x, pdf, bin) = d.sample_continuous(0.625);
        assert_eq!(bin, 2);
        assert!((x - 2.5 / 3.0).abs() < 1e-12);
        assert!((pdf - 2.25).abs() < 1e-12);
        let flat = Distribution1D::new(&[0.0, 0.0]);
        assert_eq!(flat.prob(1), 0.5);
        assert_eq!(flat.total(), 0.0);
    }
}
