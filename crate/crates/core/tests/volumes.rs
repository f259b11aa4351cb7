use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vistrace::sampling::Sampler;
use vistrace::volumes::{hg_phase, sample_phase, MediumEvent, VolumeGrid};
use vistrace::{Rgb, Vec3f};

fn homogeneous(d: f32, sigma_t: f64) -> VolumeGrid {
    VolumeGrid::from_array([2, 2, 2], vec![d; 8], sigma_t, Rgb::one(), 0.0).unwrap()
}

fn mean_transmittance(g: &VolumeGrid, o: Vec3f, dir: Vec3f, t1: f64, n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| g.transmittance(o, dir, 0.0, t1, &mut rng)).sum::<f64>() / n as f64
}

#[test]
fn homogeneous_transmittance_matches_beer_lambert() {
    // the segment runs diagonally so that the world length exceeds 1
    for tau in [0.5, 2.0, 10.0] {
        let dir = Vec3f::new(1.0, 1.0, 0.0).normalize();
        let len = 2f64.sqrt();
        let g = homogeneous(2.0, tau / (2.0 * len));
        let est = mean_transmittance(&g, Vec3f::new(0.0, 0.0, 0.5), dir, 10.0, 100_000, 1);
        let exact = (-tau).exp();
        assert!((est - exact).abs() / exact < 0.01, "tau {tau}: {est} vs {exact}");
    }
}

/// Piecewise-linear density along x through the grid center: constant
/// beyond the outer voxel centers, linear between neighbouring centers.
fn gradient_optical_depth(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mut tau = 0.5 / n * (values[0] + values[values.len() - 1]);
    for w in values.windows(2) {
        tau += 0.5 * (w[0] + w[1]) / n;
    }
    tau
}

#[test]
fn heterogeneous_transmittance_matches_quadrature() {
    let values: Vec<f64> = (0..8).map(|i| (i * i) as f64 / 49.0 * 3.0).collect();
    let mut density = Vec::new();
    for _z in 0..2 {
        for _y in 0..2 {
            density.extend(values.iter().map(|&v| v as f32));
        }
    }
    let g = VolumeGrid::from_array([8, 2, 2], density, 1.0, Rgb::one(), 0.0).unwrap();
    assert_eq!(g.min_density(), 0.0);
    let exact = (-gradient_optical_depth(&values)).exp();
    let est = mean_transmittance(&g, Vec3f::new(-0.5, 0.5, 0.5), Vec3f::unit_x(), 5.0, 100_000, 2);
    assert!((est - exact).abs() / exact < 0.01, "{est} vs {exact}");
}

/// Asymptotic Kolmogorov distribution tail.
fn ks_p_value(d: f64, n: usize) -> f64 {
    let l = (n as f64).sqrt() * d;
    let mut p = 0.0;
    for k in 1..100 {
        let k = k as f64;
        p += 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * l * l).exp();
    }
    p.clamp(0.0, 1.0)
}

#[test]
fn free_flights_in_half_empty_grid_follow_piecewise_law() {
    let nz = 64u32;
    let d = 3.0;
    let mut density = Vec::new();
    for z in 0..nz {
        let v = if z < nz / 2 { d as f32 } else { 0.0 };
        density.extend([v; 4]);
    }
    let g = VolumeGrid::from_array([2, 2, nz], density, 1.0, Rgb::one(), 0.0).unwrap();

    // optical depth from z=0: constant up to the last dense center, a linear
    // ramp across one voxel, zero beyond
    let z0 = (nz as f64 / 2.0 - 0.5) / nz as f64;
    let z1 = z0 + 1.0 / nz as f64;
    let tau = |z: f64| {
        if z <= z0 {
            d * z
        } else if z <= z1 {
            let s = (z - z0) / (z1 - z0);
            d * z0 + d * (z1 - z0) * (s - 0.5 * s * s)
        } else {
            d * z0 + 0.5 * d * (z1 - z0)
        }
    };
    let cdf = |z: f64| 1.0 - (-tau(z)).exp();
    let collide = cdf(1.0);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 100_000;
    let mut flights = Vec::new();
    for _ in 0..n {
        if let Some(c) = g.sample_scatter(Vec3f::new(0.5, 0.5, 0.0), Vec3f::unit_z(), 0.0, 2.0, &mut rng) {
            assert_eq!(c.event, MediumEvent::Scatter);
            flights.push(c.t);
        }
    }
    let frac = flights.len() as f64 / n as f64;
    assert!((frac - collide).abs() / collide < 0.01, "{frac} vs {collide}");

    flights.sort_by(f64::total_cmp);
    let m = flights.len();
    let mut dmax: f64 = 0.0;
    for (i, &t) in flights.iter().enumerate() {
        let f = cdf(t) / collide;
        dmax = dmax.max((f - i as f64 / m as f64).abs()).max(((i + 1) as f64 / m as f64 - f).abs());
    }
    let p = ks_p_value(dmax, m);
    assert!(p > 0.01, "KS D={dmax} p={p}");
}

#[test]
fn absorption_split_follows_albedo() {
    let g = VolumeGrid::from_array([1, 1, 1], vec![50.0], 1.0, Rgb::new(0.2, 0.4, 0.6), 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 50_000;
    let mut scatter = 0;
    let mut weight = Rgb::zero();
    for _ in 0..n {
        let c = g
            .sample_scatter(Vec3f::new(0.5, 0.5, 0.0), Vec3f::unit_z(), 0.0, 1.0, &mut rng)
            .unwrap();
        if c.event == MediumEvent::Scatter {
            scatter += 1;
        }
        weight += c.weight;
    }
    assert!((scatter as f64 / n as f64 - 0.4).abs() < 0.01);
    // expected weight per collision equals the albedo
    let mean = weight / n as f64;
    assert!((mean - Rgb::new(0.2, 0.4, 0.6)).abs().max_component() < 0.01, "{mean:?}");
}

#[test]
fn trilinear_lookup_reproduces_plume_at_voxel_centers() {
    let n = 64u32;
    let plume = |x: f64, y: f64, z: f64| {
        let r2 = (x - 0.5).powi(2) + (y - 0.5).powi(2);
        let spread = 0.02 + 0.05 * z;
        ((1.0 - z) * (-r2 / spread).exp() * (1.0 + 0.3 * (12.0 * z + 5.0 * x).sin())).max(0.0) as f32
    };
    let mut density = Vec::with_capacity((n * n * n) as usize);
    for z in 0..n {
        for y in 0..n {
            for x in 0..n {
                let c = |i: u32| (i as f64 + 0.5) / n as f64;
                density.push(plume(c(x), c(y), c(z)));
            }
        }
    }
    let g = VolumeGrid::from_array([n, n, n], density.clone(), 1.0, Rgb::one(), 0.3).unwrap();
    assert_eq!(g.max_density(), density.iter().cloned().fold(0.0, f32::max) as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..2000 {
        let i = [0, 1, 2].map(|_| (rng.next_1d() * n as f64) as u32);
        let p = Vec3f::from_array(i.map(|k| (k as f64 + 0.5) / n as f64));
        let direct = density[((i[2] * n + i[1]) * n + i[0]) as usize] as f64;
        assert!((g.density_at(p) - direct).abs() <= 1e-6 * direct.max(1e-30), "{i:?}");
    }
}

#[test]
fn hg_mean_cosine_equals_g() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let dir = Vec3f::new(0.3, -0.4, 0.5).normalize();
    for g in [-0.5, 0.0, 0.3, 0.8] {
        let n = 100_000;
        let mean = (0..n)
            .map(|_| sample_phase(g, dir, rng.next_2d()).0.dot(dir))
            .sum::<f64>()
            / n as f64;
        assert!((mean - g).abs() < 0.01, "g {g}: {mean}");
    }
}

#[test]
fn hg_pdf_integrates_to_one() {
    // jittered uniform-sphere Monte Carlo estimate of the integral
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for g in [0.0, 0.5, -0.7] {
        let n = 1_000_000;
        let sum: f64 = (0..n)
            .map(|i| {
                let cos = 1.0 - 2.0 * (i as f64 + rng.next_1d()) / n as f64;
                hg_phase(cos, g) * 4.0 * PI
            })
            .sum();
        let est = sum / n as f64;
        assert!((est - 1.0).abs() < 0.005, "g {g}: {est}");
    }
}

#[test]
fn sampled_pdf_matches_density() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let dir = Vec3f::unit_y();
    for _ in 0..1000 {
        let (wi, pdf) = sample_phase(0.6, dir, rng.next_2d());
        assert!((wi.length() - 1.0).abs() < 1e-12);
        assert!((hg_phase(wi.dot(dir), 0.6) - pdf).abs() <= 1e-9 * pdf);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn extinction_product_invariance(k in 0.1f64..10.0, seed in any::<u64>(), d in 0.0f32..4.0) {
        let values: Vec<f32> = (0..27).map(|i| d * ((i * 7 % 11) as f32 / 10.0)).collect();
        let a = VolumeGrid::from_array([3, 3, 3], values.clone(), 1.5, Rgb::one(), 0.0).unwrap();
        let scaled: Vec<f32> = values.iter().map(|&v| (v as f64 * k) as f32).collect();
        let b = VolumeGrid::from_array([3, 3, 3], scaled, 1.5 / k, Rgb::one(), 0.0).unwrap();
        let (o, dir) = (Vec3f::new(-0.2, 0.3, 0.4), Vec3f::new(1.0, 0.2, 0.1).normalize());
        let mut ra = ChaCha8Rng::seed_from_u64(seed);
        let mut rb = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let ta = a.transmittance(o, dir, 0.0, 3.0, &mut ra);
            let tb = b.transmittance(o, dir, 0.0, 3.0, &mut rb);
            prop_assert!((ta - tb).abs() < 1e-4, "{} vs {}", ta, tb);
        }
    }

    #[test]
    fn transmittance_estimates_lie_in_unit_interval(seed in any::<u64>(), d in 0.0f32..20.0) {
        let values: Vec<f32> = (0..8).map(|i| d * (i as f32) / 7.0).collect();
        let g = VolumeGrid::from_array([2, 2, 2], values, 1.0, Rgb::one(), 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = g.transmittance(Vec3f::new(0.5, -1.0, 0.5), Vec3f::unit_y(), 0.0, 5.0, &mut rng);
        prop_assert!((0.0..=1.0).contains(&t));
    }
}
