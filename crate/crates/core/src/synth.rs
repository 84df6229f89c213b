//! Synthetic point clouds and noise injectors for tests and benchmarks.
//!
//! All generators are deterministic for a given seed.

use std::f64::consts::{PI, TAU};

use nalgebra::{Rotation3, Unit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, UnitSphere};

use crate::geom::{Point3, UnitNormal, Vec3};
use crate::pointcloud::PointCloud;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    let [x, y, z]: [f64; 3] = UnitSphere.sample(rng);
    Vec3::new(x, y, z)
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Rotation3<f64> {
    let axis = Unit::new_normalize(random_unit(rng));
    Rotation3::from_axis_angle(&axis, rng.random_range(0.0..TAU))
}

fn cloud(positions: Vec<Point3>, normals: Vec<Vec3>) -> PointCloud {
    PointCloud::with_normals(positions, normals).expect("generated samples are finite with nonzero normals")
}

/// `n` points of a Fibonacci lattice on the unit sphere, rigidly rotated by
/// a seed-dependent rotation; normals point outward.
pub fn sample_sphere(n: usize, seed: u64) -> PointCloud {
    let rot = random_rotation(&mut rng(seed));
    let golden = PI * (3.0 - 5f64.sqrt());
    let pts: Vec<Point3> = (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            rot * Point3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect();
    let normals = pts.iter().map(|p| p.coords).collect();
    cloud(pts, normals)
}

/// Torus point and outward normal at angles `(u, v)`: `u` around the axis, `v` around the tube.
pub fn torus_point(major: f64, minor: f64, u: f64, v: f64) -> (Point3, Vec3) {
    let (su, cu) = u.sin_cos();
    let (sv, cv) = v.sin_cos();
    let normal = Vec3::new(cv * cu, cv * su, sv);
    let p = Point3::new((major + minor * cv) * cu, (major + minor * cv) * su, minor * sv);
    (p, normal)
}

/// Default jitter of [`sample_torus`], as a fraction of the mean spacing.
pub const TORUS_JITTER: f64 = 0.25;

/// `n` area-uniform samples of a torus with radii `major > minor > 0`.
///
/// Points start on a rank-1 lattice (golden-ratio spacing around the tube)
/// with a seeded offset and are then moved along the surface by up to
/// [`TORUS_JITTER`] times the mean spacing in a random direction; an exact
/// lattice produces long runs of equal edge lengths.
pub fn sample_torus(n: usize, major: f64, minor: f64, seed: u64) -> PointCloud {
    sample_torus_jittered(n, major, minor, seed, TORUS_JITTER)
}

/// [`sample_torus`] with an explicit jitter fraction (0 gives the bare lattice).
pub fn sample_torus_jittered(n: usize, major: f64, minor: f64, seed: u64, jitter: f64) -> PointCloud {
    assert!(major > minor && minor > 0.0, "torus radii must satisfy R > r > 0");
    let mut rng = rng(seed);
    let (du, dv): (f64, f64) = (rng.random(), rng.random());
    let spacing = (TAU * TAU * major * minor / n as f64).sqrt();
    let inv_golden = (5f64.sqrt() - 1.0) / 2.0;
    let mut pts = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    for i in 0..n {
        let mut u = TAU * ((i as f64 + du) / n as f64);
        let s = (i as f64 * inv_golden + dv).fract();
        // Invert the tube-angle CDF (R v + r sin v) / (2π R) = s.
        let target = TAU * major * s;
        let mut v = TAU * s;
        for _ in 0..50 {
            let f = major * v + minor * v.sin() - target;
            let step = f / (major + minor * v.cos());
            v -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        if jitter > 0.0 {
            let len = jitter * spacing * rng.random::<f64>();
            let dir = rng.random_range(0.0..TAU);
            u += len * dir.cos() / (major + minor * v.cos());
            v += len * dir.sin() / minor;
        }
        let (p, nrm) = torus_point(major, minor, u, v);
        pts.push(p);
        normals.push(nrm);
    }
    cloud(pts, normals)
}

/// Two aligned `m × m` unit-spaced grids (`m = round(√(n/2))`): one at
/// `z = 0` facing −z and one at `z = gap` facing +z.
pub fn sample_two_sheets(n: usize, gap: f64) -> PointCloud {
    assert!(gap > 0.0, "gap must be positive");
    let m = ((n as f64 / 2.0).sqrt().round() as usize).max(2);
    let mut pts = Vec::with_capacity(2 * m * m);
    let mut normals = Vec::with_capacity(2 * m * m);
    for (z, nz) in [(0.0, -1.0), (gap, 1.0)] {
        for i in 0..m {
            for j in 0..m {
                pts.push(Point3::new(i as f64, j as f64, z));
                normals.push(Vec3::new(0.0, 0.0, nz));
            }
        }
    }
    cloud(pts, normals)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    /// Offset direction uniform on the sphere.
    Full,
    /// Offset direction uniform in the tangent plane.
    Tangential,
    /// Offset along the normal only.
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub amplitude: f64,
    pub mode: NoiseMode,
    pub seed: u64,
}

/// Offsets every point by `A · e_bar · g · v` with `g ~ N(0, 1)` and unit `v`
/// chosen per `spec.mode`. Normals are kept; the noisy positions become the
/// cloud's original positions.
pub fn add_position_noise(cloud: &PointCloud, spec: NoiseSpec, e_bar: f64) -> PointCloud {
    assert!(spec.amplitude >= 0.0 && e_bar > 0.0);
    let mut rng = rng(spec.seed);
    let positions: Vec<Point3> = cloud
        .positions
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let g: f64 = StandardNormal.sample(&mut rng);
            let dir = match spec.mode {
                NoiseMode::Full => random_unit(&mut rng),
                NoiseMode::Tangential => {
                    let n = cloud.normal(i);
                    let (e1, e2) = crate::geom::tangent_frame(n);
                    let a = rng.random_range(0.0..TAU);
                    e1 * a.cos() + e2 * a.sin()
                }
                NoiseMode::Normal => cloud.normal(i).into_inner(),
            };
            p + dir * (spec.amplitude * e_bar * g)
        })
        .collect();
    PointCloud {
        original_positions: positions.clone(),
        positions,
        normals: cloud.normals.clone(),
    }
}

/// Tilts each normal by an angle uniform in `[0, θ]` about a random axis
/// perpendicular to it.
pub fn add_normal_noise(cloud: &PointCloud, theta_deg: f64, seed: u64) -> PointCloud {
    let normals = cloud.normals.as_ref().expect("normal noise needs normals");
    let max = theta_deg.to_radians();
    let mut rng = rng(seed);
    let noisy = normals
        .iter()
        .map(|n| {
            let (e1, e2) = crate::geom::tangent_frame(n);
            let phi = rng.random_range(0.0..TAU);
            let tilt = if max > 0.0 { rng.random_range(0.0..=max) } else { 0.0 };
            if tilt == 0.0 {
                return *n;
            }
            let axis = Unit::new_normalize(e1 * phi.cos() + e2 * phi.sin());
            let rotated = Rotation3::from_axis_angle(&axis, tilt) * n.into_inner();
            UnitNormal::new_normalize(rotated).expect("rotation keeps unit length")
        })
        .collect();
    PointCloud {
        normals: Some(noisy),
        ..cloud.clone()
    }
}

/// Moves the points at `indices` by `A · e_bar` along the direction `v`.
pub fn displace_subset(cloud: &PointCloud, indices: &[usize], amplitude: f64, e_bar: f64, v: Vec3) -> PointCloud {
    let dir = v.try_normalize(0.0).unwrap_or_else(Vec3::zeros);
    let mut out = cloud.clone();
    for &i in indices {
        out.positions[i] += dir * (amplitude * e_bar);
    }
    out.original_positions = out.positions.clone();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kdtree::KdTree;

    #[test]
    fn sphere_samples() {
        let c = sample_sphere(1000, 3);
        for (p, n) in c.positions.iter().zip(c.normals.as_ref().unwrap()) {
            assert!((p.coords.norm() - 1.0).abs() < 1e-12);
            assert!((p.coords - n.as_vec()).norm() < 1e-12);
        }
        let tree = KdTree::build(&c.positions).unwrap();
        let nn: Vec<f64> = c.positions.iter().map(|p| tree.knn(p, 2)[1].1).collect();
        let mean = nn.iter().sum::<f64>() / nn.len() as f64;
        let sd = (nn.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / nn.len() as f64).sqrt();
        assert!(sd / mean < 0.2, "cv {}", sd / mean);
        assert_eq!(sample_sphere(100, 9), sample_sphere(100, 9));
        assert_ne!(sample_sphere(100, 9), sample_sphere(100, 10));
    }

    #[test]
    fn torus_on_implicit_surface() {
        let (big, small) = (2.0, 0.7);
        let c = sample_torus(4000, big, small, 1);
        for (p, n) in c.positions.iter().zip(c.normals.as_ref().unwrap()) {
            let q = (p.x * p.x + p.y * p.y).sqrt() - big;
            assert!((q * q + p.z * p.z - small * small).abs() < 1e-9);
            let center = Point3::new(p.x * big / (p.x * p.x + p.y * p.y).sqrt(), p.y * big / (p.x * p.x + p.y * p.y).sqrt(), 0.0);
            assert!(((p - center) / small - n.as_vec()).norm() < 1e-9);
        }
    }

    #[test]
    fn two_sheets_gap() {
        let c = sample_two_sheets(800, 0.5);
        assert_eq!(c.len(), 800);
        let half = c.len() / 2;
        let mut min = f64::INFINITY;
        for a in &c.positions[..half] {
            for b in &c.positions[half..] {
                min = min.min((a - b).norm());
            }
        }
        assert!((min - 0.5).abs() < 1e-12);
    }

    #[test]
    fn position_noise() {
        let c = sample_sphere(500, 0);
        let same = add_position_noise(&c, NoiseSpec { amplitude: 0.0, mode: NoiseMode::Full, seed: 1 }, 0.1);
        assert_eq!(same.positions, c.positions);
        let t = add_position_noise(&c, NoiseSpec { amplitude: 1.0, mode: NoiseMode::Tangential, seed: 1 }, 0.1);
        for i in 0..c.len() {
            assert!((t.positions[i] - c.positions[i]).dot(c.normal(i).as_vec()).abs() < 1e-9);
        }
        assert_eq!(t.original_positions, t.positions);
        assert_eq!(t.normals, c.normals);
    }

    #[test]
    fn position_noise_rms() {
        let c = sample_sphere(100_000, 0);
        let (a, e_bar) = (0.3, 0.02);
        let noisy = add_position_noise(&c, NoiseSpec { amplitude: a, mode: NoiseMode::Full, seed: 7 }, e_bar);
        let ms = c
            .positions
            .iter()
            .zip(&noisy.positions)
            .map(|(p, q)| (p - q).norm_squared())
            .sum::<f64>()
            / c.len() as f64;
        assert!((ms.sqrt() / (a * e_bar) - 1.0).abs() < 0.05);
    }

    #[test]
    fn normal_noise_bounds() {
        let c = sample_sphere(2000, 0);
        assert_eq!(add_normal_noise(&c, 0.0, 3).normals, c.normals);
        let noisy = add_normal_noise(&c, 15.0, 3);
        let mut max_dev: f64 = 0.0;
        for i in 0..c.len() {
            let d = noisy.normal(i).dot(c.normal(i)).clamp(-1.0, 1.0).acos();
            max_dev = max_dev.max(d);
        }
        assert!(max_dev <= 15f64.to_radians() + 1e-9);
        assert!(max_dev > 14f64.to_radians());
    }

    #[test]
    fn displace() {
        let c = sample_sphere(100, 0);
        assert_eq!(displace_subset(&c, &[1, 2], 0.0, 0.1, Vec3::x()).positions, c.positions);
        let d = displace_subset(&c, &[1, 2], 4.0, 0.1, Vec3::new(0.0, 2.0, 0.0));
        assert!((d.positions[1] - c.positions[1] - Vec3::new(0.0, 0.4, 0.0)).norm() < 1e-12);
        assert_eq!(d.positions[0], c.positions[0]);
    }
}
