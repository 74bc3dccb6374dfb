//! Benchmark geometries: particles on an icosahedral sphere triangulation
//! and uniformly random particles in a cube.
//!
//! Random streams come from xoshiro256** seeded through SplitMix64
//! (`Xoshiro256StarStar::seed_from_u64`). A uniform variate in `[0, 1)` is
//! `(next_u64() >> 11) * 2^-53`; weights are `2u - 1`. Draw order is
//! documented on each generator so the streams can be reproduced elsewhere.

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::particles::{norm, ParticleSet, Vec3};

/// Default particle number density of the cube case.
pub const CUBE_DENSITY: f64 = 2500.0;

struct Uniform(Xoshiro256StarStar);

impl Uniform {
    fn new(seed: u64) -> Self {
        Self(Xoshiro256StarStar::seed_from_u64(seed))
    }

    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn symmetric(&mut self) -> f64 {
        2.0 * self.unit() - 1.0
    }

    fn weights(&mut self, n: usize) -> Vec<Vec3> {
        (0..n)
            .map(|_| [self.symmetric(), self.symmetric(), self.symmetric()])
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SphereCaseConfig {
    /// Refinement levels; the sphere carries `20 * 4^levels` particles.
    pub levels: u32,
    pub seed: u64,
}

impl SphereCaseConfig {
    pub fn new(levels: u32, seed: u64) -> Self {
        Self { levels, seed }
    }

    pub fn particle_count(&self) -> usize {
        20 << (2 * self.levels)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubeCaseConfig {
    pub n: usize,
    /// Number density `N / L^3`.
    pub density: f64,
    pub seed: u64,
    /// Also draw dipole weights and random unit normals.
    pub stresslets: bool,
}

impl CubeCaseConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            density: CUBE_DENSITY,
            seed,
            stresslets: false,
        }
    }

    pub fn with_stresslets(mut self) -> Self {
        self.stresslets = true;
        self
    }

    /// Cube side `L = (N / density)^(1/3)`.
    pub fn side(&self) -> f64 {
        (self.n as f64 / self.density).cbrt()
    }
}

fn normalize(v: Vec3) -> Vec3 {
    let r = norm(v);
    [v[0] / r, v[1] / r, v[2] / r]
}

fn midpoint_on_sphere(a: Vec3, b: Vec3) -> Vec3 {
    normalize([a[0] + b[0], a[1] + b[1], a[2] + b[2]])
}

/// The 20 faces of the icosahedron with vertices `(0, ±1, ±φ)` and their
/// cyclic permutations, projected to the unit sphere. Faces are listed in
/// lexicographic order of their vertex indices and oriented outward.
fn icosahedron() -> Vec<[Vec3; 3]> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut raw = Vec::with_capacity(12);
    for s1 in [-1.0, 1.0] {
        for s2 in [-phi, phi] {
            raw.push([0.0, s1, s2]);
            raw.push([s1, s2, 0.0]);
            raw.push([s2, 0.0, s1]);
        }
    }
    // Edge length of the unnormalized solid is 2.
    let adjacent = |a: Vec3, b: Vec3| {
        let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
        ((d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) - 4.0).abs() < 1e-9
    };
    let vertices: Vec<Vec3> = raw.iter().map(|&v| normalize(v)).collect();
    let mut faces = Vec::with_capacity(20);
    for i in 0..12 {
        for j in i + 1..12 {
            for k in j + 1..12 {
                if adjacent(raw[i], raw[j]) && adjacent(raw[j], raw[k]) && adjacent(raw[i], raw[k]) {
                    let (a, b, c) = (vertices[i], vertices[j], vertices[k]);
                    let n = cross(sub3(b, a), sub3(c, a));
                    let outward = n[0] * a[0] + n[1] * a[1] + n[2] * a[2] > 0.0;
                    faces.push(if outward { [a, b, c] } else { [a, c, b] });
                }
            }
        }
    }
    debug_assert_eq!(faces.len(), 20);
    faces
}

fn sub3(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn refine(faces: Vec<[Vec3; 3]>) -> Vec<[Vec3; 3]> {
    let mut out = Vec::with_capacity(faces.len() * 4);
    for [a, b, c] in faces {
        let ab = midpoint_on_sphere(a, b);
        let bc = midpoint_on_sphere(b, c);
        let ca = midpoint_on_sphere(c, a);
        out.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
    }
    out
}

/// Particles at the projected centroids of a geodesic icosphere
/// triangulation with `20 * 4^levels` faces.
///
/// Normals equal the positions. Force weights are drawn first, three per
/// particle in particle order, then the dipole weights in the same way.
pub fn sphere_particles(cfg: &SphereCaseConfig) -> ParticleSet {
    let mut faces = icosahedron();
    for _ in 0..cfg.levels {
        faces = refine(faces);
    }
    let positions: Vec<Vec3> = faces
        .iter()
        .map(|[a, b, c]| {
            normalize([
                (a[0] + b[0] + c[0]) / 3.0,
                (a[1] + b[1] + c[1]) / 3.0,
                (a[2] + b[2] + c[2]) / 3.0,
            ])
        })
        .collect();
    let n = positions.len();
    let mut rng = Uniform::new(cfg.seed);
    let forces = rng.weights(n);
    let dipoles = rng.weights(n);
    let normals = positions.clone();
    ParticleSet::with_stresslets(positions, forces, dipoles, normals)
}

/// Uniformly random particles in `[0, L]^3`.
///
/// Draw order: all positions (three per particle), then all force weights.
/// With stresslets enabled this is followed by all dipole weights and then
/// the normals, each normal drawn as three symmetric variates and
/// normalized (redrawn while its length is below `1e-3`).
pub fn cube_particles(cfg: &CubeCaseConfig) -> ParticleSet {
    let side = cfg.side();
    let mut rng = Uniform::new(cfg.seed);
    let positions = (0..cfg.n)
        .map(|_| [side * rng.unit(), side * rng.unit(), side * rng.unit()])
        .collect();
    let forces = rng.weights(cfg.n);
    if !cfg.stresslets {
        return ParticleSet::new(positions, forces);
    }
    let dipoles = rng.weights(cfg.n);
    let normals = (0..cfg.n)
        .map(|_| loop {
            let v = [rng.symmetric(), rng.symmetric(), rng.symmetric()];
            if norm(v) >= 1e-3 {
                break normalize(v);
            }
        })
        .collect();
    ParticleSet::with_stresslets(positions, forces, dipoles, normals)
}
