//! Independent reference implementations shared by the integration tests
//! and the acceptance runner.
#![allow(dead_code)]

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use stokes_treecode::kernel::{stokeslet, stresslet};
use stokes_treecode::taylor::{stokeslet_taylor_coeff, stresslet_taylor_coeff, CoulombCoeffs, MultiIndexTable};
use stokes_treecode::tree::ClusterMoments;
use stokes_treecode::{ParticleSet, Vec3};

pub struct TestRng(Xoshiro256StarStar);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256StarStar::seed_from_u64(seed))
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        lo + (hi - lo) * u
    }

    pub fn vec3(&mut self, lo: f64, hi: f64) -> Vec3 {
        [self.uniform(lo, hi), self.uniform(lo, hi), self.uniform(lo, hi)]
    }

    pub fn unit(&mut self) -> Vec3 {
        loop {
            let v = self.vec3(-1.0, 1.0);
            let n = norm(v);
            if n > 0.1 && n <= 1.0 {
                return v.map(|c| c / n);
            }
        }
    }

    /// Uniform in the ball of the given radius.
    pub fn in_ball(&mut self, radius: f64) -> Vec3 {
        loop {
            let v = self.vec3(-1.0, 1.0);
            if norm(v) <= 1.0 {
                return v.map(|c| c * radius);
            }
        }
    }
}

pub fn norm(v: Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn rel_diff_vec(a: Vec3, reference: Vec3) -> f64 {
    norm(sub(a, reference)) / norm(reference)
}

pub fn factorial(k: [usize; 3]) -> f64 {
    k.iter().map(|&n| (1..=n).map(|v| v as f64).product::<f64>()).product()
}

/// Fornberg's weights for derivatives `0..=max_deriv` at 0 on the grid
/// `points`. Returns `w[d][j]`.
pub fn fornberg(points: &[f64], max_deriv: usize) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut c = vec![vec![0.0; n]; max_deriv + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = points[0];
    for i in 1..n {
        let mn = i.min(max_deriv);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = points[i];
        for j in 0..i {
            let c3 = points[i] - points[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Mixed partial `D^k f(y0)` from a tensor product of central stencils
/// with `2 * half + 1` points and spacing `h`.
pub fn fd_derivative(f: impl Fn(Vec3) -> f64, y0: Vec3, k: [usize; 3], h: f64, half: usize) -> f64 {
    let grid: Vec<f64> = (0..=2 * half).map(|i| i as f64 - half as f64).collect();
    let w = fornberg(&grid, 4);
    let stencil = |d: usize| -> Vec<(f64, f64)> {
        if d == 0 {
            vec![(0.0, 1.0)]
        } else {
            grid.iter()
                .zip(&w[d])
                .filter(|(_, &c)| c != 0.0)
                .map(|(&g, &c)| (g * h, c / h.powi(d as i32)))
                .collect()
        }
    };
    let (s0, s1, s2) = (stencil(k[0]), stencil(k[1]), stencil(k[2]));
    let mut total = 0.0;
    for &(a, wa) in &s0 {
        for &(b, wb) in &s1 {
            for &(c, wc) in &s2 {
                total += wa * wb * wc * f([y0[0] + a, y0[1] + b, y0[2] + c]);
            }
        }
    }
    total
}

/// `D_y^k g(x, y) / k!` at `y = 0` for `x = dx` by finite differences.
/// Step and stencil width are chosen for the derivative order so that
/// truncation and rounding errors both stay near 1e-9 relative.
pub fn fd_taylor(g: impl Fn(Vec3) -> f64, dx: Vec3, k: [usize; 3]) -> f64 {
    let r = norm(dx);
    let grade: usize = k.iter().sum();
    let (rel_h, half) = match grade {
        0 => (0.0, 0),
        1 | 2 => (0.02, 5),
        3 | 4 => (0.04, 6),
        _ => (0.06, 7),
    };
    fd_derivative(g, [0.0; 3], k, rel_h * r, half) / factorial(k)
}

/// Difference relative to the natural scale `|dx|^-(|k|+1)` of a grade-`|k|`
/// coefficient of `1/|x - y|`, or to the value itself when larger.
pub fn coeff_rel_diff(value: f64, reference: f64, dx: Vec3, extra_grade: usize) -> f64 {
    let scale = norm(dx).powi(-((extra_grade + 1) as i32));
    (value - reference).abs() / reference.abs().max(scale)
}

/// Uncontracted Stokeslet far field `sum_k sum_j a^k_ij M_j^k`.
pub fn uncontracted_stokeslet(dx: Vec3, moments: &ClusterMoments, p: usize, table: &MultiIndexTable) -> Vec3 {
    let coeffs = CoulombCoeffs::compute(dx, p + 1, table).unwrap();
    let m = moments.stokes.as_ref().unwrap();
    let mut u = [0.0; 3];
    for (idx, &k) in table.entries().iter().enumerate().take(table.len_through(p)) {
        for i in 0..3 {
            for j in 0..3 {
                u[i] += stokeslet_taylor_coeff(k, i, j, &coeffs, table).unwrap() * m[idx][j];
            }
        }
    }
    u
}

/// Uncontracted stresslet far field `sum_k sum_jl a~^k_ijl M~_jl^k`.
pub fn uncontracted_stresslet(dx: Vec3, moments: &ClusterMoments, p: usize, table: &MultiIndexTable) -> Vec3 {
    let coeffs = CoulombCoeffs::compute(dx, p + 2, table).unwrap();
    let m = &moments.stress.as_ref().unwrap().full;
    let mut u = [0.0; 3];
    for (idx, &k) in table.entries().iter().enumerate().take(table.len_through(p)) {
        for i in 0..3 {
            for j in 0..3 {
                for l in 0..3 {
                    u[i] += stresslet_taylor_coeff(k, i, j, l, &coeffs, table).unwrap() * m[idx][3 * j + l];
                }
            }
        }
    }
    u
}

/// Velocity at `x` induced by all particles of `set`, summed straight from
/// the kernel tensors.
pub fn tensor_velocity(x: Vec3, set: &ParticleSet, stokes: bool, stress: bool) -> Vec3 {
    let mut u = [0.0; 3];
    for n in 0..set.len() {
        let y = set.positions[n];
        if stokes {
            let s = stokeslet(x, y).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    u[i] += s[i][j] * set.forces[n][j];
                }
            }
        }
        if stress {
            let t = stresslet(x, y).unwrap();
            let h = set.dipoles.as_ref().unwrap()[n];
            let nu = set.normals.as_ref().unwrap()[n];
            for i in 0..3 {
                for j in 0..3 {
                    for l in 0..3 {
                        u[i] += t[i][j][l] * h[j] * nu[l];
                    }
                }
            }
        }
    }
    u
}

/// A random cluster of `n` particles in the ball of radius `radius` about
/// `center`, carrying Stokeslet and stresslet weights.
pub fn random_cluster(rng: &mut TestRng, n: usize, center: Vec3, radius: f64) -> ParticleSet {
    let mut pos = Vec::with_capacity(n);
    let mut f = Vec::with_capacity(n);
    let mut h = Vec::with_capacity(n);
    let mut nu = Vec::with_capacity(n);
    for _ in 0..n {
        pos.push(add(center, rng.in_ball(radius)));
        f.push(rng.vec3(-1.0, 1.0));
        h.push(rng.vec3(-1.0, 1.0));
        nu.push(rng.unit());
    }
    ParticleSet::with_stresslets(pos, f, h, nu)
}

/// Largest particle distance from `center`.
pub fn radius_about(set: &ParticleSet, center: Vec3) -> f64 {
    set.positions.iter().map(|&y| norm(sub(y, center))).fold(0.0, f64::max)
}

/// Relative L2 error written out independently of the library.
pub fn l2_rel(reference: &[Vec3], approx: &[Vec3]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in reference.iter().zip(approx) {
        for c in 0..3 {
            num += (a[c] - b[c]).powi(2);
            den += a[c].powi(2);
        }
    }
    (num / den).sqrt()
}
