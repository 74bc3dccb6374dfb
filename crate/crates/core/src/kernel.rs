//! Pointwise Stokeslet/stresslet kernels and `O(N^2)` direct summation.
//!
//! The kernels are used without the physical prefactor:
//!
//! ```text
//! S_ij(x, y)  = d_ij / |x - y| + (x_i - y_i)(x_j - y_j) / |x - y|^3
//! T_ijl(x, y) = (x_i - y_i)(x_j - y_j)(x_l - y_l) / |x - y|^5
//! ```
//!
//! [`naive_direct_velocity`] forms both tensors explicitly and exists as a
//! reference. [`contracted_direct_velocity`] contracts the weights first,
//!
//! ```text
//! u_i += f_i / |d| + d_i s,   s = (d . f) / |d|^3
//! u_i += d_i t,               t = (d . h)(d . nu) / |d|^5
//! ```
//!
//! and is the routine the treecode uses at its leaves.

use std::ops::Range;

use crate::error::{Result, TreecodeError};
use crate::particles::{sub, KernelSelection, ParticleSet, SourceArrays, Vec3};

pub type Tensor2 = [[f64; 3]; 3];
pub type Tensor3 = [[[f64; 3]; 3]; 3];

fn separation(x: Vec3, y: Vec3) -> Result<(Vec3, f64)> {
    let d = sub(x, y);
    let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    if r2 == 0.0 {
        return Err(TreecodeError::CoincidentPoints(x));
    }
    Ok((d, r2.sqrt()))
}

/// The Stokeslet tensor `S_ij(x, y)`.
pub fn stokeslet(x: Vec3, y: Vec3) -> Result<Tensor2> {
    let (d, r) = separation(x, y)?;
    let inv_r = 1.0 / r;
    let inv_r3 = inv_r * inv_r * inv_r;
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let diag = if i == j { inv_r } else { 0.0 };
            diag + d[i] * d[j] * inv_r3
        })
    }))
}

/// The stresslet tensor `T_ijl(x, y)`.
pub fn stresslet(x: Vec3, y: Vec3) -> Result<Tensor3> {
    let (d, r) = separation(x, y)?;
    let inv_r5 = 1.0 / (r * r * r * r * r);
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|j| std::array::from_fn(|l| d[i] * d[j] * d[l] * inv_r5))
    }))
}

/// Direct summation with explicitly formed kernel tensors.
///
/// Self-interactions are excluded by index.
pub fn naive_direct_velocity(particles: &ParticleSet, kernels: KernelSelection) -> Result<Vec<Vec3>> {
    particles.validate(kernels)?;
    let n = particles.len();
    let mut out = vec![[0.0; 3]; n];
    for (m, u) in out.iter_mut().enumerate() {
        let x = particles.positions[m];
        for src in 0..n {
            if src == m {
                continue;
            }
            let y = particles.positions[src];
            if kernels.stokeslet {
                let s = stokeslet(x, y)?;
                let f = particles.forces[src];
                for i in 0..3 {
                    for j in 0..3 {
                        u[i] += s[i][j] * f[j];
                    }
                }
            }
            if kernels.stresslet {
                let t = stresslet(x, y)?;
                let h = particles.dipoles.as_ref().unwrap()[src];
                let nu = particles.normals.as_ref().unwrap()[src];
                for i in 0..3 {
                    for j in 0..3 {
                        for l in 0..3 {
                            u[i] += t[i][j][l] * h[j] * nu[l];
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Contracted direct summation at the targets `targets` (indices into
/// `particles`), with every particle acting as a source.
pub fn contracted_direct_velocity(
    particles: &ParticleSet,
    kernels: KernelSelection,
    targets: Range<usize>,
) -> Result<Vec<Vec3>> {
    particles.validate(kernels)?;
    if targets.start > targets.end || targets.end > particles.len() {
        return Err(TreecodeError::Usage(format!(
            "target range {targets:?} is outside 0..{}",
            particles.len()
        )));
    }
    let order: Vec<usize> = (0..particles.len()).collect();
    let sources = SourceArrays::gather(particles, kernels, &order);
    let all = 0..sources.len();
    Ok(targets
        .map(|m| direct_sum(&sources, all.clone(), m, kernels))
        .collect())
}

/// Contracted direct summation at every particle.
pub fn direct_velocity(particles: &ParticleSet, kernels: KernelSelection) -> Result<Vec<Vec3>> {
    contracted_direct_velocity(particles, kernels, 0..particles.len())
}

/// Direct summation with the targets split into `workers` contiguous
/// segments. The result is bit-identical to [`direct_velocity`].
pub fn parallel_direct_velocity(
    particles: &ParticleSet,
    kernels: KernelSelection,
    workers: usize,
) -> Result<Vec<Vec3>> {
    if workers == 0 {
        return Err(TreecodeError::InvalidParams("workers must be at least 1".into()));
    }
    particles.validate(kernels)?;
    let order: Vec<usize> = (0..particles.len()).collect();
    let sources = SourceArrays::gather(particles, kernels, &order);
    let n = sources.len();
    let mut out = vec![[0.0; 3]; n];
    crate::engine::for_each_segment(&mut out, workers, |offset, chunk| {
        for (k, u) in chunk.iter_mut().enumerate() {
            *u = direct_sum(&sources, 0..n, offset + k, kernels);
        }
    });
    Ok(out)
}

/// Velocity at the source slot `target` induced by the sources in `range`,
/// skipping `target` itself if it lies in the range. Sources are visited in
/// ascending slot order.
#[inline]
pub(crate) fn direct_sum(
    src: &SourceArrays,
    range: Range<usize>,
    target: usize,
    kernels: KernelSelection,
) -> Vec3 {
    let x = src.position(target);
    let mut acc = [0.0; 3];
    if range.contains(&target) {
        accumulate(src, range.start..target, x, kernels, &mut acc);
        accumulate(src, target + 1..range.end, x, kernels, &mut acc);
    } else {
        accumulate(src, range, x, kernels, &mut acc);
    }
    acc
}

/// Velocity at an arbitrary point `x`, which must not coincide with any
/// source in `range`.
#[inline]
pub(crate) fn accumulate(
    src: &SourceArrays,
    range: Range<usize>,
    x: Vec3,
    kernels: KernelSelection,
    acc: &mut Vec3,
) {
    match (kernels.stokeslet, kernels.stresslet) {
        (true, false) => block::<true, false>(src, range, x, acc),
        (false, true) => block::<false, true>(src, range, x, acc),
        (true, true) => block::<true, true>(src, range, x, acc),
        (false, false) => {}
    }
}

#[inline]
fn block<const STOKES: bool, const STRESS: bool>(
    src: &SourceArrays,
    range: Range<usize>,
    x: Vec3,
    acc: &mut Vec3,
) {
    let (lo, hi) = (range.start, range.end);
    if lo >= hi {
        return;
    }
    let [xs, ys, zs] = &src.x;
    let (xs, ys, zs) = (&xs[lo..hi], &ys[lo..hi], &zs[lo..hi]);
    let [mut u0, mut u1, mut u2] = *acc;
    for n in 0..xs.len() {
        let d0 = x[0] - xs[n];
        let d1 = x[1] - ys[n];
        let d2 = x[2] - zs[n];
        let r2 = d0 * d0 + d1 * d1 + d2 * d2;
        let inv_r = 1.0 / r2.sqrt();
        let inv_r3 = inv_r * inv_r * inv_r;
        if STOKES {
            let (f0, f1, f2) = (src.f[0][lo + n], src.f[1][lo + n], src.f[2][lo + n]);
            let s = (d0 * f0 + d1 * f1 + d2 * f2) * inv_r3;
            u0 += f0 * inv_r + d0 * s;
            u1 += f1 * inv_r + d1 * s;
            u2 += f2 * inv_r + d2 * s;
        }
        if STRESS {
            let i = lo + n;
            let dh = d0 * src.h[0][i] + d1 * src.h[1][i] + d2 * src.h[2][i];
            let dn = d0 * src.nu[0][i] + d1 * src.nu[1][i] + d2 * src.nu[2][i];
            let t = dh * dn * inv_r3 * inv_r * inv_r;
            u0 += d0 * t;
            u1 += d1 * t;
            u2 += d2 * t;
        }
    }
    *acc = [u0, u1, u2];
}
