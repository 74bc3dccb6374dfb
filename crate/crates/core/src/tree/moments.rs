use crate::particles::{sub, KernelSelection, ParticleSet, Vec3};
use crate::taylor::MultiIndexTable;

use super::ClusterTree;

/// Position of `m_ij` in the 6 stored entries of a symmetric 3x3 matrix.
pub const SYM_INDEX: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];

/// Stresslet moments `M~_jl^k = sum_n (y^n - y_c)^k h_j^n nu_l^n` and the
/// target-independent combinations used by the contracted far field.
#[derive(Debug, Clone, PartialEq)]
pub struct StressletMoments {
    /// `M~_jl^k` row-major in `(j, l)`.
    pub full: Vec<[f64; 9]>,
    /// `m^k = sum_j M~_jj^k`
    pub trace: Vec<f64>,
    /// `m_ij^k = M~_ij^k + M~_ji^k`, indexed through [`SYM_INDEX`].
    pub sym: Vec<[f64; 6]>,
}

/// Moments of one cluster about its center, flattened in multi-index table
/// order for `|k| <= order`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterMoments {
    pub order: usize,
    /// `M_j^k = sum_n (y^n - y_c)^k f_j^n`
    pub stokes: Option<Vec<[f64; 3]>>,
    pub stress: Option<StressletMoments>,
}

impl ClusterMoments {
    /// Moments of the particles `members` (indices into `particles`) about
    /// `center`.
    pub fn from_particles(
        particles: &ParticleSet,
        members: &[usize],
        center: Vec3,
        order: usize,
        kernels: KernelSelection,
        table: &MultiIndexTable,
    ) -> Self {
        assert!(order <= table.pmax(), "table too small for order {order}");
        let len = table.len_through(order);
        let mut stokes = kernels.stokeslet.then(|| vec![[0.0; 3]; len]);
        let mut full = kernels.stresslet.then(|| vec![[0.0; 9]; len]);
        let dipoles = particles.dipoles.as_deref();
        let normals = particles.normals.as_deref();
        let mut mono = vec![0.0; len];
        for &n in members {
            table.monomials(sub(particles.positions[n], center), order, &mut mono);
            if let Some(st) = stokes.as_mut() {
                let f = particles.forces[n];
                for (acc, &w) in st.iter_mut().zip(&mono) {
                    acc[0] += w * f[0];
                    acc[1] += w * f[1];
                    acc[2] += w * f[2];
                }
            }
            if let Some(fu) = full.as_mut() {
                let h = dipoles.expect("stresslet moments need dipole weights")[n];
                let nu = normals.expect("stresslet moments need normals")[n];
                let hnu: [f64; 9] = std::array::from_fn(|c| h[c / 3] * nu[c % 3]);
                for (acc, &w) in fu.iter_mut().zip(&mono) {
                    for c in 0..9 {
                        acc[c] += w * hnu[c];
                    }
                }
            }
        }
        let stress = full.map(|full| {
            let trace = full.iter().map(|m| m[0] + m[4] + m[8]).collect();
            let sym = full
                .iter()
                .map(|m| {
                    let mut s = [0.0; 6];
                    for i in 0..3 {
                        for j in i..3 {
                            s[SYM_INDEX[i][j]] = m[3 * i + j] + m[3 * j + i];
                        }
                    }
                    s
                })
                .collect();
            StressletMoments { full, trace, sym }
        });
        Self {
            order,
            stokes,
            stress,
        }
    }
}

/// Moments of every cluster of a tree, indexed like
/// [`ClusterTree::clusters`].
#[derive(Debug, Clone)]
pub struct TreeMoments {
    pub order: usize,
    pub clusters: Vec<ClusterMoments>,
}

/// Computes each cluster's moments directly from its own particles, with
/// the clusters split over `workers` segments.
pub fn compute_moments(
    tree: &ClusterTree,
    particles: &ParticleSet,
    order: usize,
    kernels: KernelSelection,
    table: &MultiIndexTable,
    workers: usize,
) -> TreeMoments {
    let mut slots: Vec<Option<ClusterMoments>> = (0..tree.clusters.len()).map(|_| None).collect();
    crate::engine::for_each_segment(&mut slots, workers.max(1), |offset, chunk| {
        for (k, slot) in chunk.iter_mut().enumerate() {
            let c = &tree.clusters[offset + k];
            *slot = Some(ClusterMoments::from_particles(
                particles,
                &tree.order[c.range.clone()],
                c.center,
                order,
                kernels,
                table,
            ));
        }
    });
    let clusters = slots.into_iter().map(|m| m.expect("every segment is filled")).collect();
    TreeMoments { order, clusters }
}
