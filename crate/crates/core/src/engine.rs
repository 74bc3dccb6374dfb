//! Treecode traversal and the replicated-data parallel driver.
//!
//! Every target walks the tree from the root. A cluster that passes the
//! acceptance test `r / R <= theta` contributes through its far-field
//! approximation; otherwise a leaf is summed directly and an internal
//! cluster hands the target to its children in octant order.
//!
//! In parallel runs the targets are split into contiguous segments, one per
//! worker, while the particles, tree and moments are shared read-only.
//! Per-target arithmetic does not depend on the split, so the velocities
//! are bit-identical for every worker count.

use std::time::{Duration, Instant};

use crate::error::{Result, TreecodeError};
use crate::kernel;
use crate::particles::{sub, KernelSelection, ParticleSet, SourceArrays, Vec3};
use crate::taylor::{FarFieldWorkspace, MultiIndexTable};
use crate::tree::{build_tree, compute_moments, mac, ClusterTree, TreeMoments};

/// Highest supported approximation order.
pub const MAX_ORDER: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreecodeParams {
    /// Taylor approximation order `p`.
    pub order: usize,
    /// Acceptance parameter, strictly inside `(0, 1)`.
    pub theta: f64,
    /// Largest particle count of a leaf cluster.
    pub leaf_capacity: usize,
    /// Tighten cluster boxes to their particles.
    pub shrink: bool,
    pub kernels: KernelSelection,
    pub workers: usize,
}

impl Default for TreecodeParams {
    fn default() -> Self {
        Self {
            order: 6,
            theta: 0.5,
            leaf_capacity: 2000,
            shrink: false,
            kernels: KernelSelection::BOTH,
            workers: 1,
        }
    }
}

impl TreecodeParams {
    pub fn validate(&self) -> Result<()> {
        // theta >= 1 could accept a cluster that contains its own target.
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(TreecodeError::InvalidParams(format!(
                "theta must lie strictly between 0 and 1, got {}",
                self.theta
            )));
        }
        if self.order > MAX_ORDER {
            return Err(TreecodeError::InvalidParams(format!(
                "order {} exceeds the maximum of {MAX_ORDER}",
                self.order
            )));
        }
        if self.leaf_capacity == 0 {
            return Err(TreecodeError::InvalidParams("leaf capacity must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(TreecodeError::InvalidParams("workers must be at least 1".into()));
        }
        self.kernels.validate()
    }

    /// Order of the Coulomb coefficients needed by the far field.
    pub fn coefficient_order(&self) -> usize {
        self.order + if self.kernels.stresslet { 2 } else { 1 }
    }
}

/// Interaction counts and timings of one treecode evaluation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VelocityStats {
    /// Accepted particle-cluster pairs evaluated by the far field.
    pub farfield_evals: u64,
    /// Particle-leaf pairs evaluated by direct summation.
    pub direct_evals: u64,
    /// Source particles visited by those direct sums.
    pub direct_pairs: u64,
    /// Clusters visited by all traversals.
    pub visited_clusters: u64,
    pub build_time: Duration,
    pub moments_time: Duration,
    pub traversal_time: Duration,
}

impl VelocityStats {
    /// Tree build, moments and traversal.
    pub fn total_time(&self) -> Duration {
        self.build_time + self.moments_time + self.traversal_time
    }

    fn merge_counts(&mut self, other: &Counters) {
        self.farfield_evals += other.farfield;
        self.direct_evals += other.direct;
        self.direct_pairs += other.pairs;
        self.visited_clusters += other.visited;
    }
}

#[derive(Debug, Clone)]
pub struct VelocityResult {
    /// Velocities in the original particle order.
    pub velocities: Vec<Vec3>,
    pub stats: VelocityStats,
}

#[derive(Debug, Default, Clone, Copy)]
struct Counters {
    farfield: u64,
    direct: u64,
    pairs: u64,
    visited: u64,
}

/// A built tree with its moments, ready to evaluate velocities.
#[derive(Debug)]
pub struct Treecode {
    params: TreecodeParams,
    tree: ClusterTree,
    moments: TreeMoments,
    table: MultiIndexTable,
    sources: SourceArrays,
    build_time: Duration,
    moments_time: Duration,
}

impl Treecode {
    /// Validates the inputs, builds the tree and computes the moments.
    pub fn new(particles: &ParticleSet, params: &TreecodeParams) -> Result<Self> {
        params.validate()?;
        particles.validate(params.kernels)?;

        let start = Instant::now();
        let tree = build_tree(particles, params.leaf_capacity, params.shrink)?;
        let sources = SourceArrays::gather(particles, params.kernels, &tree.order);
        let build_time = start.elapsed();

        let start = Instant::now();
        let table = MultiIndexTable::new(params.coefficient_order());
        let moments = compute_moments(&tree, particles, params.order, params.kernels, &table, params.workers);
        let moments_time = start.elapsed();

        Ok(Self {
            params: *params,
            tree,
            moments,
            table,
            sources,
            build_time,
            moments_time,
        })
    }

    pub fn tree(&self) -> &ClusterTree {
        &self.tree
    }

    pub fn moments(&self) -> &TreeMoments {
        &self.moments
    }

    pub fn params(&self) -> &TreecodeParams {
        &self.params
    }

    /// Velocity at the particle stored at tree slot `slot`.
    pub fn velocity_at_slot(&self, slot: usize, ws: &mut FarFieldWorkspace) -> Vec3 {
        let mut acc = [0.0; 3];
        let mut counters = Counters::default();
        self.compute_velocity(0, slot, self.sources.position(slot), ws, &mut acc, &mut counters);
        acc
    }

    /// Recursive particle-cluster interaction of the target at `slot` with
    /// cluster `c`, accumulated into `acc`.
    fn compute_velocity(
        &self,
        c: usize,
        slot: usize,
        x: Vec3,
        ws: &mut FarFieldWorkspace,
        acc: &mut Vec3,
        counters: &mut Counters,
    ) {
        counters.visited += 1;
        let cluster = &self.tree.clusters[c];
        if mac(x, cluster, self.params.theta) {
            debug_assert!(
                !cluster.range.contains(&slot),
                "accepted a cluster containing its own target"
            );
            counters.farfield += 1;
            let dx = sub(x, cluster.center);
            let moments = &self.moments.clusters[c];
            let kernels = self.params.kernels;
            ws.load(&self.table, dx, self.params.coefficient_order());
            if kernels.stokeslet {
                let u = ws.stokeslet(&self.table, dx, moments);
                add(acc, u);
            }
            if kernels.stresslet {
                let u = ws.stresslet(&self.table, dx, moments);
                add(acc, u);
            }
        } else if cluster.is_leaf() {
            counters.direct += 1;
            let range = cluster.range.clone();
            let kernels = self.params.kernels;
            if range.contains(&slot) {
                counters.pairs += range.len() as u64 - 1;
                kernel::accumulate(&self.sources, range.start..slot, x, kernels, acc);
                kernel::accumulate(&self.sources, slot + 1..range.end, x, kernels, acc);
            } else {
                counters.pairs += range.len() as u64;
                kernel::accumulate(&self.sources, range, x, kernels, acc);
            }
        } else {
            for child in cluster.children.clone() {
                self.compute_velocity(child, slot, x, ws, acc, counters);
            }
        }
    }

    /// Evaluates every target with the targets split over `workers`
    /// segments of the tree-ordered slot range.
    pub fn evaluate(&self, workers: usize) -> VelocityResult {
        let n = self.sources.len();
        let start = Instant::now();
        let mut by_slot = vec![[0.0; 3]; n];
        let partials = map_segments(&mut by_slot, workers.max(1), |offset, chunk| {
            let mut ws = FarFieldWorkspace::new(&self.table);
            let mut counters = Counters::default();
            for (k, u) in chunk.iter_mut().enumerate() {
                let slot = offset + k;
                let x = self.sources.position(slot);
                self.compute_velocity(0, slot, x, &mut ws, u, &mut counters);
            }
            counters
        });
        let traversal_time = start.elapsed();

        let mut velocities = vec![[0.0; 3]; n];
        for (slot, u) in by_slot.into_iter().enumerate() {
            velocities[self.tree.order[slot]] = u;
        }
        let mut stats = VelocityStats {
            build_time: self.build_time,
            moments_time: self.moments_time,
            traversal_time,
            ..VelocityStats::default()
        };
        for c in &partials {
            stats.merge_counts(c);
        }
        VelocityResult { velocities, stats }
    }
}

#[inline]
fn add(acc: &mut Vec3, u: Vec3) {
    acc[0] += u[0];
    acc[1] += u[1];
    acc[2] += u[2];
}

/// Serial treecode evaluation at every particle.
pub fn treecode_velocity(particles: &ParticleSet, params: &TreecodeParams) -> Result<VelocityResult> {
    Ok(Treecode::new(particles, params)?.evaluate(1))
}

/// Treecode evaluation with the targets split across `params.workers`
/// workers. Bit-identical to [`treecode_velocity`].
pub fn parallel_velocity(particles: &ParticleSet, params: &TreecodeParams) -> Result<VelocityResult> {
    Ok(Treecode::new(particles, params)?.evaluate(params.workers))
}

/// Splits `out` into `workers` contiguous segments and runs `f(offset,
/// segment)` on each, concurrently when the `parallel` feature is enabled.
/// Results are returned in segment order.
pub(crate) fn map_segments<T, R, F>(out: &mut [T], workers: usize, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(usize, &mut [T]) -> R + Sync,
{
    let n = out.len();
    let mut segments = Vec::with_capacity(workers);
    let mut rest = out;
    let mut offset = 0;
    for w in 0..workers {
        let end = (w + 1) * n / workers;
        let (head, tail) = rest.split_at_mut(end - offset);
        segments.push((offset, head));
        rest = tail;
        offset = end;
    }
    run_segments(segments, workers, &f)
}

#[cfg(feature = "parallel")]
fn run_segments<T, R, F>(segments: Vec<(usize, &mut [T])>, workers: usize, f: &F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(usize, &mut [T]) -> R + Sync,
{
    use rayon::prelude::*;
    if workers == 1 {
        return segments.into_iter().map(|(o, s)| f(o, s)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("failed to start worker threads");
    pool.install(|| segments.into_par_iter().map(|(o, s)| f(o, s)).collect())
}

#[cfg(not(feature = "parallel"))]
fn run_segments<T, R, F>(segments: Vec<(usize, &mut [T])>, _workers: usize, f: &F) -> Vec<R>
where
    F: Fn(usize, &mut [T]) -> R,
{
    segments.into_iter().map(|(o, s)| f(o, s)).collect()
}

pub(crate) fn for_each_segment<T, F>(out: &mut [T], workers: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    map_segments(out, workers, f);
}
