//! Octree of source clusters.

mod moments;

use std::ops::Range;

use crate::error::{Result, TreecodeError};
use crate::particles::{norm, sub, ParticleSet, Vec3};

pub use moments::{compute_moments, ClusterMoments, StressletMoments, TreeMoments, SYM_INDEX};

/// Recursion bound; a cluster this deep becomes a leaf regardless of size.
pub const MAX_DEPTH: usize = 64;

const ROOT_MARGIN: f64 = 1e-12;

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn midpoint(&self) -> Vec3 {
        std::array::from_fn(|a| 0.5 * (self.min[a] + self.max[a]))
    }

    pub fn contains(&self, p: Vec3) -> bool {
        (0..3).all(|a| self.min[a] <= p[a] && p[a] <= self.max[a])
    }

    /// Tight box around `points`.
    pub fn bounding(points: impl Iterator<Item = Vec3>) -> Self {
        let mut min = [f64::INFINITY; 3];
        let mut max = [f64::NEG_INFINITY; 3];
        for p in points {
            for a in 0..3 {
                min[a] = min[a].min(p[a]);
                max[a] = max[a].max(p[a]);
            }
        }
        Self { min, max }
    }

    /// Child box for octant `slot`; bit `a` of `slot` selects the upper half on axis `a`.
    pub fn octant(&self, slot: usize) -> Self {
        let mid = self.midpoint();
        let mut out = *self;
        for a in 0..3 {
            if slot >> a & 1 == 1 {
                out.min[a] = mid[a];
            } else {
                out.max[a] = mid[a];
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Cluster {
    /// Slots of the cluster's particles in tree order.
    pub range: Range<usize>,
    pub center: Vec3,
    /// Largest distance from `center` to a particle of the cluster.
    pub radius: f64,
    pub bbox: Aabb,
    /// Positions of the children in [`ClusterTree::clusters`], in octant
    /// order. Empty octants are not stored.
    pub children: Range<usize>,
    pub level: usize,
}

impl Cluster {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn len(&self) -> usize {
        self.range.len()
    }

    pub fn is_empty(&self) -> bool {
        self.range.is_empty()
    }
}

/// Octree over a particle set. Cluster 0 is the root. Particles are
/// reordered so that every cluster owns a contiguous slot range.
#[derive(Debug, Clone)]
pub struct ClusterTree {
    pub clusters: Vec<Cluster>,
    /// `order[slot]` is the original index of the particle at `slot`.
    pub order: Vec<usize>,
    /// `slot_of[index]` is the slot of original particle `index`.
    pub slot_of: Vec<usize>,
    pub leaf_capacity: usize,
    pub shrink: bool,
}

impl ClusterTree {
    pub fn root(&self) -> &Cluster {
        &self.clusters[0]
    }

    pub fn children(&self, c: &Cluster) -> &[Cluster] {
        &self.clusters[c.children.clone()]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Cluster> {
        self.clusters.iter().filter(|c| c.is_leaf())
    }

    pub fn depth(&self) -> usize {
        self.clusters.iter().map(|c| c.level).max().unwrap_or(0)
    }
}

/// Builds the octree.
///
/// The root box is the smallest cube around the particles, widened by a
/// relative margin of `1e-12`. A cluster with more than `leaf_capacity`
/// particles is bisected along all three axes at its box midpoint;
/// particles on a splitting plane go to the upper octant. With `shrink`
/// every cluster box is first tightened to its particles. The cluster center
/// is the box midpoint.
pub fn build_tree(particles: &ParticleSet, leaf_capacity: usize, shrink: bool) -> Result<ClusterTree> {
    if leaf_capacity == 0 {
        return Err(TreecodeError::InvalidParams("leaf capacity must be at least 1".into()));
    }
    let n = particles.len();
    if n == 0 {
        return Err(TreecodeError::Usage("cannot build a tree over zero particles".into()));
    }
    let pos = &particles.positions;
    let tight = Aabb::bounding(pos.iter().copied());
    let mid = tight.midpoint();
    let half = (0..3)
        .map(|a| 0.5 * (tight.max[a] - tight.min[a]))
        .fold(0.0, f64::max)
        * (1.0 + ROOT_MARGIN);
    let root_box = Aabb {
        min: mid.map(|c| c - half),
        max: mid.map(|c| c + half),
    };

    let mut builder = Builder {
        pos,
        order: (0..n).collect(),
        scratch: vec![0; n],
        clusters: Vec::new(),
        leaf_capacity,
        shrink,
    };
    builder.clusters.push(builder.make(0..n, root_box, 0));
    builder.split(0);

    let mut slot_of = vec![0; n];
    for (slot, &i) in builder.order.iter().enumerate() {
        slot_of[i] = slot;
    }
    Ok(ClusterTree {
        clusters: builder.clusters,
        order: builder.order,
        slot_of,
        leaf_capacity,
        shrink,
    })
}

struct Builder<'a> {
    pos: &'a [Vec3],
    order: Vec<usize>,
    scratch: Vec<usize>,
    clusters: Vec<Cluster>,
    leaf_capacity: usize,
    shrink: bool,
}

impl Builder<'_> {
    fn make(&self, range: Range<usize>, cell: Aabb, level: usize) -> Cluster {
        let members = &self.order[range.clone()];
        let bbox = if self.shrink {
            Aabb::bounding(members.iter().map(|&i| self.pos[i]))
        } else {
            cell
        };
        let center = bbox.midpoint();
        let radius = members
            .iter()
            .map(|&i| norm(sub(self.pos[i], center)))
            .fold(0.0, f64::max);
        Cluster {
            range,
            center,
            radius,
            bbox,
            children: 0..0,
            level,
        }
    }

    fn split(&mut self, idx: usize) {
        let (range, bbox, level) = {
            let c = &self.clusters[idx];
            (c.range.clone(), c.bbox, c.level)
        };
        if range.len() <= self.leaf_capacity || level >= MAX_DEPTH {
            return;
        }
        let mid = bbox.midpoint();
        let octant = |p: Vec3| -> usize {
            (0..3).map(|a| usize::from(p[a] >= mid[a]) << a).sum()
        };

        // Stable counting sort of the cluster's slots by octant.
        let mut counts = [0usize; 8];
        for &i in &self.order[range.clone()] {
            counts[octant(self.pos[i])] += 1;
        }
        let mut starts = [0usize; 8];
        let mut acc = range.start;
        for o in 0..8 {
            starts[o] = acc;
            acc += counts[o];
        }
        let mut cursor = starts;
        for s in range.clone() {
            let i = self.order[s];
            let o = octant(self.pos[i]);
            self.scratch[cursor[o]] = i;
            cursor[o] += 1;
        }
        self.order[range.clone()].copy_from_slice(&self.scratch[range.clone()]);

        let first = self.clusters.len();
        for o in 0..8 {
            if counts[o] > 0 {
                let child = self.make(starts[o]..starts[o] + counts[o], bbox.octant(o), level + 1);
                self.clusters.push(child);
            }
        }
        let last = self.clusters.len();
        self.clusters[idx].children = first..last;
        for child in first..last {
            self.split(child);
        }
    }
}

/// Multipole acceptance criterion `r / R <= theta` with `R = |x - y_c|`.
/// A target at the cluster center is never accepted.
#[inline]
pub fn mac(x: Vec3, cluster: &Cluster, theta: f64) -> bool {
    let d = sub(x, cluster.center);
    let r2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    r2 > 0.0 && cluster.radius <= theta * r2.sqrt()
}
