//! Particle storage and kernel selection.

use crate::error::{Result, TreecodeError};

/// A point, velocity or weight in three dimensions.
pub type Vec3 = [f64; 3];

const NORMAL_TOLERANCE: f64 = 1e-12;

/// Which singularities contribute to the velocity sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KernelSelection {
    pub stokeslet: bool,
    pub stresslet: bool,
}

impl KernelSelection {
    pub const STOKESLET: Self = Self {
        stokeslet: true,
        stresslet: false,
    };
    pub const STRESSLET: Self = Self {
        stokeslet: false,
        stresslet: true,
    };
    pub const BOTH: Self = Self {
        stokeslet: true,
        stresslet: true,
    };

    pub fn validate(self) -> Result<()> {
        if !self.stokeslet && !self.stresslet {
            return Err(TreecodeError::InvalidParams(
                "at least one of the Stokeslet and stresslet kernels must be enabled".into(),
            ));
        }
        Ok(())
    }
}

/// Source/target particles with their Stokeslet and stresslet weights.
///
/// Each field is a separate array indexed by particle. The dipole weights and
/// normals are only required when the stresslet kernel is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    pub positions: Vec<Vec3>,
    pub forces: Vec<Vec3>,
    pub dipoles: Option<Vec<Vec3>>,
    pub normals: Option<Vec<Vec3>>,
}

impl ParticleSet {
    /// Stokeslet-only particles.
    pub fn new(positions: Vec<Vec3>, forces: Vec<Vec3>) -> Self {
        Self {
            positions,
            forces,
            dipoles: None,
            normals: None,
        }
    }

    pub fn with_stresslets(
        positions: Vec<Vec3>,
        forces: Vec<Vec3>,
        dipoles: Vec<Vec3>,
        normals: Vec<Vec3>,
    ) -> Self {
        Self {
            positions,
            forces,
            dipoles: Some(dipoles),
            normals: Some(normals),
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn has_stresslets(&self) -> bool {
        self.dipoles.is_some() && self.normals.is_some()
    }

    /// Checks the invariants the summation routines rely on: non-empty,
    /// consistent lengths, finite values, pairwise distinct positions and,
    /// when stresslets are selected, present dipoles with unit normals.
    pub fn validate(&self, kernels: KernelSelection) -> Result<()> {
        kernels.validate()?;
        let n = self.len();
        if n == 0 {
            return Err(TreecodeError::InvalidParticles("particle set is empty".into()));
        }
        check_block("forces", &self.forces, n)?;
        check_block("positions", &self.positions, n)?;
        if kernels.stresslet {
            let (Some(dipoles), Some(normals)) = (&self.dipoles, &self.normals) else {
                return Err(TreecodeError::InvalidParticles(
                    "stresslet kernel selected but dipole weights or normals are missing".into(),
                ));
            };
            check_block("dipoles", dipoles, n)?;
            check_block("normals", normals, n)?;
            for (i, nu) in normals.iter().enumerate() {
                let len = norm(*nu);
                if (len - 1.0).abs() > NORMAL_TOLERANCE {
                    return Err(TreecodeError::InvalidParticles(format!(
                        "normal {i} has length {len}, expected 1"
                    )));
                }
            }
        }
        check_distinct(&self.positions)
    }
}

fn check_block(name: &str, block: &[Vec3], n: usize) -> Result<()> {
    if block.len() != n {
        return Err(TreecodeError::InvalidParticles(format!(
            "{name} has {} entries, expected {n}",
            block.len()
        )));
    }
    if let Some(i) = block.iter().position(|v| v.iter().any(|c| !c.is_finite())) {
        return Err(TreecodeError::InvalidParticles(format!(
            "{name}[{i}] is not finite"
        )));
    }
    Ok(())
}

fn check_distinct(positions: &[Vec3]) -> Result<()> {
    let mut order: Vec<usize> = (0..positions.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        let (pa, pb) = (positions[a], positions[b]);
        pa[0]
            .total_cmp(&pb[0])
            .then(pa[1].total_cmp(&pb[1]))
            .then(pa[2].total_cmp(&pb[2]))
    });
    for w in order.windows(2) {
        if positions[w[0]] == positions[w[1]] {
            return Err(TreecodeError::DuplicateParticles {
                first: w[0].min(w[1]),
                second: w[0].max(w[1]),
                position: positions[w[0]],
            });
        }
    }
    Ok(())
}

#[inline]
pub(crate) fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub(crate) fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Component-wise copy of a particle set used by the summation loops.
///
/// Optionally reordered by a permutation (`order[i]` is the original index
/// of the particle stored at slot `i`). The stresslet arrays are empty when
/// the stresslet kernel is not selected.
#[derive(Debug, Clone, Default)]
pub(crate) struct SourceArrays {
    pub x: [Vec<f64>; 3],
    pub f: [Vec<f64>; 3],
    pub h: [Vec<f64>; 3],
    pub nu: [Vec<f64>; 3],
}

impl SourceArrays {
    pub fn gather(particles: &ParticleSet, kernels: KernelSelection, order: &[usize]) -> Self {
        let pick = |block: &[Vec3]| -> [Vec<f64>; 3] {
            std::array::from_fn(|c| order.iter().map(|&i| block[i][c]).collect())
        };
        let mut out = Self {
            x: pick(&particles.positions),
            ..Self::default()
        };
        if kernels.stokeslet {
            out.f = pick(&particles.forces);
        }
        if kernels.stresslet {
            // Presence is checked by ParticleSet::validate.
            out.h = pick(particles.dipoles.as_deref().unwrap_or_default());
            out.nu = pick(particles.normals.as_deref().unwrap_or_default());
        }
        out
    }

    pub fn len(&self) -> usize {
        self.x[0].len()
    }

    #[inline]
    pub fn position(&self, i: usize) -> Vec3 {
        [self.x[0][i], self.x[1][i], self.x[2][i]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two() -> ParticleSet {
        ParticleSet::new(vec![[0.0; 3], [1.0, 0.0, 0.0]], vec![[1.0, 0.0, 0.0]; 2])
    }

    #[test]
    fn accepts_valid_set() {
        two().validate(KernelSelection::STOKESLET).unwrap();
    }

    #[test]
    fn rejects_empty_and_no_kernel() {
        let empty = ParticleSet::new(vec![], vec![]);
        assert!(empty.validate(KernelSelection::STOKESLET).is_err());
        let none = KernelSelection {
            stokeslet: false,
            stresslet: false,
        };
        assert!(two().validate(none).is_err());
    }

    #[test]
    fn rejects_duplicates() {
        let p = ParticleSet::new(
            vec![[0.0; 3], [1.0, 2.0, 3.0], [0.0; 3]],
            vec![[1.0, 0.0, 0.0]; 3],
        );
        match p.validate(KernelSelection::STOKESLET) {
            Err(TreecodeError::DuplicateParticles { first, second, .. }) => {
                assert_eq!((first, second), (0, 2));
            }
            other => panic!("expected duplicate error, got {other:?}"),
        }
    }

    #[test]
    fn stresslet_needs_unit_normals() {
        let mut p = two();
        assert!(p.validate(KernelSelection::BOTH).is_err());
        p.dipoles = Some(vec![[1.0, 0.0, 0.0]; 2]);
        p.normals = Some(vec![[1.0, 0.0, 0.0], [0.0, 2.0, 0.0]]);
        assert!(p.validate(KernelSelection::BOTH).is_err());
        p.normals = Some(vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        p.validate(KernelSelection::BOTH).unwrap();
        // Stokeslet-only runs never look at the stresslet arrays.
        p.normals = Some(vec![[9.0; 3]; 2]);
        p.validate(KernelSelection::STOKESLET).unwrap();
    }

    #[test]
    fn rejects_non_finite_and_length_mismatch() {
        let mut p = two();
        p.forces[1][2] = f64::NAN;
        assert!(p.validate(KernelSelection::STOKESLET).is_err());
        let q = ParticleSet::new(vec![[0.0; 3]], vec![]);
        assert!(q.validate(KernelSelection::STOKESLET).is_err());
    }
}
