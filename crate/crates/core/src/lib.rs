//! Fast summation of 3D Stokeslet and stresslet velocities.
//!
//! Source particles are grouped into an octree of clusters. A target
//! interacts with a well-separated cluster through a Cartesian Taylor
//! approximation built from the Taylor coefficients of `1/|x - y|`, and with
//! nearby leaf clusters through direct summation. For a fixed accuracy the
//! cost grows like `O(N log N)` instead of the `O(N^2)` of direct summation.
//!
//! The main entry points are [`engine::treecode_velocity`] and
//! [`engine::parallel_velocity`]; [`kernel::contracted_direct_velocity`] is
//! the exact reference. [`testcases`] generates the sphere and cube
//! benchmark geometries and [`harness`] drives timed benchmark runs.
//!
//! ```
//! use stokes_treecode::{engine, kernel, testcases, KernelSelection, TreecodeParams};
//!
//! let particles = testcases::cube_particles(&testcases::CubeCaseConfig::new(3000, 7));
//! let params = TreecodeParams {
//!     leaf_capacity: 200,
//!     kernels: KernelSelection::STOKESLET,
//!     ..TreecodeParams::default()
//! };
//! let tree = engine::treecode_velocity(&particles, &params).unwrap();
//! let direct = kernel::direct_velocity(&particles, KernelSelection::STOKESLET).unwrap();
//! let err = stokes_treecode::harness::relative_error(&direct, &tree.velocities).unwrap();
//! assert!(err < 1e-2);
//! ```

pub mod engine;
pub mod error;
pub mod harness;
pub mod kernel;
pub mod particles;
pub mod taylor;
pub mod testcases;
pub mod tree;

pub use engine::{TreecodeParams, VelocityResult, VelocityStats};
pub use error::{Result, TreecodeError};
pub use particles::{KernelSelection, ParticleSet, Vec3};
