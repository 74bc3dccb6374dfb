//! Cartesian Taylor machinery for the far-field approximation.
//!
//! Everything is expressed through the Taylor coefficients of the Coulomb
//! potential, `b^k = D_y^k (1/|x - y|) / k!`, which obey a three-term
//! recurrence in the multi-index `k`. The Stokeslet and stresslet
//! coefficients follow from `b^k` by closed-form identities, and the
//! contracted far-field sums in [`farfield`] use those identities without
//! ever forming the coefficient tensors.

mod coeffs;
mod coulomb;
pub mod farfield;
mod multiindex;

pub use coeffs::{stokeslet_taylor_coeff, stresslet_taylor_coeff};
pub use coulomb::CoulombCoeffs;
pub use farfield::{stokeslet_farfield, stresslet_farfield, FarFieldWorkspace};
pub use multiindex::{MultiIndex, MultiIndexTable, Shift};
