//! Explicit Stokeslet and stresslet Taylor coefficients.
//!
//! These form the coefficient tensors one entry at a time and are used to
//! check the contracted far-field sums; the treecode itself never calls
//! them.

use crate::error::{Result, TreecodeError};

use super::coulomb::CoulombCoeffs;
use super::multiindex::{MultiIndex, MultiIndexTable};

fn kd(a: usize, b: usize) -> i64 {
    i64::from(a == b)
}

fn check(k: MultiIndex, axes: &[usize], extra: usize, coeffs: &CoulombCoeffs) -> Result<[i64; 3]> {
    if axes.iter().any(|&a| a > 2) {
        return Err(TreecodeError::Usage(format!("axis out of range in {axes:?}")));
    }
    let grade: usize = k.iter().sum();
    if grade + extra > coeffs.pmax {
        return Err(TreecodeError::Usage(format!(
            "multi-index {k:?} needs coefficients through order {}, have {}",
            grade + extra,
            coeffs.pmax
        )));
    }
    Ok(k.map(|c| c as i64))
}

fn b_at(coeffs: &CoulombCoeffs, table: &MultiIndexTable, k: [i64; 3]) -> f64 {
    coeffs.get(k, table).expect("order checked by caller")
}

fn shifted(k: [i64; 3], plus: &[usize], minus: &[usize]) -> [i64; 3] {
    let mut t = k;
    for &a in plus {
        t[a] += 1;
    }
    for &a in minus {
        t[a] -= 1;
    }
    t
}

/// `a^k_ij = D_y^k S_ij / k!` from
/// `a^k_ij = d_ij b^k + dx_j (k_i + 1) b^(k+e_i) - (k_i + 1 - d_ij) b^(k+e_i-e_j)`.
pub fn stokeslet_taylor_coeff(
    k: MultiIndex,
    i: usize,
    j: usize,
    coeffs: &CoulombCoeffs,
    table: &MultiIndexTable,
) -> Result<f64> {
    let ks = check(k, &[i, j], 1, coeffs)?;
    let dx = coeffs.dx;
    let ki = ks[i] as f64;
    let delta = kd(i, j) as f64;
    Ok(delta * b_at(coeffs, table, ks)
        + dx[j] * (ki + 1.0) * b_at(coeffs, table, shifted(ks, &[i], &[]))
        - (ki + 1.0 - delta) * b_at(coeffs, table, shifted(ks, &[i], &[j])))
}

/// `ã^k_ijl = D_y^k T_ijl / k!` from
/// `3 ã^k_ijl = dx_l (k_i+1)(k_j+1+d_ij) b^(k+e_i+e_j)
///            - (k_i+1-d_il)(k_j+1+d_ij-d_jl) b^(k+e_i+e_j-e_l)
///            + d_ij (k_l+1) b^(k+e_l)`.
pub fn stresslet_taylor_coeff(
    k: MultiIndex,
    i: usize,
    j: usize,
    l: usize,
    coeffs: &CoulombCoeffs,
    table: &MultiIndexTable,
) -> Result<f64> {
    let ks = check(k, &[i, j, l], 2, coeffs)?;
    let dx = coeffs.dx;
    let (ki, kj, kl) = (ks[i], ks[j], ks[l]);
    let first = dx[l]
        * ((ki + 1) * (kj + 1 + kd(i, j))) as f64
        * b_at(coeffs, table, shifted(ks, &[i, j], &[]));
    let second = ((ki + 1 - kd(i, l)) * (kj + 1 + kd(i, j) - kd(j, l))) as f64
        * b_at(coeffs, table, shifted(ks, &[i, j], &[l]));
    let third = (kd(i, j) * (kl + 1)) as f64 * b_at(coeffs, table, shifted(ks, &[l], &[]));
    Ok((first - second + third) / 3.0)
}
