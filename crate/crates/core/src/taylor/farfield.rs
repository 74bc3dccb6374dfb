//! Contracted particle-cluster approximations.
//!
//! For a target at offset `dx = x - y_c` from a cluster center, with cluster
//! moments `M_j^k` (Stokeslet) and `M~_jl^k` (stresslet):
//!
//! ```text
//! u_i^sto = sum_k [ 2 b^k M_i^k + (k_i+1) ( b^(k+e_i) sigma^k - sum_j b^(k+e_i-e_j) M_j^k ) ]
//!           sigma^k = sum_j dx_j M_j^k
//!
//! u_i^str = 1/3 sum_k [ (k_i+1) sum_j (k_j+1+d_ij) b^(k+e_i+e_j) tau_j
//!                     - (k_i+1) sum_jl (k_j+1+d_ij) b^(k+e_i+e_j-e_l) M~_jl^k
//!                     + (k_i+1) b^(k+e_i) m^k + sum_j (k_j+1) b^(k+e_j) m_ij^k ]
//!           tau_j = sum_l dx_l M~_jl^k,  m^k = sum_j M~_jj^k,  m_ij^k = M~_ij^k + M~_ji^k
//! ```
//!
//! with `|k| <= p`. The Stokeslet sum reads `b` through order `p + 1` and the
//! stresslet sum through `p + 2`.

use crate::error::{Result, TreecodeError};
use crate::particles::Vec3;
use crate::tree::{ClusterMoments, SYM_INDEX};

use super::coulomb;
use super::multiindex::MultiIndexTable;

/// Per-worker scratch space holding the Coulomb coefficients of the current
/// particle-cluster pair.
#[derive(Debug, Clone)]
pub struct FarFieldWorkspace {
    b: Vec<f64>,
}

impl FarFieldWorkspace {
    pub fn new(table: &MultiIndexTable) -> Self {
        Self {
            b: vec![0.0; table.len() + 1],
        }
    }

    /// Computes `b^k` for `|k| <= pmax` at offset `dx`. The offset must be
    /// nonzero and `pmax` within the table.
    #[inline]
    pub fn load(&mut self, table: &MultiIndexTable, dx: Vec3, pmax: usize) {
        coulomb::fill(table, dx, pmax, &mut self.b);
    }

    /// Coefficients from the last [`load`](Self::load); the final slot is
    /// the zero read by sentinel lookups.
    pub fn coefficients(&self) -> &[f64] {
        &self.b
    }

    #[inline]
    fn checked_coefficients(&self, table: &MultiIndexTable) -> &[f64] {
        assert_eq!(self.b.len(), table.len() + 1, "workspace was built for a different table");
        &self.b
    }

    /// Stokeslet far field from the coefficients loaded at `dx`, which must
    /// extend through order `moments.order + 1`.
    #[inline]
    pub fn stokeslet(&self, table: &MultiIndexTable, dx: Vec3, moments: &ClusterMoments) -> Vec3 {
        let Some(mom) = moments.stokes.as_deref() else {
            return [0.0; 3];
        };
        let b = self.checked_coefficients(table);
        let stencils = &table.stencils()[..mom.len()];
        // SAFETY: stencil entries never exceed the sentinel, which is the
        // last valid position of `b`.
        let b = |q: u32| unsafe { *b.get_unchecked(q as usize) };
        let (mut u0, mut u1, mut u2) = (0.0, 0.0, 0.0);
        for (k, (st, m)) in stencils.iter().zip(mom).enumerate() {
            let bk = b(k as u32);
            let sigma = dx[0] * m[0] + dx[1] * m[1] + dx[2] * m[2];
            let row = |i: usize| {
                let pm = &st.plus_minus[i];
                st.k1[i]
                    * (b(st.plus[i]) * sigma
                        - (b(pm[0]) * m[0] + b(pm[1]) * m[1] + b(pm[2]) * m[2]))
            };
            u0 += 2.0 * bk * m[0] + row(0);
            u1 += 2.0 * bk * m[1] + row(1);
            u2 += 2.0 * bk * m[2] + row(2);
        }
        [u0, u1, u2]
    }

    /// Stresslet far field from the coefficients loaded at `dx`, which must
    /// extend through order `moments.order + 2`.
    #[inline]
    pub fn stresslet(&self, table: &MultiIndexTable, dx: Vec3, moments: &ClusterMoments) -> Vec3 {
        let Some(mom) = moments.stress.as_ref() else {
            return [0.0; 3];
        };
        let b = self.checked_coefficients(table);
        // SAFETY: as in `stokeslet`.
        let b = |q: u32| unsafe { *b.get_unchecked(q as usize) };
        let n = mom.full.len();
        let stencils = &table.stencils()[..n];
        let mut u = [0.0; 3];
        for (k, st) in stencils.iter().enumerate() {
            let mt = &mom.full[k];
            let trace = mom.trace[k];
            let sym = &mom.sym[k];
            let tau: [f64; 3] = std::array::from_fn(|j| {
                dx[0] * mt[3 * j] + dx[1] * mt[3 * j + 1] + dx[2] * mt[3 * j + 2]
            });
            for (i, ui) in u.iter_mut().enumerate() {
                let mut first = 0.0;
                let mut second = 0.0;
                let mut fourth = 0.0;
                for j in 0..3 {
                    let fac = if i == j { st.k1[j] + 1.0 } else { st.k1[j] };
                    let ppm = &st.plus2_minus[i][j];
                    first += fac * b(st.plus2[i][j]) * tau[j];
                    second += fac
                        * (b(ppm[0]) * mt[3 * j] + b(ppm[1]) * mt[3 * j + 1] + b(ppm[2]) * mt[3 * j + 2]);
                    fourth += st.k1[j] * b(st.plus[j]) * sym[SYM_INDEX[i][j]];
                }
                let third = b(st.plus[i]) * trace;
                *ui += st.k1[i] * (first - second + third) + fourth;
            }
        }
        u.map(|c| c / 3.0)
    }
}

fn check_orders(moments: &ClusterMoments, p: usize, extra: usize, table: &MultiIndexTable) -> Result<()> {
    if moments.order != p {
        return Err(TreecodeError::Usage(format!(
            "moments were computed at order {}, far field requested at order {p}",
            moments.order
        )));
    }
    if p + extra > table.pmax() {
        return Err(TreecodeError::Usage(format!(
            "far field at order {p} needs a table through order {}, have {}",
            p + extra,
            table.pmax()
        )));
    }
    Ok(())
}

fn check_offset(dx: Vec3) -> Result<()> {
    if dx == [0.0; 3] {
        return Err(TreecodeError::CoincidentPoints(dx));
    }
    Ok(())
}

/// Order-`p` Stokeslet particle-cluster approximation at offset
/// `dx = x - y_c`.
pub fn stokeslet_farfield(
    dx: Vec3,
    moments: &ClusterMoments,
    p: usize,
    table: &MultiIndexTable,
    ws: &mut FarFieldWorkspace,
) -> Result<Vec3> {
    check_orders(moments, p, 1, table)?;
    check_offset(dx)?;
    if moments.stokes.is_none() {
        return Err(TreecodeError::Usage("cluster has no Stokeslet moments".into()));
    }
    ws.load(table, dx, p + 1);
    Ok(ws.stokeslet(table, dx, moments))
}

/// Order-`p` stresslet particle-cluster approximation at offset
/// `dx = x - y_c`.
pub fn stresslet_farfield(
    dx: Vec3,
    moments: &ClusterMoments,
    p: usize,
    table: &MultiIndexTable,
    ws: &mut FarFieldWorkspace,
) -> Result<Vec3> {
    check_orders(moments, p, 2, table)?;
    check_offset(dx)?;
    if moments.stress.is_none() {
        return Err(TreecodeError::Usage("cluster has no stresslet moments".into()));
    }
    ws.load(table, dx, p + 2);
    Ok(ws.stresslet(table, dx, moments))
}
