use crate::error::{Result, TreecodeError};
use crate::particles::Vec3;

use super::multiindex::{MultiIndex, MultiIndexTable, Shift};

/// Taylor coefficients `b^k = D_y^k G / k!` of `G = 1/|x - y|` at a fixed
/// offset `dx = x - y`, for every `|k| <= pmax`.
#[derive(Debug, Clone)]
pub struct CoulombCoeffs {
    pub dx: Vec3,
    pub r2: f64,
    pub pmax: usize,
    /// Flat coefficients in table order, followed by one zero for the
    /// sentinel position.
    pub b: Vec<f64>,
}

impl CoulombCoeffs {
    /// Evaluates the recurrence
    /// `|k| r^2 b^k = (2|k| - 1) sum_i dx_i b^(k - e_i) - (|k| - 1) sum_i b^(k - 2 e_i)`
    /// grade by grade, starting from `b^0 = 1/|dx|`.
    pub fn compute(dx: Vec3, pmax: usize, table: &MultiIndexTable) -> Result<Self> {
        if pmax > table.pmax() {
            return Err(TreecodeError::Usage(format!(
                "coefficient order {pmax} exceeds table order {}",
                table.pmax()
            )));
        }
        let r2 = dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2];
        if r2 == 0.0 || !r2.is_finite() {
            return Err(TreecodeError::CoincidentPoints(dx));
        }
        let mut b = vec![0.0; table.len() + 1];
        fill(table, dx, pmax, &mut b);
        Ok(Self { dx, r2, pmax, b })
    }

    /// `b^k`, zero when `k` has a negative component. `None` above `pmax`.
    pub fn get(&self, k: [i64; 3], table: &MultiIndexTable) -> Option<f64> {
        if k.iter().any(|&c| c < 0) {
            return Some(0.0);
        }
        let k: MultiIndex = k.map(|c| c as usize);
        if k.iter().sum::<usize>() > self.pmax {
            return None;
        }
        table.index_of(k).map(|i| self.b[i])
    }
}

/// Writes `b^k` for `|k| <= pmax` into `b[..]`. `b` must hold
/// `table.len() + 1` values with the last one zero; entries above `pmax`
/// are left untouched.
#[inline]
pub(crate) fn fill(table: &MultiIndexTable, dx: Vec3, pmax: usize, b: &mut [f64]) {
    assert_eq!(b.len(), table.len() + 1, "coefficient buffer does not match the table");
    debug_assert_eq!(b[table.len()], 0.0);
    let r2 = dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2];
    let inv_r2 = 1.0 / r2;
    b[0] = inv_r2.sqrt();
    let shifts = table.shifts();
    let (m1, m2) = (Shift::Minus1 as usize, Shift::Minus2 as usize);
    for s in 1..=pmax {
        let sf = s as f64;
        let c1 = (2.0 * sf - 1.0) / sf * inv_r2;
        let c2 = (sf - 1.0) / sf * inv_r2;
        for i in table.grade(s) {
            let l = &shifts[i];
            // SAFETY: shift entries never exceed the sentinel `table.len()`,
            // and `b.len() == table.len() + 1` is asserted above.
            let at = |q: u32| unsafe { *b.get_unchecked(q as usize) };
            let first = dx[0] * at(l[0][m1]) + dx[1] * at(l[1][m1]) + dx[2] * at(l[2][m1]);
            let second = at(l[0][m2]) + at(l[1][m2]) + at(l[2][m2]);
            b[i] = c1 * first - c2 * second;
        }
    }
}
