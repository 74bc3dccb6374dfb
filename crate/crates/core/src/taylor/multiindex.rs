use std::fmt;

/// A multi-index `k = (k1, k2, k3)`.
pub type MultiIndex = [usize; 3];

/// Shift applied to one component of a multi-index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shift {
    Minus2 = 0,
    Minus1 = 1,
    Plus1 = 2,
    Plus2 = 3,
}

impl Shift {
    pub fn from_delta(delta: i32) -> Option<Self> {
        match delta {
            -2 => Some(Self::Minus2),
            -1 => Some(Self::Minus1),
            1 => Some(Self::Plus1),
            2 => Some(Self::Plus2),
            _ => None,
        }
    }

    fn delta(self) -> isize {
        match self {
            Self::Minus2 => -2,
            Self::Minus1 => -1,
            Self::Plus1 => 1,
            Self::Plus2 => 2,
        }
    }
}

/// Number of multi-indices with `|k| <= p`.
pub const fn table_len(p: usize) -> usize {
    (p + 1) * (p + 2) * (p + 3) / 6
}

/// Per-entry index lists for the contracted far-field loops. Every stored
/// value is a flat table position, or the sentinel when the shifted index
/// has a negative component or leaves the table.
#[derive(Clone, Copy)]
pub(crate) struct Stencil {
    /// `k + e_i`
    pub plus: [u32; 3],
    /// `k + e_i - e_j`
    pub plus_minus: [[u32; 3]; 3],
    /// `k + e_i + e_j`
    pub plus2: [[u32; 3]; 3],
    /// `k + e_i + e_j - e_l`
    pub plus2_minus: [[[u32; 3]; 3]; 3],
    /// `k_i + 1`
    pub k1: [f64; 3],
}

/// Graded enumeration of all multi-indices with `|k| <= pmax`.
///
/// Entries are ordered by grade `|k|`, and lexicographically in
/// `(k1, k2, k3)` within a grade, so the table for a smaller order is a
/// prefix of the table for a larger one. All `±1`/`±2` shifts along each
/// axis are precomputed. Lookups that fall outside the table resolve to
/// [`MultiIndexTable::sentinel`], which is one past the last entry; a
/// coefficient array with one trailing zero therefore treats them as zero
/// without branching. The sentinel row of the shift table maps to itself,
/// so shifts can be chained.
#[derive(Clone)]
pub struct MultiIndexTable {
    pmax: usize,
    entries: Vec<MultiIndex>,
    grade_start: Vec<usize>,
    shifts: Vec<[[u32; 4]; 3]>,
    // (position of k - e_axis, axis) for every entry but the first.
    parents: Vec<(u32, u8)>,
    stencils: Vec<Stencil>,
}

impl fmt::Debug for MultiIndexTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiIndexTable")
            .field("pmax", &self.pmax)
            .field("len", &self.entries.len())
            .finish()
    }
}

impl MultiIndexTable {
    pub fn new(pmax: usize) -> Self {
        let mut entries = Vec::with_capacity(table_len(pmax));
        let mut grade_start = Vec::with_capacity(pmax + 2);
        for s in 0..=pmax {
            grade_start.push(entries.len());
            for k1 in 0..=s {
                for k2 in 0..=s - k1 {
                    entries.push([k1, k2, s - k1 - k2]);
                }
            }
        }
        grade_start.push(entries.len());

        let len = entries.len();
        let sentinel = len as u32;
        let locate = |k: [isize; 3]| -> u32 {
            if k.iter().any(|&c| c < 0) {
                return sentinel;
            }
            position_of([k[0] as usize, k[1] as usize, k[2] as usize], pmax)
                .map_or(sentinel, |i| i as u32)
        };

        let mut shifts = Vec::with_capacity(len + 1);
        for k in &entries {
            shifts.push(std::array::from_fn(|axis| {
                [Shift::Minus2, Shift::Minus1, Shift::Plus1, Shift::Plus2].map(|s| {
                    let mut t = k.map(|c| c as isize);
                    t[axis] += s.delta();
                    locate(t)
                })
            }));
        }
        shifts.push([[sentinel; 4]; 3]);

        let parents: Vec<(u32, u8)> = entries
            .iter()
            .map(|k| match k.iter().position(|&c| c > 0) {
                Some(axis) => {
                    let mut t = k.map(|c| c as isize);
                    t[axis] -= 1;
                    (locate(t), axis as u8)
                }
                None => (sentinel, 0),
            })
            .collect();

        let stencils = entries
            .iter()
            .map(|k| {
                let base = k.map(|c| c as isize);
                let at = |adds: &[usize], sub: Option<usize>| {
                    let mut t = base;
                    for &a in adds {
                        t[a] += 1;
                    }
                    if let Some(s) = sub {
                        t[s] -= 1;
                    }
                    locate(t)
                };
                Stencil {
                    plus: std::array::from_fn(|i| at(&[i], None)),
                    plus_minus: std::array::from_fn(|i| std::array::from_fn(|j| at(&[i], Some(j)))),
                    plus2: std::array::from_fn(|i| std::array::from_fn(|j| at(&[i, j], None))),
                    plus2_minus: std::array::from_fn(|i| {
                        std::array::from_fn(|j| std::array::from_fn(|l| at(&[i, j], Some(l))))
                    }),
                    k1: k.map(|c| (c + 1) as f64),
                }
            })
            .collect::<Vec<Stencil>>();

        // The far-field and recurrence loops index coefficients unchecked on
        // the strength of this.
        let in_range = |q: &u32| *q <= sentinel;
        assert!(shifts.iter().flatten().flatten().all(in_range));
        assert!(parents.iter().all(|(q, _)| in_range(q)));
        assert!(stencils.iter().all(|st| {
            st.plus.iter().all(in_range)
                && st.plus_minus.iter().flatten().all(in_range)
                && st.plus2.iter().flatten().all(in_range)
                && st.plus2_minus.iter().flatten().flatten().all(in_range)
        }));

        Self {
            pmax,
            entries,
            grade_start,
            shifts,
            parents,
            stencils,
        }
    }

    pub fn pmax(&self) -> usize {
        self.pmax
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Position returned by shift lookups that leave the table.
    pub fn sentinel(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[MultiIndex] {
        &self.entries
    }

    pub fn entry(&self, i: usize) -> MultiIndex {
        self.entries[i]
    }

    /// Number of entries of grade at most `p`, i.e. the prefix holding the
    /// order-`p` table.
    pub fn len_through(&self, p: usize) -> usize {
        self.grade_start[p.min(self.pmax) + 1]
    }

    /// Flat positions of the entries with `|k| = s`.
    pub fn grade(&self, s: usize) -> std::ops::Range<usize> {
        self.grade_start[s]..self.grade_start[s + 1]
    }

    pub fn index_of(&self, k: MultiIndex) -> Option<usize> {
        position_of(k, self.pmax)
    }

    /// Flat position of `k ± delta e_axis`, or [`Self::sentinel`].
    #[inline]
    pub fn shift_raw(&self, i: usize, axis: usize, shift: Shift) -> usize {
        self.shifts[i][axis][shift as usize] as usize
    }

    /// Flat position of `k ± delta e_axis`, if it is a table entry.
    pub fn shift(&self, i: usize, axis: usize, shift: Shift) -> Option<usize> {
        let j = self.shift_raw(i, axis, shift);
        (j != self.sentinel()).then_some(j)
    }

    /// Fills `out[..len_through(p)]` with the monomials `d^k`.
    pub(crate) fn monomials(&self, d: [f64; 3], p: usize, out: &mut [f64]) {
        let n = self.len_through(p);
        out[0] = 1.0;
        for i in 1..n {
            let (parent, axis) = self.parents[i];
            out[i] = out[parent as usize] * d[axis as usize];
        }
    }

    #[inline]
    pub(crate) fn shifts(&self) -> &[[[u32; 4]; 3]] {
        &self.shifts
    }

    #[inline]
    pub(crate) fn stencils(&self) -> &[Stencil] {
        &self.stencils
    }
}

fn position_of(k: MultiIndex, pmax: usize) -> Option<usize> {
    let s = k[0] + k[1] + k[2];
    if s > pmax {
        return None;
    }
    let offset = if s == 0 { 0 } else { table_len(s - 1) };
    // Within grade s, each k1 owns s - k1 + 1 entries ordered by k2.
    let before_k1 = k[0] * (s + 1) - k[0] * k[0].saturating_sub(1) / 2;
    Some(offset + before_k1 + k[1])
}
