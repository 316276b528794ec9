//! Exact distance quanta and dense square matrices of them.

use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, AddAssign};

use crate::error::ShapeError;

/// Largest value accepted from user input: 2^40 quanta.
///
/// Sums of a handful of capped values stay far below `u64::MAX`, so the
/// kernels can use plain addition.
pub const MAX_QUANTA: u64 = 1 << 40;

/// A nonnegative distance measured in integer quanta.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
#[repr(transparent)]
pub struct Dist(pub u64);

impl Dist {
    pub const ZERO: Dist = Dist(0);
    pub const ONE: Dist = Dist(1);

    #[inline]
    pub const fn get(self) -> u64 {
        self.0
    }
}

impl Add for Dist {
    type Output = Dist;
    #[inline]
    fn add(self, rhs: Dist) -> Dist {
        Dist(self.0 + rhs.0)
    }
}

impl AddAssign for Dist {
    #[inline]
    fn add_assign(&mut self, rhs: Dist) {
        self.0 += rhs.0;
    }
}

impl From<u64> for Dist {
    fn from(v: u64) -> Self {
        Dist(v)
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Row-major `n x n` matrix of [`Dist`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DistMatrix {
    n: usize,
    data: Vec<Dist>,
}

impl DistMatrix {
    pub fn filled(n: usize, value: Dist) -> Self {
        DistMatrix { n, data: alloc::vec![value; n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Dist) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        DistMatrix { n, data }
    }

    /// Builds a matrix from row vectors; every row must have `rows.len()` entries.
    pub fn from_rows<R: AsRef<[u64]>>(rows: &[R]) -> Result<Self, ShapeError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(ShapeError { row: i, expected: n, found: row.len() });
            }
            data.extend(row.iter().copied().map(Dist));
        }
        Ok(DistMatrix { n, data })
    }

    pub fn from_flat(n: usize, data: Vec<Dist>) -> Result<Self, ShapeError> {
        if data.len() != n * n {
            return Err(ShapeError { row: 0, expected: n * n, found: data.len() });
        }
        Ok(DistMatrix { n, data })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Dist {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Dist) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Dist] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[Dist] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [Dist] {
        &mut self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Dist]> + '_ {
        self.data.chunks_exact(self.n.max(1)).take(self.n)
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        self.rows().map(|r| r.iter().map(|d| d.0).collect()).collect()
    }

    pub fn transpose(&self) -> Self {
        DistMatrix::from_fn(self.n, |i, j| self.get(j, i))
    }

    /// Leading `m x m` submatrix.
    pub fn leading(&self, m: usize) -> Self {
        assert!(m <= self.n, "leading block {m} exceeds matrix size {}", self.n);
        DistMatrix::from_fn(m, |i, j| self.get(i, j))
    }

    pub fn min_entry(&self) -> Option<Dist> {
        self.data.iter().copied().min()
    }

    pub fn max_entry(&self) -> Option<Dist> {
        self.data.iter().copied().max()
    }

    /// Adds `k` to every entry.
    pub fn offset(&self, k: Dist) -> Self {
        DistMatrix { n: self.n, data: self.data.iter().map(|&d| d + k).collect() }
    }

    /// `true` when every entry of `self` is `<=` the matching entry of `other`.
    pub fn le_pointwise(&self, other: &DistMatrix) -> bool {
        self.n == other.n && self.data.iter().zip(&other.data).all(|(a, b)| a <= b)
    }
}

impl fmt::Debug for DistMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}
