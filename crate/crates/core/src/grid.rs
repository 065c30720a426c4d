//! Dyadic nested grid hierarchy shared by every other module.
//!
//! Level 0 is the finest grid; level `L` the coarsest. Node indices are
//! 0-based from the left boundary, cell indices are 1-based. Node
//! coordinates are computed once on the fine grid and shared upward by
//! stride, so coarse nodes coincide bit-exactly with the even fine nodes.

use crate::error::{Error, Result};
use crate::num::Real;

#[derive(Debug, Clone)]
pub struct GridHierarchy<T> {
    lo: T,
    hi: T,
    n0: usize,
    levels: usize,
    /// Fine-grid node coordinates, length `n0 + 1`.
    xs: Vec<T>,
    /// Per-level spacing `h_k = (hi - lo) * 2^k / n0`, each rounded once.
    hs: Vec<T>,
}

impl<T: Real> GridHierarchy<T> {
    /// Builds the hierarchy `G^0 .. G^L` over `[lo, hi]` with `n0` fine
    /// intervals (a power of two) and `levels >= 1` coarsenings.
    pub fn build(lo: T, hi: T, n0: usize, levels: usize) -> Result<Self> {
        if hi <= lo {
            return Err(Error::EmptyDomain);
        }
        if n0 < 2 || !n0.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n0));
        }
        if levels == 0 || n0 >> levels < 2 {
            return Err(Error::TooManyLevels { n0, levels });
        }
        let width = hi - lo;
        let h0 = width / T::of(n0 as f64);
        let mut xs = Vec::with_capacity(n0 + 1);
        for j in 0..=n0 {
            xs.push(lo + T::of(j as f64) * h0);
        }
        // Pin the right endpoint so both boundaries are exact.
        xs[n0] = hi;
        let hs = (0..=levels)
            .map(|k| width * T::of((1usize << k) as f64) / T::of(n0 as f64))
            .collect();
        Ok(Self { lo, hi, n0, levels, xs, hs })
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    /// Fine-grid interval count `N_0`.
    pub fn n0(&self) -> usize {
        self.n0
    }

    /// Number of coarsening levels `L`.
    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Interval count `N_k = n0 / 2^k` at level `k`.
    pub fn intervals(&self, k: usize) -> usize {
        self.n0 >> k
    }

    /// Spacing `h_k` at level `k`.
    pub fn spacing(&self, k: usize) -> T {
        self.hs[k]
    }

    /// Fine-grid index of node `j` of level `k`.
    pub fn fine_index(&self, k: usize, j: usize) -> usize {
        j << k
    }

    /// Coordinate of node `j` at level `k` (shared with the fine grid).
    pub fn node(&self, k: usize, j: usize) -> T {
        self.xs[j << k]
    }

    /// All fine-grid node coordinates.
    pub fn fine_nodes(&self) -> &[T] {
        &self.xs
    }

    /// Center of cell `i` (1-based) at level `k`.
    pub fn cell_center(&self, k: usize, i: usize) -> T {
        let half = T::of(0.5);
        half * (self.node(k, i - 1) + self.node(k, i))
    }

    /// Index of the parent (node or cell) of `j` one level up from `k`.
    ///
    /// For even `j` this is the coarse node `j/2`; for a 1-based cell index
    /// it is the parent cell `ceil(j/2)`. Both reduce to `(j + 1) / 2`.
    pub fn parent_index(&self, j: usize, k: usize) -> Result<usize> {
        if k >= self.levels || j > self.intervals(k) {
            return Err(Error::IndexOutOfRange { index: j, level: k });
        }
        Ok((j + 1) / 2)
    }

    /// 1-based child cells `(2j - 1, 2j)` of cell `j` at level `k`, living
    /// at level `k - 1`.
    pub fn children_indices(&self, j: usize, k: usize) -> Result<(usize, usize)> {
        if k == 0 || k > self.levels || j == 0 || j > self.intervals(k) {
            return Err(Error::IndexOutOfRange { index: j, level: k });
        }
        Ok((2 * j - 1, 2 * j))
    }
}
