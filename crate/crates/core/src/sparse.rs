//! Sparse point representation: significance mask, safety-point extension
//! and reconstruction back to the uniform fine grid.
//!
//! A detail at `(k, j)` is tied to the fine node `(2j - 1) * 2^(k-1)`; the
//! active set is that mapping applied to the significant and safety
//! positions, plus every coarsest-level node.

use crate::error::{Error, Result};
use crate::num::Real;
use crate::transform::{predict_point, BoundaryMode, InterpCoefficients, MrRepresentation, ThresholdPolicy};

/// Set of `(level, position)` pairs over the detail pyramid, one boolean row
/// per level (`1 <= k <= L`, `1 <= j <= N_k`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignificanceMask {
    levels: usize,
    rows: Vec<Vec<bool>>,
}

impl SignificanceMask {
    pub fn new(levels: usize, sizes: Vec<usize>) -> Self {
        assert_eq!(sizes.len(), levels);
        Self { levels, rows: sizes.into_iter().map(|n| vec![false; n]).collect() }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn level_len(&self, k: usize) -> usize {
        self.rows[k - 1].len()
    }

    pub fn insert(&mut self, k: usize, j: usize) {
        self.rows[k - 1][j - 1] = true;
    }

    pub fn contains(&self, k: usize, j: usize) -> bool {
        self.rows[k - 1][j - 1]
    }

    pub fn count(&self) -> usize {
        self.rows.iter().flatten().filter(|b| **b).count()
    }

    /// Iterates over the set positions as `(level, position)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows.iter().enumerate().flat_map(|(k0, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, b)| **b)
                .map(move |(j0, _)| (k0 + 1, j0 + 1))
        })
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.levels == other.levels
            && self
                .rows
                .iter()
                .zip(&other.rows)
                .all(|(a, b)| a.len() == b.len())
    }
}

/// Union of significance masks over the same hierarchy; a position active in
/// any component stays active for all of them.
pub fn unified_mask(masks: &[&SignificanceMask]) -> Result<SignificanceMask> {
    let first = masks.first().ok_or(Error::HierarchyMismatch)?;
    let mut out = (*first).clone();
    for m in &masks[1..] {
        if !out.same_shape(m) {
            return Err(Error::HierarchyMismatch);
        }
        for (ro, rm) in out.rows.iter_mut().zip(&m.rows) {
            for (a, b) in ro.iter_mut().zip(rm) {
                *a = *a || *b;
            }
        }
    }
    Ok(out)
}

/// Sparse point representation: significant positions, safety positions and
/// the induced active set on the fine grid.
#[derive(Debug, Clone)]
pub struct SparseGrid {
    n0: usize,
    levels: usize,
    boundary: BoundaryMode,
    significant: SignificanceMask,
    safety: SignificanceMask,
    /// Active flags over the solution vector (length `n0` periodic,
    /// `n0 + 1` bounded).
    active: Vec<bool>,
}

impl SparseGrid {
    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn boundary(&self) -> BoundaryMode {
        self.boundary
    }

    pub fn significant(&self) -> &SignificanceMask {
        &self.significant
    }

    pub fn safety(&self) -> &SignificanceMask {
        &self.safety
    }

    pub fn significant_count(&self) -> usize {
        self.significant.count()
    }

    pub fn is_active(&self, idx: usize) -> bool {
        self.active[idx]
    }

    pub fn active_flags(&self) -> &[bool] {
        &self.active
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|b| **b).count()
    }

    /// Sorted vector indices of the active positions.
    pub fn active_indices(&self) -> Vec<usize> {
        self.active
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| i)
            .collect()
    }

    /// Solution-vector index of the fine node carrying detail `(k, j)`.
    pub fn vec_index(&self, k: usize, j: usize) -> usize {
        let node = (2 * j - 1) << (k - 1);
        match self.boundary {
            BoundaryMode::Periodic => node - 1,
            BoundaryMode::Bounded => node,
        }
    }

    /// Rows `(level, position, node_index)` for the significance-map CSV.
    pub fn significance_rows(&self) -> Vec<(usize, usize, usize)> {
        self.significant
            .iter()
            .map(|(k, j)| (k, j, (2 * j - 1) << (k - 1)))
            .collect()
    }
}

/// Extends a significance mask with safety positions: the same-level
/// neighbours of every significant detail, and — where the detail exceeds
/// `2 eps_k` — the two child positions one level finer.
pub fn extend_with_safety<T: Real>(
    rep: &MrRepresentation<T>,
    mask: &SignificanceMask,
    policy: &ThresholdPolicy<T>,
    safety_radius: usize,
) -> SparseGrid {
    let levels = mask.levels();
    let sizes: Vec<usize> = (1..=levels).map(|k| mask.level_len(k)).collect();
    let n0 = sizes[0] * 2;
    let boundary = rep.boundary();
    let mut safety = SignificanceMask::new(levels, sizes);
    let two = T::of(2.0);
    for (k, j) in mask.iter() {
        let nk = mask.level_len(k);
        // Same-level neighbours within the configured radius.
        for off in 1..=safety_radius as i64 {
            for dj in [-off, off] {
                let jn = j as i64 + dj;
                match boundary {
                    BoundaryMode::Periodic => {
                        let jn = (jn - 1).rem_euclid(nk as i64) as usize + 1;
                        if !mask.contains(k, jn) {
                            safety.insert(k, jn);
                        }
                    }
                    BoundaryMode::Bounded => {
                        if jn >= 1 && jn <= nk as i64 {
                            let jn = jn as usize;
                            if !mask.contains(k, jn) {
                                safety.insert(k, jn);
                            }
                        }
                    }
                }
            }
        }
        // Shock capture: a detail above 2 eps_k activates its children.
        if k >= 2 {
            let d = rep.detail(k)[j - 1];
            if d.abs() > two * policy.eps_at(k) {
                for jc in [2 * j - 1, 2 * j] {
                    if !mask.contains(k - 1, jc) {
                        safety.insert(k - 1, jc);
                    }
                }
            }
        }
    }
    let len = match boundary {
        BoundaryMode::Periodic => n0,
        BoundaryMode::Bounded => n0 + 1,
    };
    let mut active = vec![false; len];
    // Coarsest-level nodes are always active.
    let nl = n0 >> levels;
    match boundary {
        BoundaryMode::Periodic => {
            for j in 1..=nl {
                active[(j << levels) - 1] = true;
            }
        }
        BoundaryMode::Bounded => {
            for j in 0..=nl {
                active[j << levels] = true;
            }
        }
    }
    let grid = SparseGrid {
        n0,
        levels,
        boundary,
        significant: mask.clone(),
        safety,
        active,
    };
    let mut grid = grid;
    for (k, j) in grid.significant.clone().iter() {
        let idx = grid.vec_index(k, j);
        grid.active[idx] = true;
    }
    for (k, j) in grid.safety.clone().iter() {
        let idx = grid.vec_index(k, j);
        grid.active[idx] = true;
    }
    grid
}

/// Fills every inactive entry of `u` by zero-detail interpolation from the
/// coarser levels, leaving active entries untouched. This is the uniform
/// reconstruction operator applied to the evolving sparse solution.
pub fn fill_inactive<T: Real>(u: &mut [T], sparse: &SparseGrid, coeffs: &InterpCoefficients<T>) {
    let levels = sparse.levels;
    let n0 = sparse.n0;
    for k in (1..=levels).rev() {
        let nk = n0 >> k;
        // Gather the level-k node values (already final).
        let w: Vec<T> = match sparse.boundary {
            BoundaryMode::Periodic => (1..=nk).map(|q| u[(q << k) - 1]).collect(),
            BoundaryMode::Bounded => (0..=nk).map(|q| u[q << k]).collect(),
        };
        for j in 1..=nk {
            let idx = sparse.vec_index(k, j);
            if !sparse.active[idx] {
                u[idx] = predict_point(&w, j, coeffs, sparse.boundary);
            }
        }
    }
}

/// Reconstructs the full fine-grid vector from a truncated representation:
/// identical to decoding with the absent details treated as zero.
pub fn reconstruct_uniform<T: Real>(
    sparse: &SparseGrid,
    rep: &MrRepresentation<T>,
    coeffs: &InterpCoefficients<T>,
) -> Result<Vec<T>> {
    let mut rep = rep.clone();
    for k in 1..=rep.levels() {
        let row = &mut rep.details[k - 1];
        for j in 1..=row.len() {
            if !sparse.significant.contains(k, j) && !sparse.safety.contains(k, j) {
                row[j - 1] = T::zero();
            }
        }
    }
    crate::transform::decode_point(&rep, coeffs)
}
