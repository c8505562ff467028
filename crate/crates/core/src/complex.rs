//! Cubical cell complex on a flat rectangular domain.
//!
//! A `q`-cell spans `q` of the `n` axes. Cells are grouped into blocks by the
//! set of spanned axes (an ascending bitmask), and within a block they are
//! laid out in row-major order with the last axis varying fastest. Along a
//! spanned axis a cell occupies one of `resolution[i]` slots; along every
//! other axis it sits at one of `resolution[i] + 1` node positions. This
//! layout is also the canonical coefficient order of the snapshot format.

use crate::error::{HodgeError, Result};
use crate::real::Real;

/// Maximum supported dimension.
pub const MAX_DIM: usize = 5;

/// Flat rectangular domain in `n` dimensions with per-axis cell counts.
#[derive(Debug, Clone)]
pub struct CubicalComplex<T> {
    n: usize,
    extents: Vec<(T, T)>,
    resolution: Vec<usize>,
    spacing: Vec<T>,
    layouts: Vec<DegreeLayout>,
}

/// Index bookkeeping for all cells of one degree.
#[derive(Debug, Clone)]
pub struct DegreeLayout {
    /// Spanned-axis bitmasks in ascending numeric order, bit `i` = axis `i`.
    pub masks: Vec<u32>,
    /// Per block: per-axis extent of the index grid.
    pub dims: Vec<Vec<usize>>,
    /// Per block: row-major strides (last axis fastest).
    pub strides: Vec<Vec<usize>>,
    /// Global offset of each block in the flat coefficient array.
    pub offsets: Vec<usize>,
    /// Total number of cells of this degree.
    pub total: usize,
    /// mask -> block index, dense table of length `1 << n`.
    rank: Vec<Option<usize>>,
}

impl DegreeLayout {
    /// Block index of a spanned-axis mask, if it belongs to this degree.
    #[inline]
    pub fn block_of_mask(&self, mask: u32) -> Option<usize> {
        self.rank[mask as usize]
    }

    /// Flat index of the cell `(block, idx)` within the whole degree.
    #[inline]
    pub fn flat(&self, block: usize, idx: &[usize]) -> usize {
        let strides = &self.strides[block];
        let mut f = self.offsets[block];
        for (i, &v) in idx.iter().enumerate() {
            f += v * strides[i];
        }
        f
    }
}

/// Advance a row-major multi-index; returns false when iteration is done.
#[inline]
pub(crate) fn increment(idx: &mut [usize], dims: &[usize]) -> bool {
    for ax in (0..idx.len()).rev() {
        idx[ax] += 1;
        if idx[ax] < dims[ax] {
            return true;
        }
        idx[ax] = 0;
    }
    false
}

impl<T: Real> CubicalComplex<T> {
    /// Build a complex for the box `extents` with `resolution[i]` cells per axis.
    pub fn new(extents: &[(T, T)], resolution: &[usize]) -> Result<Self> {
        let n = extents.len();
        if !(2..=MAX_DIM).contains(&n) {
            return Err(HodgeError::Invalid {
                what: format!("dimension n = {n} outside supported range 2..={MAX_DIM}"),
            });
        }
        if resolution.len() != n {
            return Err(HodgeError::Invalid {
                what: format!(
                    "resolution has {} axes, extents have {n}",
                    resolution.len()
                ),
            });
        }
        let mut spacing = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b) = extents[i];
            if !(b > a) {
                return Err(HodgeError::Invalid {
                    what: format!("extent {i} must satisfy a < b, got [{a}, {b}]"),
                });
            }
            if resolution[i] == 0 {
                return Err(HodgeError::Invalid {
                    what: format!("resolution {i} must be positive"),
                });
            }
            spacing.push((b - a) / T::from_usize_lossy(resolution[i]));
        }

        let mut layouts = Vec::with_capacity(n + 1);
        for q in 0..=n {
            let mut masks = Vec::new();
            for mask in 0u32..(1u32 << n) {
                if mask.count_ones() as usize == q {
                    masks.push(mask);
                }
            }
            let mut dims = Vec::with_capacity(masks.len());
            let mut strides = Vec::with_capacity(masks.len());
            let mut offsets = Vec::with_capacity(masks.len());
            let mut rank = vec![None; 1 << n];
            let mut total = 0usize;
            for (b, &mask) in masks.iter().enumerate() {
                let d: Vec<usize> = (0..n)
                    .map(|i| {
                        if mask & (1 << i) != 0 {
                            resolution[i]
                        } else {
                            resolution[i] + 1
                        }
                    })
                    .collect();
                let mut s = vec![1usize; n];
                for i in (0..n - 1).rev() {
                    s[i] = s[i + 1] * d[i + 1];
                }
                offsets.push(total);
                total += d.iter().product::<usize>();
                rank[mask as usize] = Some(b);
                dims.push(d);
                strides.push(s);
            }
            layouts.push(DegreeLayout {
                masks,
                dims,
                strides,
                offsets,
                total,
                rank,
            });
        }

        Ok(Self {
            n,
            extents: extents.to_vec(),
            resolution: resolution.to_vec(),
            spacing,
            layouts,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn extents(&self) -> &[(T, T)] {
        &self.extents
    }

    #[inline]
    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    #[inline]
    pub fn spacing(&self) -> &[T] {
        &self.spacing
    }

    #[inline]
    pub fn min_spacing(&self) -> T {
        self.spacing
            .iter()
            .copied()
            .fold(T::infinity(), |a, b| a.min(b))
    }

    #[inline]
    pub fn layout(&self, q: usize) -> &DegreeLayout {
        &self.layouts[q]
    }

    #[inline]
    pub fn num_cells(&self, q: usize) -> usize {
        self.layouts[q].total
    }

    /// Volume of one top-dimensional cell.
    pub fn cell_volume(&self) -> T {
        self.spacing.iter().copied().fold(T::one(), |a, b| a * b)
    }

    /// Number of grid nodes (= 0-cells).
    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.layouts[0].total
    }

    /// Flat node index from a per-axis node position.
    #[inline]
    pub fn node_flat(&self, idx: &[usize]) -> usize {
        self.layouts[0].flat(0, idx)
    }

    /// Coordinates of a node.
    pub fn node_coords(&self, idx: &[usize], out: &mut [T]) {
        for i in 0..self.n {
            out[i] = self.extents[i].0 + T::from_usize_lossy(idx[i]) * self.spacing[i];
        }
    }

    /// Center coordinates of a cell with spanned-axis set `mask`.
    pub fn cell_center(&self, mask: u32, idx: &[usize], out: &mut [T]) {
        for i in 0..self.n {
            let pos = if mask & (1 << i) != 0 {
                T::from_usize_lossy(idx[i]) + T::half()
            } else {
                T::from_usize_lossy(idx[i])
            };
            out[i] = self.extents[i].0 + pos * self.spacing[i];
        }
    }

    /// Diagonal Hodge weight of a cell: spanned axes contribute their
    /// spacing, transverse axes the dual length at the node position
    /// (half spacing on the two boundary planes).
    pub fn cell_weight(&self, mask: u32, idx: &[usize]) -> T {
        let mut w = T::one();
        for i in 0..self.n {
            let h = self.spacing[i];
            if mask & (1 << i) != 0 {
                w *= h;
            } else if idx[i] == 0 || idx[i] == self.resolution[i] {
                w *= h * T::half();
            } else {
                w *= h;
            }
        }
        w
    }

    /// A cell is interior when every transverse (node-position) axis is
    /// strictly inside the grid; such cells have a complete codifferential
    /// stencil and their tangential trace does not lie on the boundary.
    #[inline]
    pub fn is_interior(&self, mask: u32, idx: &[usize]) -> bool {
        for i in 0..self.n {
            if mask & (1 << i) == 0 && (idx[i] == 0 || idx[i] == self.resolution[i]) {
                return false;
            }
        }
        true
    }

    /// Check `B_r(center)` is contained in the closed domain box.
    pub fn contains_ball(&self, center: &[T], r: T) -> bool {
        if center.len() != self.n || !(r > T::zero()) {
            return false;
        }
        for i in 0..self.n {
            if center[i] - r < self.extents[i].0 || center[i] + r > self.extents[i].1 {
                return false;
            }
        }
        true
    }

    /// Largest radius about `center` that stays inside the domain.
    pub fn inscribed_radius(&self, center: &[T]) -> T {
        let mut r = T::infinity();
        for i in 0..self.n {
            r = r
                .min(center[i] - self.extents[i].0)
                .min(self.extents[i].1 - center[i]);
        }
        r
    }

    /// Visit every cell of degree `q` as `(block, mask, idx, flat)`.
    pub fn for_each_cell<F: FnMut(usize, u32, &[usize], usize)>(&self, q: usize, mut f: F) {
        let lay = &self.layouts[q];
        let mut idx = vec![0usize; self.n];
        for (b, &mask) in lay.masks.iter().enumerate() {
            let dims = &lay.dims[b];
            idx.iter_mut().for_each(|v| *v = 0);
            let mut flat = lay.offsets[b];
            loop {
                f(b, mask, &idx, flat);
                flat += 1;
                if !increment(&mut idx, dims) {
                    break;
                }
            }
        }
    }

    /// Structural equality: same box and resolution.
    pub fn same_geometry(&self, other: &Self) -> bool {
        self.n == other.n
            && self.resolution == other.resolution
            && self
                .extents
                .iter()
                .zip(&other.extents)
                .all(|(a, b)| a.0 == b.0 && a.1 == b.1)
    }
}

/// List the axes of a mask in ascending order into `out`, returning the count.
#[inline]
pub(crate) fn mask_axes(mask: u32, out: &mut [usize; MAX_DIM]) -> usize {
    let mut k = 0;
    let mut m = mask;
    while m != 0 {
        let ax = m.trailing_zeros() as usize;
        out[k] = ax;
        k += 1;
        m &= m - 1;
    }
    k
}
