//! Far-field grids, maps and connected-region analysis.

use crate::error::{Error, Result};
use crate::gain::{CompensationSpec, MismatchMode};
use crate::scalar::Real;
use crate::stokes::{FilterSpec, NoiseKind};

/// Rectangular grid of cells centered on the origin, coordinates in units of X0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapGrid<T> {
    pub nx: usize,
    pub ny: usize,
    /// Half-width of the grid, so cells span [−extent, extent] on both axes.
    pub extent: T,
}

impl<T: Real> MapGrid<T> {
    pub fn new(nx: usize, ny: usize, extent: T) -> Self {
        Self { nx, ny, extent }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::invalid("grid", "nx and ny must be >= 1"));
        }
        if !(self.extent > T::zero() && self.extent.is_finite()) {
            return Err(Error::invalid("grid.extent", "must be > 0"));
        }
        Ok(())
    }

    fn axis(n: usize, i: usize, extent: T) -> T {
        let k = 2 * i as i64 + 1 - n as i64;
        T::lit(k as f64) / T::from_usize_lossy(n) * extent
    }

    /// Center of cell (i, j); i runs along x, j along y.
    pub fn center(&self, i: usize, j: usize) -> [T; 2] {
        [Self::axis(self.nx, i, self.extent), Self::axis(self.ny, j, self.extent)]
    }

    /// Row-major index, y outer.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn cell_of(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    /// Index of the cell at −x.
    pub fn partner_index(&self, idx: usize) -> usize {
        let (i, j) = self.cell_of(idx);
        self.index(self.nx - 1 - i, self.ny - 1 - j)
    }

    /// Cell containing scaled position `x`, if inside the grid.
    pub fn locate(&self, x: [T; 2]) -> Option<(usize, usize)> {
        let f = |v: T, n: usize| -> Option<usize> {
            let t = (v + self.extent) / (T::lit(2.0) * self.extent) * T::from_usize_lossy(n);
            let k = t.floor().to_i64()?;
            (0..n as i64).contains(&k).then_some(k as usize)
        };
        Some((f(x[0], self.nx)?, f(x[1], self.ny)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapMeta<T> {
    pub kind: NoiseKind,
    pub sigma: T,
    pub filter: FilterSpec<T>,
    pub compensation: CompensationSpec<T>,
    pub mode: MismatchMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub index: usize,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldMap<T> {
    pub grid: MapGrid<T>,
    /// Row-major values, y outer.
    pub values: Vec<T>,
    pub meta: MapMeta<T>,
    pub failures: Vec<CellFailure>,
}

/// 4-connected set of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Region<T> {
    pub cells: Vec<usize>,
    pub centroid: [T; 2],
}

impl<T: Real> FarFieldMap<T> {
    pub fn value(&self, i: usize, j: usize) -> T {
        self.values[self.grid.index(i, j)]
    }

    pub fn min_max(&self) -> Option<(T, T)> {
        self.values.iter().filter(|v| v.is_finite()).fold(None, |acc, &v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
    }

    /// Connected regions of cells with value strictly below `threshold`,
    /// ordered by their lowest cell index.
    pub fn regions_below(&self, threshold: T) -> Vec<Region<T>> {
        let mask: Vec<bool> = self.values.iter().map(|&v| v < threshold).collect();
        self.components(&mask)
            .into_iter()
            .map(|cells| {
                let mut c = [T::zero(); 2];
                for &idx in &cells {
                    let (i, j) = self.grid.cell_of(idx);
                    let p = self.grid.center(i, j);
                    c[0] += p[0];
                    c[1] += p[1];
                }
                let n = T::from_usize_lossy(cells.len());
                Region { cells, centroid: [c[0] / n, c[1] / n] }
            })
            .collect()
    }

    /// True when the region separates the origin from the grid border.
    pub fn encloses_origin(&self, region: &Region<T>) -> bool {
        let g = &self.grid;
        let mut blocked = vec![false; self.values.len()];
        for &idx in &region.cells {
            blocked[idx] = true;
        }
        let Some((i0, j0)) = g.locate([T::zero(), T::zero()]) else {
            return false;
        };
        let start = g.index(i0, j0);
        if blocked[start] {
            return false;
        }
        let mut seen = vec![false; blocked.len()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(idx) = stack.pop() {
            let (i, j) = g.cell_of(idx);
            if i == 0 || j == 0 || i + 1 == g.nx || j + 1 == g.ny {
                return false;
            }
            for n in self.neighbours(idx) {
                if !blocked[n] && !seen[n] {
                    seen[n] = true;
                    stack.push(n);
                }
            }
        }
        true
    }

    fn neighbours(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let g = self.grid;
        let (i, j) = g.cell_of(idx);
        let cand = [
            (i > 0).then(|| g.index(i - 1, j)),
            (i + 1 < g.nx).then(|| g.index(i + 1, j)),
            (j > 0).then(|| g.index(i, j - 1)),
            (j + 1 < g.ny).then(|| g.index(i, j + 1)),
        ];
        cand.into_iter().flatten()
    }

    fn components(&self, mask: &[bool]) -> Vec<Vec<usize>> {
        let mut label = vec![false; mask.len()];
        let mut out = Vec::new();
        for start in 0..mask.len() {
            if !mask[start] || label[start] {
                continue;
            }
            let mut cells = Vec::new();
            let mut stack = vec![start];
            label[start] = true;
            while let Some(idx) = stack.pop() {
                cells.push(idx);
                for n in self.neighbours(idx) {
                    if mask[n] && !label[n] {
                        label[n] = true;
                        stack.push(n);
                    }
                }
            }
            cells.sort_unstable();
            out.push(cells);
        }
        out
    }
}
