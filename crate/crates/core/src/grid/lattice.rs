use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::{pt, Point};

/// Uniform node lattice `origin + (i h, j h)`, `0 <= i < nx`, `0 <= j < ny`.
///
/// Node `(i, j)` is stored at linear index `j * nx + i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    origin: Point,
    spacing: f64,
    nx: usize,
    ny: usize,
}

impl Lattice {
    pub fn new(origin: Point, spacing: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::DegenerateGeometry(format!("lattice spacing {spacing}")));
        }
        if nx < 3 || ny < 3 {
            return Err(Error::DegenerateGeometry(format!("lattice {nx}x{ny} is too small")));
        }
        Ok(Lattice { origin, spacing, nx, ny })
    }

    /// Lattice over `bbox` with `cells` cells along the longer side.
    pub fn covering(bbox: BBox, cells: usize) -> Result<Self> {
        let cells = cells.max(2);
        let w = bbox.width();
        let hgt = bbox.height();
        let spacing = w.max(hgt) / cells as f64;
        let nx = (w / spacing).round() as usize + 1;
        let ny = (hgt / spacing).round() as usize + 1;
        Lattice::new(bbox.min, spacing, nx.max(3), ny.max(3))
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing * self.spacing
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> Point {
        self.origin + pt(i as f64 * self.spacing, j as f64 * self.spacing)
    }

    #[inline]
    pub fn node_at(&self, idx: usize) -> Point {
        let (i, j) = self.coords(idx);
        self.node(i, j)
    }

    pub fn bbox(&self) -> BBox {
        BBox { min: self.origin, max: self.node(self.nx - 1, self.ny - 1) }
    }

    /// Neighbor of `(i, j)` shifted by `(di, dj)`, if it lies on the lattice.
    #[inline]
    pub fn offset(&self, i: usize, j: usize, di: isize, dj: isize) -> Option<(usize, usize)> {
        let a = i as isize + di;
        let b = j as isize + dj;
        if a < 0 || b < 0 || a >= self.nx as isize || b >= self.ny as isize {
            None
        } else {
            Some((a as usize, b as usize))
        }
    }

    /// Fractional lattice coordinates of `p`.
    pub fn fractional(&self, p: Point) -> (f64, f64) {
        let d = (p - self.origin) / self.spacing;
        (d.re, d.im)
    }

    /// Nearest node to `p`, if `p` lies within half a cell of the lattice.
    pub fn nearest(&self, p: Point) -> Option<(usize, usize)> {
        let (fx, fy) = self.fractional(p);
        let i = fx.round();
        let j = fy.round();
        if i < 0.0 || j < 0.0 || i > (self.nx - 1) as f64 || j > (self.ny - 1) as f64 {
            return None;
        }
        Some((i as usize, j as usize))
    }

    /// Lower-left node of the cell containing `p` and the offsets inside it.
    pub fn locate(&self, p: Point) -> Option<(usize, usize, f64, f64)> {
        let (fx, fy) = self.fractional(p);
        let eps = 1e-12;
        if fx < -eps || fy < -eps || fx > (self.nx - 1) as f64 + eps || fy > (self.ny - 1) as f64 + eps {
            return None;
        }
        let i = (fx.floor().max(0.0) as usize).min(self.nx - 2);
        let j = (fy.floor().max(0.0) as usize).min(self.ny - 2);
        let tx = (fx - i as f64).clamp(0.0, 1.0);
        let ty = (fy - j as f64).clamp(0.0, 1.0);
        Some((i, j, tx, ty))
    }

    /// Every node as `(i, j, point)`.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize, Point)> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| (i, j, self.node(i, j))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covering_unit_square() {
        let lat = Lattice::covering(BBox::new(pt(-1.0, -1.0), pt(1.0, 1.0)), 256).unwrap();
        assert_eq!(lat.nx(), 257);
        assert_eq!(lat.ny(), 257);
        assert!((lat.spacing() - 2.0 / 256.0).abs() < 1e-15);
        let far = lat.node(256, 256);
        assert!((far - pt(1.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn locate_and_nearest() {
        let lat = Lattice::new(pt(0.0, 0.0), 0.5, 5, 5).unwrap();
        assert_eq!(lat.nearest(pt(0.74, 1.26)), Some((1, 3)));
        let (i, j, tx, ty) = lat.locate(pt(0.75, 1.25)).unwrap();
        assert_eq!((i, j), (1, 2));
        assert!((tx - 0.5).abs() < 1e-12 && (ty - 0.5).abs() < 1e-12);
        assert!(lat.locate(pt(3.0, 0.0)).is_none());
        let (i, j, tx, _) = lat.locate(pt(2.0, 0.0)).unwrap();
        assert_eq!((i, j), (3, 0));
        assert_eq!(tx, 1.0);
    }
}
