use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::grid::Lattice;
use crate::Point;

/// Extended-real function sampled on the nodes of a lattice, defined on the
/// nodes selected by `mask`. Values outside the mask are stored as NaN and
/// never read.
#[derive(Debug, Clone)]
pub struct GridFunction {
    lattice: Lattice,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl PartialEq for GridFunction {
    fn eq(&self, other: &Self) -> bool {
        self.lattice == other.lattice
            && self.mask == other.mask
            && self.iter().all(|(k, _, v)| v == other.values[k])
    }
}

impl GridFunction {
    pub fn new(lattice: Lattice, mask: Vec<bool>, mut values: Vec<f64>) -> Result<Self> {
        if mask.len() != lattice.len() || values.len() != lattice.len() {
            return Err(Error::DomainMismatch(format!(
                "grid function with {} values and {} mask entries on a lattice of {} nodes",
                values.len(),
                mask.len(),
                lattice.len()
            )));
        }
        for (v, m) in values.iter_mut().zip(&mask) {
            if !m {
                *v = f64::NAN;
            } else if v.is_nan() {
                return Err(Error::DomainMismatch("NaN value inside the mask".into()));
            }
        }
        Ok(GridFunction { lattice, values, mask })
    }

    pub fn from_fn(lattice: Lattice, mask: Vec<bool>, f: impl Fn(Point) -> f64) -> Self {
        assert_eq!(mask.len(), lattice.len(), "mask length must match the lattice");
        let values = (0..lattice.len())
            .map(|k| if mask[k] { f(lattice.node_at(k)) } else { f64::NAN })
            .collect();
        GridFunction { lattice, values, mask }
    }

    /// Samples `f` on the lattice nodes inside `domain`.
    pub fn sample(lattice: Lattice, domain: &Domain, f: impl Fn(Point) -> f64) -> Self {
        let mask = lattice.nodes().map(|(_, _, p)| domain.contains(p)).collect();
        GridFunction::from_fn(lattice, mask, f)
    }

    pub fn sample_everywhere(lattice: Lattice, f: impl Fn(Point) -> f64) -> Self {
        GridFunction::from_fn(lattice, vec![true; lattice.len()], f)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn spacing(&self) -> f64 {
        self.lattice.spacing()
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn in_mask(&self, i: usize, j: usize) -> bool {
        self.mask[self.lattice.index(i, j)]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.get_idx(self.lattice.index(i, j))
    }

    #[inline]
    pub fn get_idx(&self, idx: usize) -> Option<f64> {
        if self.mask[idx] {
            Some(self.values[idx])
        } else {
            None
        }
    }

    /// Masked nodes as `(index, point, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, Point, f64)> + '_ {
        (0..self.values.len())
            .filter(|k| self.mask[*k])
            .map(|k| (k, self.lattice.node_at(k), self.values[k]))
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|b| **b).count()
    }

    /// Bilinear interpolation, renormalized over the cell corners that lie in
    /// the mask. The nearest node of `p` must be in the mask.
    pub fn value_at(&self, p: Point) -> Result<f64> {
        let near = self
            .lattice
            .nearest(p)
            .filter(|&(i, j)| self.in_mask(i, j))
            .ok_or_else(|| Error::DomainMismatch(format!("point {p} is outside the grid function's mask")))?;
        let Some((i, j, tx, ty)) = self.lattice.locate(p) else {
            return Ok(self.get(near.0, near.1).unwrap_or(f64::NAN));
        };
        let corners = [
            (i, j, (1.0 - tx) * (1.0 - ty)),
            (i + 1, j, tx * (1.0 - ty)),
            (i, j + 1, (1.0 - tx) * ty),
            (i + 1, j + 1, tx * ty),
        ];
        let mut sum = 0.0;
        let mut wsum = 0.0;
        let mut neg_inf = false;
        let mut pos_inf = false;
        for (a, b, w) in corners {
            if w <= 0.0 {
                continue;
            }
            if let Some(v) = self.get(a, b) {
                if v == f64::NEG_INFINITY {
                    neg_inf = true;
                } else if v == f64::INFINITY {
                    pos_inf = true;
                } else {
                    sum += w * v;
                }
                wsum += w;
            }
        }
        match (neg_inf, pos_inf) {
            (true, true) => Err(Error::Indeterminate(format!("interpolation at {p} mixes +inf and -inf"))),
            (true, false) => Ok(f64::NEG_INFINITY),
            (false, true) => Ok(f64::INFINITY),
            _ if wsum > 0.0 => Ok(sum / wsum),
            _ => Ok(self.values[self.lattice.index(near.0, near.1)]),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let values = self
            .values
            .iter()
            .zip(&self.mask)
            .map(|(v, m)| if *m { f(*v) } else { f64::NAN })
            .collect();
        GridFunction { lattice: self.lattice, values, mask: self.mask.clone() }
    }

    /// Nodewise combination on the intersection of both masks.
    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.same_lattice(other)?;
        let mask: Vec<bool> = self.mask.iter().zip(&other.mask).map(|(a, b)| *a && *b).collect();
        let values = (0..self.values.len())
            .map(|k| if mask[k] { f(self.values[k], other.values[k]) } else { f64::NAN })
            .collect();
        Ok(GridFunction { lattice: self.lattice, values, mask })
    }

    /// Keeps only the masked nodes for which `keep` holds.
    pub fn restrict(&self, keep: impl Fn(Point) -> bool) -> Self {
        let mask: Vec<bool> =
            (0..self.values.len()).map(|k| self.mask[k] && keep(self.lattice.node_at(k))).collect();
        let values = (0..self.values.len()).map(|k| if mask[k] { self.values[k] } else { f64::NAN }).collect();
        GridFunction { lattice: self.lattice, values, mask }
    }

    pub fn same_lattice(&self, other: &GridFunction) -> Result<()> {
        if self.lattice != other.lattice {
            return Err(Error::DomainMismatch("grid functions live on different lattices".into()));
        }
        Ok(())
    }

    /// Largest masked value with its node index.
    pub fn max(&self) -> Option<(usize, f64)> {
        self.iter().map(|(k, _, v)| (k, v)).max_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn min(&self) -> Option<(usize, f64)> {
        self.iter().map(|(k, _, v)| (k, v)).min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Writes `x,y,value` rows for the masked nodes.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,y,value")?;
        for (_, p, v) in self.iter() {
            writeln!(w, "{},{},{}", p.re, p.im, v)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pt;

    fn lattice() -> Lattice {
        Lattice::new(pt(-1.0, -1.0), 0.25, 9, 9).unwrap()
    }

    #[test]
    fn bilinear_is_exact_on_bilinear_functions() {
        let f = GridFunction::sample_everywhere(lattice(), |p| 1.0 + 2.0 * p.re - p.im + 0.5 * p.re * p.im);
        for p in [pt(0.1, 0.3), pt(-0.77, 0.41), pt(0.99, -0.99)] {
            let exact = 1.0 + 2.0 * p.re - p.im + 0.5 * p.re * p.im;
            assert!((f.value_at(p).unwrap() - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn value_outside_mask_is_an_error() {
        let dom = Domain::disk(pt(0.0, 0.0), 0.5).unwrap();
        let f = GridFunction::sample(lattice(), &dom, |_| 1.0);
        assert!(matches!(f.value_at(pt(0.9, 0.9)), Err(Error::DomainMismatch(_))));
        assert_eq!(f.value_at(pt(0.1, 0.1)).unwrap(), 1.0);
    }

    #[test]
    fn negative_infinity_propagates() {
        let f = GridFunction::sample_everywhere(lattice(), |p| p.norm().ln());
        assert_eq!(f.value_at(pt(0.05, 0.05)).unwrap(), f64::NEG_INFINITY);
        assert_eq!(f.value_at(pt(0.0, 0.0)).unwrap(), f64::NEG_INFINITY);
        assert!(f.value_at(pt(0.5, 0.0)).unwrap().is_finite());
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let dom = Domain::disk(pt(0.0, 0.0), 0.3).unwrap();
        let f = GridFunction::sample(lattice(), &dom, |p| p.re);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,y,value\n"));
        assert_eq!(text.lines().count(), 1 + f.masked_count());
    }
}
