use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, Lattice};
use crate::Point;

/// Anything that can be evaluated at a point of the plane and integrated
/// against a measure.
pub trait Integrand {
    fn eval(&self, p: Point) -> Result<f64>;
}

impl Integrand for GridFunction {
    fn eval(&self, p: Point) -> Result<f64> {
        self.value_at(p)
    }
}

impl<F: Fn(Point) -> f64 + ?Sized> Integrand for F {
    fn eval(&self, p: Point) -> Result<f64> {
        Ok(self(p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: Point,
    pub weight: f64,
}

/// Nonnegative density per unit area attached to lattice nodes; node `k`
/// carries mass `values[k] * h^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    lattice: Lattice,
    values: Vec<f64>,
}

impl Density {
    pub fn new(lattice: Lattice, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::DomainMismatch("density length does not match its lattice".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidMeasure(format!("density value {v} is not a finite nonnegative number")));
        }
        Ok(Density { lattice, values })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Nodes with positive mass as `(point, mass)`.
    pub fn cells(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        let area = self.lattice.cell_area();
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > 0.0)
            .map(move |(k, v)| (self.lattice.node_at(k), v * area))
    }
}

/// Positive measure made of point masses plus an optional lattice density.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AtomicMeasure {
    atoms: Vec<Atom>,
    density: Option<Density>,
}

impl AtomicMeasure {
    pub fn new(atoms: Vec<Atom>, density: Option<Density>) -> Result<Self> {
        if let Some(a) = atoms.iter().find(|a| !(a.weight.is_finite() && a.weight >= 0.0)) {
            return Err(Error::InvalidMeasure(format!("atom at {} has weight {}", a.point, a.weight)));
        }
        if let Some(a) = atoms.iter().find(|a| !(a.point.re.is_finite() && a.point.im.is_finite())) {
            return Err(Error::InvalidMeasure(format!("atom at non-finite point {}", a.point)));
        }
        Ok(AtomicMeasure { atoms, density })
    }

    pub fn zero() -> Self {
        AtomicMeasure::default()
    }

    pub fn dirac(p: Point) -> Self {
        AtomicMeasure { atoms: vec![Atom { point: p, weight: 1.0 }], density: None }
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = (Point, f64)>) -> Result<Self> {
        AtomicMeasure::new(atoms.into_iter().map(|(point, weight)| Atom { point, weight }).collect(), None)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&Density> {
        self.density.as_ref()
    }

    /// Every positive point mass, atoms first, then density cells.
    pub fn support(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.atoms
            .iter()
            .filter(|a| a.weight > 0.0)
            .map(|a| (a.point, a.weight))
            .chain(self.density.iter().flat_map(|d| d.cells()))
    }

    pub fn total_mass(&self) -> f64 {
        self.support().map(|(_, w)| w).sum()
    }

    pub fn mass_where(&self, pred: impl Fn(Point) -> bool) -> f64 {
        self.support().filter(|(p, _)| pred(*p)).map(|(_, w)| w).sum()
    }

    pub fn restrict(&self, keep: impl Fn(Point) -> bool) -> AtomicMeasure {
        let atoms = self.atoms.iter().copied().filter(|a| keep(a.point)).collect();
        let density = self.density.as_ref().map(|d| Density {
            lattice: d.lattice,
            values: d
                .values
                .iter()
                .enumerate()
                .map(|(k, v)| if keep(d.lattice.node_at(k)) { *v } else { 0.0 })
                .collect(),
        });
        AtomicMeasure { atoms, density }
    }

    pub fn scaled(&self, t: f64) -> Result<AtomicMeasure> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidMeasure(format!("scale factor {t}")));
        }
        Ok(AtomicMeasure {
            atoms: self.atoms.iter().map(|a| Atom { point: a.point, weight: a.weight * t }).collect(),
            density: self.density.as_ref().map(|d| Density {
                lattice: d.lattice,
                values: d.values.iter().map(|v| v * t).collect(),
            }),
        })
    }

    /// Sum of two measures. Densities must share a lattice.
    pub fn plus(&self, other: &AtomicMeasure) -> Result<AtomicMeasure> {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        let density = match (&self.density, &other.density) {
            (Some(a), Some(b)) => {
                if a.lattice != b.lattice {
                    return Err(Error::DomainMismatch("cannot add densities on different lattices".into()));
                }
                Some(Density { lattice: a.lattice, values: a.values.iter().zip(&b.values).map(|(x, y)| x + y).collect() })
            }
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(b.clone()),
            (None, None) => None,
        };
        Ok(AtomicMeasure { atoms, density })
    }

    /// `t μ1 + (1 - t) μ2` for `t ∈ [0, 1]`.
    pub fn mixture(t: f64, a: &AtomicMeasure, b: &AtomicMeasure) -> Result<AtomicMeasure> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidMeasure(format!("mixture weight {t} outside [0, 1]")));
        }
        a.scaled(t)?.plus(&b.scaled(1.0 - t)?)
    }

    /// `∫ f dμ` with the extended-real conventions: a point of positive mass
    /// where `f = -inf` makes the integral `-inf`.
    pub fn integrate<I: Integrand + ?Sized>(&self, f: &I) -> Result<f64> {
        let mut acc = ExtSum::default();
        for (p, w) in self.support() {
            acc.add(w, f.eval(p)?);
        }
        acc.finish()
    }

    /// Writes `x,y,weight` rows; density cells are written with their mass.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,y,weight")?;
        for (p, m) in self.support() {
            writeln!(w, "{},{},{}", p.re, p.im, m)?;
        }
        Ok(())
    }
}

/// Accumulator for sums of `weight * value` over the extended reals.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct ExtSum {
    finite: f64,
    pos_inf: bool,
    neg_inf: bool,
}

impl ExtSum {
    pub(crate) fn add(&mut self, weight: f64, value: f64) {
        if weight == 0.0 {
            return;
        }
        if value == f64::INFINITY {
            self.pos_inf = true;
        } else if value == f64::NEG_INFINITY {
            self.neg_inf = true;
        } else {
            self.finite += weight * value;
        }
    }

    pub(crate) fn finish(self) -> Result<f64> {
        match (self.pos_inf, self.neg_inf) {
            (true, true) => Err(Error::Indeterminate("integral mixes +inf and -inf contributions".into())),
            (true, false) => Ok(f64::INFINITY),
            (false, true) => Ok(f64::NEG_INFINITY),
            _ if self.finite.is_nan() => Err(Error::Indeterminate("integrand produced NaN".into())),
            _ => Ok(self.finite),
        }
    }
}
