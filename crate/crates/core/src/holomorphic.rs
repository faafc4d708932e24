//! Polynomials and finite Blaschke products, the holomorphic inputs whose
//! `log|f|` feeds the subharmonic machinery.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Point;

/// `lead · Π (z - r_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub lead: Point,
    pub roots: Vec<Point>,
}

impl Polynomial {
    pub fn from_roots(roots: impl IntoIterator<Item = Point>) -> Self {
        Polynomial { lead: Point::new(1.0, 0.0), roots: roots.into_iter().collect() }
    }

    pub fn degree(&self) -> usize {
        self.roots.len()
    }

    pub fn eval(&self, z: Point) -> Point {
        self.roots.iter().fold(self.lead, |acc, r| acc * (z - r))
    }

    /// `log|p(z)|`, `-inf` at the roots.
    pub fn log_abs(&self, z: Point) -> f64 {
        self.lead.norm().ln() + self.roots.iter().map(|r| (z - r).norm().ln()).sum::<f64>()
    }

    /// Root multiplicities, merging roots closer than `tol`.
    pub fn multiplicities(&self, tol: f64) -> Vec<(Point, usize)> {
        let mut out: Vec<(Point, usize)> = Vec::new();
        for r in &self.roots {
            match out.iter_mut().find(|(p, _)| (p - r).norm() <= tol) {
                Some(e) => e.1 += 1,
                None => out.push((*r, 1)),
            }
        }
        out
    }
}

/// `Π (|a_k| / a_k) (a_k - z) / (1 - conj(a_k) z)` over zeros in the unit
/// disk; a zero at the origin contributes the factor `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeProduct {
    zeros: Vec<Point>,
}

impl BlaschkeProduct {
    pub fn new(zeros: impl IntoIterator<Item = Point>) -> Result<Self> {
        let zeros: Vec<Point> = zeros.into_iter().collect();
        if let Some(a) = zeros.iter().find(|a| !(a.norm() < 1.0)) {
            return Err(Error::Precondition(format!("Blaschke zero {a} is not inside the unit disk")));
        }
        Ok(BlaschkeProduct { zeros })
    }

    pub fn zeros(&self) -> &[Point] {
        &self.zeros
    }

    pub fn eval(&self, z: Point) -> Point {
        let one = Point::new(1.0, 0.0);
        self.zeros.iter().fold(one, |acc, a| {
            let n = a.norm();
            if n == 0.0 {
                acc * z
            } else {
                acc * (a / n) * (a - z) / (one - a.conj() * z)
            }
        })
    }

    /// `log|B(z)|`, summed factor by factor to avoid underflow.
    pub fn log_abs(&self, z: Point) -> f64 {
        let one = Point::new(1.0, 0.0);
        self.zeros
            .iter()
            .map(|a| ((a - z) / (one - a.conj() * z)).norm().ln())
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pt;

    #[test]
    fn polynomial_values() {
        let p = Polynomial::from_roots([pt(1.0, 0.0), pt(-1.0, 0.0)]);
        let z = pt(0.3, 0.7);
        assert!((p.eval(z) - (z * z - 1.0)).norm() < 1e-14);
        assert!((p.log_abs(z) - (z * z - 1.0).norm().ln()).abs() < 1e-14);
        assert_eq!(p.log_abs(pt(1.0, 0.0)), f64::NEG_INFINITY);
    }

    #[test]
    fn multiplicities_merge_repeated_roots() {
        let p = Polynomial::from_roots([pt(0.1, 0.0), pt(0.1, 0.0), pt(-0.3, 0.2)]);
        let m = p.multiplicities(1e-12);
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].1, 2);
    }

    #[test]
    fn blaschke_is_unimodular_on_the_circle() {
        let b = BlaschkeProduct::new([pt(0.5, 0.0), pt(0.0, -0.7), pt(0.0, 0.0)]).unwrap();
        for k in 0..16 {
            let z = Point::from_polar(1.0, k as f64 * 0.4);
            assert!((b.eval(z).norm() - 1.0).abs() < 1e-12);
            assert!(b.log_abs(z).abs() < 1e-12);
        }
        assert!(b.eval(pt(0.2, 0.1)).norm() < 1.0);
        assert!(b.eval(pt(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn blaschke_at_origin_is_product_of_moduli() {
        let zs = [pt(0.5, 0.0), pt(0.0, -0.7), pt(-0.2, 0.2)];
        let b = BlaschkeProduct::new(zs).unwrap();
        let oracle: f64 = zs.iter().map(|a| a.norm()).product();
        assert!((b.eval(pt(0.0, 0.0)).norm() - oracle).abs() < 1e-14);
    }

    #[test]
    fn zeros_outside_disk_are_rejected() {
        assert!(BlaschkeProduct::new([pt(1.0, 0.0)]).is_err());
    }
}
