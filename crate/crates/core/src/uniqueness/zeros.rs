//! Zero sets: explicit finite lists and generated sequences accumulating at
//! the boundary of the unit disk.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::grid::{riesz_measure, GridFunction, Lattice, RieszOptions};
use crate::holomorphic::Polynomial;
use crate::Point;

/// Declarative zero set, as read from a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ZeroSpec {
    Explicit {
        points: Vec<[f64; 2]>,
        #[serde(default)]
        multiplicities: Option<Vec<u32>>,
    },
    /// `z_k = 1 - 1/k`.
    OneMinusInvK {
        #[serde(default)]
        start: Option<u64>,
        #[serde(default)]
        angle: f64,
    },
    /// `z_k = 1 - 1/k²`.
    OneMinusInvK2 {
        #[serde(default)]
        start: Option<u64>,
        #[serde(default)]
        angle: f64,
    },
    /// `z_k = 1 - q^k`.
    Geometric {
        ratio: f64,
        #[serde(default)]
        start: Option<u64>,
        #[serde(default)]
        angle: f64,
    },
    /// `z_k = 1 - k^(-p)`.
    Power {
        exponent: f64,
        #[serde(default)]
        start: Option<u64>,
        #[serde(default)]
        angle: f64,
    },
    /// Real and imaginary parts as expressions in `k`.
    Formula {
        re: String,
        #[serde(default)]
        im: Option<String>,
        #[serde(default)]
        start: Option<u64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Rule {
    InvK,
    InvK2,
    Geometric(f64),
    Power(f64),
    Formula { re: String, im: Option<String> },
}

/// A sequence `z_k`, `k = start, start + 1, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSequence {
    rule: Rule,
    start: u64,
    angle: f64,
}

impl ZeroSequence {
    pub fn one_minus_inv_k(start: u64) -> Self {
        ZeroSequence { rule: Rule::InvK, start: start.max(1), angle: 0.0 }
    }

    pub fn one_minus_inv_k2(start: u64) -> Self {
        ZeroSequence { rule: Rule::InvK2, start: start.max(1), angle: 0.0 }
    }

    pub fn geometric(ratio: f64, start: u64) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Precondition(format!("geometric ratio {ratio} must lie in (0, 1)")));
        }
        Ok(ZeroSequence { rule: Rule::Geometric(ratio), start: start.max(1), angle: 0.0 })
    }

    pub fn power(exponent: f64, start: u64) -> Result<Self> {
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(Error::Precondition(format!("power exponent {exponent} must be positive")));
        }
        Ok(ZeroSequence { rule: Rule::Power(exponent), start: start.max(1), angle: 0.0 })
    }

    pub fn formula(re: &str, im: Option<&str>, start: u64) -> Result<Self> {
        for f in std::iter::once(re).chain(im) {
            let _ = bind(f)?;
        }
        Ok(ZeroSequence {
            rule: Rule::Formula { re: re.to_string(), im: im.map(str::to_string) },
            start,
            angle: 0.0,
        })
    }

    /// Rotates every point by `angle`.
    pub fn rotated(mut self, angle: f64) -> Self {
        self.angle = angle;
        self
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    /// Points `z_start, z_start+1, ...`.
    pub fn iter(&self) -> Result<Box<dyn Iterator<Item = Point> + '_>> {
        let rot = Point::from_polar(1.0, self.angle);
        let radial = move |r: f64| rot * Point::new(r, 0.0);
        let ks = self.start..;
        Ok(match &self.rule {
            Rule::InvK => Box::new(ks.map(move |k| radial(1.0 - 1.0 / k as f64))),
            Rule::InvK2 => Box::new(ks.map(move |k| radial(1.0 - 1.0 / (k as f64 * k as f64)))),
            Rule::Geometric(q) => {
                let q = *q;
                Box::new(ks.map(move |k| radial(1.0 - q.powf(k as f64))))
            }
            Rule::Power(p) => {
                let p = *p;
                Box::new(ks.map(move |k| radial(1.0 - (k as f64).powf(-p))))
            }
            Rule::Formula { re, im } => {
                let fr = bind(re)?;
                let fi = match im {
                    Some(s) => Some(bind(s)?),
                    None => None,
                };
                Box::new(ks.map(move |k| {
                    let k = k as f64;
                    rot * Point::new(fr(k), fi.as_ref().map_or(0.0, |f| f(k)))
                }))
            }
        })
    }

    pub fn describe(&self) -> String {
        let body = match &self.rule {
            Rule::InvK => "1 - 1/k".to_string(),
            Rule::InvK2 => "1 - 1/k^2".to_string(),
            Rule::Geometric(q) => format!("1 - {q}^k"),
            Rule::Power(p) => format!("1 - k^(-{p})"),
            Rule::Formula { re, im: None } => re.clone(),
            Rule::Formula { re, im: Some(im) } => format!("({re}) + i({im})"),
        };
        if self.angle == 0.0 {
            format!("z_k = {body}, k >= {}", self.start)
        } else {
            format!("z_k = e^(i{}) ({body}), k >= {}", self.angle, self.start)
        }
    }
}

fn parse(f: &str) -> Result<meval::Expr> {
    f.parse().map_err(|e: meval::Error| Error::Formula { formula: f.to_string(), message: e.to_string() })
}

fn bind(f: &str) -> Result<Box<dyn Fn(f64) -> f64>> {
    let g = parse(f)?
        .bind("k")
        .map_err(|e| Error::Formula { formula: f.to_string(), message: e.to_string() })?;
    Ok(Box::new(g))
}

/// Zeros counted with multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub enum ZeroSet {
    Finite(Vec<(Point, u32)>),
    Sequence(ZeroSequence),
}

impl ZeroSet {
    pub fn finite(points: impl IntoIterator<Item = Point>) -> Self {
        ZeroSet::Finite(points.into_iter().map(|p| (p, 1)).collect())
    }

    pub fn from_spec(spec: &ZeroSpec) -> Result<Self> {
        let s = |start: &Option<u64>, default: u64| start.unwrap_or(default);
        Ok(match spec {
            ZeroSpec::Explicit { points, multiplicities } => {
                let mult = match multiplicities {
                    Some(m) if m.len() != points.len() => {
                        return Err(Error::Precondition(format!(
                            "{} multiplicities for {} points",
                            m.len(),
                            points.len()
                        )))
                    }
                    Some(m) => m.clone(),
                    None => vec![1; points.len()],
                };
                if mult.contains(&0) {
                    return Err(Error::Precondition("zero multiplicity".into()));
                }
                ZeroSet::Finite(points.iter().map(|&[x, y]| Point::new(x, y)).zip(mult).collect())
            }
            // k = 2 gives 1/2, which sits on the boundary of the default hole.
            ZeroSpec::OneMinusInvK { start, angle } => {
                ZeroSet::Sequence(ZeroSequence::one_minus_inv_k(s(start, 3)).rotated(*angle))
            }
            ZeroSpec::OneMinusInvK2 { start, angle } => {
                ZeroSet::Sequence(ZeroSequence::one_minus_inv_k2(s(start, 2)).rotated(*angle))
            }
            ZeroSpec::Geometric { ratio, start, angle } => {
                ZeroSet::Sequence(ZeroSequence::geometric(*ratio, s(start, 1))?.rotated(*angle))
            }
            ZeroSpec::Power { exponent, start, angle } => {
                ZeroSet::Sequence(ZeroSequence::power(*exponent, s(start, 2))?.rotated(*angle))
            }
            ZeroSpec::Formula { re, im, start } => {
                ZeroSet::Sequence(ZeroSequence::formula(re, im.as_deref(), s(start, 1))?)
            }
        })
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ZeroSet::Finite(_))
    }

    /// Points with multiplicity; unbounded for sequences.
    pub fn iter(&self) -> Result<Box<dyn Iterator<Item = (Point, u32)> + '_>> {
        match self {
            ZeroSet::Finite(v) => Ok(Box::new(v.iter().copied())),
            ZeroSet::Sequence(s) => Ok(Box::new(s.iter()?.map(|p| (p, 1)))),
        }
    }

    /// First `n` points, each repeated by multiplicity.
    pub fn take(&self, n: usize) -> Result<Vec<Point>> {
        Ok(self
            .iter()?
            .flat_map(|(p, m)| std::iter::repeat(p).take(m as usize))
            .take(n)
            .collect())
    }

    pub fn describe(&self) -> String {
        match self {
            ZeroSet::Finite(v) => format!("{} explicit zeros", v.iter().map(|(_, m)| *m as usize).sum::<usize>()),
            ZeroSet::Sequence(s) => s.describe(),
        }
    }
}

/// Recovered zero mass at one root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiplicityCheck {
    pub root: Point,
    pub multiplicity: usize,
    pub mass: f64,
}

/// Compares the Riesz mass of `log|p|` near each root inside `domain` with
/// the root's multiplicity.
pub fn poincare_lelong(p: &Polynomial, domain: &Domain, lattice: Lattice) -> Result<Vec<MultiplicityCheck>> {
    let roots: Vec<(Point, usize)> =
        p.multiplicities(1e-12).into_iter().filter(|(r, _)| domain.contains(*r)).collect();
    let pc = p.clone();
    let u = GridFunction::sample(lattice, domain, move |z| pc.log_abs(z));
    let ext = riesz_measure(&u, &RieszOptions::with_poles(roots.iter().map(|r| r.0)))?.finite()?;
    let r = ext.charges.first().map_or(0.0, |c| c.excision.r as f64 * lattice.spacing());
    Ok(roots
        .into_iter()
        .map(|(root, multiplicity)| MultiplicityCheck {
            root,
            multiplicity,
            mass: ext.measure.mass_where(|q| (q - root).norm() <= 1.5 * r.max(lattice.spacing())),
        })
        .collect())
}

/// Evenly spaced points on a circle, used by tests and examples.
pub fn circle_points(center: Point, r: f64, n: usize) -> Vec<Point> {
    (0..n).map(|j| center + Point::from_polar(r, TAU * j as f64 / n as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pt;

    #[test]
    fn generators_match_closed_forms() {
        let z = ZeroSet::from_spec(&ZeroSpec::OneMinusInvK { start: None, angle: 0.0 }).unwrap();
        let pts = z.take(3).unwrap();
        assert_eq!(pts, vec![pt(1.0 - 1.0 / 3.0, 0.0), pt(0.75, 0.0), pt(0.8, 0.0)]);
        let g = ZeroSequence::geometric(0.5, 1).unwrap();
        let v: Vec<Point> = g.iter().unwrap().take(2).collect();
        assert_eq!(v, vec![pt(0.5, 0.0), pt(0.75, 0.0)]);
        let p = ZeroSequence::power(2.0, 2).unwrap();
        assert_eq!(p.iter().unwrap().next().unwrap(), pt(0.75, 0.0));
    }

    #[test]
    fn formula_matches_builtin_rule() {
        let f = ZeroSequence::formula("1 - 1/k^2", None, 2).unwrap();
        let g = ZeroSequence::one_minus_inv_k2(2);
        for (a, b) in f.iter().unwrap().zip(g.iter().unwrap()).take(50) {
            assert!((a - b).norm() < 1e-15);
        }
        let c = ZeroSequence::formula("0.5", Some("1/k"), 1).unwrap();
        assert_eq!(c.iter().unwrap().nth(1).unwrap(), pt(0.5, 0.5));
    }

    #[test]
    fn bad_formula_is_reported() {
        assert!(matches!(ZeroSequence::formula("1 - 1/", None, 1), Err(Error::Formula { .. })));
        assert!(matches!(ZeroSequence::formula("1 - 1/j", None, 1), Err(Error::Formula { .. })));
    }

    #[test]
    fn rotation_preserves_modulus() {
        let s = ZeroSequence::one_minus_inv_k(3).rotated(1.0);
        for (k, z) in s.iter().unwrap().take(10).enumerate() {
            assert!((z.norm() - (1.0 - 1.0 / (k as f64 + 3.0))).abs() < 1e-14);
        }
    }

    #[test]
    fn explicit_with_multiplicities() {
        let spec: ZeroSpec =
            serde_json::from_str(r#"{"kind":"explicit","points":[[0.6,0.0],[0.0,0.7]],"multiplicities":[2,1]}"#).unwrap();
        let z = ZeroSet::from_spec(&spec).unwrap();
        assert_eq!(z.take(10).unwrap().len(), 3);
        let bad = ZeroSpec::Explicit { points: vec![[0.6, 0.0]], multiplicities: Some(vec![1, 2]) };
        assert!(ZeroSet::from_spec(&bad).is_err());
    }

    #[test]
    fn lelong_numbers_of_a_polynomial() {
        let p = Polynomial::from_roots([pt(0.3, 0.1), pt(0.3, 0.1), pt(-0.4, -0.2)]);
        let lat = Lattice::covering(Domain::unit_disk().bbox(), 256).unwrap();
        let checks = poincare_lelong(&p, &Domain::unit_disk(), lat).unwrap();
        assert_eq!(checks.len(), 2);
        for c in checks {
            assert!((c.mass - c.multiplicity as f64).abs() < 1e-2, "{c:?}");
        }
    }
}
