//! Growth majorants `M` with their Riesz measures, the weighted integral
//! `∫_{D∖K} v dν_M`, and the majorization check `u <= M + const`.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, Shape};
use crate::grid::{AtomicMeasure, GridFunction, Lattice};
use crate::holomorphic::BlaschkeProduct;
use crate::kernels::riesz_constant;
use crate::testfn::TestFunction;
use crate::Point;

use super::series::{classify_series, SeriesOptions, SeriesReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GrowthSpec {
    Bounded,
    Blaschke { zeros: Vec<[f64; 2]> },
    RadialPower { alpha: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum GrowthModel {
    /// `M ≡ 0`.
    Bounded,
    /// `M = log|B|`, `ν_M` the zeros of `B`.
    Blaschke(BlaschkeProduct),
    /// `M = (1 - s²)^(-α)`, `s = |z - center| / radius`.
    RadialPower { center: Point, radius: f64, alpha: f64 },
}

impl GrowthModel {
    pub fn from_spec(spec: &GrowthSpec, domain: &Domain) -> Result<Self> {
        match spec {
            GrowthSpec::Bounded => Ok(GrowthModel::Bounded),
            GrowthSpec::Blaschke { zeros } => {
                Ok(GrowthModel::Blaschke(BlaschkeProduct::new(zeros.iter().map(|&[x, y]| Point::new(x, y)))?))
            }
            GrowthSpec::RadialPower { alpha } => GrowthModel::radial_power(domain, *alpha),
        }
    }

    pub fn radial_power(domain: &Domain, alpha: f64) -> Result<Self> {
        let Shape::Disk { center, radius } = *domain.shape() else {
            return Err(Error::Precondition("radial-power growth needs a disk domain".into()));
        };
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::Precondition(format!("growth exponent {alpha} must be nonnegative")));
        }
        Ok(GrowthModel::RadialPower { center, radius, alpha })
    }

    pub fn name(&self) -> String {
        match self {
            GrowthModel::Bounded => "bounded".into(),
            GrowthModel::Blaschke(b) => format!("blaschke ({} zeros)", b.zeros().len()),
            GrowthModel::RadialPower { alpha, .. } => format!("radial-power (alpha = {alpha})"),
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, GrowthModel::Bounded)
    }

    /// `M(p)`; `+inf` off the disk for the radial model.
    pub fn value(&self, p: Point) -> f64 {
        match self {
            GrowthModel::Bounded => 0.0,
            GrowthModel::Blaschke(b) => b.log_abs(p),
            GrowthModel::RadialPower { center, radius, alpha } => {
                let s2 = (p - center).norm_sqr() / (radius * radius);
                if s2 >= 1.0 {
                    f64::INFINITY
                } else {
                    (1.0 - s2).powf(-alpha)
                }
            }
        }
    }

    /// Density of `ν_M` for the radial model.
    pub fn density(&self, p: Point) -> Option<f64> {
        let GrowthModel::RadialPower { center, radius, alpha } = *self else {
            return None;
        };
        let r2 = (p - center).norm_sqr() / (radius * radius);
        if r2 >= 1.0 {
            return Some(f64::INFINITY);
        }
        let t = 1.0 - r2;
        let lap = 4.0 * alpha * t.powf(-alpha - 1.0) + 4.0 * alpha * (alpha + 1.0) * r2 * t.powf(-alpha - 2.0);
        Some(riesz_constant(2).expect("plane") * lap / (radius * radius))
    }

    /// `ν_M` as an atomic measure, when it is one.
    pub fn riesz_measure(&self) -> Result<AtomicMeasure> {
        match self {
            GrowthModel::Bounded => Ok(AtomicMeasure::zero()),
            GrowthModel::Blaschke(b) => AtomicMeasure::from_atoms(b.zeros().iter().map(|&z| (z, 1.0))),
            GrowthModel::RadialPower { alpha, .. } if *alpha == 0.0 => Ok(AtomicMeasure::zero()),
            GrowthModel::RadialPower { .. } => {
                Err(Error::Precondition("radial-power growth has a diffuse measure of infinite mass".into()))
            }
        }
    }

    pub fn grid(&self, lattice: Lattice, domain: &Domain) -> GridFunction {
        GridFunction::sample(lattice, domain, |p| self.value(p))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthIntegral {
    #[serde(serialize_with = "crate::ext::serialize")]
    pub value: f64,
    pub finite: bool,
    pub method: String,
    pub shells: Option<SeriesReport>,
}

const MAX_SHELLS: usize = 44;
const RADIAL_NODES: usize = 16;
const ANGULAR_NODES: usize = 128;

/// `∫_{D∖K} v dν_M`.
pub fn growth_integral(v: &TestFunction, g: &GrowthModel) -> Result<GrowthIntegral> {
    match g {
        GrowthModel::Bounded => Ok(GrowthIntegral { value: 0.0, finite: true, method: "ν_M = 0".into(), shells: None }),
        GrowthModel::Blaschke(_) => {
            let nu = g.riesz_measure()?;
            let (d, k) = (v.domain(), v.hole());
            let value = nu.restrict(|p| d.contains(p) && !k.contains(p)).integrate(&|p: Point| v.value_at(p).unwrap_or(0.0))?;
            Ok(GrowthIntegral { value, finite: value.is_finite(), method: "sum over zeros of B".into(), shells: None })
        }
        GrowthModel::RadialPower { center, radius, .. } => {
            let (c, r) = (*center, *radius);
            let shell = |n: usize| -> Result<f64> {
                let (lo, hi) = if n == 0 { (0.0, 0.5) } else { (1.0 - 0.5f64.powi(n as i32), 1.0 - 0.5f64.powi(n as i32 + 1)) };
                let dr = (hi - lo) / RADIAL_NODES as f64;
                let mut s = 0.0;
                for i in 0..RADIAL_NODES {
                    let rho = r * (lo + (i as f64 + 0.5) * dr);
                    let mut ring = 0.0;
                    for j in 0..ANGULAR_NODES {
                        let p = c + Point::from_polar(rho, TAU * (j as f64 + 0.5) / ANGULAR_NODES as f64);
                        if v.hole().contains(p) {
                            continue;
                        }
                        let w = v.value_at(p)?;
                        if w > 0.0 {
                            ring += w * g.density(p).expect("radial");
                        }
                    }
                    s += ring / ANGULAR_NODES as f64 * 2.0 * PI * rho * r * dr;
                }
                Ok(s)
            };
            let opts = SeriesOptions { max_terms: MAX_SHELLS, cutoff: 0.0, ..Default::default() };
            let rep = classify_series((0..MAX_SHELLS).map(shell), &opts)?;
            let finite = !rep.is_divergent();
            Ok(GrowthIntegral {
                value: rep.limit,
                finite,
                method: format!("dyadic shell quadrature: {}", rep.method),
                shells: Some(rep),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajorizationReport {
    pub ok: bool,
    /// `checked` when `u` was supplied, otherwise `assumed`.
    pub status: &'static str,
    #[serde(serialize_with = "crate::ext::serialize_opt")]
    pub const_shift: Option<f64>,
    pub worst_node: Option<Point>,
    /// `sup (u - M)` over nodes at depth at least `2^-j`.
    pub layers: Vec<(f64, f64)>,
}

impl MajorizationReport {
    pub fn assumed() -> Self {
        MajorizationReport { ok: true, status: "assumed", const_shift: None, worst_node: None, layers: vec![] }
    }
}

/// Checks `u <= M + const` on the nodes of `u`. The layer suprema over
/// shrinking boundary bands must settle; growth that does not decay at
/// least geometrically towards `∂D` counts as unbounded.
pub fn check_majorization(u: &GridFunction, g: &GrowthModel, domain: &Domain) -> Result<MajorizationReport> {
    let h = u.spacing();
    let mut sup = f64::NEG_INFINITY;
    let mut worst = None;
    let mut diffs = Vec::with_capacity(u.masked_count());
    for (_, p, a) in u.iter() {
        let m = g.value(p);
        let d = if a == f64::NEG_INFINITY || m == f64::INFINITY {
            continue;
        } else if a.is_nan() || a == f64::INFINITY {
            f64::INFINITY
        } else {
            a - m
        };
        if d > sup {
            sup = d;
            worst = Some(p);
        }
        diffs.push((domain.depth(p), d));
    }
    if sup == f64::NEG_INFINITY {
        return Err(Error::Precondition("no nodes with finite u and M".into()));
    }
    let width = domain.bbox().width().min(domain.bbox().height());
    let mut layers = vec![];
    let mut delta = width / 4.0;
    while delta >= 2.0 * h {
        let s = diffs.iter().filter(|(dp, _)| *dp >= delta).map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
        if s > f64::NEG_INFINITY {
            layers.push((delta, s));
        }
        delta /= 2.0;
    }
    let settles = {
        let inc: Vec<f64> = layers.windows(2).map(|w| w[1].1 - w[0].1).collect();
        let n = inc.len();
        n < 2 || {
            let (a, b) = (inc[n - 2], inc[n - 1]);
            b <= 1e-6 * (1.0 + sup.abs()) || b <= 0.75 * a
        }
    };
    Ok(MajorizationReport { ok: sup.is_finite() && settles, status: "checked", const_shift: Some(sup), worst_node: worst, layers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CompactSet;
    use crate::pt;
    use crate::testfn::green_test_function;

    fn lat(cells: usize) -> Lattice {
        Lattice::covering(Domain::unit_disk().bbox(), cells).unwrap()
    }

    #[test]
    fn radial_density_matches_finite_differences() {
        let g = GrowthModel::radial_power(&Domain::unit_disk(), 0.7).unwrap();
        let p = pt(0.3, 0.4);
        let e = 1e-4;
        let lap = (g.value(p + e) + g.value(p - e) + g.value(p + pt(0.0, e)) + g.value(p - pt(0.0, e)) - 4.0 * g.value(p)) / (e * e);
        let c2 = 1.0 / TAU;
        assert!((g.density(p).unwrap() - c2 * lap).abs() < 1e-4 * lap.abs());
    }

    #[test]
    fn radial_power_needs_a_disk() {
        let r = Domain::rectangle(pt(-1.0, -1.0), pt(1.0, 1.0)).unwrap();
        assert!(GrowthModel::radial_power(&r, 1.0).is_err());
    }

    #[test]
    fn majorization_with_linear_excess() {
        let d = Domain::unit_disk();
        let g = GrowthModel::radial_power(&d, 0.5).unwrap();
        let u = GridFunction::sample(lat(128), &d, |p| g.value(p) + p.norm());
        let rep = check_majorization(&u, &g, &d).unwrap();
        assert!(rep.ok);
        assert!((rep.const_shift.unwrap() - 1.0).abs() < 2e-2);
    }

    #[test]
    fn unbounded_excess_fails() {
        let d = Domain::unit_disk();
        let u = GridFunction::sample(lat(256), &d, |p| -(1.0 - p.norm()).ln());
        assert!(!check_majorization(&u, &GrowthModel::Bounded, &d).unwrap().ok);
        let u = GridFunction::sample(lat(256), &d, |p| 1.0 / (1.0 - p.norm_sqr()));
        assert!(!check_majorization(&u, &GrowthModel::Bounded, &d).unwrap().ok);
    }

    #[test]
    fn blaschke_log_is_majorized_by_zero() {
        let d = Domain::unit_disk();
        let b = BlaschkeProduct::new([pt(0.6, 0.0), pt(-0.2, 0.7)]).unwrap();
        let u = GridFunction::sample(lat(128), &d, |p| b.log_abs(p));
        let rep = check_majorization(&u, &GrowthModel::Bounded, &d).unwrap();
        assert!(rep.ok && rep.const_shift.unwrap() <= 0.0);
    }

    #[test]
    fn growth_integrals() {
        let d = Domain::unit_disk();
        let k = CompactSet::closed_disk(pt(0.0, 0.0), 0.5).unwrap();
        let v = green_test_function(&d, &k, pt(0.0, 0.0), lat(128)).unwrap();
        let b = GrowthModel::Blaschke(BlaschkeProduct::new([pt(0.8, 0.0), pt(0.1, 0.0)]).unwrap());
        let gi = growth_integral(&v, &b).unwrap();
        assert!((gi.value - v.value_at(pt(0.8, 0.0)).unwrap()).abs() < 1e-12);
        assert_eq!(growth_integral(&v, &GrowthModel::Bounded).unwrap().value, 0.0);
        let r = growth_integral(&v, &GrowthModel::radial_power(&d, 0.5).unwrap()).unwrap();
        assert!(!r.finite);
        assert_eq!(r.value, f64::INFINITY);
        let flat = growth_integral(&v, &GrowthModel::radial_power(&d, 0.0).unwrap()).unwrap();
        assert!(flat.finite && flat.value == 0.0);
    }
}
