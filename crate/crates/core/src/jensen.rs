//! Jensen measures, Jensen potentials, the duality between them and the
//! Poisson–Jensen identity for subharmonic functions.

use std::f64::consts::{LN_2, TAU};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::grid::{discrete_flux, discrete_laplacian, AtomicMeasure, Density, ExcisionBox, ExtSum, GridFunction, Integrand, Lattice, RieszOptions};
use crate::kernels::riesz_constant;
use crate::Point;

/// Probability measure with compact support in `domain`, representing the
/// point `center` for subharmonic functions.
#[derive(Debug, Clone, PartialEq)]
pub struct JensenMeasure {
    base: AtomicMeasure,
    center: Point,
    domain: Domain,
}

pub const MASS_TOLERANCE: f64 = 1e-9;

impl JensenMeasure {
    pub fn new(base: AtomicMeasure, center: Point, domain: Domain) -> Result<Self> {
        JensenMeasure::with_tolerance(base, center, domain, MASS_TOLERANCE)
    }

    /// As [`JensenMeasure::new`], accepting total mass `1 ± tol`.
    pub fn with_tolerance(base: AtomicMeasure, center: Point, domain: Domain, tol: f64) -> Result<Self> {
        if !domain.contains(center) {
            return Err(Error::PoleNotInterior(center));
        }
        let mass = base.total_mass();
        if (mass - 1.0).abs() > tol {
            return Err(Error::InvalidMeasure(format!("total mass {mass} is not 1")));
        }
        if let Some((p, _)) = base.support().find(|(p, _)| !domain.contains(*p)) {
            return Err(Error::InvalidMeasure(format!("support point {p} is outside the domain")));
        }
        Ok(JensenMeasure { base, center, domain })
    }

    pub fn dirac(center: Point, domain: Domain) -> Result<Self> {
        JensenMeasure::new(AtomicMeasure::dirac(center), center, domain)
    }

    /// Normalized arc length on `|x - center| = r`, discretized by `n` equal atoms.
    pub fn uniform_circle(center: Point, r: f64, n: usize, domain: Domain) -> Result<Self> {
        if !(r > 0.0) || n == 0 {
            return Err(Error::DegenerateGeometry(format!("circle of radius {r} with {n} nodes")));
        }
        let w = 1.0 / n as f64;
        let atoms = (0..n).map(|k| (center + Point::from_polar(r, TAU * k as f64 / n as f64), w));
        JensenMeasure::new(AtomicMeasure::from_atoms(atoms)?, center, domain)
    }

    pub fn mixture(t: f64, a: &JensenMeasure, b: &JensenMeasure) -> Result<Self> {
        if a.center != b.center {
            return Err(Error::DomainMismatch("Jensen measures at different points".into()));
        }
        let base = AtomicMeasure::mixture(t, &a.base, &b.base)?;
        JensenMeasure::with_tolerance(base, a.center, a.domain.clone(), 1e-9)
    }

    pub fn base(&self) -> &AtomicMeasure {
        &self.base
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn integrate<I: Integrand + ?Sized>(&self, f: &I) -> Result<f64> {
        self.base.integrate(f)
    }

    /// Checks `u(center) <= ∫ u dμ + tol` for each probe.
    pub fn certify(&self, probes: &[Probe], tol: f64) -> Result<Vec<ProbeOutcome>> {
        probes
            .iter()
            .map(|p| {
                let at_center = (p.f)(self.center);
                let mean = self.base.integrate(&*p.f)?;
                Ok(ProbeOutcome { name: p.name.clone(), at_center, mean, ok: at_center <= mean + tol })
            })
            .collect()
    }
}

/// Named subharmonic test function.
#[derive(Clone)]
pub struct Probe {
    pub name: String,
    pub f: Arc<dyn Fn(Point) -> f64 + Send + Sync>,
}

impl fmt::Debug for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Probe").field("name", &self.name).finish()
    }
}

impl Probe {
    pub fn new(name: impl Into<String>, f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        Probe { name: name.into(), f: Arc::new(f) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeOutcome {
    pub name: String,
    pub at_center: f64,
    pub mean: f64,
    pub ok: bool,
}

/// Library of subharmonic probes around `center`: logs of linear factors and
/// of a cubic, `|z|^2`, and maxima of those.
pub fn standard_probes(center: Point) -> Vec<Probe> {
    let c = center;
    let a = c + Point::new(0.13, -0.07);
    let b = c + Point::new(-0.3, 0.22);
    let d = c + Point::new(0.05, 0.41);
    vec![
        Probe::new("log|z-a|", move |z| (z - a).norm().ln()),
        Probe::new("log|z-b|", move |z| (z - b).norm().ln()),
        Probe::new("log|p3|", move |z| ((z - a) * (z - b) * (z - d)).norm().ln()),
        Probe::new("|z|^2", move |z| (z - c).norm_sqr()),
        Probe::new("Re z", move |z| (z - c).re),
        Probe::new("-Re z", move |z| -(z - c).re),
        Probe::new("max(log|z-a|,|z|^2-1)", move |z| (z - a).norm().ln().max((z - c).norm_sqr() - 1.0)),
        Probe::new("max(Re z,Im z)", move |z| (z - c).re.max((z - c).im)),
    ]
}

/// Nonnegative function with a logarithmic pole at `pole`, vanishing outside
/// the disk `|x - pole| <= hull_radius`.
#[derive(Clone)]
pub struct JensenPotential {
    f: Arc<dyn Fn(Point) -> f64 + Send + Sync>,
    pole: Point,
    normalization: f64,
    hull_radius: f64,
}

impl fmt::Debug for JensenPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JensenPotential")
            .field("pole", &self.pole)
            .field("normalization", &self.normalization)
            .field("hull_radius", &self.hull_radius)
            .finish()
    }
}

impl JensenPotential {
    pub fn from_fn(
        f: impl Fn(Point) -> f64 + Send + Sync + 'static,
        pole: Point,
        normalization: f64,
        hull_radius: f64,
    ) -> Result<Self> {
        if !(normalization.is_finite() && (0.0..=1.0 + 1e-9).contains(&normalization)) {
            return Err(Error::InvalidPotential(format!("normalization {normalization} outside [0, 1]")));
        }
        if !(hull_radius >= 0.0 && hull_radius.is_finite()) {
            return Err(Error::InvalidPotential(format!("hull radius {hull_radius}")));
        }
        Ok(JensenPotential { f: Arc::new(f), pole, normalization, hull_radius })
    }

    pub fn zero(pole: Point) -> Self {
        JensenPotential { f: Arc::new(|_| 0.0), pole, normalization: 0.0, hull_radius: 0.0 }
    }

    /// `log(r / |x - pole|)^+`, the potential of the uniform circle measure.
    pub fn circle(pole: Point, r: f64) -> Result<Self> {
        JensenPotential::from_fn(move |x| (r / (x - pole).norm()).ln().max(0.0), pole, 1.0, r)
    }

    pub fn value_at(&self, x: Point) -> f64 {
        (self.f)(x)
    }

    pub fn pole(&self) -> Point {
        self.pole
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn hull_radius(&self) -> f64 {
        self.hull_radius
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        let f = self.f.clone();
        JensenPotential::from_fn(move |x| t * f(x), self.pole, t * self.normalization, self.hull_radius)
    }

    pub fn mix(t: f64, a: &JensenPotential, b: &JensenPotential) -> Result<Self> {
        if a.pole != b.pole {
            return Err(Error::DomainMismatch("potentials with different poles".into()));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidPotential(format!("mixture weight {t}")));
        }
        let (fa, fb) = (a.f.clone(), b.f.clone());
        JensenPotential::from_fn(
            move |x| t * fa(x) + (1.0 - t) * fb(x),
            a.pole,
            t * a.normalization + (1.0 - t) * b.normalization,
            a.hull_radius.max(b.hull_radius),
        )
    }

    /// Samples on `domain`'s lattice nodes; a node exactly at the pole is
    /// left out of the mask.
    pub fn to_grid(&self, lattice: Lattice, domain: &Domain) -> GridFunction {
        let tiny = 1e-12 * lattice.spacing();
        let mask = lattice.nodes().map(|(_, _, p)| domain.contains(p) && (p - self.pole).norm() > tiny).collect();
        GridFunction::from_fn(lattice, mask, |p| self.value_at(p))
    }
}

impl Integrand for JensenPotential {
    fn eval(&self, p: Point) -> Result<f64> {
        Ok(self.value_at(p))
    }
}

/// `V_μ(x) = ∫ log|x - y| dμ(y) - log|x - x0|` by exact quadrature over the
/// atoms and the midpoint rule over density cells.
pub fn potential_of_measure(mu: &JensenMeasure) -> JensenPotential {
    let x0 = mu.center;
    let mut at_pole = 0.0;
    let mut rest = Vec::new();
    for (p, w) in mu.base.support() {
        if p == x0 {
            at_pole += w;
        } else {
            rest.push((p, w));
        }
    }
    let hull_radius = rest.iter().map(|(p, _)| (p - x0).norm()).fold(0.0, f64::max);
    let coef = at_pole - 1.0;
    let f = move |x: Point| {
        let d = (x - x0).norm();
        let pole_term = if coef == 0.0 {
            0.0
        } else if d == 0.0 {
            f64::INFINITY
        } else {
            coef * d.ln()
        };
        let mut acc = ExtSum::default();
        for (p, w) in &rest {
            acc.add(*w, (x - p).norm().ln());
        }
        acc.add(1.0, pole_term);
        acc.finish().unwrap_or(f64::NAN)
    };
    JensenPotential { f: Arc::new(f), pole: x0, normalization: 1.0 - at_pole, hull_radius }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizationEstimate {
    pub value: f64,
    /// Successive dyadic estimates; the last one is `value`.
    pub estimates: Vec<f64>,
    pub spread: f64,
}

pub const NORMALIZATION_LEVELS: usize = 6;
const CIRCLE_POINTS: usize = 64;

/// Pole coefficient `lim V(x) / |log|x - x0||` from circle means at radii
/// `r0 2^-j`: each dyadic step of a `c log(1/|x|)` singularity adds `c ln 2`.
pub fn estimate_normalization(v: &dyn Fn(Point) -> f64, pole: Point, r0: f64) -> Result<NormalizationEstimate> {
    let mean = |r: f64| {
        (0..CIRCLE_POINTS)
            .map(|k| v(pole + Point::from_polar(r, TAU * (k as f64 + 0.5) / CIRCLE_POINTS as f64)))
            .sum::<f64>()
            / CIRCLE_POINTS as f64
    };
    let means: Vec<f64> = (0..=NORMALIZATION_LEVELS).map(|j| mean(r0 * 0.5f64.powi(j as i32))).collect();
    if means.iter().any(|m| !m.is_finite()) {
        return Err(Error::InvalidPotential("potential is not finite on the dyadic circles".into()));
    }
    let estimates: Vec<f64> = means.windows(2).map(|w| (w[1] - w[0]) / LN_2).collect();
    let value = *estimates.last().expect("at least one level");
    let tail = &estimates[1..];
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = if value.abs() > 1e-2 { (hi - lo) / value.abs() } else { hi - lo };
    if spread > 0.05 {
        return Err(Error::EstimateUnstable { estimate: value, spread });
    }
    Ok(NormalizationEstimate { value, estimates, spread })
}

impl JensenPotential {
    /// Dyadic estimate of the pole coefficient, starting from `r0` (defaults
    /// to a quarter of the hull radius).
    pub fn estimate_normalization(&self, r0: Option<f64>) -> Result<NormalizationEstimate> {
        let r0 = r0.unwrap_or(if self.hull_radius > 0.0 { self.hull_radius / 4.0 } else { 0.1 });
        let f = self.f.clone();
        estimate_normalization(&move |x| f(x), self.pole, r0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryDiagnostics {
    /// `-c_2 × flux` through the pole box, the discrete pole coefficient.
    pub flux_normalization: f64,
    pub declared_normalization: f64,
    pub atom_weight: f64,
    pub clamped_mass: f64,
    pub total_mass: f64,
    pub spacing: f64,
}

#[derive(Debug, Clone)]
pub struct RecoveredMeasure {
    pub measure: JensenMeasure,
    pub diagnostics: RecoveryDiagnostics,
}

/// Tolerance on the pole atom and on the total mass of a recovered measure.
pub const RECOVERY_TOLERANCE: f64 = 1e-2;

/// `c_2 ΔV` off the pole plus the atom `(1 - N) δ_x0`, with the pole
/// coefficient `N` read from the discrete flux through the excised box.
pub fn measure_of_potential(v: &JensenPotential, domain: &Domain, lattice: Lattice) -> Result<RecoveredMeasure> {
    let x0 = v.pole;
    let grid = v.to_grid(lattice, domain);
    let (ic, jc) = lattice
        .nearest(x0)
        .filter(|&(i, j)| domain.contains(lattice.node(i, j)))
        .ok_or(Error::PoleNotInterior(x0))?;
    let opts = RieszOptions::default();
    let r = ((opts.pole_radius / lattice.spacing()).round() as usize).max(opts.min_cells);
    let bx = ExcisionBox { ic, jc, r };
    let c2 = riesz_constant(2)?;

    let mut full = grid.clone();
    if !grid.in_mask(ic, jc) {
        // Pole node excluded from the sample; the flux never reads it.
        let mut vals = grid.values().to_vec();
        let mut mask = grid.mask().to_vec();
        let k = lattice.index(ic, jc);
        vals[k] = 0.0;
        mask[k] = true;
        full = GridFunction::new(lattice, mask, vals)?;
    }
    let flux = discrete_flux(&full, &bx)?;
    let flux_normalization = -c2 * flux;
    let atom_weight = 1.0 - flux_normalization;
    if atom_weight < -RECOVERY_TOLERANCE {
        return Err(Error::InvalidPotential(format!("recovered pole atom has weight {atom_weight}")));
    }

    let lap = discrete_laplacian(&grid);
    let area = lattice.cell_area();
    let mut dens = vec![0.0; lattice.len()];
    let mut clamped = 0.0;
    for (k, _, l) in lap.iter() {
        let (i, j) = lattice.coords(k);
        if bx.contains(i, j) {
            continue;
        }
        let d = c2 * l;
        if d >= 0.0 {
            dens[k] = d;
        } else {
            clamped += -d * area;
        }
    }
    let mut atoms = Vec::new();
    if atom_weight > 0.0 {
        atoms.push(crate::grid::Atom { point: x0, weight: atom_weight });
    }
    let base = AtomicMeasure::new(atoms, Some(Density::new(lattice, dens)?))?;
    let total_mass = base.total_mass();
    let measure = JensenMeasure::with_tolerance(base, x0, domain.clone(), RECOVERY_TOLERANCE.max(10.0 * lattice.spacing()))?;
    Ok(RecoveredMeasure {
        measure,
        diagnostics: RecoveryDiagnostics {
            flux_normalization,
            declared_normalization: v.normalization,
            atom_weight: atom_weight.max(0.0),
            clamped_mass: clamped,
            total_mass,
            spacing: lattice.spacing(),
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoissonJensenReport {
    pub u_at_center: f64,
    pub potential_integral: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Both sides of `u(x0) + ∫_{≠x0} V_μ dν_u = ∫ u dμ`.
pub fn poisson_jensen_residual<I: Integrand + ?Sized>(
    u: &I,
    nu_u: &AtomicMeasure,
    mu: &JensenMeasure,
) -> Result<PoissonJensenReport> {
    let x0 = mu.center;
    let u_at_center = u.eval(x0)?;
    if u_at_center == f64::NEG_INFINITY {
        return Err(Error::Precondition(format!("u({x0}) = -inf")));
    }
    let v = potential_of_measure(mu);
    let off = nu_u.restrict(|p| p != x0);
    let potential_integral = off.integrate(&v)?;
    let lhs = u_at_center + potential_integral;
    let rhs = mu.integrate(u)?;
    Ok(PoissonJensenReport { u_at_center, potential_integral, lhs, rhs, residual: (lhs - rhs).abs() })
}
