//! Test functions for a domain `D` outside a compact hole `K`: nonnegative,
//! bounded, subharmonic on `D ∖ K` and vanishing at `∂D`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::dirichlet::{green_function, GreenFunction};
use crate::error::{Error, Result};
use crate::geometry::{CompactSet, Domain};
use crate::gluing::{glue, CollarCheck};
use crate::grid::{discrete_submean_test, harmonicity_check, GridFunction, HarmonicityReport, Lattice, SubmeanOptions, SubmeanReport};
use crate::jensen::{estimate_normalization, NormalizationEstimate};
use crate::Point;

/// Depth, in cells, below which values are extrapolated linearly to `∂D`.
const BOUNDARY_CELLS: f64 = 3.0;

#[derive(Clone)]
enum Evaluator {
    Grid,
    Green(Arc<GreenFunction>, f64),
    Exact(Arc<dyn Fn(Point) -> f64 + Send + Sync>),
}

#[derive(Clone)]
pub struct TestFunction {
    values: GridFunction,
    domain: Domain,
    hole: CompactSet,
    sup_bound: f64,
    eval: Evaluator,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("domain", &self.domain)
            .field("hole", &self.hole)
            .field("sup_bound", &self.sup_bound)
            .finish()
    }
}

impl TestFunction {
    /// Validates `values` on `D ∖ K` and wraps it.
    pub fn from_grid(values: GridFunction, domain: Domain, hole: CompactSet) -> Result<Self> {
        let rep = validate_test_function(&values, &domain, &hole)?;
        rep.into_result()?;
        Ok(TestFunction { sup_bound: rep.sup, values, domain, hole, eval: Evaluator::Grid })
    }

    /// Closed-form test function, sampled on `lattice` for validation.
    pub fn from_fn(
        f: impl Fn(Point) -> f64 + Send + Sync + 'static,
        domain: Domain,
        hole: CompactSet,
        lattice: Lattice,
    ) -> Result<Self> {
        let values = sample_outside(lattice, &domain, &hole, &f);
        let rep = validate_test_function(&values, &domain, &hole)?;
        rep.into_result()?;
        Ok(TestFunction { sup_bound: rep.sup, values, domain, hole, eval: Evaluator::Exact(Arc::new(f)) })
    }

    pub fn values(&self) -> &GridFunction {
        &self.values
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn hole(&self) -> &CompactSet {
        &self.hole
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn lattice(&self) -> &Lattice {
        self.values.lattice()
    }

    /// `λ v` for `λ > 0`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Precondition(format!("scale factor {lambda} must be positive")));
        }
        let eval = match &self.eval {
            Evaluator::Grid => Evaluator::Grid,
            Evaluator::Green(g, s) => Evaluator::Green(g.clone(), s * lambda),
            Evaluator::Exact(f) => {
                let f = f.clone();
                Evaluator::Exact(Arc::new(move |p| lambda * f(p)))
            }
        };
        Ok(TestFunction {
            values: self.values.map(|x| lambda * x),
            domain: self.domain.clone(),
            hole: self.hole.clone(),
            sup_bound: lambda * self.sup_bound,
            eval,
        })
    }

    fn raw(&self, p: Point) -> Result<f64> {
        match &self.eval {
            Evaluator::Grid => self.values.value_at(p),
            Evaluator::Green(g, s) => Ok(s * g.value_at(p)),
            Evaluator::Exact(f) => Ok(f(p)),
        }
    }

    /// Value at an arbitrary point of `D ∖ K`; zero off `D`. Within three
    /// cells of `∂D` the value at depth `3h` is scaled linearly to zero.
    pub fn value_at(&self, p: Point) -> Result<f64> {
        if !self.domain.contains(p) {
            return Ok(0.0);
        }
        if self.hole.contains(p) {
            return Err(Error::DomainMismatch(format!("point {p} lies in the hole")));
        }
        if let Evaluator::Exact(f) = &self.eval {
            return Ok(f(p));
        }
        let band = BOUNDARY_CELLS * self.values.spacing();
        let d = self.domain.depth(p);
        if d >= band {
            return self.raw(p);
        }
        match self.domain.inward_normal(p) {
            Some(n) => Ok(self.raw(p + n * (band - d))? * d / band),
            None => self.raw(p),
        }
    }
}

fn sample_outside(lattice: Lattice, domain: &Domain, hole: &CompactSet, f: &dyn Fn(Point) -> f64) -> GridFunction {
    let mask = lattice.nodes().map(|(_, _, p)| domain.contains(p) && !hole.contains(p)).collect();
    GridFunction::from_fn(lattice, mask, f)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Check {
    pub ok: bool,
    pub value: f64,
    pub limit: f64,
    pub point: Option<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestFunctionValidation {
    pub nonnegative: Check,
    /// Largest value on the lattice collar of `∂D`.
    pub boundary_limit: Check,
    /// Ratio of the lattice sup to the sup on the `2h` sublattice.
    pub bounded: Check,
    pub subharmonic: SubmeanReport,
    pub sup: f64,
}

impl TestFunctionValidation {
    pub fn passed(&self) -> bool {
        self.nonnegative.ok && self.boundary_limit.ok && self.bounded.ok && self.subharmonic.passed
    }

    pub fn into_result(&self) -> Result<()> {
        if self.passed() {
            return Ok(());
        }
        let mut failed = Vec::new();
        if !self.nonnegative.ok {
            failed.push(format!("negative value {:.3e}", self.nonnegative.value));
        }
        if !self.boundary_limit.ok {
            failed.push(format!("boundary value {:.3e} above {:.3e}", self.boundary_limit.value, self.boundary_limit.limit));
        }
        if !self.bounded.ok {
            failed.push(format!("sup grows by {:.3} under refinement", self.bounded.value));
        }
        if !self.subharmonic.passed {
            failed.push(format!("{} submean violations", self.subharmonic.violations));
        }
        Err(Error::Precondition(format!("not a test function: {}", failed.join(", "))))
    }
}

pub const UNBOUNDED_RATIO: f64 = 1.5;

pub fn validate_test_function(v: &GridFunction, domain: &Domain, hole: &CompactSet) -> Result<TestFunctionValidation> {
    if !hole.is_within(domain) {
        return Err(Error::Precondition("the hole is not compactly inside the domain".into()));
    }
    let lat = *v.lattice();
    let h = lat.spacing();
    let v = &v.restrict(|p| domain.contains(p) && !hole.contains(p));
    let (sup_k, sup) = v.max().ok_or_else(|| Error::DegenerateGeometry("no lattice node in D ∖ K".into()))?;
    let (min_k, min) = v.min().expect("non-empty");
    let neg_tol = 1e-9 * (1.0 + sup.abs());
    let nonnegative = Check { ok: min >= -neg_tol, value: min, limit: -neg_tol, point: Some(lat.node_at(min_k)) };

    let collar_tol = 10.0 * h;
    let mut worst = (f64::NEG_INFINITY, None);
    for (k, p, x) in v.iter() {
        let (i, j) = lat.coords(k);
        let touches = [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|&(di, dj)| {
            lat.offset(i, j, di, dj).map_or(true, |(a, b)| !domain.contains(lat.node(a, b)))
        });
        if touches && x > worst.0 {
            worst = (x, Some(p));
        }
    }
    let boundary_limit = Check { ok: worst.0 <= collar_tol, value: worst.0.max(0.0), limit: collar_tol, point: worst.1 };

    let coarse_sup = v
        .iter()
        .filter(|(k, _, _)| {
            let (i, j) = lat.coords(*k);
            i % 2 == 0 && j % 2 == 0
        })
        .map(|(_, _, x)| x)
        .fold(f64::NEG_INFINITY, f64::max);
    let ratio = if sup <= 1e-12 {
        1.0
    } else if coarse_sup <= 1e-12 {
        f64::INFINITY
    } else {
        sup / coarse_sup
    };
    let bounded = Check { ok: sup.is_finite() && ratio <= UNBOUNDED_RATIO, value: ratio, limit: UNBOUNDED_RATIO, point: Some(lat.node_at(sup_k)) };

    let subharmonic = discrete_submean_test(v, &SubmeanOptions::default());
    Ok(TestFunctionValidation { nonnegative, boundary_limit, bounded, subharmonic, sup })
}

/// Green's function of `D` with pole `x0 ∈ Int K`, restricted to `D ∖ K`.
pub fn green_test_function(domain: &Domain, hole: &CompactSet, x0: Point, lattice: Lattice) -> Result<TestFunction> {
    if !hole.interior().contains(x0) {
        return Err(Error::Precondition(format!("pole {x0} is not in the interior of the hole")));
    }
    let g = green_function(domain, lattice, x0)?;
    let values = g.grid().restrict(|p| domain.contains(p) && !hole.contains(p));
    let rep = validate_test_function(&values, domain, hole)?;
    rep.into_result()?;
    Ok(TestFunction {
        values,
        domain: domain.clone(),
        hole: hole.clone(),
        sup_bound: rep.sup,
        eval: Evaluator::Green(Arc::new(g), 1.0),
    })
}

/// Output of [`continue_test_function`].
#[derive(Debug, Clone)]
pub struct Continuation {
    /// `ṽ` on the lattice nodes of `D ∖ {x0}`.
    pub v_tilde: GridFunction,
    pub d0: Domain,
    pub d1: Domain,
    pub x0: Point,
    pub r0: f64,
    pub q: f64,
    pub a: f64,
    /// Pole coefficient `q / a` of `ṽ`.
    pub c: f64,
    pub collar: CollarCheck,
    green: Arc<GreenFunction>,
    base: TestFunction,
}

impl Continuation {
    /// `v0 = (q/a) g_{D1}(·, x0)`.
    pub fn v0(&self, p: Point) -> f64 {
        self.c * self.green.value_at(p)
    }

    /// `ṽ` at an arbitrary point of `D ∖ {x0}`.
    pub fn value_at(&self, p: Point) -> Result<f64> {
        if !self.base.domain.contains(p) {
            return Ok(0.0);
        }
        let w = self.v0(p);
        if self.d0.contains_closed(p) {
            return Ok(w);
        }
        Ok(self.base.value_at(p)?.max(w))
    }

    pub fn base(&self) -> &TestFunction {
        &self.base
    }

    pub fn green(&self) -> &GreenFunction {
        &self.green
    }

    pub fn pole_collar(&self) -> f64 {
        BOUNDARY_CELLS * self.v_tilde.spacing()
    }

    pub fn properties(&self) -> Result<ContinuationProperties> {
        let collar = self.pole_collar();
        let x0 = self.x0;
        let punctured = self.v_tilde.restrict(|p| {
            let d = (p - x0).norm();
            d > collar && d < 2.0 * self.r0
        });
        let harmonic = harmonicity_check(&punctured, &SubmeanOptions::default());
        let off_pole = self.v_tilde.restrict(|p| (p - x0).norm() > collar);
        let subharmonic = discrete_submean_test(&off_pole, &SubmeanOptions::default());
        let this = self.clone();
        let pole = estimate_normalization(&move |p| this.value_at(p).unwrap_or(f64::NAN), x0, self.r0);
        let mut outside_d1 = 0;
        let mut mismatched = 0;
        for (k, _, x) in self.v_tilde.iter() {
            let p = self.v_tilde.lattice().node_at(k);
            if self.d1.contains_closed(p) {
                continue;
            }
            outside_d1 += 1;
            if self.base.values.get_idx(k) != Some(x) {
                mismatched += 1;
            }
        }
        let (pole, pole_error) = match pole {
            Ok(e) => (Some(e), None),
            Err(e) => (None, Some(e.to_string())),
        };
        Ok(ContinuationProperties { harmonic, subharmonic, pole, pole_error, outside_d1, mismatched_outside_d1: mismatched })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuationProperties {
    /// Two-sided stencil check on the punctured ball `B*(x0, 2 r0)`.
    pub harmonic: HarmonicityReport,
    /// Submean test on `D ∖ {x0}` off the pole collar.
    pub subharmonic: SubmeanReport,
    pub pole: Option<NormalizationEstimate>,
    pub pole_error: Option<String>,
    pub outside_d1: usize,
    pub mismatched_outside_d1: usize,
}

/// Margin between `D0` and `∂D1`, and between `D1` and `∂D`, in cells.
pub const CONTINUATION_MARGIN_CELLS: f64 = 5.0;

/// Continues `v` across the hole: harmonic near `x0` with a logarithmic pole,
/// unchanged outside a regular `D1` with `K ⊂ D0 ⋐ D1 ⋐ D`.
pub fn continue_test_function(v: &TestFunction, x0: Point, r0: f64) -> Result<Continuation> {
    let lat = *v.lattice();
    let h = lat.spacing();
    let k = &v.hole;
    if !(r0 > 0.0) {
        return Err(Error::Precondition(format!("radius {r0} must be positive")));
    }
    let ball_in_k = k.contains(x0)
        && (0..256).all(|j| k.contains(x0 + Point::from_polar(2.0 * r0, std::f64::consts::TAU * j as f64 / 256.0)));
    if !ball_in_k {
        return Err(Error::Hypothesis {
            condition: "ball-in-hole",
            detail: format!("B({x0}, {}) is not inside the hole", 2.0 * r0),
        });
    }
    let d0 = k.interior().dilate(h)?;
    let d1 = d0.dilate(CONTINUATION_MARGIN_CELLS * h)?;
    let clearance = d1.clearance_in(&v.domain);
    if clearance < CONTINUATION_MARGIN_CELLS * h - 1e-12 {
        return Err(Error::DegenerateGeometry(format!(
            "no room for D1: clearance {clearance:.4} below {} cells",
            CONTINUATION_MARGIN_CELLS
        )));
    }
    let green = green_function(&d1, lat, x0)?;

    let mut q = f64::NEG_INFINITY;
    let mut a = f64::INFINITY;
    let ggrid = green.grid();
    for (idx, p, x) in v.values.iter() {
        if d0.depth(p).abs() <= h {
            q = q.max(x);
            if let Some(g) = ggrid.get_idx(idx) {
                a = a.min(g);
            }
        }
    }
    if !q.is_finite() || !a.is_finite() {
        return Err(Error::DegenerateGeometry("no lattice nodes on the collar of ∂D0".into()));
    }
    if a <= 0.0 {
        return Err(Error::DegenerateGeometry(format!("Green's function infimum {a} on ∂D0 is not positive")));
    }
    let c = q / a;

    let tiny = 1e-12 * h;
    let mask0: Vec<bool> = lat
        .nodes()
        .map(|(_, _, p)| v.domain.contains(p) && (p - x0).norm() > tiny)
        .collect();
    let v0 = GridFunction::new(
        lat,
        mask0.clone(),
        (0..lat.len()).map(|idx| if mask0[idx] { c * ggrid.get_idx(idx).unwrap_or(0.0) } else { f64::NAN }).collect(),
    )?;
    let outer = v.values.restrict(|p| !d0.contains_closed(p));
    let glued = glue(&outer, &v0, None)?;
    Ok(Continuation {
        v_tilde: glued.values,
        d0,
        d1,
        x0,
        r0,
        q,
        a,
        c,
        collar: glued.collar,
        green: Arc::new(green),
        base: v.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pt;

    fn setup(cells: usize) -> (Domain, CompactSet, Lattice) {
        let d = Domain::unit_disk();
        let k = CompactSet::closed_disk(pt(0.0, 0.0), 0.5).unwrap();
        let lat = Lattice::covering(d.bbox(), cells).unwrap();
        (d, k, lat)
    }

    #[test]
    fn minus_log_passes() {
        let (d, k, lat) = setup(128);
        let v = GridFunction::sample(lat, &d, |p| -p.norm().ln());
        let rep = validate_test_function(&v, &d, &k).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert!((rep.sup - 2f64.ln()).abs() < 0.02);
    }

    #[test]
    fn constant_one_fails_boundary_limit() {
        let (d, k, lat) = setup(64);
        let rep = validate_test_function(&GridFunction::sample(lat, &d, |_| 1.0), &d, &k).unwrap();
        assert!(!rep.boundary_limit.ok);
        assert!(!rep.passed());
    }

    #[test]
    fn poisson_kernel_fails_boundedness() {
        let (d, k, lat) = setup(128);
        let zeta = pt(1.0, 0.0);
        let v = GridFunction::sample(lat, &d, |p| (1.0 - p.norm_sqr()) / (p - zeta).norm_sqr());
        let rep = validate_test_function(&v, &d, &k).unwrap();
        assert!(!rep.bounded.ok, "{:?}", rep.bounded);
    }

    #[test]
    fn hole_touching_boundary_is_rejected() {
        let (d, _, lat) = setup(32);
        let k = CompactSet::closed_disk(pt(0.0, 0.0), 1.0).unwrap();
        let v = GridFunction::sample(lat, &d, |_| 0.0);
        assert!(validate_test_function(&v, &d, &k).is_err());
    }

    #[test]
    fn green_test_function_on_disk() {
        let (d, k, lat) = setup(256);
        let v = green_test_function(&d, &k, pt(0.0, 0.0), lat).unwrap();
        for z in [pt(0.6, 0.0), pt(0.0, -0.8), pt(-0.5, 0.5)] {
            assert!((v.value_at(z).unwrap() + z.norm().ln()).abs() < 1e-3);
        }
        assert!((v.sup_bound() - 2f64.ln()).abs() < 2e-2);
        for k in [10.0, 1e3, 1e6] {
            let z = pt(1.0 - 1.0 / k, 0.0);
            let exact = -z.norm().ln();
            assert!((v.value_at(z).unwrap() / exact - 1.0).abs() < 2e-2, "{k}");
        }
    }

    #[test]
    fn green_test_function_on_rectangle() {
        let d = Domain::rectangle(pt(-1.0, -0.6), pt(1.0, 0.6)).unwrap();
        let k = CompactSet::closed_disk(pt(0.1, 0.0), 0.2).unwrap();
        let lat = Lattice::covering(d.bbox(), 128).unwrap();
        let v = green_test_function(&d, &k, pt(0.1, 0.0), lat).unwrap();
        assert!(v.sup_bound() > 0.0);
    }

    #[test]
    fn canonical_continuation() {
        let (d, k, lat) = setup(256);
        let v = TestFunction::from_fn(|p: Point| -p.norm().ln(), d, k, lat).unwrap();
        let c = continue_test_function(&v, pt(0.0, 0.0), 0.2).unwrap();
        assert!(c.c > 0.0 && c.c.is_finite());
        let props = c.properties().unwrap();
        assert!(props.harmonic.passed, "{:?}", props.harmonic.worst);
        assert!(props.subharmonic.passed, "{:?}", props.subharmonic.worst);
        assert_eq!(props.mismatched_outside_d1, 0);
        assert!(props.outside_d1 > 0);
        let pole = props.pole.unwrap();
        assert!(pole.spread <= 0.05 && (pole.value - c.c).abs() < 0.05 * c.c, "{pole:?} {}", c.c);
    }

    #[test]
    fn continuation_of_green_based_function_is_proportional() {
        let (d, k, lat) = setup(128);
        let v = green_test_function(&d, &k, pt(0.0, 0.0), lat).unwrap();
        let c = continue_test_function(&v, pt(0.0, 0.0), 0.2).unwrap();
        for z in [pt(0.1, 0.0), pt(0.0, 0.3)] {
            let ratio = c.value_at(z).unwrap() / -z.norm().ln();
            assert!(ratio > 0.0 && ratio.is_finite());
        }
        assert!(c.value_at(pt(0.9, 0.0)).unwrap() - v.value_at(pt(0.9, 0.0)).unwrap() == 0.0);
    }

    #[test]
    fn ball_must_sit_in_the_hole() {
        let (d, k, lat) = setup(64);
        let v = TestFunction::from_fn(|p: Point| -p.norm().ln(), d, k, lat).unwrap();
        assert!(matches!(continue_test_function(&v, pt(0.0, 0.0), 0.3), Err(Error::Hypothesis { .. })));
    }

    #[test]
    fn scaling_multiplies_values() {
        let (d, k, lat) = setup(64);
        let v = TestFunction::from_fn(|p: Point| -p.norm().ln(), d, k, lat).unwrap();
        let w = v.scaled(2.5).unwrap();
        let z = pt(0.7, 0.1);
        assert!((w.value_at(z).unwrap() - 2.5 * v.value_at(z).unwrap()).abs() < 1e-12);
        assert!((w.sup_bound() - 2.5 * v.sup_bound()).abs() < 1e-12);
    }
}
