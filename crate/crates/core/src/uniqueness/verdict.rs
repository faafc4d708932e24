//! The verdict gate and the report it produces.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::Shape;
use crate::grid::GridFunction;
use crate::holomorphic::BlaschkeProduct;
use crate::testfn::TestFunction;
use crate::Point;

use super::growth::{check_majorization, growth_integral, GrowthIntegral, GrowthModel, MajorizationReport};
use super::series::{classify_series, Classification, PartialSum, SeriesOptions, SeriesReport};
use super::zeros::ZeroSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ForcedTrivial,
    Inconclusive,
    HypothesisFailed(&'static str),
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::ForcedTrivial => f.write_str("FORCED_TRIVIAL"),
            Verdict::Inconclusive => f.write_str("INCONCLUSIVE"),
            Verdict::HypothesisFailed(c) => write!(f, "HYPOTHESIS_FAILED({c})"),
        }
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The decision table: a failed growth integral outranks a failed
/// majorization; with both hypotheses in place a divergent zero sum forces
/// `u ≡ -inf`.
pub fn gate(growth_finite: bool, majorization_ok: bool, sum_divergent: bool) -> Verdict {
    if !growth_finite {
        Verdict::HypothesisFailed("condition6")
    } else if !majorization_ok {
        Verdict::HypothesisFailed("condition7c")
    } else if sum_divergent {
        Verdict::ForcedTrivial
    } else {
        Verdict::Inconclusive
    }
}

/// `Σ v(z_k)` over the zeros, with multiplicity. Zeros must lie in `D ∖ K`.
pub fn divergence_sum(v: &TestFunction, zeros: &ZeroSet, opts: &SeriesOptions) -> Result<SeriesReport> {
    let (d, k) = (v.domain(), v.hole());
    let generated = !zeros.is_finite();
    let terms = zeros.iter()?.map(move |(z, m)| {
        // A generated zero rounded onto the boundary, where v vanishes.
        if generated && !d.contains(z) && d.contains_closed(z) && !k.contains(z) {
            return Ok(0.0);
        }
        if !d.contains(z) || k.contains(z) {
            return Err(Error::Hypothesis { condition: "zeros-in-domain", detail: format!("zero {z} is not in D ∖ K") });
        }
        Ok(m as f64 * v.value_at(z)?)
    });
    classify_series(terms, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition6 {
    #[serde(serialize_with = "crate::ext::serialize")]
    pub value: f64,
    pub finite: bool,
    pub method: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition7b {
    pub partial_sums: Vec<PartialSum>,
    pub classification: Classification,
    pub method: String,
    pub terms: usize,
    #[serde(serialize_with = "crate::ext::serialize")]
    pub limit: f64,
    #[serde(serialize_with = "crate::ext::serialize_opt")]
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition7c {
    pub ok: bool,
    pub status: &'static str,
    #[serde(serialize_with = "crate::ext::serialize_opt")]
    pub const_shift: Option<f64>,
    pub worst_node: Option<Point>,
}

/// A finite Blaschke product with the first zeros, nonzero at the origin,
/// showing that an inconclusive verdict cannot be sharpened.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub factors: usize,
    pub abs_at_origin: f64,
    pub majorization_ok: bool,
    #[serde(serialize_with = "crate::ext::serialize_opt")]
    pub const_shift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub version: &'static str,
    pub spacing: f64,
    pub nodes: usize,
    pub test_function_sup: f64,
    pub growth: String,
    pub zeros: String,
    pub series: SeriesOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub condition6: Condition6,
    pub condition7b: Condition7b,
    pub condition7c: Condition7c,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub provenance: Provenance,
}

pub struct VerdictInput<'a> {
    pub v: &'a TestFunction,
    pub growth: &'a GrowthModel,
    pub zeros: &'a ZeroSet,
    pub u: Option<&'a GridFunction>,
    pub series: SeriesOptions,
}

pub const WITNESS_FACTORS: usize = 200;

/// Runs the three checks and the gate.
pub fn uniqueness_verdict(input: &VerdictInput) -> Result<UniquenessReport> {
    let v = input.v;
    let gi: GrowthIntegral = growth_integral(v, input.growth)?;
    let sum = divergence_sum(v, input.zeros, &input.series)?;
    let maj: MajorizationReport = match input.u {
        Some(u) => check_majorization(u, input.growth, v.domain())?,
        None => MajorizationReport::assumed(),
    };
    let verdict = gate(gi.finite, maj.ok, sum.is_divergent());

    let witness = if verdict == Verdict::Inconclusive && input.growth.is_bounded() {
        blaschke_witness(v, input.zeros)?
    } else {
        None
    };
    let lat = v.lattice();
    Ok(UniquenessReport {
        condition6: Condition6 { value: gi.value, finite: gi.finite, method: gi.method },
        condition7b: Condition7b {
            partial_sums: sum.partial_sums.clone(),
            classification: sum.classification,
            method: sum.method.clone(),
            terms: sum.terms,
            limit: sum.limit,
            slope: sum.slope,
        },
        condition7c: Condition7c { ok: maj.ok, status: maj.status, const_shift: maj.const_shift, worst_node: maj.worst_node },
        verdict,
        witness,
        provenance: Provenance {
            version: env!("CARGO_PKG_VERSION"),
            spacing: lat.spacing(),
            nodes: lat.len(),
            test_function_sup: v.sup_bound(),
            growth: input.growth.name(),
            zeros: input.zeros.describe(),
            series: input.series,
        },
    })
}

fn blaschke_witness(v: &TestFunction, zeros: &ZeroSet) -> Result<Option<Witness>> {
    let Shape::Disk { center, radius } = *v.domain().shape() else {
        return Ok(None);
    };
    if center != Point::new(0.0, 0.0) || radius != 1.0 {
        return Ok(None);
    }
    // Factors at zeros rounded onto the circle have modulus one.
    let pts: Vec<Point> = zeros.take(WITNESS_FACTORS)?.into_iter().filter(|z| z.norm() < 1.0).collect();
    if pts.iter().any(|z| z.norm() == 0.0) {
        return Ok(None);
    }
    let b = BlaschkeProduct::new(pts.iter().copied())?;
    let abs_at_origin = b.log_abs(Point::new(0.0, 0.0)).exp();
    let u = GridFunction::sample(*v.lattice(), v.domain(), |p| b.log_abs(p));
    let maj = check_majorization(&u, &GrowthModel::Bounded, v.domain())?;
    Ok(Some(Witness { factors: pts.len(), abs_at_origin, majorization_ok: maj.ok, const_shift: maj.const_shift }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CompactSet, Domain};
    use crate::grid::Lattice;
    use crate::pt;
    use crate::testfn::green_test_function;
    use crate::uniqueness::zeros::{ZeroSequence, ZeroSpec};

    fn setup(cells: usize) -> TestFunction {
        let d = Domain::unit_disk();
        let k = CompactSet::closed_disk(pt(0.0, 0.0), 0.5).unwrap();
        green_test_function(&d, &k, pt(0.0, 0.0), Lattice::covering(d.bbox(), cells).unwrap()).unwrap()
    }

    #[test]
    fn gate_truth_table() {
        for g in [false, true] {
            for m in [false, true] {
                for s in [false, true] {
                    let want = match (g, m, s) {
                        (false, _, _) => Verdict::HypothesisFailed("condition6"),
                        (true, false, _) => Verdict::HypothesisFailed("condition7c"),
                        (true, true, true) => Verdict::ForcedTrivial,
                        (true, true, false) => Verdict::Inconclusive,
                    };
                    assert_eq!(gate(g, m, s), want);
                }
            }
        }
        assert_eq!(Verdict::HypothesisFailed("condition6").to_string(), "HYPOTHESIS_FAILED(condition6)");
    }

    #[test]
    fn divergent_and_convergent_zero_sets() {
        let v = setup(128);
        let opts = SeriesOptions { max_terms: 1 << 17, ..Default::default() };
        let div = ZeroSet::Sequence(ZeroSequence::one_minus_inv_k(3));
        let rep = uniqueness_verdict(&VerdictInput { v: &v, growth: &GrowthModel::Bounded, zeros: &div, u: None, series: opts }).unwrap();
        assert_eq!(rep.verdict, Verdict::ForcedTrivial);
        assert_eq!(rep.condition7c.status, "assumed");
        let conv = ZeroSet::Sequence(ZeroSequence::one_minus_inv_k2(2));
        let rep = uniqueness_verdict(&VerdictInput { v: &v, growth: &GrowthModel::Bounded, zeros: &conv, u: None, series: opts }).unwrap();
        assert_eq!(rep.verdict, Verdict::Inconclusive);
        let w = rep.witness.unwrap();
        let oracle: f64 = (2..2 + WITNESS_FACTORS).map(|k| 1.0 - 1.0 / (k as f64 * k as f64)).product();
        assert!((w.abs_at_origin - oracle).abs() < 1e-12);
        assert!(w.majorization_ok);
    }

    #[test]
    fn geometric_zeros_reaching_the_boundary_in_floating_point() {
        let v = setup(64);
        let z = ZeroSet::Sequence(ZeroSequence::geometric(0.5, 2).unwrap());
        let rep = uniqueness_verdict(&VerdictInput { v: &v, growth: &GrowthModel::Bounded, zeros: &z, u: None, series: SeriesOptions::default() }).unwrap();
        assert_eq!(rep.verdict, Verdict::Inconclusive);
        assert!(rep.condition7b.terms < 60);
        assert!(rep.witness.unwrap().factors < WITNESS_FACTORS);
        let on_circle = ZeroSet::finite([pt(1.0, 0.0)]);
        assert!(divergence_sum(&v, &on_circle, &SeriesOptions::default()).is_err());
    }

    #[test]
    fn radial_growth_fails_condition6() {
        let v = setup(128);
        let g = GrowthModel::radial_power(v.domain(), 1.0).unwrap();
        let z = ZeroSet::finite([pt(0.7, 0.0)]);
        let rep = uniqueness_verdict(&VerdictInput { v: &v, growth: &g, zeros: &z, u: None, series: SeriesOptions::default() }).unwrap();
        assert_eq!(rep.verdict, Verdict::HypothesisFailed("condition6"));
    }

    #[test]
    fn zeros_in_the_hole_are_rejected() {
        let v = setup(64);
        let z = ZeroSet::from_spec(&ZeroSpec::OneMinusInvK { start: Some(2), angle: 0.0 }).unwrap();
        let e = divergence_sum(&v, &z, &SeriesOptions::default());
        assert!(matches!(e, Err(Error::Hypothesis { condition: "zeros-in-domain", .. })));
    }
}
