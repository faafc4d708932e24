//! Gluing `max{v, v0}` on `O` with `v0` on `O0 ∖ O`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::Point;

const DIRS: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollarCheck {
    pub nodes: usize,
    pub tol: f64,
    /// Largest `v - v0` on the collar.
    pub worst_excess: f64,
    pub worst_point: Option<Point>,
}

#[derive(Debug, Clone)]
pub struct Glued {
    pub values: GridFunction,
    pub collar: CollarCheck,
}

/// Default collar tolerance `10 h`.
pub fn default_tolerance(h: f64) -> f64 {
    10.0 * h
}

/// Glues `v` (masked on `O`) into `v0` (masked on `O0 ⊇ O`). Nodes of `O`
/// with a lattice neighbour in `O0 ∖ O` form the collar where `v <= v0 + tol`
/// stands in for the boundary limsup condition.
pub fn glue(v: &GridFunction, v0: &GridFunction, tol: Option<f64>) -> Result<Glued> {
    v.same_lattice(v0)?;
    let lat = *v.lattice();
    let tol = tol.unwrap_or_else(|| default_tolerance(lat.spacing()));
    if let Some((_, p, _)) = v.iter().find(|(k, _, _)| !v0.mask()[*k]) {
        return Err(Error::DomainMismatch(format!("node {p} of O is not in O0")));
    }

    let mut collar = CollarCheck { nodes: 0, tol, worst_excess: f64::NEG_INFINITY, worst_point: None };
    for (k, p, a) in v.iter() {
        let (i, j) = lat.coords(k);
        let on_collar = DIRS.iter().any(|&(di, dj)| {
            lat.offset(i, j, di, dj).is_some_and(|(x, y)| {
                let n = lat.index(x, y);
                v0.mask()[n] && !v.mask()[n]
            })
        });
        if !on_collar {
            continue;
        }
        collar.nodes += 1;
        let b = v0.get_idx(k).expect("O is inside O0");
        let excess = if a == f64::NEG_INFINITY || b == f64::INFINITY { f64::NEG_INFINITY } else { a - b };
        if excess > collar.worst_excess {
            collar.worst_excess = excess;
            collar.worst_point = Some(p);
        }
    }
    if collar.worst_excess > tol {
        return Err(Error::GluingHypothesis {
            point: collar.worst_point.expect("excess comes from a node"),
            excess: collar.worst_excess,
            tol,
        });
    }

    let values: Vec<f64> = (0..lat.len())
        .map(|k| match (v.get_idx(k), v0.get_idx(k)) {
            (Some(a), Some(b)) => a.max(b),
            (None, Some(b)) => b,
            _ => f64::NAN,
        })
        .collect();
    let values = GridFunction::new(lat, v0.mask().to_vec(), values)?;
    Ok(Glued { values, collar })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use crate::grid::{discrete_submean_test, Lattice, SubmeanOptions};
    use crate::pt;
    use proptest::prelude::*;

    fn lat() -> Lattice {
        Lattice::covering(Domain::unit_disk().bbox(), 64).unwrap()
    }

    #[test]
    fn dominated_v_collapses_to_v0() {
        let d = Domain::unit_disk();
        let v0 = GridFunction::sample(lat(), &d, |p| p.norm_sqr());
        let v = GridFunction::sample(lat(), &Domain::disk(pt(0.0, 0.0), 0.5).unwrap(), |p| p.norm_sqr() - 1.0);
        let g = glue(&v, &v0, None).unwrap();
        assert_eq!(g.values, v0);
        assert!(g.collar.nodes > 0);
    }

    #[test]
    fn idempotent_on_equal_inputs() {
        let v = GridFunction::sample(lat(), &Domain::unit_disk(), |p| p.re);
        assert_eq!(glue(&v, &v, None).unwrap().values, v);
    }

    #[test]
    fn collar_violation_is_an_error() {
        let d = Domain::unit_disk();
        let v0 = GridFunction::sample(lat(), &d, |_| 0.0);
        let v = GridFunction::sample(lat(), &Domain::disk(pt(0.0, 0.0), 0.5).unwrap(), |_| 1.0);
        match glue(&v, &v0, None) {
            Err(Error::GluingHypothesis { excess, .. }) => assert!((excess - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn o_outside_o0_is_rejected() {
        let v0 = GridFunction::sample(lat(), &Domain::disk(pt(0.0, 0.0), 0.5).unwrap(), |_| 0.0);
        let v = GridFunction::sample(lat(), &Domain::unit_disk(), |_| 0.0);
        assert!(matches!(glue(&v, &v0, None), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn glued_max_is_subharmonic() {
        let l = Lattice::covering(Domain::unit_disk().bbox(), 128).unwrap();
        let v0 = GridFunction::sample(l, &Domain::unit_disk(), |p| 0.5 * (p.norm_sqr() - 0.25));
        let v = GridFunction::sample(l, &Domain::disk(pt(0.0, 0.0), 0.5).unwrap(), |p| (p - pt(0.1, 0.0)).norm().ln() + 0.2);
        let g = glue(&v, &v0, Some(1.0)).unwrap();
        let rep = discrete_submean_test(&g.values.restrict(|p| (p - pt(0.1, 0.0)).norm() > 0.05), &SubmeanOptions::default());
        assert!(rep.passed, "{:?}", rep.worst);
    }

    proptest! {
        #[test]
        fn output_dominates_and_is_monotone(shift in 0.0f64..0.3, bump in 0.0f64..0.5) {
            let d = Domain::unit_disk();
            let inner = Domain::disk(pt(0.0, 0.0), 0.6).unwrap();
            let v0 = GridFunction::sample(lat(), &d, |p| 1.0 - p.norm_sqr());
            let v = GridFunction::sample(lat(), &inner, |p| 0.8 - shift + p.re);
            let w = v.map(|x| x + bump);
            let gv = glue(&v, &v0, Some(10.0)).unwrap().values;
            let gw = glue(&w, &v0, Some(10.0)).unwrap().values;
            for (k, _, x) in gv.iter() {
                prop_assert!(x >= v0.get_idx(k).unwrap());
                if let Some(a) = v.get_idx(k) {
                    prop_assert!(x >= a);
                }
                prop_assert!(gw.get_idx(k).unwrap() >= x);
            }
        }
    }
}
