//! The chain from a test function to the integral bound: continue `v`
//! through the hole, normalize the pole, truncate, and compare.

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::Serialize;

use crate::balayage::{comparison_integral_bound, ComparisonInput, ComparisonReport};
use crate::error::Result;
use crate::grid::{AtomicMeasure, GridFunction};
use crate::jensen::JensenPotential;
use crate::testfn::{continue_test_function, TestFunction};
use crate::Point;

use super::growth::GrowthModel;

pub struct TraceInput<'a> {
    pub v: &'a TestFunction,
    pub growth: &'a GrowthModel,
    pub u: &'a GridFunction,
    pub nu_u: &'a AtomicMeasure,
    pub x0: Point,
    pub r0: f64,
    /// Truncations `1/n` for `n = 1, 2, 4, ..., 2^(levels-1)`.
    pub levels: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub n: u64,
    pub lhs: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundTrace {
    /// Pole coefficient of the continued test function.
    pub c: f64,
    pub b: f64,
    pub comparison: ComparisonReport,
    pub rows: Vec<TraceRow>,
    pub sup_lhs: f64,
    /// Every row satisfies `lhs <= bound`.
    pub holds: bool,
}

const SPHERE_SAMPLES: usize = 1024;

pub fn contradiction_bound_trace(input: &TraceInput) -> Result<BoundTrace> {
    let TraceInput { v, growth, u, nu_u, x0, r0, levels } = *input;
    let cont = Arc::new(continue_test_function(v, x0, r0)?);
    let c = cont.c;
    let bb = v.domain().bbox();
    let hull = [bb.min, bb.max, Point::new(bb.min.re, bb.max.im), Point::new(bb.max.re, bb.min.im)]
        .iter()
        .map(|q| (q - x0).norm())
        .fold(0.0, f64::max);
    let cc = cont.clone();
    let big_v = JensenPotential::from_fn(move |p| cc.value_at(p).unwrap_or(0.0) / c, x0, 1.0, hull)?;

    let b = (0..SPHERE_SAMPLES)
        .map(|j| big_v.value_at(x0 + Point::from_polar(r0, TAU * j as f64 / SPHERE_SAMPLES as f64)))
        .fold(f64::NEG_INFINITY, f64::max);
    let m = growth.grid(*u.lattice(), v.domain());
    let nu_m = growth.riesz_measure()?;
    let comparison = comparison_integral_bound(
        &ComparisonInput { u, m: &m, nu_u, nu_m: &nu_m, v: &big_v, x0, r0, b },
        1e-9,
    )?;

    let outside = |p: Point| (p - x0).norm() > r0;
    let nu_u_out = nu_u.restrict(outside);
    let nu_m_out = nu_m.restrict(outside);
    let mut rows = Vec::with_capacity(levels as usize);
    for j in 0..levels {
        let n = 1u64 << j;
        let t = 1.0 / n as f64;
        let vn = |p: Point| (big_v.value_at(p) - t).max(0.0);
        let lhs = nu_u_out.integrate(&vn)?;
        let bound = nu_m_out.integrate(&vn)? + comparison.constant;
        rows.push(TraceRow { n, lhs, bound });
    }
    let sup_lhs = rows.iter().map(|r| r.lhs).fold(0.0, f64::max);
    let holds = rows.iter().all(|r| r.lhs <= r.bound + 1e-9);
    Ok(BoundTrace { c, b, comparison, rows, sup_lhs, holds })
}
