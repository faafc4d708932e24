//! Sweeping a subharmonic function and its Riesz measure out of a ball, and
//! the comparison bound that follows from it.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::dirichlet::harmonic_extension_in_ball;
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::grid::{discrete_laplacian, harmonicity_check, AtomicMeasure, GridFunction, SubmeanOptions};
use crate::jensen::JensenPotential;
use crate::kernels::riesz_constant;
use crate::Point;

#[derive(Debug, Clone)]
pub struct Sweep {
    /// `u` off the ball, harmonic extension inside.
    pub u0: GridFunction,
    /// `ν_u` off the closed ball plus the swept layer on the sphere.
    pub nu_u0: AtomicMeasure,
    pub sphere: AtomicMeasure,
    /// `ν_u(B̄)` as given by the input measure.
    pub swept_mass: f64,
    /// Sphere mass from the lattice flux of `u0`.
    pub sphere_mass_flux: f64,
    /// Sphere mass from Poisson-kernel balayage of the input atoms.
    pub sphere_mass_poisson: f64,
}

fn sphere_points(x0: Point, r0: f64, n: usize) -> impl Iterator<Item = Point> {
    (0..n).map(move |k| x0 + Point::from_polar(r0, TAU * (k as f64 + 0.5) / n as f64))
}

fn sphere_resolution(r0: f64, h: f64) -> usize {
    ((4.0 * TAU * r0 / h).ceil() as usize).max(64)
}

/// Band `| |x - x0| - r0 | <= 1.5 h` used for the flux.
fn in_band(p: Point, x0: Point, r0: f64, h: f64) -> bool {
    ((p - x0).norm() - r0).abs() <= 1.5 * h
}

pub fn sweep_out_ball(u: &GridFunction, nu_u: &AtomicMeasure, x0: Point, r0: f64) -> Result<Sweep> {
    let u0 = harmonic_extension_in_ball(u, x0, r0)?;
    let h = u.spacing();
    let c2 = riesz_constant(2)?;
    let inside = |p: Point| (p - x0).norm() <= r0;

    let lap = discrete_laplacian(&u0);
    let mut band_mass = 0.0;
    for (_, p, l) in lap.iter() {
        if in_band(p, x0, r0, h) {
            band_mass += c2 * l * h * h;
        }
    }
    let outside_band = nu_u.mass_where(|p| !inside(p) && in_band(p, x0, r0, h));
    let sphere_mass_flux = band_mass - outside_band;

    let n = sphere_resolution(r0, h);
    let zeta: Vec<Point> = sphere_points(x0, r0, n).collect();
    let mut weights = vec![0.0; n];
    let mut swept_mass = 0.0;
    for (p, w) in nu_u.support().filter(|(p, _)| inside(*p)) {
        swept_mass += w;
        let d2 = (p - x0).norm_sqr();
        if r0 * r0 - d2 <= 1e-12 * r0 * r0 {
            let k = zeta
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - p).norm().total_cmp(&(b.1 - p).norm()))
                .map(|(k, _)| k)
                .expect("sphere has nodes");
            weights[k] += w;
            continue;
        }
        let kernel: Vec<f64> = zeta.iter().map(|z| (r0 * r0 - d2) / (z - p).norm_sqr()).collect();
        let total: f64 = kernel.iter().sum();
        for (acc, k) in weights.iter_mut().zip(&kernel) {
            *acc += w * k / total;
        }
    }
    let sphere_mass_poisson: f64 = weights.iter().sum();
    let scale = if sphere_mass_poisson > 0.0 { sphere_mass_flux.max(0.0) / sphere_mass_poisson } else { 0.0 };
    let sphere = AtomicMeasure::from_atoms(zeta.into_iter().zip(weights.into_iter().map(|w| w * scale)).filter(|(_, w)| *w > 0.0))?;
    let nu_u0 = nu_u.restrict(|p| !inside(p)).plus(&sphere)?;
    Ok(Sweep { u0, nu_u0, sphere, swept_mass, sphere_mass_flux, sphere_mass_poisson })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub ok: bool,
    pub value: f64,
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonHypotheses {
    /// `sup (u - M)` is finite.
    pub majorization: HypothesisCheck,
    /// `sup_{∂B} V <= b`.
    pub sphere_bound: HypothesisCheck,
    /// Pole coefficient of `V` equals 1.
    pub normalization: HypothesisCheck,
    /// Largest discrete Laplacian of `V` on the punctured ball.
    pub harmonic_on_punctured_ball: HypothesisCheck,
}

impl ComparisonHypotheses {
    pub fn all_ok(&self) -> bool {
        self.majorization.ok && self.sphere_bound.ok && self.normalization.ok && self.harmonic_on_punctured_ball.ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub c0: f64,
    pub c1: f64,
    pub u0_center: f64,
    pub m0_center: f64,
    pub nu_m_ball: f64,
    pub holds: bool,
    pub hypotheses: ComparisonHypotheses,
}

pub struct ComparisonInput<'a> {
    pub u: &'a GridFunction,
    pub m: &'a GridFunction,
    pub nu_u: &'a AtomicMeasure,
    pub nu_m: &'a AtomicMeasure,
    pub v: &'a JensenPotential,
    pub x0: Point,
    pub r0: f64,
    pub b: f64,
}

/// `∫_{D∖B̄} V dν_u <= ∫_{D∖B̄} V dν_M + C` with
/// `C = b ν_M(B̄) + sup(u - M) - u0(x0) + M0(x0)`.
pub fn comparison_integral_bound(input: &ComparisonInput, tol: f64) -> Result<ComparisonReport> {
    let ComparisonInput { u, m, nu_u, nu_m, v, x0, r0, b } = *input;
    u.same_lattice(m)?;
    let h = u.spacing();
    let lat = *u.lattice();
    if (0..lat.len()).any(|k| (lat.node_at(k) - x0).norm() <= r0 + 1.5 * h && !(u.mask()[k] && m.mask()[k])) {
        return Err(Error::Precondition(format!("closed ball B({x0}, {r0}) is not inside the grid domain")));
    }
    let c0 = u
        .iter()
        .filter_map(|(k, _, a)| m.get_idx(k).map(|mm| (a, mm)))
        .filter(|(a, mm)| a.is_finite() && mm.is_finite())
        .map(|(a, mm)| a - mm)
        .fold(f64::NEG_INFINITY, f64::max);
    let c0 = if c0 == f64::NEG_INFINITY { 0.0 } else { c0 };

    let n = sphere_resolution(r0, h);
    let circle_mean = |f: &GridFunction| -> Result<f64> {
        let mut s = 0.0;
        for z in sphere_points(x0, r0, n) {
            s += f.value_at(z)?;
        }
        Ok(s / n as f64)
    };
    let u0_center = circle_mean(u)?;
    let m0_center = circle_mean(m)?;
    let c1 = c0 - u0_center + m0_center;
    let closed_ball = |p: Point| (p - x0).norm() <= r0;
    let nu_m_ball = nu_m.mass_where(closed_ball);
    let constant = b * nu_m_ball + c1;

    let lhs = nu_u.restrict(|p| !closed_ball(p)).integrate(v)?;
    let rhs = nu_m.restrict(|p| !closed_ball(p)).integrate(v)? + constant;

    let sphere_sup = sphere_points(x0, r0, n).map(|z| v.value_at(z)).fold(f64::NEG_INFINITY, f64::max);
    let ring = Domain::annulus(x0, 0.05f64.max(3.0 * h), r0)?;
    let vg = GridFunction::sample(lat, &ring, |p| v.value_at(p));
    let harm = harmonicity_check(&vg, &SubmeanOptions::default());
    let hypotheses = ComparisonHypotheses {
        majorization: HypothesisCheck { ok: c0.is_finite(), value: c0, limit: f64::INFINITY },
        sphere_bound: HypothesisCheck { ok: sphere_sup <= b + tol, value: sphere_sup, limit: b },
        normalization: HypothesisCheck {
            ok: (v.normalization() - 1.0).abs() <= 1e-2,
            value: v.normalization(),
            limit: 1.0,
        },
        harmonic_on_punctured_ball: HypothesisCheck {
            ok: harm.passed,
            value: harm.max_abs_laplacian,
            limit: harm.worst.map_or(0.0, |w| 4.0 * w.tol / (h * h)),
        },
    };
    Ok(ComparisonReport {
        lhs,
        rhs,
        constant,
        c0,
        c1,
        u0_center,
        m0_center,
        nu_m_ball,
        holds: lhs <= rhs + tol,
        hypotheses,
    })
}
