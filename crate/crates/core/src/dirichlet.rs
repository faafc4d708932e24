//! Dirichlet problems on lattice-sampled domains, Green's functions and
//! harmonic extension into balls.
//!
//! Curved boundaries use the second-order ghost-fluid treatment: a stencil
//! arm that leaves the domain at fraction `θ` of a cell is replaced by the
//! boundary value at the crossing, scaled by `1/θ`. The system stays
//! symmetric positive definite and is solved by conjugate gradients with a
//! modified incomplete Cholesky preconditioner.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{connected_components, Domain, Shape};
use crate::grid::{GridFunction, Lattice};
use crate::Point;

const DIRS: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
const MIN_THETA: f64 = 1e-3;
const TOLERANCE: f64 = 1e-10;

pub struct DirichletProblem<'a> {
    domain: &'a Domain,
    lattice: Lattice,
    data: &'a dyn Fn(Point) -> f64,
}

impl<'a> DirichletProblem<'a> {
    pub fn new(domain: &'a Domain, lattice: Lattice, data: &'a dyn Fn(Point) -> f64) -> Result<Self> {
        if !domain.is_regular() {
            return Err(Error::NotRegular);
        }
        if let Shape::Mask(m) = domain.shape() {
            if *m.lattice() != lattice {
                return Err(Error::DomainMismatch("a mask domain must be solved on its own lattice".into()));
            }
        }
        Ok(DirichletProblem { domain, lattice, data })
    }

    pub fn domain(&self) -> &Domain {
        self.domain
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverStats {
    pub unknowns: usize,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Discrete harmonic function on the domain's nodes, plus ghost values on the
/// first ring of outside nodes for interpolation up to the boundary.
#[derive(Debug, Clone)]
pub struct DirichletSolution {
    values: GridFunction,
    extended: GridFunction,
    stats: SolverStats,
}

impl DirichletSolution {
    pub fn values(&self) -> &GridFunction {
        &self.values
    }

    pub fn extended(&self) -> &GridFunction {
        &self.extended
    }

    pub fn stats(&self) -> SolverStats {
        self.stats
    }

    /// Interpolated value anywhere in the closed domain.
    pub fn value_at(&self, p: Point) -> Result<f64> {
        self.extended.value_at(p)
    }
}

struct Arm {
    theta: f64,
    data: f64,
    outside: usize,
}

pub fn solve_dirichlet(problem: &DirichletProblem) -> Result<DirichletSolution> {
    let lat = problem.lattice;
    let dom = problem.domain;
    let h = lat.spacing();
    let n = lat.len();
    let inside: Vec<bool> = lat.nodes().map(|(_, _, p)| dom.contains(p)).collect();
    let unknowns = inside.iter().filter(|b| **b).count();
    if unknowns == 0 {
        return Err(Error::DegenerateGeometry("no lattice node inside the domain".into()));
    }
    let components = connected_components(&lat, &inside, false);
    if components > 1 {
        return Err(Error::DisconnectedMask { components });
    }

    let mut diag = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut arms: Vec<Vec<Arm>> = (0..n).map(|_| Vec::new()).collect();
    for k in (0..n).filter(|k| inside[*k]) {
        let (i, j) = lat.coords(k);
        let p = lat.node(i, j);
        for (di, dj) in DIRS {
            let (a, b) = lat.offset(i, j, di, dj).ok_or_else(|| {
                Error::DegenerateGeometry(format!("domain node {p} lies on the lattice edge"))
            })?;
            let nb = lat.index(a, b);
            if inside[nb] {
                diag[k] += 1.0;
                continue;
            }
            let step = crate::pt(di as f64 * h, dj as f64 * h);
            let theta = dom.crossing(p, step).unwrap_or(1.0).clamp(MIN_THETA, 1.0);
            let data = (problem.data)(p + step * theta);
            if !data.is_finite() {
                return Err(Error::Precondition(format!("boundary data {data} at {}", p + step * theta)));
            }
            diag[k] += 1.0 / theta;
            rhs[k] += data / theta;
            arms[k].push(Arm { theta, data, outside: nb });
        }
    }

    let (x, stats) = pcg(&lat, &inside, &diag, &rhs, unknowns)?;

    let values = GridFunction::new(lat, inside.clone(), x.clone())?;
    let mut ghost_sum = vec![0.0; n];
    let mut ghost_cnt = vec![0usize; n];
    for k in (0..n).filter(|k| inside[*k]) {
        for arm in &arms[k] {
            ghost_sum[arm.outside] += (arm.data + (arm.theta - 1.0) * x[k]) / arm.theta;
            ghost_cnt[arm.outside] += 1;
        }
    }
    let mut ext_mask = inside;
    let mut ext_vals = x;
    for k in 0..n {
        if ghost_cnt[k] > 0 {
            ext_mask[k] = true;
            ext_vals[k] = ghost_sum[k] / ghost_cnt[k] as f64;
        }
    }
    let extended = GridFunction::new(lat, ext_mask, ext_vals)?;
    Ok(DirichletSolution { values, extended, stats })
}

/// Conjugate gradients with MIC(0) preconditioning for the 5-point matrix
/// with unit off-diagonal couplings.
fn pcg(lat: &Lattice, inside: &[bool], diag: &[f64], rhs: &[f64], unknowns: usize) -> Result<(Vec<f64>, SolverStats)> {
    let n = lat.len();
    let nx = lat.nx();
    let couple_x = |k: usize| inside[k] && (k % nx) + 1 < nx && inside[k + 1];
    let couple_y = |k: usize| inside[k] && k + nx < n && inside[k + nx];

    const TAU: f64 = 0.97;
    const SIGMA: f64 = 0.25;
    let mut precon = vec![0.0; n];
    for k in (0..n).filter(|k| inside[*k]) {
        let mut e = diag[k];
        if k % nx > 0 && couple_x(k - 1) {
            let pi = precon[k - 1];
            let cy = if couple_y(k - 1) { 1.0 } else { 0.0 };
            e -= pi * pi + TAU * cy * pi * pi;
        }
        if k >= nx && couple_y(k - nx) {
            let pj = precon[k - nx];
            let cx = if couple_x(k - nx) { 1.0 } else { 0.0 };
            e -= pj * pj + TAU * cx * pj * pj;
        }
        if e < SIGMA * diag[k] {
            e = diag[k];
        }
        precon[k] = 1.0 / e.sqrt();
    }

    let apply_a = |x: &[f64], out: &mut [f64]| {
        for k in 0..n {
            if !inside[k] {
                out[k] = 0.0;
                continue;
            }
            let mut v = diag[k] * x[k];
            if couple_x(k) {
                v -= x[k + 1];
            }
            if k % nx > 0 && couple_x(k - 1) {
                v -= x[k - 1];
            }
            if couple_y(k) {
                v -= x[k + nx];
            }
            if k >= nx && couple_y(k - nx) {
                v -= x[k - nx];
            }
            out[k] = v;
        }
    };
    let apply_m = |r: &[f64], q: &mut [f64], z: &mut [f64]| {
        for k in 0..n {
            if !inside[k] {
                q[k] = 0.0;
                continue;
            }
            let mut t = r[k];
            if k % nx > 0 && couple_x(k - 1) {
                t += precon[k - 1] * q[k - 1];
            }
            if k >= nx && couple_y(k - nx) {
                t += precon[k - nx] * q[k - nx];
            }
            q[k] = t * precon[k];
        }
        for k in (0..n).rev() {
            if !inside[k] {
                z[k] = 0.0;
                continue;
            }
            let mut t = q[k];
            if couple_x(k) {
                t += precon[k] * z[k + 1];
            }
            if couple_y(k) {
                t += precon[k] * z[k + nx];
            }
            z[k] = t * precon[k];
        }
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    let mut x = vec![0.0; n];
    let bnorm = dot(rhs, rhs).sqrt();
    if bnorm == 0.0 {
        return Ok((x, SolverStats { unknowns, iterations: 0, relative_residual: 0.0 }));
    }
    let mut r = rhs.to_vec();
    let mut q = vec![0.0; n];
    let mut z = vec![0.0; n];
    apply_m(&r, &mut q, &mut z);
    let mut s = z.clone();
    let mut rho = dot(&z, &r);
    let mut as_ = vec![0.0; n];
    let max_iter = 10 * unknowns.max(100);
    let mut rel = 1.0;
    for it in 1..=max_iter {
        apply_a(&s, &mut as_);
        let alpha = rho / dot(&s, &as_);
        for k in 0..n {
            x[k] += alpha * s[k];
            r[k] -= alpha * as_[k];
        }
        rel = dot(&r, &r).sqrt() / bnorm;
        if rel <= TOLERANCE {
            return Ok((x, SolverStats { unknowns, iterations: it, relative_residual: rel }));
        }
        apply_m(&r, &mut q, &mut z);
        let rho_new = dot(&z, &r);
        let beta = rho_new / rho;
        rho = rho_new;
        for k in 0..n {
            s[k] = z[k] + beta * s[k];
        }
    }
    Err(Error::SolverStalled { residual: rel, iterations: max_iter })
}

/// Green's function `g(·, x0) = U - log|· - x0|`, with `U` the harmonic
/// function whose boundary values are `log|ζ - x0|`.
#[derive(Debug, Clone)]
pub struct GreenFunction {
    domain: Domain,
    pole: Point,
    regular_part: DirichletSolution,
}

impl GreenFunction {
    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn pole(&self) -> Point {
        self.pole
    }

    pub fn lattice(&self) -> &Lattice {
        self.regular_part.values.lattice()
    }

    pub fn stats(&self) -> SolverStats {
        self.regular_part.stats
    }

    /// Harmonic part `U`, equal to `g + log|· - x0|`.
    pub fn regular_part(&self) -> &DirichletSolution {
        &self.regular_part
    }

    /// `g(p, x0)`, zero outside the domain and `+inf` at the pole.
    pub fn value_at(&self, p: Point) -> f64 {
        if !self.domain.contains(p) {
            return 0.0;
        }
        let d = (p - self.pole).norm();
        if d == 0.0 {
            return f64::INFINITY;
        }
        let u = self
            .regular_part
            .value_at(p)
            .expect("interior points are covered by the extended solution");
        (u - d.ln()).max(0.0)
    }

    /// Nodal values on the whole lattice, zero outside the domain. A node
    /// sitting exactly on the pole is left out of the mask.
    pub fn grid(&self) -> GridFunction {
        let lat = *self.lattice();
        let u = &self.regular_part.values;
        let tiny = 1e-12 * lat.spacing();
        let mask: Vec<bool> = (0..lat.len()).map(|k| (lat.node_at(k) - self.pole).norm() > tiny).collect();
        GridFunction::from_fn(lat, mask, |p| {
            let k = lat.nearest(p).map(|(i, j)| lat.index(i, j));
            match k.and_then(|k| u.get_idx(k)) {
                Some(v) => (v - (p - self.pole).norm().ln()).max(0.0),
                None => 0.0,
            }
        })
    }
}

pub fn green_function(domain: &Domain, lattice: Lattice, pole: Point) -> Result<GreenFunction> {
    if !domain.contains(pole) {
        return Err(Error::PoleNotInterior(pole));
    }
    let data = move |z: Point| (z - pole).norm().ln();
    let problem = DirichletProblem::new(domain, lattice, &data)?;
    let regular_part = solve_dirichlet(&problem)?;
    Ok(GreenFunction { domain: domain.clone(), pole, regular_part })
}

/// `u` outside `B(x0, r0)` and the harmonic function with boundary values
/// `u|∂B` inside it.
pub fn harmonic_extension_in_ball(u: &GridFunction, x0: Point, r0: f64) -> Result<GridFunction> {
    let lat = *u.lattice();
    let h = lat.spacing();
    let ball = Domain::disk(x0, r0)?;
    for (k, p) in (0..lat.len()).map(|k| (k, lat.node_at(k))) {
        if (p - x0).norm() <= r0 + 1.5 * h && !u.get_idx(k).is_some_and(|v| v.is_finite() || ball.contains(p)) {
            return Err(Error::Precondition(format!(
                "closed ball B({x0}, {r0}) is not compactly inside the finite part of u"
            )));
        }
    }
    let data = |z: Point| u.value_at(z).unwrap_or(f64::NAN);
    let problem = DirichletProblem::new(&ball, lat, &data)?;
    let sol = solve_dirichlet(&problem)?;
    let values: Vec<f64> = (0..lat.len())
        .map(|k| sol.values.get_idx(k).or_else(|| u.get_idx(k)).unwrap_or(f64::NAN))
        .collect();
    GridFunction::new(lat, u.mask().to_vec(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pt;

    fn disk_lattice(cells: usize) -> Lattice {
        Lattice::covering(Domain::unit_disk().bbox(), cells).unwrap()
    }

    fn solve(dom: &Domain, lat: Lattice, g: impl Fn(Point) -> f64) -> DirichletSolution {
        let p = DirichletProblem::new(dom, lat, &g).unwrap();
        solve_dirichlet(&p).unwrap()
    }

    #[test]
    fn constant_data_gives_constant() {
        let s = solve(&Domain::unit_disk(), disk_lattice(64), |_| 1.0);
        assert!(s.values().iter().all(|(_, _, v)| (v - 1.0).abs() < 1e-9));
        assert!(s.stats().relative_residual <= 1e-10);
    }

    #[test]
    fn linear_data_is_reproduced() {
        let s = solve(&Domain::unit_disk(), disk_lattice(128), |p| p.re);
        let err = s.values().iter().map(|(_, p, v)| (v - p.re).abs()).fold(0.0, f64::max);
        assert!(err < 1e-7, "{err}");
    }

    #[test]
    fn harmonic_log_has_second_order_error() {
        let mut errs = Vec::new();
        for cells in [32, 64, 128] {
            let s = solve(&Domain::unit_disk(), disk_lattice(cells), |p| (p - pt(2.0, 0.0)).norm().ln());
            errs.push((s.value_at(pt(0.0, 0.0)).unwrap() - 2f64.ln()).abs());
        }
        assert!(errs[2] < 1e-4, "{errs:?}");
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
    }

    #[test]
    fn rectangle_and_annulus_domains() {
        let rect = Domain::rectangle(pt(-1.0, -0.5), pt(1.0, 0.5)).unwrap();
        let lat = Lattice::covering(rect.bbox(), 64).unwrap();
        let f = |p: Point| (p * p).re;
        let s = solve(&rect, lat, f);
        assert!(s.values().iter().all(|(_, p, v)| (v - f(p)).abs() < 1e-3));

        let ann = Domain::annulus(pt(0.0, 0.0), 0.4, 1.0).unwrap();
        let s = solve(&ann, disk_lattice(128), |p| p.norm().ln());
        let err = s.values().iter().map(|(_, p, v)| (v - p.norm().ln()).abs()).fold(0.0, f64::max);
        assert!(err < 5e-3, "{err}");
    }

    #[test]
    fn maximum_principle() {
        let g = |p: Point| (3.0 * p.arg()).sin();
        let s = solve(&Domain::unit_disk(), disk_lattice(64), g);
        assert!(s.values().iter().all(|(_, _, v)| (-1.0 - 1e-9..=1.0 + 1e-9).contains(&v)));
    }

    #[test]
    fn irregular_and_disconnected_domains_are_rejected() {
        let lat = Lattice::new(pt(0.0, 0.0), 1.0, 5, 5).unwrap();
        let mut inside = vec![false; 25];
        inside[lat.index(2, 2)] = true;
        let dom = Domain::mask(lat, inside, false).unwrap();
        let g = |_: Point| 0.0;
        assert!(matches!(DirichletProblem::new(&dom, lat, &g), Err(Error::NotRegular)));

        let ann = Domain::annulus(pt(0.0, 0.0), 0.5, 0.52).unwrap();
        let p = DirichletProblem::new(&ann, disk_lattice(16), &g).unwrap();
        assert!(matches!(solve_dirichlet(&p), Err(Error::DisconnectedMask { .. }) | Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn mask_domain_solves_on_its_lattice() {
        let lat = Lattice::new(pt(0.0, 0.0), 0.1, 12, 12).unwrap();
        let inside: Vec<bool> = lat.nodes().map(|(i, j, _)| (1..11).contains(&i) && (1..11).contains(&j)).collect();
        let dom = Domain::mask(lat, inside, true).unwrap();
        let s = solve(&dom, lat, |p| p.re - 2.0 * p.im);
        assert!(s.values().iter().all(|(_, p, v)| (v - (p.re - 2.0 * p.im)).abs() < 1e-8));
    }

    #[test]
    fn green_disk_center_matches_closed_form() {
        let g = green_function(&Domain::unit_disk(), disk_lattice(256), pt(0.0, 0.0)).unwrap();
        let grid = g.grid();
        let h = grid.spacing();
        let err = grid
            .iter()
            .filter(|(_, p, _)| p.norm() > 3.0 * h && p.norm() < 1.0)
            .map(|(_, p, v)| (v + p.norm().ln()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-2, "{err}");
        assert_eq!(g.value_at(pt(1.5, 0.0)), 0.0);
    }

    #[test]
    fn green_symmetry_and_mobius_form() {
        let lat = disk_lattice(128);
        let a = pt(0.5, 0.0);
        let b = pt(-0.2, 0.4);
        let ga = green_function(&Domain::unit_disk(), lat, a).unwrap();
        let gb = green_function(&Domain::unit_disk(), lat, b).unwrap();
        assert!((ga.value_at(b) - gb.value_at(a)).abs() < 1e-2);
        let mobius = |z: Point| ((pt(1.0, 0.0) - a.conj() * z) / (z - a)).norm().ln();
        for z in [pt(0.0, 0.0), pt(-0.6, 0.1), pt(0.5, 0.45), pt(0.9, 0.0)] {
            assert!((ga.value_at(z) - mobius(z)).abs() < 2e-2, "{z}");
        }
    }

    #[test]
    fn green_pole_must_be_interior() {
        assert!(matches!(
            green_function(&Domain::unit_disk(), disk_lattice(32), pt(1.0, 0.0)),
            Err(Error::PoleNotInterior(_))
        ));
    }

    #[test]
    fn extension_of_log_is_constant_in_ball() {
        let lat = disk_lattice(128);
        let u = GridFunction::sample(lat, &Domain::unit_disk(), |p| p.norm().ln());
        let u0 = harmonic_extension_in_ball(&u, pt(0.0, 0.0), 0.4).unwrap();
        for (k, p, v) in u0.iter() {
            if p.norm() < 0.4 {
                assert!((v - 0.4f64.ln()).abs() < 1e-3, "{p} {v}");
                assert!(v >= u.get_idx(k).unwrap() - 1e-9);
            } else {
                assert_eq!(v, u.get_idx(k).unwrap());
            }
        }
    }

    #[test]
    fn extension_fixes_harmonic_functions() {
        let lat = disk_lattice(128);
        let u = GridFunction::sample(lat, &Domain::unit_disk(), |p| (p * p).im + p.re);
        let u0 = harmonic_extension_in_ball(&u, pt(0.1, 0.1), 0.5).unwrap();
        let err = u0.iter().map(|(k, _, v)| (v - u.get_idx(k).unwrap()).abs()).fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn extension_requires_contained_ball() {
        let u = GridFunction::sample(disk_lattice(64), &Domain::unit_disk(), |p| p.re);
        assert!(harmonic_extension_in_ball(&u, pt(0.5, 0.0), 0.6).is_err());
    }
}
