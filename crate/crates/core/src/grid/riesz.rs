use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{discrete_laplacian, Atom, AtomicMeasure, Density, GridFunction, Lattice};
use crate::kernels::riesz_constant;
use crate::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct RieszOptions {
    /// Declared logarithmic poles; nodes holding `-inf` are added automatically.
    pub poles: Vec<Point>,
    /// Physical half-width of the excised square around each pole.
    pub pole_radius: f64,
    /// Minimum half-width in cells.
    pub min_cells: usize,
}

impl Default for RieszOptions {
    fn default() -> Self {
        RieszOptions { poles: Vec::new(), pole_radius: 0.05, min_cells: 2 }
    }
}

impl RieszOptions {
    pub fn with_poles(poles: impl IntoIterator<Item = Point>) -> Self {
        RieszOptions { poles: poles.into_iter().collect(), ..Default::default() }
    }

    fn half_width(&self, lat: &Lattice) -> usize {
        ((self.pole_radius / lat.spacing()).round() as usize).max(self.min_cells)
    }
}

/// Square of nodes `|i - ic| <= r`, `|j - jc| <= r` removed from the stencil.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExcisionBox {
    pub ic: usize,
    pub jc: usize,
    pub r: usize,
}

impl ExcisionBox {
    pub fn contains(&self, i: usize, j: usize) -> bool {
        i.abs_diff(self.ic) <= self.r && j.abs_diff(self.jc) <= self.r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleCharge {
    pub point: Point,
    pub mass: f64,
    pub excision: ExcisionBox,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RieszExtraction {
    pub measure: AtomicMeasure,
    pub charges: Vec<PoleCharge>,
    /// Mass removed by clamping negative Laplacian values.
    pub clamped_mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RieszMeasure {
    Finite(RieszExtraction),
    /// The measure of `u ≡ -inf`, which is `+inf` on every set.
    Infinite,
}

impl RieszMeasure {
    pub fn finite(self) -> Result<RieszExtraction> {
        match self {
            RieszMeasure::Finite(r) => Ok(r),
            RieszMeasure::Infinite => Err(Error::InvalidMeasure("Riesz measure of the constant -inf".into())),
        }
    }
}

/// `Σ (u_out - u_in)` over the lattice edges leaving the box, which by the
/// discrete divergence theorem equals `h^2 Σ_box Δ_h u`.
pub fn discrete_flux(u: &GridFunction, b: &ExcisionBox) -> Result<f64> {
    let lat = u.lattice();
    let r = b.r as isize;
    let mut flux = 0.0;
    let mut edge = |i_in: usize, j_in: usize, di: isize, dj: isize| -> Result<()> {
        let (io, jo) = lat
            .offset(i_in, j_in, di, dj)
            .ok_or_else(|| Error::Precondition("excision box reaches the lattice edge".into()))?;
        let vin = u.get(i_in, j_in).filter(|v| v.is_finite());
        let vout = u.get(io, jo).filter(|v| v.is_finite());
        match (vin, vout) {
            (Some(a), Some(b)) => {
                flux += b - a;
                Ok(())
            }
            _ => Err(Error::Precondition(format!(
                "excision box around {} is not surrounded by finite values inside the mask",
                lat.node(i_in, j_in)
            ))),
        }
    };
    for s in -r..=r {
        let (ic, jc) = (b.ic as isize, b.jc as isize);
        let col = |d: isize| (ic + d) as usize;
        let row = |d: isize| (jc + d) as usize;
        edge(col(r), row(s), 1, 0)?;
        edge(col(-r), row(s), -1, 0)?;
        edge(col(s), row(r), 0, 1)?;
        edge(col(s), row(-r), 0, -1)?;
    }
    Ok(flux)
}

/// Riesz measure `c_2 Δu` of a grid-sampled subharmonic function.
///
/// Each pole becomes an atom whose mass is `c_2` times the discrete flux out of
/// its excision box. Off the boxes the density is `c_2 Δ_h u` clamped at 0.
pub fn riesz_measure(u: &GridFunction, opts: &RieszOptions) -> Result<RieszMeasure> {
    let lat = *u.lattice();
    if u.masked_count() == 0 || u.iter().all(|(_, _, v)| v == f64::NEG_INFINITY) {
        return Ok(RieszMeasure::Infinite);
    }
    let c2 = riesz_constant(2)?;
    let r = opts.half_width(&lat);

    let mut centers: Vec<(usize, usize, Point)> = Vec::new();
    let mut add = |i: usize, j: usize, p: Point| {
        if !centers.iter().any(|c| c.0 == i && c.1 == j) {
            centers.push((i, j, p));
        }
    };
    for p in &opts.poles {
        let (i, j) = lat
            .nearest(*p)
            .filter(|&(i, j)| u.in_mask(i, j))
            .ok_or(Error::PoleNotInterior(*p))?;
        add(i, j, *p);
    }
    for (k, p, v) in u.iter() {
        if v == f64::NEG_INFINITY {
            let (i, j) = lat.coords(k);
            add(i, j, p);
        }
    }
    // -inf nodes inside an existing box need no box of their own.
    let declared = opts.poles.len();
    let mut boxes: Vec<(ExcisionBox, Point)> = Vec::new();
    for (n, (i, j, p)) in centers.into_iter().enumerate() {
        let b = ExcisionBox { ic: i, jc: j, r };
        if n >= declared && boxes.iter().any(|(o, _)| o.contains(i, j)) {
            continue;
        }
        if let Some((_, q)) = boxes.iter().find(|(o, _)| o.ic.abs_diff(i).max(o.jc.abs_diff(j)) <= 2 * r + 1) {
            return Err(Error::Precondition(format!(
                "poles {q} and {p} are closer than the excision width {:.4}",
                (2 * r + 2) as f64 * lat.spacing()
            )));
        }
        boxes.push((b, p));
    }

    let mut charges = Vec::with_capacity(boxes.len());
    for (b, p) in &boxes {
        let mass = c2 * discrete_flux(u, b)?;
        charges.push(PoleCharge { point: *p, mass, excision: *b });
    }

    let lap = discrete_laplacian(u);
    let area = lat.cell_area();
    let mut dens = vec![0.0; lat.len()];
    let mut clamped = 0.0;
    for (k, _, l) in lap.iter() {
        let (i, j) = lat.coords(k);
        if boxes.iter().any(|(b, _)| b.contains(i, j)) {
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
    for c in &charges {
        if c.mass < 0.0 {
            clamped += -c.mass;
        } else {
            atoms.push(Atom { point: c.point, weight: c.mass });
        }
    }
    let measure = AtomicMeasure::new(atoms, Some(Density::new(lat, dens)?))?;
    Ok(RieszMeasure::Finite(RieszExtraction { measure, charges, clamped_mass: clamped }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use crate::pt;

    fn disk_grid(cells: usize, f: impl Fn(Point) -> f64) -> GridFunction {
        let lat = Lattice::covering(Domain::unit_disk().bbox(), cells).unwrap();
        GridFunction::sample(lat, &Domain::unit_disk(), f)
    }

    #[test]
    fn harmonic_has_negligible_mass() {
        let u = disk_grid(128, |p| p.re);
        let r = riesz_measure(&u, &RieszOptions::default()).unwrap().finite().unwrap();
        let h2 = u.lattice().cell_area();
        assert!(r.measure.total_mass() < 10.0 * h2 * std::f64::consts::PI);
        assert!(r.clamped_mass < 10.0 * h2 * std::f64::consts::PI);
    }

    #[test]
    fn quadratic_density_is_two_over_pi() {
        let u = disk_grid(64, |p| p.norm_sqr());
        let r = riesz_measure(&u, &RieszOptions::default()).unwrap().finite().unwrap();
        let d = r.measure.density().unwrap();
        for (k, _, _) in u.iter() {
            let v = d.values()[k];
            assert!(v == 0.0 || (v - 2.0 / std::f64::consts::PI).abs() < 1e-8);
        }
        assert_eq!(r.clamped_mass, 0.0);
    }

    #[test]
    fn log_pole_recovers_unit_mass() {
        let a = pt(0.2, -0.1);
        let u = disk_grid(256, |p| (p - a).norm().ln());
        let r = riesz_measure(&u, &RieszOptions::with_poles([a])).unwrap().finite().unwrap();
        let near = r.measure.mass_where(|p| (p - a).norm() < 0.2);
        assert!((near - 1.0).abs() < 1e-2, "{near}");
        assert_eq!(r.charges.len(), 1);
    }

    #[test]
    fn infinite_node_is_detected_as_pole() {
        let u = disk_grid(128, |p| if p.norm() < 1e-12 { f64::NEG_INFINITY } else { p.norm().ln() });
        let r = riesz_measure(&u, &RieszOptions::default()).unwrap().finite().unwrap();
        assert_eq!(r.charges.len(), 1);
        assert!((r.charges[0].mass - 1.0).abs() < 1e-2);
    }

    #[test]
    fn declared_and_detected_poles_merge() {
        let u = disk_grid(128, |p| if p.norm() < 1e-12 { f64::NEG_INFINITY } else { p.norm().ln() });
        let r = riesz_measure(&u, &RieszOptions::with_poles([pt(0.001, 0.0)])).unwrap().finite().unwrap();
        assert_eq!(r.charges.len(), 1);
    }

    #[test]
    fn constant_minus_infinity_is_infinite() {
        let u = disk_grid(32, |_| f64::NEG_INFINITY);
        assert_eq!(riesz_measure(&u, &RieszOptions::default()).unwrap(), RieszMeasure::Infinite);
    }

    #[test]
    fn close_poles_are_rejected() {
        let a = pt(0.0, 0.0);
        let b = pt(0.03, 0.0);
        let u = disk_grid(128, |p| (p - a).norm().ln() + (p - b).norm().ln());
        assert!(matches!(riesz_measure(&u, &RieszOptions::with_poles([a, b])), Err(Error::Precondition(_))));
    }

    #[test]
    fn pole_outside_mask_is_rejected() {
        let u = disk_grid(64, |p| p.re);
        assert!(matches!(
            riesz_measure(&u, &RieszOptions::with_poles([pt(0.99, 0.99)])),
            Err(Error::PoleNotInterior(_))
        ));
    }

    #[test]
    fn flux_matches_box_laplacian_sum() {
        let u = disk_grid(64, |p| (p.re * 3.0).exp() * p.im.cos() + p.norm_sqr() * p.re);
        let lat = *u.lattice();
        let b = ExcisionBox { ic: 30, jc: 34, r: 3 };
        let lap = discrete_laplacian(&u);
        let mut sum = 0.0;
        for (k, _, v) in lap.iter() {
            let (i, j) = lat.coords(k);
            if b.contains(i, j) {
                sum += v * lat.cell_area();
            }
        }
        let flux = discrete_flux(&u, &b).unwrap();
        assert!((flux - sum).abs() < 1e-10, "{flux} vs {sum}");
    }
}
