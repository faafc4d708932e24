use serde::Serialize;

use crate::grid::GridFunction;
use crate::Point;

const DIRS: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

fn finite_at(f: &GridFunction, i: usize, j: usize, di: isize, dj: isize) -> Option<f64> {
    let (a, b) = f.lattice().offset(i, j, di, dj)?;
    f.get(a, b).filter(|v| v.is_finite())
}

/// 5-point Laplacian `(f_E + f_W + f_N + f_S - 4 f_C) / h^2`. Nodes whose
/// stencil leaves the mask or touches an infinite value are left out of the
/// result's mask.
pub fn discrete_laplacian(f: &GridFunction) -> GridFunction {
    let lat = *f.lattice();
    let h2 = lat.cell_area();
    let mut mask = vec![false; lat.len()];
    let mut values = vec![f64::NAN; lat.len()];
    for (k, _, c) in f.iter() {
        if !c.is_finite() {
            continue;
        }
        let (i, j) = lat.coords(k);
        let mut sum = 0.0;
        let mut ok = true;
        for (di, dj) in DIRS {
            match finite_at(f, i, j, di, dj) {
                Some(v) => sum += v,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            mask[k] = true;
            values[k] = (sum - 4.0 * c) / h2;
        }
    }
    GridFunction::new(lat, mask, values).expect("laplacian keeps the lattice")
}

/// Local fourth-order truncation scale `h^2 (|δx²δy² f| / h^4 + |Δ_h Δ_h f|)`,
/// maximized over the 3x3 neighbourhood. Zero where nothing is computable.
pub fn truncation_scale(f: &GridFunction) -> Vec<f64> {
    let lat = *f.lattice();
    let h2 = lat.cell_area();
    let lap = discrete_laplacian(f);
    let bilap = discrete_laplacian(&lap);
    let mut raw = vec![0.0; lat.len()];
    for k in 0..lat.len() {
        let (i, j) = lat.coords(k);
        let mut s = 0.0;
        if let Some(b) = bilap.get_idx(k) {
            s += b.abs();
        }
        let mut cross = 0.0;
        let mut ok = true;
        'outer: for di in -1isize..=1 {
            for dj in -1isize..=1 {
                let w = [1.0, -2.0, 1.0][(di + 1) as usize] * [1.0, -2.0, 1.0][(dj + 1) as usize];
                match finite_at(f, i, j, di, dj) {
                    Some(v) => cross += w * v,
                    None => {
                        ok = false;
                        break 'outer;
                    }
                }
            }
        }
        if ok {
            s += (cross / (h2 * h2)).abs();
        }
        raw[k] = h2 * s;
    }
    let mut out = vec![0.0; lat.len()];
    for k in 0..lat.len() {
        let (i, j) = lat.coords(k);
        let mut m: f64 = 0.0;
        for di in -1isize..=1 {
            for dj in -1isize..=1 {
                if let Some((a, b)) = lat.offset(i, j, di, dj) {
                    m = m.max(raw[lat.index(a, b)]);
                }
            }
        }
        out[k] = m;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubmeanOptions {
    /// Multiplier of `h^2 * scale`.
    pub factor: f64,
    /// Relative round-off floor.
    pub floor: f64,
    /// Replaces the adaptive tolerance when set.
    pub absolute: Option<f64>,
}

impl Default for SubmeanOptions {
    fn default() -> Self {
        SubmeanOptions { factor: 10.0, floor: 1e-9, absolute: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeDefect {
    pub index: usize,
    pub point: Point,
    /// `f(center) - mean of the four neighbours`.
    pub defect: f64,
    pub tol: f64,
}

impl NodeDefect {
    pub fn excess(&self) -> f64 {
        self.defect - self.tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubmeanReport {
    pub passed: bool,
    pub checked: usize,
    pub violations: usize,
    /// Node with the largest `defect - tol`.
    pub worst: Option<NodeDefect>,
}

impl SubmeanReport {
    pub fn pass_fraction(&self) -> f64 {
        if self.checked == 0 {
            1.0
        } else {
            (self.checked - self.violations) as f64 / self.checked as f64
        }
    }
}

fn defects(f: &GridFunction, opts: &SubmeanOptions) -> Vec<NodeDefect> {
    let lat = *f.lattice();
    let h2 = lat.cell_area();
    let scale = if opts.absolute.is_none() { truncation_scale(f) } else { Vec::new() };
    let mut out = Vec::new();
    for (k, p, c) in f.iter() {
        if !c.is_finite() {
            continue;
        }
        let (i, j) = lat.coords(k);
        let nb: Option<Vec<f64>> = DIRS.iter().map(|&(di, dj)| finite_at(f, i, j, di, dj)).collect();
        let Some(nb) = nb else { continue };
        let mean = nb.iter().sum::<f64>() / 4.0;
        let tol = match opts.absolute {
            Some(t) => t,
            None => opts.factor * h2 * scale[k] + opts.floor * (1.0 + c.abs()),
        };
        out.push(NodeDefect { index: k, point: p, defect: c - mean, tol });
    }
    out
}

/// Checks `f(center) <= mean of the four neighbours + tol` at every node
/// whose full stencil is finite and inside the mask.
pub fn discrete_submean_test(f: &GridFunction, opts: &SubmeanOptions) -> SubmeanReport {
    let all = defects(f, opts);
    let violations = all.iter().filter(|d| d.defect > d.tol).count();
    let worst = all.iter().copied().max_by(|a, b| a.excess().total_cmp(&b.excess()));
    SubmeanReport { passed: violations == 0, checked: all.len(), violations, worst }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicityReport {
    pub passed: bool,
    pub checked: usize,
    pub violations: usize,
    pub max_abs_laplacian: f64,
    pub worst: Option<NodeDefect>,
}

/// Two-sided version of the submean test: `|defect| <= tol`.
pub fn harmonicity_check(f: &GridFunction, opts: &SubmeanOptions) -> HarmonicityReport {
    let h2 = f.lattice().cell_area();
    let all = defects(f, opts);
    let violations = all.iter().filter(|d| d.defect.abs() > d.tol).count();
    let worst = all
        .iter()
        .copied()
        .max_by(|a, b| (a.defect.abs() - a.tol).total_cmp(&(b.defect.abs() - b.tol)));
    let max_abs_laplacian = all.iter().map(|d| 4.0 * d.defect.abs() / h2).fold(0.0, f64::max);
    HarmonicityReport { passed: violations == 0, checked: all.len(), violations, max_abs_laplacian, worst }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;
    use crate::grid::Lattice;
    use crate::pt;
    use proptest::prelude::*;

    fn unit_lattice(cells: usize) -> Lattice {
        Lattice::covering(Domain::unit_disk().bbox(), cells).unwrap()
    }

    #[test]
    fn constant_has_zero_laplacian() {
        let f = GridFunction::sample(unit_lattice(32), &Domain::unit_disk(), |_| 3.5);
        let lap = discrete_laplacian(&f);
        assert!(lap.masked_count() > 0);
        assert!(lap.iter().all(|(_, _, v)| v.abs() < 1e-9));
    }

    #[test]
    fn quadratic_gives_four() {
        let f = GridFunction::sample(unit_lattice(64), &Domain::unit_disk(), |p| p.norm_sqr());
        let lap = discrete_laplacian(&f);
        assert!(lap.iter().all(|(_, _, v)| (v - 4.0).abs() < 1e-8));
    }

    #[test]
    fn log_on_annulus_is_nearly_harmonic() {
        let lat = unit_lattice(256);
        let dom = Domain::annulus(pt(0.0, 0.0), 0.5, 1.0).unwrap();
        let f = GridFunction::sample(lat, &dom, |p| p.norm().ln());
        let lap = discrete_laplacian(&f);
        let h2 = lat.cell_area();
        // Δ_h log|z| = h²/12 (∂⁴_x + ∂⁴_y) log|z| + ..., bounded by 12 h² / r⁴ / 12 on r ≥ 1/2.
        let worst = lap.iter().map(|(_, _, v)| v.abs()).fold(0.0, f64::max);
        assert!(worst < 16.0 * h2 * 2.0, "{worst}");
    }

    #[test]
    fn laplacian_skips_infinite_neighbours() {
        let lat = unit_lattice(16);
        let f = GridFunction::sample_everywhere(lat, |p| if p.norm() < 1e-9 { f64::NEG_INFINITY } else { p.norm().ln() });
        let lap = discrete_laplacian(&f);
        let (ic, jc) = lat.nearest(pt(0.0, 0.0)).unwrap();
        assert!(!lap.in_mask(ic, jc));
        assert!(!lap.in_mask(ic + 1, jc));
        assert!(lap.in_mask(ic + 2, jc));
    }

    #[test]
    fn log_off_pole_passes_submean() {
        let lat = unit_lattice(128);
        let a = pt(0.13, -0.21);
        let f = GridFunction::sample(lat, &Domain::unit_disk(), |p| (p - a).norm().ln());
        let rep = discrete_submean_test(&f, &SubmeanOptions::default());
        assert!(rep.passed, "{:?}", rep.worst);
        assert!(rep.checked > 10_000);
    }

    #[test]
    fn superharmonic_fails_with_report() {
        let f = GridFunction::sample(unit_lattice(64), &Domain::unit_disk(), |p| -p.norm_sqr());
        let rep = discrete_submean_test(&f, &SubmeanOptions::default());
        assert!(!rep.passed);
        assert_eq!(rep.violations, rep.checked);
        assert!(rep.worst.unwrap().defect > 0.0);
    }

    #[test]
    fn max_of_subharmonic_grids_passes() {
        let lat = unit_lattice(128);
        let dom = Domain::unit_disk();
        let f = GridFunction::sample(lat, &dom, |p| (p - pt(0.3, 0.0)).norm().ln());
        let g = GridFunction::sample(lat, &dom, |p| p.norm_sqr() - 1.2);
        let m = f.zip_with(&g, f64::max).unwrap();
        assert!(discrete_submean_test(&m, &SubmeanOptions::default()).passed);
    }

    #[test]
    fn harmonic_polynomial_passes_two_sided_check() {
        let f = GridFunction::sample(unit_lattice(64), &Domain::unit_disk(), |p| (p * p * p).re + p.im);
        let rep = harmonicity_check(&f, &SubmeanOptions::default());
        assert!(rep.passed);
        assert!(rep.max_abs_laplacian < 1e-6);
        let g = GridFunction::sample(unit_lattice(64), &Domain::unit_disk(), |p| p.norm_sqr());
        assert!(!harmonicity_check(&g, &SubmeanOptions::default()).passed);
    }

    proptest! {
        #[test]
        fn laplacian_exact_on_quadratics(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, d in -2.0f64..2.0, e in -2.0f64..2.0) {
            let f = GridFunction::sample(unit_lattice(24), &Domain::unit_disk(), |p| a * p.re * p.re + b * p.re * p.im + c * p.im * p.im + d * p.re + e);
            let lap = discrete_laplacian(&f);
            for (_, _, v) in lap.iter() {
                prop_assert!((v - 2.0 * (a + c)).abs() < 1e-7);
            }
        }
    }
}
