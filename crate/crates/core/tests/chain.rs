use approx::assert_abs_diff_eq;
use potentia::balayage::sweep_out_ball;
use potentia::geometry::{CompactSet, Domain};
use potentia::grid::{riesz_measure, GridFunction, Lattice, RieszOptions};
use potentia::jensen::{poisson_jensen_residual, JensenMeasure};
use potentia::testfn::{continue_test_function, green_test_function};
use potentia::uniqueness::{classify_series, gate, SeriesOptions, Verdict, ZeroSequence};
use potentia::{pt, Point};
use proptest::prelude::*;

fn log_poly(roots: &[Point]) -> impl Fn(Point) -> f64 + '_ {
    move |p| roots.iter().map(|a| (p - a).norm().ln()).sum()
}

#[test]
fn polynomial_riesz_mass_counts_roots() {
    let d = Domain::unit_disk();
    let lat = Lattice::covering(d.bbox(), 192).unwrap();
    let roots = [pt(0.3, 0.1), pt(-0.4, -0.2), pt(0.0, 0.6)];
    let u = GridFunction::sample(lat, &d, log_poly(&roots));
    let nu = riesz_measure(&u, &RieszOptions::with_poles(roots)).unwrap().finite().unwrap().measure;
    assert_abs_diff_eq!(nu.total_mass(), 3.0, epsilon = 3e-2);
}

#[test]
fn grid_measure_satisfies_poisson_jensen() {
    let d = Domain::unit_disk();
    let lat = Lattice::covering(d.bbox(), 256).unwrap();
    let roots = [pt(0.2, 0.3), pt(-0.5, 0.1)];
    let u = GridFunction::sample(lat, &d, log_poly(&roots));
    let nu = riesz_measure(&u, &RieszOptions::with_poles(roots)).unwrap().finite().unwrap().measure;
    let mu = JensenMeasure::uniform_circle(pt(0.0, 0.0), 0.8, 4096, d).unwrap();
    let r = poisson_jensen_residual(&u, &nu, &mu).unwrap();
    assert!(r.residual < 1e-2, "{r:?}");
}

#[test]
fn sweeping_keeps_total_mass() {
    let d = Domain::unit_disk();
    let lat = Lattice::covering(d.bbox(), 192).unwrap();
    let roots = [pt(0.05, 0.0), pt(0.6, -0.3)];
    let u = GridFunction::sample(lat, &d, log_poly(&roots));
    let nu = riesz_measure(&u, &RieszOptions::with_poles(roots)).unwrap().finite().unwrap().measure;
    let sw = sweep_out_ball(&u, &nu, pt(0.0, 0.0), 0.3).unwrap();
    assert_abs_diff_eq!(sw.sphere.total_mass(), sw.swept_mass, epsilon = 5e-2);
    assert_abs_diff_eq!(sw.nu_u0.total_mass(), nu.total_mass(), epsilon = 5e-2);
}

#[test]
fn continued_green_test_function_keeps_its_values_far_out() {
    let d = Domain::unit_disk();
    let k = CompactSet::closed_disk(pt(0.0, 0.0), 0.4).unwrap();
    let lat = Lattice::covering(d.bbox(), 128).unwrap();
    let v = green_test_function(&d, &k, pt(0.0, 0.0), lat).unwrap();
    let c = continue_test_function(&v, pt(0.0, 0.0), 0.15).unwrap();
    let props = c.properties().unwrap();
    assert_eq!(props.mismatched_outside_d1, 0);
    assert!(props.harmonic.passed);
    assert!(c.c > 0.0);
}

#[test]
fn zero_sums_follow_the_radial_rate() {
    let v = |z: Point| -z.norm().ln();
    let sum = |s: ZeroSequence| classify_series(s.iter().unwrap().map(|z| Ok(v(z))), &SeriesOptions::default()).unwrap();
    assert!(sum(ZeroSequence::one_minus_inv_k(3)).is_divergent());
    assert!(!sum(ZeroSequence::one_minus_inv_k2(2)).is_divergent());
}

proptest! {
    #[test]
    fn gate_forces_triviality_only_when_everything_holds(g: bool, m: bool, s: bool) {
        prop_assert_eq!(gate(g, m, s) == Verdict::ForcedTrivial, g && m && s);
    }

    #[test]
    fn riesz_mass_of_one_root(x in -0.6f64..0.6, y in -0.6f64..0.6) {
        let a = pt(x, y);
        let d = Domain::unit_disk();
        let lat = Lattice::covering(d.bbox(), 96).unwrap();
        let u = GridFunction::sample(lat, &d, |p| (p - a).norm().ln());
        let nu = riesz_measure(&u, &RieszOptions::with_poles([a])).unwrap().finite().unwrap().measure;
        prop_assert!((nu.total_mass() - 1.0).abs() < 5e-2);
        prop_assert!(nu.atoms().iter().all(|at| at.weight >= 0.0));
    }
}
