//! Browser bindings. Every function takes plain numbers or a JSON string and
//! returns a JSON string; failures come back as `{"error": "..."}`.

use potentia::balayage::sweep_out_ball;
use potentia::dirichlet::green_function;
use potentia::geometry::{CompactSet, Domain};
use potentia::grid::{riesz_measure, GridFunction, Lattice, RieszOptions};
use potentia::testfn::green_test_function;
use potentia::uniqueness::{uniqueness_verdict, GrowthModel, SeriesOptions, VerdictInput, ZeroSet, ZeroSpec};
use potentia::{pt, Point};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn respond(r: Result<Value, String>) -> String {
    r.unwrap_or_else(|e| json!({ "error": e })).to_string()
}

fn lattice(cells: u32) -> Result<Lattice, String> {
    Lattice::covering(Domain::unit_disk().bbox(), cells.clamp(16, 256) as usize).map_err(|e| e.to_string())
}

/// Green's function of the unit disk with pole `(px, py)`, row by row, with
/// `null` outside the disk and at the pole.
#[wasm_bindgen]
pub fn green_field(cells: u32, px: f64, py: f64) -> String {
    respond((|| {
        let d = Domain::unit_disk();
        let lat = lattice(cells)?;
        let g = green_function(&d, lat, pt(px, py)).map_err(|e| e.to_string())?.grid();
        let values: Vec<Option<f64>> = (0..lat.len())
            .map(|k| g.get_idx(k).filter(|v| v.is_finite() && d.contains(lat.node_at(k))))
            .collect();
        Ok(json!({ "nx": lat.nx(), "ny": lat.ny(), "values": values }))
    })())
}

/// Uniqueness verdict on the unit disk with hole `|z| <= hole`, bounded
/// growth and the Green test function. `zeros` is a zero specification in
/// JSON, for example `{"kind": "one-minus-inv-k2"}`.
#[wasm_bindgen]
pub fn zero_sum_verdict(zeros: &str, hole: f64, cells: u32) -> String {
    respond((|| {
        let spec: ZeroSpec = serde_json::from_str(zeros).map_err(|e| e.to_string())?;
        let zs = ZeroSet::from_spec(&spec).map_err(|e| e.to_string())?;
        let d = Domain::unit_disk();
        let k = CompactSet::closed_disk(pt(0.0, 0.0), hole).map_err(|e| e.to_string())?;
        let v = green_test_function(&d, &k, pt(0.0, 0.0), lattice(cells)?).map_err(|e| e.to_string())?;
        let rep = uniqueness_verdict(&VerdictInput {
            v: &v,
            growth: &GrowthModel::Bounded,
            zeros: &zs,
            u: None,
            series: SeriesOptions { max_terms: 200_000, ..Default::default() },
        })
        .map_err(|e| e.to_string())?;
        serde_json::to_value(&rep).map_err(|e| e.to_string())
    })())
}

/// Sweeps the Riesz measure of `log|p|` out of the ball `B(c, r)`. `roots`
/// holds `x0, y0, x1, y1, ...`.
#[wasm_bindgen]
pub fn balayage_sweep(roots: &[f64], cx: f64, cy: f64, r: f64, cells: u32) -> String {
    respond((|| {
        let d = Domain::unit_disk();
        let lat = lattice(cells)?;
        let zs: Vec<Point> = roots.chunks_exact(2).map(|c| pt(c[0], c[1])).collect();
        let u = GridFunction::sample(lat, &d, |p| zs.iter().map(|a| (p - a).norm().ln()).sum());
        let nu = riesz_measure(&u, &RieszOptions::with_poles(zs.iter().copied()))
            .and_then(|m| m.finite())
            .map_err(|e| e.to_string())?
            .measure;
        let x0 = pt(cx, cy);
        let sw = sweep_out_ball(&u, &nu, x0, r).map_err(|e| e.to_string())?;
        let sphere: Vec<[f64; 3]> = sw.sphere.support().map(|(p, w)| [p.re, p.im, w]).collect();
        Ok(json!({
            "swept_mass": sw.swept_mass,
            "sphere_mass": sw.sphere_mass_flux,
            "outside_mass": nu.mass_where(|p| (p - x0).norm() > r),
            "total_after": sw.nu_u0.total_mass(),
            "sphere": sphere,
        }))
    })())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: String) -> Value {
        serde_json::from_str(&s).unwrap()
    }

    #[test]
    fn green_field_vanishes_outside() {
        let v = parse(green_field(32, 0.0, 0.0));
        let n = v["nx"].as_u64().unwrap() as usize;
        assert!(v["values"][0].is_null());
        let mid = v["values"][(n / 2) * n + n / 2 + 4].as_f64().unwrap();
        assert!(mid > 0.0);
    }

    #[test]
    fn verdicts_from_json_specs() {
        let v = parse(zero_sum_verdict(r#"{"kind": "one-minus-inv-k"}"#, 0.5, 48));
        assert_eq!(v["verdict"], "FORCED_TRIVIAL");
        let v = parse(zero_sum_verdict(r#"{"kind": "one-minus-inv-k2"}"#, 0.5, 48));
        assert_eq!(v["verdict"], "INCONCLUSIVE");
        assert!(parse(zero_sum_verdict("{", 0.5, 48))["error"].is_string());
    }

    #[test]
    fn sweep_moves_inner_roots_to_the_sphere() {
        let v = parse(balayage_sweep(&[0.05, 0.0, 0.6, 0.3], 0.0, 0.0, 0.3, 96));
        assert!((v["sphere_mass"].as_f64().unwrap() - 1.0).abs() < 5e-2, "{v}");
    }
}
