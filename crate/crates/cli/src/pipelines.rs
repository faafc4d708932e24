//! One function per pipeline. Each writes its report and dumps into the
//! output directory and returns a one-line summary.

use anyhow::{anyhow, bail, Context, Result};
use potentia::balayage::sweep_out_ball;
use potentia::dirichlet::{green_function, solve_dirichlet, DirichletProblem};
use potentia::geometry::{CompactSet, Shape};
use potentia::gluing::{glue, CollarCheck};
use potentia::grid::{
    discrete_submean_test, riesz_measure, AtomicMeasure, GridFunction, Lattice, RieszOptions, SubmeanOptions,
    SubmeanReport,
};
use potentia::jensen::{
    measure_of_potential, poisson_jensen_residual, potential_of_measure, JensenMeasure, PoissonJensenReport,
    RecoveryDiagnostics,
};
use potentia::testfn::{continue_test_function, green_test_function, ContinuationProperties, TestFunction};
use potentia::uniqueness::{
    contradiction_bound_trace, uniqueness_verdict, BoundTrace, TraceInput, Verdict, VerdictInput,
};
use potentia::{pt, Point};
use serde::Serialize;

use crate::report::OutputDir;
use crate::scenario::{formula_xy, Scenario, StudyTarget, Subject, TestFunctionSpec};

/// What a run produced, beyond the files.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: String,
    pub verdict: Option<Verdict>,
}

impl Outcome {
    fn line(summary: impl Into<String>) -> Self {
        Outcome { summary: summary.into(), verdict: None }
    }
}

#[derive(Debug, Clone, Serialize)]
struct Provenance {
    scenario: String,
    pipeline: String,
    cells: usize,
    spacing: f64,
    nodes: usize,
    seed: u64,
}

fn provenance(s: &Scenario, lat: &Lattice) -> Provenance {
    Provenance {
        scenario: s.name(),
        pipeline: s.pipeline.to_string(),
        cells: s.grid.cells,
        spacing: lat.spacing(),
        nodes: lat.len(),
        seed: s.seed,
    }
}

fn hole(s: &Scenario) -> Result<CompactSet> {
    s.hole().ok_or_else(|| anyhow!("scenario has no [hole]"))
}

fn radius(s: &Scenario) -> Result<f64> {
    s.radius.ok_or_else(|| anyhow!("scenario has no radius"))
}

fn subject(s: &Scenario) -> Result<Subject> {
    s.subject()?.ok_or_else(|| anyhow!("scenario has no [function]"))
}

fn test_function(s: &Scenario, lat: Lattice) -> Result<TestFunction> {
    let k = hole(s)?;
    match s.test_function.as_ref().unwrap_or(&TestFunctionSpec::Green) {
        TestFunctionSpec::Green => {
            Ok(green_test_function(&s.domain, &k, s.pole(), lat).context("building the Green test function")?)
        }
        TestFunctionSpec::Formula { expr } => {
            let f = formula_xy(expr)?;
            Ok(TestFunction::from_fn(move |p| f.eval(p), s.domain.clone(), k, lat).context("test function")?)
        }
    }
}

fn riesz_of(u: &GridFunction, poles: &[Point]) -> Result<AtomicMeasure> {
    Ok(riesz_measure(u, &RieszOptions::with_poles(poles.iter().copied()))?
        .finite()
        .context("Riesz measure of u")?
        .measure)
}

pub fn run_verdict(s: &Scenario, out: &mut OutputDir) -> Result<Outcome> {
    let lat = s.lattice()?;
    let v = test_function(s, lat)?;
    let growth = s.growth_model()?;
    let zeros = s.zero_set()?.ok_or_else(|| anyhow!("scenario has no [zeros]"))?;
    let subj = s.subject()?;
    let u = subj.as_ref().map(|sb| {
        let f = sb.f.clone();
        GridFunction::sample(lat, &s.domain, move |p| f(p))
    });
    let report = uniqueness_verdict(&VerdictInput {
        v: &v,
        growth: &growth,
        zeros: &zeros,
        u: u.as_ref(),
        series: s.series.options(),
    })?;
    out.json("report.json", &report)?;
    out.grid("test_function.csv", v.values())?;
    let shown = zeros.take(report.condition7b.terms.min(10_000))?;
    out.measure("zeros.csv", &AtomicMeasure::from_atoms(shown.into_iter().map(|z| (z, 1.0)))?)?;
    out.table(
        "partial_sums.csv",
        "n,sum",
        report.condition7b.partial_sums.iter().map(|p| [p.n as f64, p.sum]),
    )?;
    let mut summary = format!("verdict {} ({})", report.verdict, report.condition7b.method);

    if let Some(levels) = s.trace_levels {
        let (u, sb) = (u.as_ref().expect("checked"), subj.as_ref().expect("checked"));
        let nu_u = riesz_of(u, &sb.poles)?;
        let trace: BoundTrace = contradiction_bound_trace(&TraceInput {
            v: &v,
            growth: &growth,
            u,
            nu_u: &nu_u,
            x0: s.pole(),
            r0: radius(s)?,
            levels,
        })?;
        out.json("trace.json", &trace)?;
        out.table("trace.csv", "n,lhs,bound", trace.rows.iter().map(|r| [r.n as f64, r.lhs, r.bound]))?;
        out.measure("riesz_u.csv", &nu_u)?;
        summary.push_str(&format!("; trace sup lhs {:.6} holds={}", trace.sup_lhs, trace.holds));
    }
    Ok(Outcome { summary, verdict: Some(report.verdict) })
}

#[derive(Debug, Serialize)]
struct PoissonJensenOutput {
    provenance: Provenance,
    function: String,
    circle_radius: f64,
    circle_nodes: usize,
    /// Closed-form `u` and exact atoms at the declared poles.
    exact: PoissonJensenReport,
    /// Grid-sampled `u` and its extracted Riesz measure.
    grid: PoissonJensenReport,
    /// `log|p(x0)| + Σ log(R/|a - x0|)` over roots inside the circle.
    jensen_oracle: Option<f64>,
}

fn poisson_jensen_reports(s: &Scenario, lat: Lattice) -> Result<(PoissonJensenReport, PoissonJensenReport, Subject, JensenMeasure)> {
    let sb = subject(s)?;
    let c = s.circle.as_ref().ok_or_else(|| anyhow!("scenario has no [circle]"))?;
    let mu = JensenMeasure::uniform_circle(s.pole(), c.radius, c.nodes, s.domain.clone())?;
    let atoms = AtomicMeasure::from_atoms(sb.poles.iter().filter(|p| s.domain.contains(**p)).map(|p| (*p, 1.0)))?;
    let f = sb.f.clone();
    let exact = poisson_jensen_residual(&move |p: Point| f(p), &atoms, &mu)?;
    let f = sb.f.clone();
    let u = GridFunction::sample(lat, &s.domain, move |p| f(p));
    let nu = riesz_of(&u, &sb.poles)?;
    let grid = poisson_jensen_residual(&u, &nu, &mu)?;
    Ok((exact, grid, sb, mu))
}

pub fn run_poisson_jensen(s: &Scenario, out: &mut OutputDir) -> Result<Outcome> {
    let lat = s.lattice()?;
    let (exact, grid, sb, mu) = poisson_jensen_reports(s, lat)?;
    let c = s.circle.as_ref().expect("checked");
    let x0 = s.pole();
    let jensen_oracle = sb.description.starts_with("log|p|").then(|| {
        (sb.f)(x0)
            + sb.poles.iter().filter(|a| (*a - x0).norm() < c.radius).map(|a| (c.radius / (a - x0).norm()).ln()).sum::<f64>()
    });
    let rep = PoissonJensenOutput {
        provenance: provenance(s, &lat),
        function: sb.description.clone(),
        circle_radius: c.radius,
        circle_nodes: c.nodes,
        exact,
        grid,
        jensen_oracle,
    };
    out.json("report.json", &rep)?;
    out.measure("jensen_measure.csv", mu.base())?;
    Ok(Outcome::line(format!("residual exact {:.3e}, grid {:.3e}", exact.residual, grid.residual)))
}

#[derive(Debug, Serialize)]
struct ProbeRow {
    name: &'static str,
    expected: f64,
    recovered: f64,
    error: f64,
}

#[derive(Debug, Serialize)]
struct DualityOutput {
    provenance: Provenance,
    scale: f64,
    expected_atom: f64,
    diagnostics: RecoveryDiagnostics,
    probes: Vec<ProbeRow>,
    max_probe_error: f64,
}

/// Smooth probes for comparing measures.
pub fn smooth_probes() -> Vec<(&'static str, fn(Point) -> f64)> {
    vec![
        ("one", |_| 1.0),
        ("x", |p| p.re),
        ("y", |p| p.im),
        ("x^2", |p| p.re * p.re),
        ("y^2", |p| p.im * p.im),
        ("xy", |p| p.re * p.im),
        ("x^3-3xy^2", |p| p.re.powi(3) - 3.0 * p.re * p.im * p.im),
        ("cos(3x)", |p| (3.0 * p.re).cos()),
        ("exp(y)", |p| p.im.exp()),
        ("sin(x)cos(y)", |p| p.re.sin() * p.im.cos()),
    ]
}

pub fn run_duality(s: &Scenario, out: &mut OutputDir) -> Result<Outcome> {
    let lat = s.lattice()?;
    let c = s.circle.as_ref().ok_or_else(|| anyhow!("scenario has no [circle]"))?;
    let x0 = s.pole();
    let mu = JensenMeasure::uniform_circle(x0, c.radius, c.nodes, s.domain.clone())?;
    let v = potential_of_measure(&mu).scaled(c.scale)?;
    let rec = measure_of_potential(&v, &s.domain, lat)?;
    let mut probes = vec![];
    for (name, f) in smooth_probes() {
        let expected = c.scale * mu.integrate(&f)? + (1.0 - c.scale) * f(x0);
        let recovered = rec.measure.integrate(&f)?;
        probes.push(ProbeRow { name, expected, recovered, error: (recovered - expected).abs() });
    }
    let max_probe_error = probes.iter().map(|p| p.error).fold(0.0, f64::max);
    let rep = DualityOutput {
        provenance: provenance(s, &lat),
        scale: c.scale,
        expected_atom: 1.0 - c.scale,
        diagnostics: rec.diagnostics.clone(),
        probes,
        max_probe_error,
    };
    out.json("report.json", &rep)?;
    out.measure("recovered_measure.csv", rec.measure.base())?;
    out.grid("potential.csv", &v.to_grid(lat, &s.domain))?;
    Ok(Outcome::line(format!(
        "atom weight {:.4} (expected {:.4}), max probe error {:.3e}",
        rec.diagnostics.atom_weight,
        1.0 - c.scale,
        max_probe_error
    )))
}

#[derive(Debug, Serialize)]
struct BalayageOutput {
    provenance: Provenance,
    function: String,
    center: Point,
    radius: f64,
    swept_mass: f64,
    sphere_mass_flux: f64,
    sphere_mass_poisson: f64,
    outside_mass_before: f64,
    outside_mass_after: f64,
}

pub fn run_balayage(s: &Scenario, out: &mut OutputDir) -> Result<Outcome> {
    let lat = s.lattice()?;
    let sb = subject(s)?;
    let (x0, r0) = (s.pole(), radius(s)?);
    let f = sb.f.clone();
    let u = GridFunction::sample(lat, &s.domain, move |p| f(p));
    let nu = riesz_of(&u, &sb.poles)?;
    let sw = sweep_out_ball(&u, &nu, x0, r0)?;
    let outside_before = nu.mass_where(|p| (p - x0).norm() > r0);
    let outside_after = sw.nu_u0.mass_where(|p| (p - x0).norm() > r0 + 1e-9);
    let rep = BalayageOutput {
        provenance: provenance(s, &lat),
        function: sb.description,
        center: x0,
        radius: r0,
        swept_mass: sw.swept_mass,
        sphere_mass_flux: sw.sphere_mass_flux,
        sphere_mass_poisson: sw.sphere_mass_poisson,
        outside_mass_before: outside_before,
        outside_mass_after: outside_after,
    };
    out.json("report.json", &rep)?;
    out.grid("u0.csv", &sw.u0)?;
    out.measure("nu_u0.csv", &sw.nu_u0)?;
    out.measure("sphere.csv", &sw.sphere)?;
    Ok(Outcome::line(format!(
        "swept {:.4}, sphere mass {:.4} (flux) / {:.4} (Poisson)",
        sw.swept_mass, sw.sphere_mass_flux, sw.sphere_mass_poisson
    )))
}

#[derive(Debug, Serialize)]
struct ContinuationOutput {
    provenance: Provenance,
    center: Point,
    radius: f64,
    q: f64,
    a: f64,
    c: f64,
    collar: CollarCheck,
    properties: ContinuationProperties,
}

pub fn run_continuation(s: &Scenario, out: &mut OutputDir) -> Result<Outcome> {
    let lat = s.lattice()?;
    let v = test_function(s, lat)?;
    let cont = continue_test_function(&v, s.pole(), radius(s)?)?;
    let props = cont.properties()?;
    let spread = props.pole.as_ref().map(|p| p.spread);
    let rep = ContinuationOutput {
        provenance: provenance(s, &lat),
        center: cont.x0,
        radius: cont.r0,
        q: cont.q,
        a: cont.a,
        c: cont.c,
        collar: cont.collar,
        properties: props,
    };
    out.json("report.json", &rep)?;
    out.grid("v_tilde.csv", &cont.v_tilde)?;
    Ok(Outcome::line(format!("pole coefficient c = {:.6}, spread {:?}", cont.c, spread)))
}

#[derive(Debug, Serialize)]
struct GluingOutput {
    provenance: Provenance,
    collar: CollarCheck,
    submean: SubmeanReport,
    pass_fraction: f64,
}

pub fn run_gluing(s: &Scenario, out: &mut OutputDir) -> Result<Outcome> {
    let lat = s.lattice()?;
    let v = test_function(s, lat)?;
    let cont = continue_test_function(&v, s.pole(), radius(s)?)?;
    let factor = if s.violate { 0.1 } else { 1.0 };
    let outer = v.values().restrict(|p| !cont.d0.contains_closed(p));
    let mask = cont.v_tilde.mask().to_vec();
    let v0 = GridFunction::from_fn(lat, mask, |p| factor * cont.v0(p));
    let glued = glue(&outer, &v0, None)?;
    let collar = cont.pole_collar();
    let x0 = s.pole();
    let off_pole = glued.values.restrict(|p| (p - x0).norm() > collar);
    let submean = discrete_submean_test(&off_pole, &SubmeanOptions::default());
    let rep = GluingOutput {
        provenance: provenance(s, &lat),
        collar: glued.collar,
        pass_fraction: submean.pass_fraction(),
        submean,
    };
    out.json("report.json", &rep)?;
    out.grid("glued.csv", &glued.values)?;
    Ok(Outcome::line(format!("submean pass fraction {:.6}", rep.pass_fraction)))
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyRow {
    pub h: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyOutput {
    pub scenario: String,
    pub target: StudyTarget,
    pub rows: Vec<StudyRow>,
    /// `log2(e_k / e_{k+1}) / log2(h_k / h_{k+1})` between successive levels.
    pub orders: Vec<f64>,
    pub monotone: bool,
}

/// Closed-form Green's function of a disk.
pub fn disk_green(center: Point, r: f64, pole: Point) -> impl Fn(Point) -> f64 {
    let b = (pole - center) / r;
    move |z: Point| {
        let w = (z - center) / r;
        (pt(1.0, 0.0) - b.conj() * w).norm().ln() - (w - b).norm().ln()
    }
}

fn study_residual(s: &Scenario, target: StudyTarget, cells: usize) -> Result<(f64, f64)> {
    let lat = s.lattice_with(cells)?;
    let h = lat.spacing();
    let residual = match target {
        StudyTarget::Green => {
            let Shape::Disk { center, radius } = *s.domain.shape() else {
                bail!("the Green study needs a disk domain");
            };
            let x0 = s.pole();
            let g = green_function(&s.domain, lat, x0)?;
            let exact = disk_green(center, radius, x0);
            g.grid()
                .iter()
                .filter(|(_, p, _)| s.domain.contains(*p) && (p - x0).norm() > 3.0 * h)
                .map(|(_, p, val)| (val - exact(p)).abs())
                .fold(0.0, f64::max)
        }
        StudyTarget::PoissonJensen => poisson_jensen_reports(s, lat)?.1.residual,
        StudyTarget::Constant => {
            let one = |_: Point| 1.0;
            let sol = solve_dirichlet(&DirichletProblem::new(&s.domain, lat, &one)?)?;
            sol.values().iter().map(|(_, _, v)| (v - 1.0).abs()).fold(0.0, f64::max)
        }
    };
    Ok((h, residual))
}

pub fn convergence_study(s: &Scenario, levels: &[usize], out: &mut OutputDir) -> Result<StudyOutput> {
    let target = match &s.study {
        Some(st) => st.target,
        None if s.pipeline == crate::scenario::Pipeline::PoissonJensen => StudyTarget::PoissonJensen,
        None => StudyTarget::Green,
    };
    if levels.is_empty() {
        bail!("no refinement levels");
    }
    let mut rows = vec![];
    for &cells in levels {
        let (h, residual) = study_residual(s, target, cells).with_context(|| format!("level {cells}"))?;
        rows.push(StudyRow { h, residual });
    }
    let orders: Vec<f64> = rows
        .windows(2)
        .map(|w| (w[0].residual / w[1].residual).log2() / (w[0].h / w[1].h).log2())
        .collect();
    let monotone = rows.windows(2).all(|w| w[1].residual < w[0].residual);
    let rep = StudyOutput { scenario: s.name(), target, rows, orders, monotone };
    out.table("study.csv", "h,residual", rep.rows.iter().map(|r| [r.h, r.residual]))?;
    out.json("study.json", &rep)?;
    if !monotone && target != StudyTarget::Constant {
        bail!(CalibrationFailure(format!(
            "residuals do not decrease monotonically: {:?}",
            rep.rows.iter().map(|r| r.residual).collect::<Vec<_>>()
        )));
    }
    Ok(rep)
}

#[derive(Debug)]
pub struct CalibrationFailure(pub String);

impl std::fmt::Display for CalibrationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "calibration failure: {}", self.0)
    }
}

impl std::error::Error for CalibrationFailure {}

pub fn run_study_pipeline(s: &Scenario, out: &mut OutputDir) -> Result<Outcome> {
    let levels = s.study.as_ref().map(|st| st.levels.clone()).unwrap_or_default();
    let rep = convergence_study(s, &levels, out)?;
    Ok(Outcome::line(format!(
        "{} levels, residuals {:?}, orders {:?}",
        rep.rows.len(),
        rep.rows.iter().map(|r| r.residual).collect::<Vec<_>>(),
        rep.orders
    )))
}
