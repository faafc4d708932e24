//! Scenario files: TOML documents naming a pipeline and its inputs.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use potentia::formula::Formula;
use potentia::geometry::{CompactSet, Domain, Shape};
use potentia::grid::Lattice;
use potentia::holomorphic::{BlaschkeProduct, Polynomial};
use potentia::uniqueness::{GrowthModel, GrowthSpec, SeriesOptions, ZeroSet, ZeroSpec};
use potentia::{pt, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    Verdict,
    PoissonJensen,
    Duality,
    Balayage,
    Gluing,
    Continuation,
    ConvergenceStudy,
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pipeline::Verdict => "verdict",
            Pipeline::PoissonJensen => "poisson-jensen",
            Pipeline::Duality => "duality",
            Pipeline::Balayage => "balayage",
            Pipeline::Gluing => "gluing",
            Pipeline::Continuation => "continuation",
            Pipeline::ConvergenceStudy => "convergence-study",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_cells")]
    pub cells: usize,
}

fn default_cells() -> usize {
    256
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { cells: default_cells() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TestFunctionSpec {
    /// Green's function of `D` with pole at the scenario pole, clamped
    /// to zero on the hole's collar.
    Green,
    /// Expression in `x` and `y`, sampled on the grid.
    Formula { expr: String },
}

/// The subharmonic function `u` under study.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// `log|p|`.
    Polynomial { roots: Vec<[f64; 2]> },
    /// `log|p|` with roots drawn uniformly from a disk, using `seed`.
    RandomPolynomial {
        degree: usize,
        #[serde(default = "default_root_radius")]
        radius: f64,
    },
    /// `log|B|` over the first `factors` zeros of the zero set.
    Blaschke { factors: usize },
    /// Expression in `x` and `y`; no declared poles.
    Formula { expr: String },
}

fn default_root_radius() -> f64 {
    0.7
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleSection {
    pub radius: f64,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    /// Scale applied to the potential (duality only).
    #[serde(default = "one")]
    pub scale: f64,
}

fn default_nodes() -> usize {
    10_000
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSection {
    pub max_terms: Option<usize>,
    pub cutoff: Option<f64>,
    pub threshold: Option<f64>,
    pub slope_threshold: Option<f64>,
}

impl SeriesSection {
    pub fn options(&self) -> SeriesOptions {
        let d = SeriesOptions::default();
        SeriesOptions {
            max_terms: self.max_terms.unwrap_or(d.max_terms),
            cutoff: self.cutoff.unwrap_or(d.cutoff),
            threshold: self.threshold.unwrap_or(d.threshold),
            slope_threshold: self.slope_threshold.unwrap_or(d.slope_threshold),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyTarget {
    Green,
    PoissonJensen,
    Constant,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    pub target: StudyTarget,
    #[serde(default = "default_levels")]
    pub levels: Vec<usize>,
}

fn default_levels() -> Vec<usize> {
    vec![64, 128, 256]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: default_dir() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub pipeline: Pipeline,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridSection,
    pub domain: Domain,
    /// Open set whose closure is the compact hole `K`.
    #[serde(default)]
    pub hole: Option<Domain>,
    /// The point `x0`; defaults to the origin.
    #[serde(default)]
    pub pole: Option<[f64; 2]>,
    /// The radius `r0`.
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub test_function: Option<TestFunctionSpec>,
    #[serde(default)]
    pub growth: Option<GrowthSpec>,
    #[serde(default)]
    pub zeros: Option<ZeroSpec>,
    #[serde(default)]
    pub function: Option<FunctionSpec>,
    #[serde(default)]
    pub circle: Option<CircleSection>,
    #[serde(default)]
    pub series: SeriesSection,
    /// Truncation levels of the bound trace; off when absent.
    #[serde(default)]
    pub trace_levels: Option<u32>,
    /// Break the collar hypothesis on purpose (gluing only).
    #[serde(default)]
    pub violate: bool,
    #[serde(default)]
    pub study: Option<StudySection>,
    #[serde(default)]
    pub output: OutputSection,
}

/// Failure to read or validate a scenario.
#[derive(Debug)]
pub struct ScenarioError(pub String);

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ScenarioError {}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError(msg.into())
}

/// `log|f|` with the points where it is `-inf`.
#[derive(Clone)]
pub struct Subject {
    pub f: Arc<dyn Fn(Point) -> f64 + Send + Sync>,
    pub poles: Vec<Point>,
    pub description: String,
}

impl Scenario {
    pub fn parse(text: &str, origin: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = toml::from_str(text).map_err(|e| invalid(format!("{origin}: {e}")))?;
        s.check().map_err(|e| invalid(format!("{origin}: {}", e.0)))?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Scenario::parse(&text, &path.display().to_string())
    }

    /// Semantic checks beyond the schema: required sections per pipeline
    /// and constructible objects.
    pub fn check(&self) -> Result<(), ScenarioError> {
        if self.grid.cells < 8 {
            return Err(invalid(format!("grid.cells = {} is too coarse", self.grid.cells)));
        }
        let need = |ok: bool, what: &str| if ok { Ok(()) } else { Err(invalid(format!("pipeline {} needs {what}", self.pipeline))) };
        match self.pipeline {
            Pipeline::Verdict => {
                need(self.hole.is_some(), "a [hole] section")?;
                need(self.zeros.is_some(), "a [zeros] section")?;
                if self.trace_levels.is_some() {
                    need(self.radius.is_some(), "radius for the bound trace")?;
                    need(self.function.is_some(), "a [function] section for the bound trace")?;
                }
            }
            Pipeline::PoissonJensen => {
                need(self.function.is_some(), "a [function] section")?;
                need(self.circle.is_some(), "a [circle] section")?;
            }
            Pipeline::Duality => need(self.circle.is_some(), "a [circle] section")?,
            Pipeline::Balayage => {
                need(self.function.is_some(), "a [function] section")?;
                need(self.radius.is_some(), "radius")?;
            }
            Pipeline::Gluing | Pipeline::Continuation => {
                need(self.hole.is_some(), "a [hole] section")?;
                need(self.radius.is_some(), "radius")?;
            }
            Pipeline::ConvergenceStudy => need(self.study.is_some(), "a [study] section")?,
        }
        if let Some(z) = &self.zeros {
            ZeroSet::from_spec(z).map_err(|e| invalid(format!("zeros: {e}")))?;
        }
        if let Some(g) = &self.growth {
            GrowthModel::from_spec(g, &self.domain).map_err(|e| invalid(format!("growth: {e}")))?;
        }
        if let Some(FunctionSpec::Formula { expr }) = &self.function {
            formula_xy(expr).map_err(|e| invalid(format!("function.expr: {e}")))?;
        }
        if let Some(TestFunctionSpec::Formula { expr }) = &self.test_function {
            formula_xy(expr).map_err(|e| invalid(format!("test_function.expr: {e}")))?;
        }
        if let Some(r) = self.radius {
            if !(r > 0.0) {
                return Err(invalid(format!("radius = {r} must be positive")));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.pipeline.to_string())
    }

    pub fn pole(&self) -> Point {
        self.pole.map_or(pt(0.0, 0.0), |[x, y]| pt(x, y))
    }

    pub fn lattice(&self) -> potentia::Result<Lattice> {
        self.lattice_with(self.grid.cells)
    }

    /// Lattice with `cells` cells across the bounding box; mask domains keep
    /// their own lattice.
    pub fn lattice_with(&self, cells: usize) -> potentia::Result<Lattice> {
        match self.domain.shape() {
            Shape::Mask(m) => Ok(*m.lattice()),
            _ => Lattice::covering(self.domain.bbox(), cells),
        }
    }

    pub fn hole(&self) -> Option<CompactSet> {
        self.hole.clone().map(CompactSet::new)
    }

    pub fn zero_set(&self) -> potentia::Result<Option<ZeroSet>> {
        self.zeros.as_ref().map(ZeroSet::from_spec).transpose()
    }

    pub fn growth_model(&self) -> potentia::Result<GrowthModel> {
        match &self.growth {
            Some(g) => GrowthModel::from_spec(g, &self.domain),
            None => Ok(GrowthModel::Bounded),
        }
    }

    pub fn subject(&self) -> anyhow::Result<Option<Subject>> {
        let Some(spec) = &self.function else {
            return Ok(None);
        };
        Ok(Some(match spec {
            FunctionSpec::Polynomial { roots } => polynomial_subject(Polynomial::from_roots(roots.iter().map(|&[x, y]| pt(x, y)))),
            FunctionSpec::RandomPolynomial { degree, radius } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let roots = (0..*degree).map(|_| {
                    let r = radius * rng.gen::<f64>().sqrt();
                    Point::from_polar(r, std::f64::consts::TAU * rng.gen::<f64>())
                });
                polynomial_subject(Polynomial::from_roots(roots.collect::<Vec<_>>()))
            }
            FunctionSpec::Blaschke { factors } => {
                let zeros = self.zero_set()?.ok_or_else(|| invalid("function kind blaschke needs [zeros]"))?;
                let pts = zeros.take(*factors)?;
                let b = BlaschkeProduct::new(pts.clone())?;
                Subject {
                    f: Arc::new(move |z| b.log_abs(z)),
                    poles: pts,
                    description: format!("log|B| with {factors} factors of {}", zeros.describe()),
                }
            }
            FunctionSpec::Formula { expr } => {
                let f = formula_xy(expr)?;
                Subject { f: Arc::new(move |z| f.eval(z)), poles: vec![], description: expr.clone() }
            }
        }))
    }
}

fn polynomial_subject(p: Polynomial) -> Subject {
    let poles = p.roots.clone();
    let description = format!("log|p|, roots {:?}", p.roots.iter().map(|r| [r.re, r.im]).collect::<Vec<_>>());
    Subject { f: Arc::new(move |z| p.log_abs(z)), poles, description }
}

pub fn formula_xy(expr: &str) -> potentia::Result<Formula> {
    Formula::parse_xy(expr)
}
