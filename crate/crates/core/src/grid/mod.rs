//! Grid-sampled functions, discrete Laplacian, Riesz measures and integration
//! against measures.

mod function;
mod lattice;
mod measure;
mod riesz;
mod stencil;

pub use function::GridFunction;
pub use lattice::Lattice;
pub use measure::{Atom, AtomicMeasure, Density, Integrand};
pub use riesz::{discrete_flux, riesz_measure, ExcisionBox, PoleCharge, RieszExtraction, RieszMeasure, RieszOptions};
pub use stencil::{
    discrete_laplacian, discrete_submean_test, harmonicity_check, truncation_scale, HarmonicityReport, NodeDefect,
    SubmeanOptions, SubmeanReport,
};

pub(crate) use measure::ExtSum;
