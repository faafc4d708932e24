//! Uniqueness verdicts for subharmonic functions vanishing on a zero set.

mod growth;
mod series;
mod trace;
mod verdict;
mod zeros;

pub use growth::{check_majorization, growth_integral, GrowthIntegral, GrowthModel, GrowthSpec, MajorizationReport};
pub use series::{classify_series, Classification, PartialSum, SeriesOptions, SeriesReport};
pub use trace::{contradiction_bound_trace, BoundTrace, TraceInput, TraceRow};
pub use verdict::{
    divergence_sum, gate, uniqueness_verdict, Condition6, Condition7b, Condition7c, Provenance, UniquenessReport,
    Verdict, VerdictInput, Witness, WITNESS_FACTORS,
};
pub use zeros::{circle_points, poincare_lelong, MultiplicityCheck, ZeroSequence, ZeroSet, ZeroSpec};
