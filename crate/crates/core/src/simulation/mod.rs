//! Monte Carlo studies under the column-binomial model.
//!
//! All studies are deterministic functions of their configuration: every
//! dataset draws from its own keyed stream (see [`Streams`]), datasets run in
//! parallel on the current rayon pool, and reductions happen sequentially in
//! index order. The thread count never changes a result.

mod design;
mod rng;
mod studies;
mod summary;

pub use design::SimulationDesign;
pub use rng::{Stream, Streams, RNG_ALGORITHM};
pub use studies::{
    bias_study, convergence_check, coverage_study, draw_p1, generate_counts, generate_dataset,
    ground_truth_sd, BiasRecord, ConvergenceConfig, ConvergencePoint, CoverageRecord,
    DatasetSampler, GroundTruth, COVERAGE_LEVEL, DEFAULT_CONVERGENCE_REPLICATES,
};
pub use summary::{BiasAggregate, CoverageAggregate, StudyBody, StudyKind, StudySummary};
