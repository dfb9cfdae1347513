//! Inequality cases, test corpus, ratio evaluation and studies.

mod case;
mod corpus;
mod evaluate;
mod invariants;
mod matrix;
mod studies;

pub use case::{homogeneous_endpoint, CaseName, InequalityCase, MatrixPoint};
pub use corpus::{
    default_corpus, generate_corpus, smooth_step, values_hash, Bump, Center, CorpusEntry,
    CorpusSpec, Family, Manifest, ManifestEntry,
};
pub use evaluate::{
    evaluate_named, evaluate_theorem1, evaluate_theorem2, ratio_of, EvalSettings, Evaluator,
    RatioReport,
};
pub use invariants::{
    beta_range_invariant, dominance_invariants, finiteness_invariant, function_invariants,
    invariant_suite, polynomial_invariant, translation_invariant, InvariantResult,
};
pub use matrix::{Expansion, LambdaChoice, LambdaName, Skipped, TestMatrix};
pub use studies::{
    evaluate_suite, flatness, pointwise_refinement, pointwise_study, refinement_study,
    relative_drift, sample_pair, scaling_study, summarize, summarize_pointwise, CaseSummary,
    PointwiseDrift, PointwiseSummary, RefinementRow, ScalingRow, TaggedPointwise,
};
