//! Evaluation engine for IoT platform architectures.
//!
//! The crate bundles a criteria catalog (functional and non-functional
//! criteria, each with leading questions mapped onto the five platform
//! layers), a Likert-based single-platform assessment engine, an AHP
//! multi-platform ranking engine and a file-backed document store.

pub mod ahp;
pub mod assessment;
pub mod catalog;
pub mod export;
pub mod store;

pub use ahp::{
    build_matrix, composite_weights, consistency, kiviat_series, priority_vector, rank_platforms,
    scale_from_label, AhpError, ComparisonMatrix, ConsistencyConfig, ConsistencyReport, Direction,
    Judgment, KiviatChart, PairwiseJudgment, PriorityVector, RankingInput, RankingResult,
};
pub use assessment::{
    AssessmentError, AssessmentProject, ConsensusRule, CriterionScore, LayerScore, LikertRating,
    Response, SatisfactionReport,
};
pub use catalog::{
    filter_criteria, lint_catalog, load_catalog, Catalog, CatalogError, Criterion, Dimension,
    Layer, LeadingQuestion, LintFinding,
};
pub use store::{DocumentKind, DocumentSummary, Store, StoreError, StoredDocument};
