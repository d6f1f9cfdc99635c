//! Data-bootstrap pipeline around `benchtop-core`: deterministic seeding,
//! planner clients (scripted and remote), success-filtered collection into
//! replayable datasets, and fixed-budget evaluation with confidence
//! intervals. Every run is a pure function of its config — reruns produce
//! byte-identical datasets regardless of thread count.

pub mod collect;
pub mod dataset;
pub mod evaluate;
pub mod planner;
pub mod recipe;
pub mod replay;
pub mod report;
pub mod seeds;
