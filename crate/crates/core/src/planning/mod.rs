//! Optimistic planning over confidence sets.

mod evi;
mod inner;
mod model;

pub use evi::{evi, evi_tables, OptimisticPlan, PlanningTables, DEFAULT_EVI_MAX_ITER};
pub use inner::{descending_order, inner_maximization, inner_maximization_sorted};
pub use model::ConfidenceModel;
