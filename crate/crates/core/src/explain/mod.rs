//! Single-explanation algorithms: deletion, dichotomic search, parallel
//! dichotomic search with feature disjunction, and the ordering and seeding
//! heuristics they share.

mod deletion;
mod order;
mod probe;
mod search;
#[cfg(test)]
mod tests;

pub use deletion::{deletion_cxp, extract_axp, seed_weak_cxp, WeakCxpSeed};
pub(crate) use deletion::{shrink_axp, shrink_cxp};
pub use order::{order_features, sensitivity_scores, FeatureOrder, OrderStrategy};
pub use search::{dichotomic_cxp, feat_disjunct, swift_cxp, SearchOptions, SearchState, SwiftParams};
