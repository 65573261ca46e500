//! Hybrid corpus construction and test-set adaptation around a pluggable translator.
//!
//! Translation models live outside this crate; every "translate" step goes
//! through a [`TranslatorSpec`], which can be an external command, a file of
//! precomputed translations, or a mock for testing.

mod adapt;
mod hybrid;
mod translate;

pub use adapt::{adapt_to_test, run_finetune_hook, AdaptationOutput, AdaptationPlan};
pub use hybrid::{build_hybrid, ratio_filter, FilterStats, HybridBuildReport, RatioFilterConfig};
pub use translate::{load_lexicon, translate, TranslatorSpec, DEFAULT_BATCH_SIZE, DEFAULT_TIMEOUT};
