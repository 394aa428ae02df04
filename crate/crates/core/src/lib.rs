//! Corpus preparation and evaluation for hinted back-translation.
//!
//! The crate covers everything around the translation models: reading and
//! validating parallel corpora, computing pair quality scores, partitioning
//! back-translated pairs into quality bins, detecting pairs that need
//! transliteration, assembling tagged training sets, and the evaluation
//! statistics used to compare systems trained on them.
//!
//! Translation and embedding models stay external. Their outputs enter as
//! plain files (score sidecars, embedding sidecars, round-trip
//! translations) and translators are invoked as opaque commands by
//! [`pipeline::run_iterative`].
//!
//! Per-record work (scoring, classification, bootstrap BLEU) goes through
//! [`Execution`], which uses rayon when the `parallel` feature is enabled
//! and a plain sequential loop otherwise. Results are identical either way.

pub mod assemble;
pub mod binning;
pub mod corpus_io;
pub mod error;
pub mod eval;
mod exec;
pub mod kv;
pub mod pipeline;
pub mod quality;
pub mod translit;

pub use error::{Error, Result};
pub use exec::Execution;

/// Identity of the pseudo-random generator used for every seeded operation.
/// Written into manifests so assignments can be reproduced.
pub const PRNG_IDENTITY: &str = "ChaCha8Rng (rand_chacha 0.9, seed_from_u64)";

/// Version string recorded in manifests.
pub const TOOL_VERSION: &str = concat!("hintedbt ", env!("CARGO_PKG_VERSION"));

pub(crate) fn seeded_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
