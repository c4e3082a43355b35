//! Seeded generators, transforms and scoring protocols for controlled
//! synthetic knowledge benchmarks.
//!
//! The crate is organised by pipeline stage:
//!
//! - [`lexicon`]: collision-free nonsense words bound to real-world terms.
//! - [`kg`]: the semantic hierarchy, its deductive closure, statement
//!   reversal and finite-model syllogistic entailment.
//! - [`datasets`]: the benchmark families (simple reversals, simple
//!   syllogisms, fictional celebrities, semantic structure) and their
//!   on-disk bundle format.
//! - [`derivatoid`]: the math-like rewrite process benchmark.
//! - [`transform`]: sentence splitting and LM-driven augmentation.
//! - [`lm_client`]: backend abstraction with cache, retry and offline mocks.
//! - [`eval`]: multiple-choice likelihood scoring, ROUGE-L and aggregation.
//! - [`pipeline`]: the `gen / split / augment / eval / report` commands.

pub mod datasets;
pub mod derivatoid;
pub mod eval;
pub mod hashing;
pub mod kg;
pub mod lexicon;
pub mod lm_client;
pub mod pipeline;
pub mod rng;
pub mod transform;
