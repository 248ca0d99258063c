//! Evolution of A* guiding heuristics with language models.
//!
//! The crate holds the search engine ([`search`]), the sliding puzzle and
//! warehouse pre-marshalling domains ([`spp`], [`upmp`]), instance files
//! ([`instance`]), the fitness measure ([`fitness`]), prompt assembly and
//! answer parsing ([`prompt`]), model clients ([`llm`]), heuristic
//! evaluation ([`evaluator`]) and the evolutionary loop ([`evolution`]).
//!
//! The search is generic over the [`Score`] type and the fitness over any
//! `num_traits` number; the aliases below fix the types used by the
//! built-in scorers and the evolution loop.

pub mod evaluator;
pub mod evolution;
pub mod fitness;
pub mod instance;
pub mod llm;
pub mod prompt;
pub mod rng;
pub mod scalar;
pub mod search;
pub mod spp;
pub mod upmp;

pub use scalar::Score;

/// Score type of the built-in scorers and of worker-reported objectives.
pub type DefaultScore = f64;
/// Fitness scalar stored in heuristic records.
pub type Fitness = f64;
pub type PuzzleSearchResult = search::SearchResult<spp::PuzzleMove>;
pub type WarehouseSearchResult = search::SearchResult<upmp::LaneMove>;
