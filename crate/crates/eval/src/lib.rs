//! MovieLens-100k walkthrough, offline evaluation and brute-force oracles
//! for the recommendation platform.

pub mod eval;
pub mod metrics;
pub mod movielens;
pub mod oracle;
pub mod recovery;
pub mod split;
pub mod walkthrough;
