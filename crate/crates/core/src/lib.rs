//! A finite-resolution simulator for a ccc forcing whose extension carries a
//! cofinal family of meager sets `E_a = E_{c_rank(a), d_a}` ordered by
//! inclusion exactly like a given partial order `Q`.
//!
//! * [`poset`]: the input order, ranks, `≪`, linear extensions.
//! * [`blocks`]: block refinement `⊑`, `≤*`, membership in `E_{x,f}`, and the
//!   non-inclusion witness.
//! * [`conditions`]: forcing conditions, names, restriction, and the order.
//! * [`engine`]: the ladder extension, incomparability blocks, and generic runs.
//! * [`harness`]: scenarios, the inclusion matrix, coverage, reports.

pub mod blocks;
pub mod cli;
pub mod conditions;
pub mod engine;
pub mod generators;
pub mod harness;
pub mod poset;
