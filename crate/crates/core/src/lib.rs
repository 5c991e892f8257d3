//! Task-oriented dialog workbench: synthetic corpora, a turn-unrolled
//! encoder-decoder model, belief-state retrieval over a ball tree, a hybrid
//! dispatcher, and the evaluation metrics that score all of them.
//!
//! The crate is `no_std` + `alloc`; everything here is pure computation over
//! in-memory data. File formats, IO, and the command-line front end live in
//! the companion `dialogforge` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod belief;
pub mod corpus;
pub mod hybrid;
pub mod metrics;
pub mod responders;
pub mod seq2seq;
