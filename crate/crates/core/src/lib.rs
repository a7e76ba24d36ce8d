//! Cost-sensitive and multi-objective boosting on finite domains.
//!
//! The crate computes restricted game values and threshold ladders of cost
//! matrices, decides which guarantee vectors are attainable by random
//! guessing, and runs Hedge-based boosters (binary, weak-to-list and
//! multi-objective) against simulated weak learners.
//!
//! ```
//! use costboost::games::{game_value, CostMatrix, LabelSet};
//!
//! let w = CostMatrix::binary(1.0, 0.25).unwrap();
//! let v = game_value(&w, LabelSet::full(2)).unwrap();
//! assert!((v.value - 0.2).abs() < 1e-9);
//! ```

pub mod attainability;
pub mod boosting;
pub mod error;
pub mod games;
pub mod harness;
pub mod learners;
pub mod lp;

pub use error::{Error, Result};
