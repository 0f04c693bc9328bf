//! Parameter-free online convex optimization with varying norms.
//!
//! The building blocks are a one-dimensional coin-betting learner
//! ([`coin_betting`]), constrained FTRL over the unit ball of an increasing
//! sequence of seminorms ([`ftrl`], [`norm_schedule`]), and reductions that
//! combine the two into learners over arbitrary domains ([`reduction`]).
//! [`baselines`] holds reference learners and regret-bound evaluators, and
//! [`experiments`] the stream generators and run harness behind the CLI.

// `!(x > 0.0)` deliberately treats NaN as failing the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod baselines;
pub mod coin_betting;
pub mod error;
pub mod experiments;
pub mod ftrl;
pub mod learner;
pub mod linalg;
pub mod norm_schedule;
pub mod reduction;

pub use error::{Error, Result};
pub use learner::OnlineLearner;
pub use linalg::{DenseVector, SymMatrix};
