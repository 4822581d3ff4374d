//! Extended fuzzy cognitive maps for modelling the beliefs, goals and
//! emotions of an observed agent.
//!
//! - [`fcm`]: concepts, state-dependent linkage weights and the synchronous
//!   update law.
//! - [`scenarios`]: the two outdoor-activity networks, model variants and
//!   linguistic term tables.
//! - [`identification`]: per-participant grid search, MSE evaluation, batch
//!   partitions and a synthetic survey generator.
//! - [`inverse`]: action prediction from the belief-goal pair and inverse
//!   inference of emotions from observed actions.

pub mod error;
pub mod fcm;
pub mod format;
pub mod identification;
pub mod inverse;
pub mod scenarios;

pub use error::{Error, Result};
