//! Goal-conditioned reinforcement learning with hindsight relabeling and a
//! density-guided goal curriculum.
//!
//! The crate provides the full algorithmic stack for sparse-reward multi-goal
//! training:
//!
//! * [`types`] — goals, transitions, trajectories and the sparse reward.
//! * [`kde`] — Gaussian kernel density estimation over recent goals.
//! * [`curriculum`] — density-based goal selection, ball augmentation,
//!   entropy ranking and the exploration-goal schedule.
//! * [`replay`] — trajectory storage, hindsight relabeling and transition
//!   augmentation.
//! * [`agent`] — a self-contained DDPG agent (MLPs, Adam, input
//!   normalization, target networks, binary snapshots).
//! * [`envs`] — three analytic 2-D environments with goal-based reward.
//!
//! Everything here is deterministic given the caller's RNG and performs no
//! IO; logging, file formats and the CLI live in the companion `herd-cli`
//! crate. The crate is `no_std`-compatible (with `alloc`): disable the
//! default `std` feature to use it in that configuration.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod agent;
pub mod curriculum;
pub mod envs;
mod error;
pub mod kde;
pub(crate) mod math;
pub mod replay;
pub mod seeding;
pub mod types;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
