//! Grouped satisficing paths for finite games.
//!
//! A satisficing path is a sequence of joint strategies in which every player
//! (or, in the grouped variant, every group of players) that is currently an
//! ε-best responder keeps its strategy at the next step. This crate provides
//!
//! * finite normal-form games, their mixed extensions, ε-best responses and
//!   sub-game restriction ([`NormalFormGame`], [`restrict_subgame`]);
//! * path legality, successor sampling, local-minimum and preservation checks
//!   and a freeze-and-solve path constructor ([`dynamics`]);
//! * desk-scale equilibrium solvers used as the sub-game oracle ([`solvers`]);
//! * finite-state discounted stochastic games: policy evaluation, induced
//!   MDPs, frozen-player sub-games, the k-step history compiler and the
//!   stationary path constructor ([`markov`]).
//!
//! All numerics are generic over [`Scalar`] (`f32`, `f64`); the `*64`
//! aliases below fix the common double-precision instantiation.

// Validation compares as `!(x >= 0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
mod game;
pub mod markov;
mod partition;
mod profile;
pub mod rng;
mod scalar;
pub mod simplex;
pub mod solvers;
mod subgame;

pub use error::{Error, Result};
pub use game::{GameSpec, NormalFormGame, MAX_TENSOR_ENTRIES};
pub use partition::{GroupPartition, SatisficingConfig};
pub use profile::{normalize_distribution, MixedProfile};
pub use scalar::{max_abs, sup_distance, Scalar};
pub use subgame::{restrict_subgame, SubgameRestriction};

pub type NormalFormGame64 = NormalFormGame<f64>;
pub type MixedProfile64 = MixedProfile<f64>;
pub type SatisficingConfig64 = SatisficingConfig<f64>;
pub type PathRecord64 = dynamics::PathRecord<MixedProfile<f64>, f64>;
pub type StochasticGame64 = markov::StochasticGame<f64>;
pub type StationaryPolicyProfile64 = markov::StationaryPolicyProfile<f64>;
pub type StochasticPathRecord64 = dynamics::PathRecord<markov::StationaryPolicyProfile<f64>, f64>;
