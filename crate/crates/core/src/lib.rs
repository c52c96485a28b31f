//! Zero-sum stochastic games with past-discounted payoffs.
//!
//! The crate evaluates payoff functionals exactly on ultimately periodic
//! weight sequences and solves games by reduction to discounted,
//! mean-payoff and liminf games.

pub mod arena;
pub mod discounted;
pub mod error;
pub mod experiments;
pub mod generate;
pub mod graph;
pub mod liminf;
pub mod matrix;
pub mod mean;
pub mod par;
pub mod payoff;
pub mod rational;
pub mod report;
pub mod window;

pub use arena::{Arena, ArenaBuilder, ArenaClass, Player, PlayerCount, StationaryStrategy};
pub use error::{Error, Result};
pub use par::Exec;
pub use payoff::{PayoffKind, UpSeq};
pub use rational::Rational;
