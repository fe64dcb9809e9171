//! Iterated dominance, epistemic Kripke models and type models for finite
//! two-player games, with exact rational arithmetic throughout.

pub mod convergence;
pub mod distribution;
pub mod dominance;
pub mod dot;
pub mod epsilon;
pub mod error;
pub mod fixtures;
pub mod game;
pub mod generate;
pub mod io;
pub mod kripke;
pub mod lp;
pub mod ordered;
pub mod rational;
pub mod types;
pub mod violation;

pub use distribution::{Distribution, EventSet};
pub use epsilon::{Epsilon, TremblingReading};
pub use error::{Error, Result};
pub use game::{Game, MixedStrategy, Player};
pub use kripke::{ProbKripkeModel, StandardKripkeModel};
pub use ordered::OrderedKripkeModel;
pub use rational::Rational;
pub use violation::{Violation, ViolationKind};
