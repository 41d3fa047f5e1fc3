//! Toolkit for the `G14` graph-coloring nonlocal game.
//!
//! The pipeline: define the game on a graph ([`game`]), compute its exact
//! classical value, construct the quaternion-based perfect quantum strategy
//! from an orthogonal representation ([`strategy`]), compile the strategy to
//! trapped-ion native gates ([`circuits`]), simulate the circuits under
//! depolarizing/readout noise ([`simulator`]), estimate win rates with
//! Bernstein confidence intervals and SPAM correction ([`stats`]), and test
//! the data against the non-signaling polytope ([`nonsignaling`]).

pub mod behavior;
pub mod circuits;
pub mod counts;
pub mod error;
pub mod game;
pub mod linalg;
pub mod optim;
pub mod strategy;
pub mod graph;

pub use error::{Error, Result};
