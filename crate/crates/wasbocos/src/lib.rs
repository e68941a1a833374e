//! Exact-arithmetic simulation and verification engine for bounded-confidence
//! opinion dynamics with truth seekers (the WASBOCOS model family).
//!
//! Everything numeric is an arbitrary-precision rational; floating point only
//! appears at the plotting/rendering boundary and is documented as lossy there.

pub mod config_io;
pub mod export;
pub mod fixtures;
pub mod model;
pub mod rational;
pub mod structure;
pub mod sweep;
pub mod verify;

pub use model::{simulate, AgentKind, OpinionState, SystemConfig, Trajectory};
pub use rational::Rational;
