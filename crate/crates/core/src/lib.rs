//! Multi-drone volleyball simulation with scripted and hierarchical policies,
//! a rule engine for turn-based play, and an evaluation stack of Nash
//! meta-solvers, population loops, Elo tournaments and exploitability.

pub mod ball;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod metagame;
pub mod oracle;
pub mod par;
pub mod policies;
pub mod racket;
pub mod rules;
pub mod seed;
pub mod tasks;

pub use error::{Error, Result};
