//! Multi-floor grid-world object navigation with an exploration, recovery
//! and reminiscing agent.

pub mod config;
pub mod fast_thinking;
pub mod grid;
pub mod locomotion;
pub mod mapping;
pub mod priors;
pub mod reasoner;
pub mod render;
pub mod recovery;
pub mod reminiscing;
pub mod runner;
pub mod raycast;
pub mod state_machine;
mod search;
pub mod world;
