//! Heads-up no-limit hold'em equilibrium computation and safe real-time re-solving.
#![no_std]

extern crate alloc;

pub mod abstraction;
pub mod agent;
pub mod arena;
pub mod blueprint;
pub mod br;
pub mod cards;
pub mod cfr;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod game;
pub mod hash;
pub mod hunl;
pub mod subgame;
pub mod tree;

pub use error::Error;

pub(crate) type FxHashMap<K, V> = hashbrown::HashMap<K, V, rustc_hash::FxBuildHasher>;
