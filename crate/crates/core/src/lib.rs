//! Strategy uniformization for concurrent games on finite arenas.

pub mod constraint;
pub mod error;
pub mod fixtures;
pub mod format;
pub mod game;
pub mod solve;
pub mod strategy;
pub mod uniformize;
pub mod wincond;

pub use error::{Error, Result};
