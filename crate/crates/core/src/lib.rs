//! Bid/ask queue dynamics of a one-tick-spread limit order book, their
//! heavy-traffic diffusion limit, price analytics and parameter estimation.
//!
//! Coordinates are always ordered bid first, ask second.

pub mod analytics;
pub mod diffusion;
pub mod error;
pub mod estimation;
pub mod flow;
pub mod io;
pub mod lob;
pub mod rng;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
