pub mod error;
pub mod commgraph;
pub mod graphs;
pub mod lrbound;
pub mod qasim;
pub mod ratio;
pub mod schedule;

pub use error::{Error, Result};
pub use graphs::{BallDatabase, BallHashKey, MarkedBall, Omega};
